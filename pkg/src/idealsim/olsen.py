"""Ideal perturbations ``T + K`` with ``||p(T + K)|| = ||p(T) mod I||``.

Finite-dimensional model of the Calkin setting: the ideal blocks play the
role of the compact operators and the off-ideal blocks carry the essential
part.  Also contains the kernel-chain triangularization of an operator
annihilated by a product of linear factors, and the nilpotent consequence
``r(p(T)) = |p(0)|``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from . import linalg
from .algebra import (
    AlgebraElement,
    IdealSpec,
    Polynomial,
    _poly_block,
    is_in_ideal,
    poly_eval,
    quotient_norm,
    quotient_spec_radius,
)
from .errors import (
    InvalidInput,
    NotAnnihilated,
    NotInSigma,
    NumericalFailure,
    PreconditionViolation,
    QuotientEmpty,
)
from .similarity import SimilarityWitness, optimal_similarity

__all__ = [
    "PerturbationResult",
    "TriangularizationResult",
    "sigma_membership",
    "fill_eigenvalue",
    "spectral_fill",
    "olsen_perturbation",
    "approximate_olsen",
    "minimal_polynomial_factors",
    "kernel_triangularize",
    "nilpotent_poly_radius",
    "nilpotent_certificate",
]

SIGMA_TOL = 1e-10
SIGMA_MARGIN = 1e-6


@dataclass
class PerturbationResult:
    k: AlgebraElement
    achieved: list[float]
    targets: list[float]
    mode: Literal["exact", "approximate"]
    epsilon: float
    fill: AlgebraElement
    fill_eigenvalue: complex
    witness: SimilarityWitness
    in_ideal_residual: float


def _require_quotient(ideal: IdealSpec) -> None:
    if ideal.quotient_is_zero:
        raise QuotientEmpty("the ideal is the whole algebra; the quotient is zero")


def sigma_membership(
    t: AlgebraElement,
    ideal: IdealSpec,
    polys: Sequence[Polynomial],
    tol: float = SIGMA_TOL,
) -> tuple[bool, list[float]]:
    """Whether ``r(p_i(T mod I)) < ||p_i(T mod I)||`` for every polynomial.

    Returns the membership flag and the margins
    ``||p_i(T mod I)|| - r(p_i(T mod I))``.  A margin counts as positive
    only above ``tol * (1 + ||p_i(T mod I)||)`` so normal quotient parts,
    where the two quantities agree up to rounding, are not members.
    """
    _require_quotient(ideal)
    margins = []
    member = True
    for p in polys:
        pt = poly_eval(p, t)
        qn = quotient_norm(pt, ideal)
        m = qn - quotient_spec_radius(pt, ideal)
        margins.append(m)
        if not m > tol * (1.0 + qn):
            member = False
    return member, margins


def fill_eigenvalue(t: AlgebraElement, ideal: IdealSpec) -> complex:
    """Eigenvalue of the quotient part with largest modulus; ties go to the
    largest real part, then the largest imaginary part."""
    _require_quotient(ideal)
    ev = np.concatenate([np.linalg.eigvals(t.blocks[b]) for b in ideal.quotient_blocks])
    mod = np.abs(ev)
    tie = 1e-12 * (1.0 + mod.max())
    cand = ev[mod >= mod.max() - tie]
    cand = cand[cand.real >= cand.real.max() - tie]
    return complex(cand[np.argmax(cand.imag)])


def spectral_fill(t: AlgebraElement, ideal: IdealSpec) -> AlgebraElement:
    """``K_1`` in ``I`` replacing every ideal block of ``T`` by ``lambda_0 * 1``.

    Then the spectrum of ``T + K_1`` is the spectrum of the quotient part, so
    ``r(p(T + K_1)) = r(p(T mod I))`` for every polynomial ``p``.
    """
    lam = fill_eigenvalue(t, ideal)
    blocks = []
    for b, blk in enumerate(t.blocks):
        if b in ideal.ideal_blocks:
            blocks.append(lam * np.eye(blk.shape[0]) - blk)
        else:
            blocks.append(np.zeros_like(blk))
    return AlgebraElement(t.signature, blocks)


def _perturb(t, ideal, polys, mode, epsilon) -> PerturbationResult:
    polys = list(polys)
    if not polys:
        raise InvalidInput("need at least one polynomial")
    lam = fill_eigenvalue(t, ideal)
    k1 = spectral_fill(t, ideal)
    t1 = t + k1
    family = [poly_eval(p, t1) for p in polys]
    w = optimal_similarity(family, ideal, mode=mode, epsilon=epsilon if mode == "epsilon" else 1e-3)
    t2 = t1.conjugate_by(w.y)
    k = t2 - t
    perturbed = t + k
    achieved = [poly_eval(p, perturbed).norm() for p in polys]
    targets = [quotient_norm(poly_eval(p, t), ideal) for p in polys]
    _, resid = is_in_ideal(k, ideal)
    return PerturbationResult(
        k=k,
        achieved=achieved,
        targets=targets,
        mode="exact" if mode == "exact" else "approximate",
        epsilon=0.0 if mode == "exact" else float(epsilon),
        fill=k1,
        fill_eigenvalue=lam,
        witness=w,
        in_ideal_residual=resid,
    )


def olsen_perturbation(
    t: AlgebraElement,
    ideal: IdealSpec,
    polys: Sequence[Polynomial],
    min_margin: float = SIGMA_MARGIN,
    tol: float = 1e-6,
) -> PerturbationResult:
    """One ``K`` in ``I`` with ``||p_i(T + K)|| = ||p_i(T) mod I||`` for all ``i``.

    Requires ``T`` to lie in Sigma for the given polynomials with every margin
    above ``min_margin``.  ``K_1`` from :func:`spectral_fill` pushes each
    ``r(p_i(T + K_1))`` below the quotient norm; the exact branch of
    :func:`optimal_similarity` on the commuting family ``p_i(T + K_1)`` then
    supplies ``y = 1 + e`` and ``K = y (T + K_1) y^{-1} - T``.
    """
    member, margins = sigma_membership(t, ideal, polys)
    if not member or min(margins) <= min_margin:
        raise NotInSigma(f"T is not in Sigma with margin > {min_margin:g}: margins {margins}")
    res = _perturb(t, ideal, polys, "exact", 0.0)
    worst = max(abs(a - b) for a, b in zip(res.achieved, res.targets))
    if worst > tol:
        raise NumericalFailure(
            f"exact perturbation missed its targets by {worst:.3e} (margins {margins})"
        )
    return res


def approximate_olsen(
    t: AlgebraElement,
    ideal: IdealSpec,
    polys: Sequence[Polynomial],
    epsilon: float,
) -> PerturbationResult:
    """``K`` in ``I`` with ``||p_i(T + K)||`` within ``epsilon`` above ``||p_i(T) mod I||``.

    No membership condition is needed: after the spectral fill,
    ``r(p_i(T + K_1)) <= ||p_i(T) mod I||`` and the epsilon branch of
    :func:`optimal_similarity` finishes the job.
    """
    _require_quotient(ideal)
    if not epsilon > 0:
        raise InvalidInput("epsilon must be positive")
    return _perturb(t, ideal, polys, "epsilon", epsilon)


@dataclass
class TriangularizationResult:
    """Unitary ``u`` such that ``u^* T u`` is block upper triangular.

    Column block ``s`` of ``u`` spans the ``s``-th chain space and the
    corresponding diagonal block of ``u^* T u`` is ``diagonal_scalars[s] * 1``.
    Zero-dimensional chain steps are kept in ``chain_dims`` but have no
    diagonal block.
    """

    u: np.ndarray
    chain_dims: list[int]
    chain_scalars: list[complex]
    factors: list[tuple[complex, int]]
    residual: float
    diagonal_defect: float
    unitary_defect: float
    blocks: list[tuple[int, int]] = field(default_factory=list)

    @property
    def diagonal_scalars(self) -> list[complex]:
        return [t for t, d in zip(self.chain_scalars, self.chain_dims) if d > 0]

    def multiplicities(self) -> list[tuple[complex, int]]:
        """``(t_m, total dimension)`` per factor, i.e. the algebraic multiplicities."""
        out = []
        for t, _ in self.factors:
            dim = sum(d for s, d in zip(self.chain_scalars, self.chain_dims) if s == t)
            out.append((t, dim))
        return out

    def diagonal_blocks(self, m: np.ndarray) -> list[np.ndarray]:
        x = self.u.conj().T @ m @ self.u
        return [x[i:j, i:j] for i, j in self.blocks]


def _cluster(values: np.ndarray, radius: float) -> list[np.ndarray]:
    order = np.lexsort((values.imag, values.real))
    values = values[order]
    labels = list(range(len(values)))

    def find(i):
        while labels[i] != i:
            labels[i] = labels[labels[i]]
            i = labels[i]
        return i

    for i in range(len(values)):
        for j in range(i + 1, len(values)):
            if abs(values[i] - values[j]) <= radius:
                labels[find(j)] = find(i)
    groups: dict[int, list] = {}
    for i in range(len(values)):
        groups.setdefault(find(i), []).append(values[i])
    return [np.array(g) for g in groups.values()]


def _scale(t: np.ndarray, shifts) -> float:
    return max(1.0, linalg.op_norm(t) + max((abs(s) for s in shifts), default=0.0))


def minimal_polynomial_factors(
    t,
    radius: float = 1e-3,
    kernel_tol: float = linalg.KERNEL_TOL,
) -> list[tuple[complex, int]]:
    """Factorization ``[(t_m, k_m)]`` of the minimal polynomial of ``t``.

    Eigenvalues within ``radius * (1 + ||t||)`` of each other are merged
    (a defective eigenvalue of index ``k`` is split by roughly
    ``eps^{1/k}`` in floating point) and represented by their mean, which
    is accurate to working precision.  ``k_m`` is the first power at which
    the kernel of ``(t - t_m)^k`` reaches the cluster size.
    """
    t = linalg.as_matrix(t)
    n = t.shape[0]
    ev = np.linalg.eigvals(t)
    groups = _cluster(ev, radius * (1.0 + linalg.op_norm(t)))
    factors = []
    for g in groups:
        c = complex(np.mean(g))
        if abs(c.imag) <= 1e-14 * (1.0 + abs(c)):
            c = complex(c.real, 0.0)
        shifted = t - c * np.eye(n)
        power = np.eye(n, dtype=complex)
        scale = _scale(t, [c])
        k = len(g)
        for l in range(1, len(g) + 1):
            power = shifted @ power
            dim = linalg.kernel_basis(power, kernel_tol, scale=scale**l).shape[1]
            if dim >= len(g):
                k = l
                break
        factors.append((c, k))
    factors.sort(key=lambda f: (f[0].real, f[0].imag))
    return factors


def kernel_triangularize(
    t,
    factors: Sequence[tuple[complex, int]] | None = None,
    kernel_tol: float = linalg.KERNEL_TOL,
    annihilation_tol: float = 1e-8,
) -> TriangularizationResult:
    """Block upper-triangular form from the kernel chain of a product of linear factors.

    With ``(T - t_N)^{k_N} ... (T - t_1)^{k_1} = 0`` the chain
    ``ker(T - t_1) ⊆ ker(T - t_1)^2 ⊆ ... ⊆ ker((T - t_2)(T - t_1)^{k_1}) ⊆ ...``
    ends at the whole space.  Taking orthogonal differences of consecutive
    kernels gives a unitary ``u`` in which ``T`` is block upper triangular
    with ``t_1 1`` (``k_1`` times), then ``t_2 1`` (``k_2`` times), and so on
    on the diagonal.  When ``factors`` is omitted it comes from
    :func:`minimal_polynomial_factors`.

    Raises
    ------
    NotAnnihilated
        If the product of the factors is not numerically zero.
    """
    t = linalg.as_matrix(t, "T")
    n = t.shape[0]
    if factors is None:
        factors = minimal_polynomial_factors(t, kernel_tol=kernel_tol)
    factors = [(complex(c), int(k)) for c, k in factors]
    if any(k < 1 for _, k in factors) or not factors:
        raise InvalidInput("factors must be a nonempty list of (t, k) with k >= 1")
    eye = np.eye(n, dtype=complex)
    scale = _scale(t, [c for c, _ in factors])
    total = sum(k for _, k in factors)

    product = eye
    for c, k in factors:
        product = np.linalg.matrix_power(t - c * eye, k) @ product
    pn = linalg.op_norm(product)
    if pn > annihilation_tol * scale**total:
        raise NotAnnihilated(f"product of factors has norm {pn:.3e}")

    basis = np.zeros((n, 0), dtype=complex)
    chain_dims: list[int] = []
    chain_scalars: list[complex] = []
    cumulative = eye
    degree = 0
    for m, (c, k) in enumerate(factors):
        shifted = t - c * eye
        for l in range(k):
            cumulative = shifted @ cumulative
            degree += 1
            last = m == len(factors) - 1 and l == k - 1
            if last:
                kern = eye
            else:
                kern = linalg.kernel_basis(cumulative, kernel_tol, scale=scale**degree)
            new = kern.shape[1] - basis.shape[1]
            if new < 0:
                raise NumericalFailure("kernel chain is not increasing; loosen kernel_tol")
            if new:
                resid = kern - basis @ (basis.conj().T @ kern)
                uu, _, _ = np.linalg.svd(resid, full_matrices=False)
                fresh = uu[:, :new]
                fresh = fresh - basis @ (basis.conj().T @ fresh)
                fresh, _ = np.linalg.qr(fresh)
                basis = np.hstack([basis, fresh])
            chain_dims.append(new)
            chain_scalars.append(c)

    u = basis
    x = u.conj().T @ t @ u
    blocks = []
    start = 0
    for d in chain_dims:
        if d:
            blocks.append((start, start + d))
            start += d
    lower = 0.0
    defect = 0.0
    for i, j in blocks:
        if j < n:
            lower = max(lower, float(np.linalg.norm(x[j:, i:j], 2)))
    for (i, j), c in zip(blocks, [s for s, d in zip(chain_scalars, chain_dims) if d]):
        defect = max(defect, linalg.op_norm(x[i:j, i:j] - c * np.eye(j - i)))
    return TriangularizationResult(
        u=u,
        chain_dims=chain_dims,
        chain_scalars=chain_scalars,
        factors=list(factors),
        residual=lower,
        diagonal_defect=defect,
        unitary_defect=linalg.op_norm(u.conj().T @ u - eye),
        blocks=blocks,
    )


def nilpotent_poly_radius(t, p: Polynomial, tol: float = 1e-8) -> float:
    """``r(p(T)) = |p(0)|`` for nilpotent ``T``.

    The value is certified through the kernel chain of ``T``: in that basis
    ``p(T)`` is block upper triangular with diagonal blocks ``p(0) 1``, and
    the largest spectral radius over those blocks must match ``|p(0)|``
    within ``tol``.  Eigenvalues of ``p(T)`` itself are not used since a
    defective eigenvalue is only resolved to about ``eps^{1/n}``.

    Nilpotency is checked as ``||T^n|| <= 1e-10 (1 + ||T||)^n``.
    """
    t = linalg.as_matrix(t, "T")
    n = t.shape[0]
    tn = np.linalg.matrix_power(t, n)
    if linalg.op_norm(tn) > 1e-10 * (1.0 + linalg.op_norm(t)) ** n:
        raise PreconditionViolation("T is not nilpotent")
    value = float(abs(p(0.0)))
    cert = nilpotent_certificate(t, p)
    if abs(cert - value) > tol * max(1.0, linalg.op_norm(_poly_block(p, t))):
        raise NumericalFailure(f"block-triangular radius {cert:.3e} differs from |p(0)| = {value:.3e}")
    return value


def nilpotent_certificate(t, p: Polynomial) -> float:
    """Largest spectral radius over the diagonal blocks of ``p(T)`` in the kernel-chain basis."""
    t = linalg.as_matrix(t, "T")
    tri = kernel_triangularize(t, [(0.0, t.shape[0])])
    return max(linalg.spec_radius(blk) for blk in tri.diagonal_blocks(_poly_block(p, t)))
