"""Ideal-compatible similarities that bring commuting elements down to their
optimal norm ``max{r(a), ||a mod I||}``.

Conventions: a witness ``e`` lies in ``I`` and the similarity is always
applied as ``(1 + e) a (1 + e)^{-1}``.  The opposite orientation
``(1 + e)^{-1} a (1 + e)`` is recovered by swapping ``e`` for
``(1 + e)^{-1} - 1``, which is again in ``I``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from . import linalg
from .algebra import (
    AlgebraElement,
    IdealSpec,
    commutator_defect,
    is_in_ideal,
    quotient_norm,
)
from .errors import (
    AttainmentUnavailable,
    InvalidInput,
    NotCommuting,
    NumericalFailure,
    PreconditionViolation,
    SingularSimilarity,
    SpectralRadiusViolation,
)

__all__ = [
    "SimilarityWitness",
    "optimal_value",
    "ideal_damping",
    "series_weight",
    "contraction_similarity",
    "optimal_similarity",
    "joint_contraction_pair",
    "simultaneous_contraction",
    "conjugated_norms",
    "power_norms",
]

COMMUTE_TOL = 1e-10
NEAR_BOUNDARY_GAP = 1e-6
EPSILON_INSET = 1e-6


@dataclass
class SimilarityWitness:
    """A similarity ``1 + e`` with ``e`` in the ideal, and what it achieves.

    ``achieved[j]`` is ``||(1+e) a_j (1+e)^{-1}||`` and ``targets[j]`` is
    ``max{r(a_j), ||a_j mod I||}``.  ``bounds[j]`` is the upper bound the
    construction guarantees for ``achieved[j]``: ``1`` for
    :func:`contraction_similarity`, ``delta_j`` for
    :func:`optimal_similarity`.
    """

    e: AlgebraElement
    achieved: list[float]
    targets: list[float]
    bounds: list[float]
    epsilon: float
    condition: float
    in_ideal_residual: float
    warnings: list[str] = field(default_factory=list)

    @property
    def y(self) -> AlgebraElement:
        return self.e + 1.0


def optimal_value(a: AlgebraElement, ideal: IdealSpec) -> float:
    """``max{r(a), ||a mod I||}``: the infimum of ``||(1+e) a (1+e)^{-1}||`` over ``e`` in ``I``."""
    return max(a.spec_radius(), quotient_norm(a, ideal))


def conjugated_norms(a_list: Sequence[AlgebraElement], y: AlgebraElement) -> list[float]:
    return [a.conjugate_by(y).norm() for a in a_list]


def power_norms(t, n_max: int) -> list[float]:
    """``[||t||, ||t^2||, ..., ||t^n_max||]``.

    A matrix similar to a contraction is power bounded, so unbounded growth
    here rules out any similarity to a contraction.  ``[[1, 1], [0, 1]]``
    has ``||t^n|| >= n`` because the (1, 2) entry of ``t^n`` is ``n``.
    """
    t = linalg.as_matrix(t)
    out = []
    p = np.eye(t.shape[0], dtype=complex)
    for _ in range(n_max):
        p = p @ t
        out.append(linalg.op_norm(p))
    return out


def _check_family(a_list: Sequence[AlgebraElement], ideal: IdealSpec) -> list[AlgebraElement]:
    a_list = list(a_list)
    if not a_list:
        raise InvalidInput("need at least one element")
    for a in a_list:
        if a.signature != ideal.signature:
            raise InvalidInput("element signature does not match the ideal")
    return a_list


def _check_commuting(a_list: Sequence[AlgebraElement], tol: float = COMMUTE_TOL) -> None:
    for j in range(len(a_list)):
        for k in range(j + 1, len(a_list)):
            d = commutator_defect(a_list[j], a_list[k])
            if d > tol:
                raise NotCommuting(f"elements {j} and {k} do not commute (defect {d:.3e})")


def ideal_damping(a_list: Sequence[AlgebraElement], ideal: IdealSpec) -> AlgebraElement:
    """A positive contraction ``i0`` in ``I`` with ``||(1 - i0) a_j|| <= 1``.

    On each ideal block ``i0`` is the scalar ``1 - t`` with
    ``t = min(1, 1 / max_j ||a_j||)`` on that block; off-ideal blocks are 0.
    Needs ``||a_j mod I|| <= 1`` for all ``j``.
    """
    a_list = _check_family(a_list, ideal)
    for j, a in enumerate(a_list):
        qn = quotient_norm(a, ideal)
        if qn > 1.0 + 1e-12:
            raise PreconditionViolation(f"element {j} has quotient norm {qn:.12g} > 1")
    sig = ideal.signature
    blocks = []
    for b, n in enumerate(sig.block_dims):
        if b not in ideal.ideal_blocks:
            blocks.append(np.zeros((n, n), dtype=complex))
            continue
        m = max(linalg.op_norm(a.blocks[b]) for a in a_list)
        t = 1.0 if m <= 1.0 else 1.0 / m
        blocks.append((1.0 - t) * np.eye(n, dtype=complex))
    return AlgebraElement(sig, blocks)


def series_weight(
    a_list: Sequence[AlgebraElement],
    i: AlgebraElement,
    ideal: IdealSpec | None = None,
    method: linalg.SteinMethod = "auto",
) -> AlgebraElement:
    """``z = 1 + sum over |k| >= 1 of (a_1^*)^{k_1}...(a_n^*)^{k_n} i a_n^{k_n}...a_1^{k_1}``.

    The multi-index series is computed as ``1 - i + S_1(S_2(...S_n(i)))``
    where ``S_j(Q)`` solves the Stein equation ``X = Q + a_j^* X a_j``.
    Blocks where ``i`` vanishes are left at the identity without solving.
    """
    if not a_list:
        raise InvalidInput("need at least one element")
    sig = i.signature
    for j, a in enumerate(a_list):
        if a.signature != sig:
            raise InvalidInput("element signature does not match i")
        r = a.spec_radius()
        if r >= 1.0:
            raise SpectralRadiusViolation(f"element {j} has r = {r:.12g} >= 1")
    if ideal is not None:
        ok, worst = is_in_ideal(i, ideal, tol=1e-12)
        if not ok:
            raise PreconditionViolation(f"i is not in the ideal (off-ideal norm {worst:.3e})")

    blocks = []
    for b, n in enumerate(sig.block_dims):
        ib = linalg.hermitian_part(i.blocks[b])
        if not np.any(ib):
            blocks.append(np.eye(n, dtype=complex))
            continue
        w = ib
        for a in reversed(a_list):
            w = linalg.stein_solve(a.blocks[b], w, method=method).z
        z = np.eye(n, dtype=complex) - ib + w
        blocks.append(linalg.hermitian_part(z))
    z = AlgebraElement(sig, blocks)

    for b, zb in enumerate(z.blocks):
        lo = np.linalg.eigvalsh(zb)[0]
        if lo < 1.0 - 1e-10 * max(1.0, linalg.op_norm(zb)):
            raise NumericalFailure(f"series weight block {b} has eigenvalue {lo:.3e} < 1")
    return z


def _witness(a_list, ideal, y, targets, bounds, epsilon, warnings=()) -> SimilarityWitness:
    e = y - 1.0
    _, resid = is_in_ideal(e, ideal, tol=1e-12)
    return SimilarityWitness(
        e=e,
        achieved=conjugated_norms(a_list, y),
        targets=list(targets),
        bounds=list(bounds),
        epsilon=epsilon,
        condition=y.condition(),
        in_ideal_residual=resid,
        warnings=list(warnings),
    )


def _contraction_root(a_list, ideal, method) -> AlgebraElement:
    i0 = ideal_damping(a_list, ideal)
    one_minus = 1.0 - i0
    i = 1.0 - one_minus @ one_minus
    z = series_weight(a_list, i, ideal, method=method)
    blocks = []
    for b, zb in enumerate(z.blocks):
        if b in ideal.ideal_blocks:
            blocks.append(linalg.herm_sqrt(zb))
        else:
            # z is exactly 1 off the ideal
            blocks.append(np.eye(zb.shape[0], dtype=complex))
    return AlgebraElement(z.signature, blocks)


def contraction_similarity(
    a_list: Sequence[AlgebraElement],
    ideal: IdealSpec,
    method: linalg.SteinMethod = "auto",
) -> SimilarityWitness:
    """Common ``e`` in ``I`` making every ``a_j`` a contraction.

    Requires commuting ``a_j`` with ``r(a_j) < 1`` and quotient norm at most 1.
    With ``y = z^{1/2}`` for the series weight ``z`` built from the damping
    element, ``a_j^* y^2 a_j <= y^2`` and hence ``||y a_j y^{-1}|| <= 1``.
    """
    a_list = _check_family(a_list, ideal)
    _check_commuting(a_list)
    for j, a in enumerate(a_list):
        r = a.spec_radius()
        if r >= 1.0:
            raise SpectralRadiusViolation(f"element {j} has r = {r:.12g} >= 1")
    y = _contraction_root(a_list, ideal, method)
    targets = [optimal_value(a, ideal) for a in a_list]
    return _witness(a_list, ideal, y, targets, [1.0] * len(a_list), 0.0)


def optimal_similarity(
    a_list: Sequence[AlgebraElement],
    ideal: IdealSpec,
    mode: Literal["epsilon", "exact"] = "epsilon",
    epsilon: float = 1e-3,
    method: linalg.SteinMethod = "auto",
) -> SimilarityWitness:
    """Common ``e`` in ``I`` bringing each ``||(1+e) a_j (1+e)^{-1}||`` to its optimum.

    In ``"epsilon"`` mode the achieved norms are at most
    ``max{r(a_j), ||a_j mod I||} + epsilon``.  In ``"exact"`` mode, available
    when ``r(a_j) < ||a_j mod I||`` for every ``j``, they equal the quotient
    norm.  Both work by rescaling ``a_j`` by ``delta_j`` and calling
    :func:`contraction_similarity`; ``delta_j`` is the top of the admissible
    interval (``target + epsilon``, pulled in by a relative ``EPSILON_INSET``)
    or the quotient norm respectively.

    Raises
    ------
    AttainmentUnavailable
        In exact mode when some ``r(a_j) >= ||a_j mod I||``.  In that regime
        the infimum need not be attained at all.
    """
    a_list = _check_family(a_list, ideal)
    _check_commuting(a_list)
    radii = [a.spec_radius() for a in a_list]
    qnorms = [quotient_norm(a, ideal) for a in a_list]
    targets = [max(r, q) for r, q in zip(radii, qnorms)]
    warnings = []

    if mode == "epsilon":
        if not epsilon > 0:
            raise InvalidInput("epsilon must be positive")
        # aim just inside the band so rounding cannot push a norm above target + epsilon
        deltas = [t + epsilon * (1.0 - EPSILON_INSET) for t in targets]
        eps_out = float(epsilon)
    elif mode == "exact":
        for j, (r, q) in enumerate(zip(radii, qnorms)):
            if not r < q:
                raise AttainmentUnavailable(
                    f"element {j}: r = {r:.12g} >= quotient norm {q:.12g}; the infimum need "
                    "not be attained in this regime (e.g. [[1, K], [0, 1]] with K compact "
                    "is not power bounded)"
                )
            if q - r < NEAR_BOUNDARY_GAP:
                warnings.append(
                    f"element {j}: quotient norm exceeds r by only {q - r:.3e}; "
                    "the series weight is ill-conditioned"
                )
        deltas = list(qnorms)
        eps_out = 0.0
    else:
        raise InvalidInput(f"unknown mode {mode!r}")

    scaled = [a / d for a, d in zip(a_list, deltas)]
    y = _contraction_root(scaled, ideal, method)
    return _witness(a_list, ideal, y, targets, deltas, eps_out, warnings)


def joint_contraction_pair(
    a: AlgebraElement,
    b: AlgebraElement,
    method: linalg.SteinMethod = "auto",
) -> SimilarityWitness:
    """Similarity over the whole algebra with ``||y a y^{-1}|| < 1`` and ``||y b y^{-1}|| <= 1``.

    Needs ``[a, b] = 0``, ``r(a) < 1`` and ``||b|| <= 1``.  Here
    ``y = z^{1/2}`` with ``z = sum_k (a^*)^k a^k``; since
    ``a^* z a = z - 1 <= (1 - 1/||z||) z`` the first norm is at most
    ``sqrt(1 - 1/||z||)``, which is recorded in ``bounds``.
    """
    if a.signature != b.signature:
        raise InvalidInput("a and b have different signatures")
    ideal = IdealSpec.whole(a.signature.block_dims)
    _check_commuting([a, b])
    r = a.spec_radius()
    if r >= 1.0:
        raise SpectralRadiusViolation(f"r(a) = {r:.12g} >= 1")
    nb = b.norm()
    if nb > 1.0 + 1e-12:
        raise PreconditionViolation(f"||b|| = {nb:.12g} > 1")

    blocks = []
    strict = 0.0
    for ab in a.blocks:
        z = linalg.stein_solve(ab, np.eye(ab.shape[0]), method=method).z
        strict = max(strict, np.sqrt(max(0.0, 1.0 - 1.0 / linalg.op_norm(z))))
        blocks.append(linalg.herm_sqrt(z))
    y = AlgebraElement(a.signature, blocks)
    targets = [optimal_value(x, ideal) for x in (a, b)]
    return _witness([a, b], ideal, y, targets, [strict, 1.0], 0.0)


def simultaneous_contraction(
    a: AlgebraElement,
    b: AlgebraElement,
    s: AlgebraElement,
    method: linalg.SteinMethod = "auto",
) -> AlgebraElement:
    """Invertible ``c`` with ``||c a c^{-1}|| < 1`` and ``||c b c^{-1}|| <= 1``.

    ``a`` and ``b`` must commute, ``r(a) < 1``, and ``s`` must already make
    ``b`` a contraction.  The result is ``c = y s`` with ``y`` from
    :func:`joint_contraction_pair` applied to ``s a s^{-1}`` and ``s b s^{-1}``.
    """
    if not (a.signature == b.signature == s.signature):
        raise InvalidInput("a, b and s must share one signature")
    _check_commuting([a, b])
    cond = s.condition()
    if not cond <= 1e12:
        raise SingularSimilarity(f"s has condition number {cond:.3e}")
    r = a.spec_radius()
    if r >= 1.0:
        raise SpectralRadiusViolation(f"r(a) = {r:.12g} >= 1")
    b1 = b.conjugate_by(s)
    nb = b1.norm()
    if nb > 1.0 + 1e-12:
        raise PreconditionViolation(f"||s b s^-1|| = {nb:.12g} > 1")
    w = joint_contraction_pair(a.conjugate_by(s), b1, method=method)
    return w.y @ s
