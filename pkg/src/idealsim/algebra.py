"""Finite-dimensional C*-algebras ``A = M_{n_1} + ... + M_{n_B}`` with block ideals.

An element is a tuple of dense complex blocks.  A closed ideal is the
sub-sum over a subset ``S`` of block indices; the quotient ``A/I`` keeps
the remaining blocks.  Block indices are 0-based in the Python API and
1-based in instance files.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import linalg
from .errors import GenerationFailure, InvalidInput

__all__ = [
    "AlgebraSignature",
    "IdealSpec",
    "AlgebraElement",
    "Polynomial",
    "poly_eval",
    "quotient_norm",
    "quotient_spec_radius",
    "is_in_ideal",
    "commutator_defect",
    "random_unitary",
    "random_commuting_family",
]


@dataclass(frozen=True)
class AlgebraSignature:
    block_dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.block_dims)
        if not dims or any(d < 1 for d in dims):
            raise InvalidInput(f"block_dims must be a nonempty list of positive integers, got {self.block_dims!r}")
        object.__setattr__(self, "block_dims", dims)

    @property
    def num_blocks(self) -> int:
        return len(self.block_dims)


@dataclass(frozen=True)
class IdealSpec:
    signature: AlgebraSignature
    ideal_blocks: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self):
        blocks = frozenset(int(b) for b in self.ideal_blocks)
        bad = [b for b in blocks if not 0 <= b < self.signature.num_blocks]
        if bad:
            raise InvalidInput(f"ideal block indices {sorted(bad)} out of range")
        object.__setattr__(self, "ideal_blocks", blocks)

    @classmethod
    def of(cls, block_dims: Sequence[int], ideal_blocks: Iterable[int] = ()) -> "IdealSpec":
        return cls(AlgebraSignature(tuple(block_dims)), frozenset(ideal_blocks))

    @classmethod
    def whole(cls, block_dims: Sequence[int]) -> "IdealSpec":
        """The ideal ``I = A``."""
        return cls.of(block_dims, range(len(block_dims)))

    @property
    def quotient_blocks(self) -> tuple[int, ...]:
        return tuple(b for b in range(self.signature.num_blocks) if b not in self.ideal_blocks)

    @property
    def sorted_ideal_blocks(self) -> tuple[int, ...]:
        return tuple(sorted(self.ideal_blocks))

    @property
    def quotient_is_zero(self) -> bool:
        return not self.quotient_blocks


class AlgebraElement:
    """Immutable element of ``A``: one square complex block per summand."""

    __slots__ = ("signature", "blocks")

    def __init__(self, signature: AlgebraSignature, blocks: Sequence):
        if len(blocks) != signature.num_blocks:
            raise InvalidInput(f"expected {signature.num_blocks} blocks, got {len(blocks)}")
        frozen = []
        for b, (n, blk) in enumerate(zip(signature.block_dims, blocks)):
            arr = linalg.as_matrix(blk, f"block {b}")
            if arr.shape != (n, n):
                raise InvalidInput(f"block {b} has shape {arr.shape}, expected {(n, n)}")
            arr.setflags(write=False)
            frozen.append(arr)
        object.__setattr__(self, "signature", signature)
        object.__setattr__(self, "blocks", tuple(frozen))

    def __setattr__(self, name, value):
        raise AttributeError("AlgebraElement is immutable")

    @classmethod
    def from_blocks(cls, *blocks) -> "AlgebraElement":
        mats = [np.atleast_2d(np.asarray(b, dtype=complex)) for b in blocks]
        return cls(AlgebraSignature(tuple(m.shape[0] for m in mats)), mats)

    @classmethod
    def identity(cls, signature: AlgebraSignature) -> "AlgebraElement":
        return cls(signature, [np.eye(n, dtype=complex) for n in signature.block_dims])

    @classmethod
    def zeros(cls, signature: AlgebraSignature) -> "AlgebraElement":
        return cls(signature, [np.zeros((n, n), dtype=complex) for n in signature.block_dims])

    @classmethod
    def scalar(cls, signature: AlgebraSignature, c: complex) -> "AlgebraElement":
        return cls(signature, [c * np.eye(n, dtype=complex) for n in signature.block_dims])

    def _check(self, other: "AlgebraElement") -> None:
        if not isinstance(other, AlgebraElement):
            raise InvalidInput(f"expected AlgebraElement, got {type(other).__name__}")
        if other.signature != self.signature:
            raise InvalidInput(
                f"signature mismatch: {self.signature.block_dims} vs {other.signature.block_dims}"
            )

    def map(self, fn) -> "AlgebraElement":
        return AlgebraElement(self.signature, [fn(b) for b in self.blocks])

    def __add__(self, other):
        if np.isscalar(other):
            return self + AlgebraElement.scalar(self.signature, other)
        self._check(other)
        return AlgebraElement(self.signature, [x + y for x, y in zip(self.blocks, other.blocks)])

    __radd__ = __add__

    def __neg__(self):
        return self.map(lambda b: -b)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, c):
        if not np.isscalar(c):
            return NotImplemented
        return self.map(lambda b: c * b)

    __rmul__ = __mul__

    def __truediv__(self, c):
        if not np.isscalar(c):
            return NotImplemented
        return self.map(lambda b: b / c)

    def __matmul__(self, other):
        self._check(other)
        return AlgebraElement(self.signature, [x @ y for x, y in zip(self.blocks, other.blocks)])

    def __repr__(self):
        return f"AlgebraElement(block_dims={self.signature.block_dims})"

    @property
    def H(self) -> "AlgebraElement":
        """Adjoint."""
        return self.map(lambda b: b.conj().T)

    def inv(self) -> "AlgebraElement":
        return self.map(np.linalg.inv)

    def norm(self) -> float:
        return max(linalg.op_norm(b) for b in self.blocks)

    def spec_radius(self) -> float:
        return max(linalg.spec_radius(b) for b in self.blocks)

    def eigenvalues(self) -> np.ndarray:
        return np.concatenate([np.linalg.eigvals(b) for b in self.blocks])

    def condition(self) -> float:
        s_max = 0.0
        s_min = float("inf")
        for b in self.blocks:
            s = np.linalg.svd(b, compute_uv=False)
            s_max = max(s_max, s[0])
            s_min = min(s_min, s[-1])
        return float("inf") if s_min == 0.0 else float(s_max / s_min)

    def conjugate_by(self, s: "AlgebraElement") -> "AlgebraElement":
        """``s x s^{-1}`` computed blockwise with a linear solve."""
        self._check(s)
        return AlgebraElement(
            self.signature,
            [np.linalg.solve(sb.T, (sb @ xb).T).T for sb, xb in zip(s.blocks, self.blocks)],
        )

    def allclose(self, other: "AlgebraElement", atol: float = 1e-12) -> bool:
        self._check(other)
        return all(np.allclose(x, y, atol=atol, rtol=0) for x, y in zip(self.blocks, other.blocks))


class Polynomial:
    """Complex polynomial ``c_0 + c_1 t + ... + c_n t^n``; trailing zeros are dropped."""

    __slots__ = ("coefficients",)

    def __init__(self, coefficients: Iterable[complex]):
        coeffs = [complex(c) for c in coefficients]
        if not all(np.isfinite(c) for c in coeffs):
            raise InvalidInput("polynomial coefficients must be finite")
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        self.coefficients: tuple[complex, ...] = tuple(coeffs)

    @classmethod
    def monomial(cls, k: int, c: complex = 1.0) -> "Polynomial":
        return cls([0.0] * k + [c])

    @property
    def degree(self) -> int:
        """Degree; ``-1`` for the zero polynomial."""
        return len(self.coefficients) - 1

    def __call__(self, t):
        acc = np.zeros_like(np.asarray(t, dtype=complex))
        for c in reversed(self.coefficients):
            acc = acc * t + c
        return acc

    def __eq__(self, other):
        return isinstance(other, Polynomial) and self.coefficients == other.coefficients

    def __hash__(self):
        return hash(self.coefficients)

    def __repr__(self):
        return f"Polynomial({list(self.coefficients)!r})"

    def label(self) -> str:
        terms = []
        for k, c in enumerate(self.coefficients):
            if c == 0:
                continue
            cs = f"{c.real:g}" if c.imag == 0 else f"({c.real:g}{c.imag:+g}j)"
            terms.append(cs if k == 0 else f"{cs}*t^{k}")
        return " + ".join(terms) or "0"


def _poly_block(p: Polynomial, m: np.ndarray) -> np.ndarray:
    n = m.shape[0]
    acc = np.zeros((n, n), dtype=complex)
    for c in reversed(p.coefficients):
        acc = acc @ m
        acc[np.diag_indices(n)] += c
    return acc


def poly_eval(p: Polynomial, a: AlgebraElement) -> AlgebraElement:
    """Horner evaluation of ``p(a)``, block by block."""
    return a.map(lambda b: _poly_block(p, b))


def quotient_norm(a: AlgebraElement, ideal: IdealSpec) -> float:
    """Norm of the image of ``a`` in ``A/I``: 0 when ``I = A``."""
    _check_sig(a, ideal)
    return max((linalg.op_norm(a.blocks[b]) for b in ideal.quotient_blocks), default=0.0)


def quotient_spec_radius(a: AlgebraElement, ideal: IdealSpec) -> float:
    _check_sig(a, ideal)
    return max((linalg.spec_radius(a.blocks[b]) for b in ideal.quotient_blocks), default=0.0)


def is_in_ideal(a: AlgebraElement, ideal: IdealSpec, tol: float = 1e-12) -> tuple[bool, float]:
    """Whether every off-ideal block has norm at most ``tol``; also returns the largest such norm."""
    worst = quotient_norm(a, ideal)
    return worst <= tol, worst


def commutator_defect(a: AlgebraElement, b: AlgebraElement) -> float:
    """``||ab - ba|| / (1 + ||a|| ||b||)``."""
    return (a @ b - b @ a).norm() / (1.0 + a.norm() * b.norm())


def _check_sig(a: AlgebraElement, ideal: IdealSpec) -> None:
    if a.signature != ideal.signature:
        raise InvalidInput(
            f"element signature {a.signature.block_dims} does not match ideal "
            f"signature {ideal.signature.block_dims}"
        )


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(g)
    d = np.diag(r)
    return q * (d / np.abs(d))


def _random_base(n: int, rng: np.random.Generator, departure: float) -> np.ndarray:
    lam = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / np.sqrt(2)
    upper = np.triu(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)), 1)
    u = random_unitary(n, rng)
    return u @ (np.diag(lam) + departure * upper) @ u.conj().T


def random_commuting_family(
    ideal: IdealSpec,
    count: int,
    seed: int,
    radius_target: float | None = None,
    quotient_target: float | None = None,
    departure: float = 1.0,
    max_degree: int = 3,
) -> list[AlgebraElement]:
    """Seeded family of pairwise commuting elements.

    Block ``b`` of element ``j`` is ``c_{jb} q_j(x_b)`` for one random base
    matrix ``x_b`` per block and random polynomials ``q_j`` of degree between
    1 and ``max_degree``, so the family commutes exactly in every block.
    The scale factors are chosen so that each element has quotient norm
    ``quotient_target`` (on the off-ideal blocks) and the largest spectral
    radius over the ideal blocks equals ``radius_target``.

    ``departure`` weights the strictly upper-triangular part of the Schur
    form of each base matrix; large values make ``||a||`` much bigger than
    ``r(a)``.

    Raises
    ------
    GenerationFailure
        When the requested targets cannot be met, e.g. a quotient target for
        ``I = A`` or a radius target below the spectral radius forced by the
        quotient part.
    """
    if count < 1:
        raise InvalidInput("count must be at least 1")
    rng = np.random.default_rng(seed)
    sig = ideal.signature
    qb, ib = ideal.quotient_blocks, ideal.sorted_ideal_blocks
    if quotient_target is not None and quotient_target > 0 and not qb:
        raise GenerationFailure("quotient_target > 0 requested but the quotient A/I is zero")

    bases = [_random_base(n, rng, departure) for n in sig.block_dims]
    family = []
    for j in range(count):
        deg = int(rng.integers(1, max_degree + 1))
        coeffs = (rng.standard_normal(deg + 1) + 1j * rng.standard_normal(deg + 1)) / np.sqrt(2)
        if j == 0:
            coeffs[:] = 0
            coeffs[1] = 1.0
        poly = Polynomial(coeffs)
        raw = [_poly_block(poly, x) for x in bases]

        scaled = list(raw)
        if quotient_target is not None and qb:
            qn = max(linalg.op_norm(raw[b]) for b in qb)
            if qn == 0:
                raise GenerationFailure(f"element {j}: quotient part vanished, cannot rescale")
            for b in qb:
                scaled[b] = raw[b] * (quotient_target / qn)
        if radius_target is not None and ib:
            rn = max(linalg.spec_radius(raw[b]) for b in ib)
            if rn == 0:
                raise GenerationFailure(f"element {j}: ideal part is nilpotent, cannot rescale")
            for b in ib:
                scaled[b] = raw[b] * (radius_target / rn)
        elif radius_target is not None and not ib and quotient_target is None:
            rn = max(linalg.spec_radius(x) for x in raw)
            scaled = [x * (radius_target / rn) for x in raw]
        elem = AlgebraElement(sig, scaled)
        if radius_target is not None:
            r = elem.spec_radius()
            if abs(r - radius_target) > 1e-8 * max(1.0, radius_target):
                raise GenerationFailure(
                    f"element {j}: spectral radius {r:.6g} cannot match target {radius_target:.6g} "
                    f"(quotient part alone has radius {quotient_spec_radius(elem, ideal):.6g})"
                )
        family.append(elem)
    return family
