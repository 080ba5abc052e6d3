"""Seeded test-instance generators for experiments and the acceptance suite."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import linalg
from .algebra import (
    AlgebraElement,
    IdealSpec,
    Polynomial,
    quotient_norm,
    random_commuting_family,
    random_unitary,
)
from .errors import GenerationFailure
from .olsen import sigma_membership

MAX_RETRIES = 200


def random_ideal(rng: np.random.Generator, max_blocks: int = 3, max_dim: int = 4,
                 need_quotient: bool = False) -> IdealSpec:
    nb = int(rng.integers(1, max_blocks + 1))
    dims = [int(d) for d in rng.integers(1, max_dim + 1, nb)]
    mask = rng.random(nb) < 0.5
    if need_quotient and mask.all():
        mask[int(rng.integers(nb))] = False
    return IdealSpec.of(dims, [b for b in range(nb) if mask[b]])


def single_matrix(seed: int, dim: int, radius: float) -> AlgebraElement:
    """Random complex matrix rescaled to spectral radius ``radius``, as a one-block element."""
    ideal = IdealSpec.whole([dim])
    return random_commuting_family(ideal, 1, seed, radius_target=radius)[0]


def formula_family(seed: int) -> tuple[IdealSpec, list[AlgebraElement]]:
    """Random block algebra, ideal and commuting family of size 1 to 3.

    Spectral and quotient targets are drawn independently; when the
    quotient part forces a larger spectral radius than requested, the
    radius target is dropped.
    """
    rng = np.random.default_rng([seed, 2])
    ideal = random_ideal(rng)
    count = int(rng.integers(1, 4))
    radius = float(rng.uniform(0.2, 1.5))
    quot = None if ideal.quotient_is_zero else float(rng.uniform(0.2, 1.5))
    departure = float(rng.choice([0.3, 1.0, 2.0]))
    sub = int(rng.integers(2**31))
    try:
        fam = random_commuting_family(ideal, count, sub, radius, quot, departure=departure)
    except GenerationFailure:
        fam = random_commuting_family(ideal, count, sub, None, quot, departure=departure)
    return ideal, fam


def exact_family(seed: int, gap: float = 0.1, departure: float = 1.5) -> tuple[IdealSpec, list[AlgebraElement]]:
    """Commuting family with ``r(a_j) < ||a_j mod I|| - gap`` for every ``j``.

    Both the ideal and the quotient are nonzero.
    """
    rng = np.random.default_rng([seed, 3])
    for _ in range(MAX_RETRIES):
        ideal = random_ideal(rng, need_quotient=True)
        if not ideal.ideal_blocks:
            continue
        if max(ideal.signature.block_dims[b] for b in ideal.quotient_blocks) < 2:
            continue
        count = int(rng.integers(1, 4))
        quot = float(rng.uniform(0.5, 2.0))
        radius = float(rng.uniform(0.1, 0.8)) * quot
        sub = int(rng.integers(2**31))
        try:
            fam = random_commuting_family(ideal, count, sub, radius, quot, departure=departure)
        except GenerationFailure:
            continue
        if all(a.spec_radius() < quotient_norm(a, ideal) - gap for a in fam):
            return ideal, fam
    raise GenerationFailure(f"no exact-attainment instance found for seed {seed}")


def exact_example() -> tuple[IdealSpec, list[AlgebraElement]]:
    """``A = M_2 + M_2``, ideal = first block, ``a = ([[0,5],[0,0]], [[0,1],[0,0]])``."""
    ideal = IdealSpec.of([2, 2], [0])
    a = AlgebraElement(ideal.signature, [[[0, 5], [0, 0]], [[0, 1], [0, 0]]])
    return ideal, [a]


def _nonnormal_block(rng, n, departure, scale):
    lam = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) * 0.3
    upper = np.triu(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)), 1)
    u = random_unitary(n, rng)
    x = u @ (np.diag(lam) + departure * upper) @ u.conj().T
    return x * (scale / linalg.op_norm(x))


def sigma_instance(seed: int, polys: Sequence[Polynomial], margin: float = 0.1) -> tuple[IdealSpec, AlgebraElement]:
    """Element ``T`` in Sigma for ``polys`` with every membership margin at least ``margin``."""
    rng = np.random.default_rng([seed, 7])
    for _ in range(MAX_RETRIES):
        n_ideal = int(rng.integers(1, 3))
        n_quot = int(rng.integers(1, 3))
        dims = [int(d) for d in rng.integers(2, 5, n_ideal)] + [int(d) for d in rng.integers(2, 5, n_quot)]
        ideal = IdealSpec.of(dims, range(n_ideal))
        blocks = []
        for b, n in enumerate(dims):
            if b < n_ideal:
                g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
                blocks.append(g * float(rng.uniform(0.5, 3.0)) / np.sqrt(2 * n))
            else:
                blocks.append(_nonnormal_block(rng, n, 3.0, float(rng.uniform(0.8, 1.5))))
        t = AlgebraElement(ideal.signature, blocks)
        member, margins = sigma_membership(t, ideal, polys)
        if member and min(margins) >= margin:
            return ideal, t
    raise GenerationFailure(f"no Sigma member with margin {margin} for seed {seed}")


def normal_quotient_instance(seed: int) -> tuple[IdealSpec, AlgebraElement]:
    """``T`` whose quotient part is normal, hence outside Sigma for ``p(t) = t``."""
    rng = np.random.default_rng([seed, 11])
    n_ideal = int(rng.integers(1, 3))
    dims = [int(d) for d in rng.integers(2, 5, n_ideal)] + [int(rng.integers(1, 5))]
    ideal = IdealSpec.of(dims, range(n_ideal))
    blocks = []
    for b, n in enumerate(dims):
        g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        if b < n_ideal:
            blocks.append(g * float(rng.uniform(0.5, 3.0)) / np.sqrt(2 * n))
        else:
            u = random_unitary(n, rng)
            lam = rng.standard_normal(n) + 1j * rng.standard_normal(n)
            blocks.append(u @ np.diag(lam) @ u.conj().T)
    return ideal, AlgebraElement(ideal.signature, blocks)


@dataclass
class PairInstance:
    a: AlgebraElement
    b: AlgebraElement
    s: AlgebraElement


def pair_instance(seed: int, radius: float = 0.95, max_dim: int = 5) -> PairInstance:
    """Commuting ``a, b`` with ``r(a) = radius`` and ``b = s^{-1} C s`` for a contraction ``C``."""
    rng = np.random.default_rng([seed, 13])
    n = int(rng.integers(2, max_dim + 1))
    w = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    c1 = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    c2 = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    pa = c1[0] * np.eye(n) + c1[1] * w + c1[2] * w @ w
    pb = c2[0] * np.eye(n) + c2[1] * w + c2[2] * w @ w
    a1 = pa * (radius / linalg.spec_radius(pa))
    contraction = pb / linalg.op_norm(pb)
    s = np.eye(n) + 0.5 * (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(n)
    s_inv = np.linalg.inv(s)
    a = s_inv @ a1 @ s
    b = s_inv @ contraction @ s
    return PairInstance(*(AlgebraElement.from_blocks(x) for x in (a, b, s)))


@dataclass
class JordanInstance:
    t: np.ndarray
    blocks: list[tuple[complex, int]]

    @property
    def planted_factors(self) -> list[tuple[complex, int]]:
        """``(eigenvalue, largest Jordan block)`` sorted like the factor helper."""
        best: dict[complex, int] = {}
        for lam, k in self.blocks:
            best[lam] = max(best.get(lam, 0), k)
        return sorted(best.items(), key=lambda f: (f[0].real, f[0].imag))

    @property
    def planted_multiplicities(self) -> dict[complex, int]:
        out: dict[complex, int] = {}
        for lam, k in self.blocks:
            out[lam] = out.get(lam, 0) + k
        return out


def jordan_matrix(blocks: Sequence[tuple[complex, int]]) -> np.ndarray:
    n = sum(k for _, k in blocks)
    j = np.zeros((n, n), dtype=complex)
    pos = 0
    for lam, k in blocks:
        for i in range(k):
            j[pos + i, pos + i] = lam
            if i + 1 < k:
                j[pos + i, pos + i + 1] = 1.0
        pos += k
    return j


def jordan_instance(seed: int, max_dim: int = 8, max_block: int = 3) -> JordanInstance:
    """``g J g^{-1}`` for a random well-conditioned ``g`` and a planted Jordan matrix ``J``."""
    rng = np.random.default_rng([seed, 17])
    n_eigs = int(rng.integers(1, 4))
    centers = rng.permutation(6)[:n_eigs]
    eigs = [complex(float(c) + 0.5, float(rng.integers(-1, 2))) for c in centers]
    blocks = []
    remaining = int(rng.integers(n_eigs, max_dim + 1))
    for i, lam in enumerate(eigs):
        left_for_others = n_eigs - i - 1
        budget = remaining - left_for_others
        k = int(rng.integers(1, min(max_block, budget) + 1))
        blocks.append((lam, k))
        remaining -= k
    while remaining > 0:
        lam = eigs[int(rng.integers(len(eigs)))]
        k = int(rng.integers(1, min(max_block, remaining) + 1))
        blocks.append((lam, k))
        remaining -= k
    j = jordan_matrix(blocks)
    n = j.shape[0]
    g = np.eye(n) + 0.3 * (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(n)
    return JordanInstance(g @ j @ np.linalg.inv(g), blocks)


def nilpotent_instance(seed: int, max_dim: int = 6) -> tuple[np.ndarray, Polynomial]:
    """Unitarily conjugated strictly upper-triangular matrix and a random polynomial."""
    rng = np.random.default_rng([seed, 19])
    n = int(rng.integers(2, max_dim + 1))
    upper = np.triu(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)), 1)
    u = random_unitary(n, rng)
    deg = int(rng.integers(0, 5))
    coeffs = rng.standard_normal(deg + 1) + 1j * rng.standard_normal(deg + 1)
    return u @ upper @ u.conj().T, Polynomial(coeffs)
