"""Theorem-blind numerical checks of ``inf ||(1+e) a (1+e)^{-1}||`` over ``e`` in ``I``.

Nothing here uses the series construction: :func:`similarity_search`
looks for good ``e`` by derivative-free descent, and
:func:`lower_bound_audit` samples random ``e`` to test the lower bound
``max{r(a), ||a mod I||}``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .algebra import AlgebraElement, IdealSpec, quotient_norm
from .errors import InvalidInput, TheoremViolation

__all__ = ["SearchReport", "similarity_search", "lower_bound_audit"]

COND_LIMIT = 1e10
STEP_START = 0.5
STEP_STOP = 1e-6


@dataclass
class SearchReport:
    best_e: AlgebraElement
    best_value: float
    evaluations: int
    starts: int
    seed: int
    history: list[tuple[int, float]] = field(default_factory=list)
    best_condition: float = 1.0


class _Objective:
    """``max_j ||(1+e) a_j (1+e)^{-1}||`` plus a penalty on ``cond(1+e)``."""

    def __init__(self, a_list: Sequence[AlgebraElement], ideal: IdealSpec):
        self.ideal = ideal
        self.sig = ideal.signature
        self.iblocks = ideal.sorted_ideal_blocks
        self.blocks_a = [[a.blocks[b] for a in a_list] for b in self.iblocks]
        # off-ideal blocks are untouched by 1 + e
        self.floor = max(quotient_norm(a, ideal) for a in a_list)
        self.sizes = [self.sig.block_dims[b] for b in self.iblocks]
        self.dim = 2 * sum(n * n for n in self.sizes)

    def unpack(self, x: np.ndarray) -> list[np.ndarray]:
        out = []
        pos = 0
        for n in self.sizes:
            k = n * n
            out.append((x[pos:pos + k] + 1j * x[pos + k:pos + 2 * k]).reshape(n, n))
            pos += 2 * k
        return out

    def element(self, x: np.ndarray) -> AlgebraElement:
        blocks = [np.zeros((n, n), dtype=complex) for n in self.sig.block_dims]
        for b, eb in zip(self.iblocks, self.unpack(x)):
            blocks[b] = eb
        return AlgebraElement(self.sig, blocks)

    def evaluate(self, x: np.ndarray) -> tuple[float, float]:
        """Return ``(objective, condition number of 1 + e)``."""
        value = self.floor
        cond = 1.0
        for eb, mats in zip(self.unpack(x), self.blocks_a):
            y = eb + np.eye(eb.shape[0])
            s = np.linalg.svd(y, compute_uv=False)
            if s[-1] <= s[0] * 1e-15:
                return float("inf"), float("inf")
            cond = max(cond, s[0] / s[-1])
            for m in mats:
                conj = np.linalg.solve(y.T, (y @ m).T).T
                value = max(value, np.linalg.norm(conj, 2))
        return value + 10.0 * max(0.0, np.log10(cond) - 10.0), cond


def similarity_search(
    a_list: Sequence[AlgebraElement],
    ideal: IdealSpec,
    budget: int = 2000,
    starts: int = 4,
    seed: int = 0,
) -> SearchReport:
    """Multi-start coordinate descent over the entries of ``e`` in ``I``.

    Each real and imaginary part of each ideal-block entry is one
    coordinate.  Start 0 is ``e = 0``; the other starts draw entries
    uniformly from ``[-1, 1]`` with a per-start generator derived from
    ``seed``.  A start moves one coordinate at a time by ``+-step`` while
    that improves the objective and halves ``step`` after a sweep without
    improvement, from 0.5 down to 1e-6.  The evaluation budget is shared
    evenly between starts.
    """
    if budget < 1:
        raise InvalidInput("budget must be at least 1")
    if starts < 1:
        raise InvalidInput("starts must be at least 1")
    a_list = list(a_list)
    obj = _Objective(a_list, ideal)
    dim = obj.dim

    evals = 0
    best_x = np.zeros(dim)
    best_f, best_cond = obj.evaluate(best_x)
    evals += 1
    history = [(evals, best_f)]
    if dim == 0:
        return SearchReport(obj.element(best_x), best_f, evals, starts, seed, history, best_cond)

    per_start = [budget // starts + (1 if s < budget % starts else 0) for s in range(starts)]
    for s in range(starts):
        rng = np.random.default_rng([seed, s])
        limit = per_start[s] - (1 if s == 0 else 0)
        if s == 0:
            x, fx = best_x.copy(), best_f
        else:
            if limit < 1:
                continue
            x = rng.uniform(-1.0, 1.0, dim)
            fx, cx = obj.evaluate(x)
            evals += 1
            limit -= 1
            if fx < best_f:
                best_x, best_f, best_cond = x.copy(), fx, cx
                history.append((evals, best_f))
        used = 0
        step = STEP_START
        order = np.arange(dim)
        while step >= STEP_STOP and used < limit:
            improved = False
            rng.shuffle(order)
            for k in order:
                for sign in (1.0, -1.0):
                    if used >= limit:
                        break
                    trial = x.copy()
                    trial[k] += sign * step
                    ft, ct = obj.evaluate(trial)
                    used += 1
                    evals += 1
                    if ft < fx:
                        x, fx = trial, ft
                        improved = True
                        if ft < best_f:
                            best_x, best_f, best_cond = trial.copy(), ft, ct
                            history.append((evals, best_f))
                        break
            if not improved:
                step /= 2.0
    return SearchReport(obj.element(best_x), float(best_f), evals, starts, seed, history, float(best_cond))


def lower_bound_audit(
    a_list: Sequence[AlgebraElement],
    ideal: IdealSpec,
    trials: int = 1000,
    seed: int = 0,
    cond_limit: float = 1e8,
) -> float:
    """Smallest ``||(1+e) a_j (1+e)^{-1}|| - max{r(a_j), ||a_j mod I||}`` over random ``e``.

    ``e = 0`` is always included; the random ``e`` have ideal-block entries
    with real and imaginary parts uniform in ``[-2, 2]``, and samples with
    ``cond(1 + e) > cond_limit`` are redrawn.

    Raises
    ------
    TheoremViolation
        If some margin is below ``-1e-6``.
    """
    if trials < 1:
        raise InvalidInput("trials must be at least 1")
    a_list = list(a_list)
    rng = np.random.default_rng(seed)
    iblocks = ideal.sorted_ideal_blocks
    sig = ideal.signature
    values = [max(a.spec_radius(), quotient_norm(a, ideal)) for a in a_list]
    qn = [quotient_norm(a, ideal) for a in a_list]

    def margins(ys: dict[int, np.ndarray]) -> float:
        worst = float("inf")
        for a, v, q in zip(a_list, values, qn):
            nrm = q
            for b in range(sig.num_blocks):
                if b in ideal.ideal_blocks:
                    y = ys[b]
                    nrm = max(nrm, np.linalg.norm(np.linalg.solve(y.T, (y @ a.blocks[b]).T).T, 2))
            worst = min(worst, nrm - v)
        return worst

    eye = {b: np.eye(sig.block_dims[b], dtype=complex) for b in iblocks}
    worst = margins(eye)
    if iblocks:
        done = 0
        attempts = 0
        while done < trials:
            attempts += 1
            if attempts > 100 * trials:
                break
            ys = {}
            cond = 1.0
            for b in iblocks:
                n = sig.block_dims[b]
                e = rng.uniform(-2, 2, (n, n)) + 1j * rng.uniform(-2, 2, (n, n))
                ys[b] = eye[b] + e
                cond = max(cond, np.linalg.cond(ys[b]))
            if not cond <= cond_limit:
                continue
            worst = min(worst, margins(ys))
            done += 1
    if worst < -1e-6:
        raise TheoremViolation(f"similarity beat the lower bound by {-worst:.3e}")
    return float(worst)
