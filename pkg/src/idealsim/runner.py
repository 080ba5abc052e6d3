"""Experiment execution and structured reports.

A report is a JSON document with sections ``meta``, ``instance``, ``targets``,
``achieved``, ``oracle``, ``checks`` and ``passed``.  The ``instance`` section
is itself a valid instance document, so any generated run can be replayed
from its report.  Everything except ``meta.timings`` is deterministic for a
fixed configuration.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__, acceptance, linalg
from .algebra import AlgebraElement, IdealSpec, Polynomial, poly_eval, quotient_norm, random_commuting_family
from .errors import InvalidInput, NumericalFailure, PreconditionViolation
from .instances import (
    exact_family,
    formula_family,
    jordan_instance,
    normal_quotient_instance,
    pair_instance,
    sigma_instance,
)
from .io import Instance, encode_complex, instance_to_dict, load_instance
from .olsen import (
    approximate_olsen,
    kernel_triangularize,
    minimal_polynomial_factors,
    olsen_perturbation,
    sigma_membership,
)
from .search import lower_bound_audit, similarity_search
from .similarity import optimal_similarity, simultaneous_contraction

EXPERIMENTS = ("formula", "olsen", "approximate-olsen", "pair", "triangularize", "suite")
EXIT_OK, EXIT_CHECK, EXIT_INPUT, EXIT_PRECONDITION, EXIT_NUMERICAL = 0, 1, 2, 3, 4

DEFAULT_TOL = {
    "formula": 1e-8,
    "olsen": 1e-6,
    "approximate-olsen": 1e-8,
    "pair": 1e-9,
    "triangularize": 1e-8,
    "suite": 0.0,
}


@dataclass(frozen=True)
class GeneratorSpec:
    """Explicit generator for the ``formula`` experiment (otherwise a random family is drawn)."""

    block_dims: tuple[int, ...]
    ideal_blocks: tuple[int, ...] = ()  # 0-based
    count: int = 1
    radius: float | None = None
    quotient: float | None = None
    departure: float = 1.0

    def build(self, seed: int) -> tuple[IdealSpec, list[AlgebraElement]]:
        ideal = IdealSpec.of(list(self.block_dims), list(self.ideal_blocks))
        fam = random_commuting_family(ideal, self.count, seed, self.radius, self.quotient,
                                      departure=self.departure)
        return ideal, fam


@dataclass
class ExperimentConfig:
    experiment: str
    seed: int = 0
    instance_path: Path | None = None
    epsilons: tuple[float, ...] = (1e-3,)
    exact: bool = False
    tol: float | None = None
    budget: int = 2000
    starts: int = 4
    oracle: bool = True
    jobs: int = 1
    criteria: tuple[int, ...] | None = None
    generator: GeneratorSpec | None = None

    def __post_init__(self):
        if self.instance_path is not None and self.generator is not None:
            raise InvalidInput("give either an instance file or generator options, not both")
        if self.generator is not None and self.experiment != "formula":
            raise InvalidInput("generator options apply to the formula experiment only")
        if self.experiment not in EXPERIMENTS:
            raise InvalidInput(f"unknown experiment {self.experiment!r}; choose from {', '.join(EXPERIMENTS)}")
        if not self.epsilons or any(not e > 0 for e in self.epsilons):
            raise InvalidInput("every epsilon must be positive")
        if self.budget < 1 or self.starts < 1 or self.jobs < 1:
            raise InvalidInput("budget, starts and jobs must be positive")
        if self.tol is not None and not self.tol >= 0:
            raise InvalidInput("tol must be nonnegative")
        if self.criteria is not None:
            bad = [c for c in self.criteria if c not in acceptance.CRITERIA]
            if bad:
                raise InvalidInput(f"unknown criteria {bad}")

    @property
    def tolerance(self) -> float:
        return DEFAULT_TOL[self.experiment] if self.tol is None else self.tol


@dataclass
class Report:
    doc: dict[str, Any]

    @property
    def passed(self) -> bool:
        return bool(self.doc["passed"])

    @property
    def exit_code(self) -> int:
        return EXIT_OK if self.passed else EXIT_CHECK


class _Checks:
    def __init__(self):
        self.items: list[dict[str, Any]] = []

    def at_most(self, name: str, value: float, bound: float):
        self.items.append({"name": name, "bound": f"<= {bound:.12g}", "value": float(value),
                           "pass": bool(value <= bound)})

    def at_least(self, name: str, value: float, bound: float):
        self.items.append({"name": name, "bound": f">= {bound:.12g}", "value": float(value),
                           "pass": bool(value >= bound)})

    def below(self, name: str, value: float, bound: float):
        self.items.append({"name": name, "bound": f"< {bound:.12g}", "value": float(value),
                           "pass": bool(value < bound)})


def _element_instance(ideal: IdealSpec, elements: list[AlgebraElement], names=None, **extra) -> Instance:
    names = names or [f"a{j + 1}" for j in range(len(elements))]
    return Instance(ideal, dict(zip(names, elements)), **extra)


def _load(cfg: ExperimentConfig) -> Instance | None:
    return load_instance(cfg.instance_path) if cfg.instance_path is not None else None


def _oracle_section(a_list, ideal, cfg: ExperimentConfig, checks: _Checks, value: float) -> dict | None:
    if not cfg.oracle:
        return None
    rep = similarity_search(a_list, ideal, budget=cfg.budget, starts=cfg.starts, seed=cfg.seed)
    audit = lower_bound_audit(a_list, ideal, trials=max(1, cfg.budget // 2), seed=cfg.seed)
    checks.at_least("oracle best - value", rep.best_value - value, -1e-9)
    checks.at_least("lower-bound audit margin", audit, -1e-9)
    return {
        "best_value": rep.best_value,
        "best_condition": rep.best_condition,
        "evaluations": rep.evaluations,
        "starts": rep.starts,
        "seed": rep.seed,
        "history": [[k, v] for k, v in rep.history],
        "audit_margin": audit,
    }


def _run_formula(cfg: ExperimentConfig, timings: dict) -> dict:
    inst = _load(cfg)
    if inst is None:
        if cfg.generator is not None:
            ideal, fam = cfg.generator.build(cfg.seed)
        elif cfg.exact:
            ideal, fam = exact_family(cfg.seed)
        else:
            ideal, fam = formula_family(cfg.seed)
        inst = _element_instance(ideal, fam)
    a_list = inst.element_list()
    if not a_list:
        raise InvalidInput("instance has no elements")
    ideal = inst.ideal
    tol = cfg.tolerance
    names = list(inst.elements)
    radii = [a.spec_radius() for a in a_list]
    qn = [quotient_norm(a, ideal) for a in a_list]
    values = [max(r, q) for r, q in zip(radii, qn)]
    checks = _Checks()
    achieved: dict[str, Any] = {}

    t0 = time.perf_counter()
    runs = [("exact", None)] if cfg.exact else [("epsilon", e) for e in cfg.epsilons]
    for mode, eps in runs:
        w = optimal_similarity(a_list, ideal, mode=mode, epsilon=eps or 1e-3)
        label = "exact" if eps is None else f"eps={eps:g}"
        achieved[label] = {
            "norms": dict(zip(names, w.achieved)),
            "condition": w.condition,
            "off_ideal_residual": w.in_ideal_residual,
            "warnings": list(w.warnings),
        }
        for n, a, v, q in zip(names, w.achieved, values, qn):
            if eps is None:
                checks.at_most(f"{label} {n}: |achieved - quotient norm|", abs(a - q), tol)
            else:
                checks.at_most(f"{label} {n}: achieved - value - eps", a - v - eps, 0.0)
                checks.at_least(f"{label} {n}: achieved - value", a - v, -tol)
        checks.at_most(f"{label}: e off-ideal norm", w.in_ideal_residual, 1e-12)
    timings["construction"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    oracle = _oracle_section(a_list, ideal, cfg, checks, max(values))
    timings["oracle"] = time.perf_counter() - t0
    targets = {n: {"spectral_radius": r, "quotient_norm": q, "value": v}
               for n, r, q, v in zip(names, radii, qn, values)}
    return dict(instance=instance_to_dict(inst), targets=targets, achieved=achieved,
                oracle=oracle, checks=checks.items)


def _olsen_input(cfg: ExperimentConfig, approximate: bool):
    inst = _load(cfg)
    polys_default = {"p1": Polynomial([0, 1])}
    if inst is None:
        if approximate:
            ideal, t = normal_quotient_instance(cfg.seed)
            polys = {"p1": Polynomial([0, 1]), "p2": Polynomial([-1, 0, 1]), "p3": Polynomial([0, 0, 0, 1])}
        else:
            polys = {"p1": Polynomial([0, 1]), "p2": Polynomial([0, 0, 1])}
            ideal, t = sigma_instance(cfg.seed, list(polys.values()))
        inst = _element_instance(ideal, [t], ["T"], polynomials=polys)
    if len(inst.elements) != 1:
        raise InvalidInput("perturbation experiments take exactly one element T")
    if not inst.polynomials:
        inst.polynomials = polys_default
    return inst


def _run_olsen(cfg: ExperimentConfig, timings: dict, approximate: bool) -> dict:
    inst = _olsen_input(cfg, approximate)
    t = inst.element_list()[0]
    ideal = inst.ideal
    names = list(inst.polynomials)
    polys = list(inst.polynomials.values())
    member, margins = sigma_membership(t, ideal, polys)
    targets = {
        "sigma_member": member,
        "sigma_margins": dict(zip(names, margins)),
        "quotient_norms": {n: quotient_norm(poly_eval(p, t), ideal) for n, p in zip(names, polys)},
        "polynomials": {n: p.label() for n, p in zip(names, polys)},
    }
    checks = _Checks()
    achieved: dict[str, Any] = {}
    t0 = time.perf_counter()
    if approximate:
        for eps in cfg.epsilons:
            out = approximate_olsen(t, ideal, polys, eps)
            label = f"eps={eps:g}"
            achieved[label] = {"norms": dict(zip(names, out.achieved)), "fill_eigenvalue": encode_complex(out.fill_eigenvalue),
                               "perturbation_norm": out.k.norm(), "off_ideal_residual": out.in_ideal_residual}
            for n, a, tg in zip(names, out.achieved, out.targets):
                checks.at_most(f"{label} {n}: achieved - target - eps", a - tg - eps, cfg.tolerance)
                checks.at_least(f"{label} {n}: achieved - target", a - tg, -1e-9)
            checks.at_most(f"{label}: K off-ideal norm", out.in_ideal_residual, 1e-12)
    else:
        out = olsen_perturbation(t, ideal, polys, tol=cfg.tolerance)
        achieved["exact"] = {"norms": dict(zip(names, out.achieved)), "fill_eigenvalue": encode_complex(out.fill_eigenvalue),
                             "perturbation_norm": out.k.norm(), "off_ideal_residual": out.in_ideal_residual}
        for n, a, tg in zip(names, out.achieved, out.targets):
            checks.at_most(f"{n}: |achieved - target|", abs(a - tg), cfg.tolerance)
        checks.at_most("K off-ideal norm", out.in_ideal_residual, 1e-12)
    timings["construction"] = time.perf_counter() - t0
    return dict(instance=instance_to_dict(inst), targets=targets, achieved=achieved, oracle=None, checks=checks.items)


def _run_pair(cfg: ExperimentConfig, timings: dict) -> dict:
    inst = _load(cfg)
    if inst is None:
        p = pair_instance(cfg.seed)
        inst = _element_instance(IdealSpec.whole(p.a.signature.block_dims), [p.a, p.b, p.s], ["a", "b", "s"])
    els = inst.elements
    if "a" not in els or "b" not in els:
        raise InvalidInput("pair experiment needs elements named 'a' and 'b' (and optionally 's')")
    a, b = els["a"], els["b"]
    s = els.get("s", AlgebraElement.identity(a.signature))
    t0 = time.perf_counter()
    c = simultaneous_contraction(a, b, s)
    timings["construction"] = time.perf_counter() - t0
    na = a.conjugate_by(c).norm()
    nb = b.conjugate_by(c).norm()
    checks = _Checks()
    checks.below("||c a c^-1||", na, 1.0)
    checks.at_most("||c b c^-1||", nb, 1.0 + cfg.tolerance)
    targets = {"spectral_radius_a": a.spec_radius(), "norm_sbs_inv": b.conjugate_by(s).norm()}
    achieved = {"norm_cac_inv": na, "norm_cbc_inv": nb, "condition_c": c.condition()}
    return dict(instance=instance_to_dict(inst), targets=targets, achieved=achieved, oracle=None, checks=checks.items)


def _run_triangularize(cfg: ExperimentConfig, timings: dict) -> dict:
    inst = _load(cfg)
    planted = None
    if inst is None:
        j = jordan_instance(cfg.seed)
        planted = j.planted_factors
        el = AlgebraElement.from_blocks(j.t)
        inst = _element_instance(IdealSpec.of(el.signature.block_dims, []), [el], ["T"])
    if len(inst.elements) != 1 or inst.ideal.signature.num_blocks != 1:
        raise InvalidInput("triangularize takes one single-block element T")
    t = inst.element_list()[0].blocks[0]
    t0 = time.perf_counter()
    factors = inst.factors if inst.factors is not None else minimal_polynomial_factors(t)
    tri = kernel_triangularize(t, factors)
    timings["construction"] = time.perf_counter() - t0
    tol = cfg.tolerance
    checks = _Checks()
    checks.at_most("unitary defect", tri.unitary_defect, 1e-10)
    checks.at_most("strict-lower residual / (1 + ||T||)", tri.residual / (1 + linalg.op_norm(t)), tol)
    checks.at_most("diagonal block defect", tri.diagonal_defect, tol)
    if planted is not None:
        ok = len(planted) == len(factors) and all(
            abs(f[0] - p[0]) <= 1e-7 and f[1] == p[1] for f, p in zip(factors, planted))
        checks.at_most("planted factors not recovered", 0.0 if ok else 1.0, 0.0)
    targets = {"factors": [[encode_complex(z), k] for z, k in (planted or factors)]}
    achieved = {
        "factors": [[encode_complex(z), k] for z, k in factors],
        "chain_dims": list(tri.chain_dims),
        "multiplicities": [[encode_complex(z), d] for z, d in tri.multiplicities()],
        "unitary_defect": tri.unitary_defect,
        "residual": tri.residual,
        "diagonal_defect": tri.diagonal_defect,
    }
    if inst.factors is None:
        inst.factors = list(factors)
    return dict(instance=instance_to_dict(inst), targets=targets, achieved=achieved, oracle=None, checks=checks.items)


def _run_suite(cfg: ExperimentConfig, timings: dict) -> dict:
    if cfg.instance_path is not None:
        raise InvalidInput("the suite generates its own instances; drop the instance file")
    results = acceptance.run_suite(cfg.seed, jobs=cfg.jobs, numbers=cfg.criteria)
    checks = []
    for r in results:
        timings[f"criterion_{r.number}"] = r.elapsed
        for c in r.checks:
            checks.append({"name": f"criterion {r.number}: {c.name}", "bound": c.bound,
                           "value": c.value, "pass": c.passed})
    achieved = {str(r.number): {"title": r.title, "passed": r.passed, "notes": r.notes} for r in results}
    return dict(instance=None, targets=None, achieved=achieved, oracle=None, checks=checks)


def run_experiment(cfg: ExperimentConfig) -> Report:
    """Run one experiment.  Library errors propagate; see :func:`exit_code_for`."""
    timings: dict[str, float] = {}
    start = time.perf_counter()
    if cfg.experiment == "formula":
        body = _run_formula(cfg, timings)
    elif cfg.experiment == "olsen":
        body = _run_olsen(cfg, timings, approximate=False)
    elif cfg.experiment == "approximate-olsen":
        body = _run_olsen(cfg, timings, approximate=True)
    elif cfg.experiment == "pair":
        body = _run_pair(cfg, timings)
    elif cfg.experiment == "triangularize":
        body = _run_triangularize(cfg, timings)
    else:
        body = _run_suite(cfg, timings)
    timings["total"] = time.perf_counter() - start
    meta = {
        "package": "idealsim",
        "version": __version__,
        "experiment": cfg.experiment,
        "seed": cfg.seed,
        "source": str(cfg.instance_path) if cfg.instance_path else "generated",
        "epsilons": list(cfg.epsilons),
        "exact": cfg.exact,
        "tolerance": cfg.tolerance,
        "timings": timings,
    }
    body["passed"] = bool(body["checks"]) and all(c["pass"] for c in body["checks"])
    return Report({"meta": meta, **body})


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, InvalidInput):
        return EXIT_INPUT
    if isinstance(exc, PreconditionViolation):
        return EXIT_PRECONDITION
    if isinstance(exc, (NumericalFailure, np.linalg.LinAlgError)):
        return EXIT_NUMERICAL
    raise exc


def render_table(report: Report) -> str:
    """Plain-text summary: one line per check plus a verdict."""
    doc = report.doc
    meta = doc["meta"]
    lines = [f"idealsim {meta['version']}  experiment={meta['experiment']}  seed={meta['seed']}  "
             f"source={meta['source']}"]
    rows = [(c["name"], c["bound"], f"{c['value']:.6g}", "ok" if c["pass"] else "FAIL") for c in doc["checks"]]
    if rows:
        w = [max(len(r[i]) for r in rows) for i in range(4)]
        head = ("check", "bound", "value", "")
        w = [max(a, len(b)) for a, b in zip(w, head)]
        lines.append("  ".join(h.ljust(n) for h, n in zip(head, w)).rstrip())
        lines.append("  ".join("-" * n for n in w))
        lines += ["  ".join(c.ljust(n) for c, n in zip(r, w)).rstrip() for r in rows]
    if doc.get("oracle"):
        o = doc["oracle"]
        lines.append(f"oracle: best={o['best_value']:.10g} evals={o['evaluations']} audit margin={o['audit_margin']:.3g}")
    lines.append(f"result: {'PASS' if report.passed else 'FAIL'}  ({meta['timings']['total']:.2f}s)")
    return "\n".join(lines)
