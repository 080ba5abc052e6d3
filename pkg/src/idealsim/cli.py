"""Command line front end: ``idealsim <experiment> [instance.json] [options]``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Sequence

from . import __version__
from .errors import IdealSimError, InvalidInput
from .io import dump_json
from .runner import EXPERIMENTS, ExperimentConfig, GeneratorSpec, exit_code_for, render_table, run_experiment


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated reals, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="idealsim",
        description="Run similarity experiments on block matrix algebras and report the checks.",
    )
    p.add_argument("experiment", choices=EXPERIMENTS)
    p.add_argument("instance", nargs="?", type=Path, help="instance JSON file (default: generate from --seed)")
    p.add_argument("--seed", type=int, default=0, help="instance seed (suite: base seed, criterion k uses seed ^ k)")
    p.add_argument("--eps", type=_float_list, default=(1e-3,),
                   help="epsilon, or a comma list (an epsilon schedule) for formula/approximate-olsen")
    p.add_argument("--tol", type=float, default=None, help="override the experiment's check tolerance")
    p.add_argument("--budget", type=int, default=2000, help="oracle evaluation budget")
    p.add_argument("--starts", type=int, default=4, help="oracle restarts")
    p.add_argument("--exact", action="store_true", help="exact attainment (fails if r >= quotient norm)")
    p.add_argument("--no-oracle", action="store_true", help="skip the theorem-blind oracle")
    p.add_argument("--out", type=Path, help="write the JSON report here")
    p.add_argument("--jobs", type=int, default=1, help="parallel criteria in suite")
    p.add_argument("--criteria", type=_int_list, help="suite subset, e.g. 1,4,7")

    g = p.add_argument_group("formula generator")
    g.add_argument("--dims", type=_int_list, help="block dimensions, e.g. 2,3")
    g.add_argument("--ideal", type=_int_list, default=(), help="1-based ideal blocks, e.g. 1")
    g.add_argument("--count", type=int, default=1, help="family size")
    g.add_argument("--radius", type=float, help="target max spectral radius")
    g.add_argument("--quotient", type=float, help="target quotient norm")
    g.add_argument("--departure", type=float, default=1.0, help="departure from normality")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return p


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    generator = None
    if args.dims:
        generator = GeneratorSpec(
            block_dims=args.dims,
            ideal_blocks=tuple(b - 1 for b in args.ideal),
            count=args.count,
            radius=args.radius,
            quotient=args.quotient,
            departure=args.departure,
        )
    elif args.ideal or args.radius is not None or args.quotient is not None:
        raise InvalidInput("--ideal/--radius/--quotient need --dims")
    return ExperimentConfig(
        experiment=args.experiment,
        seed=args.seed,
        instance_path=args.instance,
        epsilons=args.eps,
        exact=args.exact,
        tol=args.tol,
        budget=args.budget,
        starts=args.starts,
        oracle=not args.no_oracle,
        jobs=args.jobs,
        criteria=args.criteria,
        generator=generator,
    )


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        report = run_experiment(config_from_args(args))
        # argparse already exits with status 2 on malformed flags
    except IdealSimError as exc:
        code = exit_code_for(exc)
        name = getattr(exc, "code", type(exc).__name__)
        print(f"error [{name}]: {exc}", file=sys.stderr)
        return code
    if args.out is not None:
        args.out.write_text(dump_json(report.doc))
    print(render_table(report))
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
