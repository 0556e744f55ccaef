"""Command-line entry points.

Exit status: 0 on success, 2 on usage errors (argparse), 1 on runtime errors.
"""

import argparse
import json
import sys

from .epidemic import synth_population
from .harness import SWEEP_AXES, ExperimentSpec, run
from .rng import RngStream


def _load_config(path) -> dict:
    with open(path) as f:
        return json.load(f)


def _common_flags(sub):
    sub.add_argument("--config", help="JSON experiment config file")
    sub.add_argument("--seed", type=int, default=None, help="base seed (default 0)")
    sub.add_argument("--reps", type=int, default=None, help="replication count")
    sub.add_argument("--out", default=None, help="output directory")
    sub.add_argument("--workers", type=int, default=None, help="parallel replication workers")
    sub.add_argument(
        "--no-figures", action="store_true", help="skip PNG rendering, emit data only"
    )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wormtree",
        description="Infection-topology analysis: exact tables, growth and "
        "epidemic simulation, bot-detection experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analytic", help="exact children/generation/joint tables")
    p.add_argument("--n", type=int, required=True, help="tree size")
    p.add_argument("--i-max", type=int, default=None)
    p.add_argument("--j-max", type=int, default=None)
    p.add_argument("--children", action="store_true", help="emit the children table")
    p.add_argument("--generation", action="store_true", help="emit the generation table")
    p.add_argument("--joint", action="store_true", help="emit the joint table")
    _common_flags(p)

    p = sub.add_parser("grow", help="uniform-attachment growth replications")
    p.add_argument("--n", type=int, required=True, help="tree size")
    _common_flags(p)

    p = sub.add_parser("epidemic", help="scan-worm propagation replications")
    p.add_argument(
        "--save-forests", action="store_true", help="write one forest CSV per replication"
    )
    _common_flags(p)

    p = sub.add_parser("detect", help="random/targeted detection on epidemic forests")
    p.add_argument(
        "--strategy", nargs="+", choices=["random", "targeted"], default=None,
        help="strategies to evaluate",
    )
    p.add_argument("--A", nargs="+", type=float, default=None, help="accessed ratios")
    _common_flags(p)

    p = sub.add_parser("sweep", help="repeat an epidemic experiment along one axis")
    p.add_argument("--axis", choices=list(SWEEP_AXES), default=None)
    p.add_argument("--values", default=None, help="comma-separated axis values")
    _common_flags(p)

    p = sub.add_parser("synth-pop", help="synthesize a vulnerable-host population CSV")
    p.add_argument("--n0", type=int, required=True)
    p.add_argument("--subnet-bits", type=int, default=8)
    p.add_argument("--skew", choices=["uniform", "zipf"], default="uniform")
    p.add_argument("--exponent", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output CSV path")
    return parser


def _parse_values(text: str, axis: str) -> tuple:
    integral = axis in ("hitlist", "max_children")
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        out.append(int(tok) if integral else float(tok))
    return tuple(out)


def _spec_from_args(args) -> ExperimentSpec:
    data = _load_config(args.config) if args.config else {}
    overrides = {
        "base_seed": args.seed,
        "replications": args.reps,
        "output_dir": args.out,
        "workers": args.workers,
    }
    if args.no_figures:
        overrides["figures"] = False
    if args.command in ("analytic", "grow"):
        overrides["n"] = args.n
        if args.command == "analytic":
            overrides["i_max"] = args.i_max
            overrides["j_max"] = args.j_max
            picked = [w for w in ("children", "generation", "joint") if getattr(args, w)]
            if picked:
                overrides["tables"] = tuple(picked)
    if args.command == "epidemic" and args.save_forests:
        overrides["save_forests"] = True
    if args.command == "detect":
        detect = data.setdefault("detect", {})
        if args.strategy:
            detect["strategies"] = args.strategy
        if args.A:
            detect["accessed_ratios"] = args.A
    if args.command == "sweep":
        sweep = data.setdefault("sweep", {})
        if args.axis:
            sweep["axis"] = args.axis
        if args.values:
            sweep["values"] = list(_parse_values(args.values, sweep.get("axis", "")))
    if not data.get("output_dir") and not args.out:
        raise ValueError("an output directory is required (--out or config output_dir)")
    return ExperimentSpec.from_dict(args.command, data, **overrides)


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "synth-pop":
            pop = synth_population(
                args.n0,
                args.subnet_bits,
                skew=args.skew,
                exponent=args.exponent,
                rng=RngStream(args.seed),
            )
            pop.save(args.out)
            print(f"wrote {args.out} ({len(pop.counts)} prefixes, {pop.total} hosts)")
            return 0
        spec = _spec_from_args(args)
        manifest = run(spec)
        print(f"wrote {len(manifest['files'])} files to {spec.output_dir}")
        return 0
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
