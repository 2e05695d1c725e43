"""Command line: ``pcslearn run|theta|demo-example1|version``.

Exit codes: 0 when every verdict passes, 1 when any fails, 2 for usage or
config errors.
"""
from __future__ import annotations

import argparse
import sys
from importlib.metadata import PackageNotFoundError, version

from . import disagreement, harness, selective
from .worlds import example1_world

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _package_version() -> str:
    try:
        return version("artifact")
    except PackageNotFoundError:
        from . import __version__
        return __version__


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="pcslearn", description="Selective classification and active learning experiments.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    run = sub.add_parser("run", help="run an experiment config")
    run.add_argument("config")
    run.add_argument("--output", help="report directory (overrides config and $%s)" % harness.OUTPUT_ENV)

    th = sub.add_parser("theta", help="disagreement coefficient of a named world's risk minimizer")
    th.add_argument("world", choices=sorted(harness.NAMED_WORLDS))
    th.add_argument("--r0", type=float, default=0.01)
    th.add_argument("--grid", type=int, default=disagreement.DEFAULT_POINTS, help="geometric grid points")
    th.add_argument("--mc", type=int, default=0, help="also estimate by Monte Carlo with this many draws")
    th.add_argument("--seed", type=int, default=0)
    th.add_argument("--csv", help="write the (r, mass, mass/r) table here")

    demo = sub.add_parser("demo-example1", help="two-predictor example: abstain mass 2 epsilon")
    demo.add_argument("--epsilon", type=float, default=0.1)
    demo.add_argument("--m", type=int, default=2000)
    demo.add_argument("--delta", type=float, default=0.1)
    demo.add_argument("--seed", type=int, default=0)

    sub.add_parser("version")
    return p


def _cmd_run(args) -> int:
    try:
        cfg = harness.load_config(args.config)
    except harness.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    report = harness.run(cfg)
    outdir = args.output or cfg.output or harness.default_output_dir()
    paths = report.write(outdir)
    for v in report.verdicts:
        print(f"{'PASS' if v.passed else 'FAIL'} {v.id}: {v.description} (observed {v.observed:g}, limit {v.limit:g})")
    print(f"wrote {len(paths)} files to {outdir}")
    return EXIT_OK if report.passed else EXIT_FAILED


def _cmd_theta(args) -> int:
    if not 0 < args.r0 <= 1 or args.grid < 1:
        print("error: need 0 < r0 <= 1 and grid >= 1", file=sys.stderr)
        return EXIT_USAGE
    world = harness.NAMED_WORLDS[args.world]()
    hyps, _ = world.all_true_minimizers()
    for f in hyps:
        est = disagreement.theta_f(world.space, world, f, args.r0, points=args.grid)
        line = f"f={f.params} r0={args.r0:g} theta={est.value:.6g}"
        if args.mc:
            mc = disagreement.theta_f(world.space, world, f, args.r0, points=args.grid,
                                      method=disagreement.MONTE_CARLO, n=args.mc, seed=args.seed)
            line += f" theta_mc={mc.value:.6g} (n={args.mc})"
        print(line)
        if args.csv:
            with open(args.csv, "w", newline="") as fh:
                fh.write(est.to_csv())
    return EXIT_OK


def _cmd_demo(args) -> int:
    try:
        world = example1_world(args.epsilon)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    sample = world.sample(args.m, args.seed)
    sc = selective.train_iless(world.space, sample, args.delta)
    mass = selective.exact_abstain_mass(world.space, sc, world)
    hyps, r_star = world.all_true_minimizers()
    kept = [world.space.name(f) for f in hyps if sc.low_error_set.contains(f)]
    print(f"epsilon={args.epsilon:g} m={args.m} delta={args.delta:g}")
    print(f"R* = {r_star:.3f}")
    print(f"minimizers in low-error set: {', '.join(kept) or 'none'}")
    print(f"radius = {sc.low_error_set.radius:.4f}")
    print(f"abstain mass = {mass:.3f}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    if args.command == "version":
        print(_package_version())
        return EXIT_OK
    return {"run": _cmd_run, "theta": _cmd_theta, "demo-example1": _cmd_demo}[args.command](args)


def cli_main(argv=None) -> int:
    try:
        return main(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
