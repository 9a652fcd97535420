"""Command-line entry point: ``teeur sweep | verify | bounds``.

Exit codes: 0 success, 1 verification failure or bound violation,
2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

from . import games
from .experiments import (
    PRESETS,
    SUITES,
    ConfigError,
    SweepConfig,
    columns_for,
    load_generator,
    load_state_json,
    preset,
    run_sweep,
    run_verify,
    serialize,
)
from .ensembles import SeededSource, random_angles
from .qstate import StateError

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _dist(text: str):
    return "uniform" if text == "uniform" else _floats(text)


def _add_game_flags(p: argparse.ArgumentParser):
    p.add_argument("--num-rotations", type=int, help="|R|, the number of rotation angles")
    p.add_argument("--angles", type=_floats, help="explicit comma-separated angles (radians)")
    p.add_argument("--dist", type=_dist, help="'uniform' or comma-separated probabilities")
    p.add_argument("--generator", help="pauli-x, pauli-z, or a JSON file of [re, im] pairs")
    p.add_argument("--seed", type=int, help="base seed for every random stream")
    p.add_argument("--out", help="output path (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="teeur", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    sw = sub.add_parser("sweep", help="theta sweep of a guessing game, one row per grid point")
    sw.add_argument("--preset", choices=sorted(PRESETS))
    sw.add_argument("--game", choices=["tripartite", "bipartite"])
    sw.add_argument("--dims", type=_ints, help="A,B1,B2 (tripartite) or A,B (bipartite)")
    _add_game_flags(sw)
    sw.add_argument("--theta-steps", type=int)
    sw.add_argument("--noise-eps", type=float)
    sw.add_argument("--noise-placement", choices=["before", "after"])
    sw.add_argument("--trials", type=int)
    sw.add_argument("--format", choices=["csv", "json"])

    ve = sub.add_parser("verify", help="run invariant suites; exit 1 on any failure")
    ve.add_argument("suite", nargs="?", default="all", help=f"one of: all, {', '.join(SUITES)}")
    ve.add_argument("--samples", type=int, default=20)
    ve.add_argument("--seed", type=int, default=0)
    ve.add_argument("--out", help="write the JSON report here (default: stdout)")
    ve.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)

    bo = sub.add_parser("bounds", help="bound report for one state read from a JSON file")
    bo.add_argument("--state", required=True, help='JSON {"layout": [[label, dim], ...], "matrix": [[[re, im], ...]]}')
    _add_game_flags(bo)
    return parser


def _sweep_config(args) -> SweepConfig:
    config = preset(args.preset) if args.preset else SweepConfig()
    overrides = {
        "game": args.game,
        "dims": args.dims,
        "num_rotations": args.num_rotations,
        "angles": args.angles,
        "distribution": args.dist,
        "generator": args.generator,
        "theta_steps": args.theta_steps,
        "noise_eps": args.noise_eps,
        "noise_placement": args.noise_placement,
        "trials": args.trials,
        "seed": args.seed,
        "out": args.out,
        "format": args.format,
    }
    overrides = {k: v for k, v in overrides.items() if v is not None}
    if args.game and not args.preset and "dims" not in overrides:
        overrides["dims"] = (2, 1, 2) if args.game == "tripartite" else (2, 2)
    if args.angles is not None and args.num_rotations is None:
        overrides["num_rotations"] = len(args.angles)
    return replace(config, **overrides).validate()


def cmd_sweep(args) -> int:
    config = _sweep_config(args)
    rows = run_sweep(config)
    text = serialize(rows, config.format, config.out, columns=columns_for(config.game))
    if config.out is None:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_verify(args) -> int:
    report = run_verify(args.suite, samples=args.samples, seed=args.seed, inject_fault=args.inject_fault)
    text = json.dumps(report.to_json(), indent=1, default=float) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    for check in report.failures:
        print(f"FAIL [{check['suite']}] {check['check']}", file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_bounds(args) -> int:
    state = load_state_json(args.state)
    try:
        generator = load_generator(args.generator or "pauli-z", state.layout.dim("A"))
    except StateError as exc:
        raise ConfigError(f"state: {exc}") from None
    seed = 0 if args.seed is None else args.seed
    if args.angles is not None:
        angles = list(args.angles)
    else:
        n = args.num_rotations or 2
        angles = random_angles(n, SeededSource(seed, "angles"))
    dist = args.dist or "uniform"
    try:
        if dist == "uniform":
            ens = games.RotationEnsemble.uniform(angles)
        else:
            ens = games.RotationEnsemble(tuple(angles), tuple(dist))
        game = games.GameInstance(state, generator, ens)
    except StateError as exc:
        raise ConfigError(str(exc)) from None
    rep = games.report(game)
    payload = {
        "game": rep.game,
        "angles": list(ens.angles),
        "probabilities": list(ens.probabilities),
        "lhs": rep.lhs,
        "rhs": rep.rhs,
        "gaps": rep.gaps,
        "terms": rep.terms,
        "hypotheses": rep.hypotheses,
        "saturated": rep.saturated,
    }
    text = json.dumps(payload, indent=1) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK if not rep.violations() else EXIT_FAIL


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"sweep": cmd_sweep, "verify": cmd_verify, "bounds": cmd_bounds}[args.command]
    try:
        return handler(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except games.BoundViolation as exc:
        print(f"bound violation: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
