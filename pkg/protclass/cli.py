#!/usr/bin/env python
"""
File Description: Command-line entry point.

    protclass calibrate stream.jsonl -o protected.jsonl --pi 0.5
    protclass simulate -o shifted.csv --scenario concept_shift --seed 3
    protclass experiment battery.cfg -o table.csv
    protclass oracle-check --instances 100
    protclass prequential stream.jsonl -o out.jsonl --checkpoint snap.json --stop-after 500

Exit codes: 0 on success, 1 on a domain or file error, 2 on a usage error.
"""

# ******************************************    Libraries to be imported    ****************************************** #
import argparse
import json
import logging
import sys
from typing import List, Optional

from protclass.commands import cmd_calibrate, cmd_experiment, cmd_oracle_check, cmd_prequential, cmd_simulate
from protclass.config import load_run_config
from protclass.errors import ProtClassError
from protclass.metrics import ECE_NORMS
from protclass.shift.datasets import SyntheticSpec
from protclass.shift.models import LOGISTIC_REGRESSION, MODEL_KINDS
from protclass.shift.scenarios import SCENARIO_KINDS, UNPERTURBED, ShiftScenario
from protclass.streams import DEFAULT_CLAMP_EPSILON, FORMATS

logger = logging.getLogger("protclass")

EXIT_OK = 0
EXIT_DOMAIN_ERROR = 1
EXIT_USAGE_ERROR = 2


def _float_list(text: str) -> tuple:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _add_run_flags(parser: argparse.ArgumentParser):
    group = parser.add_argument_group("run configuration (flags override --config)")
    group.add_argument("--config", help="key = value file with run settings")
    group.add_argument("--pi", type=float, help="prior weight of the base predictor, in (0, 1)")
    group.add_argument("--jump-rates", type=_float_list, help="comma-separated jump rates")
    group.add_argument("--betas", type=_float_list, help="comma-separated Cox exponents; must include 1")
    group.add_argument("--alpha-magnitudes", type=_float_list, help="comma-separated offset magnitudes")
    group.add_argument("--clamp-epsilon", type=float, help="probability clamp, in (0, 0.01]")
    group.add_argument("--ece-bins", type=int, help="equal-mass bins per class")
    group.add_argument("--ece-norm", choices=ECE_NORMS)
    group.add_argument("--seed", type=int)
    group.add_argument("--format", choices=FORMATS, help="input format when the suffix does not tell")


def _run_config(args: argparse.Namespace):
    return load_run_config(
        args.config,
        pi=args.pi,
        jump_rates=args.jump_rates,
        betas=args.betas,
        alpha_magnitudes=args.alpha_magnitudes,
        clamp_epsilon=args.clamp_epsilon,
        ece_bins=args.ece_bins,
        ece_norm=args.ece_norm,
        seed=args.seed,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="protclass", description="Protected probabilistic classification.")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG")
    sub = parser.add_subparsers(dest="command", required=True)

    calibrate = sub.add_parser("calibrate", help="protect a stream of base predictions")
    calibrate.add_argument("stream")
    calibrate.add_argument("-o", "--output", required=True, help="per-step output file")
    calibrate.add_argument("--report", help="report JSON path")
    calibrate.add_argument("--reliability", help="reliability CSV path")
    calibrate.add_argument("--cumulative", help="cumulative-loss CSV path")
    calibrate.add_argument("--weights", help="write per-step calibrator weights to this CSV")
    _add_run_flags(calibrate)

    simulate = sub.add_parser("simulate", help="generate a synthetic shifted prediction stream")
    simulate.add_argument("-o", "--output", required=True)
    simulate.add_argument("--scenario", choices=SCENARIO_KINDS, default=UNPERTURBED)
    simulate.add_argument("--classifier", choices=MODEL_KINDS, default=LOGISTIC_REGRESSION)
    simulate.add_argument("--K", type=int, default=2)
    simulate.add_argument("--n-features", type=int, default=20)
    simulate.add_argument("--n-informative", type=int, default=5)
    simulate.add_argument("--n-train", type=int, default=2000)
    simulate.add_argument("--n-test", type=int, default=1000)
    simulate.add_argument("--separation", type=float, default=1.0)
    simulate.add_argument("--tail", type=int, default=500, help="records affected by the scenario")
    simulate.add_argument("--no-permute", action="store_true", help="keep the test order after the scenario")
    simulate.add_argument("--seed", type=int, default=0)
    simulate.add_argument("--clamp-epsilon", type=float, default=DEFAULT_CLAMP_EPSILON)
    simulate.add_argument("--format", choices=FORMATS)

    experiment = sub.add_parser("experiment", help="run a battery of shift experiments")
    experiment.add_argument("config", help="key = value experiment file")
    experiment.add_argument("-o", "--output", required=True, help="metrics table CSV")

    oracle = sub.add_parser("oracle-check", help="compare the engine with brute-force enumeration")
    oracle.add_argument("--instances", type=int, default=100)
    oracle.add_argument("--seed", type=int, default=0)
    oracle.add_argument("--tolerance", type=float, default=1e-9)
    oracle.add_argument("--report", help="write the result as JSON")

    preq = sub.add_parser("prequential", help="replay a stream one record at a time with snapshots")
    preq.add_argument("stream")
    preq.add_argument("-o", "--output", required=True)
    preq.add_argument("--resume", help="snapshot to resume from")
    preq.add_argument("--checkpoint", help="snapshot path to write")
    preq.add_argument("--checkpoint-every", type=int)
    preq.add_argument("--stop-after", type=int, help="stop once this many steps are complete")
    _add_run_flags(preq)
    return parser


def _dispatch(args: argparse.Namespace) -> int:
    if args.command == "calibrate":
        result = cmd_calibrate(
            args.stream,
            args.output,
            _run_config(args),
            fmt=args.format,
            report_path=args.report,
            reliability_path=args.reliability,
            cumulative_path=args.cumulative,
            weights_path=args.weights,
        )
        summary = {k: result[k] for k in ("n", "regret", "protection_bound", "within_bound", "outputs")}
    elif args.command == "simulate":
        spec = SyntheticSpec(
            n_features=args.n_features,
            n_informative=args.n_informative,
            K=args.K,
            n_train=args.n_train,
            n_test=args.n_test,
            seed=args.seed,
            separation=args.separation,
        )
        scenario = ShiftScenario(kind=args.scenario, affected_tail=args.tail, permute_after=not args.no_permute)
        summary = cmd_simulate(args.output, spec, scenario, args.classifier, args.format, args.clamp_epsilon)
    elif args.command == "experiment":
        summary = cmd_experiment(args.config, args.output)
    elif args.command == "oracle-check":
        report = cmd_oracle_check(args.instances, args.seed, args.tolerance, args.report)
        print(json.dumps(report.to_dict()))
        return EXIT_OK if report.ok else EXIT_DOMAIN_ERROR
    else:
        summary = cmd_prequential(
            args.stream,
            args.output,
            _run_config(args),
            fmt=args.format,
            resume_from=args.resume,
            checkpoint_path=args.checkpoint,
            checkpoint_every=args.checkpoint_every,
            stop_after=args.stop_after,
        )
    print(json.dumps(summary))
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE_ERROR
    level = logging.WARNING if args.verbose == 0 else logging.INFO if args.verbose == 1 else logging.DEBUG
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return _dispatch(args)
    except (ProtClassError, OSError) as exc:
        logger.debug("command failed", exc_info=True)
        print(f"protclass: error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN_ERROR


if __name__ == "__main__":
    sys.exit(main())
