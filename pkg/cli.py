#!/usr/bin/env python3
"""Batch front end: parse | oracle | flow | evolve | sweep | decide | study.

JSON goes to stdout (or --out), logs to stderr. Exit codes: 0 verdict or
result produced, 2 inconclusive, 1 usage, parse or validation error.
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Tuple

from decision import convergence_study, run_decision
from diophantine import brute_force_min_square, lattice_box, parse
from dynamics import evolve, identify_ground, samples_to_csv, sweep_steps, tau_sweep
from errors import FlowError, NonFiniteAmplitudeError
from flow import continue_flow, path_to_csv
from fock import build_instance, coherent_state, operators
from models import DecisionConfig, MultiIndex, Polynomial, ProblemInstance, RunConfig, SolverConfig, VerdictStatus
from schedules import registry
from serialization import (
    operator_to_dict,
    oracle_to_dict,
    path_to_dict,
    polynomial_to_dict,
    report_to_dict,
    state_to_dict,
    study_to_dict,
    sweep_to_dict,
    to_json,
    verdict_to_dict,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INCONCLUSIVE = 2
DEFAULT_CUTOFF = 8
SAMPLE_ROWS = 200
COMMANDS = ("parse", "oracle", "flow", "evolve", "sweep", "decide", "study")


class CliParser(argparse.ArgumentParser):
    """Usage errors exit with status 1 after printing the synopsis."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def int_list(text: str) -> MultiIndex:
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def float_list(text: str) -> Tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def complex_list(text: str) -> Tuple[complex, ...]:
    try:
        return tuple(complex(x.replace(" ", "")) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def ladder(text: str) -> Tuple[MultiIndex, ...]:
    return tuple(int_list(rung) for rung in text.split(";") if rung.strip())


def build_parser() -> CliParser:
    common = CliParser(add_help=False)
    common.add_argument("--poly", required=True, help="polynomial, e.g. 'x1^2 + x2^2 - 25'")
    common.add_argument("--cutoffs", type=int_list, help=f"per-mode Fock cutoffs (default {DEFAULT_CUTOFF} each)")
    common.add_argument("--alphas", type=complex_list, help="coherent amplitudes (default 1 per mode)")
    common.add_argument("--lambdas", type=float_list, help="H_I weights (default square roots of primes)")
    common.add_argument("--schedule", choices=registry.names(), default="linear")
    common.add_argument("--out", help="write JSON here instead of stdout")
    common.add_argument("--trace", help="prefix for CSV trace files")
    common.add_argument("--dump", help="write H_I, H_P and the initial state as JSON")
    common.add_argument("--tol", type=float, default=SolverConfig.flow_tol, help="flow step tolerance")
    common.add_argument("--m", type=int, default=SolverConfig.tracked_states, help="tracked eigenstates")
    common.add_argument("--tau0", type=float, default=SolverConfig.tau0)
    common.add_argument("--growth", type=float, default=SolverConfig.growth)
    common.add_argument("--max-rounds", type=int, default=SolverConfig.max_rounds)
    common.add_argument("--workers", type=int, default=SolverConfig.workers)
    common.add_argument("-v", "--verbose", action="count", default=0)

    parser = CliParser(prog="h10-spectral", description="Spectral-flow and adiabatic decisions for small Diophantine equations")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub = subparsers.add_parser(name, parents=[common])
        if name == "evolve":
            sub.add_argument("--tau", type=float, default=RunConfig.tau)
            sub.add_argument("--steps", type=int, help="default: max(min_steps, 200 tau)")
        if name == "study":
            sub.add_argument("--ladder", type=ladder, required=True, help="rungs separated by ';', modes by ','")
    return parser


def run_config(args: argparse.Namespace) -> RunConfig:
    solver = SolverConfig(
        flow_tol=args.tol,
        tracked_states=args.m,
        tau0=args.tau0,
        growth=args.growth,
        max_rounds=args.max_rounds,
        workers=args.workers,
    )
    return RunConfig(
        command=args.command,
        poly=args.poly,
        cutoffs=args.cutoffs,
        out=args.out,
        trace=args.trace,
        dump=args.dump,
        tau=getattr(args, "tau", RunConfig.tau),
        steps=getattr(args, "steps", None),
        ladder=getattr(args, "ladder", ()),
        decision=DecisionConfig(alphas=args.alphas, lambdas=args.lambdas, schedule=args.schedule, solver=solver),
    )


def resolve_cutoffs(p: Polynomial, cutoffs: Optional[MultiIndex]) -> MultiIndex:
    if cutoffs is None:
        return (DEFAULT_CUTOFF,) * p.num_vars
    if len(cutoffs) != p.num_vars:
        raise ValueError(f"Got {len(cutoffs)} cutoffs for a polynomial in {p.num_vars} variables")
    return cutoffs


def write_text(path: str, text: str):
    Path(path).write_text(text)
    logger.info("wrote %s", path)


def emit(data: Dict[str, Any], config: RunConfig):
    text = to_json(data)
    if config.out:
        write_text(config.out, text + "\n")
    else:
        print(text)


def dump_instance(instance: ProblemInstance, path: str):
    ops = operators(instance)
    write_text(path, to_json({
        "h_i": operator_to_dict(ops.h_i),
        "h_p": operator_to_dict(ops.h_p),
        "initial_state": state_to_dict(coherent_state(instance.alphas, instance.basis)),
    }) + "\n")


def sample_interval(steps: int) -> int:
    return max(1, steps // SAMPLE_ROWS)


def cmd_flow(instance: ProblemInstance, config: RunConfig) -> int:
    solver = config.decision.solver
    m = min(solver.tracked_states, instance.basis.dim)
    try:
        path = continue_flow(instance, m, solver.flow_tol, solver)
    except FlowError as exc:
        logger.error("flow failed: %s", exc)
        if config.trace and exc.path is not None:
            write_text(f"{config.trace}_flow.csv", path_to_csv(exc.path))
        emit({"error": str(exc), "path": path_to_dict(exc.path) if exc.path is not None else None}, config)
        return EXIT_INCONCLUSIVE
    if config.trace:
        write_text(f"{config.trace}_flow.csv", path_to_csv(path))
    emit(path_to_dict(path), config)
    return EXIT_OK


def cmd_evolve(p: Polynomial, instance: ProblemInstance, config: RunConfig) -> int:
    steps = config.steps or sweep_steps(config.tau, config.decision.solver)
    report = evolve(
        instance, config.tau, steps,
        sample_every=sample_interval(steps) if config.trace else 0,
        top_k=config.decision.solver.top_k,
    )
    if config.trace:
        write_text(f"{config.trace}_evolve.csv", samples_to_csv(report.samples))
    data = report_to_dict(report, p)
    identified = identify_ground(report)
    data["identified"] = list(identified) if identified is not None else None
    emit(data, config)
    return EXIT_OK


def cmd_sweep(p: Polynomial, instance: ProblemInstance, config: RunConfig) -> int:
    solver = config.decision.solver
    sample_every = sample_interval(sweep_steps(solver.tau0 * solver.growth ** max(solver.max_rounds - 1, 0), solver))
    identified, history = tau_sweep(
        instance, solver.tau0, solver.growth, solver.max_rounds, solver,
        sample_every=sample_every if config.trace else 0,
    )
    if config.trace and history:
        write_text(f"{config.trace}_evolve.csv", samples_to_csv(history[-1].samples))
    emit(sweep_to_dict(identified, history, p), config)
    return EXIT_OK if identified is not None else EXIT_INCONCLUSIVE


def cmd_decide(p: Polynomial, cutoffs: MultiIndex, config: RunConfig) -> int:
    decision = run_decision(p, cutoffs, config.decision)
    if config.trace and decision.flow.path is not None:
        write_text(f"{config.trace}_flow.csv", path_to_csv(decision.flow.path))
    emit(verdict_to_dict(decision.verdict), config)
    return EXIT_INCONCLUSIVE if decision.verdict.status == VerdictStatus.INCONCLUSIVE else EXIT_OK


def cmd_study(p: Polynomial, config: RunConfig) -> int:
    report = convergence_study(p, config.ladder, config.decision)
    emit(study_to_dict(report), config)
    return EXIT_INCONCLUSIVE if report.rungs[-1].status == VerdictStatus.INCONCLUSIVE else EXIT_OK


def execute(config: RunConfig) -> int:
    p = parse(config.poly)
    if config.command == "parse":
        emit(polynomial_to_dict(p), config)
        return EXIT_OK
    if config.command == "study":
        return cmd_study(p, config)

    cutoffs = resolve_cutoffs(p, config.cutoffs)
    solver = config.decision.solver
    if config.command == "oracle":
        result = brute_force_min_square(p, lattice_box(cutoffs), solver.enumeration_cap, solver.workers)
        emit(oracle_to_dict(result), config)
        return EXIT_OK

    decision = config.decision
    instance = build_instance(p, cutoffs, decision.alphas, decision.lambdas, decision.schedule)
    if config.dump:
        dump_instance(instance, config.dump)
    if config.command == "flow":
        return cmd_flow(instance, config)
    if config.command == "evolve":
        return cmd_evolve(p, instance, config)
    if config.command == "sweep":
        return cmd_sweep(p, instance, config)
    return cmd_decide(p, cutoffs, config)


def configure_logging(verbosity: int):
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_ERROR
    configure_logging(args.verbose)

    try:
        config = run_config(args)
        return execute(config)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except NonFiniteAmplitudeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INCONCLUSIVE


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
