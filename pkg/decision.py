"""Assemble the oracle, the spectral flow and the adiabatic sweep into one verdict.

A truncated run can only certify that no solution lies within the box, never
global unsolvability; the verdict vocabulary says exactly that.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from diophantine import OracleResult, brute_force_min_square, evaluate, lattice_box, on_upper_boundary, require_double_exact
from dynamics import Cluster, degenerate_cluster, tau_sweep
from errors import FlowError, NonFiniteAmplitudeError
from flow import continue_flow, snap_verdict
from fock import build_instance
from models import (
    DecisionConfig,
    EvolutionReport,
    FlowPath,
    LatticeBox,
    MultiIndex,
    Polynomial,
    ProblemInstance,
    StudyReport,
    StudyRung,
    Verdict,
    VerdictStatus,
)

logger = logging.getLogger(__name__)


@dataclass
class FlowOutcome:
    path: Optional[FlowPath] = None
    e0: Optional[float] = None
    snapped: Optional[int] = None
    confident: bool = False
    error: Optional[str] = None


@dataclass
class DynamicsOutcome:
    identified: Optional[MultiIndex] = None
    value: Optional[int] = None
    cluster: Optional[Cluster] = None
    history: List[EvolutionReport] = field(default_factory=list)
    error: Optional[str] = None


@dataclass
class Decision:
    """A verdict together with the component results it was merged from."""

    verdict: Verdict
    oracle: OracleResult
    flow: FlowOutcome
    dynamics: DynamicsOutcome


def boundary_message(minimum: int) -> str:
    return f"minimum {minimum} attained at box boundary — escalate cutoff"


def choose_witness(witnesses: Sequence[MultiIndex]) -> MultiIndex:
    """First witness with all coordinates positive, else the first one."""
    for witness in witnesses:
        if all(x > 0 for x in witness):
            return witness
    return witnesses[0]


def minimum_on_boundary(oracle: OracleResult, box: LatticeBox) -> bool:
    return all(on_upper_boundary(w, box) for w in oracle.witnesses)


def run_flow(instance: ProblemInstance, config: DecisionConfig) -> FlowOutcome:
    solver = config.solver
    m = min(solver.tracked_states, instance.basis.dim)
    try:
        path = continue_flow(instance, m, solver.flow_tol, solver)
        e0 = float(path.final.eigenvalues.min())
        snapped, confident = snap_verdict(e0)
    except (FlowError, np.linalg.LinAlgError, ValueError) as exc:
        logger.warning("flow component failed: %s", exc)
        return FlowOutcome(error=f"{type(exc).__name__}: {exc}")
    return FlowOutcome(path=path, e0=e0, snapped=snapped, confident=confident)


def run_dynamics(instance: ProblemInstance, config: DecisionConfig) -> DynamicsOutcome:
    solver = config.solver
    p = instance.polynomial
    try:
        identified, history = tau_sweep(
            instance, solver.tau0, solver.growth, solver.max_rounds, solver,
            stop_when=lambda report: degenerate_cluster(report, p) is not None,
        )
    except (NonFiniteAmplitudeError, np.linalg.LinAlgError) as exc:
        logger.warning("dynamics component failed: %s", exc)
        return DynamicsOutcome(error=f"{type(exc).__name__}: {exc}")

    if identified is not None:
        return DynamicsOutcome(identified=identified, value=evaluate(p, identified) ** 2, history=history)
    cluster = degenerate_cluster(history[-1], p) if history else None
    if cluster is not None:
        return DynamicsOutcome(value=cluster.value, cluster=cluster, history=history)
    return DynamicsOutcome(history=history)


def _flow_diagnostics(flow: FlowOutcome, minimum: int) -> List[str]:
    if flow.error is not None:
        return [f"flow failed: {flow.error}"]
    notes = []
    if not flow.confident:
        notes.append(f"flow E0(1)={flow.e0:.6g} is not within snapping accuracy of {flow.snapped}")
    if flow.snapped != minimum:
        notes.append(f"flow snapped to {flow.snapped} but oracle minimum is {minimum}")
    return notes


def _dynamics_diagnostics(dynamics: DynamicsOutcome, p: Polynomial, minimum: int) -> List[str]:
    if dynamics.error is not None:
        return [f"dynamics failed: {dynamics.error}"]
    notes = []
    if dynamics.value is None:
        last = dynamics.history[-1].top_occupations[0] if dynamics.history else None
        notes.append(f"dynamics identified no state after {len(dynamics.history)} sweep rounds (top occupation {last})")
        return notes
    if dynamics.identified is None:
        members = ", ".join(str(m) for m in dynamics.cluster.members)
        notes.append(
            f"dynamics found a degenerate cluster D^2={dynamics.value} holding {dynamics.cluster.probability:.3f}: {members}"
        )
    if dynamics.value != minimum:
        notes.append(f"dynamics state has D^2={dynamics.value} but oracle minimum is {minimum}")
    return notes


def merge(
    p: Polynomial, box: LatticeBox, oracle: OracleResult, flow: FlowOutcome, dynamics: DynamicsOutcome
) -> Verdict:
    """Pure assembly of the component results."""
    minimum = oracle.min_value
    diagnostics: List[str] = []
    if minimum_on_boundary(oracle, box):
        diagnostics.append(boundary_message(minimum))
    diagnostics += _flow_diagnostics(flow, minimum)
    diagnostics += _dynamics_diagnostics(dynamics, p, minimum)

    witness = None
    if minimum == 0:
        status = VerdictStatus.SOLVABLE
        witness = choose_witness(oracle.witnesses)
        if evaluate(p, witness) != 0:
            raise RuntimeError(f"Oracle witness {witness} does not satisfy D = 0")
    elif (
        flow.confident and flow.snapped == minimum and dynamics.value == minimum
    ):
        status = VerdictStatus.NO_SOLUTION
    else:
        status = VerdictStatus.INCONCLUSIVE

    return Verdict(
        status=status,
        witness=witness,
        e0_flow=flow.e0,
        e0_oracle=minimum,
        dynamics_identified=dynamics.identified,
        cutoffs=box.upper,
        diagnostics=tuple(diagnostics),
    )


def run_decision(p: Polynomial, cutoffs: Sequence[int], config: Optional[DecisionConfig] = None) -> Decision:
    config = config or DecisionConfig()
    solver = config.solver
    instance = build_instance(p, cutoffs, config.alphas, config.lambdas, config.schedule)
    box = lattice_box(instance.basis.cutoffs)
    require_double_exact(p, box)

    if solver.workers > 1:
        with ThreadPoolExecutor(max_workers=3) as executor:
            oracle_future = executor.submit(brute_force_min_square, p, box, solver.enumeration_cap, solver.workers)
            flow_future = executor.submit(run_flow, instance, config)
            dynamics_future = executor.submit(run_dynamics, instance, config)
            oracle, flow, dynamics = oracle_future.result(), flow_future.result(), dynamics_future.result()
    else:
        oracle = brute_force_min_square(p, box, solver.enumeration_cap)
        flow = run_flow(instance, config)
        dynamics = run_dynamics(instance, config)

    verdict = merge(p, box, oracle, flow, dynamics)
    for note in verdict.diagnostics:
        logger.warning("%s: %s", box.upper, note)
    logger.info("verdict for cutoffs %s: %s", box.upper, verdict.status.value)
    return Decision(verdict=verdict, oracle=oracle, flow=flow, dynamics=dynamics)


def decide(p: Polynomial, cutoffs: Sequence[int], config: Optional[DecisionConfig] = None) -> Verdict:
    """SolvableWithWitness, NoSolutionWithinBox or Inconclusive for the box [0, cutoffs].

    Construction errors propagate; flow and dynamics failures only demote
    the verdict and are named in its diagnostics.
    """
    return run_decision(p, cutoffs, config).verdict


def validate_ladder(ladder: Sequence[Sequence[int]], num_vars: int) -> Tuple[MultiIndex, ...]:
    rungs = tuple(tuple(int(d) for d in rung) for rung in ladder)
    if not rungs:
        raise ValueError("Cutoff ladder cannot be empty")
    for rung in rungs:
        if len(rung) != num_vars:
            raise ValueError(f"Rung {rung} has {len(rung)} cutoffs for a polynomial in {num_vars} variables")
    for previous, rung in zip(rungs, rungs[1:]):
        if rung == previous or any(b < a for a, b in zip(previous, rung)):
            raise ValueError(f"Cutoff ladder must increase: {rung} does not follow {previous}")
    return rungs


def convergence_study(
    p: Polynomial, ladder: Sequence[Sequence[int]], config: Optional[DecisionConfig] = None
) -> StudyReport:
    """Decide at every rung of an increasing cutoff ladder and report stability."""
    rungs: List[StudyRung] = []
    for cutoffs in validate_ladder(ladder, p.num_vars):
        decision = run_decision(p, cutoffs, config)
        verdict = decision.verdict
        rungs.append(StudyRung(
            cutoffs=verdict.cutoffs,
            status=verdict.status,
            e0_flow=verdict.e0_flow,
            e0_oracle=verdict.e0_oracle,
            interior_minimum=not minimum_on_boundary(decision.oracle, lattice_box(cutoffs)),
            diagnostics=verdict.diagnostics,
        ))

    flips = tuple(i for i in range(1, len(rungs)) if rungs[i].status != rungs[i - 1].status)
    left_boundary = any(not a.interior_minimum and b.interior_minimum for a, b in zip(rungs, rungs[1:]))
    return StudyReport(
        rungs=tuple(rungs),
        verdict_stable=not flips,
        e0_oracle_stable=len({r.e0_oracle for r in rungs}) == 1,
        flips=flips,
        left_boundary=left_boundary,
    )
