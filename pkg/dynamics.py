"""The dynamical approach: evolve the coherent ground state of H_I under
H(t/tau) and read the answer off the final Fock-state occupations."""
import csv
import io
import logging
import math
from typing import Callable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import eigh

from diophantine import evaluate
from errors import NonFiniteAmplitudeError
from fock import TAIL_WARNING, coherent_state, ground_candidate, interpolated_entries, operators, tail_mass
from models import EvolutionReport, MultiIndex, Polynomial, ProblemInstance, SolverConfig, WaveFunction
from schedules import Schedule

logger = logging.getLogger(__name__)

RESOLUTION_FACTOR = 10
CRITERION = 0.5
OCCUPIED = 1e-4
SETTLED = 1e-2


def top_occupations(state: WaveFunction, k: int) -> Tuple[Tuple[MultiIndex, float], ...]:
    probabilities = state.probabilities()
    order = np.lexsort((np.arange(probabilities.size), -probabilities))[:k]
    return tuple((state.basis.unflat(int(j)), float(probabilities[j])) for j in order)


def midpoint_step(psi: np.ndarray, h: np.ndarray, dt: float) -> np.ndarray:
    """exp(-i dt h) psi through the eigendecomposition of h."""
    values, vectors = eigh(h)
    return vectors @ (np.exp(-1j * dt * values) * (vectors.conj().T @ psi))


def evolve(
    instance: ProblemInstance,
    tau: float,
    steps: int,
    schedule: Optional[Schedule] = None,
    sample_every: int = 0,
    top_k: int = 8,
) -> EvolutionReport:
    """Integrate d/dt psi = -i H(t/tau) psi on [0, tau] from the coherent state.

    Each of the ``steps`` steps applies the exact exponential of H at the step
    midpoint, a second-order realization of the time-ordered exponential. The
    final state is not renormalized; the drift is reported instead.
    """
    if not tau > 0:
        raise ValueError("tau must be positive")
    if steps < 1:
        raise ValueError("steps must be positive")
    schedule = schedule or instance.schedule
    ops = operators(instance)
    basis = instance.basis

    warnings: List[str] = []
    required = math.ceil(RESOLUTION_FACTOR * tau * float(np.max(np.abs(ops.w.entries))))
    if steps < required:
        message = f"{steps} steps under-resolve tau={tau:g}; at least {required} recommended"
        logger.warning(message)
        warnings.append(message)
    for mode, (alpha, d) in enumerate(zip(instance.alphas, basis.cutoffs), 1):
        lost = tail_mass(alpha, d)
        if lost > TAIL_WARNING:
            warnings.append(f"mode {mode} coherent tail {lost:.2e} discarded at cutoff {d}")

    psi = coherent_state(instance.alphas, basis).amplitudes.copy()
    norm = float(np.linalg.norm(psi))
    candidate = basis.flat(ground_candidate(instance))
    dt = tau / steps
    samples = [(0.0, norm, float(abs(psi[candidate]) ** 2))] if sample_every else []
    max_defect = 0.0

    for k in range(steps):
        h = interpolated_entries(ops.h_i.entries, ops.h_p.entries, schedule.f((k + 0.5) / steps))
        psi = midpoint_step(psi, h, dt)
        if not np.all(np.isfinite(psi)):
            raise NonFiniteAmplitudeError(f"non-finite amplitude after step {k + 1} (dt={dt:g}); use more steps")
        new_norm = float(np.linalg.norm(psi))
        max_defect = max(max_defect, abs(new_norm - norm))
        norm = new_norm
        if sample_every and ((k + 1) % sample_every == 0 or k + 1 == steps):
            samples.append(((k + 1) * dt, norm, float(abs(psi[candidate]) ** 2)))

    final = WaveFunction(amplitudes=psi, basis=basis)
    logger.debug("evolved tau=%g in %d steps, norm drift %.2e", tau, steps, abs(norm - 1.0))
    return EvolutionReport(
        tau=tau,
        final_state=final,
        norm_drift=abs(norm - 1.0),
        steps=steps,
        top_occupations=top_occupations(final, top_k),
        max_step_defect=max_defect,
        samples=tuple(samples),
        warnings=tuple(warnings),
    )


def identify_ground(report: EvolutionReport) -> Optional[MultiIndex]:
    """The Fock state holding strictly more than half the probability, if any."""
    if not report.top_occupations:
        return None
    index, probability = report.top_occupations[0]
    return index if probability > CRITERION else None


def undercut_by(report: EvolutionReport, identified: MultiIndex, d_squared: np.ndarray, occupied: float = SETTLED) -> Optional[MultiIndex]:
    """An occupied state with smaller D^2 than the identified one, if any.

    Below the adiabatic regime a higher state can briefly hold the majority
    while the true minimum is still visibly populated.
    """
    probabilities = report.final_state.probabilities()
    basis = report.final_state.basis
    value = d_squared[basis.flat(identified)]
    lower = np.flatnonzero((probabilities >= occupied) & (d_squared < value))
    if lower.size == 0:
        return None
    return basis.unflat(int(lower[np.argmin(d_squared[lower])]))


def sweep_steps(tau: float, config: SolverConfig) -> int:
    return max(config.min_steps, math.ceil(config.steps_per_tau * tau))


def tau_sweep(
    instance: ProblemInstance,
    tau0: float,
    growth: float,
    max_rounds: int,
    config: Optional[SolverConfig] = None,
    stop_when: Optional[Callable[[EvolutionReport], bool]] = None,
    sample_every: int = 0,
) -> Tuple[Optional[MultiIndex], List[EvolutionReport]]:
    """Evolve at tau0 * growth^k until the occupation criterion holds.

    An identification is accepted only while no state with smaller D^2
    keeps SETTLED occupation. Exhausting max_rounds is inconclusive, not a
    negative answer.
    """
    if not tau0 > 0:
        raise ValueError("tau0 must be positive")
    if not growth > 1:
        raise ValueError("growth must exceed 1")
    if max_rounds < 0:
        raise ValueError("max_rounds cannot be negative")
    config = config or SolverConfig()
    d_squared = operators(instance).h_p.entries.diagonal().real

    history: List[EvolutionReport] = []
    for k in range(max_rounds):
        tau = tau0 * growth ** k
        report = evolve(instance, tau, sweep_steps(tau, config), sample_every=sample_every, top_k=config.top_k)
        history.append(report)
        identified = identify_ground(report)
        logger.info("sweep round %d: tau=%g top occupation %s", k, tau, report.top_occupations[0])
        if identified is not None:
            lower = undercut_by(report, identified, d_squared)
            if lower is None:
                return identified, history
            logger.info("round %d: %s holds the majority but %s with smaller D^2 is still occupied", k, identified, lower)
        if stop_when is not None and stop_when(report):
            break
    return None, history


class Cluster(NamedTuple):
    value: int
    members: List[MultiIndex]
    probability: float


def degenerate_cluster(report: EvolutionReport, p: Polynomial, occupied: float = OCCUPIED) -> Optional[Cluster]:
    """States sharing one exact D^2 value that together hold more than half the
    probability, provided no occupied state has a smaller D^2.

    Members are ordered by descending probability.
    """
    probabilities = report.final_state.probabilities()
    basis = report.final_state.basis
    values = [evaluate(p, n) ** 2 for n in basis.states()]
    lowest_occupied = min((v for v, prob in zip(values, probabilities) if prob >= occupied), default=math.inf)
    totals = {}
    for value, probability in zip(values, probabilities):
        totals[value] = totals.get(value, 0.0) + float(probability)
    for value in sorted(totals):
        if totals[value] > CRITERION and value <= lowest_occupied:
            positions = [j for j, v in enumerate(values) if v == value]
            positions.sort(key=lambda j: (-probabilities[j], j))
            return Cluster(value, [basis.unflat(j) for j in positions], totals[value])
    return None


def samples_to_csv(samples: Sequence[Tuple[float, float, float]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["t", "norm", "ground_candidate_occupation"])
    for t, norm, occupation in samples:
        writer.writerow([repr(t), repr(norm), repr(occupation)])
    return buffer.getvalue()
