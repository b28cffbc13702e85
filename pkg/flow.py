"""The kinematic approach: follow the lowest eigenpairs of H(s) from s=0 to s=1.

Each step predicts with the first-order flow equations (Hellmann-Feynman for
the eigenvalues, the gap-weighted mixing sum for the eigenvectors, truncated to
the tracked levels) and corrects with a dense eigensolve of H(s). The
predictor/corrector discrepancy stands in for the series remainders.
"""
import csv
import io
import logging
import math
from typing import List, Optional, Tuple

import numpy as np
from scipy.linalg import eigh
from scipy.optimize import linear_sum_assignment

from errors import AmbiguousMatch, GapCollapse, StepLimitExceeded, StepSizeUnderflow
from fock import interpolate, operators
from models import FlowPath, FlowState, HermitianOperator, ProblemInstance, SolverConfig, StepRecord

logger = logging.getLogger(__name__)

MATCH_THRESHOLD = 0.5
ACCEPT_OVERLAP = 0.9
GROWTH = 1.5
SNAP_ACCURACY = 0.3


def gap_floor(eigenvalues: np.ndarray) -> float:
    if eigenvalues.size < 2:
        return math.inf
    return float(np.min(np.diff(np.sort(eigenvalues))))


def eigensolve(h: HermitianOperator, m: int, s: float = 0.0) -> FlowState:
    """The m lowest eigenpairs of h, ascending."""
    if not 1 <= m <= h.dim:
        raise ValueError(f"Cannot track {m} states of a {h.dim}-dimensional operator")
    values, vectors = eigh(h.entries, subset_by_index=[0, m - 1])
    return FlowState(s=s, eigenvalues=values, eigenvectors=vectors, gap_floor=gap_floor(values))


def _projected(state: FlowState, w: HermitianOperator) -> np.ndarray:
    v = state.eigenvectors
    return v.conj().T @ w.entries @ v


def _check_gaps(state: FlowState, gap_eps: float):
    e = state.eigenvalues
    order = np.argsort(e)
    gaps = np.diff(e[order])
    if gaps.size and np.min(gaps) <= gap_eps:
        k = int(np.argmin(gaps))
        q, l = sorted((int(order[k]), int(order[k + 1])))
        raise GapCollapse(state.s, q, l, float(gaps[k]))


def mixing_coefficients(state: FlowState, w: HermitianOperator, fprime: float, gap_eps: float = 1e-6) -> np.ndarray:
    """C[l, q] = f' <E_l|W|E_q> / (E_q - E_l), with C[q, q] = 0 exactly."""
    _check_gaps(state, gap_eps)
    e = state.eigenvalues
    projected = _projected(state, w)
    denominators = e[np.newaxis, :] - e[:, np.newaxis]
    np.fill_diagonal(denominators, 1.0)
    coefficients = fprime * projected / denominators
    np.fill_diagonal(coefficients, 0.0)
    return coefficients


def flow_derivatives(
    state: FlowState, w: HermitianOperator, fprime: float, gap_eps: float = 1e-6
) -> Tuple[np.ndarray, np.ndarray]:
    """(dE/ds, dV/ds) over the tracked levels only."""
    coefficients = mixing_coefficients(state, w, fprime, gap_eps)
    d_e = fprime * np.real(np.diag(_projected(state, w)))
    d_v = state.eigenvectors @ coefficients
    return d_e, d_v


def _normalized_columns(matrix: np.ndarray) -> np.ndarray:
    return matrix / np.linalg.norm(matrix, axis=0, keepdims=True)


def column_overlaps(reference: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    """|<reference_q|vectors_q>| after normalizing the reference columns."""
    return np.abs(np.sum(_normalized_columns(reference).conj() * vectors, axis=0))


def gauge_align(reference: np.ndarray, candidate: FlowState, apply_phases: bool = True) -> FlowState:
    """Reorder candidate columns by maximal overlap with the reference, then
    rotate each column's phase so <reference_q|candidate_q> is real positive."""
    if reference.shape != candidate.eigenvectors.shape:
        raise ValueError(f"Reference shape {reference.shape} does not match candidate {candidate.eigenvectors.shape}")
    overlaps = _normalized_columns(reference).conj().T @ candidate.eigenvectors
    magnitudes = np.abs(overlaps)
    rows, columns = linear_sum_assignment(-magnitudes)
    for row, column in zip(rows, columns):
        if magnitudes[row, column] < MATCH_THRESHOLD:
            raise AmbiguousMatch(candidate.s, int(row), float(magnitudes[row, column]))

    vectors = candidate.eigenvectors[:, columns].copy()
    values = candidate.eigenvalues[columns]
    if apply_phases:
        matched = overlaps[rows, columns]
        vectors *= np.conj(matched) / np.abs(matched)
    return FlowState(s=candidate.s, eigenvalues=values, eigenvectors=vectors, gap_floor=candidate.gap_floor)


def _align_or_keep(reference: np.ndarray, candidate: FlowState, apply_phases: bool) -> FlowState:
    try:
        return gauge_align(reference, candidate, apply_phases)
    except AmbiguousMatch as exc:
        logger.warning("endpoint eigenvectors are degenerate (%s); keeping eigenvalue order", exc)
        return candidate


def _is_permuted(state: FlowState) -> bool:
    return bool(np.any(np.diff(state.eigenvalues) < 0))


def _merges_at_endpoint(state: FlowState, exc: GapCollapse, endpoint: np.ndarray, gap_eps: float) -> bool:
    """Whether the collapsing columns end up as coincident levels of H_P.

    GapCollapse names columns; endpoint is in rank order.
    """
    ranks = np.argsort(np.argsort(state.eigenvalues, kind="stable"), kind="stable")
    q, l = int(ranks[exc.q]), int(ranks[exc.l])
    if max(q, l) >= endpoint.size:
        return False
    return bool(abs(endpoint[q] - endpoint[l]) <= gap_eps)


def _endpoint_spectrum(h_p: HermitianOperator, m: int) -> np.ndarray:
    # One level beyond the tracked ones: a tie with it also degenerates the top tracked column.
    diagonal = np.sort(h_p.entries.diagonal().real)
    return diagonal[: min(m + 1, diagonal.size)]


def continue_flow(
    instance: ProblemInstance,
    m: int,
    tol: float,
    config: Optional[SolverConfig] = None,
    align_phases: bool = True,
) -> FlowPath:
    """Predictor-corrector continuation of the m lowest levels over s in [0, 1]."""
    config = config or SolverConfig()
    ops = operators(instance)
    schedule = instance.schedule
    if not 2 <= m <= ops.h_i.dim:
        raise ValueError(f"Tracked states must be between 2 and {ops.h_i.dim}, got {m}")
    if not tol > 0:
        raise ValueError("Tolerance must be positive")

    endpoint = _endpoint_spectrum(ops.h_p, m)
    endpoint_degenerate = bool(np.any(np.diff(endpoint) <= config.gap_eps))
    required_overlap = max(ACCEPT_OVERLAP, 1.0 - tol)

    state = eigensolve(ops.h_i, m, s=0.0)
    states: List[FlowState] = [state]
    log: List[StepRecord] = []
    step = min(config.initial_step, config.max_step)
    streak = 0
    attempts = 0

    def partial() -> FlowPath:
        return FlowPath(states=tuple(states), step_log=tuple(log), partial=True)

    while state.s < 1.0:
        attempts += 1
        if attempts > config.max_flow_steps:
            raise StepLimitExceeded(state.s, config.max_flow_steps, partial())
        s_next = min(1.0, state.s + step)
        landing = s_next == 1.0 and endpoint_degenerate

        try:
            d_e, d_v = flow_derivatives(state, ops.w, schedule.fprime(state.s), config.gap_eps)
        except GapCollapse as exc:
            if endpoint_degenerate and _merges_at_endpoint(state, exc, endpoint, config.gap_eps):
                logger.info("levels %d and %d merge at s=1; finishing from s=%.9g by direct eigensolve", exc.q, exc.l, state.s)
                corrected = _align_or_keep(state.eigenvectors, eigensolve(ops.h_p, m, s=1.0), align_phases)
                log.append(StepRecord(
                    s_from=state.s, s_to=1.0, step=1.0 - state.s, tracked=m, remainder=math.nan,
                    min_overlap=float(np.min(column_overlaps(state.eigenvectors, corrected.eigenvectors))),
                    permuted=_is_permuted(corrected), endpoint=True,
                ))
                states.append(corrected)
                state = corrected
                break
            exc.path = partial()
            raise

        h = s_next - state.s
        predicted_e = state.eigenvalues + h * d_e
        predicted_v = state.eigenvectors + h * d_v
        corrected = eigensolve(interpolate(ops.h_i, ops.h_p, schedule, s_next), m, s=s_next)

        accepted = False
        aligned = None
        if landing:
            aligned = _align_or_keep(predicted_v, corrected, align_phases)
        else:
            try:
                aligned = gauge_align(predicted_v, corrected, align_phases)
            except AmbiguousMatch as exc:
                logger.debug("rejecting step to s=%.9g: %s", s_next, exc)
        if aligned is not None:
            remainder = float(np.max(np.abs(aligned.eigenvalues - predicted_e)))
            overlap = float(np.min(column_overlaps(predicted_v, aligned.eigenvectors)))
            # Inside a degenerate endpoint subspace only the eigenvalues are meaningful.
            accepted = remainder <= tol and (landing or overlap >= required_overlap)

        if accepted:
            log.append(StepRecord(
                s_from=state.s, s_to=s_next, step=h, tracked=m, remainder=remainder,
                min_overlap=overlap, permuted=_is_permuted(aligned), endpoint=landing,
            ))
            states.append(aligned)
            state = aligned
            streak += 1
            if streak >= 2:
                step = min(step * GROWTH, config.max_step)
                streak = 0
        else:
            step /= 2.0
            streak = 0
            if step < config.min_step:
                raise StepSizeUnderflow(state.s, step, partial())

    logger.info("flow reached s=1 in %d accepted steps (%d attempts); E0(1)=%.9g", len(log), attempts, state.eigenvalues[0])
    return FlowPath(states=tuple(states), step_log=tuple(log))


def snap_verdict(e0_final: float) -> Tuple[int, bool]:
    """Nearest non-negative integer and whether E0 lies within 0.3 of it.

    H_P has integer eigenvalues, so moderate accuracy separates 0 from 1.
    """
    if not e0_final >= -0.5:
        raise ValueError(f"Final ground energy {e0_final} is below -0.5")
    snapped = max(0, math.floor(e0_final + 0.5))
    return snapped, abs(e0_final - snapped) < SNAP_ACCURACY


def hellmann_feynman_residuals(path: FlowPath, w: HermitianOperator, schedule) -> np.ndarray:
    """|dE0/ds - f'(s)<E0|W|E0>| at interior path points, slope by second-order differences."""
    s = path.s_values
    e0 = np.array([state.eigenvalues[0] for state in path.states])
    slope = np.gradient(e0, s)
    expected = np.array([
        schedule.fprime(state.s) * float(np.real(state.eigenvectors[:, 0].conj() @ w.entries @ state.eigenvectors[:, 0]))
        for state in path.states
    ])
    return np.abs(slope - expected)[1:-1]


def path_to_csv(path: FlowPath) -> str:
    m = path.states[0].tracked
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["s"] + [f"E_{q}" for q in range(m)] + ["gap_floor", "step", "N"])
    steps = [0.0] + [record.step for record in path.step_log]
    for state, step in zip(path.states, steps):
        writer.writerow([repr(state.s)] + [repr(float(e)) for e in state.eigenvalues] + [repr(state.gap_floor), repr(step), m])
    return buffer.getvalue()
