"""Truncated Fock-space operators.

All operators are compressions of the infinite-dimensional ones onto the
states with n_i <= d_i. Mode 1 is the most significant (leftmost) Kronecker
factor, matching BasisMap's lexicographic numbering.
"""
import functools
import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from sympy import prime

from diophantine import squared_value_as_double
from models import BasisMap, HermitianOperator, MultiIndex, Polynomial, ProblemInstance, WaveFunction
from schedules import Schedule, get_schedule

logger = logging.getLogger(__name__)

TAIL_WARNING = 1e-6
DEFAULT_ALPHA = 1.0 + 0.0j
DEGENERATE_GAP = 1e-9


@dataclass(frozen=True, eq=False)
class OperatorSet:
    h_i: HermitianOperator
    h_p: HermitianOperator
    w: HermitianOperator


def annihilation_matrix(d: int) -> np.ndarray:
    """a|n> = sqrt(n)|n-1> on occupations 0..d."""
    if d < 1:
        raise ValueError("Mode cutoff must be at least 1")
    return np.diagflat(np.sqrt(np.arange(1, d + 1, dtype=np.float64)), 1).astype(np.complex128)


def creation_matrix(d: int) -> np.ndarray:
    return annihilation_matrix(d).conj().T


def number_matrix(d: int) -> np.ndarray:
    return np.diagflat(np.arange(d + 1, dtype=np.float64)).astype(np.complex128)


def lift(single: np.ndarray, mode: int, basis: BasisMap) -> np.ndarray:
    """Embed a single-mode matrix as I x ... x single x ... x I."""
    result = np.ones((1, 1), dtype=np.complex128)
    for i, d in enumerate(basis.cutoffs):
        factor = single if i == mode else np.eye(d + 1, dtype=np.complex128)
        result = np.kron(result, factor)
    return result


def choose_lambdas(k: int) -> Tuple[float, ...]:
    """sqrt of the first k primes.

    Square roots of distinct primes are linearly independent over the
    rationals, so sum(lambda_i * n_i) never repeats and H_I is
    non-degenerate. Overrides are accepted elsewhere, but then the caller
    owns that guarantee.
    """
    if k < 1:
        raise ValueError("Need at least one mode")
    return tuple(math.sqrt(int(prime(i))) for i in range(1, k + 1))


def min_initial_gap(lambdas: Sequence[float], cutoffs: Sequence[int]) -> float:
    """Smallest pairwise distance among the spectrum sum(lambda_i n_i) of H_I."""
    grids = np.meshgrid(*(np.arange(d + 1) for d in cutoffs), indexing="ij")
    values = np.sort(sum(lam * g for lam, g in zip(lambdas, grids)).ravel())
    return float(np.min(np.diff(values))) if values.size > 1 else math.inf


def build_hp(p: Polynomial, basis: BasisMap) -> HermitianOperator:
    """Diagonal D(n)^2 over the Fock basis, evaluated exactly then converted."""
    if p.num_vars != basis.modes:
        raise ValueError(f"Polynomial has {p.num_vars} variables but basis has {basis.modes} modes")
    diagonal = np.array([squared_value_as_double(p, n) for n in basis.states()], dtype=np.float64)
    return HermitianOperator(dim=basis.dim, entries=np.diag(diagonal).astype(np.complex128), cutoffs=basis.cutoffs)


def single_mode_hi(lam: float, alpha: complex, d: int) -> np.ndarray:
    """lambda (n - alpha a^dagger - alpha^* a + |alpha|^2), tridiagonal."""
    a = annihilation_matrix(d)
    a_dag = a.conj().T
    identity = np.eye(d + 1, dtype=np.complex128)
    return lam * (number_matrix(d) - alpha * a_dag - np.conj(alpha) * a + abs(alpha) ** 2 * identity)


def build_hi(instance: ProblemInstance) -> HermitianOperator:
    basis = instance.basis
    entries = np.zeros((basis.dim, basis.dim), dtype=np.complex128)
    for mode, (lam, alpha, d) in enumerate(zip(instance.lambdas, instance.alphas, basis.cutoffs)):
        entries += lift(single_mode_hi(lam, alpha, d), mode, basis)
    return HermitianOperator(dim=basis.dim, entries=entries, cutoffs=basis.cutoffs)


def coherent_amplitudes(alpha: complex, d: int) -> np.ndarray:
    amplitudes = np.empty(d + 1, dtype=np.complex128)
    amplitudes[0] = math.exp(-abs(alpha) ** 2 / 2)
    for n in range(1, d + 1):
        amplitudes[n] = amplitudes[n - 1] * alpha / math.sqrt(n)
    return amplitudes


def tail_mass(alpha: complex, d: int) -> float:
    """Coherent-state probability discarded by truncating at occupation d."""
    return max(0.0, 1.0 - float(np.sum(np.abs(coherent_amplitudes(alpha, d)) ** 2)))


def coherent_state(alphas: Sequence[complex], basis: BasisMap) -> WaveFunction:
    if len(alphas) != basis.modes:
        raise ValueError(f"Need {basis.modes} coherent amplitudes, got {len(alphas)}")
    vector = np.ones(1, dtype=np.complex128)
    for mode, (alpha, d) in enumerate(zip(alphas, basis.cutoffs), 1):
        lost = tail_mass(alpha, d)
        if lost > TAIL_WARNING:
            logger.warning(
                "coherent state of mode %d (alpha=%s) loses %.2e probability at cutoff %d; raise the cutoff",
                mode, alpha, lost, d,
            )
        vector = np.kron(vector, coherent_amplitudes(alpha, d))
    return WaveFunction(amplitudes=vector / np.linalg.norm(vector), basis=basis)


def interpolate(h_i: HermitianOperator, h_p: HermitianOperator, schedule: Schedule, s: float) -> HermitianOperator:
    """H(s) = H_I + f(s) (H_P - H_I); exact operands at the endpoints."""
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"Interpolation parameter s={s} outside [0, 1]")
    if h_i.dim != h_p.dim:
        raise ValueError("Operators have different dimensions")
    weight = schedule.f(s)
    if weight == 0.0:
        return h_i
    if weight == 1.0:
        return h_p
    return HermitianOperator(dim=h_i.dim, entries=interpolated_entries(h_i.entries, h_p.entries, weight), cutoffs=h_i.cutoffs)


def interpolated_entries(h_i: np.ndarray, h_p: np.ndarray, weight: float) -> np.ndarray:
    return h_i + weight * (h_p - h_i)


def build_instance(
    p: Polynomial,
    cutoffs: Sequence[int],
    alphas: Optional[Sequence[complex]] = None,
    lambdas: Optional[Sequence[float]] = None,
    schedule: str = "linear",
) -> ProblemInstance:
    basis = BasisMap(cutoffs=tuple(int(d) for d in cutoffs))
    if basis.modes != p.num_vars:
        raise ValueError(f"Got {basis.modes} cutoffs for a polynomial in {p.num_vars} variables")
    if lambdas is not None and len(lambdas) == basis.modes:
        gap = min_initial_gap(lambdas, basis.cutoffs)
        if gap <= DEGENERATE_GAP:
            logger.warning(
                "lambdas %s give a degenerate H_I spectrum (smallest gap %.3g); the flow cannot start", tuple(lambdas), gap
            )
    return ProblemInstance(
        polynomial=p,
        basis=basis,
        lambdas=tuple(float(x) for x in lambdas) if lambdas is not None else choose_lambdas(p.num_vars),
        alphas=tuple(complex(a) for a in alphas) if alphas is not None else (DEFAULT_ALPHA,) * p.num_vars,
        schedule=get_schedule(schedule),
    )


@functools.lru_cache(maxsize=32)
def operators(instance: ProblemInstance) -> OperatorSet:
    h_i = build_hi(instance)
    h_p = build_hp(instance.polynomial, instance.basis)
    w = HermitianOperator(dim=h_i.dim, entries=h_p.entries - h_i.entries, cutoffs=h_i.cutoffs)
    return OperatorSet(h_i=h_i, h_p=h_p, w=w)


def ground_candidate(instance: ProblemInstance) -> MultiIndex:
    """First Fock state minimizing the H_P diagonal."""
    diagonal = operators(instance).h_p.entries.diagonal().real
    return instance.basis.unflat(int(np.argmin(diagonal)))
