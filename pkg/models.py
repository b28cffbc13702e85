import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

MultiIndex = Tuple[int, ...]
Monomial = Tuple[int, MultiIndex]

HERMITIAN_ATOL = 1e-12
ORTHONORMAL_ATOL = 1e-10
NORM_ATOL = 1e-10


def _frozen_array(values: Any, dtype: Any) -> np.ndarray:
    array = np.array(values, dtype=dtype, copy=True)
    array.setflags(write=False)
    return array


def graded_lex_key(exponents: MultiIndex) -> Tuple[int, MultiIndex]:
    """Sort key putting higher total degree first, then larger exponent tuples."""
    return (-sum(exponents), tuple(-e for e in exponents))


@dataclass(frozen=True)
class Polynomial:
    num_vars: int
    monomials: Tuple[Monomial, ...]

    def __post_init__(self):
        if self.num_vars < 1:
            raise ValueError("Polynomial needs at least one variable")
        seen = set()
        for coefficient, exponents in self.monomials:
            if coefficient == 0:
                raise ValueError("Monomial coefficients must be non-zero")
            if len(exponents) != self.num_vars:
                raise ValueError(f"Exponent tuple {exponents} does not have {self.num_vars} entries")
            if any(e < 0 for e in exponents):
                raise ValueError("Exponents must be non-negative")
            if exponents in seen:
                raise ValueError(f"Duplicate monomial {exponents}; polynomial is not collected")
            seen.add(exponents)

    @classmethod
    def from_terms(cls, num_vars: int, terms: Dict[MultiIndex, int]) -> "Polynomial":
        collected = [(c, e) for e, c in terms.items() if c != 0]
        collected.sort(key=lambda m: graded_lex_key(m[1]))
        return cls(num_vars=num_vars, monomials=tuple(collected))

    @property
    def degree(self) -> int:
        return max((sum(e) for _, e in self.monomials), default=0)

    def terms(self) -> Dict[MultiIndex, int]:
        return {e: c for c, e in self.monomials}


@dataclass(frozen=True)
class LatticeBox:
    lower: MultiIndex
    upper: MultiIndex

    def __post_init__(self):
        if len(self.lower) != len(self.upper):
            raise ValueError("Box bounds must have the same length")
        if not self.upper:
            raise ValueError("Box must have at least one dimension")
        for lo, hi in zip(self.lower, self.upper):
            if lo < 0 or hi < 0:
                raise ValueError("Box bounds must be non-negative")
            if lo > hi:
                raise ValueError(f"Box lower bound {lo} exceeds upper bound {hi}")

    @property
    def dims(self) -> int:
        return len(self.upper)

    @property
    def volume(self) -> int:
        return math.prod(hi - lo + 1 for lo, hi in zip(self.lower, self.upper))


@dataclass(frozen=True)
class BasisMap:
    """Lexicographic (C-order) numbering of the truncated Fock states."""

    cutoffs: MultiIndex
    dim: int = field(init=False)

    def __post_init__(self):
        if not self.cutoffs:
            raise ValueError("Basis needs at least one mode")
        if any(d < 1 for d in self.cutoffs):
            raise ValueError("Mode cutoffs must be positive")
        object.__setattr__(self, "dim", math.prod(d + 1 for d in self.cutoffs))

    @property
    def modes(self) -> int:
        return len(self.cutoffs)

    @property
    def shape(self) -> MultiIndex:
        return tuple(d + 1 for d in self.cutoffs)

    def flat(self, index: MultiIndex) -> int:
        if len(index) != self.modes:
            raise ValueError(f"Multi-index {index} does not have {self.modes} modes")
        return int(np.ravel_multi_index(tuple(index), self.shape))

    def unflat(self, position: int) -> MultiIndex:
        if not 0 <= position < self.dim:
            raise ValueError(f"Basis position {position} outside [0, {self.dim})")
        return tuple(int(n) for n in np.unravel_index(position, self.shape))

    def states(self) -> List[MultiIndex]:
        return [self.unflat(j) for j in range(self.dim)]


@dataclass(frozen=True, eq=False)
class HermitianOperator:
    dim: int
    entries: np.ndarray
    cutoffs: Optional[MultiIndex] = None

    def __post_init__(self):
        entries = _frozen_array(self.entries, np.complex128)
        if entries.shape != (self.dim, self.dim):
            raise ValueError(f"Operator entries have shape {entries.shape}, expected ({self.dim}, {self.dim})")
        if not np.all(np.isfinite(entries)):
            raise ValueError("Operator entries must be finite")
        defect = np.max(np.abs(entries - entries.conj().T)) if self.dim else 0.0
        if defect > HERMITIAN_ATOL:
            raise ValueError(f"Operator is not Hermitian (defect {defect:.3e})")
        object.__setattr__(self, "entries", entries)


@dataclass(frozen=True)
class ProblemInstance:
    polynomial: Polynomial
    basis: BasisMap
    lambdas: Tuple[float, ...]
    alphas: Tuple[complex, ...]
    schedule: Any

    def __post_init__(self):
        from schedules import validate_schedule

        modes = self.basis.modes
        if self.polynomial.num_vars != modes:
            raise ValueError(f"Polynomial has {self.polynomial.num_vars} variables but basis has {modes} modes")
        if len(self.lambdas) != modes or len(self.alphas) != modes:
            raise ValueError("One lambda and one alpha per mode are required")
        if any(not lam > 0 for lam in self.lambdas):
            raise ValueError("Lambdas must be strictly positive")
        validate_schedule(self.schedule)


@dataclass(frozen=True, eq=False)
class WaveFunction:
    amplitudes: np.ndarray
    basis: BasisMap

    def __post_init__(self):
        amplitudes = _frozen_array(self.amplitudes, np.complex128)
        if amplitudes.shape != (self.basis.dim,):
            raise ValueError(f"Amplitude vector has shape {amplitudes.shape}, basis dimension is {self.basis.dim}")
        norm = float(np.linalg.norm(amplitudes))
        if abs(norm - 1.0) > NORM_ATOL:
            raise ValueError(f"Wave function norm {norm!r} differs from 1")
        object.__setattr__(self, "amplitudes", amplitudes)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


@dataclass(frozen=True, eq=False)
class FlowState:
    s: float
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    gap_floor: float

    def __post_init__(self):
        if not 0.0 <= self.s <= 1.0:
            raise ValueError(f"Flow parameter s={self.s} outside [0, 1]")
        eigenvalues = _frozen_array(self.eigenvalues, np.float64)
        eigenvectors = _frozen_array(self.eigenvectors, np.complex128)
        if eigenvectors.ndim != 2 or eigenvectors.shape[1] != eigenvalues.shape[0]:
            raise ValueError("Eigenvector matrix must have one column per tracked eigenvalue")
        gram = eigenvectors.conj().T @ eigenvectors
        defect = np.max(np.abs(gram - np.eye(gram.shape[0])))
        if defect > ORTHONORMAL_ATOL:
            raise ValueError(f"Tracked eigenvectors are not orthonormal (defect {defect:.3e})")
        object.__setattr__(self, "eigenvalues", eigenvalues)
        object.__setattr__(self, "eigenvectors", eigenvectors)

    @property
    def tracked(self) -> int:
        return int(self.eigenvalues.shape[0])

    def residuals(self, operator: HermitianOperator) -> np.ndarray:
        """Column norms of H v_q - E_q v_q."""
        product = operator.entries @ self.eigenvectors - self.eigenvectors * self.eigenvalues
        return np.linalg.norm(product, axis=0)


@dataclass(frozen=True)
class StepRecord:
    s_from: float
    s_to: float
    step: float
    tracked: int
    remainder: float
    min_overlap: float
    permuted: bool = False
    endpoint: bool = False


@dataclass(frozen=True, eq=False)
class FlowPath:
    states: Tuple[FlowState, ...]
    step_log: Tuple[StepRecord, ...]
    partial: bool = False

    def __post_init__(self):
        if not self.states:
            raise ValueError("Flow path has no states")
        if self.states[0].s != 0.0:
            raise ValueError("Flow path must start at s=0")
        for before, after in zip(self.states, self.states[1:]):
            if not after.s > before.s:
                raise ValueError("Flow path parameters must be strictly increasing")
        if not self.partial and self.states[-1].s != 1.0:
            raise ValueError("Complete flow path must end at s=1")

    @property
    def s_values(self) -> np.ndarray:
        return np.array([state.s for state in self.states])

    @property
    def final(self) -> FlowState:
        return self.states[-1]


@dataclass(frozen=True, eq=False)
class EvolutionReport:
    tau: float
    final_state: WaveFunction
    norm_drift: float
    steps: int
    top_occupations: Tuple[Tuple[MultiIndex, float], ...]
    max_step_defect: float = 0.0
    samples: Tuple[Tuple[float, float, float], ...] = ()
    warnings: Tuple[str, ...] = ()

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError("Evolution duration must be positive")
        total = 0.0
        for _, probability in self.top_occupations:
            if not 0.0 <= probability <= 1.0 + NORM_ATOL:
                raise ValueError(f"Occupation probability {probability} outside [0, 1]")
            total += probability
        if total > 1.0 + NORM_ATOL:
            raise ValueError(f"Occupation probabilities sum to {total} > 1")


class VerdictStatus(str, Enum):
    SOLVABLE = "SolvableWithWitness"
    NO_SOLUTION = "NoSolutionWithinBox"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class Verdict:
    status: VerdictStatus
    witness: Optional[MultiIndex]
    e0_flow: Optional[float]
    e0_oracle: int
    dynamics_identified: Optional[MultiIndex]
    cutoffs: MultiIndex
    diagnostics: Tuple[str, ...] = ()

    def __post_init__(self):
        if self.e0_oracle < 0:
            raise ValueError("Oracle minimum of D^2 cannot be negative")
        if (self.status == VerdictStatus.SOLVABLE) != (self.witness is not None):
            raise ValueError("A witness is present exactly when the verdict is solvable")
        if (self.e0_oracle == 0) != (self.status == VerdictStatus.SOLVABLE):
            raise ValueError("Oracle minimum 0 means a witness exists in the box")
        if self.status == VerdictStatus.NO_SOLUTION and self.e0_oracle < 1:
            raise ValueError("No-solution verdict requires an oracle minimum of at least 1")


@dataclass(frozen=True)
class StudyRung:
    cutoffs: MultiIndex
    status: VerdictStatus
    e0_flow: Optional[float]
    e0_oracle: int
    interior_minimum: bool
    diagnostics: Tuple[str, ...] = ()


@dataclass(frozen=True)
class StudyReport:
    rungs: Tuple[StudyRung, ...]
    verdict_stable: bool
    e0_oracle_stable: bool
    flips: Tuple[int, ...]
    left_boundary: bool


@dataclass(frozen=True)
class SolverConfig:
    gap_eps: float = 1e-6
    flow_tol: float = 1e-6
    tracked_states: int = 6
    initial_step: float = 1e-3
    max_step: float = 0.05
    min_step: float = 1e-9
    max_flow_steps: int = 200_000
    tau0: float = 1.0
    growth: float = 2.0
    max_rounds: int = 16
    steps_per_tau: float = 200.0
    min_steps: int = 1000
    top_k: int = 8
    enumeration_cap: int = 1_000_000
    workers: int = 1

    def __post_init__(self):
        for name in ("gap_eps", "flow_tol", "initial_step", "max_step", "min_step", "tau0", "steps_per_tau"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.tracked_states < 2:
            raise ValueError("At least the ground and first excited state must be tracked")
        if self.growth <= 1.0:
            raise ValueError("Sweep growth factor must exceed 1")
        if self.max_rounds < 0:
            raise ValueError("max_rounds cannot be negative")
        for name in ("max_flow_steps", "min_steps", "top_k", "enumeration_cap", "workers"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1")


@dataclass(frozen=True)
class DecisionConfig:
    alphas: Optional[Tuple[complex, ...]] = None
    lambdas: Optional[Tuple[float, ...]] = None
    schedule: str = "linear"
    solver: SolverConfig = field(default_factory=SolverConfig)

    def __post_init__(self):
        if self.lambdas is not None and any(not lam > 0 for lam in self.lambdas):
            raise ValueError("Lambdas must be strictly positive")


@dataclass(frozen=True)
class RunConfig:
    command: str
    poly: str
    cutoffs: Optional[MultiIndex] = None
    out: Optional[str] = None
    trace: Optional[str] = None
    dump: Optional[str] = None
    tau: float = 10.0
    steps: Optional[int] = None
    ladder: Tuple[MultiIndex, ...] = ()
    decision: DecisionConfig = field(default_factory=DecisionConfig)

    def __post_init__(self):
        if not self.poly.strip():
            raise ValueError("Polynomial text cannot be empty")
        if self.cutoffs is not None and any(d < 1 for d in self.cutoffs):
            raise ValueError("Cutoffs must be positive")
        if not self.tau > 0:
            raise ValueError("tau must be positive")
        if self.steps is not None and self.steps < 1:
            raise ValueError("steps must be positive")
