from typing import Dict, List, Protocol, runtime_checkable

import numpy as np

GRID_POINTS = 1001
DERIVATIVE_ATOL = 1e-6
DIFF_STEP = 1e-5


@runtime_checkable
class Schedule(Protocol):
    name: str

    def f(self, s: float) -> float:
        ...

    def fprime(self, s: float) -> float:
        ...


class LinearSchedule:
    name = "linear"

    def f(self, s: float) -> float:
        return s

    def fprime(self, s: float) -> float:
        return 1.0


class SmoothstepSchedule:
    """3s^2 - 2s^3: zero slope at both ends."""

    name = "smooth"

    def f(self, s: float) -> float:
        if s == 0.0 or s == 1.0:
            return s
        return s * s * (3.0 - 2.0 * s)

    def fprime(self, s: float) -> float:
        return 6.0 * s * (1.0 - s)


def validate_schedule(schedule: Schedule) -> None:
    if not isinstance(schedule, Schedule):
        raise ValueError(f"{schedule!r} does not provide f and fprime")
    if schedule.f(0.0) != 0.0 or schedule.f(1.0) != 1.0:
        raise ValueError(f"Schedule {schedule.name!r} must satisfy f(0)=0 and f(1)=1 exactly")
    grid = np.linspace(0.0, 1.0, GRID_POINTS)
    values = np.array([schedule.f(s) for s in grid])
    if np.any(np.diff(values) < 0):
        raise ValueError(f"Schedule {schedule.name!r} is not monotonically non-decreasing")
    interior = grid[1:-1]
    central = np.array([(schedule.f(s + DIFF_STEP) - schedule.f(s - DIFF_STEP)) / (2 * DIFF_STEP) for s in interior])
    slopes = np.array([schedule.fprime(s) for s in interior])
    worst = float(np.max(np.abs(central - slopes)))
    if worst > DERIVATIVE_ATOL:
        raise ValueError(f"Schedule {schedule.name!r} derivative disagrees with finite differences by {worst:.3e}")


class ScheduleRegistry:
    def __init__(self):
        self.schedules: Dict[str, Schedule] = {}

    def register(self, schedule: Schedule):
        validate_schedule(schedule)
        self.schedules[schedule.name] = schedule

    def get(self, name: str) -> Schedule:
        if name not in self.schedules:
            raise ValueError(f"Unknown schedule {name!r}; choose from {', '.join(self.names())}")
        return self.schedules[name]

    def names(self) -> List[str]:
        return sorted(self.schedules)


registry = ScheduleRegistry()
registry.register(LinearSchedule())
registry.register(SmoothstepSchedule())


def get_schedule(name: str) -> Schedule:
    return registry.get(name)
