"""Bundled desk-scale instances with their known answers."""
from dataclasses import dataclass
from typing import Optional, Tuple

from models import MultiIndex, VerdictStatus


@dataclass(frozen=True)
class Fixture:
    name: str
    polynomial: str
    cutoffs: MultiIndex
    expected_status: VerdictStatus
    expected_minimum: int
    expected_witness: Optional[MultiIndex] = None
    boundary: bool = False


FIXTURES: Tuple[Fixture, ...] = (
    Fixture("shifted-linear", "x1 - 1", (8,), VerdictStatus.SOLVABLE, 0, (1,)),
    Fixture("square-no-root", "(x1 + 1)^2", (8,), VerdictStatus.NO_SOLUTION, 1),
    Fixture("pythagorean-25", "x1^2 + x2^2 - 25", (6, 6), VerdictStatus.SOLVABLE, 0, (3, 4)),
    Fixture("root-outside-box", "x1 - 3", (2,), VerdictStatus.NO_SOLUTION, 1, boundary=True),
    Fixture("root-inside-box", "x1 - 3", (4,), VerdictStatus.SOLVABLE, 0, (3,)),
    Fixture("constant", "1", (8,), VerdictStatus.NO_SOLUTION, 1),
)


def get_fixture(name: str) -> Fixture:
    for fixture in FIXTURES:
        if fixture.name == name:
            return fixture
    raise ValueError(f"Unknown fixture {name!r}")
