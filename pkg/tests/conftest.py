import os
import sys

import pytest

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from diophantine import parse
from fock import build_instance
from models import DecisionConfig, SolverConfig


@pytest.fixture
def linear_instance():
    """D = x1 - 1 at cutoff 8: solvable, ground state (1)."""
    return build_instance(parse("x1 - 1"), (8,))


@pytest.fixture
def square_instance():
    """D = (x1 + 1)^2 at cutoff 8: unsolvable, minimum 1 at (0)."""
    return build_instance(parse("(x1 + 1)^2"), (8,))


@pytest.fixture
def quick_config():
    """Loose settings for orchestration tests that only check the verdict."""
    return DecisionConfig(solver=SolverConfig(flow_tol=1e-3, max_flow_steps=5000, max_rounds=4, min_steps=200))
