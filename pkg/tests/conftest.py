import math
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from cornerpencil import builtin_problem, discretize

PROBLEMS = Path(__file__).parents[1] / "problems"


@pytest.fixture(scope="session")
def periodic64():
    p = builtin_problem("periodic_laplace")
    return p, discretize(p, 64)


@pytest.fixture(scope="session")
def dirichlet_pi64():
    p = builtin_problem("dirichlet_laplace", {"d": math.pi})
    return p, discretize(p, 64)


@pytest.fixture(scope="session")
def ex21_64():
    p = builtin_problem("ex21_sector",
                        {"d": math.pi / 2, "alpha1": 0.5, "alpha2": 0.5})
    return p, discretize(p, 64)


@pytest.fixture(scope="session")
def problems_dir():
    return PROBLEMS
