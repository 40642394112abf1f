import os

import hypothesis
import numpy as np
import pytest

from adq.CliIo.Fixtures import Fixtures
from adq.Config import Budgets
from adq.ConvexCore.ConvexCore import ConvexCore
from adq.Functionals.Functionals import Functionals
from adq.Grassmann.Grassmann import Grassmann
from adq.Solver.MinkowskiSolver import MinkowskiSolver
from adq.Transforms.Transforms import Transforms

np.seterr(all="warn")

hypothesis.settings.register_profile("fast", max_examples=5, deadline=None)
hypothesis.settings.register_profile("ci", max_examples=25, deadline=None)
hypothesis.settings.register_profile("debugger", report_multiple_bugs=False, deadline=None)
hypothesis.settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "fast"))


@pytest.fixture
def budgets():
    return Budgets()


@pytest.fixture
def fixtures():
    return Fixtures()


@pytest.fixture
def core():
    return ConvexCore()


@pytest.fixture
def grassmann():
    return Grassmann()


@pytest.fixture
def transforms():
    return Transforms()


@pytest.fixture
def functionals(budgets):
    return Functionals(budgets=budgets)


@pytest.fixture
def solver(functionals):
    return MinkowskiSolver(functionals)


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)
