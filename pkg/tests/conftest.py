import numpy as np
import pytest

from frontsim import IntervalSet, Parameters, Profile
from frontsim.weak import run_weak


@pytest.fixture(scope="session")
def pstar():
    return Parameters(g1=1.0, g2=1.0, g3=3.0, g4=1.0, a=1.0, b=2.0)


def expanding_setup(p):
    return IntervalSet((-1.0, 1.0)), Profile.constant(0.0, (-16.0, 16.0))


def shrinking_setup(p):
    return IntervalSet((-1.0, 1.0)), Profile.constant(1.0, (-16.0, 16.0))


def merge_setup(p):
    return IntervalSet((-3.0, -1.0, 1.0, 3.0)), Profile.constant(0.0, (-16.0, 16.0))


@pytest.fixture(scope="session")
def expanding_run(pstar):
    omega, v0 = expanding_setup(pstar)
    return run_weak(pstar, omega, v0, 2.0)


@pytest.fixture(scope="session")
def shrinking_run(pstar):
    omega, v0 = shrinking_setup(pstar)
    return run_weak(pstar, omega, v0, 2.0)


@pytest.fixture(scope="session")
def merge_run(pstar):
    omega, v0 = merge_setup(pstar)
    return run_weak(pstar, omega, v0, 3.0)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
