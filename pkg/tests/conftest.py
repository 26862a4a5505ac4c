"""Shared fixtures: small simulated chips, built codes and enrollment records."""

import numpy as np
import pytest

from pufkit.bch import build_code
from pufkit.enrollment import EnrollmentPlan, enroll
from pufkit.puf import Condition, PopulationParams, sample_chip, simulate_dataset

CONDITIONS = (
    Condition(-15, "-15C"),
    Condition(25, "25C"),
    Condition(80, "80C"),
)


@pytest.fixture(scope="session")
def params():
    return PopulationParams()


@pytest.fixture(scope="session")
def small_chip(params):
    return sample_chip(4096, params, seed=1)


@pytest.fixture(scope="session")
def small_dataset(small_chip):
    return simulate_dataset(small_chip, CONDITIONS, repeats=20, seed=1, chip_id="chip01")


@pytest.fixture(scope="session")
def code_15():
    return build_code(15, 7, 2)


@pytest.fixture(scope="session")
def code_63():
    return build_code(63, 16, 11)


@pytest.fixture(scope="session")
def code_127():
    return build_code(127, 15, 27)


@pytest.fixture(scope="session")
def single_record(small_dataset):
    return enroll(small_dataset, EnrollmentPlan("25C"))


@pytest.fixture(scope="session")
def mrr_record(small_dataset):
    return enroll(small_dataset, EnrollmentPlan("25C", ("-15C", "80C")))


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
