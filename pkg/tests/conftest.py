import json
from importlib import resources

import numpy as np
import pytest

from rnscope.costmodel import builtin_machine
from rnscope.instrument import counters
from rnscope.params import ParameterSet, generate_parameter_set


@pytest.fixture(autouse=True)
def _reset_counters():
    counters.reset()
    yield


def _load_params(name: str) -> ParameterSet:
    text = resources.files("rnscope").joinpath(f"data/params/{name}.json").read_text()
    return ParameterSet.from_dict(json.loads(text))


@pytest.fixture(scope="session")
def verify_params() -> ParameterSet:
    """N=2^12, L=12, dnum=3, alpha=4, delta=2^40 verification profile."""
    return _load_params("verify_small")


@pytest.fixture(scope="session")
def ks_params() -> dict[int, ParameterSet]:
    """The (L, alpha, beta) = (48,12,4), (24,12,2), (12,12,1) shapes at N=2^16."""
    return {l: _load_params(f"ks{l}") for l in (48, 24, 12)}


@pytest.fixture(scope="session")
def tiny_params() -> ParameterSet:
    """N=64 profile for wide-integer oracle checks that need full CRT lifts."""
    return generate_parameter_set(
        n=64, l=6, dnum=3, delta=1 << 25, h_dense=8, h_sparse=4
    )


@pytest.fixture(scope="session")
def machine_5090():
    return builtin_machine("rtx5090")


@pytest.fixture()
def rng() -> np.random.Generator:
    return np.random.default_rng(20240831)
