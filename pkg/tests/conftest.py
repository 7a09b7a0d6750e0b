import numpy as np
import pytest

from quakesim import ExponentialPhi, ExponentialZ, ModelParams, State


@pytest.fixture
def ref_params() -> ModelParams:
    """Reference configuration used throughout: c=1, E[Z]=2, k=0.5, alpha=1,
    exponential primary hazard with unit scale.  Subcritical with stationary
    rate 0.5 and aftershock share 0.5."""
    return ModelParams(c=1.0, k=0.5, alpha=1.0, phi=ExponentialPhi(1.0), z=ExponentialZ(2.0))


@pytest.fixture
def origin() -> State:
    return State(0.0, 0.0)


def rng_for(label: int) -> np.random.Generator:
    return np.random.default_rng(label)
