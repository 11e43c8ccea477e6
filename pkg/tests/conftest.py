import numpy as np
import pytest

from tbcontrol import Parameters


def draw_parameters(rng: np.random.Generator) -> Parameters:
    """One random valid parameter set over broad in-contract ranges."""
    return Parameters(
        beta=rng.uniform(10.0, 300.0),
        mu=rng.uniform(0.005, 0.1),
        delta=rng.uniform(0.5, 20.0),
        phi=rng.uniform(0.0, 1.0),
        omega=rng.uniform(0.0, 0.01),
        omega_r=rng.uniform(0.0, 0.001),
        sigma=rng.uniform(0.0, 1.0),
        sigma_r=rng.uniform(0.0, 1.0),
        tau0=rng.uniform(0.0, 5.0),
        tau1=rng.uniform(0.0, 5.0),
        tau2=rng.uniform(0.0, 5.0),
        eps1=rng.uniform(0.01, 0.99),
        eps2=rng.uniform(0.01, 0.99),
        n_total=rng.uniform(1e3, 1e6),
    )


@pytest.fixture
def draw_params():
    return draw_parameters
