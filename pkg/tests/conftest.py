import numpy as np
import pytest

from epizootic import CenterSpec, EnvironmentGraph, ModelParams


# Food caps stay around 1 kg: the logistic birth rate scales with F, so
# an hourly Euler step is only well-behaved while F*S*dt/kappa < 1.

@pytest.fixture
def two_center_graph():
    return EnvironmentGraph(
        [CenterSpec(kappa=100.0, lam=0.08, xi=1.0, centroid=(0.0, 0.0)),
         CenterSpec(kappa=100.0, lam=0.08, xi=1.0, centroid=(10.0, 0.0))],
        edges=[(0, 1)])


@pytest.fixture
def three_chain_graph():
    return EnvironmentGraph(
        [CenterSpec(kappa=80.0, lam=0.06, xi=1.0, centroid=(0.0, 0.0)),
         CenterSpec(kappa=120.0, lam=0.09, xi=1.0, centroid=(10.0, 0.0)),
         CenterSpec(kappa=60.0, lam=0.045, xi=1.0, centroid=(20.0, 0.0))],
        edges=[(0, 1), (1, 2)])


@pytest.fixture
def quiet_params():
    """Rates scaled for smooth hourly dynamics (no Euler overshoot)."""
    return ModelParams(beta=2e-4, phi=5.9e-3, gamma=9.9e-4,
                       nu_s=1.4e-5, nu_e=1.4e-5, nu_i=1.4e-5,
                       m_s=0.5, m_e=0.5, m_i=0.5,
                       c_s=1e-3, c_e=1e-3, c_i=1e-3,
                       rho_s=0.2, rho_e=0.2, rho_i=0.2)
