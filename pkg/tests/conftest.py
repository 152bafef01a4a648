import pytest

from coneflow.flow import run

from util import cosine_config, sphere_config


@pytest.fixture(scope="session")
def cosine_traj():
    """Converged perturbed-cap run shared by the monitor tests."""
    return run(cosine_config())


@pytest.fixture(scope="session")
def sphere_traj():
    """Round-sphere run (alpha=1) integrated to t=2 without early exit."""
    return run(sphere_config(alpha=1.0, t_max=2.0))


@pytest.fixture(scope="session")
def area_traj():
    """Cosine run with equally spaced t output for the identity checks."""
    return run(cosine_config(s_max=None, t_max=1.0, conv_tol=0.0,
                             cadence_t=0.01))
