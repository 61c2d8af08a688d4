import numpy as np
import pytest

from softid import presets


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240)


@pytest.fixture(scope="session")
def rigid_2r():
    return presets.rigid_2r_chain()


@pytest.fixture(scope="session")
def pcc2():
    return presets.pcc_chain(2)


@pytest.fixture(scope="session")
def pcs2():
    return presets.pcs_chain(2)


@pytest.fixture(scope="session")
def pac1():
    return presets.pac_chain(1)


@pytest.fixture(scope="session")
def pgc2():
    return presets.pgc_chain(2)


@pytest.fixture(scope="session")
def lvp1():
    return presets.lvp_chain()


def sample_state(rng, n, q_range=np.pi, qd_range=10.0, qdd_range=100.0):
    return (
        rng.uniform(-q_range, q_range, n),
        rng.uniform(-qd_range, qd_range, n),
        rng.uniform(-qdd_range, qdd_range, n),
    )
