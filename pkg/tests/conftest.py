import pytest

from models.specs import CavitySpec, DriveProfile, DriveTarget, InitialState, MechanicalSpec
from models.system import make_system
from oracle.fock_space import Truncation

L0 = 10e-6


@pytest.fixture
def tol():
    return 1e-10


@pytest.fixture
def cavity():
    return CavitySpec(length=L0, num_modes=16)


@pytest.fixture
def make_cfg(cavity):
    """Factory for degenerate-resonance systems (omega = 2 omega_1) in a 10 um cavity"""

    def factory(epsilon=1e-3, omega_tilde=2.0, drives=(), cavity_spec=None, **state):
        spec = cavity_spec or cavity
        mech = MechanicalSpec.from_epsilon(omega_tilde * spec.fundamental_frequency, epsilon, spec.length)
        return make_system(spec, mech, InitialState(**state), drives)

    return factory


@pytest.fixture
def cfg(make_cfg):
    return make_cfg(beta_mag=1.0)


@pytest.fixture
def wall_drive(cavity):
    def factory(g, ramp=50.0, omega_tilde=2.0):
        omega = omega_tilde * cavity.fundamental_frequency
        return DriveProfile(target=DriveTarget.MECHANICAL, g=g, Omega=ramp * omega)

    return factory


@pytest.fixture
def small_truncation():
    return Truncation(modes_used=(1, 2), n_max=4, m_max=10)
