import numpy as np
import pytest

from clasp.config import PhysicsConfig
from clasp.sim import OrthoCamera, Scene, build_template, instantiate_cloth


@pytest.fixture(scope="session")
def towel_fine():
    return build_template("towel", 0.0125)


@pytest.fixture(scope="session")
def towel():
    return build_template("towel", 0.025)


@pytest.fixture
def flat_towel(towel):
    return instantiate_cloth(towel)


@pytest.fixture
def camera():
    return OrthoCamera()


@pytest.fixture
def scene():
    return Scene()


@pytest.fixture
def physics():
    return PhysicsConfig()


def free_particles(positions, z=0.0):
    """Cloth state with no springs, for single-particle integrator checks."""
    from clasp.sim.state import ClothState

    pos = np.asarray(positions, dtype=float)
    if pos.ndim == 1:
        pos = pos[None, :]
    return ClothState(
        positions=pos,
        velocities=np.zeros_like(pos),
        spring_i=np.zeros(0, dtype=np.int64),
        spring_j=np.zeros(0, dtype=np.int64),
        spring_rest=np.zeros(0),
        spring_k=np.zeros(0),
        spring_kind=np.zeros(0, dtype=np.int64),
    )
