import os

import pytest

from saem import generate
from saem.mesh import normalize_area
from saem.sphere import PoleGuard, SphericalMap
from saem.util.threads import THREADS_ENV


@pytest.fixture(autouse=True)
def single_thread(monkeypatch):
    # Face sums run on one thread unless a test asks otherwise.
    monkeypatch.delenv(THREADS_ENV, raising=False)


@pytest.fixture(scope="session")
def icosahedron():
    return generate.icosahedron()


@pytest.fixture(scope="session")
def octahedron():
    return generate.octahedron()


@pytest.fixture(scope="session")
def sphere2():
    return generate.icosphere(2)


@pytest.fixture(scope="session")
def sphere3():
    return generate.icosphere(3)


@pytest.fixture(scope="session")
def ellipsoid3():
    return normalize_area(generate.ellipsoid(3, (1.0, 1.0, 1.5)))


@pytest.fixture(scope="session")
def identity2(sphere2):
    """The level-2 icosphere mapped onto itself, turned off the poles."""
    points, _ = PoleGuard(7).rotate_clear(sphere2.vertices)
    return SphericalMap(points)


@pytest.fixture(scope="session")
def identity3(sphere3):
    points, _ = PoleGuard(7).rotate_clear(sphere3.vertices)
    return SphericalMap(points)


@pytest.fixture
def workdir(tmpdir):
    return str(tmpdir)


@pytest.fixture
def path_in(workdir):
    def make(name):
        return os.path.join(workdir, name)

    return make
