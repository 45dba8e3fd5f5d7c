import functools
import warnings

import numpy as np
import pytest

from saem.exceptions import SAEMWarning
from saem.sphere import SphericalMap, from_spherical, to_spherical

try:
    import sksparse.cholmod as cholmod
except ImportError:
    cholmod = None


def clear_warnings(cls=SAEMWarning):
    new_filters = []
    for f in warnings.filters:
        if issubclass(f[2], cls):
            continue
        new_filters.append(f)
    warnings.filters[:] = new_filters


def requires_cholmod():
    return pytest.mark.skipif(cholmod is None, reason="only run if scikit-sparse is present")


def notCholmod():
    return pytest.mark.skipif(cholmod is not None, reason="only run if scikit-sparse is absent")


def quiet(test):
    """Runs the test with saem warnings silenced."""

    @functools.wraps(test)
    def wrapper(*args, **kwargs):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", SAEMWarning)
            return test(*args, **kwargs)

    return wrapper


def finite_difference(f, x, step=1e-6):
    """Central-difference gradient of the scalar function ``f`` at ``x``."""
    x = np.array(x, dtype=np.float64)
    grad = np.empty_like(x)
    for i in range(len(x)):
        forward = x.copy()
        backward = x.copy()
        forward[i] += step
        backward[i] -= step
        grad[i] = (f(forward) - f(backward)) / (2.0 * step)
    return grad


def heron(a, b, c):
    """Triangle area from its corners by Heron's formula."""
    x = np.linalg.norm(np.subtract(b, c))
    y = np.linalg.norm(np.subtract(c, a))
    z = np.linalg.norm(np.subtract(a, b))
    s = 0.5 * (x + y + z)
    return np.sqrt(max(s * (s - x) * (s - y) * (s - z), 0.0))


def jitter(map, scale, seed=0, fixed=()):
    """Randomly move every vertex by up to ``scale`` radians in θ and φ."""
    rng = np.random.RandomState(seed)
    coords = to_spherical(map, fixed)
    theta = coords.theta + rng.uniform(-scale, scale, len(coords))
    phi = coords.phi + rng.uniform(-scale, scale, len(coords))
    return from_spherical(type(coords)(theta, phi, fixed))


def overshoot(map, mesh, vertex, factor=1.5):
    """Move ``vertex`` past its first ring neighbour, folding part of its star."""
    points = np.array(map.points)
    neighbor = mesh.rings[vertex][0][0]
    moved = points[vertex] + factor * (points[neighbor] - points[vertex])
    points[vertex] = moved / np.linalg.norm(moved)
    return SphericalMap(points)


def torus_arrays(nu=8, nv=6, major=2.0, minor=0.7):
    """Consistently oriented closed torus, Euler characteristic 0."""
    u = 2.0 * np.pi * np.arange(nu) / nu
    v = 2.0 * np.pi * np.arange(nv) / nv
    uu, vv = np.meshgrid(u, v, indexing="ij")
    vertices = np.column_stack(
        [
            ((major + minor * np.cos(vv)) * np.cos(uu)).ravel(),
            ((major + minor * np.cos(vv)) * np.sin(uu)).ravel(),
            (minor * np.sin(vv)).ravel(),
        ]
    )
    faces = []
    for i in range(nu):
        for j in range(nv):
            a = i * nv + j
            b = ((i + 1) % nu) * nv + j
            c = ((i + 1) % nu) * nv + (j + 1) % nv
            d = i * nv + (j + 1) % nv
            faces.append([a, b, c])
            faces.append([a, c, d])
    return vertices, np.array(faces)


TETRAHEDRON_VERTICES = [[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]]
TETRAHEDRON_FACES = [[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]]
