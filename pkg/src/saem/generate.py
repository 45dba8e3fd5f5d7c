"""
Deterministic genus-zero test meshes.
"""
from __future__ import absolute_import

import logging

import numpy as np

from .mesh import TriMesh

log = logging.getLogger(__name__)

MAX_LEVEL = 7

_GOLDEN = (1.0 + np.sqrt(5.0)) / 2.0

_ICOSAHEDRON_VERTICES = [
    [-1, _GOLDEN, 0],
    [1, _GOLDEN, 0],
    [-1, -_GOLDEN, 0],
    [1, -_GOLDEN, 0],
    [0, -1, _GOLDEN],
    [0, 1, _GOLDEN],
    [0, -1, -_GOLDEN],
    [0, 1, -_GOLDEN],
    [_GOLDEN, 0, -1],
    [_GOLDEN, 0, 1],
    [-_GOLDEN, 0, -1],
    [-_GOLDEN, 0, 1],
]

_ICOSAHEDRON_FACES = [
    [0, 11, 5],
    [0, 5, 1],
    [0, 1, 7],
    [0, 7, 10],
    [0, 10, 11],
    [1, 5, 9],
    [5, 11, 4],
    [11, 10, 2],
    [10, 7, 6],
    [7, 1, 8],
    [3, 9, 4],
    [3, 4, 2],
    [3, 2, 6],
    [3, 6, 8],
    [3, 8, 9],
    [5, 4, 9],
    [2, 4, 11],
    [6, 2, 10],
    [8, 6, 7],
    [9, 8, 1],
]

_OCTAHEDRON_VERTICES = [
    [1, 0, 0],
    [-1, 0, 0],
    [0, 1, 0],
    [0, -1, 0],
    [0, 0, 1],
    [0, 0, -1],
]

_OCTAHEDRON_FACES = [
    [0, 2, 4],
    [2, 1, 4],
    [1, 3, 4],
    [3, 0, 4],
    [2, 0, 5],
    [1, 2, 5],
    [3, 1, 5],
    [0, 3, 5],
]


def _unit(points):
    return points / np.linalg.norm(points, axis=1)[:, None]


def _check_level(level):
    if isinstance(level, bool) or not isinstance(level, (int, np.integer)):
        raise ValueError("level was %r, but it must be an integer" % (level,))
    if not 0 <= level <= MAX_LEVEL:
        raise ValueError("level was %d, but it must be between 0 and %d" % (level, MAX_LEVEL))
    return int(level)


def icosahedron():
    """ Regular icosahedron inscribed in the unit sphere. """
    return TriMesh(_unit(np.array(_ICOSAHEDRON_VERTICES, dtype=np.float64)), _ICOSAHEDRON_FACES)


def octahedron():
    return TriMesh(np.array(_OCTAHEDRON_VERTICES, dtype=np.float64), _OCTAHEDRON_FACES)


def subdivide(vertices, faces):
    """ Split every face into four at its edge midpoints, projected to the unit sphere.

    Midpoint vertices are numbered after the existing ones in sorted edge order.
    """
    n = len(vertices)
    corners = faces.T
    starts = corners.ravel()
    ends = np.roll(corners, -1, axis=0).ravel()
    lo = np.minimum(starts, ends)
    hi = np.maximum(starts, ends)
    keys, inverse = np.unique(lo * n + hi, return_inverse=True)
    midpoints = _unit(0.5 * (vertices[keys // n] + vertices[keys % n]))

    mid = (inverse.reshape(3, -1) + n).T
    a, b, c = faces[:, 0], faces[:, 1], faces[:, 2]
    ab, bc, ca = mid[:, 0], mid[:, 1], mid[:, 2]
    new_faces = np.concatenate(
        [
            np.column_stack([a, ab, ca]),
            np.column_stack([b, bc, ab]),
            np.column_stack([c, ca, bc]),
            np.column_stack([ab, bc, ca]),
        ]
    )
    return np.concatenate([vertices, midpoints]), new_faces


def _icosphere_arrays(level):
    vertices = _unit(np.array(_ICOSAHEDRON_VERTICES, dtype=np.float64))
    faces = np.array(_ICOSAHEDRON_FACES, dtype=np.int64)
    for _ in range(level):
        vertices, faces = subdivide(vertices, faces)
    return vertices, faces


def icosphere(level):
    """ Unit icosphere with 10·4^level + 2 vertices and 20·4^level faces. """
    level = _check_level(level)
    vertices, faces = _icosphere_arrays(level)
    log.debug("Generated icosphere level %d: %d vertices", level, len(vertices))
    return TriMesh(vertices, faces)


def ellipsoid(level, axes=(1.0, 1.0, 1.5)):
    """ Icosphere of ``level`` scaled by the semi-axes ``axes``. """
    level = _check_level(level)
    axes = np.asarray(axes, dtype=np.float64)
    if axes.shape != (3,) or not np.all(np.isfinite(axes)) or not (axes > 0).all():
        raise ValueError("axes must be three positive numbers, got %r" % (axes.tolist(),))
    vertices, faces = _icosphere_arrays(level)
    return TriMesh(vertices * axes, faces)


def bumpy(level, amplitude=0.3):
    """ Icosphere with radius 1 + amplitude·3(x⁴ + y⁴ + z⁴ − 2/3).

    The modulation ranges over [−1, 1] on the unit sphere, with bumps along
    the coordinate axes, so ``amplitude`` must lie in [0, 1).
    """
    level = _check_level(level)
    amplitude = float(amplitude)
    if not 0.0 <= amplitude < 1.0:
        raise ValueError("amplitude was %r, but it must lie in [0, 1)" % amplitude)
    vertices, faces = _icosphere_arrays(level)
    modulation = 3.0 * (np.sum(vertices ** 4, axis=1) - 2.0 / 3.0)
    return TriMesh(vertices * (1.0 + amplitude * modulation)[:, None], faces)
