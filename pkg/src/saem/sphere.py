"""
Spherical maps: unit-vector and (θ, φ) representations, folding detection,
tangent-plane projection, stereographic charts and pole-avoiding rotations.
"""
from __future__ import absolute_import

import logging

import numpy as np
from scipy.spatial.transform import Rotation

from .exceptions import (
    DegenerateFaceError,
    InvalidOptionError,
    MapMismatchError,
    NotOnSphereError,
)
from .mesh import read_mesh_arrays, write_mesh_arrays

log = logging.getLogger(__name__)

UNIT_TOLERANCE = 1e-12

#: Minimum norm of a face centre before its tangent plane is undefined.
CENTER_TOLERANCE = 1e-8

#: Angular distance from a pole that triggers the initial rotation.
POLE_MARGIN = 1e-3


def _points(map):
    return getattr(map, "points", map)


class SphericalMap(object):
    """ Unit-sphere image of every mesh vertex.

    :param points:
        ``(n, 3)`` array-like of unit vectors, row ``i`` being the image of
        vertex ``i``.

    :param tol:
        Allowed deviation of each row's norm from 1. Use
        :meth:`from_points` to normalize arbitrary input instead.
    """

    def __init__(self, points, tol=UNIT_TOLERANCE):
        points = np.array(points, dtype=np.float64)
        if points.ndim != 2 or points.shape[1] != 3:
            raise NotOnSphereError("map points must be an (n, 3) array")
        deviation = np.abs(np.linalg.norm(points, axis=1) - 1.0)
        if len(points) and not deviation.max() <= tol:
            worst = int(np.argmax(deviation))
            raise NotOnSphereError(
                "map point %d has norm %.17g (tolerance %g)"
                % (worst, 1.0 + deviation[worst], tol)
            )
        points.flags.writeable = False
        self.points = points

    @classmethod
    def from_points(cls, points):
        """ Radially project arbitrary nonzero points onto the sphere. """
        points = np.asarray(points, dtype=np.float64)
        norms = np.linalg.norm(points, axis=1)
        if (norms == 0).any():
            raise NotOnSphereError(
                "point %d is the origin" % int(np.flatnonzero(norms == 0)[0])
            )
        return cls(points / norms[:, None])

    def __len__(self):
        return len(self.points)

    def __repr__(self):
        return "%s(n=%d)" % (type(self).__name__, len(self))

    def rotated(self, matrix):
        """ Apply a 3×3 rotation matrix to every point. """
        return type(self)(self.points.dot(np.asarray(matrix).T))


class SphericalCoords(object):
    """ Colatitude/longitude form of a :class:`SphericalMap`.

    ``theta`` lies in [0, π] and ``phi`` in (−π, π] when produced by
    :func:`to_spherical`. The ``fixed`` vertices are excluded from the
    optimization vector returned by :meth:`vector`, which stacks the free
    θ block on top of the free φ block.
    """

    def __init__(self, theta, phi, fixed=()):
        self.theta = np.array(theta, dtype=np.float64)
        self.phi = np.array(phi, dtype=np.float64)
        if self.theta.shape != self.phi.shape or self.theta.ndim != 1:
            raise ValueError("theta and phi must be 1-d arrays of equal length")
        self.fixed = tuple(int(v) for v in fixed)
        if len(set(self.fixed)) != len(self.fixed):
            raise ValueError("fixed vertices must be distinct, got %r" % (self.fixed,))
        mask = np.ones(len(self.theta), dtype=bool)
        mask[list(self.fixed)] = False
        self.free = np.flatnonzero(mask)

    def __len__(self):
        return len(self.theta)

    def __repr__(self):
        return "%s(n=%d, fixed=%r)" % (type(self).__name__, len(self), self.fixed)

    def vector(self):
        """ The free variables 𝐟 = [θ_free; φ_free]. """
        return np.concatenate([self.theta[self.free], self.phi[self.free]])

    def with_vector(self, f):
        """ New coordinates with the free variables replaced by ``f``. """
        k = len(self.free)
        if len(f) != 2 * k:
            raise ValueError("expected %d free variables, got %d" % (2 * k, len(f)))
        theta = self.theta.copy()
        phi = self.phi.copy()
        theta[self.free] = f[:k]
        phi[self.free] = f[k:]
        return type(self)(theta, phi, self.fixed)

    def split(self, g):
        """ Split a full-length (θ, φ) pair into the stacked free vector. """
        return np.concatenate([g[0][self.free], g[1][self.free]])


def to_spherical(map, fixed=()):
    """ θ = arccos(z), φ = atan2(y, x). Poles get φ = 0. """
    points = _points(map)
    theta = np.arccos(np.clip(points[:, 2], -1.0, 1.0))
    phi = np.arctan2(points[:, 1], points[:, 0])
    # atan2(-0.0, x < 0) is -π; keep φ in (-π, π].
    phi[phi == -np.pi] = np.pi
    return SphericalCoords(theta, phi, fixed)


def from_spherical(coords):
    """ (sin θ cos φ, sin θ sin φ, cos θ) per vertex. """
    sin_theta = np.sin(coords.theta)
    points = np.column_stack(
        [sin_theta * np.cos(coords.phi), sin_theta * np.sin(coords.phi), np.cos(coords.theta)]
    )
    return SphericalMap(points)


def signed_volumes(points, faces):
    """ Signed volume 𝕗_i·(𝕗_j × 𝕗_k)/6 of each origin tetrahedron. """
    a = points[faces[:, 0]]
    b = points[faces[:, 1]]
    c = points[faces[:, 2]]
    return np.einsum("ij,ij->i", a, np.cross(b, c)) / 6.0


def detect_foldings(mesh, map):
    """ Indices of faces whose image orientation is reversed (volume ≤ 0). """
    return np.flatnonzero(signed_volumes(_points(map), mesh.faces) <= 0)


def face_normal(points, face):
    """ Unit mean of a face's three image points, the tangent-plane normal. """
    center = points[list(face)].mean(axis=0)
    norm = np.linalg.norm(center)
    if norm < CENTER_TOLERANCE:
        raise DegenerateFaceError(
            "face centre has norm %.3g; the face is nearly antipodal" % norm
        )
    return center / norm


def tangent_project(map, n):
    """ Orthogonally project points onto the plane tangent to the sphere at ``n``.

    ``n`` is normalized first. Each returned point ``p`` satisfies
    ``(p - n)·n = 0``.
    """
    points = _points(map)
    n = np.asarray(n, dtype=np.float64)
    norm = np.linalg.norm(n)
    if norm < CENTER_TOLERANCE:
        raise DegenerateFaceError("tangent normal has norm %.3g" % norm)
    n = n / norm
    h = points - n
    return h - np.outer(h.dot(n), n) + n


# Stereographic charts. "north" projects from the north pole, sending the
# southern hemisphere into the unit disk; "south" is the mirror image.


def stereographic(points, pole="north"):
    points = _points(points)
    if pole == "north":
        denom = 1.0 - points[:, 2]
    elif pole == "south":
        denom = 1.0 + points[:, 2]
    else:
        raise ValueError("pole must be 'north' or 'south', got %r" % (pole,))
    return points[:, :2] / denom[:, None]


def inverse_stereographic(uv, pole="north"):
    uv = np.asarray(uv, dtype=np.float64)
    r2 = np.einsum("ij,ij->i", uv, uv)
    denom = 1.0 + r2
    if pole == "north":
        z = (r2 - 1.0) / denom
    elif pole == "south":
        z = (1.0 - r2) / denom
    else:
        raise ValueError("pole must be 'north' or 'south', got %r" % (pole,))
    return np.column_stack([2.0 * uv[:, 0] / denom, 2.0 * uv[:, 1] / denom, z])


class PoleGuard(object):
    """ Deterministic source of rotations that move vertices off the poles.

    Successive calls to :meth:`next_rotation` draw from one seeded stream, so
    a run with the same seed always applies the same rotations.
    """

    def __init__(self, seed=0, max_attempts=64):
        if max_attempts < 1:
            raise InvalidOptionError("max_attempts must be at least 1")
        self.seed = seed
        self.max_attempts = max_attempts
        self._rng = np.random.default_rng(seed)

    def next_rotation(self):
        return Rotation.random(random_state=self._rng).as_matrix()

    def clear_of_poles(self, points, margin):
        return bool(np.all(np.abs(points[:, 2]) < np.cos(margin)))

    def rotate_clear(self, points, margin=POLE_MARGIN):
        """ Rotate ``points`` until none is within ``margin`` radians of a pole.

        :return: ``(points, matrix)`` where ``matrix`` is the applied rotation
            (identity when none was needed).
        """
        points = _points(points)
        if self.clear_of_poles(points, margin):
            return points, np.eye(3)
        for attempt in range(self.max_attempts):
            matrix = self.next_rotation()
            rotated = points.dot(matrix.T)
            if self.clear_of_poles(rotated, margin):
                log.debug("Rotated map off the poles after %d attempt(s)", attempt + 1)
                return rotated, matrix
        raise RuntimeError(
            "no rotation cleared the poles in %d attempts" % self.max_attempts
        )


# Map files


def save_map(path, mesh, map, format="auto", header=()):
    """ Write a spherical map as a mesh file with the source connectivity. """
    write_mesh_arrays(path, _points(map), mesh.faces, format=format, header=header)


def load_map(path, mesh, format="auto", tol=1e-6):
    """ Read a spherical map written by :func:`save_map` for ``mesh``.

    :raises saem.exceptions.MapMismatchError: if vertex or face counts or
        the face list differ from ``mesh``.
    :raises saem.exceptions.NotOnSphereError: if a point's norm is off by
        more than ``tol``.
    """
    points, faces = read_mesh_arrays(path, format)
    if len(points) != mesh.n_vertices or len(faces) != mesh.n_faces:
        raise MapMismatchError(
            "map has %d vertices and %d faces, mesh has %d and %d"
            % (len(points), len(faces), mesh.n_vertices, mesh.n_faces)
        )
    if not np.array_equal(faces, mesh.faces):
        raise MapMismatchError("map face list differs from the mesh face list")
    return SphericalMap(points, tol=tol)
