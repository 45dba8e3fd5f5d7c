"""
Energies of a spherical map and their gradients.

E_S is the stretch energy Σ|f(τ)|²/|τ|. The authalic energy E_A measures it
against the unsigned image area A, the spherical authalic energy against
three times the signed enclosed volume 𝒱, which makes folded faces costly.
Gradients in (θ, φ) are obtained from Cartesian gradients by the chain rule
through (sin θ cos φ, sin θ sin φ, cos θ).
"""
from __future__ import absolute_import

import logging

import numpy as np

from .exceptions import CollapsedImageError, DegenerateFaceError
from .operators import build_stretch_laplacian
from .sphere import from_spherical
from .util.threads import face_sum

log = logging.getLogger(__name__)

#: Volumes below this make the spherical authalic energy undefined.
VOLUME_TOLERANCE = 1e-12


def _points(map):
    return getattr(map, "points", map)


def _totals(mesh, map, threads=None):
    """ (E_S, image area, signed volume) in one pass over the faces. """
    points = _points(map)
    faces = mesh.faces
    domain = mesh.areas

    def chunk(start, stop):
        f = faces[start:stop]
        a, b, c = points[f[:, 0]], points[f[:, 1]], points[f[:, 2]]
        area = 0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=1)
        volume = np.einsum("ij,ij->i", a, np.cross(b, c)) / 6.0
        return np.array(
            [np.sum(area * area / domain[start:stop]), np.sum(area), np.sum(volume)]
        )

    stretch, area, volume = face_sum(chunk, len(faces), threads)
    return float(stretch), float(area), float(volume)


def stretch_energy(mesh, map):
    return _totals(mesh, map)[0]


def image_area(mesh, map):
    return _totals(mesh, map)[1]


def volume_measure(mesh, map):
    """ Sum of signed origin-tetrahedron volumes over the image faces. """
    return _totals(mesh, map)[2]


def _authalic(domain_area, stretch, area):
    if not area > 0:
        raise CollapsedImageError("image area %r is not positive" % area)
    return domain_area / area * stretch - area


def _spherical(domain_area, stretch, volume):
    if not abs(volume) >= VOLUME_TOLERANCE:
        raise CollapsedImageError("image volume %r is collapsed" % volume)
    return domain_area / (3.0 * volume) * stretch - 3.0 * volume


def authalic_energy(mesh, map):
    """ (|M|/A)·E_S − A with A the unsigned image area. Zero iff area-preserving. """
    stretch, area, _ = _totals(mesh, map)
    return _authalic(mesh.total_area, stretch, area)


def spherical_authalic_energy(mesh, map):
    """ (|M|/(3𝒱))·E_S − 3𝒱.

    :raises saem.exceptions.CollapsedImageError: if |𝒱| < 1e−12.
    """
    stretch, _, volume = _totals(mesh, map)
    return _spherical(mesh.total_area, stretch, volume)


def spherical_authalic_barrier(mesh, map):
    """ The spherical authalic energy, ``inf`` once 𝒱 ≤ 1e−12.

    The energy has a pole at 𝒱 = 0 and is unbounded below beyond it, so
    optimizers evaluate trial points through this instead.
    """
    stretch, _, volume = _totals(mesh, map)
    if not volume > VOLUME_TOLERANCE:
        return np.inf
    return _spherical(mesh.total_area, stretch, volume)


def max_image_edge(mesh, map):
    points = _points(map)
    edges = mesh.edges
    return float(np.max(np.linalg.norm(points[edges[:, 0]] - points[edges[:, 1]], axis=1)))


class EnergyBreakdown(object):
    """ Every energy of one (mesh, map) pair.

    ``E_spherical`` is None when the image volume is collapsed.
    """

    FIELDS = ("E_S", "E_A", "E_spherical", "volume", "image_area", "domain_area", "max_image_edge")

    def __init__(self, E_S, E_A, E_spherical, volume, image_area, domain_area, max_image_edge):
        self.E_S = E_S
        self.E_A = E_A
        self.E_spherical = E_spherical
        self.volume = volume
        self.image_area = image_area
        self.domain_area = domain_area
        self.max_image_edge = max_image_edge

    def __repr__(self):
        return "%s(%s)" % (
            type(self).__name__,
            ", ".join("%s=%r" % (name, getattr(self, name)) for name in self.FIELDS),
        )

    def as_dict(self):
        return dict((name, getattr(self, name)) for name in self.FIELDS)


def evaluate_energies(mesh, map):
    stretch, area, volume = _totals(mesh, map)
    domain = mesh.total_area
    try:
        spherical = _spherical(domain, stretch, volume)
    except CollapsedImageError:
        spherical = None
    return EnergyBreakdown(
        E_S=stretch,
        E_A=_authalic(domain, stretch, area),
        E_spherical=spherical,
        volume=volume,
        image_area=area,
        domain_area=domain,
        max_image_edge=max_image_edge(mesh, map),
    )


def approximation_bound(mesh, map):
    """ Gap between the two authalic energies and its mesh-resolution bound.

    The bound is (1 + E_S|M|/(3𝒱A))·A·(1 − √(1 − ε²)) with ε the longest
    image edge; it is ``inf`` once ε ≥ 1.

    :return: ``(|E_spherical − E_A|, bound)``
    """
    e = evaluate_energies(mesh, map)
    if e.E_spherical is None:
        raise CollapsedImageError("image volume %r is collapsed" % e.volume)
    gap = abs(e.E_spherical - e.E_A)
    eps = e.max_image_edge
    if eps >= 1.0:
        return gap, float("inf")
    factor = 1.0 + e.E_S * e.domain_area / (3.0 * e.volume * e.image_area)
    return gap, factor * e.image_area * (1.0 - np.sqrt(1.0 - eps * eps))


# Gradients


def stretch_gradient(mesh, points):
    """ ∇E_S = 2 L_S 𝕗 in Cartesian coordinates, ``(n, 3)``. """
    return 2.0 * build_stretch_laplacian(mesh, points).dot(points)


def _scatter(faces, n, contributions):
    # Per-face accumulation in face order, corner by corner.
    index = faces.T.ravel()
    stacked = np.concatenate(contributions)
    return np.column_stack(
        [np.bincount(index, weights=stacked[:, s], minlength=n) for s in range(3)]
    )


def volume_gradient(mesh, points):
    """ ∇𝒱: vertex i of face (i, j, k) receives (𝕗_j × 𝕗_k)/6. """
    faces = mesh.faces
    a, b, c = points[faces[:, 0]], points[faces[:, 1]], points[faces[:, 2]]
    return _scatter(
        faces, len(points), [np.cross(b, c) / 6.0, np.cross(c, a) / 6.0, np.cross(a, b) / 6.0]
    )


def area_gradient(mesh, points):
    """ ∇A of the unsigned image area: vertex i receives ½(𝕗_j − 𝕗_k) × n̂. """
    faces = mesh.faces
    a, b, c = points[faces[:, 0]], points[faces[:, 1]], points[faces[:, 2]]
    normal = np.cross(b - a, c - a)
    norm = np.linalg.norm(normal, axis=1)
    if (norm == 0).any():
        raise DegenerateFaceError(
            "image of face %d has zero area" % int(np.flatnonzero(norm == 0)[0])
        )
    unit = normal / norm[:, None]
    return _scatter(
        faces,
        len(points),
        [0.5 * np.cross(b - c, unit), 0.5 * np.cross(c - a, unit), 0.5 * np.cross(a - b, unit)],
    )


def to_angle_gradient(G, theta, phi):
    """ Chain a Cartesian gradient through the spherical parameterization.

    :return: ``(∇_θ, ∇_φ)``, each of length n.
    """
    ct, st = np.cos(theta), np.sin(theta)
    cp, sp = np.cos(phi), np.sin(phi)
    g_theta = G[:, 0] * ct * cp + G[:, 1] * ct * sp - G[:, 2] * st
    g_phi = -G[:, 0] * st * sp + G[:, 1] * st * cp
    return g_theta, g_phi


def grad_volume_spherical(mesh, coords):
    points = from_spherical(coords).points
    return to_angle_gradient(volume_gradient(mesh, points), coords.theta, coords.phi)


def grad_spherical_authalic(mesh, coords):
    """ Gradient of the spherical authalic energy over the free (θ, φ).

    (|M|/(3𝒱))·∇E_S − (3 + |M|E_S/(3𝒱²))·∇𝒱, chained to angles.
    """
    points = from_spherical(coords).points
    stretch, _, volume = _totals(mesh, points)
    if not abs(volume) >= VOLUME_TOLERANCE:
        raise CollapsedImageError("image volume %r is collapsed" % volume)
    domain = mesh.total_area
    G = domain / (3.0 * volume) * stretch_gradient(mesh, points) - (
        3.0 + domain * stretch / (3.0 * volume * volume)
    ) * volume_gradient(mesh, points)
    return coords.split(to_angle_gradient(G, coords.theta, coords.phi))


def grad_authalic(mesh, coords):
    """ Gradient of the authalic energy over the free (θ, φ).

    (|M|/A)·∇E_S − (|M|E_S/A² + 1)·∇A, chained to angles.
    """
    points = from_spherical(coords).points
    stretch, area, _ = _totals(mesh, points)
    if not area > 0:
        raise CollapsedImageError("image area %r is not positive" % area)
    domain = mesh.total_area
    G = domain / area * stretch_gradient(mesh, points) - (
        domain * stretch / (area * area) + 1.0
    ) * area_gradient(mesh, points)
    return coords.split(to_angle_gradient(G, coords.theta, coords.phi))


#: Objective name -> (energy(mesh, map), gradient(mesh, coords)).
OBJECTIVES = {
    "spherical": (spherical_authalic_energy, grad_spherical_authalic),
    "authalic": (authalic_energy, grad_authalic),
}

#: Objective name -> energy of a line-search trial point.
TRIAL_ENERGIES = {
    "spherical": spherical_authalic_barrier,
    "authalic": authalic_energy,
}
