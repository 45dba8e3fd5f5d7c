"""
Seed spherical map and the fixed-point warm-up run before the CG solver.

The seed removes the star of one vertex, embeds the remaining disk in the
plane with mean-value (Tutte) weights and a regular polygon boundary, lifts
the disk to the sphere by inverse stereographic projection and puts the
removed vertex on the north pole. The disk scale is bounded so that no
image face crosses into the orientation-reversing regime of the projection,
which keeps the seed fold-free; within that bound it is chosen to minimize
the spherical authalic energy.
"""
from __future__ import absolute_import

import logging

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.sparse.csgraph import shortest_path
from scipy.sparse.linalg import splu

from .energy import spherical_authalic_barrier
from .exceptions import (
    DegenerateFaceError,
    InitializationError,
    InvalidOptionError,
)
from .mesh import one_ring
from .operators import build_mean_value_laplacian, build_stretch_laplacian
from .sphere import (
    PoleGuard,
    SphericalMap,
    detect_foldings,
    inverse_stereographic,
    signed_volumes,
    stereographic,
)

log = logging.getLogger(__name__)

# Fraction of the largest admissible disk scale actually used.
_SCALE_SAFETY = 0.9

# Width, in natural-log units, of the disk-scale search below the start.
_SCALE_SEARCH_WIDTH = 6.0

# Damping weights tried, in order, for a warm-up half-step.
_RELAXATION = (1.0, 0.5, 0.25, 0.125)

_BLEND_TOLERANCE = 1e-12


class InitOptions(object):
    """ Seed and warm-up configuration.

    :param warmup_max_iters:
        Cap on fixed-point warm-up iterations. 0 disables the warm-up.

    :param seed:
        Seed of the rotation that moves the seed map off the poles.
    """

    DEFAULT_WARMUP_MAX_ITERS = 15

    def __init__(self, warmup_max_iters=DEFAULT_WARMUP_MAX_ITERS, seed=0):
        self.warmup_max_iters = self._validate_count(warmup_max_iters, "warmup_max_iters")
        self.seed = self._validate_count(seed, "seed")

    @classmethod
    def _validate_count(cls, value, name):
        if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
            raise InvalidOptionError("%s was %r, but it must be an integer." % (name, value))
        if value < 0:
            raise InvalidOptionError(
                "%s was %d, but it cannot be negative." % (name, value)
            )
        return int(value)

    def new(self, **kw):
        params = dict(warmup_max_iters=self.warmup_max_iters, seed=self.seed)
        params.update(kw)
        return type(self)(**params)

    def __repr__(self):
        return "{cls.__name__}(warmup_max_iters={self.warmup_max_iters}, seed={self.seed})".format(
            cls=type(self), self=self
        )


def _removed_vertex(mesh):
    # Farthest vertex, in edge hops, from the vertex nearest the centroid.
    centroid = mesh.vertices.mean(axis=0)
    start = int(np.argmin(np.linalg.norm(mesh.vertices - centroid, axis=1)))
    hops = shortest_path(mesh.adjacency(), directed=False, unweighted=True, indices=start)
    return int(np.argmax(hops))


def _circle_power(uv, faces):
    """ R² − |c|² of each face's circumcircle, i.e. minus the origin's power. """
    p1, p2, p3 = uv[faces[:, 0]], uv[faces[:, 1]], uv[faces[:, 2]]
    s1 = np.einsum("ij,ij->i", p1, p1)
    s2 = np.einsum("ij,ij->i", p2, p2)
    s3 = np.einsum("ij,ij->i", p3, p3)
    d = 2.0 * (
        p1[:, 0] * (p2[:, 1] - p3[:, 1])
        + p2[:, 0] * (p3[:, 1] - p1[:, 1])
        + p3[:, 0] * (p1[:, 1] - p2[:, 1])
    )
    if (d == 0).any():
        raise InitializationError(
            "planar embedding has a collinear face %d" % int(np.flatnonzero(d == 0)[0])
        )
    cx = (s1 * (p2[:, 1] - p3[:, 1]) + s2 * (p3[:, 1] - p1[:, 1]) + s3 * (p1[:, 1] - p2[:, 1])) / d
    cy = (s1 * (p3[:, 0] - p2[:, 0]) + s2 * (p1[:, 0] - p3[:, 0]) + s3 * (p2[:, 0] - p1[:, 0])) / d
    return 2.0 * (p1[:, 0] * cx + p1[:, 1] * cy) - s1


def _lift(uv, scale, pole, others, mirror):
    points = np.empty((len(uv), 3))
    points[others] = inverse_stereographic(scale * uv[others])
    points[pole] = (0.0, 0.0, 1.0)
    if mirror:
        points[:, 1] = -points[:, 1]
    return points


def _best_scale(mesh, uv, pole, others, mirror, start, limit):
    """ Disk scale in (0, limit] with the lowest spherical authalic energy.

    Every scale up to ``limit`` lifts to a fold-free map, so only the
    distortion is traded off. ``start`` is kept unless the search beats it.
    """

    def energy(log_scale):
        return spherical_authalic_barrier(mesh, _lift(uv, np.exp(log_scale), pole, others, mirror))

    upper = np.log(limit) if np.isfinite(limit) else np.log(start) + _SCALE_SEARCH_WIDTH
    lower = min(np.log(start), upper) - _SCALE_SEARCH_WIDTH
    result = minimize_scalar(energy, bounds=(lower, upper), method="bounded")
    best = float(np.exp(result.x))
    if not energy(result.x) < energy(np.log(start)):
        return start
    return best


def initial_spherical_map(mesh, opts=None):
    """ Fold-free seed map of a valid genus-zero mesh.

    :raises saem.exceptions.InitializationError: if the planar system is
        singular or the lifted map has folded faces.
    """
    opts = opts or InitOptions()
    n = mesh.n_vertices
    pole = _removed_vertex(mesh)
    ring, star = one_ring(mesh, pole)
    k = len(ring)

    angles = 2.0 * np.pi * np.arange(k) / k
    uv = np.zeros((n, 2))
    uv[ring] = np.column_stack([np.cos(angles), np.sin(angles)])

    inside = np.ones(n, dtype=bool)
    inside[ring] = False
    inside[pole] = False
    interior = np.flatnonzero(inside)
    if len(interior):
        L = build_mean_value_laplacian(mesh, mesh.vertices).matrix
        rows = L[interior]
        rhs = -rows[:, ring].dot(uv[ring])
        try:
            uv[interior] = splu(rows[:, interior].tocsc()).solve(rhs)
        except RuntimeError as e:
            raise InitializationError("singular Tutte system: %s" % e)

    disk = np.ones(mesh.n_faces, dtype=bool)
    disk[star] = False
    power = _circle_power(uv, mesh.faces[disk])
    worst = float(power.max())
    limit = _SCALE_SAFETY / np.sqrt(worst) if worst > 0 else np.inf

    # Size the polar cap to the star's share of the surface.
    share = float(mesh.areas[star].sum() / mesh.total_area)
    cos_cap = 1.0 - 2.0 * share
    target = np.sqrt(1.0 - cos_cap * cos_cap) / (1.0 - cos_cap)
    start = min(target, limit)

    others = np.flatnonzero(np.arange(n) != pole)
    mirror = np.all(signed_volumes(_lift(uv, start, pole, others, False), mesh.faces) < 0)
    scale = _best_scale(mesh, uv, pole, others, mirror, start, limit)
    log.debug(
        "Seed: removed vertex %d (valence %d), disk scale %.6g (cap %.6g, limit %.6g)",
        pole,
        k,
        scale,
        target,
        limit,
    )
    points = _lift(uv, scale, pole, others, mirror)

    folds = detect_foldings(mesh, points)
    if len(folds):
        raise InitializationError(
            "initialization not bijective: %d folded face(s), first %d" % (len(folds), folds[0])
        )

    points, _ = PoleGuard(opts.seed).rotate_clear(points)
    log.info("Seed map built for %r", mesh)
    return SphericalMap(points)


def _chart_targets(mesh, uv):
    # A small patch at chart radius r covers 4/(1 + r²)² times its planar
    # area on the sphere; equal spherical shares need these planar areas.
    centre = uv[mesh.faces].mean(axis=1)
    r2 = np.einsum("ij,ij->i", centre, centre)
    return mesh.areas * (1.0 + r2) ** 2 / 4.0


def _half_step(mesh, points, pole):
    uv = stereographic(points, pole)
    if not np.all(np.isfinite(uv)):
        log.debug("Warm-up half-step (%s) skipped: vertex on the projection pole", pole)
        return None
    radius = np.linalg.norm(uv, axis=1)
    interior = np.flatnonzero(radius <= 1.0)
    boundary = np.flatnonzero(radius > 1.0)
    if len(interior) == 0 or len(boundary) == 0:
        log.debug("Warm-up half-step (%s) skipped: empty hemisphere", pole)
        return None

    planar = np.column_stack([uv, np.zeros(len(uv))])
    try:
        L = build_stretch_laplacian(mesh, planar, _chart_targets(mesh, uv)).matrix
    except DegenerateFaceError as e:
        log.debug("Warm-up half-step (%s) skipped: %s", pole, e)
        return None
    rows = L[interior]
    rhs = -rows[:, boundary].dot(uv[boundary])
    try:
        solution = splu(rows[:, interior].tocsc()).solve(rhs)
    except RuntimeError as e:
        log.debug("Warm-up half-step (%s) skipped: %s", pole, e)
        return None
    if not np.all(np.isfinite(solution)):
        return None

    updated = points.copy()
    updated[interior] = inverse_stereographic(solution, pole)
    return updated


def _relax(mesh, points, energy, candidate):
    """ First blend of ``points`` towards ``candidate`` that lowers the energy.

    :return: ``(points, energy)`` or None when no blend improves.
    """
    for weight in _RELAXATION:
        blend = points + weight * (candidate - points)
        norms = np.linalg.norm(blend, axis=1)
        if (norms < _BLEND_TOLERANCE).any():
            continue
        blend /= norms[:, None]
        trial = spherical_authalic_barrier(mesh, blend)
        if trial < energy:
            return blend, trial
    return None


def fixed_point_warmup(mesh, map, opts=None):
    """ Stretch-energy fixed-point iterations on alternating hemispheres.

    Each iteration solves for the southern hemisphere in the chart projected
    from the north pole, then for the northern one in the opposite chart,
    with stretch measured against the spherical area each planar face should
    cover. A half-step is taken in full, or damped, only when it lowers the
    spherical authalic energy of a map that keeps positive volume. The
    warm-up stops after ``opts.warmup_max_iters`` iterations or at the first
    iteration in which neither half-step lowers the energy.
    """
    opts = opts or InitOptions()
    if opts.warmup_max_iters == 0:
        return map

    best = map.points
    best_energy = spherical_authalic_barrier(mesh, best)
    if not np.isfinite(best_energy):
        log.warning("Warm-up skipped: the input map does not enclose a positive volume")
        return map
    start_energy = best_energy
    log.debug("Warm-up start: E=%.12g", best_energy)
    for iteration in range(1, opts.warmup_max_iters + 1):
        moved = False
        for pole in ("north", "south"):
            candidate = _half_step(mesh, best, pole)
            if candidate is None:
                continue
            step = _relax(mesh, best, best_energy, candidate)
            if step is not None:
                best, best_energy = step
                moved = True
        if not moved:
            log.debug("Warm-up stopped at iteration %d: energy did not decrease", iteration)
            break
        log.debug("Warm-up iteration %d: E=%.12g", iteration, best_energy)

    folds = detect_foldings(mesh, best)
    if len(folds):
        log.warning("Warm-up output has %d folded face(s)", len(folds))
    log.info("Warm-up finished: E=%.12g (start %.12g)", best_energy, start_energy)
    if best is map.points:
        return map
    return SphericalMap.from_points(best)
