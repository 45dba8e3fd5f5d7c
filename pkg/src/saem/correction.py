"""
Bijective correction of a spherical map.

Each round rebuilds the mean-value Laplacian of the current image once and
then revisits the folded faces found at the start of the round in ascending
order. A folded face is unfolded by projecting its neighbourhood onto the
plane tangent to the sphere at the face centre, re-solving the three face
vertices as mean-value combinations of their neighbours, and pushing the
result back onto the sphere. Updates are applied in place, so a later face
in the same round sees the positions written by earlier ones.
"""
from __future__ import absolute_import

import logging
import warnings
from collections import namedtuple

import numpy as np
import scipy.linalg

from .exceptions import (
    DegenerateFaceError,
    InvalidOptionError,
    ResidualFoldWarning,
    SingularSystemError,
)
from .operators import build_mean_value_laplacian
from .sphere import SphericalMap, detect_foldings, face_normal, signed_volumes, tangent_project

log = logging.getLogger(__name__)

#: Smallest admissible |pivot| of the 3×3 unfolding system.
PIVOT_TOLERANCE = 1e-14

# Turn-direction slack for the convexity test, relative to edge lengths.
_CONVEX_TOLERANCE = 1e-12


# Data structure for the outcome of :func:`correct_foldings`. The first three
# fields are the corrected map, the rounds used and the folds left over;
# ``fold_history`` holds the fold count before each round and after the last.
CorrectionResult = namedtuple(
    "CorrectionResult", ["map", "rounds", "remaining", "fold_history", "skipped", "nonconvex"]
)


class CorrectionOptions(object):
    """ Configuration for :func:`correct_foldings`.

    :param int max_rounds:
        Upper bound on correction rounds. Must be at least 1.
    """

    DEFAULT_MAX_ROUNDS = 100

    def __init__(self, max_rounds=DEFAULT_MAX_ROUNDS):
        self.max_rounds = self._validate_rounds(max_rounds)

    @classmethod
    def _validate_rounds(cls, value):
        if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
            raise InvalidOptionError("max_rounds was %r, but it must be an integer." % (value,))
        if value < 1:
            raise InvalidOptionError("max_rounds was %d, but it must be at least 1." % value)
        return int(value)

    def new(self, **kw):
        params = dict(max_rounds=self.max_rounds)
        params.update(kw)
        return type(self)(**params)

    def __repr__(self):
        return "{cls.__name__}(max_rounds={self.max_rounds})".format(cls=type(self), self=self)


def unfold_one(mesh, points, laplacian, face):
    """ Re-solve the three vertices of ``face`` in its tangent plane.

    :param points: ``(n, 3)`` array of current images; not modified.
    :param laplacian: mean-value :class:`~saem.operators.LaplacianMatrix`
        of the image at the start of the round.
    :return: ``(3, 3)`` array of new unit images for the face's vertices,
        in face order.
    :raises saem.exceptions.SingularSystemError: if the 3×3 system has a
        pivot below ``PIVOT_TOLERANCE``.
    :raises saem.exceptions.DegenerateFaceError: if the face centre is
        (nearly) the origin.
    """
    corners = [int(v) for v in mesh.faces[face]]
    n = face_normal(points, corners)

    rows = laplacian.matrix[corners].tocsr()
    columns = np.unique(rows.indices)
    outside = np.setdiff1d(columns, corners, assume_unique=True)

    inner = rows[:, corners].toarray()
    projected = tangent_project(points[outside], n)
    rhs = -rows[:, outside].dot(projected)

    lu, piv = scipy.linalg.lu_factor(inner, check_finite=False)
    pivots = np.abs(np.diag(lu))
    if not pivots.min() >= PIVOT_TOLERANCE:
        raise SingularSystemError(
            "unfolding system of face %d is singular (smallest pivot %.3g)" % (face, pivots.min())
        )
    solved = scipy.linalg.lu_solve((lu, piv), rhs, check_finite=False)
    norms = np.linalg.norm(solved, axis=1)
    if not (norms > 0).all():
        raise SingularSystemError("unfolding face %d put a vertex at the origin" % face)
    return solved / norms[:, None]


def patch_is_convex(mesh, points, face):
    """ Whether the boundary of the union of the face vertices' 1-rings,
    projected to the tangent plane at the face centre, is a convex polygon.
    """
    corners = [int(v) for v in mesh.faces[face]]
    patch = np.unique(np.concatenate([mesh.rings[v][1] for v in corners]))
    tris = mesh.faces[patch]

    step = {}
    directed = set()
    for a, b, c in tris.tolist():
        directed.update([(a, b), (b, c), (c, a)])
    for start, end in directed:
        if (end, start) in directed:
            continue
        if start in step:
            return False
        step[start] = end
    if not step:
        return False

    first = min(step)
    loop = [first]
    while True:
        nxt = step.get(loop[-1])
        if nxt is None:
            return False
        if nxt == first:
            break
        loop.append(nxt)
        if len(loop) > len(step):
            return False
    if len(loop) != len(step):
        return False

    n = face_normal(points, corners)
    e1 = np.cross(n, [1.0, 0.0, 0.0])
    if np.linalg.norm(e1) < 0.5:
        e1 = np.cross(n, [0.0, 1.0, 0.0])
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(n, e1)
    flat = tangent_project(points[loop], n)
    xy = np.column_stack([flat.dot(e1), flat.dot(e2)])

    edge = np.roll(xy, -1, axis=0) - xy
    following = np.roll(edge, -1, axis=0)
    turn = edge[:, 0] * following[:, 1] - edge[:, 1] * following[:, 0]
    scale = np.linalg.norm(edge, axis=1)
    slack = _CONVEX_TOLERANCE * scale * np.roll(scale, -1)
    # Outward faces run counter-clockwise in the (e1, e2) frame, since e1 × e2 = n.
    return bool((turn >= -slack).all())


def correct_foldings(mesh, map, opts=None):
    """ Remove folded faces from a spherical map.

    Faces whose 3×3 system is singular, or whose centre is too close to the
    origin, are skipped for the round and counted in ``skipped``. Faces
    whose neighbourhood does not project to a convex polygon are still
    processed and counted in ``nonconvex``. When folds remain after
    ``opts.max_rounds`` rounds a
    :class:`~saem.exceptions.ResidualFoldWarning` is issued.

    :return: a :class:`CorrectionResult`. A fold-free input is returned as
        the very same map object with 0 rounds.
    """
    opts = opts or CorrectionOptions()
    folds = detect_foldings(mesh, map)
    history = [int(len(folds))]
    if not len(folds):
        return CorrectionResult(map, 0, 0, history, 0, 0)

    points = np.array(map.points, dtype=np.float64)
    faces = mesh.faces
    rounds = skipped = nonconvex = 0
    log.info("Correcting %d folded face(s)", len(folds))

    while len(folds) and rounds < opts.max_rounds:
        rounds += 1
        try:
            laplacian = build_mean_value_laplacian(mesh, points)
        except DegenerateFaceError as e:
            log.warning("Correction stopped in round %d: %s", rounds, e)
            break

        for face in folds.tolist():
            # An earlier solve in this round may already have unfolded it.
            if signed_volumes(points, faces[face : face + 1])[0] > 0:
                continue
            if not patch_is_convex(mesh, points, face):
                nonconvex += 1
            try:
                solved = unfold_one(mesh, points, laplacian, face)
            except (SingularSystemError, DegenerateFaceError) as e:
                log.debug("Round %d: skipped face %d: %s", rounds, face, e)
                skipped += 1
                continue
            points[faces[face]] = solved

        folds = detect_foldings(mesh, points)
        history.append(int(len(folds)))
        log.debug("Correction round %d: %d fold(s) left", rounds, len(folds))

    remaining = int(len(folds))
    if remaining:
        warnings.warn(
            "%d folded face(s) remain after %d correction round(s)" % (remaining, rounds),
            ResidualFoldWarning,
        )
    log.info("Correction finished: %d -> %d folds in %d round(s)", history[0], remaining, rounds)
    return CorrectionResult(SphericalMap(points), rounds, remaining, history, skipped, nonconvex)
