"""
Sparse Laplacians on the image of a map (stretch-weighted and mean-value),
stretch factors, and the factorized preconditioner used by the solver.
"""
from __future__ import absolute_import

import logging

import numpy as np
import scipy.io
import scipy.sparse as sp

from ._backends._loader import load_backend, normalize_backend
from .exceptions import DegenerateFaceError
from .mesh import face_areas

log = logging.getLogger(__name__)


def _points(map):
    return getattr(map, "points", map)


class LaplacianMatrix(object):
    """ Sparse n×n weighted Laplacian with zero row sums.

    :param matrix: any SciPy sparse matrix; stored as CSR.
    :param kind: ``"stretch"`` (symmetric) or ``"mean_value"`` (generally not).
    """

    KINDS = ("stretch", "mean_value")

    def __init__(self, matrix, kind):
        if kind not in self.KINDS:
            raise ValueError("kind must be one of %r, got %r" % (self.KINDS, kind))
        self.matrix = sp.csr_matrix(matrix)
        self.kind = kind

    def __repr__(self):
        return "%s(kind=%r, shape=%r, nnz=%d)" % (
            type(self).__name__,
            self.kind,
            self.shape,
            self.matrix.nnz,
        )

    @property
    def shape(self):
        return self.matrix.shape

    def dot(self, x):
        return self.matrix.dot(x)

    def toarray(self):
        return self.matrix.toarray()

    def row_sums(self):
        return np.asarray(self.matrix.sum(axis=1)).ravel()

    def asymmetry(self):
        """ max |L − Lᵀ|. """
        diff = abs(self.matrix - self.matrix.T)
        return float(diff.max()) if diff.nnz else 0.0

    def quadratic_form(self, points):
        """ ½ Σ_s 𝕗^sᵀ L 𝕗^s over the coordinate columns of ``points``. """
        points = _points(points)
        return 0.5 * float(np.einsum("ij,ij->", points, self.matrix.dot(points)))

    def principal_submatrix(self, drop):
        """ The matrix with the rows and columns in ``drop`` deleted. """
        keep = np.ones(self.shape[0], dtype=bool)
        keep[list(drop)] = False
        idx = np.flatnonzero(keep)
        return self.matrix[idx][:, idx]


def _assemble(rows, cols, values, n, kind):
    # Sorting the triplets fixes the summation order of duplicates.
    order = np.lexsort((cols, rows))
    off = sp.coo_matrix((values[order], (rows[order], cols[order])), shape=(n, n)).tocsr()
    off.sum_duplicates()
    diag = -np.asarray(off.sum(axis=1)).ravel()
    return LaplacianMatrix(off + sp.diags(diag, format="csr"), kind)


def image_face_areas(mesh, map):
    areas = face_areas(_points(map), mesh.faces)
    degenerate = np.flatnonzero(areas <= 0)
    if len(degenerate):
        raise DegenerateFaceError(
            "image of face %d has zero area" % int(degenerate[0])
        )
    return areas


def stretch_factors(mesh, map, domain_areas=None):
    """ σ per face: domain area divided by image area.

    ``domain_areas`` replaces the mesh's own face areas when given.
    """
    domain = mesh.areas if domain_areas is None else np.asarray(domain_areas, dtype=np.float64)
    return domain / image_face_areas(mesh, map)


def stretch_factor(mesh, map, face):
    points = _points(map)
    i, j, k = mesh.faces[face]
    image = 0.5 * np.linalg.norm(np.cross(points[j] - points[i], points[k] - points[i]))
    if image <= 0:
        raise DegenerateFaceError("image of face %d has zero area" % face)
    return float(mesh.areas[face] / image)


def build_stretch_laplacian(mesh, map, domain_areas=None):
    """ Cotangent Laplacian of the image, each face weighted by 1/σ.

    Off-diagonal (i, j) is −½ Σ cot θ/σ over the two faces sharing the
    edge, θ being the image angle opposite the edge. The quadratic form
    ½ Σ_s 𝕗^sᵀ L 𝕗^s equals the stretch energy of the map, measured against
    ``domain_areas`` instead of the mesh's face areas when those are given.
    """
    points = _points(map)
    faces = mesh.faces
    n = len(points)
    sigma = stretch_factors(mesh, map, domain_areas)

    rows, cols, values = [], [], []
    for corner in range(3):
        apex = faces[:, corner]
        i = faces[:, (corner + 1) % 3]
        j = faces[:, (corner + 2) % 3]
        u = points[i] - points[apex]
        v = points[j] - points[apex]
        cot = np.einsum("ij,ij->i", u, v) / np.linalg.norm(np.cross(u, v), axis=1)
        w = -0.5 * cot / sigma
        rows.extend([i, j])
        cols.extend([j, i])
        values.extend([w, w])

    return _assemble(
        np.concatenate(rows), np.concatenate(cols), np.concatenate(values), n, "stretch"
    )


def build_mean_value_laplacian(mesh, map):
    """ Mean-value Laplacian of the image.

    Off-diagonal (i, j) is −Σ tan(γ/2)/‖𝕗_i − 𝕗_j‖ with γ the image angle at
    ``i`` in each face containing the edge. Every off-diagonal on a mesh
    edge is negative, so ``-L[i, l] / L[i, i]`` are convex weights.
    """
    points = _points(map)
    faces = mesh.faces
    n = len(points)

    rows, cols, values = [], [], []
    for corner in range(3):
        apex = faces[:, corner]
        j = faces[:, (corner + 1) % 3]
        k = faces[:, (corner + 2) % 3]
        u = points[j] - points[apex]
        v = points[k] - points[apex]
        lu = np.linalg.norm(u, axis=1)
        lv = np.linalg.norm(v, axis=1)
        if (lu == 0).any() or (lv == 0).any():
            bad = int(np.flatnonzero((lu == 0) | (lv == 0))[0])
            raise DegenerateFaceError("image of face %d has a zero-length edge" % bad)
        # tan(γ/2) = sin γ / (1 + cos γ)
        denom = lu * lv + np.einsum("ij,ij->i", u, v)
        if (denom <= 0).any():
            bad = int(np.flatnonzero(denom <= 0)[0])
            raise DegenerateFaceError("image of face %d has a straight angle" % bad)
        half_tan = np.linalg.norm(np.cross(u, v), axis=1) / denom
        rows.extend([apex, apex])
        cols.extend([j, k])
        values.extend([-half_tan / lu, -half_tan / lv])

    return _assemble(
        np.concatenate(rows), np.concatenate(cols), np.concatenate(values), n, "mean_value"
    )


class PreconditionerFactor(object):
    """ Factor of the pinned stretch Laplacian, applied blockwise as I₂ ⊗ L.

    :meth:`solve` takes the stacked free-variable vector [θ block; φ block]
    and solves both blocks against the same factor.
    """

    def __init__(self, factor, fixed):
        self.factor = factor
        self.fixed = tuple(fixed)

    def __repr__(self):
        return "%s(n=%d, fixed=%r, backend=%r)" % (
            type(self).__name__,
            self.factor.n,
            self.fixed,
            self.factor.backend_name,
        )

    @property
    def size(self):
        return self.factor.n

    def solve(self, g):
        g = np.asarray(g, dtype=np.float64)
        k = self.factor.n
        if g.shape != (2 * k,):
            raise ValueError("expected a vector of length %d, got %r" % (2 * k, g.shape))
        blocks = self.factor.solve(np.column_stack([g[:k], g[k:]]))
        return np.concatenate([blocks[:, 0], blocks[:, 1]])


def factorize_spd(matrix, backend=None):
    """ Factorize a symmetric positive definite sparse matrix.

    :param backend: a :class:`~saem.backends.Backend`, a backend name, or
        None for automatic selection.
    :raises saem.exceptions.IndefinitePreconditionerError: if the matrix is
        not positive definite.
    """
    backend = normalize_backend(backend)
    return load_backend(backend).factorize(matrix)


def build_preconditioner(laplacian, fixed, backend=None):
    """ Factorize the stretch Laplacian with the ``fixed`` rows and columns removed.

    :raises saem.exceptions.IndefinitePreconditionerError: if the pinned
        submatrix is not positive definite.
    """
    if laplacian.kind != "stretch":
        raise ValueError("the preconditioner needs a stretch Laplacian, got %r" % laplacian.kind)
    fixed = tuple(int(v) for v in fixed)
    if len(set(fixed)) != len(fixed):
        raise ValueError("fixed vertices must be distinct, got %r" % (fixed,))
    factor = factorize_spd(laplacian.principal_submatrix(fixed), backend)
    log.debug("Factorized pinned stretch Laplacian with %s", factor.backend_name)
    return PreconditionerFactor(factor, fixed)


def dump_matrix(laplacian, path):
    """ Write a Laplacian in Matrix Market coordinate format. """
    scipy.io.mmwrite(
        path, laplacian.matrix.tocoo(), comment="saem %s Laplacian" % laplacian.kind, precision=17
    )
    log.info("Wrote %s Laplacian to %s", laplacian.kind, path)
