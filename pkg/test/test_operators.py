import numpy as np
import pytest
import scipy.io
import scipy.sparse as sp

from saem.exceptions import DegenerateFaceError
from saem.energy import stretch_energy
from saem.mesh import TriMesh
from saem.operators import (
    LaplacianMatrix,
    build_mean_value_laplacian,
    build_preconditioner,
    build_stretch_laplacian,
    dump_matrix,
    stretch_factor,
    stretch_factors,
)
from saem.sphere import SphericalMap

from . import jitter


def hexagon_fan():
    angles = np.pi / 3.0 * np.arange(6)
    ring = np.column_stack([np.cos(angles), np.sin(angles), np.zeros(6)])
    vertices = np.vstack([[0.0, 0.0, 0.0], ring])
    faces = [[0, i, i % 6 + 1] for i in range(1, 7)]
    return TriMesh(vertices, faces, validate=False)


class TestStretchLaplacian(object):
    def test_zero_row_sums_and_symmetry(self, sphere2, identity2):
        L = build_stretch_laplacian(sphere2, jitter(identity2, 0.03))
        scale = np.abs(L.matrix.diagonal()).max()
        assert np.abs(L.row_sums()).max() < 1e-12 * scale
        assert L.asymmetry() < 1e-12 * scale
        assert L.kind == "stretch"

    def test_quadratic_form_is_stretch_energy(self, sphere2, identity2):
        map = jitter(identity2, 0.03, seed=4)
        L = build_stretch_laplacian(sphere2, map)
        assert L.quadratic_form(map) == pytest.approx(stretch_energy(sphere2, map), rel=1e-10)

    def test_identity_stretch_is_one(self, sphere2):
        identity = SphericalMap(sphere2.vertices)
        assert (stretch_factors(sphere2, identity) == 1.0).all()
        assert stretch_factor(sphere2, identity, 5) == 1.0

    def test_domain_areas(self, sphere2, identity2):
        map = jitter(identity2, 0.03, seed=2)
        default = build_stretch_laplacian(sphere2, map).toarray()
        same = build_stretch_laplacian(sphere2, map, sphere2.areas).toarray()
        doubled = build_stretch_laplacian(sphere2, map, 2.0 * sphere2.areas).toarray()
        assert np.array_equal(same, default)
        assert np.allclose(doubled, 0.5 * default, rtol=1e-14, atol=0)
        assert np.allclose(
            stretch_factors(sphere2, map, 2.0 * sphere2.areas), 2.0 * stretch_factors(sphere2, map)
        )

    def test_degenerate_image(self, icosahedron):
        points = np.array(icosahedron.vertices)
        points[1] = points[0]
        with pytest.raises(DegenerateFaceError) as excinfo:
            build_stretch_laplacian(icosahedron, points)
        assert "has zero area" in str(excinfo.value)


class TestMeanValueLaplacian(object):
    def test_regular_ring_weights(self):
        fan = hexagon_fan()
        L = build_mean_value_laplacian(fan, fan.vertices)
        row = L.toarray()[0]
        weights = -row[1:] / row[0]
        assert np.allclose(weights, 1.0 / 6.0, atol=1e-15)
        assert row[1] == pytest.approx(-2.0 * np.tan(np.pi / 6.0), rel=1e-14)

    def test_convex_weights(self, sphere2, identity2):
        L = build_mean_value_laplacian(sphere2, jitter(identity2, 0.03, seed=2))
        dense = L.toarray()
        edges = sphere2.edges
        assert (dense[edges[:, 0], edges[:, 1]] < 0).all()
        assert (dense[edges[:, 1], edges[:, 0]] < 0).all()
        weights = -dense / np.diag(dense)[:, None]
        np.fill_diagonal(weights, 0.0)
        assert np.allclose(weights.sum(axis=1), 1.0, atol=1e-12)
        assert (weights >= 0).all()

    def test_not_symmetric_in_general(self, sphere2, identity2):
        L = build_mean_value_laplacian(sphere2, jitter(identity2, 0.03, seed=2))
        assert L.asymmetry() > 0

    def test_zero_length_edge(self, icosahedron):
        points = np.array(icosahedron.vertices)
        points[1] = points[0]
        with pytest.raises(DegenerateFaceError) as excinfo:
            build_mean_value_laplacian(icosahedron, points)
        assert "zero-length edge" in str(excinfo.value)


class TestLaplacianMatrix(object):
    def test_kind_checked(self):
        with pytest.raises(ValueError):
            LaplacianMatrix(sp.eye(3), "graph")

    def test_principal_submatrix(self):
        L = LaplacianMatrix(sp.csr_matrix(np.arange(16.0).reshape(4, 4)), "stretch")
        assert L.principal_submatrix((1, 2)).toarray().tolist() == [[0.0, 3.0], [12.0, 15.0]]

    def test_repr(self, icosahedron):
        L = build_stretch_laplacian(icosahedron, icosahedron.vertices)
        assert repr(L) == "LaplacianMatrix(kind='stretch', shape=(12, 12), nnz=72)"

    def test_dump(self, icosahedron, path_in):
        L = build_stretch_laplacian(icosahedron, icosahedron.vertices)
        path = path_in("stretch.mtx")
        dump_matrix(L, path)
        loaded = scipy.io.mmread(path)
        assert np.allclose(loaded.toarray(), L.toarray(), rtol=1e-15, atol=0)


class TestPreconditioner(object):
    def test_matches_dense_solve(self, icosahedron):
        L = build_stretch_laplacian(icosahedron, icosahedron.vertices)
        pre = build_preconditioner(L, (0, 1), backend="superlu")
        dense = L.principal_submatrix((0, 1)).toarray()
        g = np.random.RandomState(0).standard_normal(20)
        expected = np.concatenate([np.linalg.solve(dense, g[:10]), np.linalg.solve(dense, g[10:])])
        assert pre.size == 10
        assert np.allclose(pre.solve(g), expected, rtol=1e-10, atol=1e-12)

    def test_conjugacy_ratio(self, icosahedron):
        # gᵀM⁻¹g / g_prevᵀM⁻¹g_prev against a dense block-diagonal inverse.
        L = build_stretch_laplacian(icosahedron, icosahedron.vertices)
        pre = build_preconditioner(L, (3, 7), backend="superlu")
        block = L.principal_submatrix((3, 7)).toarray()
        dense = np.kron(np.eye(2), block)
        rng = np.random.RandomState(5)
        g_prev, g = rng.standard_normal(20), rng.standard_normal(20)
        beta = pre.solve(g).dot(g) / pre.solve(g_prev).dot(g_prev)
        oracle = g.dot(np.linalg.solve(dense, g)) / g_prev.dot(np.linalg.solve(dense, g_prev))
        assert beta == pytest.approx(oracle, rel=1e-12)

    def test_wrong_length(self, icosahedron):
        L = build_stretch_laplacian(icosahedron, icosahedron.vertices)
        pre = build_preconditioner(L, (0, 1), backend="superlu")
        with pytest.raises(ValueError):
            pre.solve(np.zeros(12))

    def test_needs_stretch_laplacian(self, icosahedron):
        L = build_mean_value_laplacian(icosahedron, icosahedron.vertices)
        with pytest.raises(ValueError) as excinfo:
            build_preconditioner(L, (0, 1))
        assert "needs a stretch Laplacian" in str(excinfo.value)

    def test_fixed_distinct(self, icosahedron):
        L = build_stretch_laplacian(icosahedron, icosahedron.vertices)
        with pytest.raises(ValueError):
            build_preconditioner(L, (2, 2))
