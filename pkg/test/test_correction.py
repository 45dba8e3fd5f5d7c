import numpy as np
import pytest
from scipy.sparse.csgraph import shortest_path

from saem import generate
from saem.correction import (
    CorrectionOptions,
    correct_foldings,
    patch_is_convex,
    unfold_one,
)
from saem.exceptions import InvalidOptionError, ResidualFoldWarning
from saem.operators import build_mean_value_laplacian
from saem.report import area_ratios
from saem.sphere import PoleGuard, SphericalMap, detect_foldings, signed_volumes

from . import overshoot


def overshoot_many(map, mesh, vertices):
    for v in vertices:
        map = overshoot(map, mesh, v)
    return map


def spread_vertices(mesh, count, hops):
    """Greedily pick ``count`` vertices at least ``hops`` edges apart."""
    distances = shortest_path(mesh.adjacency(), directed=False, unweighted=True)
    chosen = []
    for v in range(mesh.n_vertices):
        if all(distances[v, u] >= hops for u in chosen):
            chosen.append(v)
            if len(chosen) == count:
                break
    return chosen


class TestCorrectionOptions(object):
    def test_default(self):
        assert CorrectionOptions().max_rounds == 100
        assert repr(CorrectionOptions(3)) == "CorrectionOptions(max_rounds=3)"

    @pytest.mark.parametrize("value", [0, -4])
    def test_at_least_one(self, value):
        with pytest.raises(InvalidOptionError) as excinfo:
            CorrectionOptions(max_rounds=value)
        assert "max_rounds was %d, but it must be at least 1." % value == str(excinfo.value)

    def test_integer(self):
        with pytest.raises(InvalidOptionError):
            CorrectionOptions(max_rounds=2.0)

    def test_new(self):
        assert CorrectionOptions().new(max_rounds=5).max_rounds == 5


class TestCorrectFoldings(object):
    def test_fold_free_is_untouched(self, sphere3, identity3):
        result = correct_foldings(sphere3, identity3)
        assert result.map is identity3
        assert result.rounds == 0
        assert result.remaining == 0
        assert result.fold_history == [0]

    def test_single_vertex(self, sphere3, identity3):
        folded = overshoot(identity3, sphere3, 100)
        before = len(detect_foldings(sphere3, folded))
        assert before > 0
        result = correct_foldings(sphere3, folded)
        assert result.remaining == 0
        assert result.fold_history[0] == before
        assert result.fold_history[-1] == 0
        assert len(result.fold_history) == result.rounds + 1
        assert len(detect_foldings(sphere3, result.map)) == 0

    def test_many_vertices(self, sphere3, identity3):
        # The original icosahedron corners lie far apart on every icosphere.
        folded = overshoot_many(identity3, sphere3, range(12))
        assert len(detect_foldings(sphere3, folded)) >= 12
        result = correct_foldings(sphere3, folded)
        assert result.remaining == 0
        assert result.rounds <= 100

    def test_unit_norms(self, sphere3, identity3):
        result = correct_foldings(sphere3, overshoot(identity3, sphere3, 200))
        assert np.allclose(np.linalg.norm(result.map.points, axis=1), 1.0, atol=1e-12)

    def test_untouched_vertices_bitwise(self, sphere3, identity3):
        folded = overshoot_many(identity3, sphere3, range(12))
        touched = np.unique(sphere3.faces[detect_foldings(sphere3, folded)])
        result = correct_foldings(sphere3, folded, CorrectionOptions(max_rounds=1))
        others = np.setdiff1d(np.arange(sphere3.n_vertices), touched)
        assert np.array_equal(result.map.points[others], folded.points[others])

    def test_area_distortion_not_worse(self, sphere3, identity3):
        folded = overshoot(identity3, sphere3, 300)
        result = correct_foldings(sphere3, folded)
        before = area_ratios(sphere3, folded).std()
        after = area_ratios(sphere3, result.map).std()
        assert after <= 1.05 * before

    @pytest.mark.timeout(120)
    def test_hundred_folds(self):
        mesh = generate.icosphere(4)
        points, _ = PoleGuard(3).rotate_clear(mesh.vertices)
        identity = SphericalMap(points)
        # Every vertex lies within four hops of a pick, so 40 picks exist.
        vertices = spread_vertices(mesh, 40, 5)
        assert len(vertices) == 40
        folded = overshoot_many(identity, mesh, vertices)
        before = len(detect_foldings(mesh, folded))
        assert before >= 80
        result = correct_foldings(mesh, folded)
        assert result.fold_history[0] == before
        assert result.remaining == 0
        assert result.rounds <= 100
        assert len(detect_foldings(mesh, result.map)) == 0
        assert np.allclose(np.linalg.norm(result.map.points, axis=1), 1.0, atol=1e-12)
        before_sd = area_ratios(mesh, folded).std()
        assert area_ratios(mesh, result.map).std() <= 1.05 * before_sd

    def test_residual_warning(self, sphere3, identity3):
        mirrored = SphericalMap(identity3.points * np.array([1.0, 1.0, -1.0]))
        with pytest.warns(ResidualFoldWarning):
            result = correct_foldings(sphere3, mirrored, CorrectionOptions(max_rounds=1))
        assert result.rounds == 1
        assert result.remaining > 0


class TestUnfoldOne(object):
    def test_unfolds_face(self, sphere3, identity3):
        folded = overshoot(identity3, sphere3, 100)
        face = int(detect_foldings(sphere3, folded)[0])
        points = np.array(folded.points)
        laplacian = build_mean_value_laplacian(sphere3, points)
        solved = unfold_one(sphere3, points, laplacian, face)
        assert solved.shape == (3, 3)
        assert np.allclose(np.linalg.norm(solved, axis=1), 1.0, atol=1e-15)
        points[sphere3.faces[face]] = solved
        assert signed_volumes(points, sphere3.faces[face : face + 1])[0] > 0

    def test_does_not_modify_input(self, sphere3, identity3):
        folded = overshoot(identity3, sphere3, 100)
        face = int(detect_foldings(sphere3, folded)[0])
        points = np.array(folded.points)
        unfold_one(sphere3, points, build_mean_value_laplacian(sphere3, points), face)
        assert np.array_equal(points, folded.points)


class TestPatchConvexity(object):
    def test_regular_patch(self, sphere3, identity3):
        assert patch_is_convex(sphere3, identity3.points, 0)

    def test_dented_patch(self, sphere3, identity3):
        corners = list(sphere3.faces[0])
        patch = np.unique(np.concatenate([sphere3.rings[v][0] for v in corners]))
        outer = [int(v) for v in patch if v not in corners][0]
        points = np.array(identity3.points)
        centre = points[corners].mean(axis=0)
        points[outer] = centre / np.linalg.norm(centre)
        assert not patch_is_convex(sphere3, points, 0)
