import numpy as np
import pytest

from saem.exceptions import (
    DegenerateFaceError,
    InvalidOptionError,
    MapMismatchError,
    NotOnSphereError,
)
from saem.mesh import TriMesh, save_mesh
from saem.sphere import (
    PoleGuard,
    SphericalCoords,
    SphericalMap,
    detect_foldings,
    face_normal,
    from_spherical,
    inverse_stereographic,
    load_map,
    save_map,
    signed_volumes,
    stereographic,
    tangent_project,
    to_spherical,
)


class TestSphericalMap(object):
    def test_rejects_off_sphere(self):
        with pytest.raises(NotOnSphereError) as excinfo:
            SphericalMap([[1.0, 0.0, 0.0], [0.0, 1.1, 0.0]])
        assert "map point 1 has norm" in str(excinfo.value)

    def test_rejects_bad_shape(self):
        with pytest.raises(NotOnSphereError):
            SphericalMap([[1.0, 0.0]])

    def test_from_points_projects(self):
        m = SphericalMap.from_points([[2.0, 0.0, 0.0], [0.0, 0.0, -0.5]])
        assert m.points.tolist() == [[1.0, 0.0, 0.0], [0.0, 0.0, -1.0]]

    def test_from_points_origin(self):
        with pytest.raises(NotOnSphereError) as excinfo:
            SphericalMap.from_points([[1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
        assert str(excinfo.value) == "point 1 is the origin"

    def test_frozen(self, identity2):
        with pytest.raises(ValueError):
            identity2.points[0, 0] = 1.0

    def test_rotated(self, identity2):
        quarter = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
        turned = identity2.rotated(quarter)
        assert np.allclose(turned.points[:, 0], -identity2.points[:, 1])
        assert np.allclose(turned.points[:, 1], identity2.points[:, 0])


class TestSphericalCoords(object):
    def test_round_trip(self, identity2):
        coords = to_spherical(identity2)
        assert np.allclose(from_spherical(coords).points, identity2.points, atol=1e-15)

    def test_ranges(self, identity2):
        coords = to_spherical(identity2)
        assert (coords.theta >= 0).all() and (coords.theta <= np.pi).all()
        assert (coords.phi > -np.pi).all() and (coords.phi <= np.pi).all()

    def test_poles_and_seam(self):
        points = np.array(
            [[0.0, 0.0, 1.0], [0.0, 0.0, -1.0], [-1.0, -0.0, 0.0], [-1.0, 0.0, 0.0]]
        )
        coords = to_spherical(points)
        assert coords.theta.tolist() == [0.0, np.pi, np.pi / 2, np.pi / 2]
        assert coords.phi.tolist() == [0.0, 0.0, np.pi, np.pi]

    def test_free_vector_keeps_fixed(self, identity2):
        coords = to_spherical(identity2, fixed=(3, 40))
        f = coords.vector()
        assert len(f) == 2 * (len(coords) - 2)
        moved = coords.with_vector(f + 0.01)
        assert moved.theta[3] == coords.theta[3]
        assert moved.phi[40] == coords.phi[40]
        assert moved.fixed == (3, 40)
        assert np.allclose(moved.vector(), f + 0.01)

    def test_split(self):
        coords = SphericalCoords([0.1, 0.2, 0.3], [1.0, 2.0, 3.0], fixed=(1,))
        assert coords.split((np.array([1.0, 2.0, 3.0]), np.array([4.0, 5.0, 6.0]))).tolist() == [
            1.0,
            3.0,
            4.0,
            6.0,
        ]

    def test_wrong_length(self):
        coords = SphericalCoords([0.1, 0.2], [1.0, 2.0])
        with pytest.raises(ValueError):
            coords.with_vector(np.zeros(3))

    def test_duplicate_fixed(self):
        with pytest.raises(ValueError):
            SphericalCoords([0.1, 0.2], [1.0, 2.0], fixed=(1, 1))


class TestFoldings(object):
    def test_identity_has_none(self, sphere2, identity2):
        assert len(detect_foldings(sphere2, identity2)) == 0
        assert (signed_volumes(identity2.points, sphere2.faces) > 0).all()

    def test_mirror_folds_everything(self, sphere2, identity2):
        mirrored = identity2.points * np.array([1.0, 1.0, -1.0])
        assert len(detect_foldings(sphere2, mirrored)) == sphere2.n_faces


class TestTangentPlane(object):
    def test_projection_lies_in_plane(self, identity2):
        n = np.array([0.3, -0.2, 0.9])
        projected = tangent_project(identity2, n)
        unit = n / np.linalg.norm(n)
        assert np.allclose((projected - unit).dot(unit), 0.0, atol=1e-14)

    def test_projection_is_idempotent(self, identity2):
        n = np.array([0.3, -0.2, 0.9])
        once = tangent_project(identity2, n)
        assert np.allclose(tangent_project(once, n), once, atol=1e-14)

    def test_face_normal(self):
        points = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
        assert np.allclose(face_normal(points, (0, 1, 2)), np.ones(3) / np.sqrt(3.0))

    def test_antipodal_face(self):
        points = np.array([[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 1e-12, 0.0]])
        with pytest.raises(DegenerateFaceError):
            face_normal(points, (0, 1, 2))


class TestStereographic(object):
    def test_south_pole_to_origin(self):
        assert stereographic(np.array([[0.0, 0.0, -1.0]]), "north").tolist() == [[0.0, 0.0]]
        assert stereographic(np.array([[0.0, 0.0, 1.0]]), "south").tolist() == [[0.0, 0.0]]

    @pytest.mark.parametrize("pole", ["north", "south"])
    def test_inverse(self, identity2, pole):
        uv = stereographic(identity2, pole)
        assert np.allclose(inverse_stereographic(uv, pole), identity2.points, atol=1e-12)

    def test_equator_is_unit_circle(self):
        uv = stereographic(np.array([[0.6, 0.8, 0.0]]))
        assert np.allclose(uv, [[0.6, 0.8]])

    def test_unknown_pole(self):
        with pytest.raises(ValueError):
            stereographic(np.array([[1.0, 0.0, 0.0]]), "east")


class TestPoleGuard(object):
    def test_same_seed_same_rotations(self):
        a, b = PoleGuard(3), PoleGuard(3)
        for _ in range(3):
            assert np.array_equal(a.next_rotation(), b.next_rotation())

    def test_rotation_is_proper(self):
        matrix = PoleGuard(0).next_rotation()
        assert np.allclose(matrix.dot(matrix.T), np.eye(3), atol=1e-12)
        assert np.linalg.det(matrix) == pytest.approx(1.0)

    def test_clears_octahedron(self, octahedron):
        points, matrix = PoleGuard(0).rotate_clear(octahedron.vertices)
        assert (np.abs(points[:, 2]) < np.cos(1e-3)).all()
        assert np.allclose(points, octahedron.vertices.dot(matrix.T))

    def test_identity_when_clear(self, identity2):
        points, matrix = PoleGuard(0).rotate_clear(identity2)
        assert points is identity2.points
        assert np.array_equal(matrix, np.eye(3))

    def test_needs_attempts(self):
        with pytest.raises(InvalidOptionError):
            PoleGuard(0, max_attempts=0)


class TestMapFiles(object):
    def test_round_trip(self, sphere2, identity2, path_in):
        path = path_in("map.obj")
        save_map(path, sphere2, identity2, header=["config abc"])
        loaded = load_map(path, sphere2)
        assert np.array_equal(loaded.points, identity2.points)

    def test_count_mismatch(self, sphere2, sphere3, identity3, path_in):
        path = path_in("map.obj")
        save_map(path, sphere3, identity3)
        with pytest.raises(MapMismatchError) as excinfo:
            load_map(path, sphere2)
        assert "map has 642 vertices and 1280 faces, mesh has 162 and 320" == str(excinfo.value)

    def test_face_mismatch(self, sphere2, identity2, path_in):
        path = path_in("map.obj")
        faces = np.array(sphere2.faces)
        faces[0] = faces[0][[1, 2, 0]]
        save_mesh(path, TriMesh(identity2.points, faces, validate=False))
        with pytest.raises(MapMismatchError) as excinfo:
            load_map(path, sphere2)
        assert str(excinfo.value) == "map face list differs from the mesh face list"

    def test_not_unit(self, sphere2, path_in):
        path = path_in("map.obj")
        save_mesh(path, sphere2.with_vertices(sphere2.vertices * 1.01))
        with pytest.raises(NotOnSphereError):
            load_map(path, sphere2)

    def test_tolerance(self, sphere2, path_in):
        path = path_in("map.obj")
        save_mesh(path, sphere2.with_vertices(sphere2.vertices * (1.0 + 1e-8)))
        assert len(load_map(path, sphere2)) == sphere2.n_vertices
