import numpy as np
import pytest

from saem import generate
from saem.mesh import validate_mesh


class TestPlatonic(object):
    def test_icosahedron(self, icosahedron):
        assert (icosahedron.n_vertices, icosahedron.n_faces) == (12, 20)
        assert np.allclose(np.linalg.norm(icosahedron.vertices, axis=1), 1.0)
        assert icosahedron.euler_characteristic == 2

    def test_octahedron(self, octahedron):
        assert (octahedron.n_vertices, octahedron.n_faces) == (6, 8)
        assert octahedron.euler_characteristic == 2


class TestIcosphere(object):
    @pytest.mark.parametrize("level", [0, 1, 2, 3])
    def test_counts(self, level):
        mesh = generate.icosphere(level)
        assert mesh.n_vertices == 10 * 4 ** level + 2
        assert mesh.n_faces == 20 * 4 ** level
        assert mesh.euler_characteristic == 2

    def test_unit_and_outward(self, sphere2):
        assert np.allclose(np.linalg.norm(sphere2.vertices, axis=1), 1.0, atol=1e-15)
        p = sphere2.vertices
        f = sphere2.faces
        volumes = np.einsum("ij,ij->i", p[f[:, 0]], np.cross(p[f[:, 1]], p[f[:, 2]]))
        assert (volumes > 0).all()

    def test_deterministic(self):
        a, b = generate.icosphere(2), generate.icosphere(2)
        assert np.array_equal(a.vertices, b.vertices)
        assert np.array_equal(a.faces, b.faces)

    def test_subdivide_keeps_old_vertices(self, icosahedron):
        vertices, faces = generate.subdivide(icosahedron.vertices, icosahedron.faces)
        assert np.array_equal(vertices[:12], icosahedron.vertices)
        assert len(vertices) == 42
        assert len(faces) == 80

    @pytest.mark.parametrize("level", [-1, 8, 2.0, True])
    def test_bad_level(self, level):
        with pytest.raises(ValueError):
            generate.icosphere(level)


class TestShapes(object):
    def test_ellipsoid(self):
        mesh = generate.ellipsoid(3, (1.0, 1.0, 1.5))
        validate_mesh(mesh)
        assert mesh.euler_characteristic == 2
        assert np.isclose(mesh.vertices[:, 2].max(), 1.5, rtol=0.05)

    @pytest.mark.parametrize("axes", [(1.0, 1.0), (1.0, 0.0, 1.0), (1.0, -1.0, 2.0)])
    def test_bad_axes(self, axes):
        with pytest.raises(ValueError):
            generate.ellipsoid(1, axes)

    def test_bumpy_radius_range(self):
        mesh = generate.bumpy(3, 0.3)
        radius = np.linalg.norm(mesh.vertices, axis=1)
        assert radius.min() >= 0.7 - 1e-12
        assert radius.max() <= 1.3 + 1e-12
        # Axis directions carry the full bump.
        assert radius.max() == pytest.approx(1.3)

    def test_bumpy_zero_amplitude_is_sphere(self, sphere2):
        assert np.array_equal(generate.bumpy(2, 0.0).vertices, sphere2.vertices)

    @pytest.mark.parametrize("amplitude", [-0.1, 1.0])
    def test_bad_amplitude(self, amplitude):
        with pytest.raises(ValueError) as excinfo:
            generate.bumpy(1, amplitude)
        assert "but it must lie in [0, 1)" in str(excinfo.value)
