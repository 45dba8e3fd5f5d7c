"""
Triangle-mesh data model, OBJ/OFF file I/O, topological validation and the
geometric primitives shared by the rest of the package.
"""
from __future__ import absolute_import

import logging
import os
import warnings

import numpy as np
import scipy.sparse as sp

from .exceptions import (
    DegenerateFaceError,
    FaceAdjacencyWarning,
    InvalidMeshError,
    MeshIOError,
    MeshParseError,
    PointOutsideFaceError,
)

log = logging.getLogger(__name__)

FORMATS = ("obj", "off")
_OFF_HEADERS = ("OFF", "COFF", "NOFF", "CNOFF")

# Relative tolerances for barycentric interpolation.
PLANE_TOLERANCE = 1e-9
INSIDE_TOLERANCE = 1e-9


def face_areas(points, faces):
    """ Unsigned area of every face of ``faces`` laid out on ``points``.

    :param points: ``(n, 3)`` array of vertex positions.
    :param faces: ``(m, 3)`` integer array of vertex indices.
    :rtype: ``(m,)`` float array
    """
    a = points[faces[:, 0]]
    b = points[faces[:, 1]]
    c = points[faces[:, 2]]
    return 0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=1)


class TriMesh(object):
    """ Closed, consistently oriented, genus-zero triangle mesh.

    Vertex and face arrays are copied on construction and frozen, so a mesh
    can be shared freely between threads.

    :param vertices:
        ``(n, 3)`` array-like of vertex positions.

    :param faces:
        ``(m, 3)`` array-like of 0-based vertex indices. Each face is
        oriented so that its normal points out of the enclosed volume.

    :param validate:
        Check every mesh invariant (see :func:`validate_mesh`). Only pass
        ``False`` for fragments used in tests or for meshes known to be
        valid already.
    """

    def __init__(self, vertices, faces, validate=True):
        vertices = np.array(vertices, dtype=np.float64)
        faces = np.array(faces, dtype=np.int64)
        if faces.size == 0:
            faces = faces.reshape(0, 3)
        if vertices.ndim != 2 or vertices.shape[1] != 3:
            raise InvalidMeshError(
                "shape", "vertices must be an (n, 3) array, got %r" % (vertices.shape,)
            )
        if faces.ndim != 2 or faces.shape[1] != 3:
            raise InvalidMeshError(
                "shape", "faces must be an (m, 3) array, got %r" % (faces.shape,)
            )
        vertices.flags.writeable = False
        faces.flags.writeable = False
        self.vertices = vertices
        self.faces = faces
        self._edges = None
        self._rings = None
        self._areas = None
        if validate:
            validate_mesh(self)

    def __repr__(self):
        return "%s(n_vertices=%d, n_faces=%d)" % (
            type(self).__name__,
            self.n_vertices,
            self.n_faces,
        )

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_faces(self):
        return len(self.faces)

    @property
    def edges(self):
        """ Undirected edges as an ``(E, 2)`` array, ``i < j``, sorted lexicographically. """
        if self._edges is None:
            self._edges = _unique_edges(self.faces, self.n_vertices)
        return self._edges

    @property
    def n_edges(self):
        return len(self.edges)

    @property
    def euler_characteristic(self):
        return self.n_vertices - self.n_edges + self.n_faces

    @property
    def areas(self):
        """ Per-face areas, computed once. """
        if self._areas is None:
            areas = face_areas(self.vertices, self.faces)
            areas.flags.writeable = False
            self._areas = areas
        return self._areas

    @property
    def total_area(self):
        return float(np.sum(self.areas))

    @property
    def rings(self):
        """ List of ``(neighbors, faces)`` pairs, one per vertex; see :func:`one_ring`. """
        if self._rings is None:
            self._rings = _build_rings(self.faces, self.n_vertices)
        return self._rings

    def adjacency(self):
        """ Symmetric boolean vertex adjacency as a CSR matrix. """
        n = self.n_vertices
        i, j = self.edges[:, 0], self.edges[:, 1]
        data = np.ones(2 * len(i), dtype=np.int8)
        return sp.csr_matrix(
            (data, (np.concatenate([i, j]), np.concatenate([j, i]))), shape=(n, n)
        )

    def with_vertices(self, vertices):
        """ Same connectivity, new positions. Topology checks are not repeated. """
        other = type(self)(vertices, self.faces, validate=False)
        if other.n_vertices != self.n_vertices:
            raise InvalidMeshError(
                "shape",
                "expected %d vertices, got %d" % (self.n_vertices, other.n_vertices),
            )
        other._edges = self._edges
        other._rings = self._rings
        return other


def _unique_edges(faces, n):
    a = faces.ravel()
    b = np.roll(faces, -1, axis=1).ravel()
    lo = np.minimum(a, b)
    hi = np.maximum(a, b)
    keys = np.unique(lo * n + hi)
    return np.column_stack([keys // n, keys % n])


def _build_rings(faces, n):
    # For face (a, b, c) the ring of ``a`` contains the directed edge b -> c.
    m = len(faces)
    corner = faces.ravel()
    succ = np.roll(faces, -1, axis=1).ravel()
    pred = np.roll(faces, 1, axis=1).ravel()
    face_id = np.repeat(np.arange(m), 3)

    order = np.argsort(corner, kind="stable")
    starts = np.searchsorted(corner[order], np.arange(n + 1))

    rings = []
    for v in range(n):
        idx = order[starts[v] : starts[v + 1]]
        if len(idx) == 0:
            raise InvalidMeshError(
                "isolated", "vertex %d is not referenced by any face" % v
            )
        step = {}
        for start, end, f in zip(succ[idx].tolist(), pred[idx].tolist(), face_id[idx].tolist()):
            if start in step:
                raise InvalidMeshError("manifold", "non-manifold vertex %d" % v)
            step[start] = (end, f)

        first = int(succ[idx[0]])
        neighbors = []
        ring_faces = []
        current = first
        while True:
            neighbors.append(current)
            try:
                current, f = step[current]
            except KeyError:
                raise InvalidMeshError(
                    "closed", "boundary at vertex %d: mesh is not closed" % v
                )
            ring_faces.append(f)
            if current == first or len(neighbors) > len(idx):
                break
        if current != first or len(neighbors) != len(idx):
            raise InvalidMeshError("manifold", "non-manifold vertex %d" % v)
        rings.append(
            (np.array(neighbors, dtype=np.int64), np.array(ring_faces, dtype=np.int64))
        )
    return rings


def validate_mesh(mesh, warn=True):
    """ Check every :class:`TriMesh` invariant.

    In order: index ranges, repeated indices, unreferenced vertices, edge
    manifoldness, closedness, orientation consistency, vertex manifoldness,
    Euler characteristic 2, and strictly positive face areas.

    If ``warn`` is true, a :class:`~saem.exceptions.FaceAdjacencyWarning` is
    issued for faces whose three vertices are all adjacent to one common
    outside vertex. Those faces are only flagged.

    :raises saem.exceptions.InvalidMeshError: naming the first violated invariant.
    """
    vertices, faces = mesh.vertices, mesh.faces
    n, m = len(vertices), len(faces)

    if m == 0:
        raise InvalidMeshError("closed", "mesh has no faces")
    if not np.all(np.isfinite(vertices)):
        raise InvalidMeshError("finite", "vertex coordinates must be finite")
    if faces.min() < 0 or faces.max() >= n:
        bad = int(np.flatnonzero((faces < 0).any(axis=1) | (faces >= n).any(axis=1))[0])
        raise InvalidMeshError(
            "indices", "face %d references a vertex index out of range" % bad
        )
    repeated = (
        (faces[:, 0] == faces[:, 1])
        | (faces[:, 1] == faces[:, 2])
        | (faces[:, 2] == faces[:, 0])
    )
    if repeated.any():
        raise InvalidMeshError(
            "indices", "face %d repeats a vertex" % int(np.flatnonzero(repeated)[0])
        )
    unused = np.flatnonzero(np.bincount(faces.ravel(), minlength=n) == 0)
    if len(unused):
        raise InvalidMeshError(
            "isolated", "vertex %d is not referenced by any face" % int(unused[0])
        )

    a = faces.ravel()
    b = np.roll(faces, -1, axis=1).ravel()
    lo = np.minimum(a, b)
    hi = np.maximum(a, b)
    keys, counts = np.unique(lo * n + hi, return_counts=True)
    if (counts > 2).any():
        key = int(keys[np.flatnonzero(counts > 2)[0]])
        raise InvalidMeshError(
            "manifold",
            "non-manifold edge (%d, %d) shared by %d faces"
            % (key // n, key % n, int(counts[counts > 2][0])),
        )
    if (counts < 2).any():
        key = int(keys[np.flatnonzero(counts < 2)[0]])
        raise InvalidMeshError(
            "closed", "boundary edge (%d, %d): mesh is not closed" % (key // n, key % n)
        )
    directed, dcounts = np.unique(a * n + b, return_counts=True)
    if (dcounts > 1).any():
        key = int(directed[np.flatnonzero(dcounts > 1)[0]])
        raise InvalidMeshError(
            "orientation",
            "inconsistent orientation at edge (%d, %d)" % (key // n, key % n),
        )

    # Walks every vertex ring; raises on pinched vertices.
    mesh.rings

    chi = n - len(keys) + m
    if chi != 2:
        raise InvalidMeshError("euler", u"Euler characteristic %d ≠ 2" % chi)

    areas = mesh.areas
    floor = np.finfo(np.float64).eps * max(float(areas.max()), np.finfo(np.float64).tiny)
    if (areas <= floor).any():
        raise InvalidMeshError(
            "area", "face %d is degenerate (zero area)" % int(np.flatnonzero(areas <= floor)[0])
        )

    if warn:
        flagged = capped_faces(mesh)
        if len(flagged):
            warnings.warn(
                "%d face(s) have all three vertices adjacent to a common outside "
                "vertex (first: face %d)" % (len(flagged), flagged[0]),
                FaceAdjacencyWarning,
            )
    log.debug("Validated %r", mesh)


def capped_faces(mesh):
    """ Faces whose three vertices share a common neighbour outside the face. """
    adj = mesh.adjacency()
    faces = mesh.faces
    common = adj[faces[:, 0]].multiply(adj[faces[:, 1]]).multiply(adj[faces[:, 2]])
    return np.flatnonzero(np.asarray(common.sum(axis=1)).ravel() > 0)


def face_area(mesh, face):
    """ Area ½‖(v_j − v_i) × (v_k − v_i)‖ of one face. Degenerate faces give 0. """
    i, j, k = mesh.faces[face]
    v = mesh.vertices
    return 0.5 * float(np.linalg.norm(np.cross(v[j] - v[i], v[k] - v[i])))


def one_ring(mesh, v):
    """ Cyclically ordered neighbours of vertex ``v`` and its incident faces.

    ``faces[t]`` is the face containing ``v``, ``neighbors[t]`` and
    ``neighbors[t + 1]`` in that (outward) orientation.
    """
    if not 0 <= v < mesh.n_vertices:
        raise IndexError("vertex %d out of range" % v)
    return mesh.rings[v]


def normalize_area(mesh):
    """ Scale ``mesh`` uniformly so that its total area is 4π.

    :raises saem.exceptions.InvalidMeshError: if the total area is not
        positive and finite.
    """
    total = mesh.total_area
    if not (np.isfinite(total) and total > 0):
        raise InvalidMeshError("area", "total area %r cannot be normalized" % total)
    scale = np.sqrt(4.0 * np.pi / total)
    log.debug("Normalizing area %.17g by scale %.17g", total, scale)
    return mesh.with_vertices(mesh.vertices * scale)


def barycentric_map(mesh, map, face, point):
    """ Image of a point on ``face`` under the piecewise-affine map.

    :param map: a :class:`~saem.sphere.SphericalMap` or ``(n, 3)`` array of
        vertex images.
    :param point: 3-vector lying on the face.
    :raises saem.exceptions.PointOutsideFaceError: if the point is off the
        face plane or outside the triangle.
    """
    images = getattr(map, "points", map)
    i, j, k = mesh.faces[face]
    vi, vj, vk = mesh.vertices[i], mesh.vertices[j], mesh.vertices[k]
    p = np.asarray(point, dtype=np.float64)

    normal = np.cross(vj - vi, vk - vi)
    twice_area = np.linalg.norm(normal)
    if twice_area == 0:
        raise DegenerateFaceError("face %d has zero area" % face)
    unit = normal / twice_area

    diameter = max(
        np.linalg.norm(vj - vi), np.linalg.norm(vk - vj), np.linalg.norm(vi - vk)
    )
    offset = float(np.dot(p - vi, unit))
    if abs(offset) > PLANE_TOLERANCE * diameter:
        raise PointOutsideFaceError(
            "point is %.3g away from the plane of face %d" % (offset, face)
        )

    sub = np.array(
        [
            np.dot(np.cross(vj - p, vk - p), unit),
            np.dot(np.cross(p - vi, vk - vi), unit),
            np.dot(np.cross(vj - vi, p - vi), unit),
        ]
    )
    if sub.min() < -INSIDE_TOLERANCE * twice_area:
        raise PointOutsideFaceError("point lies outside face %d" % face)
    weights = sub / twice_area
    return weights.dot(images[[i, j, k]])


# File I/O


def _resolve_format(path, format):
    if format not in ("auto",) + FORMATS:
        raise ValueError("unknown mesh format %r" % (format,))
    if format != "auto":
        return format
    ext = os.path.splitext(str(path))[1].lower().lstrip(".")
    if ext in FORMATS:
        return ext
    return None


def read_mesh_arrays(path, format="auto"):
    """ Parse an OBJ or OFF file into ``(vertices, faces)`` arrays without
    validating the topology.
    """
    fmt = _resolve_format(path, format)
    try:
        with open(path, "r") as fp:
            text = fp.read()
    except (IOError, OSError) as e:
        raise MeshIOError(path, getattr(e, "strerror", None) or str(e))

    lines = text.splitlines()
    if fmt is None:
        fmt = "obj"
        for line in lines:
            tokens = line.split("#", 1)[0].split()
            if tokens:
                if tokens[0] in _OFF_HEADERS:
                    fmt = "off"
                break

    if fmt == "off":
        vertices, faces = _parse_off(path, lines)
    else:
        vertices, faces = _parse_obj(path, lines)
    log.debug("Read %d vertices and %d faces from %s", len(vertices), len(faces), path)
    return (
        np.array(vertices, dtype=np.float64).reshape(-1, 3),
        np.array(faces, dtype=np.int64).reshape(-1, 3),
    )


def _parse_obj(path, lines):
    vertices = []
    faces = []
    for lineno, line in enumerate(lines, 1):
        tokens = line.split("#", 1)[0].split()
        if not tokens:
            continue
        keyword = tokens[0]
        if keyword == "v":
            if len(tokens) < 4:
                raise MeshParseError(path, lineno, "vertex record needs three coordinates")
            try:
                vertices.append([float(x) for x in tokens[1:4]])
            except ValueError:
                raise MeshParseError(path, lineno, "invalid vertex coordinate")
        elif keyword == "f":
            refs = tokens[1:]
            if len(refs) > 3:
                raise MeshParseError(
                    path,
                    lineno,
                    "polygonal face with %d vertices (only triangles are supported)"
                    % len(refs),
                )
            if len(refs) < 3:
                raise MeshParseError(path, lineno, "face record needs three vertices")
            face = []
            for ref in refs:
                try:
                    index = int(ref.split("/", 1)[0])
                except ValueError:
                    raise MeshParseError(path, lineno, "invalid face index %r" % ref)
                if index > 0:
                    face.append(index - 1)
                elif index < 0:
                    face.append(len(vertices) + index)
                else:
                    raise MeshParseError(path, lineno, "face index 0 (indices are 1-based)")
            faces.append(face)
        # vt, vn, usemtl, mtllib, o, g, s and the rest carry nothing we use.
    return vertices, faces


def _parse_off(path, lines):
    records = []
    for lineno, line in enumerate(lines, 1):
        tokens = line.split("#", 1)[0].split()
        if tokens:
            records.append((lineno, tokens))
    if not records or records[0][1][0] not in _OFF_HEADERS:
        raise MeshParseError(path, records[0][0] if records else None, "missing OFF header")

    lineno, counts = records[0][0], records[0][1][1:]
    pos = 1
    if not counts:
        if len(records) < 2:
            raise MeshParseError(path, None, "missing OFF element counts")
        lineno, counts = records[1]
        pos = 2
    try:
        nv, nf = int(counts[0]), int(counts[1])
    except (ValueError, IndexError):
        raise MeshParseError(path, lineno, "invalid OFF element counts")

    if len(records) < pos + nv + nf:
        raise MeshParseError(
            path,
            None,
            "unexpected end of file: expected %d vertices and %d faces" % (nv, nf),
        )

    vertices = []
    for lineno, tokens in records[pos : pos + nv]:
        try:
            vertices.append([float(x) for x in tokens[:3]])
        except ValueError:
            raise MeshParseError(path, lineno, "invalid vertex coordinate")
        if len(tokens) < 3:
            raise MeshParseError(path, lineno, "vertex record needs three coordinates")

    faces = []
    for lineno, tokens in records[pos + nv : pos + nv + nf]:
        try:
            count = int(tokens[0])
            face = [int(x) for x in tokens[1 : 1 + count]]
        except ValueError:
            raise MeshParseError(path, lineno, "invalid face record")
        if count != 3:
            raise MeshParseError(
                path,
                lineno,
                "polygonal face with %d vertices (only triangles are supported)" % count,
            )
        if len(face) != 3:
            raise MeshParseError(path, lineno, "face record needs three vertices")
        faces.append(face)
    return vertices, faces


def load_mesh(path, format="auto"):
    """ Read and validate a mesh from an OBJ or OFF file.

    :param format: ``"obj"``, ``"off"`` or ``"auto"`` (by file extension,
        then by sniffing for an ``OFF`` header).
    :raises saem.exceptions.MeshIOError: if the file cannot be read.
    :raises saem.exceptions.MeshParseError: if it does not parse.
    :raises saem.exceptions.InvalidMeshError: if it is not a closed, oriented
        genus-zero surface.
    """
    vertices, faces = read_mesh_arrays(path, format)
    return TriMesh(vertices, faces)


def write_mesh_arrays(path, vertices, faces, format="auto", header=()):
    """ Write vertex and face arrays as OBJ or OFF with 17 significant digits.

    ``header`` lines are written as ``#`` comments.
    """
    fmt = _resolve_format(path, format) or "obj"
    comments = ["# %s" % line for line in header]
    if fmt == "off":
        out = ["OFF"] + comments + ["%d %d 0" % (len(vertices), len(faces))]
        out.extend("%.17g %.17g %.17g" % tuple(v) for v in vertices.tolist())
        out.extend("3 %d %d %d" % tuple(f) for f in faces.tolist())
    else:
        out = comments
        out.extend("v %.17g %.17g %.17g" % tuple(v) for v in vertices.tolist())
        out.extend("f %d %d %d" % (a + 1, b + 1, c + 1) for a, b, c in faces.tolist())
    try:
        with open(path, "w") as fp:
            fp.write("\n".join(out))
            fp.write("\n")
    except (IOError, OSError) as e:
        raise MeshIOError(path, getattr(e, "strerror", None) or str(e))
    log.debug("Wrote %d vertices and %d faces to %s", len(vertices), len(faces), path)


def save_mesh(path, mesh, format="auto", header=()):
    """ Write ``mesh`` to ``path``; see :func:`write_mesh_arrays`. """
    write_mesh_arrays(path, mesh.vertices, mesh.faces, format=format, header=header)
