"""Closed triangulated surfaces, tetrahedral meshes, and their file formats.

Surfaces are validated on construction: every edge must be shared by exactly
two triangles traversed in opposite directions, and the signed enclosed
volume must be positive (outward normals).
"""

from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
import math

import numpy as np
from scipy.spatial import cKDTree

from . import kernels
from ._closest_py import closest_point_on_triangles


class MeshError(ValueError):
    pass


class ParseError(MeshError):
    def __init__(self, message, line=None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class OrientationError(MeshError):
    """Surface is open, inconsistently oriented, or encloses negative volume."""


class DegenerateMesh(MeshError):
    pass


@dataclass(eq=False)
class TriangulatedSurface:
    vertices: np.ndarray
    triangles: np.ndarray
    validate: bool = field(default=True, repr=False)

    def __post_init__(self):
        self.vertices = np.ascontiguousarray(self.vertices, dtype=float)
        self.triangles = np.ascontiguousarray(self.triangles, dtype=np.int64)
        if self.vertices.ndim != 2 or self.vertices.shape[1] != 3:
            raise MeshError("vertices must have shape (n, 3)")
        if self.triangles.ndim != 2 or self.triangles.shape[1] != 3:
            raise MeshError("triangles must have shape (m, 3)")
        if self.triangles.size and (self.triangles.min() < 0 or self.triangles.max() >= len(self.vertices)):
            raise MeshError("triangle index out of range")
        p = self.vertices[self.triangles]
        cr = np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
        twice = np.linalg.norm(cr, axis=1)
        if np.any(twice <= 0):
            raise DegenerateMesh("zero-area triangle")
        self.areas = 0.5 * twice
        self.normals = cr / twice[:, None]
        self.centroids = p.mean(axis=1)
        edges = np.stack([p[:, 1] - p[:, 0], p[:, 2] - p[:, 1], p[:, 0] - p[:, 2]], axis=1)
        self.diameters = np.linalg.norm(edges, axis=2).max(axis=1)
        self.radii = np.linalg.norm(p - self.centroids[:, None], axis=2).max(axis=1)
        for arr in (self.vertices, self.triangles, self.areas, self.normals, self.centroids):
            arr.setflags(write=False)
        if self.validate:
            self.check()
        self._tree = cKDTree(self.centroids)

    @property
    def n_triangles(self):
        return len(self.triangles)

    @property
    def h(self):
        """Mesh size: the largest triangle diameter."""
        return float(self.diameters.max())

    @property
    def area(self):
        return float(self.areas.sum())

    @cached_property
    def volume(self):
        """Signed enclosed volume (positive for outward orientation)."""
        p = self.vertices[self.triangles]
        return float(np.einsum("ij,ij->i", p[:, 0], np.cross(p[:, 1], p[:, 2])).sum() / 6.0)

    @cached_property
    def center(self):
        return self.vertices.mean(axis=0)

    @cached_property
    def diameter(self):
        v = self.vertices
        return float(np.linalg.norm(v.max(axis=0) - v.min(axis=0)))

    @cached_property
    def circumradius(self):
        return float(np.linalg.norm(self.vertices - self.center, axis=1).max())

    @cached_property
    def inradius(self):
        """Distance from the vertex centroid to the surface."""
        return float(self.closest_point(self.center[None])[1][0])

    def check(self):
        t = self.triangles
        directed = Counter()
        for a, b in np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]]):
            directed[(int(a), int(b))] += 1
        for (a, b), n in directed.items():
            if n != 1:
                raise OrientationError(f"edge ({a}, {b}) traversed {n} times in the same direction")
            if directed.get((b, a), 0) != 1:
                raise OrientationError(f"edge ({a}, {b}) is not shared by exactly two triangles")
        if self.volume <= 0:
            raise OrientationError(f"signed volume {self.volume:.6g} is not positive (inward normals)")

    def closest_point(self, x, k=8):
        """Exact closest points on the surface and their distances.

        Candidates are the triangles with the ``k`` nearest centroids.  A
        query is certified once the ``k``-th centroid is farther than the best
        distance plus the largest centroid-to-corner radius; uncertified
        queries retry with ``4 k`` candidates, then with every triangle.
        """
        x = np.atleast_2d(np.asarray(x, dtype=float))
        shape = x.shape[:-1]
        x = np.ascontiguousarray(x.reshape(-1, 3))
        point = np.empty_like(x)
        dist = np.empty(len(x))
        tri = np.empty(len(x), dtype=np.int64)
        rmax = self.radii.max()
        todo = np.arange(len(x))
        while len(todo):
            kk = min(k, self.n_triangles)
            xs = x[todo]
            dc, idx = self._tree.query(xs, k=kk)
            idx = np.ascontiguousarray(idx.reshape(len(xs), kk), dtype=np.int64)
            dc = dc.reshape(len(xs), kk)
            p, d, t = kernels.closest_among(xs, self.vertices, self.triangles, idx)
            point[todo], dist[todo], tri[todo] = p, d, t
            if kk == self.n_triangles:
                break
            todo = todo[dc[:, -1] - rmax < d]
            k = self.n_triangles if k >= 512 else 4 * k
        return point.reshape(shape + (3,)), dist.reshape(shape), tri.reshape(shape)

    def nearest_nodes(self, x, k):
        d, i = self._tree.query(np.asarray(x, dtype=float), k=k)
        return d, i

    def jittered(self, fraction, seed=0):
        """Copy with vertices displaced randomly by up to ``fraction * h``."""
        rng = np.random.default_rng(seed)
        step = fraction * self.h * rng.uniform(-1, 1, self.vertices.shape) / math.sqrt(3)
        return TriangulatedSurface(self.vertices + step, self.triangles)


@dataclass(eq=False)
class TetrahedralMesh:
    vertices: np.ndarray
    tets: np.ndarray

    def __post_init__(self):
        self.vertices = np.ascontiguousarray(self.vertices, dtype=float)
        self.tets = np.ascontiguousarray(self.tets, dtype=np.int64)
        if self.tets.ndim != 2 or self.tets.shape[1] != 4:
            raise MeshError("tets must have shape (m, 4)")
        p = self.vertices[self.tets]
        self.volumes = tet_volumes(p)
        if np.any(self.volumes <= 0):
            raise OrientationError("tetrahedron with non-positive volume")
        self.centroids = p.mean(axis=1)
        self.radii = np.linalg.norm(p - self.centroids[:, None], axis=2).max(axis=1)

    @property
    def n_cells(self):
        return len(self.tets)

    @property
    def volume(self):
        return float(self.volumes.sum())

    @property
    def h(self):
        return float(2 * self.radii.max())

    def boundary_faces(self):
        """Faces used by exactly one cell, oriented outward."""
        local = np.array([(1, 2, 3), (0, 3, 2), (0, 1, 3), (0, 2, 1)])
        tri = self.tets[:, local].reshape(-1, 3)
        _, inv, counts = np.unique(np.sort(tri, axis=1), axis=0, return_inverse=True, return_counts=True)
        return tri[counts[inv.ravel()] == 1]

    def matches_surface(self, surface, tol=1e-9):
        """True when the boundary faces reproduce ``surface`` (same triangles up to rotation)."""
        bf = self.boundary_faces()
        if len(bf) != surface.n_triangles:
            return False
        ours = np.sort(np.round(self.vertices[bf].mean(axis=1) / tol).astype(np.int64), axis=0)
        theirs = np.sort(np.round(surface.centroids / tol).astype(np.int64), axis=0)
        return bool(np.all(np.abs(ours - theirs) <= 1))


def tet_volumes(p):
    """Signed volumes of tetrahedra given as ``(..., 4, 3)`` corner arrays."""
    a = p[..., 1, :] - p[..., 0, :]
    b = p[..., 2, :] - p[..., 0, :]
    c = p[..., 3, :] - p[..., 0, :]
    return np.einsum("...i,...i", a, np.cross(b, c)) / 6.0


def subdivide_tets(p):
    """Eight-way (red) refinement of tetrahedra ``(m, 4, 3)`` -> ``(8m, 4, 3)``."""
    v0, v1, v2, v3 = p[:, 0], p[:, 1], p[:, 2], p[:, 3]
    m01, m02, m03 = (v0 + v1) / 2, (v0 + v2) / 2, (v0 + v3) / 2
    m12, m13, m23 = (v1 + v2) / 2, (v1 + v3) / 2, (v2 + v3) / 2
    children = [
        (v0, m01, m02, m03),
        (m01, v1, m12, m13),
        (m02, m12, v2, m23),
        (m03, m13, m23, v3),
        (m01, m02, m03, m13),
        (m01, m02, m12, m13),
        (m02, m03, m13, m23),
        (m02, m12, m13, m23),
    ]
    out = np.stack([np.stack(c, axis=1) for c in children], axis=1).reshape(-1, 4, 3)
    vol = tet_volumes(out)
    flip = vol < 0
    out[flip, 0], out[flip, 1] = out[flip, 1].copy(), out[flip, 0].copy()
    return out


# --------------------------------------------------------------------------- generators


def icosphere(level):
    """Unit icosphere with ``20 * 4**level`` outward-oriented triangles."""
    r = (1.0 + math.sqrt(5.0)) / 2.0
    verts = [
        [-1, r, 0], [1, r, 0], [-1, -r, 0], [1, -r, 0],
        [0, -1, r], [0, 1, r], [0, -1, -r], [0, 1, -r],
        [r, 0, -1], [r, 0, 1], [-r, 0, -1], [-r, 0, 1],
    ]  # fmt: skip
    faces = [
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ]  # fmt: skip
    verts = [np.array(v, float) / np.linalg.norm(v) for v in verts]
    for _ in range(level):
        cache = {}

        def mid(a, b):
            key = (a, b) if a < b else (b, a)
            if key not in cache:
                m = verts[a] + verts[b]
                verts.append(m / np.linalg.norm(m))
                cache[key] = len(verts) - 1
            return cache[key]

        new = []
        for a, b, c in faces:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            new += [[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]
        faces = new
    return np.array(verts), np.array(faces, dtype=np.int64)


def extrude_to_center(surface, layers, center=None):
    """Tetrahedralise a star-shaped surface by radial layers toward ``center``."""
    if layers < 1:
        raise ValueError("need at least one radial layer")
    c = surface.center if center is None else np.asarray(center, float)
    nv = len(surface.vertices)
    rel = surface.vertices - c
    verts = [c[None]]
    for layer in range(1, layers + 1):
        verts.append(c + rel * (layer / layers))
    verts = np.concatenate(verts)

    def vid(layer, v):  # layer 1..layers
        return 1 + (layer - 1) * nv + v

    tets = []
    tri = surface.triangles
    for a, b, cc in tri:
        tets.append([0, vid(1, a), vid(1, b), vid(1, cc)])
        for layer in range(1, layers):
            lo = [vid(layer, a), vid(layer, b), vid(layer, cc)]
            hi = [vid(layer + 1, a), vid(layer + 1, b), vid(layer + 1, cc)]
            # prism split with diagonals chosen by global vertex order
            order = np.argsort([a, b, cc])
            l0, l1, l2 = (lo[i] for i in order)
            h0, h1, h2 = (hi[i] for i in order)
            tets += [[l0, l1, l2, h2], [l0, l1, h1, h2], [l0, h0, h1, h2]]
    tets = np.array(tets, dtype=np.int64)
    vol = tet_volumes(verts[tets])
    flip = vol < 0
    tets[flip, 0], tets[flip, 1] = tets[flip, 1].copy(), tets[flip, 0].copy()
    return TetrahedralMesh(verts, tets)


def make_sphere(center=(0.0, 0.0, 0.0), radius=1.0, level=3, jitter=0.0, seed=0):
    """Icosphere surface and matched radial tetrahedral mesh.

    The radial layer count ``2**level`` keeps the radial spacing comparable
    to the surface mesh size.
    """
    if radius <= 0 or level < 0:
        raise ValueError("radius must be positive and level non-negative")
    v, f = icosphere(level)
    center = np.asarray(center, float)
    surface = TriangulatedSurface(center + radius * v, f)
    if jitter:
        surface = surface.jittered(jitter, seed)
    return surface, extrude_to_center(surface, 2**level, center)


def make_ellipsoid(axes=(1.0, 1.0, 1.0), level=3, center=(0.0, 0.0, 0.0), jitter=0.0, seed=0):
    if min(axes) <= 0 or level < 0:
        raise ValueError("semi-axes must be positive and level non-negative")
    v, f = icosphere(level)
    center = np.asarray(center, float)
    surface = TriangulatedSurface(center + v * np.asarray(axes, float), f)
    if jitter:
        surface = surface.jittered(jitter, seed)
    return surface, extrude_to_center(surface, 2**level, center)


def parse_mesh_spec(spec):
    """``sphere:<level>`` or ``ellipsoid:a,b,c:<level>`` -> (surface, tets)."""
    parts = spec.split(":")
    if parts[0] == "sphere" and len(parts) == 2:
        return make_sphere(level=int(parts[1]))
    if parts[0] == "ellipsoid" and len(parts) == 3:
        axes = tuple(float(a) for a in parts[1].split(","))
        if len(axes) != 3:
            raise ValueError(f"ellipsoid needs three semi-axes: {spec!r}")
        return make_ellipsoid(axes, int(parts[2]))
    raise ValueError(f"unknown builtin mesh {spec!r}")


# --------------------------------------------------------------------------- file formats


def _content_lines(text):
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield n, line.split()


_SINGULAR = {"vertices": "vertex", "cells": "cell"}


def _read_block(lines, count, width, kind, conv, header_line):
    rows = []
    for _ in range(count):
        try:
            n, tok = next(lines)
        except StopIteration:
            raise ParseError(f"expected {count} {kind}, file ended early", header_line) from None
        if len(tok) < width:
            raise ParseError(f"{_SINGULAR[kind]} needs {width} values, got {len(tok)}", n)
        try:
            rows.append([conv(t) for t in tok[:width]])
        except ValueError:
            raise ParseError(f"bad number in {_SINGULAR[kind]}: {' '.join(tok)}", n) from None
    return rows


def load_off(path):
    """Read an ASCII OFF file (triangles, zero-based) into a validated surface."""
    with open(path) as fh:
        lines = _content_lines(fh.read())
    try:
        n, tok = next(lines)
    except StopIteration:
        raise ParseError("empty file", 1) from None
    if tok[0] != "OFF":
        raise ParseError(f"expected 'OFF' header, got {tok[0]!r}", n)
    rest = tok[1:]
    if not rest:
        n, rest = next(lines, (n + 1, []))
    try:
        nv, nf = int(rest[0]), int(rest[1])
    except (IndexError, ValueError):
        raise ParseError("expected vertex and face counts", n) from None
    verts = _read_block(lines, nv, 3, "vertices", float, n)
    faces = []
    for _ in range(nf):
        try:
            ln, ftok = next(lines)
        except StopIteration:
            raise ParseError(f"expected {nf} faces, file ended early", n) from None
        try:
            k = int(ftok[0])
            idx = [int(t) for t in ftok[1 : 1 + k]]
        except ValueError:
            raise ParseError(f"bad face record: {' '.join(ftok)}", ln) from None
        if k != 3 or len(idx) != 3:
            raise ParseError("only triangular faces are supported", ln)
        if min(idx) < 0 or max(idx) >= nv:
            raise ParseError("face index out of range", ln)
        faces.append(idx)
    return TriangulatedSurface(np.array(verts, float).reshape(-1, 3), np.array(faces, np.int64).reshape(-1, 3))


def save_off(path, surface):
    with open(path, "w") as fh:
        fh.write("OFF\n")
        fh.write(f"{len(surface.vertices)} {surface.n_triangles} 0\n")
        for v in surface.vertices:
            fh.write(" ".join(repr(float(c)) for c in v) + "\n")
        for t in surface.triangles:
            fh.write(f"3 {t[0]} {t[1]} {t[2]}\n")


def load_tet(path):
    """Companion tetrahedral format: ``TET``, ``nv nc``, vertices, 4 indices per cell."""
    with open(path) as fh:
        lines = _content_lines(fh.read())
    try:
        n, tok = next(lines)
    except StopIteration:
        raise ParseError("empty file", 1) from None
    if tok[0] != "TET":
        raise ParseError(f"expected 'TET' header, got {tok[0]!r}", n)
    rest = tok[1:]
    if not rest:
        n, rest = next(lines, (n + 1, []))
    try:
        nv, nc = int(rest[0]), int(rest[1])
    except (IndexError, ValueError):
        raise ParseError("expected vertex and cell counts", n) from None
    verts = _read_block(lines, nv, 3, "vertices", float, n)
    cells = _read_block(lines, nc, 4, "cells", int, n)
    cells = np.array(cells, np.int64).reshape(-1, 4)
    if cells.size and (cells.min() < 0 or cells.max() >= nv):
        raise ParseError("cell index out of range", n)
    return TetrahedralMesh(np.array(verts, float).reshape(-1, 3), cells)


def save_tet(path, mesh):
    with open(path, "w") as fh:
        fh.write("TET\n")
        fh.write(f"{len(mesh.vertices)} {mesh.n_cells}\n")
        for v in mesh.vertices:
            fh.write(" ".join(repr(float(c)) for c in v) + "\n")
        for t in mesh.tets:
            fh.write(f"{t[0]} {t[1]} {t[2]} {t[3]}\n")
