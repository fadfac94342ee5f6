import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from psimt import kernels
from psimt.geometry import (
    DegenerateMesh,
    MeshError,
    OrientationError,
    ParseError,
    TetrahedralMesh,
    TriangulatedSurface,
    icosphere,
    load_off,
    load_tet,
    make_ellipsoid,
    make_sphere,
    parse_mesh_spec,
    save_off,
    save_tet,
    subdivide_tets,
    tet_volumes,
)
from psimt._closest_py import closest_point_on_triangles

# icosahedron inscribed in the unit sphere
EDGE = 4.0 / math.sqrt(10.0 + 2.0 * math.sqrt(5.0))
ICO_AREA = 5.0 * math.sqrt(3.0) * EDGE**2  # 9.5745...
ICO_VOLUME = 5.0 / 12.0 * (3.0 + math.sqrt(5.0)) * EDGE**3  # 2.5362...


@pytest.mark.parametrize("level", [0, 1, 2, 3])
def test_icosphere_counts(level):
    v, f = icosphere(level)
    assert len(f) == 20 * 4**level
    assert len(v) == 10 * 4**level + 2
    np.testing.assert_allclose(np.linalg.norm(v, axis=1), 1.0)


def test_level0_area_and_volume():
    s, m = make_sphere(level=0)
    assert s.area == pytest.approx(ICO_AREA, rel=1e-12)
    assert s.area / (4 * math.pi) == pytest.approx(0.7619, abs=1e-4)
    assert s.volume == pytest.approx(ICO_VOLUME, rel=1e-12)
    assert m.volume == pytest.approx(ICO_VOLUME, rel=1e-12)


def test_area_converges_to_sphere():
    errs = [abs(make_sphere(level=L)[0].area / (4 * math.pi) - 1) for L in (1, 2, 3)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[1] / errs[2] == pytest.approx(4, rel=0.1)


def test_tet_mesh_matches_surface(sphere2):
    s, m = sphere2
    assert m.n_cells == 320 * (1 + 3 * 3)
    assert m.volume == pytest.approx(s.volume, rel=1e-12)
    assert m.matches_surface(s)
    assert len(m.boundary_faces()) == s.n_triangles
    other, _ = make_sphere(level=1)
    assert not m.matches_surface(other)


def test_ellipsoid_and_spec():
    s, m = make_ellipsoid((2.0, 1.0, 0.5), level=2)
    assert s.volume == pytest.approx(4 / 3 * math.pi, rel=0.05)
    assert m.volume == pytest.approx(s.volume, rel=1e-12)
    s2, _ = parse_mesh_spec("ellipsoid:2,1,0.5:2")
    np.testing.assert_array_equal(s.vertices, s2.vertices)
    assert parse_mesh_spec("sphere:1")[0].n_triangles == 80
    for bad in ("cube:2", "ellipsoid:1,2:2", "sphere"):
        with pytest.raises(ValueError):
            parse_mesh_spec(bad)


def test_surface_invariants(sphere2):
    s, _ = sphere2
    np.testing.assert_allclose(np.linalg.norm(s.normals, axis=1), 1.0)
    # outward: normals point away from the center
    assert np.all(np.einsum("ij,ij->i", s.normals, s.centroids) > 0)
    assert s.inradius == pytest.approx(1.0, rel=0.02)
    assert s.circumradius == pytest.approx(1.0)


def test_orientation_errors():
    v, f = icosphere(0)
    with pytest.raises(OrientationError):
        TriangulatedSurface(v, f[:, ::-1])
    with pytest.raises(OrientationError):
        TriangulatedSurface(v, f[:-1])
    bad = v.copy()
    bad[f[0, 1]] = bad[f[0, 0]]
    with pytest.raises(DegenerateMesh):
        TriangulatedSurface(bad, f)
    with pytest.raises(MeshError):
        TriangulatedSurface(v, f + 100)


def test_tet_helpers():
    p = np.array([[[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]]], float)
    assert tet_volumes(p)[0] == pytest.approx(1 / 6)
    kids = subdivide_tets(p)
    assert kids.shape == (8, 4, 3)
    assert np.all(tet_volumes(kids) > 0)
    assert tet_volumes(kids).sum() == pytest.approx(1 / 6)
    with pytest.raises(OrientationError):
        TetrahedralMesh(p[0], [[1, 0, 2, 3]])


def test_off_tet_roundtrip(tmp_path, sphere2):
    s, m = sphere2
    save_off(tmp_path / "s.off", s)
    save_tet(tmp_path / "s.tet", m)
    s2, m2 = load_off(tmp_path / "s.off"), load_tet(tmp_path / "s.tet")
    np.testing.assert_array_equal(s2.vertices, s.vertices)
    np.testing.assert_array_equal(m2.tets, m.tets)
    assert m2.matches_surface(s2)


@pytest.mark.parametrize(
    "text, line",
    [
        ("", 1),
        ("PLY\n", 1),
        ("OFF\n3 1 0\n0 0 0\n1 0 0\n", 2),
        ("OFF\n3 1 0\n0 0 0\n1 0 x\n0 1 0\n3 0 1 2\n", 4),
        ("OFF\n4 1 0\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n4 0 1 2 3\n", 7),
        ("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 5\n", 6),
    ],
)
def test_off_parse_errors(tmp_path, text, line):
    p = tmp_path / "bad.off"
    p.write_text(text)
    with pytest.raises(ParseError) as exc:
        load_off(p)
    assert exc.value.line == line


def test_off_comments_and_open_surface(tmp_path):
    p = tmp_path / "tri.off"
    p.write_text("OFF # header\n# a comment\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n")
    with pytest.raises(OrientationError):
        load_off(p)


def test_tet_parse_errors(tmp_path):
    p = tmp_path / "bad.tet"
    p.write_text("TET\n4 1\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n0 1 2 9\n")
    with pytest.raises(ParseError):
        load_tet(p)


def test_closest_point_frozen():
    a, b, c = np.zeros(3), np.array([1.0, 0, 0]), np.array([0.0, 1, 0])
    x = np.array([[0.2, 0.2, 1.0], [2.0, 0.5, 0.0], [-1.0, -1.0, 0.0], [1.0, 1.0, 0.0]])
    q = closest_point_on_triangles(x, a, b, c)
    np.testing.assert_allclose(q, [[0.2, 0.2, 0], [1, 0, 0], [0, 0, 0], [0.5, 0.5, 0]])


@given(st.integers(0, 2**31))
def test_closest_point_matches_brute_force(seed):
    s, _ = make_sphere(level=1, jitter=0.2, seed=seed % 7)
    rng = np.random.default_rng(seed)
    x = rng.uniform(-1.5, 1.5, (20, 3))
    p, d, t = s.closest_point(x)
    tri = s.vertices[s.triangles]
    allq = closest_point_on_triangles(x[:, None], tri[:, 0], tri[:, 1], tri[:, 2])
    alld = np.linalg.norm(allq - x[:, None], axis=2)
    np.testing.assert_allclose(d, alld.min(axis=1), atol=1e-12)
    np.testing.assert_allclose(np.linalg.norm(p - x, axis=1), d, atol=1e-12)


def test_jitter_reproducible():
    a, _ = make_sphere(level=1, jitter=0.1, seed=3)
    b, _ = make_sphere(level=1, jitter=0.1, seed=3)
    np.testing.assert_array_equal(a.vertices, b.vertices)
    with pytest.raises(ValueError):
        make_sphere(level=-1)
