import numpy as np
import pytest

from psimt.fields import KernelField, constant, vector_polynomial
from psimt.geometry import DegenerateMesh, TriangulatedSurface, icosphere
from psimt.quaternion import NotPureVector
from psimt.reconstruction import (
    PROFILES,
    ExtensionParams,
    MembershipFailed,
    QuadratureBudgetExceeded,
    boundary_data_from_vectors,
    decompose,
    extend_boundary_field,
    mls_blend,
    shell_quadrature,
)
from psimt.structural import make_psi_theta
from psimt.transforms import BoundaryField

LINEAR = vector_polynomial([{(1, 0, 0): 1.0, (0, 0, 0): 0.5}, {(0, 1, 0): 2j}, {(0, 0, 1): -1.0}])


@pytest.mark.parametrize("name", sorted(PROFILES))
def test_profiles(name):
    phi = PROFILES[name]
    s = np.linspace(0, 1, 101)
    v = phi(s)
    assert v[0] == pytest.approx(1.0) and v[-1] == pytest.approx(0.0, abs=1e-15)
    assert np.all(np.diff(v) <= 1e-15)


def test_params_validation(sphere3):
    s, _ = sphere3
    with pytest.raises(ValueError):
        ExtensionParams(profile="gaussian")
    with pytest.raises(ValueError):
        ExtensionParams(rho=-1.0)
    with pytest.raises(ValueError):
        ExtensionParams(k=2)
    with pytest.raises(ValueError):
        ExtensionParams(rho=0.6).resolve(s)
    with pytest.raises(ValueError):
        ExtensionParams(rho=0.2, fd_step=0.1).resolve(s)
    rho, step = ExtensionParams().resolve(s)
    assert rho == pytest.approx(0.4 * s.inradius)
    assert step == pytest.approx(rho / 8)


def test_mls_blend_exact_at_nodes_and_accurate(sphere3):
    s, _ = sphere3
    f = BoundaryField.sample(s, LINEAR)
    tri = np.arange(0, s.n_triangles, 7)
    np.testing.assert_allclose(mls_blend(s, f.values, s.centroids[tri], tri), f.values[tri], atol=1e-12)
    # off-node surface points: second-order error of a linear field on a curved surface
    cp, _, t = s.closest_point(s.vertices[:40] * 0.999)
    err = np.abs(mls_blend(s, f.values, cp, t) - LINEAR(cp)).max()
    assert err < s.h**2


def test_extension_structure(sphere3):
    s, _ = sphere3
    f = BoundaryField.sample(s, LINEAR)
    ext = extend_boundary_field(s, f, ExtensionParams(rho=0.3))
    # equals the data at the nodes, the mean deeper than rho, zero outside
    np.testing.assert_allclose(ext.smooth(s.centroids[:20]), f.values[:20], atol=1e-12)
    np.testing.assert_allclose(ext([[0, 0, 0], [0.2, 0.1, 0]]), np.tile(ext.mean, (2, 1)))
    assert np.all(ext([[1.5, 0, 0], [0, -2, 0]]) == 0)
    # the unclipped field is continuous across the surface
    n = s.normals[:10]
    a = ext.smooth(s.centroids[:10] - 1e-6 * n)
    b = ext.smooth(s.centroids[:10] + 1e-6 * n)
    assert np.abs(a - b).max() < 1e-4


def test_extension_rejects_inverted_surface():
    v, f = icosphere(1)
    inverted = TriangulatedSurface(v, f[:, ::-1], validate=False)
    with pytest.raises(DegenerateMesh):
        extend_boundary_field(inverted, BoundaryField.zeros(inverted))


def test_shell_quadrature(sphere3):
    s, m = sphere3
    q = shell_quadrature(m, s, 0.2)
    # covers the shell 0.8 < |x| < 1 (volume 4pi/3 (1 - 0.512))
    assert q.volumes.sum() >= 4 / 3 * np.pi * (1 - 0.8**3) * 0.95
    assert q.volumes.sum() < m.volume
    assert np.all(q.volumes > 0)
    with pytest.raises(QuadratureBudgetExceeded):
        shell_quadrature(m, s, 0.2, refine=2, max_cells=10_000)


def test_decompose_rejects_bad_data(sphere3):
    s, m = sphere3
    with pytest.raises(NotPureVector):
        decompose(s, m, BoundaryField.sample(s, constant([1, 0, 0, 0])), 0.0)
    x2 = BoundaryField.sample(s, vector_polynomial([{(0, 1, 0): 1.0}, {}, {}]))
    with pytest.raises(MembershipFailed):
        decompose(s, m, x2, 0.0)


def test_zero_data_gives_zero_fields(sphere3):
    s, m = sphere3
    d = decompose(s, m, BoundaryField.zeros(s), np.pi, verify=False)
    assert np.all(d.F_plus([[0, 0, 0], [0.3, 0.2, 0.1]]) == 0)
    assert np.all(d.F_minus([[2, 0, 0], [0, 0, 5]]) == 0)
    rep = d.report()
    assert rep["profile"] == "quintic" and rep["trace_residual_max"] is None


def test_boundary_data_from_vectors(sphere3):
    s, _ = sphere3
    psi = make_psi_theta(0.0)
    vals = KernelField(psi, [0, 0, 0])(s.centroids)
    f = boundary_data_from_vectors(s, vals[:, 1:])
    np.testing.assert_array_equal(f.values, vals)
    assert f.pure
