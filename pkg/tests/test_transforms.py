import math

import numpy as np
import pytest

from psimt.fields import KernelField, QuaternionField, constant, vector_polynomial
from psimt.quaternion import NotPureVector, norm_c
from psimt.structural import embed, make_psi_theta
from psimt.transforms import (
    BoundaryField,
    ExtrapolationDiverged,
    SingularPoint,
    TooCloseToSurface,
    borel_pompeiu_residual,
    boundary_limit,
    cauchy_kernel,
    cauchy_transform,
    fibonacci_sphere,
    holder_condition_estimate,
    holder_exponent_fit,
    inside,
    jump_check,
    m_psi_star_test,
    m_psi_test,
    richardson,
    right_cauchy_transform,
    right_singular_cauchy,
    sc_vec_split,
    singular_cauchy,
    teodorescu,
    winding_number,
)

PSI = make_psi_theta(0.8)
X_IN = fibonacci_sphere(10, 0.5)
X_OUT = fibonacci_sphere(10, 2.0)
ONE = constant([1, 0, 0, 0])
TRACE = vector_polynomial([{(0, 1, 0): 1.0}, {}, {(1, 0, 0): 1.0}])


def rel(a, b):
    return float(np.max(norm_c(a - b) / norm_c(b)))


def test_cauchy_kernel_frozen():
    psi = make_psi_theta(0.0)
    np.testing.assert_allclose(cauchy_kernel(psi, [0, 0, 2.0]), [0, 0, 1 / (16 * math.pi), 0])
    with pytest.raises(SingularPoint):
        cauchy_kernel(psi, np.zeros(3))


def test_fibonacci_sphere():
    p = fibonacci_sphere(50, 2.0, (1, 0, 0))
    np.testing.assert_allclose(np.linalg.norm(p - [1, 0, 0], axis=1), 2.0)
    assert abs(p.mean(axis=0) - [1, 0, 0]).max() < 0.05


def test_winding_number(sphere3):
    s, _ = sphere3
    np.testing.assert_allclose(winding_number(s, [[0, 0, 0], [0.5, 0.3, 0], [2, 0, 0]]), [1, 1, 0], atol=1e-12)
    assert list(inside(s, np.array([[0, 0, 0.9], [0, 0, 1.1]]))) == [True, False]


def test_gauss_identity(sphere3):
    # K[1] is the indicator of the domain
    s, _ = sphere3
    one = BoundaryField.sample(s, ONE)
    assert np.abs(cauchy_transform(s, one, PSI, X_IN) - [1, 0, 0, 0]).max() < 5e-3
    assert np.abs(cauchy_transform(s, one, PSI, X_OUT)).max() < 1e-4
    # singular transform of a constant is the constant (K+ = 1, K- = 0)
    assert np.abs(singular_cauchy(s, one, PSI) - [1, 0, 0, 0]).max() < 1e-12


def test_cauchy_reproduction_interior_and_exterior():
    errs = []
    for level in (2, 3):
        from psimt.geometry import make_sphere

        s, _ = make_sphere(level=level)
        F = KernelField(PSI, [2.0, 0, 0])
        errs.append(rel(cauchy_transform(s, BoundaryField.sample(s, F), PSI, X_IN, check=False), F(X_IN)))
    assert errs[1] < 5e-3
    assert errs[0] / errs[1] > 3.0  # O(h^2) on smooth data


def test_exterior_and_right_reproduction(sphere3):
    s, _ = sphere3
    K0 = KernelField(PSI, [0, 0, 0])
    # kernel with the pole inside: the transform gives -F outside
    assert rel(cauchy_transform(s, BoundaryField.sample(s, K0), PSI, X_OUT), -K0(X_OUT)) < 5e-3
    F = KernelField(PSI, [2.0, 0, 0])
    assert rel(right_cauchy_transform(s, BoundaryField.sample(s, F), PSI, X_IN), F(X_IN)) < 5e-3


def test_too_close_guard(sphere3):
    s, _ = sphere3
    one = BoundaryField.sample(s, ONE)
    with pytest.raises(TooCloseToSurface):
        cauchy_transform(s, one, PSI, [[0, 0, 0.95]])


def test_sc_vec_split_matches_product_form(sphere3):
    s, _ = sphere3
    f = BoundaryField.sample(s, KernelField(PSI, [2.0, 0, 0]))
    a, b = sc_vec_split(s, f, PSI, X_IN)
    whole = cauchy_transform(s, f, PSI, X_IN)
    np.testing.assert_allclose(a, whole[:, 0], atol=1e-14)
    np.testing.assert_allclose(b[:, 1:], whole[:, 1:], atol=1e-14)
    with pytest.raises(NotPureVector):
        sc_vec_split(s, BoundaryField.sample(s, ONE), PSI, X_IN)


@pytest.mark.parametrize("level", [2, 3])
def test_teodorescu_of_constant(level):
    # inside the unit ball T[1](x) = -(x)_psi / 3, outside -(x)_psi / (3 |x|^3)
    from psimt.geometry import make_sphere

    _, m = make_sphere(level=level)
    r = np.linalg.norm(X_OUT, axis=1)[:, None]
    bound = {2: 1e-2, 3: 3e-3}[level]
    assert np.abs(teodorescu(m, ONE, PSI, X_IN) + embed(PSI, X_IN) / 3).max() < bound
    assert np.abs(teodorescu(m, ONE, PSI, X_OUT) + embed(PSI, X_OUT) / (3 * r**3)).max() < bound


def test_borel_pompeiu(sphere3):
    s, m = sphere3
    f = vector_polynomial([{(1, 0, 0): 1.0}, {(0, 0, 2): 1j}, {}])
    r = borel_pompeiu_residual(s, m, f, PSI, np.concatenate([X_IN, X_OUT]))
    assert norm_c(r).max() < 0.02


def test_richardson_exact_on_linear_error():
    est, corr = richardson([1.5, 1.25, 1.125])
    assert est == pytest.approx(1.0)
    est, _ = richardson([1 + 0.5 + 0.25, 1 + 0.25 + 0.0625, 1 + 0.125 + 0.015625])
    assert est == pytest.approx(1.0)


def test_boundary_limits_constant(sphere3):
    s, _ = sphere3
    one = BoundaryField.sample(s, ONE)
    nodes = np.arange(0, s.n_triangles, 97)
    np.testing.assert_allclose(boundary_limit(s, one, PSI, nodes, "+"), np.tile([1, 0, 0, 0], (len(nodes), 1)), atol=1e-12)
    np.testing.assert_allclose(boundary_limit(s, one, PSI, nodes, "-"), 0, atol=1e-12)
    with pytest.raises(ValueError):
        boundary_limit(s, one, PSI, nodes, "left")


def test_extrapolation_divergence_detected(sphere2):
    # offsets starting far outside the asymptotic range: increments grow
    s, _ = sphere2
    rng = np.random.default_rng(0)
    noise = BoundaryField(s, rng.standard_normal((s.n_triangles, 4)))
    with pytest.raises(ExtrapolationDiverged):
        boundary_limit(s, noise, PSI, np.arange(50), "+", delta0=1.0)
    # the same data contract from a small enough starting offset
    boundary_limit(s, noise, PSI, np.arange(50), "+", delta0=0.03)


def test_jump_relations(sphere3):
    s, _ = sphere3
    f = BoundaryField.sample(s, TRACE)
    rep = jump_check(s, f, PSI, nodes=np.arange(0, s.n_triangles, 40))
    jump, total = rep.relative
    assert jump < 0.01
    assert total < 0.03


def test_left_right_singular_agree_on_kernel_trace(sphere3):
    s, _ = sphere3
    f = BoundaryField.sample(s, KernelField(PSI, [2.0, 0, 0]))
    nodes = np.arange(0, s.n_triangles, 50)
    d = singular_cauchy(s, f, PSI, nodes) - right_singular_cauchy(s, f, PSI, nodes)
    assert np.abs(d).max() / f.sup_norm < 0.05


def test_membership_tests(sphere3):
    s, _ = sphere3
    good = BoundaryField.sample(s, KernelField(PSI, [2.0, 0, 0]))
    bad = BoundaryField.sample(s, vector_polynomial([{(0, 1, 0): 1.0}, {}, {}]))
    assert m_psi_test(s, good, PSI, tol=1e-2 * good.sup_norm).member
    assert not m_psi_test(s, bad, PSI, tol=1e-2 * bad.sup_norm).member
    assert m_psi_star_test(s, good, PSI, tol=1e-2 * good.sup_norm).member
    assert not m_psi_star_test(s, bad, PSI, tol=1e-2 * bad.sup_norm).member


def test_boundary_field_algebra(sphere3):
    s, _ = sphere3
    z = BoundaryField.zeros(s)
    assert z.pure and z.sup_norm == 0
    f = BoundaryField.sample(s, TRACE)
    np.testing.assert_array_equal((2 * f + z).values, 2 * f.values)
    with pytest.raises(ValueError):
        BoundaryField(s, np.zeros((3, 4)))


def test_holder_diagnostics(sphere3):
    s, _ = sphere3
    smooth = BoundaryField.sample(s, TRACE)
    assert holder_exponent_fit(s, smooth) > 0.9
    root = QuaternionField(lambda y: np.sqrt(np.abs(y[..., :1])) * np.array([0, 1, 0, 0]))
    band = np.flatnonzero(np.abs(s.centroids[:, 0]) < 0.1)
    assert holder_exponent_fit(s, BoundaryField.sample(s, root), band) < 2 / 3
    assert not holder_condition_estimate(s, smooth, 0).diverging
    step = QuaternionField(lambda y: (y[..., :1] > 0) * np.array([0, 1.0, 0, 0]))
    node = int(np.argmin(np.abs(s.centroids[:, 0])))
    assert holder_condition_estimate(s, BoundaryField.sample(s, step), node).diverging
