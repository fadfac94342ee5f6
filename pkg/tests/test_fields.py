import math

import numpy as np
import pytest

from psimt.fields import (
    GridField,
    KernelField,
    PolynomialField,
    constant,
    coordinate,
    kernel_values,
    load_grid_csv,
    random_polynomial,
    vector_polynomial,
)
from psimt.operators import DerivativeScheme, partials
from psimt.structural import make_psi_theta


def test_polynomial_eval_and_derivative():
    # f = 3 x1^2 x3 i + 2 x2
    f = PolynomialField({(2, 0, 1): [0, 3, 0, 0], (0, 1, 0): [2, 0, 0, 0]})
    x = np.array([[1.0, 2.0, -1.0]])
    np.testing.assert_allclose(f(x), [[4, -3, 0, 0]])
    np.testing.assert_allclose(f.derivative(0)(x), [[0, -6, 0, 0]])
    np.testing.assert_allclose(f.grad(x)[0, 1], [2, 0, 0, 0])
    assert f.degree == 3


def test_polynomial_algebra():
    a = coordinate(0) + constant([1, 0, 0, 0])
    x = np.array([2.0, 0.0, 0.0])
    assert a(x)[0] == 3
    assert (a - a).terms == {}
    assert ((2 * a)(x) == 2 * a(x)).all()
    v = vector_polynomial([{(1, 0, 0): 1.0}, {}, {(0, 1, 0): 1j}])
    np.testing.assert_array_equal(v(np.array([1.0, 2.0, 3.0])), [0, 1, 0, 2j])


def test_kernel_frozen_values():
    psi = make_psi_theta(0.0)
    np.testing.assert_allclose(kernel_values(psi, [1.0, 0, 0]), [0, 1 / (4 * math.pi), 0, 0])
    # psi^2 = k at theta = 0
    np.testing.assert_allclose(kernel_values(psi, [0, 2.0, 0]), [0, 0, 0, 1 / (16 * math.pi)])


def test_kernel_gradient_matches_differences(rng):
    psi = make_psi_theta(0.9)
    K = KernelField(psi, [0.1, -0.2, 0.3])
    x = rng.uniform(1, 2, (6, 3))
    fd = partials(K, x, DerivativeScheme("central", 1e-5))
    np.testing.assert_allclose(K.grad(x), fd, atol=1e-8)


def test_random_polynomial_pure(rng):
    p = random_polynomial(rng, pure_vector=True)
    assert all(c[0] == 0 for c in p.terms.values())


def _grid(f, n=9):
    ax = np.linspace(0.0, 1.0, n)
    X = np.stack(np.meshgrid(ax, ax, ax, indexing="ij"), axis=-1)
    return (ax, ax, ax), f(X)


def test_grid_field_reproduces_trilinear():
    f = PolynomialField({(1, 0, 0): [1, 0, 0, 0], (1, 1, 1): [0, 2j, 0, 0], (0, 0, 0): [0, 0, 1, 0]})
    g = GridField(*_grid(f))
    x = np.array([[0.13, 0.52, 0.77], [1.0, 1.0, 1.0]])
    np.testing.assert_allclose(g(x), f(x), atol=1e-14)
    assert g.spacing == pytest.approx(0.125)
    assert len(g.interior_nodes()) == 7**3
    assert not g.domain(np.array([1.01, 0.5, 0.5]))


def test_grid_field_validation():
    with pytest.raises(ValueError):
        GridField((np.arange(3.0),) * 3, np.zeros((3, 3, 2, 4)))
    with pytest.raises(ValueError):
        GridField((np.array([0.0, 0.0, 1.0]),) * 3, np.zeros((3, 3, 3, 4)))


def test_grid_csv_roundtrip(tmp_path):
    f = vector_polynomial([{(1, 0, 0): 1.0}, {(0, 1, 0): 2j}, {}])
    axes, vals = _grid(f, 4)
    X = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)
    v = vals.reshape(-1, 4)
    rows = np.column_stack([X] + [c for q in range(4) for c in (v[:, q].real, v[:, q].imag)])
    rng = np.random.default_rng(0)
    path = tmp_path / "g.csv"
    np.savetxt(path, rows[rng.permutation(len(rows))], delimiter=",")
    g = load_grid_csv(path)
    np.testing.assert_allclose(g.values, vals)
    np.savetxt(path, rows[:-1], delimiter=",")
    with pytest.raises(ValueError):
        load_grid_csv(path)
