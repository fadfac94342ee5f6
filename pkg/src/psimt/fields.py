"""Quaternion-valued fields on R^3.

A field maps points of shape ``(..., 3)`` to complex quaternions of shape
``(..., 4)``.  Fields may carry an analytic gradient returning ``(..., 3, 4)``
(the three partials ``df/dx_k``).  Polynomial fields differentiate exactly to
any order, which the analytic operator checks rely on.
"""

from itertools import product
import math

import numpy as np

from .quaternion import qmul
from .structural import embed

FOUR_PI = 4.0 * math.pi


class QuaternionField:
    """Closure-backed field with an optional analytic gradient.

    ``domain`` is an optional predicate ``points -> bool mask`` telling where
    the field may be evaluated; finite-difference stencils are checked
    against it.
    """

    def __init__(self, func, grad=None, domain=None, name=None):
        self._func = func
        self._grad = grad
        self.domain = domain
        self.name = name or getattr(func, "__name__", "field")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.asarray(self._func(x), dtype=complex)

    @property
    def has_grad(self):
        return self._grad is not None

    def grad(self, x):
        if self._grad is None:
            raise AttributeError(f"{self.name} has no analytic gradient")
        return np.asarray(self._grad(np.asarray(x, dtype=float)), dtype=complex)

    def __add__(self, other):
        return _combine(self, other, 1.0)

    def __sub__(self, other):
        return _combine(self, other, -1.0)

    def __mul__(self, alpha):
        g = None
        if self.has_grad:
            g = lambda x: alpha * self.grad(x)  # noqa: E731
        return QuaternionField(lambda x: alpha * self(x), g, self.domain, self.name)

    __rmul__ = __mul__

    def __repr__(self):
        return f"<{type(self).__name__} {self.name}>"


def _combine(a, b, sign):
    g = None
    if a.has_grad and b.has_grad:
        g = lambda x: a.grad(x) + sign * b.grad(x)  # noqa: E731
    dom = a.domain if b.domain is None else b.domain
    return QuaternionField(lambda x: a(x) + sign * b(x), g, dom, f"({a.name}{'+' if sign > 0 else '-'}{b.name})")


class PolynomialField(QuaternionField):
    """``sum c_p x1^p1 x2^p2 x3^p3`` with complex-quaternion coefficients ``c_p``."""

    def __init__(self, terms, name="poly"):
        clean = {}
        for powers, coeff in dict(terms).items():
            coeff = np.asarray(coeff, dtype=complex).reshape(4)
            powers = tuple(int(p) for p in powers)
            clean[powers] = clean.get(powers, np.zeros(4, complex)) + coeff
        self.terms = {p: c for p, c in clean.items() if np.any(c != 0)}
        super().__init__(self._eval, self._grad_eval, None, name)

    def _eval(self, x):
        out = np.zeros(x.shape[:-1] + (4,), dtype=complex)
        for (p1, p2, p3), c in self.terms.items():
            mono = x[..., 0] ** p1 * x[..., 1] ** p2 * x[..., 2] ** p3
            out += mono[..., None] * c
        return out

    def derivative(self, k):
        terms = {}
        for powers, c in self.terms.items():
            if powers[k] == 0:
                continue
            new = list(powers)
            new[k] -= 1
            terms[tuple(new)] = terms.get(tuple(new), 0) + powers[k] * c
        return PolynomialField(terms, f"d{k + 1}({self.name})")

    def _grad_eval(self, x):
        return np.stack([self.derivative(k)(x) for k in range(3)], axis=-2)

    def left_mul(self, q):
        return PolynomialField({p: qmul(q, c) for p, c in self.terms.items()}, self.name)

    def right_mul(self, q):
        return PolynomialField({p: qmul(c, q) for p, c in self.terms.items()}, self.name)

    def __add__(self, other):
        if isinstance(other, PolynomialField):
            terms = dict(self.terms)
            for p, c in other.terms.items():
                terms[p] = terms.get(p, 0) + c
            return PolynomialField(terms, f"({self.name}+{other.name})")
        return super().__add__(other)

    def __mul__(self, alpha):
        return PolynomialField({p: alpha * c for p, c in self.terms.items()}, self.name)

    __rmul__ = __mul__

    def __sub__(self, other):
        if isinstance(other, PolynomialField):
            return self + (-1.0) * other
        return super().__sub__(other)

    def scalar_part(self):
        return PolynomialField({p: np.array([c[0], 0, 0, 0]) for p, c in self.terms.items()}, f"Sc({self.name})")

    def vector_part(self):
        return PolynomialField({p: np.concatenate([[0], c[1:]]) for p, c in self.terms.items()}, f"Vec({self.name})")

    @property
    def degree(self):
        return max((sum(p) for p in self.terms), default=0)


def monomial(powers, coeff):
    return PolynomialField({tuple(powers): coeff})


def coordinate(k, coeff=(1, 0, 0, 0)):
    """The field ``x_k * coeff`` (``k`` zero-based)."""
    p = [0, 0, 0]
    p[k] = 1
    return monomial(p, coeff)


def vector_polynomial(components):
    """Pure-vector polynomial ``f1 i + f2 j + f3 k`` from three dicts ``powers -> complex``."""
    terms = {}
    for axis, comp in enumerate(components, start=1):
        for p, c in comp.items():
            q = np.zeros(4, complex)
            q[axis] = c
            terms[tuple(p)] = terms.get(tuple(p), 0) + q
    return PolynomialField(terms)


def constant(c):
    return PolynomialField({(0, 0, 0): c}, "const")


def random_polynomial(rng, degree=3, n_terms=6, pure_vector=False):
    """Random complex-quaternion polynomial of total degree at most ``degree``."""
    monos = [p for p in product(range(degree + 1), repeat=3) if sum(p) <= degree]
    picks = rng.choice(len(monos), size=min(n_terms, len(monos)), replace=False)
    terms = {}
    for idx in picks:
        c = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        if pure_vector:
            c[0] = 0
        terms[monos[idx]] = c
    return PolynomialField(terms, "random")


def kernel_values(psi, r):
    """``(1/4pi) (r)_psi / |r|^3`` for offsets ``r`` (real quaternions)."""
    r = np.asarray(r, dtype=float)
    n = np.linalg.norm(r, axis=-1)
    return embed(psi, r) / (FOUR_PI * n[..., None] ** 3)


def kernel_gradient(psi, r):
    """Partials ``d/dr_k`` of the kernel: ``(..., 3, 4)``."""
    r = np.asarray(r, dtype=float)
    n = np.linalg.norm(r, axis=-1)[..., None, None]
    e = embed(psi, r)[..., None, :]
    p = psi.psi  # (3, 4)
    return (p / n**3 - 3.0 * r[..., :, None] * e / n**5) / FOUR_PI


class GridField(QuaternionField):
    """Field sampled on a rectilinear grid, trilinearly interpolated.

    ``axes`` are three increasing 1-d coordinate arrays and ``values`` has
    shape ``(n1, n2, n3, 4)``.  Interpolation is only piecewise linear, so
    finite-difference derivatives are first-order accurate in the grid
    spacing; the domain is the closed grid box.
    """

    def __init__(self, axes, values, name="grid"):
        from scipy.interpolate import RegularGridInterpolator

        self.axes = tuple(np.asarray(a, dtype=float) for a in axes)
        self.values = np.asarray(values, dtype=complex)
        shape = tuple(len(a) for a in self.axes)
        if len(self.axes) != 3 or self.values.shape != shape + (4,):
            raise ValueError(f"values must have shape {shape + (4,)}, got {self.values.shape}")
        if any(len(a) < 2 or np.any(np.diff(a) <= 0) for a in self.axes):
            raise ValueError("grid axes must be strictly increasing with at least 2 nodes")
        self._interp = RegularGridInterpolator(self.axes, self.values, method="linear", bounds_error=True)
        lo = np.array([a[0] for a in self.axes])
        hi = np.array([a[-1] for a in self.axes])
        self.bounds = (lo, hi)
        super().__init__(
            lambda x: self._interp(x.reshape(-1, 3)).reshape(x.shape[:-1] + (4,)),
            None,
            lambda x: np.all((np.asarray(x) >= lo) & (np.asarray(x) <= hi), axis=-1),
            name,
        )

    @property
    def spacing(self):
        return float(min(np.diff(a).min() for a in self.axes))

    def interior_nodes(self, margin=1):
        """Grid nodes at least ``margin`` cells away from the box faces, ``(n, 3)``."""
        cut = [a[margin : len(a) - margin] for a in self.axes]
        return np.stack(np.meshgrid(*cut, indexing="ij"), axis=-1).reshape(-1, 3)


def load_grid_csv(path):
    """GridField from CSV rows ``x, y, z`` followed by 8 reals (re/im of 4 components).

    The nodes must cover a full rectilinear grid, in any order.
    """
    data = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
    if data.shape[1] != 11:
        raise ValueError(f"grid CSV needs 11 columns (x, y, z, 8 reals), got {data.shape[1]}")
    axes = [np.unique(data[:, k]) for k in range(3)]
    shape = tuple(len(a) for a in axes)
    if data.shape[0] != np.prod(shape):
        raise ValueError(f"{data.shape[0]} rows do not fill a {shape} grid")
    idx = tuple(np.searchsorted(a, data[:, k]) for k, a in enumerate(axes))
    vals = np.full(shape + (4,), np.nan, complex)
    vals[idx] = data[:, 3::2] + 1j * data[:, 4::2]
    if np.isnan(vals.real).any():
        raise ValueError("grid CSV has duplicate or missing nodes")
    return GridField(axes, vals, name=str(path))


class KernelField(QuaternionField):
    """``K_psi(x - a)``: two-sided hyperholomorphic away from the pole ``a``."""

    def __init__(self, psi, pole, scale=1.0):
        self.psi = psi
        self.pole = np.asarray(pole, dtype=float)
        self.scale = scale
        super().__init__(
            lambda x: scale * kernel_values(psi, x - self.pole),
            lambda x: scale * kernel_gradient(psi, x - self.pole),
            lambda x: np.linalg.norm(np.asarray(x) - self.pole, axis=-1) > 0,
            f"K(x-{self.pole.tolist()})",
        )
