"""Left/right structural Dirac operators and the psi^theta component operators.

All operators take a field and an array of points ``(..., 3)`` and return
complex quaternions ``(..., 4)``.  Derivatives come from a
:class:`DerivativeScheme`: analytic (the field's own gradient) or central
differences of step ``h``.
"""

from dataclasses import dataclass
import math

import numpy as np

from .fields import PolynomialField, QuaternionField
from .quaternion import I, J, K, ONE, conj, norm_c, qmul
from .structural import StructuralSet, conj_set, make_psi_theta


class StencilOutsideDomain(ValueError):
    """A finite-difference stencil left the field's domain."""


@dataclass(frozen=True)
class DerivativeScheme:
    mode: str = "analytic"
    h: float = 1e-4

    def __post_init__(self):
        if self.mode not in ("analytic", "central"):
            raise ValueError(f"unknown derivative mode {self.mode!r}")
        if not self.h > 0:
            raise ValueError("step h must be positive")


ANALYTIC = DerivativeScheme("analytic")


def default_scheme(diameter=1.0):
    return DerivativeScheme("central", 1e-4 * diameter)


def _as_psi(psi):
    if isinstance(psi, StructuralSet):
        return psi
    return make_psi_theta(psi)


def _theta(psi):
    psi = _as_psi(psi)
    if psi.theta is None:
        raise ValueError("operator defined for psi^theta sets only")
    return psi.theta


def partials(f, x, scheme=ANALYTIC):
    """``df/dx_k`` at ``x`` as ``(..., 3, 4)``."""
    x = np.asarray(x, dtype=float)
    if scheme.mode == "analytic":
        if not getattr(f, "has_grad", False):
            raise ValueError(f"{f!r} has no analytic gradient; use a central scheme")
        return f.grad(x)
    h = scheme.h
    cols = []
    for k in range(3):
        e = np.zeros(3)
        e[k] = h
        xp, xm = x + e, x - e
        if f.domain is not None and not (np.all(f.domain(xp)) and np.all(f.domain(xm))):
            raise StencilOutsideDomain(f"stencil of width {h} leaves the domain of {f!r}")
        cols.append((f(xp) - f(xm)) / (2 * h))
    return np.stack(cols, axis=-2)


def apply_psiD(psi, f, x, scheme=ANALYTIC):
    """``sum_k psi^k df/dx_k`` (left multiplication)."""
    psi = _as_psi(psi)
    d = partials(f, x, scheme)
    return sum(qmul(psi[k], d[..., k, :]) for k in range(3))


def apply_Dpsi(psi, f, x, scheme=ANALYTIC):
    """``sum_k df/dx_k psi^k`` (right multiplication)."""
    psi = _as_psi(psi)
    d = partials(f, x, scheme)
    return sum(qmul(d[..., k, :], psi[k]) for k in range(3))


def _exp_i(theta):
    return math.cos(theta) * ONE + math.sin(theta) * I


def _theta_units(theta):
    e = _exp_i(theta)
    ie = qmul(I, e)
    return e, ie, qmul(ie, J), qmul(ie, K), qmul(e, J)


def _comp(d, k, m):
    """``d f_m / d x_k`` (both one-based) as a complex array with a trailing unit axis."""
    return d[..., k - 1, m][..., None]


def _scalar_partials(d, k):
    return d[..., k - 1, 0][..., None]


def psi_div(psi, f, x, scheme=ANALYTIC):
    """``df1/dx1 + (df2/dx2 - df3/dx3) i e^{i theta}``."""
    _, ie, _, _, _ = _theta_units(_theta(psi))
    d = partials(f, x, scheme)
    return _comp(d, 1, 1) * ONE + (_comp(d, 2, 2) - _comp(d, 3, 3)) * ie


def psi_grad(psi, f, x, scheme=ANALYTIC):
    """Gradient of the scalar part along ``i, i e^{i theta} j, e^{i theta} j``."""
    _, _, iej, _, ej = _theta_units(_theta(psi))
    d = partials(f, x, scheme)
    return _scalar_partials(d, 1) * I + _scalar_partials(d, 2) * iej + _scalar_partials(d, 3) * ej


def psi_rot(psi, f, x, scheme=ANALYTIC):
    e, ie, _, _, _ = _theta_units(_theta(psi))
    d = partials(f, x, scheme)
    c = _comp
    term1 = (-c(d, 2, 3) - c(d, 3, 2)) * e
    term2 = qmul(-c(d, 3, 1) * ie - c(d, 1, 3) * ONE, J)
    term3 = qmul(c(d, 1, 2) * ONE - c(d, 2, 1) * ie, K)
    return term1 + term2 + term3


def conj_psi_div(psi, f, x, scheme=ANALYTIC):
    _, ie, _, _, _ = _theta_units(_theta(psi))
    d = partials(f, x, scheme)
    return _comp(d, 1, 1) * ONE + (_comp(d, 2, 2) - _comp(d, 3, 3)) * conj(ie)


def conj_psi_rot(psi, f, x, scheme=ANALYTIC):
    e, _, iej, iek, _ = _theta_units(_theta(psi))
    d = partials(f, x, scheme)
    c = _comp
    return (
        (-c(d, 2, 3) - c(d, 3, 2)) * conj(e)
        - c(d, 3, 1) * conj(iej)
        + c(d, 1, 3) * J
        - c(d, 1, 2) * K
        - c(d, 2, 1) * conj(iek)
    )


def mt_residual(theta, f, x, scheme=ANALYTIC):
    """Left-hand sides of the generalized Moisil-Teodorescu system, ``(..., 4)``.

    Only the vector components ``f1, f2, f3`` of ``f`` enter.
    """
    s, co = math.sin(theta), math.cos(theta)
    d = partials(f, x, scheme)

    def p(m, k):
        return d[..., k - 1, m]

    return np.stack(
        [
            -p(1, 1) + (p(2, 2) - p(3, 3)) * s - (p(3, 2) + p(2, 3)) * co,
            (p(3, 3) - p(2, 2)) * co - (p(3, 2) + p(2, 3)) * s,
            -p(3, 1) + p(1, 3) * s + p(1, 2) * co,
            p(2, 1) - p(1, 3) * co + p(1, 2) * s,
        ],
        axis=-1,
    )


def _apply_poly(psi, f, left=True):
    """Exact ``psiD f`` (or ``D^psi f``) of a polynomial field."""
    out = PolynomialField({})
    for k in range(3):
        dk = f.derivative(k)
        out = out + (dk.left_mul(psi[k]) if left else dk.right_mul(psi[k]))
    return out


def laplacian_check(psi, f, x, scheme=ANALYTIC):
    """``psiD[conj(psi)D[f]](x) - Laplacian f(x)``; vanishes iff ``psi`` is structural.

    Analytic mode differentiates polynomial fields exactly; fields with a
    gradient get one extra central difference of step ``scheme.h``.  In
    central mode both levels are nested central differences of step
    ``sqrt(h)``.
    """
    psi = _as_psi(psi)
    cpsi = conj_set(psi)
    x = np.asarray(x, dtype=float)
    if scheme.mode == "analytic" and isinstance(f, PolynomialField):
        inner = _apply_poly(cpsi, f)
        outer = _apply_poly(psi, inner)
        lap = sum((f.derivative(k).derivative(k) for k in range(3)), PolynomialField({}))
        return outer(x) - lap(x)
    if scheme.mode == "analytic":
        step = scheme.h
        inner = QuaternionField(lambda y: apply_psiD(cpsi, f, y, ANALYTIC), domain=f.domain)
        outer = apply_psiD(psi, inner, x, DerivativeScheme("central", step))
        gradk = QuaternionField(lambda y: f.grad(y), domain=f.domain)
        lap = 0
        for k in range(3):
            e = np.zeros(3)
            e[k] = step
            lap = lap + (gradk(x + e)[..., k, :] - gradk(x - e)[..., k, :]) / (2 * step)
        return outer - lap
    h2 = math.sqrt(scheme.h)
    nested = DerivativeScheme("central", h2)
    inner = QuaternionField(lambda y: apply_psiD(cpsi, f, y, nested), domain=f.domain)
    outer = apply_psiD(psi, inner, x, nested)
    lap = 0
    for k in range(3):
        e = np.zeros(3)
        e[k] = 2 * h2
        lap = lap + (f(x + e) - 2 * f(x) + f(x - e)) / (4 * h2 * h2)
    return outer - lap


@dataclass
class SpecialCase:
    case: str
    theta: float
    mapping: str
    field: QuaternionField
    residual: object  # callable (x, scheme) -> (..., 4)


SPECIAL_CASES = {
    "div-rot": (0.0, "f1 i + f3 j + f2 k"),
    "cimmino": (math.pi / 2, "f1 i + f2 j + f3 k"),
    "riesz": (math.pi, "f1 + f3 i + f2 j"),
    "theta-3pi/2": (1.5 * math.pi, "f1 i + f2 j + f3 k"),
}


def _permute(f, src_axes, dst_axes):
    """New field whose component ``dst`` equals component ``src`` of ``f``."""
    perm = np.zeros((4, 4))
    for s, t in zip(src_axes, dst_axes):
        perm[t, s] = 1.0

    def grad(x):
        return f.grad(x) @ perm.T

    return QuaternionField(lambda x: f(x) @ perm.T, grad if f.has_grad else None, f.domain, f"mapped({f.name})")


def special_case_map(case, f):
    """Map a solution of the generalized system to the named classical system.

    ``residual(x, scheme)`` evaluates the classical system on the mapped
    field, written out independently of :func:`mt_residual`:

    * ``div-rot``: ``(div g, rot g)``
    * ``cimmino``, ``theta-3pi/2``: the displayed four-equation systems
    * ``riesz``: the four equations in ``(g0, g1, g2)`` with coordinates
      ``(x0, x1, x2) = (x1, x2, x3)``
    """
    if case not in SPECIAL_CASES:
        raise ValueError(f"unknown special case {case!r}")
    theta, mapping = SPECIAL_CASES[case]
    if case == "div-rot":
        g = _permute(f, [1, 3, 2], [1, 2, 3])

        def residual(x, scheme=ANALYTIC):
            d = partials(g, x, scheme)
            div = d[..., 0, 1] + d[..., 1, 2] + d[..., 2, 3]
            rot = np.stack(
                [d[..., 1, 3] - d[..., 2, 2], d[..., 2, 1] - d[..., 0, 3], d[..., 0, 2] - d[..., 1, 1]], axis=-1
            )
            return np.concatenate([div[..., None], rot], axis=-1)

    elif case == "riesz":
        g = _permute(f, [1, 3, 2], [0, 1, 2])

        def residual(x, scheme=ANALYTIC):
            d = partials(g, x, scheme)

            def p(m, k):  # d g_m / d x_k with x0..x2 the three coordinates
                return d[..., k, m]

            return np.stack(
                [
                    p(0, 0) - p(1, 1) - p(2, 2),
                    p(0, 1) + p(1, 0),
                    p(0, 2) + p(2, 0),
                    p(1, 2) - p(2, 1),
                ],
                axis=-1,
            )

    elif case == "cimmino":
        g = f

        def residual(x, scheme=ANALYTIC):
            d = partials(g, x, scheme)

            def p(m, k):
                return d[..., k - 1, m]

            return np.stack(
                [
                    -p(1, 1) + p(2, 2) - p(3, 3),
                    -p(3, 2) - p(2, 3),
                    -p(3, 1) + p(1, 3),
                    p(2, 1) + p(1, 2),
                ],
                axis=-1,
            )

    else:
        g = f

        def residual(x, scheme=ANALYTIC):
            d = partials(g, x, scheme)

            def p(m, k):
                return d[..., k - 1, m]

            return np.stack(
                [
                    -p(1, 1) - p(2, 2) + p(3, 3),
                    p(3, 2) + p(2, 3),
                    -p(3, 1) - p(1, 3),
                    p(2, 1) - p(1, 2),
                ],
                axis=-1,
            )

    return SpecialCase(case, theta, mapping, g, residual)


@dataclass
class TwoSidedReport:
    grad_scalar_max: float
    mt_residual_max: float
    tol: float

    @property
    def two_sided(self):
        return self.grad_scalar_max <= self.tol and self.mt_residual_max <= self.tol


def two_sided_check(psi, f, points, scheme=ANALYTIC, tol=1e-8):
    """Left-right hyperholomorphy test: ``grad[f0] = 0`` and ``Vec f`` solves the system."""
    theta = _theta(psi)
    g = psi_grad(psi, f, points, scheme)
    r = mt_residual(theta, f, points, scheme)
    return TwoSidedReport(
        float(np.max(norm_c(g), initial=0.0)), float(np.max(np.abs(r), initial=0.0)), tol
    )
