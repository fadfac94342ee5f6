"""Interior/exterior decomposition of boundary vector fields.

Given pure-vector boundary data ``f`` whose scalar Cauchy component
vanishes off the surface, the data are extended into the domain
(``f^w``) and split as

    F+(x) = f^w(x) - T[psiD f^w](x)   inside,
    F-(x) = T[psiD f^w](x)            outside,

so that ``F+ + F- = f`` on the boundary and ``F-`` vanishes at infinity.

The extension replaces a dyadic Whitney construction by a closest-point
blend that is mollified towards the domain-average ``m`` of ``f``:

    f^w(x) = m + phi(d(x) / rho) (b(cp(x)) - m),

where ``cp`` is the closest surface point, ``d`` the distance, ``b`` a
moving-least-squares interpolant of the nodal values and ``phi`` a smooth
cutoff.  ``psiD f^w`` vanishes deeper than ``rho``, so only a shell of
cells enters the volume quadrature.
"""

from dataclasses import dataclass, field
import math
import warnings

import numpy as np

from .fields import QuaternionField
from .geometry import DegenerateMesh
from .operators import DerivativeScheme, apply_Dpsi, apply_psiD, mt_residual
from .quaternion import from_vector
from .structural import make_psi_theta
from .transforms import (
    BoundaryField,
    VolumeQuadrature,
    _as_psi,
    _require_pure,
    fibonacci_sphere,
    holder_exponent_fit,
    m_psi_test,
    richardson,
    teodorescu,
    winding_number,
)


class MembershipFailed(ValueError):
    pass


class QuadratureBudgetExceeded(RuntimeError):
    pass


PROFILES = {
    # phi(s) on [0, 1]: 1 at s = 0, 0 at s = 1
    "quintic": lambda s: 1.0 - s**3 * (10.0 - 15.0 * s + 6.0 * s**2),
    "smoothstep": lambda s: 1.0 - s**2 * (3.0 - 2.0 * s),
    "cosine": lambda s: 0.5 * (1.0 + np.cos(math.pi * s)),
}


@dataclass(frozen=True)
class ExtensionParams:
    """Extension settings.

    ``rho`` is the mollification radius; ``fd_step`` the central-difference
    step for ``psiD f^w`` (defaults to ``rho / 8``); ``refine`` the number of
    8-way splits of shell cells (boundary-adjacent cells get one more).
    """

    rho: float | None = None
    profile: str = "quintic"
    fd_step: float | None = None
    k: int = 6
    refine: int = 0
    max_cells: int = 2_000_000

    def __post_init__(self):
        if self.profile not in PROFILES:
            raise ValueError(f"unknown cutoff profile {self.profile!r}; choose from {sorted(PROFILES)}")
        if self.rho is not None and not self.rho > 0:
            raise ValueError("rho must be positive")
        if self.k < 3:
            raise ValueError("blend needs at least 3 nodes")

    def resolve(self, surface):
        """Concrete ``(rho, fd_step)`` for ``surface``; checks ``rho < inradius / 2``."""
        rho = 0.4 * surface.inradius if self.rho is None else self.rho
        if not 0 < rho < surface.inradius / 2:
            raise ValueError(f"rho={rho:.4g} must lie in (0, inradius/2 = {surface.inradius / 2:.4g})")
        step = rho / 8 if self.fd_step is None else self.fd_step
        if not 0 < step <= rho / 4:
            raise ValueError("fd_step must lie in (0, rho/4]")
        return rho, step


def _check_surface(surface, n_sample=64):
    """Cheap sanity check that inside/outside is well defined near the surface."""
    if surface.volume <= 0:
        raise DegenerateMesh("enclosed volume is not positive")
    idx = np.linspace(0, surface.n_triangles - 1, min(n_sample, surface.n_triangles)).astype(int)
    off = 1e-3 * surface.diameters[idx, None] * surface.normals[idx]
    w_in = winding_number(surface, surface.centroids[idx] - off)
    w_out = winding_number(surface, surface.centroids[idx] + off)
    if np.any(np.abs(w_in - 1) > 0.1) or np.any(np.abs(w_out) > 0.1):
        raise DegenerateMesh("closest-point field ill-defined: surface overlaps itself")


def _tangent_frame(n):
    a = np.where(np.abs(n[:, :1]) < 0.9, np.array([[1.0, 0, 0]]), np.array([[0, 1.0, 0]]))
    e1 = np.cross(n, a)
    e1 /= np.linalg.norm(e1, axis=1)[:, None]
    return e1, np.cross(n, e1)


def mls_blend(surface, values, cp, tri, k=6):
    """Interpolating linear moving least squares at surface points ``cp``.

    Uses the ``k`` nearest nodes with weights ``(1 - (d/R)^2)^2 / d^2``,
    ``R`` the distance to the ``(k+1)``-th node, so the stencil changes
    continuously.  Exact at nodes.
    """
    d, idx = surface.nearest_nodes(cp, k + 1)
    R = d[:, k] * (1 + 1e-9) + 1e-300
    d, idx = d[:, :k], idx[:, :k]
    tiny = 1e-10 * surface.h
    w = (1 - (d / R[:, None]) ** 2) ** 2 / (d**2 + tiny**2)
    w /= w.max(axis=1, keepdims=True)
    e1, e2 = _tangent_frame(surface.normals[tri])
    rel = surface.centroids[idx] - cp[:, None]
    basis = np.stack([np.ones_like(d), np.einsum("nkd,nd->nk", rel, e1), np.einsum("nkd,nd->nk", rel, e2)], axis=2)
    gram = np.einsum("nk,nka,nkb->nab", w, basis, basis)
    rhs = np.einsum("nk,nka,nkq->naq", w, basis, values[idx])
    out = np.empty((len(cp), 4), complex)
    ok = np.linalg.cond(gram) < 1e10
    if ok.any():
        out[ok] = np.linalg.solve(gram[ok], rhs[ok])[:, 0]
    if (~ok).any():  # Shepard fallback
        out[~ok] = np.einsum("nk,nkq->nq", w[~ok], values[idx[~ok]]) / w[~ok].sum(axis=1)[:, None]
    exact = d[:, 0] <= tiny
    out[exact] = values[idx[exact, 0]]
    return out


class WhitneyExtension(QuaternionField):
    """The extension ``f^w``: zero outside the domain.

    ``smooth`` is the same formula without the outside cut-off (a Lipschitz
    field across the surface), used for finite differences near it.
    """

    def __init__(self, surface, f, params=None):
        params = params or ExtensionParams()
        self.surface = surface
        self.f = f
        self.params = params
        self.rho, self.fd_step = params.resolve(surface)
        self.phi = PROFILES[params.profile]
        self.mean = (f.values * surface.areas[:, None]).sum(axis=0) / surface.area
        self._rmax = surface.radii.max()
        self.smooth = QuaternionField(self._unclipped, name="f^w (unclipped)")
        super().__init__(self._clipped, name="f^w")

    def _unclipped(self, x):
        x = np.asarray(x, float)
        shape = x.shape[:-1]
        x = x.reshape(-1, 3)
        out = np.broadcast_to(self.mean, (len(x), 4)).copy()
        # nearest centroid minus the largest triangle radius bounds the distance below
        lower = self.surface._tree.query(x)[0] - self._rmax
        near = np.flatnonzero(lower < self.rho)
        if len(near):
            cp, d, tri = self.surface.closest_point(x[near])
            inside_band = d < self.rho
            sel = near[inside_band]
            if len(sel):
                b = mls_blend(self.surface, self.f.values, cp[inside_band], tri[inside_band], self.params.k)
                s = d[inside_band] / self.rho
                out[sel] = self.mean + self.phi(s)[:, None] * (b - self.mean)
        return out.reshape(shape + (4,))

    def _clipped(self, x):
        x = np.asarray(x, float)
        out = self._unclipped(x)
        return np.where((winding_number(self.surface, x) > 0.5)[..., None], out, 0)


def extend_boundary_field(surface, f, params=None):
    """Closest-point blend of ``f`` mollified over ``rho``; zero outside the domain."""
    _check_surface(surface)
    return WhitneyExtension(surface, f, params)


def shell_quadrature(mesh, surface, rho, refine=0, max_cells=2_000_000):
    """Cells of ``mesh`` that can meet the ``rho``-shell, refined; boundary-adjacent cells once more."""
    d = surface.closest_point(mesh.centroids)[1]
    shell = d < rho + mesh.radii
    on_surface = np.zeros(len(mesh.vertices), bool)
    on_surface[np.unique(mesh.boundary_faces())] = True
    touching = on_surface[mesh.tets].any(axis=1)
    inner = shell & ~touching
    outer = shell & touching
    count = inner.sum() * 8**refine + outer.sum() * 8 ** (refine + 1)
    if count > max_cells:
        raise QuadratureBudgetExceeded(f"{count} quadrature cells exceed the budget of {max_cells}")
    from .geometry import subdivide_tets

    parts = []
    for sel, depth in ((inner, refine), (outer, refine + 1)):
        c = mesh.vertices[mesh.tets[sel]]
        for _ in range(depth):
            c = subdivide_tets(c)
        parts.append(c)
    return VolumeQuadrature(np.concatenate(parts))


@dataclass(eq=False)
class Decomposition:
    F_plus: QuaternionField
    F_minus: QuaternionField
    extension: WhitneyExtension
    quadrature: VolumeQuadrature
    theta: float
    trace_residual: np.ndarray | None = None
    trace_nodes: np.ndarray | None = None
    mt_plus: np.ndarray | None = None
    mt_minus: np.ndarray | None = None
    decay: list = field(default_factory=list)
    membership: float = 0.0
    holder_exponent: float = 1.0

    def report(self):
        return {
            "theta": self.theta,
            "rho": self.extension.rho,
            "fd_step": self.extension.fd_step,
            "profile": self.extension.params.profile,
            "quadrature_cells": self.quadrature.n_cells,
            "membership_max_scalar": self.membership,
            "holder_exponent_fit": self.holder_exponent,
            "trace_residual_max": None if self.trace_residual is None else float(self.trace_residual.max()),
            "mt_residual_plus_max": None if self.mt_plus is None else float(np.abs(self.mt_plus).max()),
            "mt_residual_minus_max": None if self.mt_minus is None else float(np.abs(self.mt_minus).max()),
            "decay": self.decay,
        }


class _TeodorescuField:
    """``T[g]`` with ``g`` precomputed at the quadrature cells."""

    def __init__(self, quad, g, psi):
        self.quad, self.g, self.psi = quad, g, psi
        self.values = g(quad.centroids)
        self.cache = {}

    def __call__(self, x):
        return teodorescu(self.quad, self.g, self.psi, x, g_values=self.values, cache=self.cache)


def decompose(
    surface,
    mesh,
    f,
    theta,
    params=None,
    membership_rtol=1e-2,
    verify=True,
    trace_nodes=256,
):
    """Split pure-vector boundary data into interior and exterior hyperholomorphic parts.

    Raises ``MembershipFailed`` when the scalar Cauchy component of ``f`` at
    the default probes exceeds ``membership_rtol * |f|_inf``.
    """
    _require_pure(f)
    psi = make_psi_theta(theta)
    params = params or ExtensionParams()
    sup = f.sup_norm
    mem = m_psi_test(surface, f, psi, tol=membership_rtol * sup)
    if not mem.member:
        raise MembershipFailed(
            f"scalar Cauchy component {mem.max_scalar:.3g} exceeds {mem.tol:.3g}; the decomposition is not guaranteed"
        )
    mu = holder_exponent_fit(surface, f) if sup > 0 else 1.0
    if mu <= 2 / 3:
        warnings.warn(f"boundary data look Hoelder with exponent {mu:.2f} <= 2/3", RuntimeWarning, stacklevel=2)

    ext = extend_boundary_field(surface, f, params)
    quad = shell_quadrature(mesh, surface, ext.rho, params.refine, params.max_cells)
    scheme = DerivativeScheme("central", ext.fd_step)
    g = QuaternionField(lambda y: apply_psiD(psi, ext.smooth, y, scheme), name="psiD f^w")
    T = _TeodorescuField(quad, g, psi)

    inside_dom = lambda x: winding_number(surface, x) > 0.5  # noqa: E731
    outside_dom = lambda x: ~inside_dom(x)  # noqa: E731
    F_plus = QuaternionField(lambda x: ext.smooth(x) - T(x), domain=inside_dom, name="F+")
    F_minus = QuaternionField(T, domain=outside_dom, name="F-")
    d = Decomposition(F_plus, F_minus, ext, quad, psi.theta, membership=mem.max_scalar, holder_exponent=mu)
    if verify:
        verify_decomposition(d, surface, f, nodes=trace_nodes)
    return d


def _node_subset(surface, nodes):
    if nodes is None:
        return np.arange(surface.n_triangles)
    if np.isscalar(nodes):
        n = int(nodes)
        return np.unique(np.linspace(0, surface.n_triangles - 1, min(n, surface.n_triangles)).astype(int))
    return np.asarray(nodes, dtype=np.int64)


def one_sided_limit(F, surface, nodes, side, delta0=None, levels=4):
    """Richardson limit of ``F(t -+ delta_k nu)`` (``'+'`` from inside)."""
    from .transforms import default_offset

    delta0 = default_offset(surface) if delta0 is None else delta0
    t = surface.centroids[nodes]
    n = surface.normals[nodes]
    sgn = -1.0 if side == "+" else 1.0
    samples = [F(t + sgn * (delta0 / 2**k) * n) for k in range(levels)]
    return richardson(samples)[0]


def verify_decomposition(d, surface, f, nodes=256, probes=None, radii=(2.5, 5.0, 10.0, 20.0), scheme=None):
    """Trace residuals at nodes, MT residuals at probes and far-field decay of ``F-``.

    Results are stored on ``d`` and returned as a dict.
    """
    nodes = _node_subset(surface, nodes)
    kp = one_sided_limit(d.F_plus, surface, nodes, "+")
    km = one_sided_limit(d.F_minus, surface, nodes, "-")
    d.trace_nodes = nodes
    d.trace_residual = np.sqrt(np.sum(np.abs(kp + km - f.values[nodes]) ** 2, axis=1))

    R = surface.circumradius
    c = surface.center
    p_in = fibonacci_sphere(64, 0.5 * R, c) if probes is None else probes[0]
    p_out = fibonacci_sphere(64, 2.0 * R, c) if probes is None else probes[1]
    scheme = scheme or DerivativeScheme("central", 1e-3 * R)
    d.mt_plus = mt_residual(d.theta, d.F_plus, p_in, scheme)
    d.mt_minus = mt_residual(d.theta, d.F_minus, p_out, scheme)

    d.decay = []
    for r in radii:
        x = fibonacci_sphere(16, r * R, c)
        d.decay.append({"radius": r * R, "max_abs": float(np.abs(d.F_minus(x)).max())})
    return d.report()


def two_sided_residuals(d, psi, points, scheme=None):
    """Left and right ``psi``-derivatives of ``F+`` (inside points) or ``F-``."""
    psi = _as_psi(psi)
    scheme = scheme or DerivativeScheme("central", 1e-3)
    inside_mask = winding_number(d.extension.surface, points) > 0.5
    out = {}
    for name, F, mask in (("plus", d.F_plus, inside_mask), ("minus", d.F_minus, ~inside_mask)):
        if mask.any():
            p = points[mask]
            out[name] = (np.abs(apply_psiD(psi, F, p, scheme)).max(), np.abs(apply_Dpsi(psi, F, p, scheme)).max())
    return out


def boundary_data_from_vectors(surface, vectors):
    """BoundaryField from complex 3-vectors ``(T, 3)`` at the nodes."""
    return BoundaryField(surface, from_vector(np.asarray(vectors, complex)))


__all__ = [
    "Decomposition",
    "ExtensionParams",
    "MembershipFailed",
    "PROFILES",
    "QuadratureBudgetExceeded",
    "WhitneyExtension",
    "boundary_data_from_vectors",
    "decompose",
    "extend_boundary_field",
    "mls_blend",
    "one_sided_limit",
    "shell_quadrature",
    "two_sided_residuals",
    "verify_decomposition",
]
