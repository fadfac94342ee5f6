"""Quadrature for the Cauchy, Teodorescu and singular Cauchy transforms.

Sign convention
---------------
``cauchy_kernel`` is ``(1/4pi) (x)_psi / |x|^3``.  For a structural set of
pure vectors this is *minus* the fundamental solution of ``psiD``
(``psiD[cauchy_kernel] = -delta``), so the transforms are

* ``K_Gamma[f](x) = + int_Gamma K(x - xi) nu_psi(xi) f(xi) dS``
* ``T[g](x)       = - int_Omega K(x - xi) g(xi) dm``
* ``S_Gamma[f](t) = f(t) + 2 PV int_Gamma K(t - tau) nu_psi (f(tau) - f(t)) dS``

which gives ``K_Gamma[f] + T[psiD f] = f`` inside and ``0`` outside,
``psiD T[g] = g`` inside, and ``K^{+-} = (S f +- f) / 2`` on the boundary.

Surface integrals use the one-point centroid rule per triangle; volume
integrals the centroid rule per tetrahedron.  Boundary nodes are triangle
centroids.
"""

from dataclasses import dataclass
import math

import numpy as np
from scipy.spatial import cKDTree

from .fields import FOUR_PI, QuaternionField
from .geometry import TetrahedralMesh, subdivide_tets, tet_volumes
from .kernels import coulomb_sum
from .operators import ANALYTIC, apply_Dpsi, apply_psiD
from .quaternion import (
    PURE_VECTOR_ATOL,
    NotPureVector,
    from_reals,
    from_vector,
    qmul,
    to_reals,
)
from .structural import StructuralSet, embed, make_psi_theta


class SingularPoint(ValueError):
    pass


class TooCloseToSurface(ValueError):
    pass


class ExtrapolationDiverged(ArithmeticError):
    pass


def _as_psi(psi):
    return psi if isinstance(psi, StructuralSet) else make_psi_theta(psi)


def cauchy_kernel(psi, x):
    """``(1/4pi) (x)_psi / |x|^3`` (real quaternion); raises at ``x = 0``."""
    psi = _as_psi(psi)
    x = np.asarray(x, dtype=float)
    r = np.linalg.norm(x, axis=-1)
    if np.any(r == 0):
        raise SingularPoint("Cauchy kernel is singular at the origin")
    return embed(psi, x) / (FOUR_PI * r[..., None] ** 3)


@dataclass(eq=False)
class BoundaryField:
    """Complex-quaternion values at the triangle centroids of ``surface``."""

    surface: object
    values: np.ndarray
    source: QuaternionField | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != (self.surface.n_triangles, 4):
            raise ValueError(f"expected values of shape ({self.surface.n_triangles}, 4), got {self.values.shape}")

    @classmethod
    def sample(cls, surface, field):
        return cls(surface, field(surface.centroids), field)

    @classmethod
    def zeros(cls, surface):
        return cls(surface, np.zeros((surface.n_triangles, 4), complex))

    @property
    def pure(self):
        return bool(np.all(np.abs(self.values[:, 0]) <= PURE_VECTOR_ATOL))

    @property
    def sup_norm(self):
        return float(np.max(np.sqrt(np.sum(np.abs(self.values) ** 2, axis=1))))

    def __add__(self, other):
        return BoundaryField(self.surface, self.values + other.values)

    def __mul__(self, alpha):
        return BoundaryField(self.surface, alpha * self.values)

    __rmul__ = __mul__


def _require_pure(f):
    if not f.pure:
        raise NotPureVector("boundary field has a non-zero scalar part")


def nu_psi(surface, psi):
    """Outward normals embedded with the structural set, ``(T, 4)`` real."""
    return embed(psi, surface.normals)


def _left(psi, a):
    """``(1/4pi) sum_k psi^k a_k`` for ``a`` of shape ``(M, 3, 4)``."""
    return sum(qmul(psi[k], a[:, k]) for k in range(3)) / FOUR_PI


def _right(psi, a):
    return sum(qmul(a[:, k], psi[k]) for k in range(3)) / FOUR_PI


def _sum(x, points, weights, exclude=None):
    """Coulomb sums of complex-quaternion weights: ``(M, 3, 4)`` per weight block."""
    w = np.concatenate([to_reals(wi) for wi in weights], axis=1)
    out = coulomb_sum(x, points, w, exclude)
    return [from_reals(out[:, :, 8 * i : 8 * i + 8]) for i in range(len(weights))]


def _points(x):
    x = np.asarray(x, dtype=float)
    return x.reshape(-1, 3), x.shape[:-1]


def _check_distance(surface, x, factor=2.0):
    d = surface.closest_point(x)[1]
    if np.any(d < factor * surface.h):
        raise TooCloseToSurface(
            f"point at distance {d.min():.3g} < {factor} h = {factor * surface.h:.3g}; use boundary_limit"
        )


def cauchy_transform(surface, f, psi, x, check=True):
    """Left Cauchy transform ``sum_T K(x - c_T) nu_psi f(c_T) area_T``."""
    psi = _as_psi(psi)
    x, shape = _points(x)
    if check:
        _check_distance(surface, x)
    w = qmul(nu_psi(surface, psi), f.values) * surface.areas[:, None]
    (a,) = _sum(x, surface.centroids, [w])
    return _left(psi, a).reshape(shape + (4,))


def right_cauchy_transform(surface, f, psi, x, check=True):
    """Right Cauchy transform ``sum_T f(c_T) nu_psi K(x - c_T) area_T``."""
    psi = _as_psi(psi)
    x, shape = _points(x)
    if check:
        _check_distance(surface, x)
    w = qmul(f.values, nu_psi(surface, psi)) * surface.areas[:, None]
    (a,) = _sum(x, surface.centroids, [w])
    return _right(psi, a).reshape(shape + (4,))


def winding_number(surface, x):
    """Generalised winding number (1 inside, 0 outside, 1/2 on smooth boundary points)."""
    x, shape = _points(x)
    p = surface.vertices[surface.triangles]
    out = np.zeros(len(x))
    step = max(1, (1 << 20) // max(len(p), 1))
    for lo in range(0, len(x), step):
        xs = x[lo : lo + step, None, None, :]
        r = p[None] - xs  # (m, T, 3, 3)
        n = np.linalg.norm(r, axis=-1)
        a, b, c = r[..., 0, :], r[..., 1, :], r[..., 2, :]
        num = np.einsum("...i,...i", a, np.cross(b, c))
        den = (
            n[..., 0] * n[..., 1] * n[..., 2]
            + np.einsum("...i,...i", a, b) * n[..., 2]
            + np.einsum("...i,...i", a, c) * n[..., 1]
            + np.einsum("...i,...i", b, c) * n[..., 0]
        )
        out[lo : lo + step] = 2 * np.arctan2(num, den).sum(axis=1) / (4 * math.pi)
    return out.reshape(shape)


def inside(surface, x):
    return winding_number(surface, x) > 0.5


# --------------------------------------------------------------------------- Teodorescu


@dataclass(eq=False)
class VolumeQuadrature:
    """Flat list of tetrahedra (corner coordinates) used as centroid-rule cells."""

    corners: np.ndarray  # (m, 4, 3)

    def __post_init__(self):
        self.corners = np.asarray(self.corners, dtype=float)
        self.volumes = tet_volumes(self.corners)
        self.centroids = self.corners.mean(axis=1)
        self.radii = np.linalg.norm(self.corners - self.centroids[:, None], axis=2).max(axis=1)
        self._tree = None

    @classmethod
    def from_mesh(cls, mesh, refine=0, select=None):
        """Cells of ``mesh``; those flagged by ``select`` are split ``refine`` times (8-way)."""
        corners = mesh.vertices[mesh.tets]
        if refine and select is not None:
            sel = np.asarray(select, bool)
            fine = corners[sel]
            for _ in range(refine):
                fine = subdivide_tets(fine)
            corners = np.concatenate([corners[~sel], fine])
        elif refine:
            for _ in range(refine):
                corners = subdivide_tets(corners)
        return cls(corners)

    @property
    def n_cells(self):
        return len(self.corners)

    @property
    def tree(self):
        if self._tree is None:
            self._tree = cKDTree(self.centroids)
        return self._tree


def _as_quadrature(omega):
    if isinstance(omega, VolumeQuadrature):
        return omega
    if isinstance(omega, TetrahedralMesh):
        return VolumeQuadrature.from_mesh(omega)
    raise TypeError("expected a TetrahedralMesh or VolumeQuadrature")


def _contains(corners, x, tol=1e-12):
    """Barycentric containment of points ``x`` (n, 3) in tets ``corners`` (n, 4, 3)."""
    t = corners[:, 1:] - corners[:, :1]  # (n, 3, 3) rows = edge vectors
    lam = np.linalg.solve(np.swapaxes(t, 1, 2), (x - corners[:, 0])[..., None])[..., 0]
    return (lam >= -tol).all(axis=1) & (lam.sum(axis=1) <= 1 + tol)


def _near_cell_pairs(quad, x):
    """(target, cell) index pairs whose bounding ball contains the target."""
    tree = quad.tree
    rmax = quad.radii.max()
    tgt, cell = [], []
    for m, cand in enumerate(tree.query_ball_point(x, rmax)):
        if not cand:
            continue
        cand = np.asarray(cand)
        hit = cand[np.linalg.norm(quad.centroids[cand] - x[m], axis=1) <= quad.radii[cand]]
        tgt += [m] * len(hit)
        cell += hit.tolist()
    return np.asarray(tgt, dtype=np.int64), np.asarray(cell, dtype=np.int64)


def teodorescu(omega, g, psi, x, singular_depth=1, g_values=None, cache=None):
    """Teodorescu transform ``-sum_cells K(x - c) g(c) vol`` for any ``x``.

    Cells whose bounding ball contains ``x`` are split 8-way
    ``singular_depth`` times; sub-cells whose ball still contains ``x`` are
    dropped (the kernel is absolutely integrable).  ``g_values`` may hold
    precomputed values of ``g`` at the cell centroids; ``cache`` (a dict)
    memoises ``g`` at the first-level children of singular cells across calls
    with the same ``g``.
    """
    psi = _as_psi(psi)
    quad = _as_quadrature(omega)
    x, shape = _points(x)
    gv = g(quad.centroids) if g_values is None else np.asarray(g_values, complex)
    (a,) = _sum(x, quad.centroids, [gv * quad.volumes[:, None]])
    total = -_left(psi, a)

    tgt, cell = _near_cell_pairs(quad, x)
    if not len(tgt):
        return total.reshape(shape + (4,))
    corr = np.zeros((len(x), 4), complex)
    # remove the centroid contributions of the singular cells
    r = x[tgt] - quad.centroids[cell]
    ok = np.linalg.norm(r, axis=1) > 0
    k = np.zeros((len(tgt), 4))
    k[ok] = cauchy_kernel(psi, r[ok])
    np.add.at(corr, tgt, qmul(k, gv[cell]) * quad.volumes[cell, None])

    # first-level children, with g memoised per parent cell
    cache = {} if cache is None else cache
    uniq = np.unique(cell)
    missing = np.array([c for c in uniq if c not in cache], dtype=np.int64)
    if len(missing):
        vals = g(subdivide_tets(quad.corners[missing]).mean(axis=1)).reshape(len(missing), 8, 4)
        cache.update(zip(missing.tolist(), vals))
    sub_corners = subdivide_tets(quad.corners[cell])
    sub_g = np.concatenate([cache[c] for c in cell.tolist()])
    owner = np.repeat(tgt, 8)
    for level in range(singular_depth):
        if level:
            sub_corners = subdivide_tets(sub_corners)
            owner = np.repeat(owner, 8)
        c = sub_corners.mean(axis=1)
        if level:
            sub_g = g(c)
        rad = np.linalg.norm(sub_corners - c[:, None], axis=2).max(axis=1)
        near = np.linalg.norm(c - x[owner], axis=1) <= rad
        keep = ~near
        if keep.any():
            kk = cauchy_kernel(psi, x[owner[keep]] - c[keep])
            vol = tet_volumes(sub_corners[keep])
            np.add.at(corr, owner[keep], -qmul(kk, sub_g[keep]) * vol[:, None])
        sub_corners, owner = sub_corners[near], owner[near]
        if not len(owner):
            break
    return (total + corr).reshape(shape + (4,))


# --------------------------------------------------------------------------- singular integrals


def _tangent_basis(n):
    a = np.where(np.abs(n[:, :1]) < 0.9, np.array([[1.0, 0, 0]]), np.array([[0, 1.0, 0]]))
    e1 = np.cross(n, a)
    e1 /= np.linalg.norm(e1, axis=1)[:, None]
    return e1, np.cross(n, e1)


def _local_gradient(surface, values, nodes, k=10):
    """Least-squares tangential gradient of nodal data over ``k`` nearest nodes: ``(n, 3, 4)``."""
    c = surface.centroids
    e1, e2 = _tangent_basis(surface.normals[nodes])
    idx = surface.nearest_nodes(c[nodes], k + 1)[1][:, 1:]
    d = c[idx] - c[nodes, None]
    uv = np.stack([np.einsum("nkd,nd->nk", d, e1), np.einsum("nkd,nd->nk", d, e2)], axis=2)  # (n, k, 2)
    df = values[idx] - values[nodes, None]
    gram = np.einsum("nka,nkb->nab", uv, uv)
    coef = np.linalg.solve(gram, np.einsum("nka,nkq->naq", uv, df))  # (n, 2, 4)
    return e1[:, :, None] * coef[:, None, 0] + e2[:, :, None] * coef[:, None, 1]


def _midpoint_rule(levels):
    """Barycentric centroids of the ``4**levels`` congruent sub-triangles."""
    tris = np.eye(3)[None]
    for _ in range(levels):
        a, b, c = tris[:, 0], tris[:, 1], tris[:, 2]
        ab, bc, ca = (a + b) / 2, (b + c) / 2, (c + a) / 2
        tris = np.stack([np.stack(t, axis=1) for t in ((a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca))], axis=1)
        tris = tris.reshape(-1, 3, 3)
    return tris.mean(axis=1)


def _patch_correction(surface, psi, nodes, excluded, grad, right, levels=3):
    """Integral of the linearised density over the excluded triangles.

    Each excluded triangle is split ``4**levels`` times and summed by the
    midpoint rule; sub-triangles centred on the node are skipped.
    """
    owner = np.concatenate([np.full(len(e), i) for i, e in enumerate(excluded)]).astype(np.int64)
    tri = np.concatenate(excluded).astype(np.int64)
    bary = _midpoint_rule(levels)
    nq = len(bary)
    corr = np.zeros((len(nodes), 4), complex)
    nu = nu_psi(surface, psi)
    p = surface.vertices[surface.triangles]
    step = max(1, (1 << 18) // nq)
    for lo in range(0, len(tri), step):
        o, tr = owner[lo : lo + step], tri[lo : lo + step]
        q = np.einsum("sb,pbk->psk", bary, p[tr]).reshape(-1, 3)
        oo = np.repeat(o, nq)
        t = surface.centroids[nodes[oo]]
        r = t - q
        keep = np.linalg.norm(r, axis=1) > 1e-12 * surface.h
        oo, r = oo[keep], r[keep]
        dens = np.einsum("mk,mkq->mq", -r, grad[oo])  # linear model f(q) - f(t)
        kern = cauchy_kernel(psi, r)
        nuq = np.repeat(nu[tr], nq, axis=0)[keep]
        w = (np.repeat(surface.areas[tr], nq) / nq)[keep, None]
        val = qmul(qmul(dens, nuq), kern) if right else qmul(kern, qmul(nuq, dens))
        np.add.at(corr, oo, val * w)
    return corr


def _pv_sum(surface, f, psi, nodes, eps_factor, right=False, correct=True):
    """``PV int K(t - tau) nu (f(tau) - f(t)) dS`` at nodes (left, or right-sided)."""
    psi = _as_psi(psi)
    nodes = np.atleast_1d(np.asarray(nodes, dtype=np.int64))
    t = surface.centroids[nodes]
    eps = eps_factor * surface.diameters[nodes]
    nu = nu_psi(surface, psi)
    A = surface.areas[:, None]
    ft = f.values[nodes]
    if right:
        w1 = qmul(f.values, nu) * A
        w2 = nu * A
        a1, a2 = _sum(t, surface.centroids, [w1, w2.astype(complex)], eps)
        val = _right(psi, a1) - qmul(ft, _right(psi, a2))
    else:
        w1 = qmul(nu, f.values) * A
        w2 = nu * A
        a1, a2 = _sum(t, surface.centroids, [w1, w2.astype(complex)], eps)
        val = _left(psi, a1) - qmul(_left(psi, a2), ft)
    if correct:
        excluded = [
            np.asarray(surface._tree.query_ball_point(t[i], eps[i]), dtype=np.int64) for i in range(len(nodes))
        ]
        grad = _local_gradient(surface, f.values, nodes)
        val = val + _patch_correction(surface, psi, nodes, excluded, grad, right)
    return val


def singular_cauchy(surface, f, psi, nodes=None, eps_factor=2.0, correct=True):
    """Singular Cauchy transform ``f(t) + 2 PV int K(t - tau) nu (f(tau) - f(t))`` at nodes.

    Triangles with centroid within ``eps = eps_factor * diam(T_t)`` of ``t``
    are excluded from the centroid rule; with ``correct`` their contribution
    is restored from a local linear model of ``f`` integrated by refined
    midpoint quadrature.
    """
    nodes = np.arange(surface.n_triangles) if nodes is None else np.atleast_1d(nodes)
    return f.values[nodes] + 2 * _pv_sum(surface, f, psi, nodes, eps_factor, False, correct)


def right_singular_cauchy(surface, f, psi, nodes=None, eps_factor=2.0, correct=True):
    nodes = np.arange(surface.n_triangles) if nodes is None else np.atleast_1d(nodes)
    return f.values[nodes] + 2 * _pv_sum(surface, f, psi, nodes, eps_factor, True, correct)


# --------------------------------------------------------------------------- boundary limits


def richardson(values, ratio=2.0, order=1):
    """Richardson table for samples at ``delta_0 / ratio**k``; returns (estimate, corrections)."""
    table = [np.asarray(v) for v in values]
    corrections = []
    p = order
    while len(table) > 1:
        fac = ratio**p
        new = [(fac * table[i + 1] - table[i]) / (fac - 1) for i in range(len(table) - 1)]
        corrections.append(np.abs(new[-1] - table[-1]))
        table = new
        p += 1
    return table[0], corrections


def default_offset(surface):
    """Largest normal offset: ``4 h``, capped at half the inradius."""
    return min(4 * surface.h, 0.5 * surface.inradius)


def _subtracted_cauchy(surface, f, psi, x, anchor, right=False):
    """``sum K(x - c) nu (f(c) - f(t)) A`` with ``t`` the anchor node of each point."""
    nu = nu_psi(surface, psi)
    A = surface.areas[:, None]
    ft = f.values[anchor]
    if right:
        a1, a2 = _sum(x, surface.centroids, [qmul(f.values, nu) * A, (nu * A).astype(complex)])
        return _right(psi, a1) - qmul(ft, _right(psi, a2))
    a1, a2 = _sum(x, surface.centroids, [qmul(nu, f.values) * A, (nu * A).astype(complex)])
    return _left(psi, a1) - qmul(_left(psi, a2), ft)


def boundary_limit(
    surface, f, psi, nodes, side, delta0=None, levels=4, right=False, return_samples=False, rtol=1e-2
):
    """One-sided limit ``K^{+}`` (``side='+'``, from inside) or ``K^{-}`` at nodes.

    The transform is written as ``K[f - f(t)](x) + chi(x) f(t)`` (the exact
    Gauss identity ``K[1] = chi`` on closed surfaces), evaluated at
    ``t -+ delta_k nu(t)`` with ``delta_k = delta0 / 2**k`` and extrapolated
    to ``delta = 0`` by Richardson.  Raises ``ExtrapolationDiverged`` when the
    last sample increment stops contracting while still above
    ``rtol * |f|_inf``.
    """
    if side not in ("+", "-"):
        raise ValueError("side must be '+' or '-'")
    psi = _as_psi(psi)
    nodes = np.atleast_1d(np.asarray(nodes, dtype=np.int64))
    delta0 = default_offset(surface) if delta0 is None else delta0
    t = surface.centroids[nodes]
    n = surface.normals[nodes]
    sgn = -1.0 if side == "+" else 1.0
    samples = []
    for k in range(levels):
        x = t + sgn * (delta0 / 2**k) * n
        samples.append(_subtracted_cauchy(surface, f, psi, x, nodes, right))
    est, corr = richardson(samples)
    diffs = [np.abs(samples[k + 1] - samples[k]).max() for k in range(levels - 1)]
    scale = max(f.sup_norm, 1e-300)
    if len(diffs) >= 2 and diffs[-1] > rtol * scale and diffs[-1] > 0.9 * diffs[-2]:
        raise ExtrapolationDiverged(f"offset samples not contracting: {[float(d) for d in diffs]}")
    out = est + (f.values[nodes] if side == "+" else 0)
    if return_samples:
        return out, samples
    return out


@dataclass
class JumpReport:
    nodes: np.ndarray
    K_plus: np.ndarray
    K_minus: np.ndarray
    S_value: np.ndarray
    jump_residual: float  # max |(K+ - K-) - f|
    sum_residual: float  # max |(K+ + K-) - S|
    sup_f: float

    @property
    def relative(self):
        return self.jump_residual / self.sup_f, self.sum_residual / self.sup_f


def jump_check(surface, f, psi, nodes=None, eps_factor=2.0, delta0=None):
    """Sokhotski-Plemelj check at nodes: ``K+ - K- = f`` and ``K+ + K- = S f``."""
    nodes = np.arange(surface.n_triangles) if nodes is None else np.atleast_1d(nodes)
    kp = boundary_limit(surface, f, psi, nodes, "+", delta0)
    km = boundary_limit(surface, f, psi, nodes, "-", delta0)
    s = singular_cauchy(surface, f, psi, nodes, eps_factor)
    fv = f.values[nodes]
    r1 = np.sqrt(np.sum(np.abs(kp - km - fv) ** 2, axis=1))
    r2 = np.sqrt(np.sum(np.abs(kp + km - s) ** 2, axis=1))
    return JumpReport(nodes, kp, km, s, float(r1.max()), float(r2.max()), f.sup_norm)


# --------------------------------------------------------------------------- vector fields


def sc_vec_split(surface, f, psi, x, check=True):
    """Scalar and vector parts of the Cauchy transform of a pure-vector field.

    With ``K = cauchy_kernel`` and the transform ``int K nu f``:
    ``Sc = -int <K, [nu, f]>`` and ``Vec = int ([K, [nu, f]] - K <nu, f>)``,
    computed from dot/cross products rather than quaternion products.
    """
    _require_pure(f)
    psi = _as_psi(psi)
    x, shape = _points(x)
    if check:
        _check_distance(surface, x)
    nu = nu_psi(surface, psi)[:, 1:]
    fv = f.values[:, 1:]
    A = surface.areas
    nxf = np.cross(nu, fv)  # [nu, f]
    nf = np.sum(nu * fv, axis=1)  # <nu, f>
    scal = np.zeros(len(x), complex)
    vecp = np.zeros((len(x), 3), complex)
    step = max(1, (1 << 20) // surface.n_triangles)
    for lo in range(0, len(x), step):
        xs = x[lo : lo + step]
        K = cauchy_kernel(psi, xs[:, None, :] - surface.centroids[None])[..., 1:]  # (m, T, 3)
        scal[lo : lo + step] = -np.einsum("mtk,tk,t->m", K, nxf, A)
        vecp[lo : lo + step] = np.einsum("mtk,t->mk", np.cross(K, nxf[None]), A) - np.einsum(
            "mtk,t,t->mk", K, nf, A
        )
    return scal.reshape(shape), from_vector(vecp).reshape(shape + (4,))


def fibonacci_sphere(n, radius=1.0, center=(0.0, 0.0, 0.0)):
    i = np.arange(n) + 0.5
    phi = np.arccos(1 - 2 * i / n)
    theta = math.pi * (1 + 5**0.5) * i
    pts = np.stack([np.cos(theta) * np.sin(phi), np.sin(theta) * np.sin(phi), np.cos(phi)], axis=1)
    return np.asarray(center) + radius * pts


def default_probes(surface, n=64, radii=(0.5, 2.0)):
    """Fibonacci spheres of ``n`` points at ``radii * circumradius`` about the vertex centroid."""
    return np.concatenate([fibonacci_sphere(n, r * surface.circumradius, surface.center) for r in radii])


@dataclass
class MembershipReport:
    max_scalar: float
    tol: float
    values: np.ndarray

    @property
    def member(self):
        return self.max_scalar <= self.tol


def m_psi_test(surface, f, psi, probes=None, tol=1e-2):
    """Max ``|int <K(x - xi), [nu_psi, f]> dS|`` over off-surface probes.

    A finite sample of the 'for all x off Gamma' quantifier: a necessary
    condition only.  ``tol`` is absolute.
    """
    _require_pure(f)
    probes = default_probes(surface) if probes is None else np.asarray(probes, float)
    s = np.abs(sc_vec_split(surface, f, psi, probes)[0])
    return MembershipReport(float(s.max(initial=0.0)), tol, s)


def m_psi_star_test(surface, f, psi, nodes=None, eps_factor=2.0, tol=1e-2):
    """Max over nodes of ``|PV int <K(t - xi), [nu_psi, f]> dS|``.

    For pure vectors the principal value equals ``-Sc`` of the subtracted
    singular integral (the Gauss integral ``PV int K nu = 1/2`` is scalar).
    """
    _require_pure(f)
    nodes = np.arange(surface.n_triangles) if nodes is None else np.atleast_1d(nodes)
    s = np.abs(_pv_sum(surface, f, psi, nodes, eps_factor)[:, 0])
    return MembershipReport(float(s.max(initial=0.0)), tol, s)


# --------------------------------------------------------------------------- Borel-Pompeiu


def borel_pompeiu_residual(surface, omega, f, psi, x, scheme=ANALYTIC, check=True):
    """``K[f](x) + T[psiD f](x) - chi(x) f(x)``."""
    psi = _as_psi(psi)
    x, shape = _points(x)
    fb = BoundaryField.sample(surface, f)
    k = cauchy_transform(surface, fb, psi, x, check=check)
    dfield = QuaternionField(lambda y: apply_psiD(psi, f, y, scheme), name="psiD f")
    t = teodorescu(omega, dfield, psi, x)
    chi = inside(surface, x)
    return (k + t - chi[:, None] * f(x)).reshape(shape + (4,))


# --------------------------------------------------------------------------- Hoelder diagnostics


@dataclass
class HolderEstimate:
    value: float
    values: np.ndarray
    radii: np.ndarray
    ratio: float  # last increment / previous increment
    diverging: bool


def holder_condition_estimate(surface, f, node, eps0=None, min_eps=None):
    """Truncated ``(1/4pi) int_{|xi - t| > eps} |f(xi) - f(t)|_c / |xi - t|^2 dS`` for halving eps.

    Diagnostic only.  Increments shrinking geometrically indicate a finite
    limit; increments that stay level (ratio near 1) indicate divergence.
    """
    c = surface.centroids
    t = c[node]
    r = np.linalg.norm(c - t, axis=1)
    diff = np.sqrt(np.sum(np.abs(f.values - f.values[node]) ** 2, axis=1))
    eps0 = 0.25 * surface.diameter if eps0 is None else eps0
    min_eps = surface.diameters[node] if min_eps is None else min_eps
    radii = []
    e = eps0
    while e >= min_eps:
        radii.append(e)
        e /= 2
    radii = np.array(radii)
    vals = np.array([np.sum((diff / np.where(r > 0, r, 1) ** 2 * surface.areas)[r > e]) / FOUR_PI for e in radii])
    inc = np.diff(vals)
    if len(inc) >= 2 and inc[-2] > 0:
        ratio = float(inc[-1] / inc[-2])
    else:
        ratio = 0.0
    diverging = bool(len(inc) >= 2 and ratio > 0.75 and inc[-1] > 1e-3 * max(vals[-1], 1e-300))
    return HolderEstimate(float(vals[-1]) if len(vals) else 0.0, vals, radii, ratio, diverging)


def holder_exponent_fit(surface, f, nodes=None, k=12):
    """Median over nodes of the log-log slope of local oscillation vs distance."""
    nodes = np.arange(surface.n_triangles) if nodes is None else np.atleast_1d(nodes)
    d, idx = surface.nearest_nodes(surface.centroids[nodes], k + 1)
    d, idx = d[:, 1:], idx[:, 1:]
    osc = np.sqrt(np.sum(np.abs(f.values[idx] - f.values[nodes, None]) ** 2, axis=2))
    scale = max(f.sup_norm, 1e-300)
    slopes = []
    for i in range(len(nodes)):
        ok = osc[i] > 1e-12 * scale
        if ok.sum() < 3:
            continue
        slopes.append(np.polyfit(np.log(d[i, ok]), np.log(osc[i, ok]), 1)[0])
    return float(np.median(slopes)) if slopes else 1.0


__all__ = [
    "BoundaryField",
    "ExtrapolationDiverged",
    "JumpReport",
    "MembershipReport",
    "SingularPoint",
    "TooCloseToSurface",
    "VolumeQuadrature",
    "apply_Dpsi",
    "borel_pompeiu_residual",
    "boundary_limit",
    "cauchy_kernel",
    "cauchy_transform",
    "default_probes",
    "fibonacci_sphere",
    "holder_condition_estimate",
    "holder_exponent_fit",
    "inside",
    "jump_check",
    "m_psi_star_test",
    "m_psi_test",
    "right_cauchy_transform",
    "right_singular_cauchy",
    "richardson",
    "sc_vec_split",
    "singular_cauchy",
    "teodorescu",
    "winding_number",
]
