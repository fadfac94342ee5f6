"""Verification suites shared by the command line and the acceptance tests.

Each suite returns a :class:`SuiteResult`: named checks (value, bound,
verdict) plus plot-ready rows.  Suites are deterministic for a given seed.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from .fields import KernelField, PolynomialField, constant, random_polynomial, vector_polynomial
from .geometry import make_sphere
from .operators import (
    ANALYTIC,
    DerivativeScheme,
    apply_Dpsi,
    apply_psiD,
    laplacian_check,
    special_case_map,
    two_sided_check,
)
from .quaternion import conj, norm_c, norm_r, qmul
from .reconstruction import ExtensionParams, decompose
from .structural import make_psi_theta, verify_structural
from .transforms import (
    BoundaryField,
    borel_pompeiu_residual,
    boundary_limit,
    cauchy_transform,
    fibonacci_sphere,
    m_psi_test,
    right_singular_cauchy,
    singular_cauchy,
)


@dataclass
class Check:
    name: str
    value: float
    bound: float
    passed: bool
    relation: str = "<="

    def as_dict(self):
        return {"name": self.name, "value": self.value, "bound": self.bound, "relation": self.relation, "passed": self.passed}


@dataclass
class SuiteResult:
    name: str
    checks: list = field(default_factory=list)
    rows: list = field(default_factory=list)
    info: dict = field(default_factory=dict)

    def check(self, name, value, bound, relation="<="):
        value = float(value)
        ok = {"<=": value <= bound, ">=": value >= bound, "==": value == bound}[relation]
        self.checks.append(Check(name, value, float(bound), bool(ok), relation))
        return ok

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    @property
    def failures(self):
        return [c for c in self.checks if not c.passed]

    def as_dict(self):
        return {
            "suite": self.name,
            "passed": self.passed,
            "checks": [c.as_dict() for c in self.checks],
            "info": self.info,
        }


def _rand_quats(rng, n, real=False):
    a = rng.standard_normal((n, 4))
    return a if real else a + 1j * rng.standard_normal((n, 4))


def algebra_suite(seed=0, n=1000, tol=1e-12):
    """Associativity, conjugation reversal and norm multiplicativity on random quaternions."""
    rng = np.random.default_rng(seed)
    a, b, c = (_rand_quats(rng, n) for _ in range(3))
    res = SuiteResult("algebra", info={"n": n, "seed": seed})
    res.check("associativity", np.abs(qmul(qmul(a, b), c) - qmul(a, qmul(b, c))).max(), tol)
    res.check("conj_antihomomorphism", np.abs(conj(qmul(a, b)) - qmul(conj(b), conj(a))).max(), tol)
    ra, rb = _rand_quats(rng, n, True), _rand_quats(rng, n, True)
    rel = np.abs(norm_r(qmul(ra, rb)) - norm_r(ra) * norm_r(rb)) / (norm_r(ra) * norm_r(rb))
    res.check("norm_r_multiplicative", rel.max(), tol)
    rel = np.abs(norm_c(qmul(ra, b)) - norm_r(ra) * norm_c(b)) / (norm_r(ra) * norm_c(b))
    res.check("norm_c_real_times_complex", rel.max(), tol)
    return res


def structural_suite(seed=0, n_theta=100, n_poly=20, thetas=(0.0, math.pi / 2, math.pi, 1.5 * math.pi, 1.0)):
    """Structural-set condition for random angles and the factorisation of the Laplacian."""
    rng = np.random.default_rng(seed)
    res = SuiteResult("structural", info={"seed": seed, "n_theta": n_theta, "n_poly": n_poly})
    worst = max(verify_structural(make_psi_theta(t)) for t in rng.uniform(0, 2 * math.pi, n_theta))
    res.check("structural_residual", worst, 1e-14)
    x = rng.uniform(-1, 1, (8, 3))
    polys = [random_polynomial(rng, degree=3, n_terms=6) for _ in range(n_poly)]
    lap = 0.0
    for t in thetas:
        psi = make_psi_theta(t)
        for p in polys:
            lap = max(lap, float(np.abs(laplacian_check(psi, p, x, ANALYTIC)).max()))
    res.check("laplacian_factorisation", lap, 1e-8)
    bad = verify_structural(np.array([[0, 1.0, 0, 0], [0, 1.0, 0, 0], [0, 0, 1.0, 0]]))
    res.check("non_structural_detected", bad, 0.1, ">=")
    return res


def kernel_suite(theta, seed=0, n=50, h=1e-4, tol=1e-6):
    """Left and right hyperholomorphy of the Cauchy kernel by central differences."""
    rng = np.random.default_rng(seed)
    psi = make_psi_theta(theta)
    a = rng.uniform(-1, 1, 3)
    d = rng.standard_normal((n, 3))
    x = a + d / np.linalg.norm(d, axis=1)[:, None] * rng.uniform(0.5, 2.0, (n, 1))
    Kf = KernelField(psi, a)
    scheme = DerivativeScheme("central", h)
    res = SuiteResult("kernel", info={"theta": psi.theta, "probes": n, "h": h})
    res.check("left_residual", np.abs(apply_psiD(psi, Kf, x, scheme)).max(), tol)
    res.check("right_residual", np.abs(apply_Dpsi(psi, Kf, x, scheme)).max(), tol)
    return res


def cauchy_suite(theta, levels=(2, 3), n=20, tol=0.05, ratio=1.5):
    """Cauchy reproduction of ``K(. - a)``, ``|a| = 2``, at interior probes."""
    psi = make_psi_theta(theta)
    F = KernelField(psi, [2.0, 0.0, 0.0])
    x = fibonacci_sphere(n, 0.5)
    exact = F(x)
    res = SuiteResult("cauchy_reproduction", info={"theta": psi.theta, "levels": list(levels)})
    errs = []
    for lev in levels:
        s, _ = make_sphere(level=lev)
        v = cauchy_transform(s, BoundaryField.sample(s, F), psi, x, check=False)
        e = float(np.max(norm_c(v - exact)) / np.max(norm_c(exact)))
        errs.append(e)
        res.rows.append({"level": lev, "triangles": s.n_triangles, "h": s.h, "relative_error": e})
    res.check(f"relative_error_level{levels[-1]}", errs[-1], tol)
    for (l0, e0), (l1, e1) in zip(zip(levels, errs), zip(levels[1:], errs[1:])):
        res.check(f"error_ratio_{l0}_{l1}", e0 / e1, ratio, ">=")
    return res


def bp_suite(theta, levels=(1, 2, 3), n=10, tol=0.05, surface_mesh=None):
    """Borel-Pompeiu residual of ``f = x1`` at interior and exterior probes.

    Level 1 is too coarse for the ``2 h`` near-surface guard at these probes,
    so the guard is disabled for the refinement study.
    """
    psi = make_psi_theta(theta)
    f = PolynomialField({(1, 0, 0): [1, 0, 0, 0]}, "x1")
    xin, xout = fibonacci_sphere(n, 0.5), fibonacci_sphere(n, 2.0)
    res = SuiteResult("borel_pompeiu", info={"theta": psi.theta, "levels": list(levels), "field": "x1"})
    meshes = [make_sphere(level=lev) for lev in levels] if surface_mesh is None else [surface_mesh]
    rin, rout = [], []
    prev = None
    for lev, (s, m) in zip(levels, meshes):
        r = borel_pompeiu_residual(s, m, f, psi, np.concatenate([xin, xout]), check=False)
        a = norm_c(r)
        rin.append(float(a[:n].max()))
        rout.append(float(a[n:].max()))
        # error estimate: change of the residual since the previous level
        est = np.full(len(a), np.nan) if prev is None else norm_c(r - prev)
        for p, v, e in zip(np.concatenate([xin, xout]), r, est):
            res.rows.append({"level": lev, "x": p, "residual": v, "error_estimate": float(e)})
        prev = r
    sup = 1.0  # sup |x1| on the unit ball
    res.info["interior"] = rin
    res.info["exterior"] = rout
    res.check("interior_residual", rin[-1] / sup, tol)
    res.check("exterior_residual", rout[-1] / sup, tol)
    for k in range(1, len(rin)):
        res.check(f"interior_decrease_{levels[k - 1]}_{levels[k]}", rin[k - 1] - rin[k], 0.0, ">=")
        res.check(f"exterior_decrease_{levels[k - 1]}_{levels[k]}", rout[k - 1] - rout[k], 0.0, ">=")
    return res


def jump_field():
    """The Lipschitz test trace ``xi2 i + xi1 k``."""
    return vector_polynomial([{(0, 1, 0): 1.0}, {}, {(1, 0, 0): 1.0}])


def jump_suite(theta, levels=(3, 4), max_nodes=200, eps_factor=2.0, tol=0.08, field=None):
    """Plemelj relations at boundary nodes: ``K+ - K- = f`` and ``K+ + K- = S f``."""
    psi = make_psi_theta(theta)
    F = jump_field() if field is None else field
    res = SuiteResult("jump", info={"theta": psi.theta, "levels": list(levels), "eps_factor": eps_factor})
    jumps, sums = [], []
    for lev in levels:
        s, _ = make_sphere(level=lev)
        fb = BoundaryField.sample(s, F)
        nodes = np.arange(0, s.n_triangles, max(1, s.n_triangles // max_nodes))
        kp = boundary_limit(s, fb, psi, nodes, "+")
        km = boundary_limit(s, fb, psi, nodes, "-")
        S = singular_cauchy(s, fb, psi, nodes, eps_factor)
        sup = fb.sup_norm
        j = float(norm_c(kp - km - fb.values[nodes]).max() / sup)
        q = float(norm_c(kp + km - S).max() / sup)
        jumps.append(j)
        sums.append(q)
        res.rows.append({"level": lev, "h": s.h, "nodes": len(nodes), "jump_error": j, "sum_error": q})
    res.check(f"jump_error_level{levels[0]}", jumps[0], tol)
    res.check(f"sum_error_level{levels[0]}", sums[0], tol)
    for k in range(1, len(levels)):
        res.check(f"jump_shrinks_{levels[k - 1]}_{levels[k]}", jumps[k - 1] - jumps[k], 0.0, ">=")
        res.check(f"sum_shrinks_{levels[k - 1]}_{levels[k]}", sums[k - 1] - sums[k], 0.0, ">=")
    return res


@dataclass
class Indicators:
    scalar: float
    right: float
    two_sided: float
    tols: tuple

    @property
    def verdicts(self):
        return (self.scalar <= self.tols[0], self.right <= self.tols[1], self.two_sided <= self.tols[2])

    @property
    def unanimous(self):
        return len(set(self.verdicts)) == 1

    @property
    def member(self):
        return all(self.verdicts)


def membership_indicators(surface, f, psi, probes=None, rtol=(1e-2, 2e-2, 5e-2), h=1e-4):
    """Three membership indicators for pure-vector traces, relative to ``|f|_inf``.

    1. max ``|Sc K f|`` over probes;
    2. max right-derivative ``|D^psi K f|`` over probes;
    3. max ``|S f - f S|`` over nodes (left versus right singular transforms).
    """
    from .fields import QuaternionField
    from .transforms import default_probes

    psi = make_psi_theta(psi) if not hasattr(psi, "psi") else psi
    probes = default_probes(surface) if probes is None else probes
    sup = max(f.sup_norm, 1e-300)
    i1 = m_psi_test(surface, f, psi, probes).max_scalar / sup
    G = QuaternionField(lambda y: cauchy_transform(surface, f, psi, y, check=False))
    i2 = float(np.abs(apply_Dpsi(psi, G, probes, DerivativeScheme("central", h))).max()) / sup
    i3 = float(np.abs(singular_cauchy(surface, f, psi) - right_singular_cauchy(surface, f, psi)).max()) / sup
    return Indicators(i1, i2, i3, tuple(rtol))


def equivalence_instances(theta):
    psi = make_psi_theta(theta)
    return {
        # trace of a two-sided (Laplacian) field: the kernel with its pole outside
        "kernel_pole_outside": (KernelField(psi, [2.0, 0.0, 0.0]), True),
        # (x1, 0, 0) is itself in the class: its Cauchy transform is pure-vector
        "x1_i": (vector_polynomial([{(1, 0, 0): 1.0}, {}, {}]), True),
        # (x2, 0, 0): psiD gives a pure vector, so the scalar part survives
        "x2_i": (vector_polynomial([{(0, 1, 0): 1.0}, {}, {}]), False),
    }


def equivalence_suite(theta, level=3):
    psi = make_psi_theta(theta)
    s, _ = make_sphere(level=level)
    res = SuiteResult("equivalence", info={"theta": psi.theta, "level": level})
    for name, (F, expected) in equivalence_instances(theta).items():
        ind = membership_indicators(s, BoundaryField.sample(s, F), psi)
        res.rows.append(
            {"instance": name, "scalar": ind.scalar, "right": ind.right, "two_sided": ind.two_sided, "verdicts": list(ind.verdicts)}
        )
        res.check(f"{name}_unanimous", float(ind.unanimous), 1.0, "==")
        res.check(f"{name}_verdict", float(ind.member), float(expected), "==")
    return res


def oracle_field(theta, c=(1.0, 0.0, 0.0), pole=(0.0, 0.0, 0.0)):
    """``c + K(. - a)`` with ``c`` a constant vector and the pole inside."""
    psi = make_psi_theta(theta)
    return constant(np.concatenate([[0.0], c])) + KernelField(psi, pole), KernelField(psi, pole), np.concatenate([[0.0], c])


def decomposition_suite(theta, level=3, tol=0.05, params=None, n=64):
    psi = make_psi_theta(theta)
    s, m = make_sphere(level=level)
    F, Kf, c = oracle_field(theta)
    fb = BoundaryField.sample(s, F)
    d = decompose(s, m, fb, theta, params or ExtensionParams())
    res = SuiteResult("decomposition", info={"theta": psi.theta, "level": level, **d.report()})
    pin, pout = fibonacci_sphere(n, 0.5), fibonacci_sphere(n, 2.0)
    ep = float(np.max(norm_c(d.F_plus(pin) - c)) / norm_c(c))
    kv = Kf(pout)
    em = float(np.max(norm_c(d.F_minus(pout) - kv) / norm_c(kv)))
    res.check("F_plus_relative_error", ep, tol)
    res.check("F_minus_relative_error", em, tol)
    res.check("trace_residual", float(d.trace_residual.max()) / fb.sup_norm, tol)
    far = fibonacci_sphere(16, 10.0)
    res.check("far_field_ratio", float(np.max(norm_c(d.F_minus(far))) / np.max(norm_c(Kf(far)))), 1.5)
    z = decompose(s, m, BoundaryField.zeros(s), theta, params or ExtensionParams(), verify=False)
    zero = max(np.abs(z.F_plus(pin)).max(), np.abs(z.F_minus(pout)).max())
    res.check("zero_data_zero_fields", float(zero), 0.0, "==")
    res.rows.append({"probe_set": "interior", "max_error": ep})
    res.rows.append({"probe_set": "exterior", "max_relative_error": em})
    return res


def special_case_suite(seed=0, n=50, tol=1e-8):
    """The ``theta = 0`` exterior solution mapped to ``(div, rot)`` form, analytic derivatives."""
    rng = np.random.default_rng(seed)
    _, Kf, _ = oracle_field(0.0)
    d = rng.standard_normal((n, 3))
    x = d / np.linalg.norm(d, axis=1)[:, None] * rng.uniform(1.1, 10.0, (n, 1))
    case = special_case_map("div-rot", Kf)
    r = case.residual(x, ANALYTIC)
    res = SuiteResult("special_cases", info={"case": "div-rot", "probes": n})
    res.check("div", np.abs(r[:, 0]).max(), tol)
    res.check("rot", np.abs(r[:, 1:]).max(), tol)
    rep = two_sided_check(make_psi_theta(0.0), Kf, x, ANALYTIC, tol)
    res.check("two_sided", max(rep.grad_scalar_max, rep.mt_residual_max), tol)
    return res


__all__ = [
    "Check",
    "Indicators",
    "SuiteResult",
    "algebra_suite",
    "bp_suite",
    "cauchy_suite",
    "decomposition_suite",
    "equivalence_instances",
    "equivalence_suite",
    "jump_field",
    "jump_suite",
    "kernel_suite",
    "membership_indicators",
    "oracle_field",
    "special_case_suite",
    "structural_suite",
]
