"""Command-line front end: verification suites and the decomposition pipeline.

Exit status: 0 when every check passes, 1 when a check fails (the report
lists the failures), 2 on configuration errors.  Reports are JSON (default)
or CSV; both carry a schema tag.  Output is deterministic for a given
configuration and seed.
"""

import argparse
import csv
import io
import json
import logging
import math
import os
import sys

import numpy as np

from . import __version__, suites
from .fields import KernelField, PolynomialField, load_grid_csv
from .geometry import MeshError, load_off, load_tet, parse_mesh_spec
from .operators import ANALYTIC, SPECIAL_CASES, DerivativeScheme, mt_residual, special_case_map
from .quaternion import NotPureVector, from_vector, norm_c, to_reals
from .reconstruction import ExtensionParams, MembershipFailed, PROFILES, QuadratureBudgetExceeded, decompose
from .structural import make_psi_theta, parse_theta
from .transforms import (
    BoundaryField,
    ExtrapolationDiverged,
    TooCloseToSurface,
    borel_pompeiu_residual,
    boundary_limit,
    default_probes,
    fibonacci_sphere,
    m_psi_star_test,
    singular_cauchy,
)

JSON_SCHEMA = "psimt.report/1"
CSV_SCHEMA = "psimt.table/1"

log = logging.getLogger("psimt")


class ConfigError(Exception):
    pass


# --------------------------------------------------------------------------- inputs


def _theta(text):
    try:
        return parse_theta(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _is_builtin(spec):
    return spec.split(":")[0] in ("sphere", "ellipsoid")


def _builtin_level(spec):
    return int(spec.split(":")[-1])


def _with_level(spec, level):
    parts = spec.split(":")
    parts[-1] = str(level)
    return ":".join(parts)


def resolve_mesh_spec(args):
    spec = args.mesh or f"sphere:{3 if args.level is None else args.level}"
    if _is_builtin(spec) and args.level is not None:
        spec = _with_level(spec, args.level)
    return spec


def load_meshes(args, need_tets=True):
    """``[(label, surface, tets or None)]``; builtin specs expand to one mesh."""
    spec = resolve_mesh_spec(args)
    try:
        if _is_builtin(spec):
            s, m = parse_mesh_spec(spec)
            return spec, s, m
        if not os.path.exists(spec):
            raise ConfigError(f"mesh file not found: {spec}")
        s = load_off(spec)
        m = None
        if args.tets:
            if not os.path.exists(args.tets):
                raise ConfigError(f"tet file not found: {args.tets}")
            m = load_tet(args.tets)
            if not m.matches_surface(s):
                raise ConfigError("tetrahedral mesh boundary does not match the surface mesh")
        elif need_tets:
            raise ConfigError("--tets is required with a surface file for this command")
        return spec, s, m
    except (MeshError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def refinement_specs(args, count, upward=False):
    """Builtin spec at the requested level plus ``count - 1`` coarser (or finer) ones."""
    spec = resolve_mesh_spec(args)
    if not _is_builtin(spec):
        return [spec]
    lev = _builtin_level(spec)
    levels = range(lev, lev + count) if upward else range(max(0, lev - count + 1), lev + 1)
    return [_with_level(spec, k) for k in levels]


def load_probes(args, surface):
    if args.probes in (None, "builtin"):
        return default_probes(surface)
    return read_points(args.probes)


def read_points(path):
    if not os.path.exists(path):
        raise ConfigError(f"probe file not found: {path}")
    try:
        pts = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
    except ValueError as exc:
        raise ConfigError(f"cannot parse probe file: {exc}") from exc
    if pts.shape[1] != 3:
        raise ConfigError("probe file must have three columns x,y,z")
    return pts


def load_boundary_data(path, surface):
    """CSV rows ``node_index, re f1, im f1, re f2, im f2, re f3, im f3``."""
    if not os.path.exists(path):
        raise ConfigError(f"boundary data file not found: {path}")
    vec = np.full((surface.n_triangles, 3), np.nan, complex)
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or row[0].lstrip().startswith("#"):
                continue
            try:
                vals = [float(v) for v in row]
            except ValueError:
                if lineno == 1:
                    continue  # header
                raise ConfigError(f"{path}:{lineno}: non-numeric entry") from None
            if len(vals) != 7:
                raise ConfigError(f"{path}:{lineno}: expected 7 columns, got {len(vals)}")
            node = int(vals[0])
            if vals[0] != node or not 0 <= node < surface.n_triangles:
                raise ConfigError(f"{path}:{lineno}: bad node index {vals[0]}")
            vec[node] = [vals[1] + 1j * vals[2], vals[3] + 1j * vals[4], vals[5] + 1j * vals[6]]
    missing = np.flatnonzero(np.isnan(vec.real).any(axis=1))
    if len(missing):
        raise ConfigError(f"{path}: no data for {len(missing)} nodes (first {missing[0]})")
    return BoundaryField(surface, from_vector(vec))


def builtin_field(name, theta):
    instances = suites.equivalence_instances(theta)
    if name == "oracle":
        return suites.oracle_field(theta)[0]
    if name == "jump":
        return suites.jump_field()
    key = {"kernel": "kernel_pole_outside", "x1": "x1_i", "x2": "x2_i"}.get(name)
    if key is None:
        raise ConfigError(f"unknown builtin field {name!r}")
    return instances[key][0]


# --------------------------------------------------------------------------- outputs


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        if np.iscomplexobj(v):
            return _jsonable(to_reals(v).tolist())
        return _jsonable(v.tolist())
    if isinstance(v, (np.floating, float)):
        f = float(v)
        return f if math.isfinite(f) else None
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.bool_,)):
        return bool(v)
    if isinstance(v, complex):
        return [v.real, v.imag]
    return v


def _flatten_row(row):
    """Expand quaternion/point entries into scalar CSV columns."""
    out = {}
    for k, v in row.items():
        arr = np.asarray(v) if isinstance(v, (np.ndarray, list, tuple)) else None
        if arr is not None and arr.dtype != object and arr.ndim == 1:
            if np.iscomplexobj(arr) and arr.shape == (4,):
                for name, r in zip(_QCOLS, to_reals(arr)):
                    out[f"{k}_{name}"] = float(r)
            elif arr.shape == (3,) and not np.iscomplexobj(arr):
                for name, r in zip("xyz", arr):
                    out[f"{k}_{name}" if k != "x" else name] = float(r)
            else:
                for i, r in enumerate(arr.ravel()):
                    out[f"{k}_{i}"] = _jsonable(r)
        else:
            out[k] = _jsonable(v)
    return out


_QCOLS = ("re0", "im0", "re1", "im1", "re2", "im2", "re3", "im3")


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(float(v))
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, list):
        return json.dumps(v)
    return str(v)


def render(report, fmt):
    if fmt == "json":
        return json.dumps(_jsonable(report), indent=2, sort_keys=True) + "\n"
    rows = [_flatten_row(r) for r in report.get("rows", [])]
    if not rows:  # fall back to the check table
        rows = [
            {"suite": s["suite"], **c} for s in report.get("suites", []) for c in s["checks"]
        ]
    cols = []
    for r in rows:
        for k in r:
            if k not in cols:
                cols.append(k)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["schema", "command"] + cols)
    for r in rows:
        w.writerow([CSV_SCHEMA, report["command"]] + [_fmt(r.get(c)) for c in cols])
    return buf.getvalue()


def emit(report, args):
    text = render(report, args.format)
    if args.output in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(args.output, "w", newline="") as fh:
            fh.write(text)


def make_report(args, results, rows=None, extra=None):
    failures = [f"{r.name}:{c.name}" for r in results for c in r.failures]
    report = {
        "schema": JSON_SCHEMA,
        "version": __version__,
        "command": args.command,
        "config": config_echo(args),
        "passed": not failures,
        "failures": failures,
        "suites": [r.as_dict() for r in results],
        "rows": rows if rows is not None else [row for r in results for row in r.rows],
    }
    if extra:
        report.update(extra)
    return report


def config_echo(args):
    skip = {"func", "output", "format", "verbose"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


# --------------------------------------------------------------------------- commands


def cmd_verify_algebra(args):
    return [suites.algebra_suite(args.seed, n=args.n, tol=args.tol or 1e-12)]


def cmd_verify_structural(args):
    return [suites.structural_suite(args.seed)]


def cmd_verify_operators(args):
    res = suites.kernel_suite(args.theta, args.seed, tol=args.tol or 1e-6)
    return [res, suites.special_case_suite(args.seed)]


def cmd_bp_check(args):
    """Borel-Pompeiu for ``f = x1`` and Cauchy reproduction over a refinement sequence."""
    theta = args.theta
    specs = refinement_specs(args, 3)
    tol = args.tol or 0.05
    if _is_builtin(specs[0]):
        meshes = [(spec, *parse_mesh_spec(spec)) for spec in specs]
    else:
        meshes = [load_meshes(args)]
    s0 = meshes[-1][1]
    res = suites.SuiteResult("borel_pompeiu", info={"theta": theta, "meshes": [m[0] for m in meshes]})
    f = PolynomialField({(1, 0, 0): [1, 0, 0, 0]}, "x1")
    psi = make_psi_theta(theta)
    probes = load_probes(args, s0)
    sup = float(np.abs(s0.vertices[:, 0]).max())
    prev = None
    worst = []
    for label, s, m in meshes:
        # coarse levels of the study sit inside the near-surface guard
        r = borel_pompeiu_residual(s, m, f, psi, probes, check=False)
        est = np.full(len(probes), np.nan) if prev is None else norm_c(r - prev)
        for p, v, e in zip(probes, r, est):
            res.rows.append({"mesh": label, "x": p, "residual": v, "error_estimate": float(e)})
        worst.append(float(norm_c(r).max()))
        prev = r
    res.info["max_residual"] = worst
    res.check("residual", worst[-1] / sup, tol)
    for k in range(1, len(worst)):
        res.check(f"decrease_{meshes[k - 1][0]}_{meshes[k][0]}", worst[k - 1] - worst[k], 0.0, ">=")
    out = [res]
    if _is_builtin(specs[0]) and len(specs) >= 2 and specs[0].startswith("sphere"):
        out.append(suites.cauchy_suite(theta, levels=[_builtin_level(sp) for sp in specs[-2:]], tol=tol))
    return out


def cmd_jump_check(args):
    theta = args.theta
    psi = make_psi_theta(theta)
    tol = args.tol or 0.08
    specs = refinement_specs(args, 2, upward=True)
    F = builtin_field(args.field, theta)
    res = suites.SuiteResult("jump", info={"theta": theta, "meshes": specs, "eps_factor": args.eps_factor})
    jumps, sums = [], []
    for spec in specs:
        if _is_builtin(spec):
            s, _ = parse_mesh_spec(spec)
        else:
            _, s, _ = load_meshes(args, need_tets=False)
        fb = load_boundary_data(args.boundary_data, s) if args.boundary_data else BoundaryField.sample(s, F)
        nodes = np.arange(0, s.n_triangles, max(1, s.n_triangles // args.max_nodes))
        kp = boundary_limit(s, fb, psi, nodes, "+")
        km = boundary_limit(s, fb, psi, nodes, "-")
        S = singular_cauchy(s, fb, psi, nodes, args.eps_factor)
        sup = max(fb.sup_norm, 1e-300)
        rj = kp - km - fb.values[nodes]
        rs = kp + km - S
        jumps.append(float(norm_c(rj).max() / sup))
        sums.append(float(norm_c(rs).max() / sup))
        if spec == specs[-1]:
            for n, t, a, b in zip(nodes, s.centroids[nodes], rj, rs):
                res.rows.append({"node": int(n), "x": t, "jump_residual": a, "sum_residual": b})
    res.info["jump_error"] = jumps
    res.info["sum_error"] = sums
    res.check("jump_error", jumps[-1], tol)
    res.check("sum_error", sums[-1], tol)
    if len(specs) > 1:
        est = {"jump": abs(jumps[-1] - jumps[-2]), "sum": abs(sums[-1] - sums[-2])}
        res.info["error_estimate"] = est
        res.check("jump_shrinks", jumps[0] - jumps[-1], 0.0, ">=")
        res.check("sum_shrinks", sums[0] - sums[-1], 0.0, ">=")
    return [res]


def cmd_mpsi_test(args):
    theta = args.theta
    psi = make_psi_theta(theta)
    _, s, _ = load_meshes(args, need_tets=False)
    fb = load_boundary_data(args.boundary_data, s) if args.boundary_data else BoundaryField.sample(s, builtin_field(args.field, theta))
    probes = load_probes(args, s)
    ind = suites.membership_indicators(s, fb, psi, probes)
    star = m_psi_star_test(s, fb, psi, eps_factor=args.eps_factor).max_scalar / max(fb.sup_norm, 1e-300)
    res = suites.SuiteResult(
        "membership",
        info={
            "theta": theta,
            "scalar_indicator": ind.scalar,
            "right_indicator": ind.right,
            "two_sided_indicator": ind.two_sided,
            "boundary_scalar": star,
            "verdicts": list(ind.verdicts),
            "member": ind.member,
            "note": "finite probe sample: a necessary condition only",
        },
    )
    res.check("indicators_unanimous", float(ind.unanimous), 1.0, "==")
    return [res]


def cmd_decompose(args):
    theta = args.theta
    _, s, m = load_meshes(args)
    if args.boundary_data:
        fb = load_boundary_data(args.boundary_data, s)
    else:
        fb = BoundaryField.sample(s, builtin_field("oracle", theta))
    try:
        params = ExtensionParams(rho=args.rho, profile=args.profile)
        params.resolve(s)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    tol = args.tol or 0.05
    res = suites.SuiteResult("decomposition", info={"theta": theta})
    try:
        d = decompose(s, m, fb, theta, params, trace_nodes=args.max_nodes)
    except MembershipFailed as exc:
        res.info["error"] = str(exc)
        res.check("membership", 1.0, 0.0)
        return [res]
    except QuadratureBudgetExceeded as exc:
        raise ConfigError(str(exc)) from exc
    res.info.update(d.report())
    sup = max(fb.sup_norm, 1e-300)
    res.check("trace_residual", float(d.trace_residual.max()) / sup, tol)
    for n, t, r in zip(d.trace_nodes, s.centroids[d.trace_nodes], d.trace_residual):
        res.rows.append({"node": int(n), "x": t, "trace_residual": float(r)})
    return [res]


def cmd_mt_residual(args):
    """Generalized Moisil-Teodorescu residual of a builtin or grid-sampled field."""
    theta = args.theta
    if args.field in MT_FIELDS:
        F = MT_FIELDS[args.field](theta)
        if args.probes in (None, "builtin"):
            x = np.concatenate([fibonacci_sphere(64, r) for r in (0.5, 2.0)])
        else:
            x = read_points(args.probes)
        scheme = ANALYTIC if F.has_grad else DerivativeScheme("central", 1e-4)
        tol = args.tol or 1e-8
    else:
        if not os.path.exists(args.field):
            raise ConfigError(f"field is neither builtin {sorted(MT_FIELDS)} nor a file: {args.field}")
        try:
            F = load_grid_csv(args.field)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        x = F.interior_nodes()
        if not len(x):
            raise ConfigError("grid too small: no interior nodes")
        scheme = DerivativeScheme("central", F.spacing / 2)
        tol = args.tol or 1e-2
    r = mt_residual(theta, F, x, scheme)
    res = suites.SuiteResult("mt_residual", info={"theta": theta, "field": args.field, "scheme": scheme.mode, "h": scheme.h})
    for p, v in zip(x, r):
        res.rows.append({"x": p, "residual": v, "error_estimate": float(np.abs(v).max())})
    res.check("max_residual", float(np.abs(r).max(initial=0.0)), tol)
    return [res]


MT_FIELDS = {
    "kernel": lambda t: KernelField(make_psi_theta(t), [0.0, 0.0, 0.0]),
    "oracle": lambda t: suites.oracle_field(t)[0],
    "jump": lambda t: suites.jump_field(),
    "x1": lambda t: builtin_field("x1", t),
}


def cmd_special_cases(args):
    res = suites.SuiteResult("special_cases_table")
    rng = np.random.default_rng(args.seed)
    d = rng.standard_normal((20, 3))
    x = d / np.linalg.norm(d, axis=1)[:, None] * rng.uniform(1.1, 5.0, (20, 1))
    for name, (theta, mapping) in SPECIAL_CASES.items():
        case = special_case_map(name, KernelField(make_psi_theta(theta), [0.0, 0.0, 0.0]))
        r = float(np.abs(case.residual(x, ANALYTIC)).max())
        res.rows.append({"case": name, "theta": theta, "map": mapping, "kernel_residual": r})
        res.check(f"{name}_kernel_residual", r, args.tol or 1e-8)
    return [res]


COMMANDS = {
    "verify-algebra": (cmd_verify_algebra, "associativity, conjugation and norms on random quaternions"),
    "verify-structural": (cmd_verify_structural, "structural-set condition and Laplacian factorisation"),
    "mt-residual": (cmd_mt_residual, "generalized Moisil-Teodorescu residual of a field"),
    "verify-operators": (cmd_verify_operators, "hyperholomorphy of the Cauchy kernel; special-case maps"),
    "bp-check": (cmd_bp_check, "Borel-Pompeiu residual of f = x1 over a refinement sequence"),
    "jump-check": (cmd_jump_check, "Plemelj jump relations at boundary nodes"),
    "mpsi-test": (cmd_mpsi_test, "membership indicators for a pure-vector boundary field"),
    "decompose": (cmd_decompose, "interior/exterior decomposition of boundary data"),
    "special-cases": (cmd_special_cases, "the four named classical systems"),
}


NO_MESH = ("verify-algebra", "verify-structural", "verify-operators", "special-cases", "mt-residual")


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("global options")
    g.add_argument("--theta", type=_theta, default=0.0, help="angle in radians, or pi/2, pi, 3pi/2")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--tol", type=float, default=None, help="override the primary tolerance")
    g.add_argument("--output", default=None, help="report path (default: stdout)")
    g.add_argument("--format", choices=("json", "csv"), default="json")
    g.add_argument("-v", "--verbose", action="store_true")

    mesh = argparse.ArgumentParser(add_help=False)
    g = mesh.add_argument_group("mesh options")
    g.add_argument("--mesh", default=None, help="OFF file or sphere:<level> / ellipsoid:a,b,c:<level>")
    g.add_argument("--tets", default=None, help="TET file matching the surface")
    g.add_argument("--level", type=int, default=None, help="refinement level of a builtin mesh")
    g.add_argument("--eps-factor", type=float, default=2.0, help="principal-value exclusion, in local h")
    g.add_argument("--probes", default="builtin", help="CSV of x,y,z or 'builtin'")
    g.add_argument("--max-nodes", type=int, default=256, help="boundary nodes sampled for node checks")

    parser = argparse.ArgumentParser(prog="psimt", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"psimt {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")
    for name, (fn, helptext) in COMMANDS.items():
        parents = [common] if name in NO_MESH else [common, mesh]
        p = sub.add_parser(name, parents=parents, help=helptext, description=helptext)
        p.set_defaults(func=fn)
        if name == "mt-residual":
            p.add_argument("--field", default="kernel", help=f"builtin {sorted(MT_FIELDS)} or CSV grid: x,y,z + 8 reals")
            p.add_argument("--probes", default="builtin", help="CSV of x,y,z or 'builtin' (builtin fields only)")
        if name == "verify-algebra":
            p.add_argument("--n", type=int, default=1000, help="number of random triples")
        if name in ("jump-check", "mpsi-test"):
            p.add_argument("--field", default="jump" if name == "jump-check" else "kernel", choices=("jump", "kernel", "x1", "x2"))
        if name in ("jump-check", "mpsi-test", "decompose"):
            p.add_argument("--boundary-data", default=None, help="CSV: node_index, re/im of f1, f2, f3")
        if name == "decompose":
            p.add_argument("--rho", type=float, default=None, help="mollification radius")
            p.add_argument("--profile", choices=sorted(PROFILES), default="quintic")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        results = args.func(args)
    except (NotPureVector, ExtrapolationDiverged) as exc:
        print(f"psimt: error: {exc}", file=sys.stderr)
        return 1
    except TooCloseToSurface as exc:
        print(f"psimt: error: {exc} (move the probes or refine the mesh)", file=sys.stderr)
        return 2
    except ConfigError as exc:
        print(f"psimt: error: {exc}", file=sys.stderr)
        return 2
    report = make_report(args, results)
    try:
        emit(report, args)
    except OSError as exc:
        print(f"psimt: error: cannot write report: {exc}", file=sys.stderr)
        return 2
    for f in report["failures"]:
        print(f"FAILED {f}", file=sys.stderr)
    return 0 if report["passed"] else 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
