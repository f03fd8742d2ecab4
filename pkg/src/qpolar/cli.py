"""Command-line front end: JSON problem files in, JSON reports out.

Exit codes: 0 success, 1 invalid input, 2 violated precondition, 3 failed
verification (including a failing ``selftest``).
"""

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import replace
from importlib import resources

import jsonschema
import numpy as np

from . import bounds, capacity, dynamics, gaussian, polarity, reconstruct, symplectic
from .errors import DimensionMismatch, InputError, QPolarError
from .matcore import DEFAULT_TOL, as_matrix, rel_err

REPORT_VERSION = "1"
COMMANDS = (
    "dual",
    "pair-check",
    "williamson",
    "project",
    "reconstruct",
    "capacity",
    "evolve",
    "mahler",
    "hardy",
    "donoho-stark",
    "selftest",
)


class SchemaError(InputError):
    pass


def _format_float(x):
    if not math.isfinite(x):
        return "null"
    if x == int(x) and abs(x) < 1e16:
        return f"{x:.1f}"
    return format(x, ".17g")


def to_plain(obj):
    """Convert numpy values and dataclass-free containers into JSON-ready objects."""
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if obj is None or isinstance(obj, str):
        return obj
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent=2):
    """Serialize with insertion-ordered keys and 17-significant-digit floats."""

    def emit(o, level):
        pad = " " * (indent * level)
        inner = " " * (indent * (level + 1))
        if isinstance(o, dict):
            if not o:
                return "{}"
            items = [f"{inner}{json.dumps(k)}: {emit(v, level + 1)}" for k, v in o.items()]
            return "{\n" + ",\n".join(items) + "\n" + pad + "}"
        if isinstance(o, list):
            if not o:
                return "[]"
            if all(not isinstance(v, (dict, list)) for v in o):
                return "[" + ", ".join(emit(v, level + 1) for v in o) + "]"
            items = [inner + emit(v, level + 1) for v in o]
            return "[\n" + ",\n".join(items) + "\n" + pad + "]"
        if isinstance(o, bool) or o is None:
            return json.dumps(o)
        if isinstance(o, int):
            return str(o)
        if isinstance(o, float):
            return _format_float(o)
        return json.dumps(o)

    return emit(to_plain(obj), 0) + "\n"


def load_schema():
    text = resources.files("qpolar").joinpath("data/problem.schema.json").read_text()
    return json.loads(text)


def validate_problem(command, doc):
    """Validate a problem document against the schema for ``command``.

    Raises:
        SchemaError: the document does not match (includes unknown fields).
    """
    if command not in COMMANDS:
        raise SchemaError(f"unknown command {command!r}")
    schema = load_schema()
    validator = jsonschema.Draft202012Validator(
        {"$ref": f"#/$defs/{command}", "$defs": schema["$defs"]}
    )
    errors = list(validator.iter_errors(doc))
    # A failing shared-field branch drops its annotations, which makes every
    # valid field look unevaluated; report the substantive errors first.
    primary = [e for e in errors if e.validator != "unevaluatedProperties"] or errors
    if primary:
        msgs = []
        for e in sorted(primary, key=lambda e: [str(p) for p in e.absolute_path]):
            where = "/".join(str(p) for p in e.absolute_path) or "<root>"
            msgs.append(f"{where}: {e.message}")
        raise SchemaError("problem file invalid: " + "; ".join(msgs))


def _mat(doc, key, size):
    M = as_matrix(doc[key], key)
    if M.shape != (size, size):
        raise DimensionMismatch(f"{key} must be {size}x{size}, got {M.shape[0]}x{M.shape[1]}")
    return M


def _body(desc, n, hbar, key="body"):
    kind = desc["type"]
    space = polarity.Space(desc["space"])
    if kind == "ellipsoid":
        A = _mat(desc, "A", n)
        return polarity.EllipsoidBody(space, A, desc.get("level", hbar))
    vec = np.asarray(desc["half_widths" if kind == "box" else "weights"], dtype=float)
    if vec.shape != (n,):
        raise DimensionMismatch(f"{key} needs {n} entries, got {vec.size}")
    if kind == "box":
        return polarity.BoxBody(space, vec)
    return polarity.CrossPolytopeBody(space, vec, desc["level"])


def _body_dict(body):
    if isinstance(body, polarity.EllipsoidBody):
        return {"type": "ellipsoid", "space": body.space.value, "A": body.A, "level": body.level,
                "volume": body.volume}
    if isinstance(body, polarity.BoxBody):
        return {"type": "box", "space": body.space.value, "half_widths": body.half_widths,
                "volume": body.volume}
    return {"type": "cross_polytope", "space": body.space.value, "weights": body.weights,
            "level": body.level, "volume": body.volume}


def _flag(key, detail):
    return {"id": key, "detail": detail}


def _cmd_dual(doc, ctx):
    n, hbar, tol = ctx["n"], ctx["hbar"], ctx["tol"]
    body = _body(doc["body"], n, hbar)
    results, certs = {}, {}
    if "frame" in doc:
        if not isinstance(body, polarity.EllipsoidBody):
            raise InputError("frame duality needs an ellipsoid body")
        framed = polarity.FramedBody(_mat(doc, "frame", 2 * n), body)
        dual = polarity.lagrangian_polar_dual(framed, hbar, tol)
        back = polarity.lagrangian_polar_dual(dual, hbar, tol)
        results["frame"] = dual.frame
        results["dual"] = _body_dict(dual.body)
        certs["frame_symplectic_residual"] = symplectic.symplectic_residual(dual.frame)
        certs["biduality_residual"] = rel_err(back.body.A, body.A)
        return results, certs, []
    dual = polarity.polar_dual(body, hbar)
    results["dual"] = _body_dict(dual)
    back = polarity.polar_dual(dual, hbar)
    if isinstance(body, polarity.EllipsoidBody):
        X = body if body.space is polarity.Space.POSITION else dual
        P = dual if body.space is polarity.Space.POSITION else body
        rep = polarity.is_quantum_pair(X, P, hbar, tol)
        results["saturated_pair"] = rep.is_saturated
        certs["biduality_residual"] = rel_err(back.normalized(hbar).A, body.normalized(hbar).A)
        certs["pair_lambda"] = rep.lam
    elif isinstance(body, polarity.BoxBody):
        certs["biduality_residual"] = rel_err(back.half_widths, body.half_widths)
    else:
        certs["biduality_residual"] = rel_err(back.weights / back.level,
                                              body.weights / body.level)
    results["mahler_product"] = body.volume * dual.volume
    return results, certs, []


def _cmd_pair_check(doc, ctx):
    n, hbar, tol = ctx["n"], ctx["hbar"], ctx["tol"]
    X = polarity.EllipsoidBody("position", _mat(doc, "A", n), hbar)
    P = polarity.EllipsoidBody("momentum", _mat(doc, "B", n), hbar)
    rep = polarity.is_quantum_pair(X, P, hbar, tol)
    return rep.as_dict(), {}, []


def _cmd_williamson(doc, ctx):
    n, tol = ctx["n"], ctx["tol"]
    sigma = _mat(doc, "sigma", 2 * n)
    dec = symplectic.williamson(sigma, tol)
    certs = {
        "symplectic_residual": symplectic.symplectic_residual(dec.S),
        "reconstruction_error": rel_err(dec.reconstruct(), sigma),
    }
    return {"S": dec.S, "nu": dec.nu}, certs, []


def _cov(doc, ctx):
    return gaussian.CovState(_mat(doc, "sigma", 2 * ctx["n"]), ctx["hbar"], ctx["tol"])


def _cmd_project(doc, ctx):
    cov = _cov(doc, ctx)
    OX, OP = gaussian.project(cov.ellipsoid(), ctx["tol"])
    verdict = gaussian.quantum_condition(cov)
    results = {
        "M": cov.M,
        "omega_x": _body_dict(OX),
        "omega_p": _body_dict(OP),
        "quantum": verdict.as_dict(),
    }
    certs = {}
    if verdict.holds:
        certs["pair"] = gaussian.projection_pair_check(cov).as_dict()
    return results, certs, []


def _solution_dict(sol):
    return {
        "ambiguity": sol.ambiguity,
        "correlation_rank": sol.rank,
        "partners": [{"W": p.W, "Y": p.Y} for p in sol.partners],
        "sigmas": [c.sigma for c in sol.blob_sigmas],
    }


def _cmd_reconstruct(doc, ctx):
    n, hbar, tol = ctx["n"], ctx["hbar"], ctx["tol"]
    mode = doc.get("mode")
    if mode is None:
        if "sigma_xx" in doc:
            mode = "pauli_1d"
        elif "B" in doc:
            mode = "pair"
        else:
            mode = "saturated"
    flags = []
    if mode == "pauli_1d":
        if n != 1 or "sigma_xx" not in doc or "sigma_pp" not in doc:
            raise InputError("pauli_1d needs n = 1, sigma_xx and sigma_pp")
        sol = reconstruct.pauli_1d(doc["sigma_xx"], doc["sigma_pp"], hbar, tol)
        results = _solution_dict(sol)
        results["sigma_xp"] = [c.sigma[0, 1] for c in sol.blob_sigmas]
        return results, sol.residuals, flags
    if "A" not in doc:
        raise InputError(f"mode {mode} needs A")
    A = _mat(doc, "A", n)
    if mode == "saturated":
        sol = reconstruct.reconstruct_saturated(A, hbar, tol)
        flags.append(_flag("saturated_position_covariance",
                           "Sigma_XX = (hbar/2) A^-1 (W = A); the alternative A^2 form "
                           "does not reproject onto X"))
        return _solution_dict(sol), sol.residuals, flags
    if "B" not in doc:
        raise InputError(f"mode {mode} needs B")
    B = _mat(doc, "B", n)
    if mode == "pair":
        sol = reconstruct.reconstruct_pair(A, B, hbar, tol)
        flags.append(_flag("correlation_root_orientation",
                           "Sigma_XP = (hbar/2) A^-1/2 K^1/2 A^1/2; the transposed root "
                           "A^1/2 K^1/2 A^-1/2 gives a non-symmetric Y when A and B do "
                           "not commute"))
        return _solution_dict(sol), sol.residuals, flags
    rep = reconstruct.max_volume_state(A, B, hbar, tol)
    results = {
        "sigma": rep.state.cov.sigma,
        "nu": rep.state.cov.nu,
        "lambda": rep.lam,
        "purity": rep.purity,
        "purity_from_nu": rep.purity_nu,
        "purity_alternatives": rep.alternatives,
    }
    if rep.discrepancy:
        flags.append(_flag("max_volume_purity_exponent",
                           "purity prod lam^(1/2) differs from the prod lam^2, prod lam "
                           "and prod lam^(1/4) expressions"))
    return results, rep.residuals, flags


def _cmd_capacity(doc, ctx):
    n, hbar, tol = ctx["n"], ctx["hbar"], ctx["tol"]
    flags = []
    if "M" in doc:
        omega = gaussian.PhaseEllipsoid(_mat(doc, "M", 2 * n), hbar)
        rep = capacity.capacity_ellipsoid(omega, tol)
        iso = capacity.isoperimetric_check(omega, tol=tol)
        return ({"capacity": rep.value, "formula": rep.formula, "nu": rep.witnesses},
                {"isoperimetric": {"lhs": iso.lhs, "rhs": iso.rhs, "holds": iso.holds}}, flags)
    if "sigma" in doc:
        cov = _cov(doc, ctx)
        thr = capacity.capacity_quantum_threshold(cov)
        verdict = gaussian.quantum_condition(cov)
        return ({"capacity": thr.capacity, "quantum": thr.quantum},
                {"nu_min": verdict.nu_min, "agrees_with_nu_min": thr.quantum == verdict.holds},
                flags)
    if "A" in doc and "B" in doc:
        X = polarity.EllipsoidBody("position", _mat(doc, "A", n), hbar)
        P = polarity.EllipsoidBody("momentum", _mat(doc, "B", n), hbar)
        rep = capacity.cmax_product(X, P, hbar, tol)
        iso = capacity.isoperimetric_check((X, P), hbar=hbar, tol=tol)
        if not rep.extra["inverse_eigenvalue_formula_matches"]:
            flags.append(_flag("cmax_formula",
                               "4 hbar / lam_min differs from c_max = 4 hbar / sqrt(lam_max)"))
        certs = dict(rep.extra)
        certs["isoperimetric"] = {"lhs": iso.lhs, "rhs": iso.rhs, "holds": iso.holds}
        return ({"c_max": rep.value, "formula": rep.formula, "lambda": rep.witnesses},
                certs, flags)
    raise InputError("capacity needs M, sigma, or A and B")


def _cmd_evolve(doc, ctx):
    n = ctx["n"]
    cov = _cov(doc, ctx)
    H = dynamics.QuadHamiltonian(_mat(doc, "H", 2 * n))
    series = dynamics.projection_volume_series(cov, H, doc["t_grid"])
    rows, det0 = [], float(np.linalg.det(cov.sigma))
    drift_det, drift_nu = 0.0, 0.0
    for pt in series:
        ct = dynamics.evolve_cov(cov, H, pt.t)
        drift_det = max(drift_det, abs(float(np.linalg.det(ct.sigma)) / det0 - 1))
        drift_nu = max(drift_nu, float(np.max(np.abs(ct.nu - cov.nu)) / cov.nu[-1]))
        rows.append({"t": pt.t, "vol_x": pt.vol_x, "vol_p": pt.vol_p,
                     "is_pair": pt.pair.is_pair, "is_saturated": pt.pair.is_saturated,
                     "det_identity_residual": pt.det_identity})
    flags = [_flag("flow_sign_convention",
                   "flow is exp(t J H''), the symplectic solution of dz/dt = J H'' z")]
    certs = {"det_sigma_drift": drift_det, "nu_drift": drift_nu,
             "pair_at_every_t": all(r["is_pair"] for r in rows)}
    return {"series": rows}, certs, flags


def _cmd_mahler(doc, ctx):
    n, hbar, tol, seed = ctx["n"], ctx["hbar"], ctx["tol"], ctx["seed"]
    body = _body(doc["body"], n, hbar)
    rep = bounds.mahler_volume(body, hbar, tol)
    samples = int(doc.get("samples", 10**6))
    dual = polarity.polar_dual(body, hbar)
    checks = {}
    for name, b, s in (("body", body, seed), ("dual", dual, seed + 1)):
        est = bounds.mc_volume(b, s, samples)
        z = abs(est.estimate - b.volume) / est.std_error if est.std_error > 0 else 0.0
        checks[name] = {"exact": b.volume, "estimate": est.estimate,
                        "std_error": est.std_error, "z": z, "within_3_sigma": z <= 3}
    return rep.as_dict(), {"monte_carlo": checks}, []


def _cmd_hardy(doc, ctx):
    n, hbar, tol = ctx["n"], ctx["hbar"], ctx["tol"]
    v = bounds.hardy_classify(_mat(doc, "A", n), _mat(doc, "B", n), hbar, tol)
    results = {"lambda": v.lambdas, "case": v.case, "hardy_capacity": v.hardy_capacity,
               "note": v.note}
    if v.state is not None:
        results["state"] = {"W": v.state.W, "Y": v.state.Y}
    return results, {}, []


def _cmd_donoho_stark(doc, ctx):
    n, hbar, tol, seed = ctx["n"], ctx["hbar"], ctx["tol"], ctx["seed"]
    X = _body(doc["X"], n, hbar, "X")
    P = _body(doc["P"], n, hbar, "P") if "P" in doc else polarity.polar_dual(X, hbar)
    certs = {}
    if "eps_x" in doc and "eps_p" in doc:
        ex, ep = doc["eps_x"], doc["eps_p"]
    else:
        if "W" in doc:
            state = gaussian.GaussianPure(_mat(doc, "W", n), _mat(doc, "Y", n) if "Y" in doc
                                          else np.zeros((n, n)), hbar)
        else:
            state = gaussian.GaussianPure.standard(n, hbar)
        cx = bounds.concentration(state, X, X.space, seed, tol=tol)
        cp = bounds.concentration(state, P, P.space, seed + 1, tol=tol)
        ex, ep = cx.eps, cp.eps
        certs["eps_x"] = {"method": cx.method, "std_error": cx.std_error}
        certs["eps_p"] = {"method": cp.method, "std_error": cp.std_error}
    rep = bounds.donoho_stark_check(ex, ep, X, P, hbar, tol)
    return rep.as_dict(), certs, []


def _cmd_selftest(doc, ctx):
    from .acceptance import run_all

    results = run_all(seed=ctx["seed"])
    table = [{"criterion": r.number, "name": r.name, "passed": r.passed, "detail": r.detail}
             for r in results]
    for r in results:
        print(r.line(), file=sys.stderr)
    ok = all(r.passed for r in results)
    return {"criteria": table, "all_passed": ok}, {}, []


HANDLERS = {
    "dual": _cmd_dual,
    "pair-check": _cmd_pair_check,
    "williamson": _cmd_williamson,
    "project": _cmd_project,
    "reconstruct": _cmd_reconstruct,
    "capacity": _cmd_capacity,
    "evolve": _cmd_evolve,
    "mahler": _cmd_mahler,
    "hardy": _cmd_hardy,
    "donoho-stark": _cmd_donoho_stark,
    "selftest": _cmd_selftest,
}


def _context(doc, tolerance_rel=None, seed=None):
    n = doc.get("n")
    tol_fields = dict(doc.get("tolerance", {}))
    if tolerance_rel is not None:
        tol_fields["rel_eq"] = tolerance_rel
    tol = replace(DEFAULT_TOL, **tol_fields) if tol_fields else DEFAULT_TOL
    return {
        "n": n,
        "hbar": float(doc.get("hbar", 1.0)),
        "tol": tol,
        "seed": int(seed if seed is not None else doc.get("seed", 0)),
    }


def run(command, doc, tolerance_rel=None, seed=None):
    """Execute one problem and return ``(report, exit_code)``.

    The report is a plain ordered dict; errors are reported in it rather
    than raised.
    """
    report = {"command": command, "report_version": REPORT_VERSION}
    try:
        validate_problem(command, doc)
        ctx = _context(doc, tolerance_rel, seed)
        report["inputs"] = doc
        report["tolerance"] = ctx["tol"].as_dict()
        report["seed"] = ctx["seed"]
        results, certs, flags = HANDLERS[command](doc, ctx)
    except (QPolarError, ValueError, np.linalg.LinAlgError) as exc:
        code = getattr(exc, "exit_code", 1 if isinstance(exc, ValueError) else 3)
        report["status"] = "error"
        error = {"type": type(exc).__name__, "message": str(exc), "exit_code": code}
        for attr in ("eigenvalue", "residual"):
            if getattr(exc, attr, None) is not None:
                error[attr] = getattr(exc, attr)
        report["error"] = error
        return report, code
    report["status"] = "ok"
    report["results"] = results
    report["certificates"] = certs
    report["flags"] = flags
    if command == "selftest" and not results["all_passed"]:
        report["status"] = "failed"
        return report, 3
    return report, 0


def series_csv(report):
    """CSV rendering of an ``evolve`` report's time series."""
    rows = report["results"]["series"]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    keys = list(rows[0].keys())
    writer.writerow(keys)
    for row in rows:
        writer.writerow([_format_float(v) if isinstance(v, float) else v for v in row.values()])
    return buf.getvalue()


def build_parser():
    parser = argparse.ArgumentParser(
        prog="qpolar",
        description="Polar duality, Gaussian-state and symplectic-capacity computations.",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--input", "-i", help="problem file (JSON); '-' reads stdin")
    parser.add_argument("--output", "-o", default="-", help="report path, '-' for stdout")
    parser.add_argument("--tolerance-rel", type=float, help="override rel_eq")
    parser.add_argument("--seed", type=int, help="override the problem seed")
    parser.add_argument("--format", choices=("json", "csv"), default="json",
                        help="csv is available for evolve only")
    return parser


def _read_input(path):
    if path is None or path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.input is None and args.command == "selftest":
        doc = {"version": REPORT_VERSION}
    else:
        try:
            doc = json.loads(_read_input(args.input))
        except (OSError, json.JSONDecodeError) as exc:
            print(f"qpolar: cannot read problem: {exc}", file=sys.stderr)
            return 1
    if args.seed is not None and args.seed < 0:
        print("qpolar: --seed must be non-negative", file=sys.stderr)
        return 1
    if args.tolerance_rel is not None and not args.tolerance_rel > 0:
        print("qpolar: --tolerance-rel must be positive", file=sys.stderr)
        return 1
    report, code = run(args.command, doc, args.tolerance_rel, args.seed)
    if args.format == "csv":
        if args.command != "evolve":
            print("qpolar: --format csv is only available for evolve", file=sys.stderr)
            return 1
        text = series_csv(report) if code == 0 else dumps(report)
    else:
        text = dumps(report)
    if code != 0 and "error" in report:
        print(f"qpolar: {report['error']['type']}: {report['error']['message']}",
              file=sys.stderr)
    if args.output == "-":
        sys.stdout.write(text)
    else:
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
