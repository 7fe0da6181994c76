"""Command line front end: ``schur-interp {check,solve,verify,coeffs} problem.json``.

Problem files are JSON objects with a ``kind`` key:

* ``nevanlinna_pick``: ``points`` (list) and ``values`` (list of ``q x p`` matrices);
* ``sarason``: ``zeros`` and either ``W`` (matrix in Cauchy-kernel
  coordinates) or ``W_poly`` (coefficients of a polynomial in the compressed shift);
* ``raw_aip``: explicit ``T``, ``D``, ``E``, ``M``.

Complex numbers are ``[re, im]`` pairs; plain numbers are read as real. A
matrix is a list of rows; a single entry stands for a ``1 x 1`` matrix.

Every command prints one JSON report. Exit status is 0 when all checks
pass, 1 for a mathematical failure (invalid or unsolvable data, failed
verification) and 2 for unreadable or malformed input.

Defaults for the global options can be set through the environment:
``SCHUR_INTERP_TOL`` (comma separated ``name=value`` pairs),
``SCHUR_INTERP_GRID_NODES``, ``SCHUR_INTERP_RADII`` and ``SCHUR_INTERP_SEED``.
Command line flags take precedence.
"""
import argparse
import hashlib
import json
import os
import sys
import tempfile

import numpy as np

from . import __version__
from .colligation import SchurParameter
from .data import (AipData, NevanlinnaPickData, SarasonData, build_nevanlinna_pick,
                   build_sarason, solvability, validate_fi)
from .errors import InterpolationError, InvalidDataError
from .kernels import BACKEND
from .scattering import SolutionEvaluator, Solver, coefficient_grid, disk_grid
from .tolerances import DEFAULT
from .verification import QuadratureSpec, interpolation_check, verify_solution

ENV_PREFIX = "SCHUR_INTERP_"

EXIT_OK, EXIT_FAIL, EXIT_FORMAT = 0, 1, 2


class FormatError(Exception):
    """Input file could not be parsed into the expected structure."""


# -- decoding -------------------------------------------------------------------


def _entry(x, where):
    if isinstance(x, bool):
        raise FormatError(f"{where}: booleans are not numbers")
    if isinstance(x, (int, float)):
        return complex(x)
    if isinstance(x, list) and len(x) == 2 and all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in x):
        return complex(x[0], x[1])
    raise FormatError(f"{where}: expected a number or an [re, im] pair, got {x!r}")


def _is_entry(x):
    return isinstance(x, (int, float)) or (
        isinstance(x, list) and len(x) == 2 and all(isinstance(v, (int, float)) for v in x))


def decode_vector(x, where):
    if not isinstance(x, list):
        raise FormatError(f"{where}: expected a list")
    return np.array([_entry(v, f"{where}[{i}]") for i, v in enumerate(x)], dtype=np.complex128)


def decode_matrix(x, where):
    """A list of rows, or a single entry for a 1 x 1 matrix; ``[]`` is a 0 x 0 matrix."""
    if _is_entry(x):
        return np.array([[_entry(x, where)]])
    if not isinstance(x, list):
        raise FormatError(f"{where}: expected a matrix")
    if not x:
        return np.zeros((0, 0), dtype=np.complex128)
    rows = [decode_vector(r, f"{where}[{i}]") for i, r in enumerate(x)]
    if len({len(r) for r in rows}) != 1:
        raise FormatError(f"{where}: rows have different lengths")
    return np.array(rows, dtype=np.complex128).reshape(len(rows), len(rows[0]))


def encode(a):
    """JSON form of a complex scalar or array (nested lists of ``[re, im]``)."""
    a = np.asarray(a)
    if a.ndim == 0:
        z = complex(a)
        return [z.real, z.imag]
    return [encode(v) for v in a]


def _require(obj, key, where):
    if key not in obj:
        raise FormatError(f"{where}: missing key {key!r}")
    return obj[key]


def load_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"cannot read {path}: {exc}") from None


def digest(obj):
    return hashlib.sha256(json.dumps(obj, sort_keys=True, separators=(",", ":"))
                          .encode()).hexdigest()


def parse_problem(obj):
    """Return ``(problem, AipData)``; ``problem`` is ``None`` for raw data.

    Raises ``FormatError`` for structural problems and ``InvalidDataError``
    when the numbers violate a mathematical requirement.
    """
    if not isinstance(obj, dict):
        raise FormatError("problem file must contain a JSON object")
    kind = _require(obj, "kind", "problem")
    if kind == "nevanlinna_pick":
        pts = decode_vector(_require(obj, "points", "problem"), "points")
        raw = _require(obj, "values", "problem")
        if not isinstance(raw, list):
            raise FormatError("values: expected a list")
        vals = [decode_matrix(v, f"values[{i}]") for i, v in enumerate(raw)]
        if len({v.shape for v in vals}) > 1:
            raise FormatError("values: matrices have different shapes")
        prob = NevanlinnaPickData(list(pts), vals)
        return prob, build_nevanlinna_pick(prob)
    if kind == "sarason":
        zeros = decode_vector(_require(obj, "zeros", "problem"), "zeros")
        if "W" in obj:
            prob = SarasonData(list(zeros), decode_matrix(obj["W"], "W"))
        elif "W_poly" in obj:
            prob = SarasonData.from_polynomial(list(zeros), decode_vector(obj["W_poly"], "W_poly"))
        else:
            raise FormatError("sarason problem needs 'W' or 'W_poly'")
        return prob, build_sarason(prob)
    if kind == "raw_aip":
        mats = {k: decode_matrix(_require(obj, k, "problem"), k) for k in "TDEM"}
        n = mats["T"].shape[0]
        for k in "EM":  # allow [] for empty channel spaces
            if mats[k].size == 0:
                mats[k] = np.zeros((0, n))
        return None, AipData(**mats)
    raise FormatError(f"unknown problem kind {kind!r}")


def parse_parameter(obj, mu, nu, rng):
    """Schur parameter from an ``--epsilon`` file."""
    if not isinstance(obj, dict):
        raise FormatError("parameter file must contain a JSON object")
    kind = _require(obj, "kind", "parameter")
    if kind == "zero":
        return SchurParameter.zero(mu, nu), "zero"
    if kind == "constant":
        K = decode_matrix(_require(obj, "value", "parameter"), "value")
        if K.size == 0:
            K = np.zeros((nu, mu))
        if K.shape != (nu, mu):
            raise InvalidDataError(f"constant parameter must be {nu} x {mu}, got {K.shape}")
        return SchurParameter.constant(K), f"constant {encode(K)}"
    if kind == "unitary":
        U = decode_matrix(_require(obj, "matrix", "parameter"), "matrix")
        k = int(_require(obj, "state_dim", "parameter"))
        return SchurParameter.from_matrix(U, k, mu, nu), f"unitary realization, state_dim={k}"
    if kind == "random":
        k = int(obj.get("state_dim", 1))
        return SchurParameter.random(mu, nu, k, rng), f"random, state_dim={k}"
    raise FormatError(f"unknown parameter kind {kind!r}")


class _SampledCandidate:
    """Pointwise lookup in a table of samples; unknown points raise ``KeyError``."""

    def __init__(self, points, values):
        self.points = points
        self.values = values

    def __call__(self, z):
        k = int(np.argmin(np.abs(self.points - z)))
        if abs(self.points[k] - z) > 1e-12:
            raise KeyError(z)
        return self.values[k]


def parse_candidate(obj, p, q):
    """Return ``(evaluator, sample_points)``; ``sample_points`` is ``None`` unless sampled."""
    if not isinstance(obj, dict):
        raise FormatError("candidate file must contain a JSON object")
    kind = _require(obj, "kind", "candidate")
    if kind == "constant":
        ev = SolutionEvaluator.constant(decode_matrix(_require(obj, "value", "candidate"), "value"))
        pts = None
    elif kind == "state_space":
        A, B, C, D = (decode_matrix(_require(obj, k, "candidate"), k) for k in "ABCD")
        k = A.shape[0]
        B = B.reshape(k, D.shape[1]) if B.size == 0 else B
        C = C.reshape(D.shape[0], k) if C.size == 0 else C
        if A.shape != (k, k) or B.shape != (k, D.shape[1]) or C.shape != (D.shape[0], k):
            raise FormatError("state_space: inconsistent block shapes")
        ev = SolutionEvaluator.from_state_space(A, B, C, D)
        pts = None
    elif kind == "samples":
        pts = decode_vector(_require(obj, "points", "candidate"), "points")
        raw = _require(obj, "values", "candidate")
        if not isinstance(raw, list) or len(raw) != len(pts):
            raise FormatError("samples: need one value per point")
        vals = [decode_matrix(v, f"values[{i}]") for i, v in enumerate(raw)]
        if np.any(np.abs(pts) >= 1):
            raise FormatError("samples: points must lie in the open unit disk")
        ev = SolutionEvaluator.from_function(_SampledCandidate(pts, vals), p, q)
        for v in vals:
            if v.shape != (q, p):
                raise FormatError(f"samples: values must be {q} x {p}")
    else:
        raise FormatError(f"unknown candidate kind {kind!r}")
    if (ev.q, ev.p) != (q, p):
        raise FormatError(f"candidate is {ev.q} x {ev.p}, data need {q} x {p}")
    return ev, pts


# -- options ------------------------------------------------------------------------


def _parse_tol_pairs(items):
    out = {}
    for item in items:
        for part in filter(None, (s.strip() for s in item.split(","))):
            name, sep, value = part.partition("=")
            if not sep:
                raise FormatError(f"--tol expects name=value, got {part!r}")
            try:
                out[name.strip()] = float(value)
            except ValueError:
                raise FormatError(f"tolerance {name!r} is not a number") from None
    return out


def resolve_settings(args, env=None):
    """Merge defaults, environment and flags into the settings used by a run."""
    env = os.environ if env is None else env
    tol_items = [env[ENV_PREFIX + "TOL"]] if env.get(ENV_PREFIX + "TOL") else []
    tol_items += args.tol or []
    try:
        tol = DEFAULT.updated(**_parse_tol_pairs(tol_items))
    except KeyError as exc:
        raise FormatError(str(exc.args[0])) from None

    def pick(flag, key, conv, default):
        if flag is not None:
            return flag
        if env.get(ENV_PREFIX + key):
            try:
                return conv(env[ENV_PREFIX + key])
            except ValueError:
                raise FormatError(f"bad value for {ENV_PREFIX + key}") from None
        return default

    nodes = pick(args.grid_nodes, "GRID_NODES", int, 64)
    radii = pick(args.radii, "RADII", _radii, (0.5, 0.9))
    seed = pick(args.seed, "SEED", int, 0)
    if nodes < 1 or any(not 0 <= r < 1 for r in radii):
        raise FormatError("grid needs at least one node and radii in [0, 1)")
    return {"tol": tol, "grid_nodes": nodes, "radii": tuple(radii), "seed": seed}


def _radii(text):
    return tuple(float(v) for v in str(text).split(",") if v.strip())


# -- report helpers --------------------------------------------------------------


def _base_report(command, raw, d, settings):
    return {
        "tool": "schur-interp",
        "version": __version__,
        "backend": BACKEND,
        "command": command,
        "instance": {"kind": raw.get("kind"), "sha256": digest(raw),
                     "n": d.n, "p": d.p, "q": d.q},
        "tolerances": settings["tol"].as_dict(),
        "grid": {"nodes": settings["grid_nodes"], "radii": list(settings["radii"])},
        "seed": settings["seed"],
    }


def _gate(report, d, tol):
    """Fill in FI and solvability; return True when both pass."""
    fi = validate_fi(d)
    psd = solvability(d, tol)
    report["fi_residual"] = fi
    report["fi_ok"] = fi <= tol.fi_tol
    report["solvability"] = psd.as_dict()
    report["solvable"] = bool(report["fi_ok"] and psd.is_psd)
    return report["solvable"]


def _grid(settings):
    return disk_grid(settings["radii"], settings["grid_nodes"])


def _usable_points(d, zetas, tol):
    """Split grid points into usable ones and those too close to ``sigma(T)``."""
    lam = np.linalg.eigvals(d.T) if d.n else np.zeros(0)
    keep, skipped = [], []
    for z in zetas:
        close = lam.size and np.min(np.abs(z - lam)) <= tol.spec_tol
        (skipped if close else keep).append(z)
    return np.array(keep, dtype=np.complex128), [encode(z) for z in skipped]


# -- commands -----------------------------------------------------------------------


def cmd_check(args, settings):
    raw = load_json(args.problem)
    _, d = parse_problem(raw)
    tol = settings["tol"]
    rep = _base_report("check", raw, d, settings)
    ok = _gate(rep, d, tol)
    if ok:
        solver = Solver(d, tol)
        rep["defects"] = {"mu": solver.mu, "nu": solver.nu, "rank_D": solver.colligation.r,
                          "dim_domain": solver.colligation.d}
    rep["passed"] = ok
    return rep, EXIT_OK if ok else EXIT_FAIL


def _solution_record(d, problem, s, label, settings, spec):
    tol = settings["tol"]
    grid = _grid(settings)
    vals = s.evaluate(grid)
    pts, skipped = _usable_points(d, grid, tol)
    ver = verify_solution(d, s, pts, problem=problem, spec=spec, tol=tol)
    ver["skipped_points"] = skipped + ver["skipped_points"]
    return {
        "parameter": label,
        "samples": {"points": encode(grid), "values": encode(vals)},
        "verification": ver,
    }


def cmd_solve(args, settings):
    raw = load_json(args.problem)
    problem, d = parse_problem(raw)
    tol = settings["tol"]
    rep = _base_report("solve", raw, d, settings)
    if not _gate(rep, d, tol):
        rep["error"] = "data are not solvable; refusing to construct solutions"
        rep["passed"] = False
        return rep, EXIT_FAIL
    solver = Solver(d, tol)
    rep["defects"] = {"mu": solver.mu, "nu": solver.nu}
    rng = np.random.default_rng(settings["seed"])
    if args.epsilon:
        eps, label = parse_parameter(load_json(args.epsilon), solver.mu, solver.nu, rng)
    else:
        eps, label = SchurParameter.zero(solver.mu, solver.nu), "central (zero)"
    s = solver.solution(eps, route=args.route)
    rec = _solution_record(d, problem, s, label, settings, QuadratureSpec())
    rep["solutions"] = [rec]
    rep["passed"] = bool(rec["verification"]["passed"])
    return rep, EXIT_OK if rep["passed"] else EXIT_FAIL


def cmd_verify(args, settings):
    raw = load_json(args.problem)
    problem, d = parse_problem(raw)
    tol = settings["tol"]
    cand_raw = load_json(args.candidate)
    s, sample_pts = parse_candidate(cand_raw, d.p, d.q)
    rep = _base_report("verify", raw, d, settings)
    rep["candidate"] = {"kind": cand_raw.get("kind"), "sha256": digest(cand_raw)}
    _gate(rep, d, tol)
    try:
        if sample_pts is None:
            pts, skipped = _usable_points(d, _grid(settings), tol)
            ver = verify_solution(d, s, pts, problem=problem, tol=tol)
            ver["skipped_points"] = skipped + ver["skipped_points"]
        else:
            pts, skipped = _usable_points(d, sample_pts, tol)
            ver = verify_solution(d, s, pts, problem=None, tol=tol, ks_bound=False)
            ver["skipped_points"] = skipped + ver["skipped_points"]
            ver["not_run"] = ["ks_bound"]
            if isinstance(problem, NevanlinnaPickData):
                try:
                    res = interpolation_check(problem, s)
                    ver["interpolation"] = {"passed": res <= tol.eval_tol, "residual": res}
                    ver["passed"] = bool(ver["passed"] and res <= tol.eval_tol)
                except KeyError:
                    ver["not_run"].append("interpolation")
            elif problem is not None:
                ver["not_run"].append("interpolation")
    except (ValueError, KeyError) as exc:
        raise FormatError(f"candidate cannot be evaluated: {exc}") from None
    rep["verification"] = ver
    rep["passed"] = bool(ver["passed"])
    return rep, EXIT_OK if rep["passed"] else EXIT_FAIL


def cmd_coeffs(args, settings):
    raw = load_json(args.problem)
    _, d = parse_problem(raw)
    tol = settings["tol"]
    rep = _base_report("coeffs", raw, d, settings)
    if not _gate(rep, d, tol):
        rep["error"] = "data are not solvable; the coefficient matrix is undefined"
        rep["passed"] = False
        return rep, EXIT_FAIL
    solver = Solver(d, tol)
    grid = _grid(settings)
    blocks = coefficient_grid(solver.coupling, grid)
    rep["defects"] = {"mu": solver.mu, "nu": solver.nu}
    rep["layout"] = "s11: N -> L', s12: L -> L', s21: N -> M, s22: L -> M"
    rep["coefficients"] = [{"z": encode(b.at), "s11": encode(b.s11), "s12": encode(b.s12),
                            "s21": encode(b.s21), "s22": encode(b.s22)} for b in blocks]
    rep["passed"] = True
    return rep, EXIT_OK


# -- entry point ----------------------------------------------------------------------


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", action="append", metavar="NAME=VALUE",
                        help="override a tolerance (repeatable, or comma separated)")
    common.add_argument("--grid-nodes", type=int, help="nodes per grid circle (default 64)")
    common.add_argument("--radii", type=_radii, help="comma separated grid radii (default 0.5,0.9)")
    common.add_argument("--seed", type=int, help="seed for randomized parameters (default 0)")
    common.add_argument("-o", "--output", help="write the report here instead of stdout")

    ap = argparse.ArgumentParser(prog="schur-interp", description=__doc__.split("\n")[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", parents=[common], help="validate data and test solvability")
    p.add_argument("problem")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("solve", parents=[common], help="sample one solution and verify it")
    p.add_argument("problem")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--central", action="store_true", help="use the zero parameter (default)")
    g.add_argument("--epsilon", metavar="FILE", help="Schur parameter file")
    p.add_argument("--route", choices=("extension", "lft"), default="lft",
                   help="evaluate through the linear-fractional map or a unitary extension")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", parents=[common], help="check an external candidate")
    p.add_argument("problem")
    p.add_argument("candidate")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("coeffs", parents=[common], help="dump coefficient blocks on the grid")
    p.add_argument("problem")
    p.set_defaults(func=cmd_coeffs)
    return ap


def _emit(report, path):
    text = json.dumps(report, indent=2, allow_nan=False, default=_json_default) + "\n"
    if not path:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".report-")
    with os.fdopen(fd, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _json_default(o):
    if isinstance(o, (np.bool_,)):
        return bool(o)
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o) if np.isfinite(o) else None
    if isinstance(o, (complex, np.complexfloating)):
        return encode(o)
    if isinstance(o, np.ndarray):
        return encode(o) if np.iscomplexobj(o) else o.tolist()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def _sanitize(obj):
    """Replace non-finite floats by ``None`` so the report is strict JSON."""
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, float) and not np.isfinite(obj):
        return None
    return obj


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        settings = resolve_settings(args)
        report, code = args.func(args, settings)
    except FormatError as exc:
        report, code = {"tool": "schur-interp", "version": __version__,
                        "error": str(exc), "passed": False}, EXIT_FORMAT
    except InterpolationError as exc:
        report, code = {"tool": "schur-interp", "version": __version__,
                        "error": f"{type(exc).__name__}: {exc}", "passed": False}, EXIT_FAIL
    except ValueError as exc:  # malformed numbers that survived decoding
        report, code = {"tool": "schur-interp", "version": __version__,
                        "error": str(exc), "passed": False}, EXIT_FORMAT
    _emit(_sanitize(report), getattr(args, "output", None))
    return code


if __name__ == "__main__":
    sys.exit(main())
