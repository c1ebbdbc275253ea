"""Command-line front end (``plap``).

Exit codes: 0 success or verdict true, 2 verdict false, 1 usage, input or
numerical error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__
from .comparison import solve_pair, verify_counterexample_theta, verify_counterexample_plateau
from .coretypes import NumericPolicy, ProblemInstance, ScalarField
from .errors import PlapError
from .examples import (ThetaFamilyParams, f_theta, plateau_du, plateau_dv, plateau_instance, plateau_u,
                       plateau_v, plateau_xs, du_theta, u_theta)
from .operators import apply_operator, check_hypothesis_H0, check_hypothesis_Hpm1, \
    check_hypothesis_M
from .solver import solve

EXIT_OK, EXIT_ERROR, EXIT_FALSE = 0, 1, 2
CSV_COLUMNS = ("x", "u", "du", "v", "dv", "f", "g", "b")
SWEEP_PARAMETERS = {"plateau": ("p", "grid_n"),
                    "theta": ("p", "theta1", "theta2", "lambda", "grid_n"),
                    "instance": ("p", "b0", "grid_n")}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# io helpers


def _atomic_write(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if hasattr(obj, "to_dict"):
        return obj.to_dict()
    return str(obj)


def _json_text(data: Any) -> str:
    return json.dumps(data, indent=2, sort_keys=True, default=_json_default) + "\n"


def _fmt(v: float) -> str:
    return "" if v is None or (isinstance(v, float) and math.isnan(v)) else repr(float(v))


def csv_text(columns: dict[str, np.ndarray], order: Sequence[str] = CSV_COLUMNS) -> str:
    """CSV with the columns present in ``columns``, in the fixed ``order``."""
    names = [c for c in order if c in columns]
    rows = zip(*(np.asarray(columns[c], dtype=float) for c in names))
    out = [",".join(names)]
    out += [",".join(_fmt(v) for v in row) for row in rows]
    return "\n".join(out) + "\n"


def _read_json(path: str) -> Any:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path} is not valid JSON: {exc}") from None


def _load_instance(path: str) -> ProblemInstance:
    spec = _read_json(path)
    if not isinstance(spec, dict) or "p" not in spec:
        raise UsageError(f"{path}: an instance needs at least the key 'p'")
    return ProblemInstance.from_spec(spec)


def _load_field(path: str) -> ScalarField:
    spec = _read_json(path)
    if isinstance(spec, dict) and "p" in spec and "f" in spec:
        spec = spec["f"]
    return ScalarField.from_spec(spec)


def _policy(args) -> NumericPolicy:
    kw = {}
    if getattr(args, "grid_n", None) is not None:
        kw["grid_n"] = args.grid_n
    if getattr(args, "tol", None) is not None:
        kw["tol_solve"] = args.tol
    try:
        return NumericPolicy(**kw)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _theta_params(args) -> ThetaFamilyParams:
    lam = float("nan") if args.lam is None else args.lam
    return ThetaFamilyParams(p=args.p if args.p is not None else 4.0,
                             theta1=args.theta1, theta2=args.theta2, lam=lam)


def _emit(data: Any, out: str | None) -> None:
    text = _json_text(data)
    if out:
        _atomic_write(Path(out), text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# commands


def cmd_solve(args) -> int:
    inst = _load_instance(args.instance)
    policy = _policy(args)
    sol = solve(inst, policy, args.method)
    res = apply_operator(inst, sol)
    resid = np.array(res.values, dtype=float)
    resid[list(res.excluded_nodes)] = np.nan
    text = csv_text({"x": sol.nodes, "u": sol.values, "du": sol.du, "residual": resid},
                    order=("x", "u", "du", "residual"))
    if args.out:
        _atomic_write(Path(args.out), text)
    else:
        sys.stdout.write(text)
    print(f"method={sol.method} nodes={sol.nodes.size} residual_sup={sol.residual_sup:.3e} "
          f"operator_residual={res.sup_norm:.3e}", file=sys.stderr)
    return EXIT_OK


def cmd_compare(args) -> int:
    if not args.g:
        raise UsageError("compare needs --g")
    inst = _load_instance(args.instance)
    g = _load_field(args.g)
    policy = _policy(args)
    u, v, verdict = solve_pair(inst, g, policy, args.method)
    report = verdict.to_dict()
    report["methods"] = [u.method, v.method]
    _emit(report, args.out)
    if args.csv:
        x = u.nodes
        _atomic_write(Path(args.csv), csv_text({
            "x": x, "u": u.values, "du": u.du, "v": v.values, "dv": v.du,
            "f": inst.f(x), "g": g(x), "b": inst.b(x)}))
    return EXIT_OK if verdict.wcp_holds else EXIT_FALSE


def _verify(kind: str, args) -> dict[str, Any]:
    policy = _policy(args)
    if kind == "plateau":
        rep = verify_counterexample_plateau(args.p if args.p is not None else 4.0, policy)
        rep["checks"] = {k: "pass" if ok else "fail" for k, ok in rep["checks"].items()}
        return rep
    rep = verify_counterexample_theta(_theta_params(args), policy)
    rep["checks"] = {k: "pass" if ok else "fail" for k, ok in rep["checks"].items()}
    return rep


def cmd_verify(args) -> int:
    rep = _verify(args.example, args)
    _emit(rep, args.out)
    return EXIT_OK if rep["all_pass"] else EXIT_FALSE


def cmd_emit_example(args) -> int:
    """Write the instance (source f), the source g, the exact profiles and metadata.

    ``--out file.csv`` puts the profiles there and the JSON files beside it as
    ``file.instance.json``, ``file.g.json`` and ``file.meta.json``; any other
    ``--out`` is a directory receiving ``instance.json``, ``g.json``,
    ``profiles.csv`` and ``meta.json``.
    """
    out = Path(args.out or ".")
    if out.suffix == ".csv":
        stem = out.with_suffix("")
        paths = {"csv": out, "instance": Path(f"{stem}.instance.json"),
                 "g": Path(f"{stem}.g.json"), "meta": Path(f"{stem}.meta.json")}
    else:
        paths = {"csv": out / "profiles.csv", "instance": out / "instance.json",
                 "g": out / "g.json", "meta": out / "meta.json"}
    policy = _policy(args)
    if args.example == "plateau":
        p = args.p if args.p is not None else 4.0
        inst_f, inst_g = plateau_instance(p, "f"), plateau_instance(p, "g")
        x = policy.nodes(inst_f.breakpoints)
        cols = {"x": x, "u": plateau_u(p, x), "du": plateau_du(p, x), "v": plateau_v(p, x),
                "dv": plateau_dv(p, x), "f": inst_f.f(x), "g": inst_g.f(x), "b": inst_f.b(x)}
        meta = {"example": "plateau", "p": p, "x_s": plateau_xs(p)}
    else:
        params = _theta_params(args)
        inst_f, inst_g = params.instance(params.theta1), params.instance(params.theta2)
        x = policy.nodes((0.0,))
        b, phi = params.drift_field(), params.reaction()
        cols = {"x": x, "u": u_theta(params.theta1, x), "du": du_theta(params.theta1, x),
                "v": u_theta(params.theta2, x), "dv": du_theta(params.theta2, x),
                "f": f_theta(params.p, params.theta1, b, phi, x),
                "g": f_theta(params.p, params.theta2, b, phi, x), "b": b(x)}
        meta = {"example": "theta", "p": params.p, "theta1": params.theta1,
                "theta2": params.theta2, "lambda": params.lam}
    _atomic_write(paths["instance"], _json_text({**inst_f.to_spec(), "name": inst_f.name}))
    _atomic_write(paths["g"], _json_text(inst_g.f.to_spec()))
    _atomic_write(paths["csv"], csv_text(cols))
    _atomic_write(paths["meta"], _json_text({**meta, "policy": policy.to_dict()}))
    print("wrote " + ", ".join(str(p) for p in paths.values()), file=sys.stderr)
    return EXIT_OK


def cmd_check_hypotheses(args) -> int:
    inst = _load_instance(args.instance)
    policy = _policy(args)
    m = check_hypothesis_M(inst)
    report: dict[str, Any] = {"M": {"holds": m.holds, "margin": m.margin}, "H0": None,
                              "Hpm1": None, "policy": policy.to_dict()}
    if args.g:
        g = _load_field(args.g)
        report["H0"] = check_hypothesis_H0(inst.f, g, inst.b, inst.phi, policy).holds
        report["Hpm1"] = check_hypothesis_Hpm1(inst.f, g, policy=policy).holds
    _emit(report, args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# sweeps


def _sweep_row(job: dict[str, Any]) -> dict[str, Any]:
    """Run one sweep value; never raises."""
    start = time.perf_counter()
    value, family, param = job["value"], job["family"], job["parameter"]
    row: dict[str, Any] = {"value": value, "verdict": "error", "min_gap": None,
                           "residual_sup": None}
    report: dict[str, Any] = {}
    try:
        policy_kw = dict(job["policy"])
        if param == "grid_n":
            policy_kw["grid_n"] = int(value)
        policy = NumericPolicy(**policy_kw)
        if family == "plateau":
            p = float(value) if param == "p" else job["base"].get("p", 4.0)
            report = verify_counterexample_plateau(p, policy)
            row["min_gap"] = report["min_gap"]
            row["residual_sup"] = max(report["residual_sup"])
        elif family == "theta":
            base = dict(job["base"])
            if param != "grid_n":
                base[param] = float(value)
            params = ThetaFamilyParams(p=base.get("p", 4.0), theta1=base.get("theta1", 3.0),
                                       theta2=base.get("theta2", 4.0),
                                       lam=base.get("lambda", float("nan")))
            report = verify_counterexample_theta(params, policy)
            row["min_gap"] = report.get("numerical_min_gap")
            row["residual_sup"] = report.get("residual_sup")
        else:
            spec = json.loads(json.dumps(job["base"]))
            if param == "p":
                spec["p"] = float(value)
            elif param == "b0":
                spec["b"] = {"kind": "const", "value": float(value)}
            inst = ProblemInstance.from_spec(spec)
            g = ScalarField.from_spec(job["g"])
            u, v, verdict = solve_pair(inst, g, policy, job.get("method", "auto"))
            report = verdict.to_dict()
            report["all_pass"] = verdict.wcp_holds
            row["min_gap"] = verdict.min_gap
            row["residual_sup"] = max(u.residual_sup, v.residual_sup)
        row["verdict"] = "pass" if report.get("all_pass") else "fail"
    except (PlapError, ValueError, RuntimeError, ArithmeticError) as exc:
        row["verdict"] = f"error:{type(exc).__name__}"
        report = {"error": type(exc).__name__, "message": str(exc)}
    row["runtime"] = time.perf_counter() - start
    report["sweep"] = {"parameter": param, "value": value}
    _atomic_write(Path(job["out"]) / f"row_{job['index']:03d}.json", _json_text(report))
    return row


def _parse_values(text: str, param: str) -> list[float]:
    items = [t for t in (s.strip() for s in text.split(",")) if t]
    if not items:
        raise UsageError("--values must list at least one value")
    try:
        return [int(t) if param == "grid_n" else float(t) for t in items]
    except ValueError:
        raise UsageError(f"cannot parse --values {text!r}") from None


def cmd_sweep(args) -> int:
    family = "theta" if args.family == "one" else args.family
    if args.parameter not in SWEEP_PARAMETERS[family]:
        raise UsageError(f"parameter {args.parameter!r} is not valid for family {family!r}; "
                         f"choose from {', '.join(SWEEP_PARAMETERS[family])}")
    values = _parse_values(args.values or "", args.parameter)
    out = Path(args.out or "sweep")
    policy = _policy(args)
    base: dict[str, Any] = {}
    g_spec = None
    if family == "instance":
        if not args.instance or not args.g:
            raise UsageError("an instance sweep needs --instance and --g")
        base = _load_instance(args.instance).to_spec()
        g_spec = _load_field(args.g).to_spec()
    else:
        for key, attr in (("p", "p"), ("theta1", "theta1"), ("theta2", "theta2"),
                          ("lambda", "lam")):
            val = getattr(args, attr, None)
            if val is not None:
                base[key] = val
    jobs = [{"index": i, "value": v, "family": family, "parameter": args.parameter,
             "base": base, "g": g_spec, "policy": policy.to_dict(), "out": str(out),
             "method": args.method} for i, v in enumerate(values)]
    workers = args.jobs or os.cpu_count() or 1
    if workers == 1 or len(jobs) == 1:
        rows = [_sweep_row(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            rows = list(pool.map(_sweep_row, jobs))
    lines = ["value,verdict,min_gap,residual_sup,runtime"]
    for r in rows:
        lines.append(",".join([str(r["value"]), r["verdict"],
                               "" if r["min_gap"] is None else repr(float(r["min_gap"])),
                               "" if r["residual_sup"] is None else repr(float(r["residual_sup"])),
                               f"{r['runtime']:.4f}"]))
    _atomic_write(out / "summary.csv", "\n".join(lines) + "\n")
    sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_OK if all(r["verdict"] == "pass" for r in rows) else EXIT_FALSE


# ---------------------------------------------------------------------------
# parser


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--grid-n", type=int, default=None, help="odd number of grid nodes")
    p.add_argument("--tol", type=float, default=None, help="solver tolerance (tol_solve)")
    p.add_argument("--out", default=None, help="output file or directory")


def _theta_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--p", type=float, default=None)
    p.add_argument("--theta1", type=float, default=3.0)
    p.add_argument("--theta2", type=float, default=4.0)
    p.add_argument("--lambda", dest="lam", type=float, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="plap", description="Degenerate p-Laplacian two-point problems "
                     "and comparison-principle checks.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    methods = ("auto", "shooting", "newton")

    p = sub.add_parser("solve", help="solve one instance, write x,u,du,residual CSV")
    p.add_argument("--instance", required=True)
    p.add_argument("--method", choices=methods, default="auto")
    _common(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("compare", help="solve with sources f and g and compare")
    p.add_argument("--instance", required=True)
    p.add_argument("--g", required=True, help="field JSON (or instance JSON) for the source g")
    p.add_argument("--method", choices=methods, default="auto")
    p.add_argument("--csv", default=None, help="also write x,u,du,v,dv,f,g,b")
    _common(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("verify-counterexample", help="end-to-end counterexample checks")
    p.add_argument("example", choices=("theta", "one", "plateau"))
    _theta_flags(p)
    _common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("emit-example", help="write an example instance and exact profiles")
    p.add_argument("example", choices=("theta", "plateau"))
    _theta_flags(p)
    _common(p)
    p.set_defaults(func=cmd_emit_example)

    p = sub.add_parser("check-hypotheses", help="print the hypothesis verdicts as JSON")
    p.add_argument("--instance", required=True)
    p.add_argument("--g", default=None)
    _common(p)
    p.set_defaults(func=cmd_check_hypotheses)

    p = sub.add_parser("sweep", help="run a verification for each parameter value")
    p.add_argument("family", choices=(*SWEEP_PARAMETERS, "one"))
    p.add_argument("--parameter", required=True,
                   choices=sorted({q for v in SWEEP_PARAMETERS.values() for q in v}))
    p.add_argument("--values", required=True, help="comma-separated list")
    p.add_argument("--instance", default=None)
    p.add_argument("--g", default=None)
    p.add_argument("--method", choices=methods, default="auto")
    p.add_argument("--jobs", type=int, default=None, help="worker processes (default: cores)")
    _theta_flags(p)
    _common(p)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"plap: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (PlapError, ValueError, RuntimeError, ArithmeticError) as exc:
        print(f"plap: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
