"""Command-line entry point: ``gueflow <subcommand> [options]``.

Every subcommand validates its arguments before computing anything.  Exit
codes are 0 on success, 1 on a computation failure and 2 on a validation
failure.  JSON output is deterministic: keys are sorted and every float is
printed with 17 significant digits.  CSV tables carry a leading
``# schema=<table>/<version>`` comment line followed by a fixed header.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, is_dataclass

import numpy as np

from . import hamiltonian as ham
from .flows import IntegratorConfig, StepFailure, flow_reduced, flow_u1, flow_u2, reach
from .oracle import N_MAX, RefinementError, WeightParams, oracle_report
from .predictor import predict_logderivs, predict_logE
from .seeds import SEED_WINDOW, WindowError, seed_general, seed_u1zero
from .selftest import perturbed_h1, run_selftest, summary

CSV_VERSION = 1
EXIT_OK, EXIT_COMPUTE, EXIT_VALIDATION = 0, 1, 2


class ValidationError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    params: dict = field(default_factory=dict)
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    fmt: str = "json"
    out: str | None = None
    jobs: int = 1


# ---------------------------------------------------------------- formatting


def fmt_float(x: float) -> str:
    return format(float(x) + 0.0, ".17g")  # + 0.0 folds -0 into 0


def to_json(obj) -> str:
    """JSON with sorted keys and floats at 17 significant digits; complex -> {re, im}."""
    if is_dataclass(obj):
        obj = asdict(obj)
    if isinstance(obj, dict):
        items = (f"{json.dumps(str(k))}: {to_json(v)}" for k, v in sorted(obj.items(), key=lambda kv: str(kv[0])))
        return "{" + ", ".join(items) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(to_json(v) for v in obj) + "]"
    if isinstance(obj, (bool, np.bool_)) or obj is None:
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return to_json({"re": obj.real, "im": obj.imag})
    if isinstance(obj, (float, np.floating)):
        return fmt_float(obj) if math.isfinite(obj) else "null"
    return json.dumps(str(obj))


def _csv_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return fmt_float(v)
    return str(v)


def to_csv(table: str, header: list[str], rows: list[dict]) -> str:
    buf = io.StringIO()
    buf.write(f"# schema={table}/{CSV_VERSION}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_csv_cell(r.get(h)) for h in header])
    return buf.getvalue()


def emit(text: str, out: str | None) -> None:
    """Write ``text`` to ``out`` atomically (temp file + rename), or to stdout."""
    if not text.endswith("\n"):
        text += "\n"
    if out is None:
        sys.stdout.write(text)
        return
    d = os.path.dirname(os.path.abspath(out))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".gueflow-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, out)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _state_dict(s: ham.CanonicalState) -> dict:
    rp, rq = ham.constraint_residual(s)
    return {
        "u1": s.u1, "u2": s.u2, "P1": s.P1, "Q1": s.Q1, "P2": s.P2, "Q2": s.Q2,
        "H1": ham.eval_H1(s), "H2": ham.eval_H2(s),
        "abs_res_P2": abs(rp), "abs_res_Q2": abs(rq),
    }


_STATE_HEADER = [
    "u1", "u2", "re_P1", "im_P1", "re_Q1", "im_Q1", "re_P2", "im_P2", "re_Q2", "im_Q2",
    "re_H1", "im_H1", "re_H2", "im_H2", "abs_res_P2", "abs_res_Q2",
]


def _flatten(d: dict) -> dict:
    out = {}
    for k, v in d.items():
        if isinstance(v, complex):
            out[f"re_{k}"], out[f"im_{k}"] = v.real, v.imag
        else:
            out[k] = v
    return out


# ------------------------------------------------------------------ parsing


def _positive(x: str) -> float:
    v = float(x)
    if not (math.isfinite(v) and v > 0):
        raise argparse.ArgumentTypeError(f"must be a positive number, got {x}")
    return v


def _finite(x: str) -> float:
    v = float(x)
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"must be finite, got {x}")
    return v


def _n_list(x: str) -> list[int]:
    try:
        ns = [int(v) for v in x.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of integers, got {x!r}")
    if not ns or any(n < 1 for n in ns):
        raise argparse.ArgumentTypeError("every N must be >= 1")
    return ns


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--rel-tol", type=_positive, default=1e-10, help="integrator relative tolerance (default 1e-10)")
    common.add_argument("--abs-tol", type=_positive, default=1e-12, help="integrator absolute tolerance (default 1e-12)")
    common.add_argument("--method", choices=["RK45", "DOP853"], default="RK45", help="embedded RK pair (default RK45)")
    common.add_argument("--format", choices=["json", "csv"], default="json", help="output format (default json)")
    common.add_argument("--out", default=None, help="output path (default stdout); written atomically")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for N sweeps (default 1)")

    ap = argparse.ArgumentParser(prog="gueflow", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("seed", parents=[common], help="small-u2 seed (u1 = 0 series, or general series if --ut1 != 0)")
    p.add_argument("--u2", type=_positive, required=True)
    p.add_argument("--ut1", type=_finite, default=0.0, help="u1/sqrt(u2) (default 0)")
    p.add_argument("--window", type=_positive, default=SEED_WINDOW, help=f"series window in u2 (default {SEED_WINDOW})")

    p = sub.add_parser("seed-general", parents=[common], help="general small-u2 series at fixed ut1 (experimental)")
    p.add_argument("--u2", type=_positive, required=True)
    p.add_argument("--ut1", type=_finite, required=True)
    p.add_argument("--window", type=_positive, default=SEED_WINDOW)
    p.add_argument("--reading", choices=["flow", "literal"], default="flow", help="reading of phi_1 and varphi (default flow)")

    p = sub.add_parser("reach", parents=[common], help="canonical state at (u1, u2)")
    p.add_argument("--u1", type=_finite, default=0.0)
    p.add_argument("--u2", type=_positive, required=True)

    p = sub.add_parser("flow", parents=[common], help="trajectory from reach(u1, u2) along one time")
    p.add_argument("--u1", type=_finite, default=0.0)
    p.add_argument("--u2", type=_positive, required=True)
    p.add_argument("--along", choices=["u1", "u2", "reduced"], default="u2")
    p.add_argument("--to", type=_finite, required=True, help="target value of the flowed time")
    p.add_argument("--max-samples", type=int, default=1024)

    p = sub.add_parser("predict", parents=[common], help="large-N predictions of log E_N and its derivatives")
    p.add_argument("--N", type=_n_list, required=True, help="comma-separated list")
    p.add_argument("--z", type=_positive, required=True)
    p.add_argument("--t", type=_finite, default=0.0)
    p.add_argument("--jmax-t", type=int, choices=[1, 2], default=2)
    p.add_argument("--closed-form", choices=["derived", "published"], default="derived",
                   help="third-derivative closed form used in the t-series (default derived)")

    p = sub.add_parser("oracle", parents=[common], help="exact finite-N log E_N and log-derivatives")
    p.add_argument("--N", type=_n_list, required=True)
    p.add_argument("--z", type=float, required=True)
    p.add_argument("--t", type=_finite, default=0.0)
    p.add_argument("--refinement", type=int, default=0)

    p = sub.add_parser("compare", parents=[common], help="oracle vs predicted log-derivatives at fixed (u1, u2)")
    p.add_argument("--N", type=_n_list, default=[4, 9, 16, 25])
    p.add_argument("--u1", type=_finite, default=0.4)
    p.add_argument("--u2", type=_positive, default=0.5)

    p = sub.add_parser("selftest", parents=[common], help="run the invariant checks")
    p.add_argument("--perturb-h1", type=float, default=0.0, help=argparse.SUPPRESS)
    return ap


def make_config(ns: argparse.Namespace) -> RunConfig:
    """Validate the parsed arguments; raise ValidationError before any computation."""
    if ns.jobs < 1:
        raise ValidationError("--jobs must be >= 1")
    extra = {}
    if getattr(ns, "max_samples", None) is not None:
        if ns.max_samples < 2:
            raise ValidationError("--max-samples must be >= 2")
        extra["max_samples"] = ns.max_samples
    try:
        icfg = IntegratorConfig(rel_tol=ns.rel_tol, abs_tol=ns.abs_tol, method=ns.method, **extra)
    except ValueError as e:
        raise ValidationError(str(e))
    skip = {"command", "rel_tol", "abs_tol", "method", "format", "out", "jobs", "max_samples"}
    params = {k: v for k, v in vars(ns).items() if k not in skip}
    cmd = ns.command
    if cmd in ("seed", "seed-general"):
        if ns.u2 > ns.window:
            raise ValidationError(f"u2={ns.u2} lies outside the series window (0, {ns.window}]")
        if abs(ns.ut1) > 3:
            raise ValidationError("|ut1| must be <= 3")
    if cmd in ("predict", "oracle", "compare") and max(ns.N) > N_MAX and cmd != "predict":
        raise ValidationError(f"N <= {N_MAX} required for the oracle")
    if cmd == "oracle":
        if ns.z < 0 or not math.isfinite(ns.z):
            raise ValidationError("--z must be >= 0")
        if ns.z == 0 and ns.t != 0:
            raise ValidationError("t != 0 needs z > 0")
        if ns.refinement < 0:
            raise ValidationError("--refinement must be >= 0")
    if cmd == "flow":
        if ns.along in ("u2", "reduced") and not ns.to > 0:
            raise ValidationError("u2 target must be positive")
        if ns.along == "reduced" and ns.u1 != 0:
            raise ValidationError("the reduced flow lives at u1 = 0")
    if cmd == "selftest" and not math.isfinite(ns.perturb_h1):
        raise ValidationError("--perturb-h1 must be finite")
    return RunConfig(cmd, params, icfg, ns.format, ns.out, ns.jobs)


# ------------------------------------------------------------- subcommands


def _pool_map(fn, items: list, jobs: int) -> list:
    """Apply ``fn`` to each item, in a process pool when jobs > 1; results keep input order."""
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=min(jobs, len(items))) as ex:
        return list(ex.map(fn, items))


def cmd_seed(rc: RunConfig) -> tuple[str, int]:
    p = rc.params
    if rc.command == "seed" and p["ut1"] == 0:
        sd = seed_u1zero(p["u2"], p["window"])
    else:
        sd = seed_general(p["ut1"], p["u2"], p["window"], reading=p.get("reading", "flow"))
    rec = _state_dict(sd.state)
    rec.update({"ut1": p["ut1"], "experimental": sd.experimental})
    rec.update({f"order_{k}": v for k, v in sd.orders.items()})
    if rc.fmt == "csv":
        header = ["ut1"] + _STATE_HEADER + ["order_P1", "order_Q1", "order_P2", "order_Q2", "experimental"]
        return to_csv("seed", header, [_flatten(rec)]), EXIT_OK
    return to_json(rec), EXIT_OK


def cmd_reach(rc: RunConfig) -> tuple[str, int]:
    st = reach(rc.params["u1"], rc.params["u2"], rc.integrator)
    rec = _state_dict(st)
    if rc.fmt == "csv":
        return to_csv("state", _STATE_HEADER, [_flatten(rec)]), EXIT_OK
    return to_json(rec), EXIT_OK


def cmd_flow(rc: RunConfig) -> tuple[str, int]:
    p, cfg = rc.params, rc.integrator
    start = reach(p["u1"], p["u2"], cfg)
    if p["along"] == "u1":
        tr = flow_u1(start, p["to"], cfg)
    elif p["along"] == "u2":
        tr = flow_u2(start, p["to"], cfg)
    else:
        tr = flow_reduced(ham.reduce(start), p["to"], cfg)
    if rc.fmt == "csv":
        buf = io.StringIO()
        buf.write(f"# schema=trajectory-{tr.kind}/{CSV_VERSION}\n")
        tr.write_csv(buf)
        return buf.getvalue(), EXIT_OK
    term = tr.terminal
    rec = {
        "kind": tr.kind, "fixed": tr.fixed, "nsteps": tr.nsteps, "nfev": tr.nfev,
        "substituted": tr.substituted, "samples": len(tr.param),
        "terminal": _state_dict(term) if tr.kind != "reduced" else
        {"u2": term.u2, "P": term.P, "Q": term.Q, "H0": ham.eval_H0(term)},
    }
    return to_json(rec), EXIT_OK


def _predict_one(args) -> dict:
    N, z, t, jmax_t, closed_form, cfg = args
    try:
        return asdict(predict_logE(N, z, t, jmax_t=jmax_t, cfg=cfg, closed_form=closed_form))
    except (StepFailure, ArithmeticError, ValueError) as e:
        return {"N": N, "z": z, "t": t, "error": str(e)}


def cmd_predict(rc: RunConfig) -> tuple[str, int]:
    p = rc.params
    items = [(N, p["z"], p["t"], p["jmax_t"], p["closed_form"], rc.integrator) for N in p["N"]]
    rows = _pool_map(_predict_one, items, rc.jobs)
    code = EXIT_COMPUTE if any("error" in r for r in rows) else EXIT_OK
    if rc.fmt == "csv":
        for r in rows:
            for power, c in r.pop("t_series_terms", []):
                r[f"t_coeff_{power}"] = c
        header = ["N", "z", "t", "u1", "u2", "log_prefactor", "integral_H0", "t_coeff_2", "t_coeff_4",
                  "log_E_pred", "dlogE_dt_pred", "dlogE_dz_pred", "imag_residual", "error"]
        return to_csv("predict", header, rows), code
    return to_json({"rows": rows}), code


def _oracle_one(args) -> dict:
    N, z, t, refinement = args
    try:
        return asdict(oracle_report(WeightParams(z, t, N), refinement))
    except (RefinementError, ArithmeticError, ValueError) as e:
        return {"N": N, "z": z, "t": t, "error": str(e)}


def cmd_oracle(rc: RunConfig) -> tuple[str, int]:
    p = rc.params
    rows = _pool_map(_oracle_one, [(N, p["z"], p["t"], p["refinement"]) for N in p["N"]], rc.jobs)
    code = EXIT_COMPUTE if any("error" in r for r in rows) else EXIT_OK
    if rc.fmt == "csv":
        header = ["N", "z", "t", "log_E", "dlogE_dt", "dlogE_dz", "node_count", "refinement_level", "est_error", "error"]
        return to_csv("oracle", header, rows), code
    return to_json({"rows": rows}), code


def _compare_one(args) -> dict:
    N, u1, u2, cfg = args
    z, t = math.sqrt(u2 / N), u1 / math.sqrt(N)
    row = {"N": N, "z": z, "t": t, "u1": u1, "u2": u2}
    try:
        rep = oracle_report(WeightParams(z, t, N))
        pdt, pdz = predict_logderivs(N, z, t, cfg)
    except (StepFailure, RefinementError, ArithmeticError, ValueError) as e:
        row["error"] = str(e)
        return row
    row.update({
        "oracle_dt": rep.dlogE_dt, "oracle_dz": rep.dlogE_dz, "pred_dt": pdt, "pred_dz": pdz,
        "res_dt": abs(rep.dlogE_dt - pdt), "res_dz": abs(rep.dlogE_dz - pdz),
    })
    return row


def compare_rows(Ns: list[int], u1: float, u2: float, cfg: IntegratorConfig, jobs: int = 1) -> list[dict]:
    rows = _pool_map(_compare_one, [(N, u1, u2, cfg) for N in Ns], jobs)
    prev = None
    for r in rows:
        for ch in ("dt", "dz"):
            key = f"res_{ch}"
            ok = prev is not None and key in prev and key in r and prev[key] > 0
            r[f"ratio_{ch}"] = r[key] / prev[key] if ok else None
        prev = r
    return rows


def cmd_compare(rc: RunConfig) -> tuple[str, int]:
    p = rc.params
    rows = compare_rows(p["N"], p["u1"], p["u2"], rc.integrator, rc.jobs)
    code = EXIT_COMPUTE if any("error" in r for r in rows) else EXIT_OK
    if rc.fmt == "csv":
        header = ["N", "z", "t", "u1", "u2", "oracle_dt", "pred_dt", "res_dt", "ratio_dt",
                  "oracle_dz", "pred_dz", "res_dz", "ratio_dz", "error"]
        return to_csv("compare", header, rows), code
    return to_json({"rows": rows}), code


def cmd_selftest(rc: RunConfig) -> tuple[str, int]:
    eps = rc.params["perturb_h1"]
    kw = {"h1": perturbed_h1(eps)} if eps else {}
    results = run_selftest(**kw)
    for r in results:
        print(r.line(), file=sys.stderr)
    rep = summary(results)
    code = EXIT_OK if rep["passed"] else EXIT_COMPUTE
    if rc.fmt == "csv":
        return to_csv("selftest", ["name", "value", "tolerance", "passed"], rep["checks"]), code
    return to_json(rep), code


COMMANDS = {
    "seed": cmd_seed,
    "seed-general": cmd_seed,
    "reach": cmd_reach,
    "flow": cmd_flow,
    "predict": cmd_predict,
    "oracle": cmd_oracle,
    "compare": cmd_compare,
    "selftest": cmd_selftest,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        rc = make_config(ns)
    except ValidationError as e:
        print(f"gueflow: validation error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        text, code = COMMANDS[rc.command](rc)
    except (WindowError, ham.DomainError) as e:
        print(f"gueflow: validation error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except (StepFailure, RefinementError, ham.ConstraintError, ArithmeticError) as e:
        print(f"gueflow: computation failed: {e}", file=sys.stderr)
        return EXIT_COMPUTE
    emit(text, rc.out)
    return code


if __name__ == "__main__":
    sys.exit(main())
