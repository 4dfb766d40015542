"""Command-line entry point: kernel evaluation, verification suites and tables.

Exit codes: 0 when every check passes, 1 when a check fails, 2 on usage
errors (bad flags or values outside a precondition).
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from . import verify
from .jacobi import JacobiParams
from .kernel import T_MIN, KernelQuery, envelope_z, heat_kernel_reduced, heat_kernel_series
from .measures import ToleranceNotMet
from .product import dk_lhs, dk_rhs, int1_rhs

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
PRODUCT_ANGLES = (0.0, 0.7, 1.3, 2.2, math.pi)
INT1_MAX_DEGREE = 5
REFINE_TOL = 0.05


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    """Parsed and validated command line."""

    command: str
    params: tuple[JacobiParams, ...]
    theta: float | None
    phi: float | None
    t: float | None
    tol: float | None
    nodes: int | None
    n_max: int
    grid: verify.SweepGrid
    fmt: str
    out: Path | None
    baseline: Path | None


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _t_list(text: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(v) for v in text.replace(",", " ").split())
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a list of numbers: {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--alpha", type=float)
    common.add_argument("--beta", type=float)
    common.add_argument("--theta", type=float)
    common.add_argument("--phi", type=float)
    common.add_argument("--t", type=float)
    common.add_argument("--tol", type=float)
    common.add_argument("--nodes", type=int)
    common.add_argument("--grid-theta", type=int, default=25, metavar="N")
    common.add_argument("--grid-t", type=_t_list, default=verify.DEFAULT_T, metavar="LIST")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", type=Path)
    common.add_argument("--baseline", type=Path)

    parser = argparse.ArgumentParser(prog="jacobi-heat", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("eval", parents=[common], help="one kernel value by both routes")
    pp = sub.add_parser("check-product", parents=[common], help="product formula against P_n P_n")
    pp.add_argument("--n-max", type=int, default=20)
    sub.add_parser("check-reduction", parents=[common], help="series against reduction route")
    sub.add_parser("check-bounds", parents=[common], help="G/Z bands and long-time bands")
    sub.add_parser("check-lemmas", parents=[common], help="identities and envelope-lemma bands")
    sub.add_parser("check-proof-terms", parents=[common], help="bands of the individual reduction integrals")
    sub.add_parser("sweep", parents=[common], help="table of G, Z and G/Z over a grid")
    sub.add_parser("baseline", parents=[common], help="record every regression band on the grid to --out")
    return parser


def _config(ns: argparse.Namespace) -> RunConfig:
    for flag in ("t", "tol"):
        v = getattr(ns, flag)
        if v is not None and not v > 0:
            raise UsageError(f"argument --{flag}: requires {flag} > 0 (got {v})")
    for flag in ("theta", "phi"):
        v = getattr(ns, flag)
        if v is not None and not 0 <= v <= math.pi:
            raise UsageError(f"argument --{flag}: requires 0 <= {flag} <= pi (got {v})")
    if ns.nodes is not None and ns.nodes < 1:
        raise UsageError(f"argument --nodes: requires a positive count (got {ns.nodes})")
    if ns.grid_theta < 2:
        raise UsageError(f"argument --grid-theta: requires N >= 2 (got {ns.grid_theta})")
    n_max = getattr(ns, "n_max", 20)
    if n_max < 0:
        raise UsageError(f"argument --n-max: requires n >= 0 (got {n_max})")
    if (ns.alpha is None) != (ns.beta is None):
        raise UsageError("arguments --alpha and --beta must be given together")
    if ns.alpha is not None:
        p = JacobiParams(ns.alpha, ns.beta)
        try:
            p.validate()
        except ValueError as exc:
            raise UsageError(f"argument --alpha/--beta: {exc}")
        params = (p,)
    else:
        params = verify.DEFAULT_PARAMS
    if ns.command == "baseline" and ns.out is None:
        raise UsageError("baseline requires --out")
    if ns.command in ("eval", "sweep", "check-product") and ns.alpha is None:
        raise UsageError(f"{ns.command} requires --alpha and --beta")
    if ns.command == "eval":
        for flag in ("theta", "phi", "t"):
            if getattr(ns, flag) is None:
                raise UsageError(f"eval requires --{flag}")
        if ns.t < T_MIN:
            raise UsageError(f"argument --t: the series route needs t >= t_min = {T_MIN} (got {ns.t})")
    for t in ns.grid_t:
        if not t > 0:
            raise UsageError(f"argument --grid-t: requires every t > 0 (got {t})")
        if t < T_MIN:
            raise UsageError(f"argument --grid-t: requires every t >= t_min = {T_MIN} (got {t})")
    ang = verify._angles(ns.grid_theta)
    grid = verify.SweepGrid(ang, ang, ns.grid_t, params)
    return RunConfig(ns.command, params, ns.theta, ns.phi, ns.t, ns.tol, ns.nodes, n_max, grid,
                     ns.format, ns.out, ns.baseline)


# --------------------------------------------------------------------------
# Output helpers
# --------------------------------------------------------------------------


def _emit(text: str, out: Path | None):
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text, encoding="utf-8")


def _line(ok: bool, name: str, detail: str) -> str:
    return f"{'PASS' if ok else 'FAIL'} {name}: {detail}"


def _report_line(rep: verify.RatioReport) -> str:
    return f"[{_fmt(rep.min_ratio)}, {_fmt(rep.max_ratio)}] spread {_fmt(rep.spread)}"


def _bands_doc(cfg: RunConfig, reports: dict, checks: list) -> str:
    doc = {
        "grid": cfg.grid.describe(),
        "values": [],
        "report": {
            "bands": [reports[k].to_dict() for k in sorted(reports)],
            "checks": [{"name": c.name, "observed": c.observed, "threshold": c.threshold, "passed": c.passed,
                        "detail": c.detail} for c in checks],
        },
    }
    return verify.dumps17(doc) + "\n"


def _against_baseline(cfg: RunConfig, reports: dict) -> list[verify.CheckResult]:
    """Compare with the baseline; a named baseline file that does not exist yet is written."""
    if cfg.baseline is not None and not cfg.baseline.exists():
        verify.write_baseline(cfg.baseline, reports, cfg.grid)
        print(f"baseline written to {cfg.baseline}")
        return []
    base = verify.load_baseline(cfg.baseline)
    return verify.compare_bands(reports, base)


def _finish_checks(cfg: RunConfig, reports: dict, checks: list[verify.CheckResult]) -> int:
    for c in checks:
        print(_line(c.passed, c.name, f"{_fmt(c.observed)} (limit {_fmt(c.threshold)}) {c.detail}".rstrip()))
    if cfg.out is not None:
        _emit(_bands_doc(cfg, reports, checks), cfg.out)
    return EXIT_OK if all(c.passed for c in checks) else EXIT_FAIL


# --------------------------------------------------------------------------
# Subcommands
# --------------------------------------------------------------------------


def cmd_eval(cfg: RunConfig) -> int:
    p = cfg.params[0]
    q = KernelQuery(p, cfg.theta, cfg.phi, cfg.t)
    tol = cfg.tol or 1e-8
    s = heat_kernel_series(q)
    z = envelope_z(q)
    out = {"alpha": p.alpha, "beta": p.beta, "theta": q.theta, "phi": q.phi, "t": q.t,
           "series": s.value, "series_terms": s.n_terms, "series_tail_bound": s.tail_bound,
           "Z": z, "ratio": s.value / z}
    code = EXIT_OK
    if q.t / 4 >= T_MIN:
        r = heat_kernel_reduced(q)
        rel = abs(r.value - s.value) / s.value
        out.update({"reduction": r.value, "reduction_quad_change": r.quad_tol, "relative_difference": rel})
        code = EXIT_OK if rel <= tol else EXIT_FAIL
    else:
        out["reduction"] = None
        out["note"] = f"reduction route needs t >= {4 * T_MIN}"
    if cfg.fmt == "json":
        text = verify.dumps17(out) + "\n"
    else:
        text = "quantity,value\n" + "".join(f"{k},{_fmt(v) if isinstance(v, float) else v}\n" for k, v in out.items())
    _emit(text, cfg.out)
    return code


def cmd_check_product(cfg: RunConfig) -> int:
    p = cfg.params[0]
    exact = p.alpha >= -0.5 and p.beta >= -0.5
    tol = cfg.tol or (1e-10 if exact else 1e-6)
    worst, where = 0.0, None
    for n in range(cfg.n_max + 1):
        nodes = cfg.nodes if cfg.nodes is not None else (n + 2 if exact else None)
        for a in PRODUCT_ANGLES:
            for b in PRODUCT_ANGLES:
                lhs = dk_lhs(n, p, a, b)
                rel = abs(dk_rhs(n, p, a, b, n_nodes=nodes) - lhs) / abs(lhs)
                if rel > worst:
                    worst, where = rel, (n, a, b)
    checks = [verify.CheckResult("product_formula", worst, tol, worst <= tol, f"worst at (n, theta, phi) = {where}")]
    worst, where = 0.0, None
    for n in range(min(cfg.n_max, INT1_MAX_DEGREE) + 1):
        for a in PRODUCT_ANGLES:
            for b in PRODUCT_ANGLES:
                lhs = dk_lhs(n, p, a, b)
                rel = abs(int1_rhs(n, p, a, b) - lhs) / abs(lhs)
                if rel > worst:
                    worst, where = rel, (n, a, b)
    checks.append(verify.CheckResult("regularised_form", worst, 1e-6, worst <= 1e-6,
                                     f"worst at (n, theta, phi) = {where}"))
    return _finish_checks(cfg, {}, checks)


def cmd_check_reduction(cfg: RunConfig) -> int:
    tol = cfg.tol or 1e-6
    grid = cfg.grid.with_t(lambda t: t / 4 >= T_MIN)
    checks = []
    for p in grid.params_list:
        worst = 0.0
        for t in grid.t_points:
            s = verify._kernel_grid(p, grid.theta_points, grid.phi_points, t, "series")
            try:
                r = verify._kernel_grid(p, grid.theta_points, grid.phi_points, t, "reduction")
            except ToleranceNotMet as exc:
                checks.append(verify.CheckResult(f"reduction/{verify._key(p)}", math.inf, tol, False, str(exc)))
                break
            worst = max(worst, float((abs(s - r) / s).max()))
        else:
            checks.append(verify.CheckResult(f"reduction/{verify._key(p)}", worst, tol, worst <= tol))
    return _finish_checks(cfg, {}, checks)


def cmd_check_bounds(cfg: RunConfig) -> int:
    reports = {r.name: r for r in verify.bound_ratio_sweep(cfg.grid, "series")}
    for p in cfg.params:
        r = verify.long_time_sweep(p, cfg.grid.theta_points)
        reports[r.name] = r
    for name in sorted(reports):
        print(f"{name}: {_report_line(reports[name])}")
    return _finish_checks(cfg, reports, _against_baseline(cfg, reports))


def cmd_check_lemmas(cfg: RunConfig) -> int:
    checks = []
    for p in cfg.params:
        for c in verify.identity_suite(p, cfg.grid):
            checks.append(verify.CheckResult(f"identity/{verify._key(p)}/{c.name}", c.observed, c.threshold,
                                             c.passed, c.detail))
    reports = verify.collect_bands(cfg.grid, ("lemmas",))
    for name in sorted(reports):
        print(f"{name}: {_report_line(reports[name])}")
    zero = max(abs(verify.lemma_ssigma_check(g, [0.0]).max_ratio - 0.5) for g in verify.SSIGMA_GAMMAS)
    checks.append(verify.CheckResult("ssigma_at_zero", zero, 1e-12, zero <= 1e-12, "distance of ratio at xi=0 from 1/2"))
    coarse = reports["exp"]
    n = 2 * len(cfg.grid.theta_points) - 1
    fine_ang = verify._angles(n)
    fine = verify.lemma_exp_sweep(fine_ang, fine_ang, verify._angles(21, 1.0), verify._angles(21, 1.0))
    drift = max(abs(fine.min_ratio / coarse.min_ratio - 1), abs(fine.max_ratio / coarse.max_ratio - 1))
    checks.append(verify.CheckResult("exp_refinement", drift, REFINE_TOL, coarse.is_valid() and drift <= REFINE_TOL))
    checks += _against_baseline(cfg, reports)
    return _finish_checks(cfg, reports, checks)


def cmd_check_proof_terms(cfg: RunConfig) -> int:
    reports = {}
    for p in cfg.params:
        if p.case == "i":
            continue
        for r in verify.proof_term_check(p, cfg.grid):
            reports[r.name] = r
    for name in sorted(reports):
        print(f"{name}: {_report_line(reports[name])}")
    return _finish_checks(cfg, reports, _against_baseline(cfg, reports))


def cmd_sweep(cfg: RunConfig) -> int:
    p = cfg.params[0]
    rows = verify.kernel_table(p, cfg.grid)
    if cfg.fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["theta", "phi", "t", "G", "Z", "ratio"])
        for row in rows:
            w.writerow([_fmt(v) for v in row])
        text = buf.getvalue()
    else:
        rep = verify.bound_ratio_sweep(cfg.grid, "series")[0]
        keys = ("theta", "phi", "t", "G", "Z", "ratio")
        doc = {"grid": cfg.grid.describe(), "values": [dict(zip(keys, row)) for row in rows], "report": rep.to_dict()}
        text = verify.dumps17(doc) + "\n"
    _emit(text, cfg.out)
    return EXIT_OK


def cmd_baseline(cfg: RunConfig) -> int:
    verify.write_baseline(cfg.out, verify.collect_bands(cfg.grid), cfg.grid)
    print(f"baseline written to {cfg.out}")
    return EXIT_OK


COMMANDS = {
    "eval": cmd_eval,
    "check-product": cmd_check_product,
    "check-reduction": cmd_check_reduction,
    "check-bounds": cmd_check_bounds,
    "check-lemmas": cmd_check_lemmas,
    "check-proof-terms": cmd_check_proof_terms,
    "sweep": cmd_sweep,
    "baseline": cmd_baseline,
}


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = _config(ns)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"jacobi-heat: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return COMMANDS[cfg.command](cfg)


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
