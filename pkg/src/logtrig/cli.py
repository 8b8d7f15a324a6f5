"""Command-line front end.

    logtrig verify-identities [--families sin,tan,...] [--n-max N] [--theta T]
    logtrig converge --target ID [--n-list 100,1000,...]
    logtrig oracle --target ID [--theta T] [--abs-tol TOL]
    logtrig report-all

Every subcommand accepts --precision-bits (default 128) and
--format {table,json,csv} (default table).  Exit codes: 0 ok,
1 tolerance exceeded, 2 usage error, 3 internal numeric error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .errors import InvalidParameterError, InvalidPrecisionError, LogTrigError, NearSingularProductError
from .identities import MIN_N, Family, IdentityCase, check_identity
from .numerics import DEFAULT_PRECISION, ExtReal, check_precision
from .oracle import oracle_check
from .riemann import (
    PRODUCT_TARGETS,
    TargetId,
    converge,
    default_n_list,
    get_target,
    residual_law_tolerance,
)

EXIT_OK = 0
EXIT_TOLERANCE = 1
EXIT_USAGE = 2
EXIT_NUMERIC = 3

STATUS_OK = "ok"
STATUS_TOLERANCE = "tolerance-exceeded"
STATUS_ERROR = "error"

DEFAULT_N_MAX = 1000
DEFAULT_ABS_TOL = "1e-10"
DEFAULT_IDENTITY_THETA = "0.3"
DEFAULT_ORACLE_THETA = "1.0"
EXTRAPOLATION_TOL = 1e-9
CROSS_METHOD_TOL = 1e-8


class UsageError(Exception):
    pass


@dataclass
class ReportEnvelope:
    command: str
    parameters: dict
    results: list = field(default_factory=list)
    status: str = STATUS_OK
    timing_ms: float = 0.0

    def finalize(self, started: float) -> ReportEnvelope:
        if self.status != STATUS_ERROR and not all(row.get("ok", True) for row in self.results):
            self.status = STATUS_TOLERANCE
        self.timing_ms = round((time.perf_counter() - started) * 1000.0, 3)
        return self

    @property
    def exit_code(self) -> int:
        return {STATUS_OK: EXIT_OK, STATUS_TOLERANCE: EXIT_TOLERANCE}.get(self.status, EXIT_NUMERIC)

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "parameters": dict(self.parameters),
            "results": [dict(r) for r in self.results],
            "status": self.status,
            "timing_ms": self.timing_ms,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> ReportEnvelope:
        d = json.loads(text)
        return cls(d["command"], d["parameters"], d["results"], d["status"], d["timing_ms"])


def _num(x: ExtReal, p: int) -> str:
    return x.round_to(p).to_decimal()


# -- commands ---------------------------------------------------------------


def parse_families(text: str | None) -> list[Family]:
    if text is None or text.strip() in ("", "all"):
        return list(Family)
    try:
        wanted = {Family.parse(name.strip()) for name in text.split(",") if name.strip()}
    except InvalidParameterError as exc:
        raise UsageError(str(exc)) from None
    return [fam for fam in Family if fam in wanted]


def parse_n_list(text: str) -> list[int]:
    try:
        values = [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise UsageError(f"--n-list must be comma-separated integers, got {text!r}") from None
    if not values:
        raise UsageError("--n-list is empty")
    return values


def identity_rows(families: Sequence[Family], n_max: int, p: int, theta: ExtReal) -> list[dict]:
    rows = []
    for fam in families:
        for N in range(MIN_N[fam], n_max + 1):
            row = {"section": "identity", "family": fam.value, "n": N}
            case = IdentityCase(fam, N, theta if fam is Family.SHIFTED_SIN_PRODUCT else None)
            row["theta"] = _num(theta, p) if case.theta is not None else ""
            try:
                res = check_identity(case, p)
            except NearSingularProductError as exc:
                row.update(note=f"near-singular factor n={exc.n}", ok=False)
                rows.append(row)
                continue
            row.update(
                value=_num(res.computed_product, p),
                closed_form=_num(res.closed_form, p),
                residual=_num(res.relative_residual, p),
                threshold=_num(res.tolerance, p),
                ok=res.ok,
            )
            rows.append(row)
    return rows


def convergence_rows(tid: TargetId, n_list: Sequence[int], p: int) -> tuple[list[dict], ExtReal]:
    target = get_target(tid, p)
    report = converge(target, n_list, p)
    rows = []
    for rec in report.records:
        gap = abs(rec.residual_gap)
        tol = residual_law_tolerance(rec.n_param, p)
        rows.append(
            {
                "section": "converge",
                "target": tid.value,
                "n": rec.n_param,
                "value": _num(rec.sum_value, p),
                "closed_form": _num(target.closed_form, p),
                "observed_error": _num(rec.observed_error, p),
                "predicted_residual": _num(rec.predicted_residual, p),
                "residual": _num(gap, p),
                "threshold": _num(tol, p),
                "ok": gap < tol,
            }
        )
    rows.append(
        {
            "section": "converge",
            "target": tid.value,
            "n": "extrapolated",
            "value": _num(report.extrapolated_limit, p),
            "closed_form": _num(target.closed_form, p),
            "residual": _num(report.extrapolation_error, p),
            "threshold": repr(EXTRAPOLATION_TOL),
            "ok": report.extrapolation_error < EXTRAPOLATION_TOL,
        }
    )
    return rows, report.extrapolated_limit


def oracle_row(tid: TargetId, theta: ExtReal | None, abs_tol: ExtReal, p: int) -> tuple[dict, ExtReal]:
    target = get_target(tid, p, theta)
    result, deviation = oracle_check(target, abs_tol, p)
    bound = abs_tol * 10
    row = {
        "section": "oracle",
        "target": tid.value,
        "theta": _num(theta, p) if theta is not None else "",
        "value": _num(result.value, p),
        "error_estimate": _num(result.error_estimate, p),
        "closed_form": _num(target.closed_form, p),
        "residual": _num(deviation, p),
        "threshold": _num(bound, p),
        "node_count": result.node_count,
        "level": result.level,
        "ok": deviation < bound,
    }
    return row, result.value


def _theta(text: str | None, p: int) -> ExtReal | None:
    if text is None:
        return None
    try:
        float(text)
    except ValueError:
        raise UsageError(f"--theta must be a real number, got {text!r}") from None
    return ExtReal(text, p)


def _abs_tol(text: str, p: int) -> ExtReal:
    try:
        value = ExtReal(text, p)
        float(text)
    except ValueError:
        raise UsageError(f"--abs-tol must be a real number, got {text!r}") from None
    if not value > 0:
        raise UsageError("--abs-tol must be positive")
    return value


def cmd_verify_identities(
    families: str | None = None,
    n_max: int = DEFAULT_N_MAX,
    precision_bits: int = DEFAULT_PRECISION,
    theta: str | None = None,
) -> ReportEnvelope:
    started = time.perf_counter()
    if n_max < 2:
        raise UsageError(f"--n-max must be >= 2, got {n_max}")
    fams = parse_families(families)
    theta_x = _theta(theta if theta is not None else DEFAULT_IDENTITY_THETA, precision_bits)
    env = ReportEnvelope(
        "verify-identities",
        {
            "families": ",".join(f.value for f in fams),
            "n_max": str(n_max),
            "theta": _num(theta_x, precision_bits),
            "precision_bits": str(precision_bits),
        },
    )
    env.results = identity_rows(fams, n_max, precision_bits, theta_x)
    return env.finalize(started)


def cmd_converge(
    target: str, n_list: str | None = None, precision_bits: int = DEFAULT_PRECISION
) -> ReportEnvelope:
    started = time.perf_counter()
    try:
        tid = TargetId.parse(target)
    except InvalidParameterError as exc:
        raise UsageError(str(exc)) from None
    if tid is TargetId.LOG_ABS_SIN_SHIFTED:
        raise UsageError("log-abs-sin-shifted has no product-based sum; use the oracle subcommand")
    ns = parse_n_list(n_list) if n_list else list(default_n_list(tid))
    env = ReportEnvelope(
        "converge",
        {"target": tid.value, "n_list": ",".join(map(str, ns)), "precision_bits": str(precision_bits)},
    )
    try:
        env.results, _ = convergence_rows(tid, ns, precision_bits)
    except InvalidParameterError as exc:
        raise UsageError(str(exc)) from None
    return env.finalize(started)


def cmd_oracle(
    target: str,
    theta: str | None = None,
    abs_tol: str = DEFAULT_ABS_TOL,
    precision_bits: int = DEFAULT_PRECISION,
) -> ReportEnvelope:
    started = time.perf_counter()
    try:
        tid = TargetId.parse(target)
    except InvalidParameterError as exc:
        raise UsageError(str(exc)) from None
    if tid is TargetId.LOG_ABS_SIN_SHIFTED and theta is None:
        raise UsageError("--theta is required for log-abs-sin-shifted")
    if tid is not TargetId.LOG_ABS_SIN_SHIFTED and theta is not None:
        raise UsageError(f"--theta only applies to log-abs-sin-shifted, not {tid.value}")
    theta_x = _theta(theta, precision_bits)
    tol = _abs_tol(abs_tol, precision_bits)
    env = ReportEnvelope(
        "oracle",
        {
            "target": tid.value,
            "theta": _num(theta_x, precision_bits) if theta_x is not None else "",
            "abs_tol": _num(tol, precision_bits),
            "precision_bits": str(precision_bits),
        },
    )
    try:
        row, _ = oracle_row(tid, theta_x, tol, precision_bits)
    except InvalidParameterError as exc:
        raise UsageError(str(exc)) from None
    env.results = [row]
    return env.finalize(started)


def cmd_report_all(
    precision_bits: int = DEFAULT_PRECISION,
    n_max: int = DEFAULT_N_MAX,
    abs_tol: str = DEFAULT_ABS_TOL,
    theta: str | None = None,
) -> ReportEnvelope:
    started = time.perf_counter()
    if n_max < 2:
        raise UsageError(f"--n-max must be >= 2, got {n_max}")
    p = precision_bits
    tol = _abs_tol(abs_tol, p)
    id_theta = _theta(theta if theta is not None else DEFAULT_IDENTITY_THETA, p)
    or_theta = _theta(theta if theta is not None else DEFAULT_ORACLE_THETA, p)
    env = ReportEnvelope(
        "report-all",
        {
            "n_max": str(n_max),
            "abs_tol": _num(tol, p),
            "identity_theta": _num(id_theta, p),
            "oracle_theta": _num(or_theta, p),
            "precision_bits": str(p),
        },
    )
    rows = identity_rows(list(Family), n_max, p, id_theta)
    limits = {}
    for tid in PRODUCT_TARGETS:
        conv, limits[tid] = convergence_rows(tid, default_n_list(tid), p)
        rows.extend(conv)
    oracle_values = {}
    for tid in TargetId:
        th = or_theta if tid is TargetId.LOG_ABS_SIN_SHIFTED else None
        row, oracle_values[tid] = oracle_row(tid, th, tol, p)
        rows.append(row)
    for tid in PRODUCT_TARGETS:
        dev = abs(oracle_values[tid] - limits[tid])
        rows.append(
            {
                "section": "cross",
                "target": tid.value,
                "value": _num(limits[tid], p),
                "oracle_value": _num(oracle_values[tid], p),
                "residual": _num(dev, p),
                "threshold": repr(CROSS_METHOD_TOL),
                "ok": dev < CROSS_METHOD_TOL,
            }
        )
    env.results = rows
    return env.finalize(started)


# -- rendering --------------------------------------------------------------


def _columns(rows: Sequence[dict]) -> list[str]:
    cols: list[str] = []
    for row in rows:
        for key in row:
            if key not in cols:
                cols.append(key)
    return cols


def _cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def render_csv(env: ReportEnvelope) -> str:
    buf = io.StringIO()
    cols = _columns(env.results)
    writer = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n", restval="")
    writer.writeheader()
    for row in env.results:
        writer.writerow({k: _cell(v) for k, v in row.items()})
    return buf.getvalue()


def _short(text: str) -> str:
    if len(text) > 20 and "e" in text:
        try:
            return f"{float(text):.12e}"
        except ValueError:
            pass
    return text


def render_table(env: ReportEnvelope) -> str:
    cols = [c for c in _columns(env.results) if c != "section"]
    cells = [[_short(_cell(row.get(c, ""))) for c in cols] for row in env.results]
    widths = [max([len(c)] + [len(r[i]) for r in cells]) for i, c in enumerate(cols)]
    lines = [f"# {env.command}  " + "  ".join(f"{k}={v}" for k, v in env.parameters.items())]
    lines.append("  ".join(c.ljust(w) for c, w in zip(cols, widths)))
    lines.append("  ".join("-" * w for w in widths))
    lines.extend("  ".join(v.ljust(w) for v, w in zip(r, widths)).rstrip() for r in cells)
    lines.append(f"status: {env.status}  ({env.timing_ms:.1f} ms)")
    return "\n".join(lines) + "\n"


RENDERERS: dict[str, Callable[[ReportEnvelope], str]] = {
    "table": render_table,
    "json": lambda env: env.to_json() + "\n",
    "csv": render_csv,
}


# -- entry point --------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--precision-bits", type=int, default=DEFAULT_PRECISION)
    common.add_argument("--format", choices=sorted(RENDERERS), default="table")

    parser = argparse.ArgumentParser(
        prog="logtrig",
        description="Log-trigonometric integrals from product identities, with a quadrature cross-check.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify-identities", parents=[common], help="check the product identities")
    p.add_argument("--families", default="all", help="comma-separated: " + ",".join(f.value for f in Family))
    p.add_argument("--n-max", type=int, default=DEFAULT_N_MAX)
    p.add_argument("--theta", default=None, help="shift for the shifted-sin family (default 0.3)")

    p = sub.add_parser("converge", parents=[common], help="Riemann sums, residual law and extrapolation")
    p.add_argument("--target", required=True, choices=[t.value for t in TargetId])
    p.add_argument("--n-list", default=None, help="comma-separated grid sizes (odd M for the tangent target)")

    p = sub.add_parser("oracle", parents=[common], help="tanh-sinh quadrature of one target")
    p.add_argument("--target", required=True, choices=[t.value for t in TargetId])
    p.add_argument("--theta", default=None)
    p.add_argument("--abs-tol", default=DEFAULT_ABS_TOL)

    p = sub.add_parser("report-all", parents=[common], help="identities, convergence, oracle and cross-checks")
    p.add_argument("--n-max", type=int, default=DEFAULT_N_MAX)
    p.add_argument("--abs-tol", default=DEFAULT_ABS_TOL)
    p.add_argument("--theta", default=None)
    return parser


def run(args: argparse.Namespace) -> ReportEnvelope:
    check_precision(args.precision_bits)
    if args.command == "verify-identities":
        return cmd_verify_identities(args.families, args.n_max, args.precision_bits, args.theta)
    if args.command == "converge":
        return cmd_converge(args.target, args.n_list, args.precision_bits)
    if args.command == "oracle":
        return cmd_oracle(args.target, args.theta, args.abs_tol, args.precision_bits)
    return cmd_report_all(args.precision_bits, args.n_max, args.abs_tol, args.theta)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        env = run(args)
    except (UsageError, InvalidPrecisionError) as exc:
        print(f"logtrig: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except LogTrigError as exc:
        env = ReportEnvelope(args.command, {"precision_bits": str(args.precision_bits)}, status=STATUS_ERROR)
        env.results = [{"error": type(exc).__name__, "message": str(exc), "ok": False}]
        sys.stdout.write(RENDERERS[args.format](env))
        return EXIT_NUMERIC
    sys.stdout.write(RENDERERS[args.format](env))
    return env.exit_code


if __name__ == "__main__":
    raise SystemExit(main())
