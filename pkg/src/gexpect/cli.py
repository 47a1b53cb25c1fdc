"""Batch command-line front end.

Runs the scenario catalog with configurable variance bounds and grid
overrides, prints a human-readable summary, and writes a deterministic
CSV (or Markdown) report: one row per quantity, one row per assertion,
in catalog order. Exit status is 0 exactly when every assertion passed.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields, replace

import numpy as np

from .errors import GExpectError
from .gamma import UncertaintyInterval
from .pde import SolverConfig
from .scenarios import (ScenarioOutcome, run_asymmetric_independence,
                        run_diag_not_indep, run_invertible_scan,
                        run_linear_combination, run_linear_image,
                        run_quadratic_form, run_reverse_independence_witness,
                        run_symmetry_identity)

CSV_COLUMNS = ("scenario", "label", "value", "error_estimate", "assertion", "pass", "margin")

SCENARIO_NAMES = (
    "asymmetric-independence",
    "linear-combination",
    "linear-image",
    "symmetry-identity",
    "diag-not-indep",
    "quadratic-form",
    "reverse-independence",
    "invertible-scan",
)


@dataclass(frozen=True)
class RunConfig:
    scenarios: tuple = SCENARIO_NAMES
    sigma_low_sq: float = 1.0
    sigma_high_sq: float = 4.0
    alpha: float = 4.0
    h: float | None = None
    half_width: float | None = None
    dt: float | None = None
    t: float = 1.0
    tol: float = 1e-3
    refine: int = 0
    out: str | None = None
    report: str = "csv"

    def __post_init__(self):
        unknown = [s for s in self.scenarios if s not in SCENARIO_NAMES]
        if unknown:
            raise GExpectError(
                f"unknown scenario(s) {', '.join(unknown)}; valid names: "
                + ", ".join(SCENARIO_NAMES))
        for name in ("alpha", "t", "tol"):
            if getattr(self, name) <= 0:
                raise GExpectError(f"{name} must be positive")
        for name in ("h", "half_width", "dt"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise GExpectError(f"{name} must be positive when given")
        if self.refine < 0:
            raise GExpectError("refine must be >= 0")
        if self.report not in ("csv", "md"):
            raise GExpectError("report must be 'csv' or 'md'")


def _dispatch(name: str, cfg: RunConfig, solver: SolverConfig) -> ScenarioOutcome:
    # a horizon t != 1 is equivalent to scaling every variance interval by t
    iv = UncertaintyInterval(cfg.sigma_low_sq * cfg.t, cfg.sigma_high_sq * cfg.t)
    if name == "asymmetric-independence":
        return run_asymmetric_independence(iv, iv, cfg=solver)
    if name == "linear-combination":
        return run_linear_combination(iv, cfg=solver)
    if name == "linear-image":
        return run_linear_image(iv, np.array([[1.0, 2.0], [0.0, 1.0]]), [3.0, -2.0], cfg=solver)
    if name == "symmetry-identity":
        return run_symmetry_identity(iv, alpha=cfg.alpha, cfg=solver)
    if name == "diag-not-indep":
        return run_diag_not_indep(iv, cfg=solver)
    if name == "quadratic-form":
        return run_quadratic_form((iv, iv), np.array([[1.0, 0.5], [0.5, -1.0]]), cfg=solver)
    if name == "reverse-independence":
        return run_reverse_independence_witness((iv, iv), 0, 1, cfg=solver)
    if name == "invertible-scan":
        return run_invertible_scan(iv, cfg=solver)
    raise GExpectError(f"unknown scenario {name}")


def _worker_count(n_jobs: int) -> int:
    raw = os.environ.get("GEXPECT_THREADS", "0")
    try:
        cap = int(raw)
    except ValueError:
        raise GExpectError(f"GEXPECT_THREADS must be an integer, got {raw!r}")
    if cap < 0:
        raise GExpectError("GEXPECT_THREADS must be >= 0")
    if cap == 0:
        cap = os.cpu_count() or 1
    return max(1, min(cap, n_jobs))


def run_scenarios(cfg: RunConfig):
    """Run the selected scenarios; results come back in catalog order."""
    solver = SolverConfig(h=cfg.h, half_width=cfg.half_width, dt=cfg.dt, target_tol=cfg.tol)
    names = [s for s in SCENARIO_NAMES if s in cfg.scenarios]
    workers = _worker_count(len(names))
    if workers == 1:
        outcomes = [_dispatch(n, cfg, solver) for n in names]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_dispatch, n, cfg, solver) for n in names]
            outcomes = [f.result() for f in futures]

    deltas = {}
    if cfg.refine > 0:
        base_h = cfg.h if cfg.h is not None else 0.2
        per_name = {n: [o.quantities] for n, o in zip(names, outcomes)}
        for level in range(1, cfg.refine + 1):
            fine = replace(solver, h=base_h / 2**level, dt=None)
            for n in names:
                per_name[n].append(_dispatch(n, cfg, fine).quantities)
        for n in names:
            levels = per_name[n]
            for i, q in enumerate(levels[0]):
                row = []
                for lv in range(1, len(levels)):
                    prev, cur = levels[lv - 1], levels[lv]
                    row.append(abs(cur[i].value - prev[i].value)
                               if i < len(cur) and cur[i].label == prev[i].label else float("nan"))
                deltas[(n, q.label)] = row
    return outcomes, deltas


def _fmt(x: float) -> str:
    return f"{x:.10g}"


def outcome_rows(outcomes, deltas=None, refine: int = 0):
    """Flatten outcomes into report rows with the fixed column schema."""
    header = list(CSV_COLUMNS) + [f"refinement_delta_{k}" for k in range(1, refine + 1)]
    rows = [header]
    for out in outcomes:
        for q in out.quantities:
            row = [out.name, q.label, _fmt(q.value), _fmt(q.error_estimate), "", "", ""]
            for d in (deltas or {}).get((out.name, q.label), [float("nan")] * refine):
                row.append(_fmt(d))
            rows.append(row)
        for a in out.assertions:
            desc = a.description + (" [classical-zero]" if a.classical_zero else "")
            row = [out.name, "", "", "", desc, str(a.passed).lower(), _fmt(a.margin)]
            row.extend([""] * refine)
            rows.append(row)
    return rows


def render_report(rows, fmt: str) -> str:
    if fmt == "csv":
        buf = io.StringIO()
        csv.writer(buf, lineterminator="\n").writerows(rows)
        return buf.getvalue()
    header, body = rows[0], rows[1:]
    lines = ["| " + " | ".join(header) + " |",
             "| " + " | ".join("---" for _ in header) + " |"]
    lines += ["| " + " | ".join(str(c) for c in row) + " |" for row in body]
    return "\n".join(lines) + "\n"


def _read_config_file(path: str) -> dict:
    """key = value lines; '#' starts a comment; keys match the CLI flags."""
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise GExpectError(f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}")
            key, val = (part.strip() for part in line.split("=", 1))
            values[key.replace("-", "_")] = val
    return values


_NUMERIC_KEYS = {"sigma_low_sq": float, "sigma_high_sq": float, "alpha": float,
                 "h": float, "half_width": float, "dt": float, "t": float,
                 "tol": float, "refine": int}


def parse_args(argv) -> RunConfig:
    parser = argparse.ArgumentParser(
        prog="gexpect",
        description="Numerical comparisons of G-normal and sequentially independent "
                    "random vectors under sublinear expectation.")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run scenarios and write a report")
    run.add_argument("--scenario", action="append", default=None, metavar="NAME",
                     help="scenario name or 'all' (repeatable); names: "
                          + ", ".join(SCENARIO_NAMES))
    run.add_argument("--config", default=None, help="key=value config file; flags override it")
    run.add_argument("--sigma-low-sq", type=float, default=None)
    run.add_argument("--sigma-high-sq", type=float, default=None)
    run.add_argument("--alpha", type=float, default=None)
    run.add_argument("--h", type=float, default=None, help="grid spacing override")
    run.add_argument("--L", dest="half_width", type=float, default=None,
                     help="spatial half-width override")
    run.add_argument("--dt", type=float, default=None, help="time step override")
    run.add_argument("--t", type=float, default=None, help="time horizon (default 1)")
    run.add_argument("--tol", type=float, default=None, help="solver target tolerance")
    run.add_argument("--refine", type=int, default=None, metavar="K",
                     help="rerun at h, h/2, ..., h/2^K and append refinement deltas")
    run.add_argument("--out", default=None, help="report file path (default: stdout only)")
    run.add_argument("--report", choices=("csv", "md"), default=None)
    ns = parser.parse_args(argv)

    values = _read_config_file(ns.config) if ns.config else {}
    kwargs = {}
    for key, conv in _NUMERIC_KEYS.items():
        if key in values:
            try:
                kwargs[key] = conv(values[key])
            except ValueError:
                raise GExpectError(f"config key {key}: expected a number, got {values[key]!r}")
    if "out" in values:
        kwargs["out"] = values["out"]
    if "report" in values:
        kwargs["report"] = values["report"]
    if "scenario" in values:
        kwargs["scenarios"] = tuple(s.strip() for s in values["scenario"].split(","))

    field_names = {f.name for f in fields(RunConfig)}
    for key in ns.__dict__:
        if key in field_names and ns.__dict__[key] is not None:
            kwargs[key] = ns.__dict__[key]
    if ns.scenario is not None:
        kwargs["scenarios"] = tuple(ns.scenario)
    if "scenarios" in kwargs and "all" in kwargs["scenarios"]:
        kwargs["scenarios"] = SCENARIO_NAMES
    return RunConfig(**kwargs)


def execute(cfg: RunConfig) -> int:
    outcomes, deltas = run_scenarios(cfg)
    rows = outcome_rows(outcomes, deltas, cfg.refine)
    text = render_report(rows, cfg.report)
    if cfg.out:
        try:
            with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"error: cannot write {cfg.out}: {exc}", file=sys.stderr)
            return 2
    for out in outcomes:
        status = "PASS" if out.passed else "FAIL"
        print(f"[{status}] {out.name} ({out.runtime_ms:.0f} ms, "
              f"{len(out.quantities)} quantities, {len(out.assertions)} assertions)")
        for a in out.assertions:
            mark = "ok " if a.passed else "FAIL"
            tag = " [classical-zero]" if a.classical_zero else ""
            print(f"    {mark} {a.description}{tag}")
    if not cfg.out:
        print()
        print(text, end="")
    return 0 if all(o.passed for o in outcomes) else 1


def main(argv=None) -> int:
    try:
        cfg = parse_args(sys.argv[1:] if argv is None else argv)
        return execute(cfg)
    except GExpectError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
