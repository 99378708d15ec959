"""Command-line interface: validate, sweep, cases, diagnose, optimize.

Exit codes: 0 success (or valid machine), 1 invalid machine, 2 usage or
parse error.  Tables render 10 significant digits; CSV and JSON outputs keep
full precision (17 significant digits) so they round-trip exactly.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import machine, metrics, optimizer, presets

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_USAGE = 2


def _f10(x: float) -> str:
    return f"{x:.10g}"


def _f17(x: float) -> str:
    return f"{x:.17g}"


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return EXIT_USAGE


def _invalid(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return EXIT_INVALID


# ---------------------------------------------------------------------------
# validate


def cmd_validate(args) -> int:
    try:
        params = machine.load(args.file)
    except (OSError, machine.MachineFormatError) as exc:
        return _fail(str(exc))
    report = machine.validate(params, tol=args.tol)
    print(f"row0 norm defect:     {_f10(report.row0_norm_defect)}")
    print(f"row1 norm defect:     {_f10(report.row1_norm_defect)}")
    print(f"orthogonality defect: {_f10(report.orthogonality_defect)}")
    print(f"gram matrix defect:   {_f10(report.gram_defect)}")
    print(f"tolerance:            {_f10(report.tol)}")
    print(f"valid:                {'yes' if report.is_valid else 'no'}")
    return EXIT_OK if report.is_valid else EXIT_INVALID


# ---------------------------------------------------------------------------
# sweep


def _resolve_machine_source(args):
    """Return (params, formula_record); exactly one of them is not None."""
    if args.machine is not None:
        params = machine.load(args.machine)
        record = None
    else:
        record = presets.by_name(args.preset)
        params = record.params
    if args.m1p is not None:
        sigma = machine.BlankState(args.m1p)
        if params is not None:
            params = dataclasses.replace(params, sigma=sigma)
            record = None
        else:
            record = dataclasses.replace(record, sigma=sigma)
    if params is not None:
        return params, None
    return None, record


def sweep_table(params, record, points: int):
    """Fidelity and distortion rows at evenly spaced alpha^2 values.

    Machines are swept with the direct simulation oracle; formula-only
    presets use the closed forms on their raw couplings (legacy-mode
    fidelity deficit).
    """
    xs = np.linspace(0.0, 1.0, points)
    if params is not None:
        fidelity = metrics.fidelity_curve(params, xs)
        distortion = metrics.distortion_curve(params, xs)
        formula_mode = False
    else:
        deficit = metrics.fidelity_deficit(record.couplings, record.sigma, "legacy")
        dc = metrics.distortion_coefficients(record.couplings)
        fidelity = metrics.fidelity_closed(deficit, xs)
        distortion = metrics.distortion_closed(dc, xs)
        formula_mode = True
    return xs, fidelity, distortion, formula_mode


def render_sweep_csv(xs, fidelity, distortion, formula_mode: bool) -> str:
    lines = []
    if formula_mode:
        lines.append("# formula mode")
    lines.append("alpha_sq,fidelity,distortion")
    for x, f, d in zip(xs, fidelity, distortion):
        lines.append(f"{_f17(x)},{_f17(f)},{_f17(d)}")
    return "\n".join(lines) + "\n"


def cmd_sweep(args) -> int:
    if args.points < 2:
        return _fail(f"--points must be >= 2, got {args.points}")
    try:
        params, record = _resolve_machine_source(args)
    except machine.MachineValidationError as exc:
        return _invalid(str(exc))
    except (OSError, ValueError) as exc:
        return _fail(str(exc))
    try:
        xs, fidelity, distortion, formula_mode = sweep_table(params, record, args.points)
    except machine.MachineValidationError as exc:
        return _invalid(str(exc))
    text = render_sweep_csv(xs, fidelity, distortion, formula_mode)
    if args.out is None:
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text, encoding="utf-8", newline="")
    return EXIT_OK


# ---------------------------------------------------------------------------
# cases


def collect_case_rows() -> list[dict]:
    """Metric table for every registry preset, by all evaluation routes."""
    rows = []
    for record in presets.all_presets():
        dc = metrics.distortion_coefficients(record.couplings)
        deficit_legacy = metrics.fidelity_deficit(record.couplings, record.sigma, "legacy")
        deficit_consistent = metrics.fidelity_deficit(
            record.couplings, record.sigma, "consistent"
        )
        if record.params is not None:
            fbar_quad = metrics.avg_fidelity_quadrature(record.params)
        else:
            fbar_quad = metrics.avg_fidelity_closed_quadrature(deficit_legacy)
        rows.append(
            {
                "preset": record.name,
                "feasible": record.feasible_as_unitary,
                "dbar_legacy": metrics.avg_distortion(dc, "legacy"),
                "dbar_analytic": metrics.avg_distortion(dc, "analytic"),
                "dbar_quad": metrics.avg_distortion_quadrature(dc),
                "fbar_legacy": metrics.avg_fidelity(deficit_legacy),
                "fbar_consistent": metrics.avg_fidelity(deficit_consistent),
                "fbar_quad": fbar_quad,
            }
        )
    return rows


def cmd_cases(args) -> int:
    rows = collect_case_rows()
    header = (
        f"{'preset':<8} {'feasible':<8} {'Dbar_legacy':>16} {'Dbar_analytic':>16} "
        f"{'Dbar_quad':>16} {'Fbar_legacy':>16} {'Fbar_consistent':>16} {'Fbar_quad':>16}"
    )
    print(header)
    for row in rows:
        print(
            f"{row['preset']:<8} {'yes' if row['feasible'] else 'no':<8} "
            f"{_f10(row['dbar_legacy']):>16} {_f10(row['dbar_analytic']):>16} "
            f"{_f10(row['dbar_quad']):>16} {_f10(row['fbar_legacy']):>16} "
            f"{_f10(row['fbar_consistent']):>16} {_f10(row['fbar_quad']):>16}"
        )
    return EXIT_OK


# ---------------------------------------------------------------------------
# diagnose


@dataclass(frozen=True)
class DiagnoseReport:
    """Maximum deviations over a sample of random valid machines."""

    samples: int
    seed: int
    max_legacy_distortion_dev: float     # |avg_distortion(legacy) - quadrature|
    max_analytic_distortion_dev: float   # |avg_distortion(analytic) - quadrature|
    max_legacy_dev_mismatch: float       # vs |0.589 - 3pi/64| * |coherence sum|
    max_quad_level_disagreement: float   # coarse vs refined quadrature
    max_deficit_gap: float               # |deficit(legacy) - deficit(consistent)|
    max_fidelity_oracle_dev: float       # direct simulation vs consistent closed form


def run_diagnose(samples: int, seed: int, m1p: float | None = None) -> DiagnoseReport:
    """Quantify both closed-form ambiguities against the simulation oracle."""
    if samples < 1:
        raise ValueError(f"samples must be >= 1, got {samples}")
    rng = np.random.default_rng(seed)
    grid = np.linspace(0.0, 1.0, 21)
    legacy_const_gap = abs(metrics.LEGACY_CROSS_CONSTANT - metrics.ANALYTIC_CROSS_CONSTANT)

    max_legacy = 0.0
    max_analytic = 0.0
    max_mismatch = 0.0
    max_levels = 0.0
    max_deficit_gap = 0.0
    max_fidelity_dev = 0.0
    for _ in range(samples):
        p = optimizer.random_machine(rng)
        if m1p is not None:
            p = dataclasses.replace(p, sigma=machine.BlankState(m1p))
        c = machine.couplings(p)
        dc = metrics.distortion_coefficients(c)

        coarse, fine = metrics.distortion_quadrature_levels(dc)
        max_levels = max(max_levels, abs(fine - coarse))
        dev_legacy = abs(metrics.avg_distortion(dc, "legacy") - fine)
        dev_analytic = abs(metrics.avg_distortion(dc, "analytic") - fine)
        max_legacy = max(max_legacy, dev_legacy)
        max_analytic = max(max_analytic, dev_analytic)
        predicted = legacy_const_gap * abs(dc.coherence_sum())
        max_mismatch = max(max_mismatch, abs(dev_legacy - predicted))

        deficit_legacy = metrics.fidelity_deficit(c, p.sigma, "legacy")
        deficit_consistent = metrics.fidelity_deficit(c, p.sigma, "consistent")
        max_deficit_gap = max(max_deficit_gap, abs(deficit_legacy - deficit_consistent))

        closed = metrics.fidelity_closed(deficit_consistent, grid)
        direct = metrics.fidelity_curve(p, grid)
        max_fidelity_dev = max(max_fidelity_dev, float(np.max(np.abs(direct - closed))))

    return DiagnoseReport(
        samples=samples,
        seed=seed,
        max_legacy_distortion_dev=max_legacy,
        max_analytic_distortion_dev=max_analytic,
        max_legacy_dev_mismatch=max_mismatch,
        max_quad_level_disagreement=max_levels,
        max_deficit_gap=max_deficit_gap,
        max_fidelity_oracle_dev=max_fidelity_dev,
    )


def cmd_diagnose(args) -> int:
    if args.samples < 1:
        return _fail(f"--samples must be >= 1, got {args.samples}")
    report = run_diagnose(args.samples, args.seed, args.m1p)
    print(f"samples: {report.samples}   seed: {report.seed}")
    print("average distortion, closed form vs quadrature:")
    print(f"  max |legacy (0.589)  - quadrature| = {_f10(report.max_legacy_distortion_dev)}")
    print(f"  max |analytic (3pi/64) - quadrature| = {_f10(report.max_analytic_distortion_dev)}")
    print(
        "  max |legacy deviation - |0.589 - 3pi/64|*|coherence sum|| = "
        f"{_f10(report.max_legacy_dev_mismatch)}"
    )
    print(f"  max quadrature level disagreement = {_f10(report.max_quad_level_disagreement)}")
    print("fidelity deficit conventions:")
    print(f"  max |legacy - consistent| = {_f10(report.max_deficit_gap)}")
    print(
        "  max |direct simulation - consistent closed form| = "
        f"{_f10(report.max_fidelity_oracle_dev)}  (the oracle sides with 'consistent')"
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# optimize


def _resolve_warm_start(source: str) -> machine.MachineParams:
    if source in presets.PRESET_NAMES:
        record = presets.by_name(source)
        if record.params is None:
            raise ValueError(f"preset {source!r} has no machine realization")
        return record.params
    return machine.load(source)


def render_history_csv(history) -> str:
    lines = ["restart,iteration,objective"]
    for entry in history:
        lines.append(f"{entry.restart},{entry.evaluation},{_f17(entry.objective)}")
    return "\n".join(lines) + "\n"


def cmd_optimize(args) -> int:
    try:
        cfg = optimizer.OptConfig(
            objective=args.objective,
            weight_fidelity=args.wf,
            weight_distortion=args.wd,
            restarts=args.restarts,
            max_iters=args.max_iters,
            seed=args.seed,
            tol=args.tol,
        )
        warm = _resolve_warm_start(args.warm_start) if args.warm_start else None
    except machine.MachineValidationError as exc:
        return _invalid(str(exc))
    except (OSError, ValueError) as exc:
        return _fail(str(exc))

    try:
        result = optimizer.optimize(cfg, warm_start=warm)
    except machine.MachineValidationError as exc:
        return _invalid(str(exc))

    print(f"objective: {cfg.objective}   seed: {cfg.seed}   restarts: {cfg.restarts}")
    print(f"best objective:     {_f10(result.best_objective)}")
    print(f"avg fidelity:       {_f10(result.avg_fidelity)}")
    print(f"avg distortion:     {_f10(result.avg_distortion)}")
    print(f"iterations used:    {result.iterations_used}")
    best = result.best_machine
    for key in machine.AMPLITUDE_KEYS:
        z = complex(getattr(best, key))
        print(f"  {key} = {_f10(z.real)} {'+' if z.imag >= 0 else '-'} {_f10(abs(z.imag))}i")
    print(f"  m1p = {_f10(best.sigma.m1p)}")

    out = Path(args.out)
    machine.save(best, out)
    history_path = out.with_name(out.stem + "_history.csv")
    history_path.write_text(render_history_csv(result.history), encoding="utf-8", newline="")
    print(f"wrote {out} and {history_path}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qdelete",
        description="Simulate, verify and optimize two-copy qubit deletion machines.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a machine file against the isometry conditions")
    p.add_argument("file", help="machine JSON file")
    p.add_argument("--tol", type=float, default=machine.DEFAULT_VALIDATION_TOL)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("sweep", help="fidelity/distortion curve over alpha^2 as CSV")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--preset", choices=presets.PRESET_NAMES)
    src.add_argument("--machine", help="machine JSON file")
    p.add_argument("--points", type=int, default=101)
    p.add_argument("--out", help="output CSV path (default: stdout)")
    p.add_argument("--m1p", type=float, help="override the blank-state overlap")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("cases", help="metric table for all presets, by every route")
    p.set_defaults(func=cmd_cases)

    p = sub.add_parser("diagnose", help="quantify the closed-form ambiguities on random machines")
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--m1p", type=float, help="force this blank-state overlap on every sample")
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("optimize", help="search the constraint manifold for the best machine")
    p.add_argument(
        "--objective",
        choices=optimizer.OBJECTIVES,
        default=optimizer.OBJECTIVE_MAX_FIDELITY,
    )
    p.add_argument("--wf", type=float, default=1.0, help="fidelity weight (weighted objective)")
    p.add_argument("--wd", type=float, default=1.0, help="distortion weight (weighted objective)")
    p.add_argument("--restarts", type=int, default=16)
    p.add_argument("--max-iters", type=int, default=800)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--warm-start", help="preset name or machine JSON file to start restart 0 from")
    p.add_argument("--out", required=True, help="best machine JSON path; history CSV lands beside it")
    p.set_defaults(func=cmd_optimize)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


def entrypoint() -> None:
    sys.exit(main())
