"""Scenario runner and cross-method check suite.

``qcoupler run`` sweeps a scenario (from a file or a named preset) over
its z-grid and writes the requested statistics as CSV; photon-number
distributions go to side files.  ``qcoupler check`` runs the
cross-method validation suite (numerical vs closed-form propagator,
short-length order of accuracy, Gaussian pipeline vs the Fock oracle)
and fails loudly on any tolerance breach.

Exit codes: 0 ok, 1 usage, 2 validation/parse, 3 numerical failure,
4 check-suite failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import __version__
from .exceptions import (
    NumericalError,
    QcouplerError,
    ScenarioParseError,
    UnsupportedConfigurationError,
    ValidationError,
)
from .analytic import analytic_propagator
from .dynamics import (
    build_drift_matrix,
    conservation_residual,
    evolve_state,
    propagator,
    symplectic_residual,
)
from .fock_oracle import FockConfig, evolve_fock, fock_statistics
from .gaussian_stats import moments_and_distribution, principal_squeeze, stats_report
from .model import (
    CouplerParams,
    InputSpec,
    ModeId,
    ModeSelection,
    ScenarioConfig,
    VACUUM_INPUT,
    build_input_state,
    parse_scenario,
    serialize_scenario,
    validate_params,
)
from .presets import PRESET_NAMES, load_preset
from .shortlen import short_propagator

_QUANTITY_COLUMNS = {
    "moments": lambda k_max: ["meanW"] + [f"w{k}" for k in range(2, k_max + 1)],
    "variance": lambda k_max: ["varW"],
    "squeeze": lambda k_max: ["lambda"],
    "quadratures": lambda k_max: ["var_p", "var_q", "u"],
    "pn": lambda k_max: [],
}


@dataclass(frozen=True)
class SweepResult:
    """Column-oriented sweep output plus run metadata."""

    z: np.ndarray
    columns: tuple            # of (name, ndarray) in header order
    pn_tables: tuple          # of (selection name, 2-d array over (z, n))
    metadata: tuple           # of (key, value-string)


def _report_values(report, tag, k_max):
    if tag == "moments":
        return [report.mean_w] + list(report.reduced_moments[: k_max - 1])
    if tag == "variance":
        return [report.variance_w]
    if tag == "squeeze":
        return [report.lam]
    if tag == "quadratures":
        return [report.var_p, report.var_q, report.uncertainty]
    return []


def run_scenario(cfg: ScenarioConfig) -> SweepResult:
    """Evolve the scenario over its z-grid and collect all statistics.

    Deterministic for a given config; grid points are dispatched to a
    thread pool and reassembled in order.
    """
    params = validate_params(cfg.params)
    em = build_drift_matrix(params)
    s0 = build_input_state(cfg.inputs)
    observables = cfg.effective_observables()
    selections = []
    pn_selections = set()
    for tag, sel in observables:
        if sel not in selections:
            selections.append(sel)
        if tag == "pn":
            pn_selections.add(sel)
    zs = cfg.z_grid()

    def at_z(z):
        t = propagator(em, float(z))
        state = evolve_state(t, s0)
        reports = {
            sel: stats_report(
                state, sel, k_max=cfg.k_max, n_max=cfg.n_max,
                include_pn=sel in pn_selections,
            )
            for sel in selections
        }
        return t, state, reports

    workers = min(len(zs), os.cpu_count() or 1)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        per_z = list(pool.map(at_z, zs))

    columns = []
    for tag, sel in observables:
        names = _QUANTITY_COLUMNS[tag](cfg.k_max)
        if not names:
            continue
        block = np.array([_report_values(reports[sel], tag, cfg.k_max)
                          for _, _, reports in per_z])
        for i, qty in enumerate(names):
            columns.append((f"{sel.name}.{qty}", block[:, i]))

    pn_tables = []
    for sel in selections:
        if sel in pn_selections:
            table = np.vstack([reports[sel].p_n for _, _, reports in per_z])
            pn_tables.append((sel.name, table))

    cons = conservation_residual(state for _, state, _ in per_z)
    sympl = max(symplectic_residual(t) for t, _, _ in per_z)
    metadata = (
        ("qcoupler", __version__),
        ("scenario", serialize_scenario(cfg).replace("\n", "; ").rstrip("; ")),
        ("conservation_residual", f"{cons:.6e}"),
        ("max_symplectic_residual", f"{sympl:.6e}"),
    )
    return SweepResult(z=zs, columns=tuple(columns), pn_tables=tuple(pn_tables),
                       metadata=metadata)


def _fmt(value: float) -> str:
    return f"{value:.12g}"


def emit_csv(result: SweepResult, destination) -> list:
    """Write the sweep as CSV (12 significant digits, LF endings).

    Photon-number tables go to side files named
    ``<stem>.<selection>.pn.csv``.  Returns the list of paths written.
    """
    destination = str(destination)
    written = [destination]
    header = ",".join(["z"] + [name for name, _ in result.columns])
    try:
        with open(destination, "w", newline="\n") as fh:
            for key, value in result.metadata:
                fh.write(f"# {key}: {value}\n")
            fh.write(header + "\n")
            for i, z in enumerate(result.z):
                row = [_fmt(z)] + [_fmt(values[i]) for _, values in result.columns]
                fh.write(",".join(row) + "\n")
        stem = destination[:-4] if destination.endswith(".csv") else destination
        for sel_name, table in result.pn_tables:
            path = f"{stem}.{sel_name}.pn.csv"
            written.append(path)
            with open(path, "w", newline="\n") as fh:
                fh.write(",".join(["z"] + [f"p{n}" for n in range(table.shape[1])]) + "\n")
                for i, z in enumerate(result.z):
                    fh.write(",".join([_fmt(z)] + [_fmt(v) for v in table[i]]) + "\n")
    except OSError as exc:
        raise QcouplerError(f"cannot write {exc.filename or destination}: {exc}") from exc
    return written


# --------------------------------------------------------------------------
# Cross-method check suite.

def _check_analytic(tol):
    params = validate_params(CouplerParams(gS1=1, gA1=2, gS2=1, gA2=2,
                                           kappaS=1, kappaA=-1))
    em = build_drift_matrix(params)
    worst = 0.0
    for z in (0.1, 1.0, 5.0):
        tn = propagator(em, z)
        ta = analytic_propagator(params, z)
        worst = max(worst, float(np.max(np.abs(tn.U - ta.U))),
                    float(np.max(np.abs(tn.V - ta.V))))
    return worst < tol, f"closed-form vs numerical propagator: max diff {worst:.3e} (tol {tol:g})"


def _check_shortlen():
    rng = np.random.default_rng(2024)
    ratios = []
    for _ in range(5):
        mags = rng.uniform(0.3, 5.0, 6)
        phases = np.exp(1j * rng.uniform(-np.pi, np.pi, 6))
        vals = mags * phases
        params = CouplerParams(gS1=vals[0], gA1=vals[1], gS2=vals[2],
                               gA2=vals[3], kappaS=vals[4], kappaA=vals[5])
        em = build_drift_matrix(params)

        def err(z):
            tn, ts = propagator(em, z), short_propagator(params, z)
            return max(float(np.max(np.abs(tn.U - ts.U))),
                       float(np.max(np.abs(tn.V - ts.V))))

        ratios.append(err(1e-2) / err(5e-3))
    ok = all(7.0 <= r <= 9.0 for r in ratios)
    return ok, ("short-length error is third order: halving ratios "
                + ", ".join(f"{r:.2f}" for r in ratios) + " (expect within [7, 9])")


def _check_oracle():
    params = validate_params(CouplerParams(gS1=0.3, gA1=0.6))
    z = 0.5
    specs = {
        ModeId.S1: InputSpec(xi=0.5j),
        ModeId.A1: InputSpec(xi=-0.3),
        ModeId.V1: InputSpec(n_ch=0.3),
    }
    cfg = FockConfig(modes=tuple(specs), cutoffs=(12, 12, 12), params=params)
    ensemble = evolve_fock(cfg, [specs[m] for m in cfg.modes], z)
    inputs = [VACUUM_INPUT] * 6
    for mode, spec in specs.items():
        inputs[mode] = spec
    state = evolve_state(propagator(build_drift_matrix(params), z),
                         build_input_state(inputs))
    lines = []
    ok = True
    for modes in [(ModeId.S1,), (ModeId.A1,), (ModeId.V1,),
                  (ModeId.S1, ModeId.A1), (ModeId.S1, ModeId.V1)]:
        sel = ModeSelection(modes)
        fock = fock_statistics(ensemble, sel)
        mean_w, _, p_n = moments_and_distribution(state, sel, k_max=2, n_max=16)
        lam = principal_squeeze(state, sel)
        d_pn = float(np.max(np.abs(fock.p_n[:9] - p_n[:9])))
        d_n = abs(fock.mean_w - mean_w) / max(mean_w, 1e-12)
        d_lam = abs(fock.lam - lam)
        good = d_pn < 1e-4 and d_n < 1e-3 and d_lam < 1e-3
        ok = ok and good
        lines.append(f"{sel.name}: p(n) {d_pn:.1e}, <n> rel {d_n:.1e}, lambda {d_lam:.1e}")
    return ok, "Fock oracle vs Gaussian pipeline: " + "; ".join(lines)


def run_checks(tol=1e-8, out=sys.stdout) -> bool:
    checks = [
        _check_analytic(tol),
        _check_shortlen(),
        _check_oracle(),
    ]
    all_ok = True
    for ok, message in checks:
        print(("PASS " if ok else "FAIL ") + message, file=out)
        all_ok = all_ok and ok
    return all_ok


# --------------------------------------------------------------------------
# Command-line entry point.

class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _build_parser():
    parser = _Parser(prog="qcoupler",
                     description="Quantum light statistics in pumped two-guide "
                                 "Raman/Brillouin couplers")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="sweep a scenario and write CSV")
    src = run_p.add_mutually_exclusive_group(required=True)
    src.add_argument("--scenario", help="path to a scenario document")
    src.add_argument("--preset", choices=PRESET_NAMES, help="named preset")
    run_p.add_argument("--out", default=None, help="output CSV path")
    run_p.add_argument("--z-max", type=float, default=None, help="override z range")
    run_p.add_argument("--steps", type=int, default=None, help="override grid size")

    check_p = sub.add_parser("check", help="run the cross-method check suite")
    check_p.add_argument("--tol", type=float, default=1e-8,
                         help="tolerance for the propagator comparison (default 1e-8)")

    sub.add_parser("list-presets", help="list available presets")
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    try:
        if args.command == "list-presets":
            for name in PRESET_NAMES:
                print(name)
            return 0
        if args.command == "check":
            return 0 if run_checks(tol=args.tol) else 4
        # run
        if args.preset:
            cfg = load_preset(args.preset)
            default_out = f"{args.preset}.csv"
        else:
            try:
                with open(args.scenario) as fh:
                    text = fh.read()
            except OSError as exc:
                print(f"error: cannot read {args.scenario}: {exc}", file=sys.stderr)
                return 1
            cfg = parse_scenario(text)
            base = os.path.basename(args.scenario)
            default_out = (base.rsplit(".", 1)[0] if "." in base else base) + ".csv"
        overrides = {}
        if args.z_max is not None:
            overrides["z_max"] = args.z_max
        if args.steps is not None:
            overrides["z_steps"] = args.steps
        if overrides:
            cfg = replace(cfg, **overrides)
        result = run_scenario(cfg)
        for path in emit_csv(result, args.out or default_out):
            print(path)
        return 0
    except (ValidationError, ScenarioParseError, UnsupportedConfigurationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3
    except QcouplerError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
