"""Run orchestration and bit-stable output emission.

One run writes four files into its output directory:

  <name>.csv           trajectory diagnostics, fixed 15-column schema
  <name>.profiles.csv  radial density snapshots (t, r, u) for plotting
  <name>.summary.json  outcome, bounds, constants ledger (schema below)
  <name>.log           wall-clock timing; kept out of the data files so
                       identical configs produce byte-identical CSV/JSON

Floats are serialized with 17 significant digits.  Sweeps execute the
Cartesian product of the configured axes; rows appear in axis order no
matter how the workers are scheduled.
"""

from __future__ import annotations

import itertools
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .bounds import BoundConstants, compute_bound_constants, \
    lower_bound_explicit, lower_bound_integral
from .config import Scenario, apply_axis_values, load_raw, make_scenario, \
    parse_axes
from .functionals import (DiagnosticsRecord, centered_rate, check_mass_bound,
                          energy_decomposition, gn_ratio, phi,
                          phi_growth_report, psi)
from .mass_solver import cumulative_profile, run_mass
from .model import m_star
from .solver import RunResult, run, solve_signals

SCHEMA_VERSION = "chemoblow-summary-v1"
CSV_COLUMNS = DiagnosticsRecord.CSV_COLUMNS
SWEEP_RESULT_COLUMNS = ("outcome", "t_num", "t_lb_integral", "t_lb_explicit",
                        "m_star", "max_mass_margin", "phi_ratio_infimum",
                        "error")
PROFILE_SNAPSHOTS = 12


def _fmt(x) -> str:
    if x is None:
        return "nan"
    return f"{float(x):.17g}"


@dataclass
class RunSummary:
    """Per-run results destined for the JSON summary."""

    scenario: str
    outcome: str
    t_final: float
    t_num: float | None
    t_num_below_half: bool | None
    steps: int
    samples: int
    mass_initial: float
    m_star: float
    max_mass_margin: float
    max_mass_ode_excess: float
    psi0: float
    t_lb_integral: float
    t_lb_explicit: float
    phi_ratio_infimum: float | None
    phi_samples_flagged: int
    phi_hypothesis_flags: list
    empirical_c_gn_max: float | None
    constants: BoundConstants
    sigma: float
    moment_p: float
    moment_s0: float
    grid_cells: int
    grid_stretching: str
    grid_ratio: float
    mass_check: dict | None
    wall_time_s: float

    def to_json_dict(self) -> dict:
        # wall time deliberately excluded: summaries must be byte-stable
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": "run",
            "scenario": self.scenario,
            "outcome": self.outcome,
            "t_final": self.t_final,
            "t_num": self.t_num,
            "t_num_below_half": self.t_num_below_half,
            "steps": self.steps,
            "samples": self.samples,
            "mass_initial": self.mass_initial,
            "m_star": self.m_star,
            "max_mass_margin": self.max_mass_margin,
            "max_mass_ode_excess": self.max_mass_ode_excess,
            "psi0": self.psi0,
            "t_lb_integral": self.t_lb_integral,
            "t_lb_explicit": self.t_lb_explicit,
            "phi_ratio_infimum": self.phi_ratio_infimum,
            "phi_samples_flagged": self.phi_samples_flagged,
            "phi_hypothesis_flags": self.phi_hypothesis_flags,
            "empirical_c_gn_max": self.empirical_c_gn_max,
            "constants": self.constants.as_dict(),
            "sigma": self.sigma,
            "moment": {"p": self.moment_p, "s0": self.moment_s0},
            "grid": {"cells": self.grid_cells,
                     "stretching": self.grid_stretching,
                     "ratio": self.grid_ratio},
            "mass_check": self.mass_check,
        }


def _nan_to_none(x: float) -> float | None:
    return None if x is None or (isinstance(x, float) and math.isnan(x)) else x


def write_trajectory_csv(path: Path, records: list[DiagnosticsRecord]):
    lines = [",".join(CSV_COLUMNS)]
    for rec in records:
        lines.append(",".join(_fmt(v) for v in rec.as_row()))
    path.write_text("\n".join(lines) + "\n")


def write_profiles_csv(path: Path, result: RunResult):
    count = len(result.times)
    picks = sorted(set(np.linspace(0, count - 1, min(PROFILE_SNAPSHOTS, count),
                                   dtype=int).tolist()))
    lines = ["t,r,u"]
    for j in picks:
        t = result.times[j]
        for r, u in zip(result.grid.centers, result.u_samples[j]):
            lines.append(f"{_fmt(t)},{_fmt(r)},{_fmt(u)}")
    path.write_text("\n".join(lines) + "\n")


def _diagnostics(scenario: Scenario, result: RunResult):
    """Per-sample records plus the gn-ratio series."""
    grid = result.grid
    params = result.params
    records = []
    gn_series = []
    for j, t in enumerate(result.times):
        u = result.u_samples[j]
        v, w = solve_signals(grid, u, params)
        dec = energy_decomposition(grid, u, v, w, params, scenario.sigma,
                                   check=False)
        U = cumulative_profile(grid, u)
        rec = DiagnosticsRecord(
            t=float(t), dt=float(result.dts[j]),
            mass=grid.integrate(u), linf=float(np.max(u)),
            psi=psi(grid, u, scenario.sigma),
            phi=phi(grid.s_nodes, U, scenario.moment),
            I1=dec.I1, I2=dec.I2, I3=dec.I3, I4=dec.I4, I5=dec.I5)
        core = (rec.t, rec.dt, rec.mass, rec.linf, rec.psi, rec.phi,
                rec.I1, rec.I2, rec.I3, rec.I4, rec.I5)
        if not all(math.isfinite(x) for x in core):
            raise RuntimeError(
                f"non-finite diagnostics at sample {j} (t={t})")
        records.append(rec)
        gn_series.append(gn_ratio(grid, u, scenario.sigma))
    return records, gn_series


def _fill_rates(records: list[DiagnosticsRecord], constants: BoundConstants,
                mstar: float, moment_s0: float, moment_p: float):
    times = np.array([r.t for r in records])
    psis = np.array([r.psi for r in records])
    phis = np.array([r.phi for r in records])
    psi_rate = centered_rate(times, psis)
    phi_rate = centered_rate(times, phis)
    scale = moment_s0 ** (moment_p - 3.0)
    for j, rec in enumerate(records):
        rec.psi_rate_numeric = float(psi_rate[j])
        rec.residual_mass_bound = rec.mass - mstar
        envelope = (constants.B1 * rec.psi
                    + constants.B2 * rec.psi**constants.gamma1
                    + constants.B3 * rec.psi**constants.gamma2)
        rec.residual_psi_ineq = float(psi_rate[j] - envelope)
        if rec.phi > 0.0 and math.isfinite(phi_rate[j]):
            rec.phi_ratio = float(phi_rate[j] / (scale * rec.phi**2))


def _mass_cross_check(scenario: Scenario, result: RunResult) -> dict:
    """Run the cumulative-mass solver over the shared early window."""
    grid = result.grid
    horizon = result.t_num if result.t_num is not None else result.t_final
    t_end = scenario.mass_check.t_fraction * horizon
    ctrl = replace(scenario.ctrl, t_end=float(t_end))
    mres = run_mass(cumulative_profile(grid, result.u_samples[0]),
                    result.params, grid, ctrl)
    sup = 0.0
    compared = 0
    for j in range(min(len(mres.times), len(result.times))):
        if not np.isclose(mres.times[j], result.times[j], rtol=1e-12,
                          atol=1e-18):
            continue
        U_primal = cumulative_profile(grid, result.u_samples[j])
        denom = U_primal[-1] if U_primal[-1] > 0.0 else 1.0
        sup = max(sup, float(np.max(np.abs(U_primal - mres.U_samples[j]))
                             / denom))
        compared += 1
    return {
        "enabled": True,
        "outcome": mres.outcome,
        "t_end": t_end,
        "steps": mres.steps,
        "samples_compared": compared,
        "sup_rel_u_diff": sup,
        "boundary_residual_max": float(np.max(np.abs(mres.boundary_residuals))),
    }


def run_scenario(scenario: Scenario, out_dir, *, dry_run: bool = False) -> RunSummary:
    """Execute one scenario and write its output files."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    t_start = time.perf_counter()

    grid = scenario.build_grid()
    u0 = scenario.profile.on_grid(grid)
    psi0 = psi(grid, u0, scenario.sigma)
    mass0 = grid.integrate(u0)
    constants = compute_bound_constants(scenario.params, scenario.gn,
                                        psi0=psi0)
    t_lb_integral = lower_bound_integral(psi0, constants)
    t_lb_explicit = lower_bound_explicit(psi0, constants)
    mstar = m_star(scenario.params, mass0)

    if dry_run:
        summary = RunSummary(
            scenario=scenario.name, outcome="dry_run", t_final=0.0,
            t_num=None, t_num_below_half=None, steps=0, samples=0,
            mass_initial=mass0, m_star=mstar, max_mass_margin=mass0 - mstar,
            max_mass_ode_excess=0.0, psi0=psi0,
            t_lb_integral=t_lb_integral, t_lb_explicit=t_lb_explicit,
            phi_ratio_infimum=None, phi_samples_flagged=0,
            phi_hypothesis_flags=[], empirical_c_gn_max=None,
            constants=constants, sigma=scenario.sigma,
            moment_p=scenario.moment.p, moment_s0=scenario.moment.s0,
            grid_cells=scenario.grid_spec.cells,
            grid_stretching=scenario.grid_spec.stretching,
            grid_ratio=scenario.grid_spec.ratio, mass_check=None,
            wall_time_s=time.perf_counter() - t_start)
        _write_outputs(out_dir, scenario.name, summary, None, None)
        return summary

    result = run(u0, scenario.params, grid, scenario.ctrl)
    records, gn_series = _diagnostics(scenario, result)
    _fill_rates(records, constants, mstar, scenario.moment.s0,
                scenario.moment.p)

    masses = np.array([r.mass for r in records])
    bound_report = check_mass_bound(result.times, masses, result.params)

    horizon = result.t_num if result.t_num is not None else result.t_final
    growth = phi_growth_report(result.times,
                               np.array([r.phi for r in records]),
                               scenario.moment, scenario.params,
                               (0.0, min(0.5, horizon)))

    mass_check = _mass_cross_check(scenario, result) \
        if scenario.mass_check.enabled else None

    summary = RunSummary(
        scenario=scenario.name, outcome=result.outcome,
        t_final=result.t_final, t_num=result.t_num,
        t_num_below_half=None if result.t_num is None else result.t_num < 0.5,
        steps=result.steps, samples=len(records),
        mass_initial=mass0, m_star=bound_report.m_star,
        max_mass_margin=bound_report.max_margin,
        max_mass_ode_excess=bound_report.max_ode_excess,
        psi0=psi0, t_lb_integral=t_lb_integral, t_lb_explicit=t_lb_explicit,
        phi_ratio_infimum=_nan_to_none(growth.infimum),
        phi_samples_flagged=growth.flagged,
        phi_hypothesis_flags=growth.hypothesis_flags,
        empirical_c_gn_max=float(np.max(gn_series)) if gn_series else None,
        constants=constants, sigma=scenario.sigma,
        moment_p=scenario.moment.p, moment_s0=scenario.moment.s0,
        grid_cells=scenario.grid_spec.cells,
        grid_stretching=scenario.grid_spec.stretching,
        grid_ratio=scenario.grid_spec.ratio, mass_check=mass_check,
        wall_time_s=time.perf_counter() - t_start)

    _write_outputs(out_dir, scenario.name, summary, records, result)
    return summary


def _write_outputs(out_dir: Path, name: str, summary: RunSummary,
                   records, result):
    if records is not None:
        write_trajectory_csv(out_dir / f"{name}.csv", records)
        write_profiles_csv(out_dir / f"{name}.profiles.csv", result)
    (out_dir / f"{name}.summary.json").write_text(
        json.dumps(summary.to_json_dict(), indent=2, sort_keys=True) + "\n")
    (out_dir / f"{name}.log").write_text(
        f"scenario={name} outcome={summary.outcome} "
        f"wall_time_s={summary.wall_time_s:.3f}\n")


def _thread_count() -> int:
    env = os.environ.get("CHEMOBLOW_THREADS", "")
    try:
        n = int(env)
    except ValueError:
        n = 0
    return max(1, n) if n > 0 else min(4, os.cpu_count() or 1)


def sweep(path, out_dir, *, cells_override: int | None = None) -> Path:
    """Run the Cartesian product of the [sweep] axes of a config.

    Each run writes its own files under runs/<name>/; the aggregate table
    has one row per run, ordered lexicographically in the axes regardless
    of worker scheduling.  Failed runs are recorded in-row and the sweep
    continues.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    raw = load_raw(path)
    where = f"{path}: "
    axes = parse_axes(raw, where=where)
    base_name = raw["output"]["name"]

    axis_keys = [key for key, _ in axes]
    combos = list(itertools.product(*[vals for _, vals in axes])) \
        if axes else [()]

    def one(index_combo):
        index, combo = index_combo
        assignment = dict(zip(axis_keys, combo))
        sub_raw = apply_axis_values(raw, assignment)
        name = f"{base_name}_{index:03d}" if axes else base_name
        sub_raw["output"]["name"] = name
        try:
            scenario = make_scenario(sub_raw, cells_override=cells_override,
                                     where=where)
            summary = run_scenario(scenario, out_dir / "runs" / name)
            return combo, summary, ""
        except Exception as exc:   # failed runs stay in-row
            return combo, None, f"{type(exc).__name__}: {exc}"

    with ThreadPoolExecutor(max_workers=_thread_count()) as pool:
        results = list(pool.map(one, enumerate(combos)))

    header = ["name"] + axis_keys + list(SWEEP_RESULT_COLUMNS)
    lines = [",".join(header)]
    rows_json = []
    for index, (combo, summary, error) in enumerate(results):
        name = f"{base_name}_{index:03d}" if axes else base_name
        cells = [name] + [_fmt(v) for v in combo]
        if summary is None:
            cells += ["error", "nan", "nan", "nan", "nan", "nan", "nan",
                      error.replace(",", ";")]
        else:
            cells += [summary.outcome, _fmt(summary.t_num),
                      _fmt(summary.t_lb_integral), _fmt(summary.t_lb_explicit),
                      _fmt(summary.m_star), _fmt(summary.max_mass_margin),
                      _fmt(summary.phi_ratio_infimum),
                      error]
        lines.append(",".join(cells))
        rows_json.append({
            "name": name,
            "axes": dict(zip(axis_keys, combo)),
            "outcome": summary.outcome if summary else "error",
            "error": error,
        })

    agg = out_dir / f"{base_name}.csv"
    agg.write_text("\n".join(lines) + "\n")
    (out_dir / f"{base_name}.summary.json").write_text(json.dumps({
        "schema_version": SCHEMA_VERSION,
        "kind": "sweep",
        "name": base_name,
        "axes": {k: v for k, v in axes},
        "rows": rows_json,
    }, indent=2, sort_keys=True) + "\n")
    return agg
