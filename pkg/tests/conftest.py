"""Shared fixtures: the scenario files are parsed once and the expensive
trajectories (reference blow-up, its cumulative-mass cross-run, the
repulsion-dominant twin, and the four smooth suite scenarios) are computed
once per session and reused across test modules."""

import time
from dataclasses import replace
from pathlib import Path

import pytest

from chemoblow import cumulative_profile, run, run_mass
from chemoblow.config import parse_scenario

SCENARIO_DIR = Path(__file__).resolve().parent.parent / "scenarios"

SMOOTH_SCENARIOS = ("decay_dom_neg", "decay_dom_pos", "growth_dom_neg",
                    "growth_dom_pos")
# the spec-level suite: three growth-rate signs crossed with both
# dominance signs
SUITE_SCENARIOS = SMOOTH_SCENARIOS + ("reference_blowup",
                                      "reference_no_blowup")


def scenario_path(name: str) -> Path:
    return SCENARIO_DIR / f"{name}.ini"


@pytest.fixture(scope="session")
def scenarios():
    return {name: parse_scenario(scenario_path(name))
            for name in SUITE_SCENARIOS}


def _execute(scenario):
    grid = scenario.build_grid()
    u0 = scenario.profile.on_grid(grid)
    start = time.perf_counter()
    result = run(u0, scenario.params, grid, scenario.ctrl)
    wall = time.perf_counter() - start
    return result, wall


@pytest.fixture(scope="session")
def reference_run(scenarios):
    result, wall = _execute(scenarios["reference_blowup"])
    return {"scenario": scenarios["reference_blowup"], "result": result,
            "wall_s": wall}


@pytest.fixture(scope="session")
def twin_run(scenarios):
    result, wall = _execute(scenarios["reference_no_blowup"])
    return {"scenario": scenarios["reference_no_blowup"], "result": result,
            "wall_s": wall}


@pytest.fixture(scope="session")
def reference_mass_run(reference_run):
    scenario = reference_run["scenario"]
    result = reference_run["result"]
    assert result.t_num is not None, "reference scenario must blow up"
    ctrl = replace(scenario.ctrl,
                   t_end=scenario.mass_check.t_fraction * result.t_num)
    U0 = cumulative_profile(result.grid, result.u_samples[0])
    return run_mass(U0, scenario.params, result.grid, ctrl)


@pytest.fixture(scope="session")
def suite_runs(scenarios, reference_run, twin_run):
    """All six suite scenarios, keyed by name."""
    runs = {}
    for name in SMOOTH_SCENARIOS:
        result, wall = _execute(scenarios[name])
        runs[name] = {"scenario": scenarios[name], "result": result,
                      "wall_s": wall}
    runs["reference_blowup"] = reference_run
    runs["reference_no_blowup"] = twin_run
    return runs
