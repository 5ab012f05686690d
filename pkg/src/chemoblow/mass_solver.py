"""Independent solver for the cumulative-mass form of the dynamics.

Working variable is U(s, t), the radial mass of u inside radius s^{1/n}
divided by the unit-sphere area, on the stretched coordinate s = r^n.
V and W are the analogous cumulative profiles of the two signals.  In
these variables the density equation becomes a scalar equation with
degenerate diffusion n^2 s^{2-2/n} U_ss, four advective products coupling
U, V, W through U_s, a linear growth term, and a nonlocal degradation
integral of U_s^k.  The signal profiles solve two-point boundary-value
problems with U as source: the left value is pinned to zero and the right
value to (production/decay) * U(R^n), which is exactly the closure implied
by the zero-flux condition of the signals at r = R.

This solver shares no stepping or flux code with the primal solver; it is
the cross-validation oracle for it.  U stays bounded by the total mass
even at blow-up, so there is no blow-up detection here: blow-up shows up
only as steepening of U_s near s = 0.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg.lapack import dgtsv

from .grid import RadialGrid
from .model import ModelParams, sphere_area
from .solver import (
    STATUS_COMPLETED,
    STATUS_DT_UNDERFLOW,
    STATUS_FAULT,
    STATUS_RUNNING,
    StepControl,
)


@dataclass(frozen=True)
class MassState:
    """Snapshot of the cumulative-mass solver: U, V, W on the s-grid."""

    t: float
    s_grid: np.ndarray
    U: np.ndarray
    V: np.ndarray
    W: np.ndarray
    dt: float
    step_index: int
    status: str = STATUS_RUNNING


def cumulative_profile(grid: RadialGrid, u) -> np.ndarray:
    """Cumulative radial mass of a cell field, at the s-grid nodes.

    The s-grid is the image of the r-grid faces under s = r^n, so the
    cumulative sums of the exact cell masses land exactly on the nodes:
    no interpolation is needed for cross-formulation comparisons.
    """
    u = np.asarray(u, dtype=float)
    sigma = sphere_area(grid.n)
    return np.concatenate(([0.0], np.cumsum(grid.volumes * u) / sigma))


def density_from_cumulative(grid: RadialGrid, U) -> np.ndarray:
    """Invert cumulative_profile: per-cell densities n * dU/ds."""
    U = np.asarray(U, dtype=float)
    return grid.n * np.diff(U) / np.diff(grid.s_nodes)


def solve_signal_cumulative(grid: RadialGrid, U, coupling: float,
                            decay: float) -> np.ndarray:
    """Solve n^2 s^{2-2/n} X_ss = decay*X - coupling*U on (0, R^n).

    Dirichlet closure X(0) = 0 and X(R^n) = (coupling/decay) * U(R^n); the
    right value encodes the zero-flux signal condition at r = R.  The
    degenerate coefficient vanishes at s = 0, where the equation is only
    enforced at interior nodes (X(0) is pinned strongly).
    """
    if not decay > 0.0:
        raise ValueError(f"decay must be > 0 (got {decay})")
    U = np.asarray(U, dtype=float)
    s = grid.s_nodes
    if len(s) - 2 < 1:
        raise ValueError("grid too coarse for the cumulative signal solve")
    cached = grid.op_cache.get("mass_bvp")
    if cached is None:
        dm = s[1:-1] - s[:-2]
        dp = s[2:] - s[1:-1]
        diff_coef = grid.n**2 * s[1:-1] ** (2.0 - 2.0 / grid.n)
        c_left = 2.0 / (dm * (dm + dp))
        c_right = 2.0 / (dp * (dm + dp))
        cached = (-(diff_coef * c_left)[1:], diff_coef * (c_left + c_right),
                  -(diff_coef * c_right)[:-1], diff_coef[-1] * c_right[-1])
        grid.op_cache["mass_bvp"] = cached
    lower, diag_diff, upper, right_weight = cached

    diag = decay + diag_diff
    rhs = coupling * U[1:-1]
    # fold the Dirichlet ends in; X(0) = 0 contributes nothing
    x_right = (coupling / decay) * U[-1]
    rhs[-1] += right_weight * x_right
    _, _, _, sol, info = dgtsv(lower, diag, upper, rhs,
                               overwrite_d=1, overwrite_b=1)
    if info != 0:
        raise RuntimeError(f"cumulative signal solve failed (info={info})")
    return np.concatenate(([0.0], sol, [x_right]))


def solve_vw(grid: RadialGrid, U, params: ModelParams):
    """Both cumulative signal profiles for a given U."""
    V = solve_signal_cumulative(grid, U, params.alpha, params.beta)
    W = solve_signal_cumulative(grid, U, params.gamma, params.delta)
    return V, W


def _geometry(grid: RadialGrid):
    """Static s-grid arrays used by the rhs and the step controller."""
    cached = grid.op_cache.get("mass_geom")
    if cached is None:
        s = grid.s_nodes
        n = grid.n
        ds = np.diff(s)
        dm = s[1:-1] - s[:-2]
        dp = s[2:] - s[1:-1]
        diff_coef = n**2 * s[1:-1] ** (2.0 - 2.0 / n)
        cached = {
            "ds": ds,
            "inv_ds": 1.0 / ds,
            "s_mid": 0.5 * (s[:-1] + s[1:]),
            "diff_coef": diff_coef,
            "inv_uss_gap": 2.0 / (s[3:] - s[1:-2]),
            "dm": dm,
            "dp": dp,
            "dt_diff": 1.0 / float(np.max(diff_coef * 2.0 / (dm * dp))),
        }
        grid.op_cache["mass_geom"] = cached
    return cached


def _interval_slopes(s: np.ndarray, U: np.ndarray) -> np.ndarray:
    return np.diff(U) / np.diff(s)


def _limited_interval_gradients(s_mid: np.ndarray,
                                slopes: np.ndarray) -> np.ndarray:
    """Minmod-limited derivative of the interval slopes (s-space)."""
    grad = np.zeros_like(slopes)
    d = np.diff(slopes) / np.diff(s_mid)
    left, right = d[:-1], d[1:]
    pick = np.where(np.abs(left) < np.abs(right), left, right)
    grad[1:-1] = np.where(left * right > 0.0, pick, 0.0)
    return grad


def _upwind_slope_at_nodes(s: np.ndarray, slopes: np.ndarray,
                           speed: np.ndarray,
                           s_mid: np.ndarray) -> np.ndarray:
    """U_s at interior nodes, donor side chosen by the advective speed.

    Positive speed transports U-levels toward smaller s (inward mass
    concentration), so information comes from the right interval.
    """
    grad = _limited_interval_gradients(s_mid, slopes)
    n_int = len(s) - 2
    donor = np.where(speed >= 0.0, np.arange(1, n_int + 1),
                     np.arange(0, n_int))
    return slopes[donor] + grad[donor] * (s[1:-1] - s_mid[donor])


def mass_rhs(grid: RadialGrid, U, V, W, params: ModelParams) -> np.ndarray:
    """dU/dt on the s-grid for fresh V, W.

    Seven terms: degenerate diffusion, the four advective products, linear
    growth, and the nonlocal degradation (a cumulative quadrature of
    U_s^k, nonpositive whenever mu > 0).  The pinned node s = 0 gets 0.
    The last node evolves by the reduced boundary form (growth and
    degradation only); the terms that the zero-flux condition cancels
    there are available separately via boundary_residual.
    """
    U = np.asarray(U, dtype=float)
    s = grid.s_nodes
    n = grid.n
    geom = _geometry(grid)
    slopes = (U[1:] - U[:-1]) * geom["inv_ds"]

    out = np.zeros_like(U)

    # diffusion at interior nodes, one-sided at the first one where the
    # coefficient degenerates and U(0) is pinned strongly
    u_ss = np.empty(len(s) - 2)
    u_ss[1:] = (slopes[2:] - slopes[1:-1]) * geom["inv_uss_gap"]
    u_ss[0] = 2.0 * (slopes[2] - slopes[1]) / (s[3] - s[1]) \
        if len(slopes) >= 3 else 0.0
    out[1:-1] = geom["diff_coef"] * u_ss

    # advective products through U_s
    speed = n * ((params.chi * params.alpha - params.xi * params.gamma) * U[1:-1]
                 - params.chi * params.beta * V[1:-1]
                 + params.xi * params.delta * W[1:-1])
    out[1:-1] += speed * _upwind_slope_at_nodes(s, slopes, speed,
                                                geom["s_mid"])

    # growth and nonlocal degradation act on every free node
    degr = np.cumsum(slopes**params.k * geom["ds"])
    degr *= params.mu * float(n) ** (params.k - 1.0)
    out[1:] += params.lam * U[1:] - degr
    return out


def boundary_residual(grid: RadialGrid, U, V, W, params: ModelParams) -> float:
    """Diffusion + advection of the full equation at the last node.

    These terms vanish exactly for zero-flux-compatible states; their
    one-sided discrete value is recorded as a consistency diagnostic.
    """
    U = np.asarray(U, dtype=float)
    s = grid.s_nodes
    n = grid.n
    slopes = _interval_slopes(s, U)
    u_ss = 2.0 * (slopes[-1] - slopes[-2]) / (s[-1] - s[-3])
    diff_term = n**2 * s[-1] ** (2.0 - 2.0 / n) * u_ss
    speed = n * ((params.chi * params.alpha - params.xi * params.gamma) * U[-1]
                 - params.chi * params.beta * V[-1]
                 + params.xi * params.delta * W[-1])
    return float(diff_term + speed * slopes[-1])


def _mass_invalid(U: np.ndarray) -> bool:
    return bool(np.any(~np.isfinite(U)) or np.any(np.diff(U) < 0.0))


def _propose_dt_mass(grid: RadialGrid, U: np.ndarray, V: np.ndarray,
                     W: np.ndarray, params: ModelParams, ctrl: StepControl,
                     prev_dt: float, remaining: float) -> float:
    n = grid.n
    geom = _geometry(grid)
    dm, dp = geom["dm"], geom["dp"]
    dt_diff = geom["dt_diff"]
    speed = n * ((params.chi * params.alpha - params.xi * params.gamma) * U[1:-1]
                 - params.chi * params.beta * V[1:-1]
                 + params.xi * params.delta * W[1:-1])
    local = np.minimum(dm, dp) / np.maximum(np.abs(speed), 1e-300)
    dt_adv = float(np.min(local))
    u_max = float(np.max((U[1:] - U[:-1]) * geom["inv_ds"])) * n
    sink = params.mu * max(u_max, 0.0) ** (params.k - 1.0) + max(0.0, -params.lam)
    dt_sink = 1.0 / sink if sink > 0.0 else np.inf
    dt = ctrl.cfl_safety * min(dt_diff, dt_adv, dt_sink)
    return min(dt, ctrl.dt_max, 2.0 * prev_dt, remaining)


def step_mass(state: MassState, params: ModelParams, grid: RadialGrid,
              ctrl: StepControl) -> MassState:
    """One accepted Heun step of the cumulative-mass equation.

    Signal profiles are re-solved at each stage.  A step is rejected and
    dt halved whenever the updated U loses monotonicity in s (an implied
    negative density) or turns non-finite.
    """
    if state.status != STATUS_RUNNING:
        raise ValueError(f"cannot step a state with status {state.status!r}")
    if _mass_invalid(state.U):
        return replace(state, status=STATUS_FAULT)

    remaining = ctrl.t_end - state.t
    dt = _propose_dt_mass(grid, state.U, state.V, state.W, params, ctrl,
                          state.dt, remaining)
    r1 = mass_rhs(grid, state.U, state.V, state.W, params)
    if not np.all(np.isfinite(r1)):
        return replace(state, status=STATUS_FAULT)
    dt_floor = min(ctrl.dt_min, remaining)
    while True:
        if dt < dt_floor:
            return replace(state, status=STATUS_DT_UNDERFLOW)
        U_stage = state.U + dt * r1
        if not _mass_invalid(U_stage):
            V_stage, W_stage = solve_vw(grid, U_stage, params)
            r2 = mass_rhs(grid, U_stage, V_stage, W_stage, params)
            U_new = state.U + 0.5 * dt * (r1 + r2)
            if np.all(np.isfinite(U_new)) and not _mass_invalid(U_new):
                break
        dt *= 0.5
    V_new, W_new = solve_vw(grid, U_new, params)
    return MassState(t=state.t + dt, s_grid=state.s_grid, U=U_new, V=V_new,
                     W=W_new, dt=dt, step_index=state.step_index + 1,
                     status=STATUS_RUNNING)


@dataclass
class MassRunResult:
    """Trajectory samples and outcome of one cumulative-mass run."""

    outcome: str
    t_final: float
    steps: int
    times: np.ndarray
    U_samples: np.ndarray
    boundary_residuals: np.ndarray
    grid: RadialGrid
    params: ModelParams


def run_mass(U0, params: ModelParams, grid: RadialGrid,
             ctrl: StepControl) -> MassRunResult:
    """Integrate the cumulative-mass equation until t_end.

    Same sampling contract as the primal run, landing exactly on the
    sampling boundaries.  There is no blow-up exit: U is bounded by the
    total mass, so the run either completes or stops on dt underflow /
    fault.
    """
    from .solver import sample_times

    U0 = np.asarray(U0, dtype=float)
    if U0[0] != 0.0:
        raise ValueError("U(0) must be 0")
    if _mass_invalid(U0):
        raise ValueError("initial U must be finite and non-decreasing")
    V0, W0 = solve_vw(grid, U0, params)
    state = MassState(t=0.0, s_grid=grid.s_nodes, U=U0.copy(), V=V0, W=W0,
                      dt=ctrl.dt_init, step_index=0)

    times = [0.0]
    samples = [U0.copy()]
    residuals = [boundary_residual(grid, U0, V0, W0, params)]

    outcome = STATUS_COMPLETED
    for seg_end in sample_times(ctrl.t_end, ctrl.sample_interval)[1:]:
        seg_ctrl = replace(ctrl, t_end=float(seg_end))
        while state.t < seg_end and state.status == STATUS_RUNNING:
            state = step_mass(state, params, grid, seg_ctrl)
        if state.status != STATUS_RUNNING:
            outcome = state.status
            break
        times.append(state.t)
        samples.append(state.U.copy())
        residuals.append(boundary_residual(grid, state.U, state.V,
                                           state.W, params))

    if times[-1] < state.t:
        times.append(state.t)
        samples.append(state.U.copy())
        residuals.append(boundary_residual(grid, state.U, state.V, state.W,
                                           params))

    return MassRunResult(outcome=outcome, t_final=state.t,
                         steps=state.step_index, times=np.asarray(times),
                         U_samples=np.asarray(samples),
                         boundary_residuals=np.asarray(residuals),
                         grid=grid, params=params)
