"""Explicit time integration of the cell-density equation in radial flux form.

One step is a two-stage Heun update with the elliptic signal problems
re-solved at every stage, so v and w are always the exact discrete solves
of the current u.  The advective face values use second-order upwind-biased
reconstruction with minmod limiting; positivity is enforced by step
rejection (halve dt and retry), never by clipping, so the conservation
identities stay exact.

Finite-time blow-up cannot be reached by explicit stepping; it is detected
operationally as the L^inf norm crossing a configured threshold while the
step size collapses below 10x the dt floor.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .grid import RadialGrid, radial_gradient, solve_elliptic
from .model import ModelParams

STATUS_RUNNING = "running"
STATUS_COMPLETED = "completed"
STATUS_BLOW_UP = "blow_up"
STATUS_DT_UNDERFLOW = "dt_underflow"
STATUS_FAULT = "fault"


@dataclass(frozen=True)
class StepControl:
    """Adaptive stepping and detection settings for one run."""

    t_end: float
    dt_init: float = 1e-9
    dt_min: float = 1e-13
    dt_max: float = 1e-4
    cfl_safety: float = 0.4
    linf_blowup_threshold: float = 1e8
    sample_interval: float = 1e-5

    def __post_init__(self):
        if not 0.0 < self.dt_min <= self.dt_init <= self.dt_max:
            raise ValueError(
                f"need 0 < dt_min <= dt_init <= dt_max "
                f"(got {self.dt_min}, {self.dt_init}, {self.dt_max})")
        if not 0.0 < self.cfl_safety < 1.0:
            raise ValueError(f"cfl_safety must lie in (0,1) (got {self.cfl_safety})")
        if not self.linf_blowup_threshold > 0.0:
            raise ValueError("linf_blowup_threshold must be > 0")
        if self.t_end < 0.0:
            raise ValueError(f"t_end must be >= 0 (got {self.t_end})")
        if not self.sample_interval > 0.0:
            raise ValueError("sample_interval must be > 0")


@dataclass(frozen=True)
class SimState:
    """Snapshot of the primal solver between accepted steps."""

    t: float
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray
    dt: float
    step_index: int
    status: str = STATUS_RUNNING


def solve_signals(grid: RadialGrid, u: np.ndarray, params: ModelParams):
    """Fresh elliptic solves of the attractant and repellent for a given u."""
    v = solve_elliptic(grid, u, params.alpha, params.beta)
    w = solve_elliptic(grid, u, params.gamma, params.delta)
    return v, w


def _minmod_slopes(values: np.ndarray, grid: RadialGrid) -> np.ndarray:
    """Limited cell slopes; zero in the first and last cell."""
    slopes = np.zeros_like(values)
    d = (values[1:] - values[:-1]) * grid.inv_center_gaps
    left, right = d[:-1], d[1:]
    pick = np.where(np.abs(left) < np.abs(right), left, right)
    slopes[1:-1] = np.where(left * right > 0.0, pick, 0.0)
    return slopes


def _upwind_face_values(u: np.ndarray, grid: RadialGrid,
                        vel: np.ndarray) -> np.ndarray:
    """Donor-cell face values of u with limited linear reconstruction.

    vel is the advective velocity at faces; the donor is the cell the flow
    leaves.  Boundary faces are never used (zero flux there).
    """
    slopes = _minmod_slopes(u, grid)
    nf = len(vel)
    donor = np.where(vel[1:-1] >= 0.0, np.arange(0, nf - 2), np.arange(1, nf - 1))
    face_r = grid.faces[1:-1]
    uf = np.zeros(nf)
    uf[1:-1] = u[donor] + slopes[donor] * (face_r - grid.centers[donor])
    return uf


def transport_divergence(grid: RadialGrid, u: np.ndarray, v: np.ndarray,
                         w: np.ndarray, params: ModelParams,
                         corrupt_advective_flux: bool = False) -> np.ndarray:
    """Conservative divergence of the diffusive plus advective flux.

    The face flux is u_r - u*(chi v_r - xi w_r); its volume-weighted sum
    telescopes to zero exactly because the boundary faces carry no flux.
    ``corrupt_advective_flux`` is a verification hook: it negates the
    advective flux on the outer face of each cell only, deliberately
    breaking the telescoping so conservation checks must fail.
    """
    vel = params.chi * radial_gradient(grid, v) - params.xi * radial_gradient(grid, w)
    grad_u = radial_gradient(grid, u)
    u_face = _upwind_face_values(u, grid, vel)
    flux = grad_u - u_face * vel
    area_flux = grid.face_areas * flux
    if corrupt_advective_flux:
        adv = grid.face_areas * (-u_face * vel)
        return (area_flux[1:] - 2.0 * adv[1:] - area_flux[:-1]) / grid.volumes
    return (area_flux[1:] - area_flux[:-1]) / grid.volumes


def reaction(u: np.ndarray, params: ModelParams) -> np.ndarray:
    """Logistic degradation term lam*u - mu*u^k."""
    return params.lam * u - params.mu * u**params.k


def rhs(u: np.ndarray, v: np.ndarray, w: np.ndarray, grid: RadialGrid,
        params: ModelParams, corrupt_advective_flux: bool = False) -> np.ndarray:
    """du/dt for fields with v, w consistent with u."""
    out = transport_divergence(grid, u, v, w, params,
                               corrupt_advective_flux=corrupt_advective_flux)
    out += reaction(u, params)
    if not np.all(np.isfinite(out)):
        raise FloatingPointError("non-finite flux in rhs")
    return out


def cfl_dt(grid: RadialGrid, u: np.ndarray, v: np.ndarray, w: np.ndarray,
           params: ModelParams, ctrl: StepControl) -> float:
    """Raw stability step size: diffusion, advection, and reaction-sink limits.

    Also the collapse metric for blow-up detection, so it carries no
    history or horizon caps.
    """
    h_min = float(np.min(grid.widths))
    dt_diff = h_min * h_min / (2.0 * grid.n)
    vel = params.chi * radial_gradient(grid, v) - params.xi * radial_gradient(grid, w)
    vmax = float(np.max(np.abs(vel)))
    dt_adv = h_min / vmax if vmax > 0.0 else np.inf
    sink = params.mu * float(np.max(u)) ** (params.k - 1.0) + max(0.0, -params.lam)
    dt_sink = 1.0 / sink if sink > 0.0 else np.inf
    return ctrl.cfl_safety * min(dt_diff, dt_adv, dt_sink)


def propose_dt(grid: RadialGrid, u: np.ndarray, v: np.ndarray, w: np.ndarray,
               params: ModelParams, ctrl: StepControl, prev_dt: float,
               remaining: float) -> float:
    """CFL step size with growth, ceiling, and horizon caps applied."""
    dt = cfl_dt(grid, u, v, w, params, ctrl)
    return min(dt, ctrl.dt_max, 2.0 * prev_dt, remaining)


def _invalid(u: np.ndarray) -> bool:
    # single-pass checks: a finite sum rules out NaN/inf entries
    return bool(np.min(u) < 0.0 or not np.isfinite(float(np.sum(u))))


def step(state: SimState, params: ModelParams, grid: RadialGrid,
         ctrl: StepControl) -> SimState:
    """Advance one accepted Heun step, or return a terminal-status state.

    The proposed dt is halved on any stage producing negative or
    non-finite densities.  Collapse below dt_min ends the run: blow_up if
    the L^inf threshold has been crossed, dt_underflow otherwise.
    """
    if state.status != STATUS_RUNNING:
        raise ValueError(f"cannot step a state with status {state.status!r}")
    if _invalid(state.u):
        return replace(state, status=STATUS_FAULT)

    remaining = ctrl.t_end - state.t
    dt = propose_dt(grid, state.u, state.v, state.w, params, ctrl,
                    state.dt, remaining)
    linf = float(np.max(state.u))
    try:
        r1 = rhs(state.u, state.v, state.w, grid, params)
    except FloatingPointError:
        return replace(state, status=STATUS_FAULT)
    # a final sliver shorter than dt_min is a landing step, not a collapse
    dt_floor = min(ctrl.dt_min, remaining)
    while True:
        if dt < dt_floor:
            status = STATUS_BLOW_UP if linf >= ctrl.linf_blowup_threshold \
                else STATUS_DT_UNDERFLOW
            return replace(state, status=status)
        u_stage = state.u + dt * r1
        if not _invalid(u_stage):
            v_stage, w_stage = solve_signals(grid, u_stage, params)
            try:
                u_new = state.u + 0.5 * dt * (
                    r1 + rhs(u_stage, v_stage, w_stage, grid, params))
            except FloatingPointError:
                u_new = None
            if u_new is not None and not _invalid(u_new):
                break
        dt *= 0.5
    v_new, w_new = solve_signals(grid, u_new, params)
    return SimState(t=state.t + dt, u=u_new, v=v_new, w=w_new, dt=dt,
                    step_index=state.step_index + 1, status=STATUS_RUNNING)


@dataclass
class RunResult:
    """Trajectory samples and outcome of one primal run."""

    outcome: str
    t_final: float
    t_num: float | None
    steps: int
    times: np.ndarray
    dts: np.ndarray
    u_samples: np.ndarray      # one row per sample
    grid: RadialGrid
    params: ModelParams


def sample_times(t_end: float, interval: float) -> np.ndarray:
    """The sampling boundaries 0, interval, 2*interval, ..., t_end."""
    if t_end <= 0.0:
        return np.array([0.0])
    count = int(np.floor(t_end / interval + 1e-9))
    pts = [k * interval for k in range(1, count + 1)]
    if not pts or pts[-1] < t_end * (1.0 - 1e-12):
        pts.append(t_end)
    return np.concatenate(([0.0], pts))


def run(u0: np.ndarray, params: ModelParams, grid: RadialGrid,
        ctrl: StepControl) -> RunResult:
    """Integrate from u0 until t_end, blow-up detection, or dt collapse.

    Steps land exactly on the sampling boundaries (t = 0, every
    ``sample_interval``, and t_end), so trajectories from different
    solvers with the same control can be compared sample-by-sample.
    Deterministic: identical inputs give identical trajectories.
    """
    u0 = grid.validate_field(u0)
    v0, w0 = solve_signals(grid, u0, params)
    state = SimState(t=0.0, u=u0, v=v0, w=w0, dt=ctrl.dt_init, step_index=0)

    times = [0.0]
    dts = [ctrl.dt_init]
    samples = [u0.copy()]

    outcome = STATUS_COMPLETED
    t_num = None
    for seg_end in sample_times(ctrl.t_end, ctrl.sample_interval)[1:]:
        seg_ctrl = replace(ctrl, t_end=float(seg_end))
        while state.t < seg_end and state.status == STATUS_RUNNING:
            state = step(state, params, grid, seg_ctrl)
            if state.status != STATUS_RUNNING:
                break
            if np.max(state.u) >= ctrl.linf_blowup_threshold \
                    and cfl_dt(grid, state.u, state.v, state.w, params,
                               ctrl) < 10.0 * ctrl.dt_min:
                outcome = STATUS_BLOW_UP
                t_num = state.t
                break
        if state.status != STATUS_RUNNING:
            outcome = state.status
            if outcome == STATUS_BLOW_UP:
                t_num = state.t
            break
        if t_num is not None:
            break
        times.append(state.t)
        dts.append(state.dt)
        samples.append(state.u.copy())

    if times[-1] < state.t:
        times.append(state.t)
        dts.append(state.dt)
        samples.append(state.u.copy())

    return RunResult(outcome=outcome, t_final=state.t, t_num=t_num,
                     steps=state.step_index, times=np.asarray(times),
                     dts=np.asarray(dts), u_samples=np.asarray(samples),
                     grid=grid, params=params)
