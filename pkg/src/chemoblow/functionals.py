"""Diagnostic functionals and inequality checks over trajectories.

Everything here is a pure function of immutable snapshots: the energy
functional psi = (1/sigma) ||u||_sigma^sigma, the weighted moment phi of
the cumulative-mass profile, the five-term decomposition of psi', the
mass-bound report against the logistic comparison ODE, and the empirical
growth ratio of phi.  Rates are always estimated by centered differences
on the sampling cadence, never by re-differentiating fields, so the
checks stay independent of the solver's right-hand side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .grid import RadialGrid, elliptic_residual
from .model import ModelParams, m_star, sphere_area


@dataclass(frozen=True)
class MomentConfig:
    """Weight parameters of the moment functional.

    The exponent p must lie in (1 - 2/n, 1) and the window edge s0 in
    (0, R^n); both are checked against the model record.
    """

    p: float
    s0: float

    def validate(self, params: ModelParams) -> "MomentConfig":
        lo = 1.0 - 2.0 / params.n
        if not lo < self.p < 1.0:
            raise ValueError(
                f"p must lie in ({lo}, 1) for n={params.n} (got {self.p})")
        s_max = params.R ** params.n
        if not 0.0 < self.s0 < s_max:
            raise ValueError(
                f"s0 must lie in (0, {s_max}) (got {self.s0})")
        return self


@dataclass
class DiagnosticsRecord:
    """One sampled row of the trajectory diagnostics."""

    t: float
    dt: float
    mass: float
    linf: float
    psi: float
    phi: float
    I1: float
    I2: float
    I3: float
    I4: float
    I5: float
    psi_rate_numeric: float = math.nan
    residual_mass_bound: float = math.nan
    residual_psi_ineq: float = math.nan
    phi_ratio: float = math.nan

    CSV_COLUMNS = ("t", "dt", "mass", "linf", "psi", "phi", "I1", "I2",
                   "I3", "I4", "I5", "psi_rate_numeric",
                   "residual_mass_bound", "residual_psi_ineq", "phi_ratio")

    def as_row(self):
        return [getattr(self, c) for c in self.CSV_COLUMNS]


def psi(grid: RadialGrid, u, sigma: float) -> float:
    """(1/sigma) * integral of u^sigma over the ball."""
    if not sigma > 1.0:
        raise ValueError(f"sigma must be > 1 (got {sigma})")
    u = np.asarray(u, dtype=float)
    return grid.integrate(u**sigma) / sigma


def phi(s_nodes, U, cfg: MomentConfig) -> float:
    """Moment integral of s^{-p} (s0 - s) U(s) over (0, s0).

    U is taken piecewise linear between its nodes and each interval is
    integrated against the exact antiderivatives of s^{1-p}-type powers,
    so the integrable singularity at s = 0 needs no special casing and
    the result is exact for linear U.
    """
    s = np.asarray(s_nodes, dtype=float)
    U = np.asarray(U, dtype=float)
    if not 0.0 < cfg.s0 <= s[-1]:
        raise ValueError(f"s0 must lie in (0, {s[-1]}] (got {cfg.s0})")
    p = cfg.p
    s0 = cfg.s0

    idx = int(np.searchsorted(s, s0))
    a = s[: idx].copy()
    b = np.minimum(s[1: idx + 1], s0)
    Ua = U[: idx]
    slope = (U[1: idx + 1] - Ua) / (s[1: idx + 1] - a)

    # (s0 - s)(Ua + m (s - a)) = c0 + c1 s + c2 s^2   against weight s^{-p}
    base = Ua - slope * a
    c0 = s0 * base
    c1 = slope * s0 - base
    c2 = -slope

    def power_int(q):
        return (b**q - a**q) / q

    total = c0 * power_int(1.0 - p) + c1 * power_int(2.0 - p) \
        + c2 * power_int(3.0 - p)
    return float(np.sum(total))


@dataclass(frozen=True)
class EnergyDecomposition:
    I1: float
    I2: float
    I3: float
    I4: float
    I5: float

    @property
    def total(self) -> float:
        return self.I1 + self.I2 + self.I3 + self.I4 + self.I5

    def as_tuple(self):
        return (self.I1, self.I2, self.I3, self.I4, self.I5)


class SignalConsistencyError(ValueError):
    """v or w is not the elliptic solve of the given u."""


def energy_decomposition(grid: RadialGrid, u, v, w, params: ModelParams,
                         sigma: float, check: bool = True,
                         residual_tol: float = 1e-8) -> EnergyDecomposition:
    """Split the rate of psi into its five mechanisms.

    I1 is the (nonpositive) dissipation -4(sigma-1)/sigma^2 |grad u^{sigma/2}|^2;
    I2 and I3 are the attraction and repulsion contributions in their exact
    pre-inequality forms, using the elliptic equations to trade Laplacians
    of the signals for u; I4 is the linear growth and I5 the (nonpositive)
    degradation.  Requires v, w to be the actual discrete solves of u.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    if check:
        rv = elliptic_residual(grid, v, u, params.alpha, params.beta)
        rw = elliptic_residual(grid, w, u, params.gamma, params.delta)
        if rv > residual_tol or rw > residual_tol:
            raise SignalConsistencyError(
                f"signals inconsistent with u: residuals v={rv:.3e}, "
                f"w={rw:.3e} exceed {residual_tol:.1e}")

    f = u ** (sigma / 2.0)
    grad_f = np.diff(f) / np.diff(grid.centers)
    # volume between adjacent cell centers weights the face gradient
    face_vol = sphere_area(grid.n) * np.diff(grid.centers**grid.n) / grid.n
    grad_sq = float(np.dot(face_vol, grad_f**2))

    int_us = grid.integrate(u**sigma)
    int_us1 = grid.integrate(u ** (sigma + 1.0))
    coef = (sigma - 1.0) / sigma

    I1 = -4.0 * coef / sigma * grad_sq
    I2 = params.chi * coef * (params.alpha * int_us1
                              - params.beta * grid.integrate(u**sigma * v))
    I3 = params.xi * coef * (params.delta * grid.integrate(u**sigma * w)
                             - params.gamma * int_us1)
    I4 = params.lam * int_us
    I5 = -params.mu * grid.integrate(u ** (sigma + params.k - 1.0))
    return EnergyDecomposition(I1, I2, I3, I4, I5)


def gn_ratio(grid: RadialGrid, u, sigma: float, n: int | None = None) -> float:
    """Smallest interpolation constant that the current state requires.

    Ratio of the sigma+1 integral to the gradient/mass interpolation
    expression; the configured interpolation constant is an over-estimate
    exactly when it dominates the maximum of this ratio along the run.
    """
    n = grid.n if n is None else n
    u = np.asarray(u, dtype=float)
    theta0 = n / (2.0 * (sigma + 1.0))
    f = u ** (sigma / 2.0)
    grad_f = np.diff(f) / np.diff(grid.centers)
    face_vol = sphere_area(grid.n) * np.diff(grid.centers**grid.n) / grid.n
    grad_sq = float(np.dot(face_vol, grad_f**2))
    int_us = grid.integrate(u**sigma)
    int_us1 = grid.integrate(u ** (sigma + 1.0))
    expo = (sigma + 1.0) / sigma
    denom = grad_sq ** (expo * theta0) * int_us ** (expo * (1.0 - theta0)) \
        + int_us**expo
    return int_us1 / denom if denom > 0.0 else 0.0


@dataclass
class MassBoundReport:
    """How the sampled mass compares to its two analytic ceilings."""

    m_star: float
    max_margin: float          # max over samples of mass - m_star
    max_ode_excess: float      # max over samples of mass/ode_bound - 1
    ode_values: np.ndarray

    def satisfied(self, rel_tol: float = 1e-6) -> bool:
        return (self.max_margin <= rel_tol * self.m_star
                and self.max_ode_excess <= rel_tol)


def comparison_ode_solution(params: ModelParams, y0: float,
                            times) -> np.ndarray:
    """High-accuracy solution of y' = lam_+ y - mu |Omega|^{1-k} y^k."""
    times = np.asarray(times, dtype=float)
    mu_bar = params.mu * params.omega_volume ** (1.0 - params.k)
    lam_plus = params.lam_plus

    def f(_t, y):
        yy = max(y[0], 0.0)
        return [lam_plus * yy - mu_bar * yy**params.k]

    if times[-1] == 0.0:
        return np.full_like(times, y0)
    sol = solve_ivp(f, (0.0, float(times[-1])), [y0], t_eval=times,
                    method="RK45", rtol=1e-11, atol=1e-12 * max(y0, 1.0))
    if not sol.success:
        raise RuntimeError(f"comparison ODE solve failed: {sol.message}")
    return sol.y[0]


def check_mass_bound(times, masses, params: ModelParams) -> MassBoundReport:
    """Compare sampled masses with m_star and the comparison ODE."""
    times = np.asarray(times, dtype=float)
    masses = np.asarray(masses, dtype=float)
    if len(times) == 0:
        raise ValueError("empty trajectory")
    mstar = m_star(params, float(masses[0]))
    ode = comparison_ode_solution(params, float(masses[0]), times)
    max_margin = float(np.max(masses - mstar))
    with np.errstate(divide="ignore", invalid="ignore"):
        excess = np.where(ode > 0.0, masses / ode - 1.0,
                          np.where(masses > 0.0, np.inf, 0.0))
    return MassBoundReport(m_star=mstar, max_margin=max_margin,
                           max_ode_excess=float(np.max(excess)),
                           ode_values=ode)


def centered_rate(times, values) -> np.ndarray:
    """Centered difference over nonuniform samples; NaN at the ends."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    out = np.full_like(values, math.nan)
    if len(values) >= 3:
        out[1:-1] = (values[2:] - values[:-2]) / (times[2:] - times[:-2])
    return out


@dataclass
class PhiGrowthReport:
    """Empirical growth ratio phi'/(s0^{p-3} phi^2) along a trajectory.

    The infimum over the window stands in for the quadratic-growth
    constant, which is not computable in closed form.  Samples with
    phi = 0 are skipped and counted in ``flagged``.
    """

    times: np.ndarray
    ratios: np.ndarray
    infimum: float
    flagged: int
    hypothesis_flags: list[str]


def phi_growth_report(times, phi_values, cfg: MomentConfig,
                      params: ModelParams, t_window: tuple[float, float],
                      dominance: float | None = None) -> PhiGrowthReport:
    """Ratio series and infimum of the phi growth inequality.

    ``t_window`` is the open interval of admissible sample times (the
    centered rate drops the endpoint samples anyway).  Negative ratios are
    reported as-is; a negative infimum adds a hypothesis flag rather than
    an error, since decaying scenarios legitimately violate the
    concentration hypotheses.
    """
    times = np.asarray(times, dtype=float)
    phis = np.asarray(phi_values, dtype=float)
    rate = centered_rate(times, phis)
    scale = cfg.s0 ** (cfg.p - 3.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = rate / (scale * phis**2)

    lo, hi = t_window
    in_window = (times > lo) & (times < hi) & np.isfinite(rate)
    zero_phi = in_window & (phis == 0.0)
    valid = in_window & (phis > 0.0) & np.isfinite(ratios)

    flags = []
    dom = params.dominance if dominance is None else dominance
    if dom <= 0.0:
        flags.append("dominance_not_positive")
    if int(np.sum(zero_phi)):
        flags.append("zero_phi_samples_skipped")
    infimum = float(np.min(ratios[valid])) if np.any(valid) else math.nan
    if np.any(valid) and infimum <= 0.0:
        flags.append("growth_ratio_not_positive")
    return PhiGrowthReport(times=times[valid], ratios=ratios[valid],
                           infimum=infimum, flagged=int(np.sum(zero_phi)),
                           hypothesis_flags=flags)
