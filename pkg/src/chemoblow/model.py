"""Model parameters, domain geometry, and initial-data generators.

The model lives on the ball B_R(0) in R^n (n >= 3) and couples a cell
density u to an attractant v and a repellent w:

    u_t = Lap(u) - chi div(u grad v) + xi div(u grad w) + lambda u - mu u^k
    0   = Lap(v) + alpha u - beta v
    0   = Lap(w) + gamma u - delta w

with homogeneous Neumann boundary conditions.  Scenarios meant to
concentrate and blow up need attraction dominance chi*alpha - xi*gamma > 0
and a degradation exponent k close to 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np
from scipy.integrate import quad


def sphere_area(n: int, R: float = 1.0) -> float:
    """Surface area of the sphere of radius R in R^n."""
    return n * math.pi ** (n / 2.0) / math.gamma(n / 2.0 + 1.0) * R ** (n - 1)


def ball_volume(n: int, R: float) -> float:
    """Volume of the ball of radius R in R^n."""
    return math.pi ** (n / 2.0) * R**n / math.gamma(n / 2.0 + 1.0)


class ParameterError(ValueError):
    """Raised when a parameter record violates its constraints.

    Collects every violation so a bad config is reported in one shot.
    """

    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


@dataclass(frozen=True)
class ModelParams:
    """Constants of the chemotaxis system.

    ``lam`` is the growth rate (any sign), ``mu`` the degradation strength,
    ``k`` the degradation exponent (> 1).  ``chi``/``xi`` are the
    attraction/repulsion sensitivities, ``alpha``/``beta`` production and
    decay of the attractant, ``gamma``/``delta`` the same for the
    repellent.  ``n`` is the space dimension (>= 3), ``R`` the ball radius.
    """

    lam: float
    mu: float
    k: float
    chi: float
    xi: float
    alpha: float
    beta: float
    gamma: float
    delta: float
    n: int
    R: float

    @property
    def dominance(self) -> float:
        """Attraction dominance chi*alpha - xi*gamma; > 0 favors blow-up."""
        return self.chi * self.alpha - self.xi * self.gamma

    @property
    def omega_volume(self) -> float:
        """Exact volume of B_R(0), independent of any grid."""
        return ball_volume(self.n, self.R)

    @property
    def lam_plus(self) -> float:
        return max(0.0, self.lam)

    @property
    def k_in_blowup_range(self) -> bool:
        """Whether k sits below the dimension-dependent blow-up ceiling.

        The ceiling is 7/6 for n in {3, 4} and 1 + 1/(2(n-1)) for n >= 5.
        Informational only; nothing in the solvers depends on it.
        """
        if self.n in (3, 4):
            return self.k < 7.0 / 6.0
        return self.k < 1.0 + 1.0 / (2.0 * (self.n - 1))


_POSITIVE_FIELDS = ("mu", "chi", "xi", "alpha", "beta", "gamma", "delta")


def validate_params(raw: Mapping[str, float] | ModelParams) -> ModelParams:
    """Check a raw parameter record and return a frozen ModelParams.

    Accepts either a mapping with keys lam/mu/k/chi/xi/alpha/beta/gamma/
    delta/n/R or an existing ModelParams (idempotent in that case).
    Raises ParameterError listing every violated constraint, each naming
    the offending field.
    """
    if isinstance(raw, ModelParams):
        values = {
            "lam": raw.lam, "mu": raw.mu, "k": raw.k, "chi": raw.chi,
            "xi": raw.xi, "alpha": raw.alpha, "beta": raw.beta,
            "gamma": raw.gamma, "delta": raw.delta, "n": raw.n, "R": raw.R,
        }
    else:
        values = dict(raw)

    violations = []
    missing = [f for f in ("lam", "mu", "k", "chi", "xi", "alpha", "beta",
                           "gamma", "delta", "n", "R") if f not in values]
    if missing:
        raise ParameterError([f"missing field {f}" for f in missing])

    for f in _POSITIVE_FIELDS:
        if not values[f] > 0.0:
            violations.append(f"{f} must be > 0 (got {values[f]})")
    if not values["k"] > 1.0:
        violations.append(f"k must be > 1 (got {values['k']})")
    n = values["n"]
    if int(n) != n or int(n) < 3:
        violations.append(f"n must be an integer >= 3 (got {n})")
    if not values["R"] > 0.0:
        violations.append(f"R must be > 0 (got {values['R']})")
    if not math.isfinite(values["lam"]):
        violations.append(f"lam must be finite (got {values['lam']})")

    if violations:
        raise ParameterError(violations)

    return ModelParams(
        lam=float(values["lam"]), mu=float(values["mu"]), k=float(values["k"]),
        chi=float(values["chi"]), xi=float(values["xi"]),
        alpha=float(values["alpha"]), beta=float(values["beta"]),
        gamma=float(values["gamma"]), delta=float(values["delta"]),
        n=int(values["n"]), R=float(values["R"]),
    )


def m_star(params: ModelParams, initial_mass: float) -> float:
    """Uniform-in-time bound on the total mass of u.

    Equals max{initial mass, (lam_+/mu)^{1/(k-1)} |Omega|}: the mass can
    never exceed its starting value or the carrying capacity of the
    logistic reaction, whichever is larger.  Uses the exact ball volume so
    the value is grid-independent.
    """
    if initial_mass < 0.0:
        raise ValueError(f"initial_mass must be >= 0 (got {initial_mass})")
    capacity = (params.lam_plus / params.mu) ** (1.0 / (params.k - 1.0))
    return max(float(initial_mass), capacity * params.omega_volume)


@dataclass(frozen=True)
class InitialProfile:
    """Radially symmetric nonnegative initial density u0(r).

    Kinds:
      * ``singular_capped``: scale * min(L r^{-n(n-1)}, cap), the capped
        power-law concentration used in blow-up scenarios.  The exponent
        keeps u0(r) * r^{n(n-1)} <= L * scale everywhere.
      * ``gaussian_bump``: scale * exp(-(r/L)^2), capped at ``cap``.
      * ``constant``: u0 = scale everywhere (L and cap unused).
    """

    kind: str
    L: float
    cap: float
    scale: float
    params: ModelParams

    def evaluate(self, r):
        """Evaluate u0 at radius r (scalar or array), vectorized."""
        r = np.asarray(r, dtype=float)
        if self.kind == "constant":
            return np.full_like(r, self.scale)
        if self.kind == "gaussian_bump":
            return np.minimum(self.scale * np.exp(-((r / self.L) ** 2)), self.cap)
        # singular_capped; the cap takes over below (L/cap)^{1/(n(n-1))}
        expo = self.params.n * (self.params.n - 1)
        with np.errstate(divide="ignore"):
            power = np.where(r > 0.0, self.L * r ** float(-expo), np.inf)
        return self.scale * np.minimum(power, self.cap)

    def on_grid(self, grid) -> np.ndarray:
        """Sample u0 at the cell centers of a radial grid."""
        return self.evaluate(grid.centers)

    def _radial_integrand(self) -> Callable[[float], float]:
        n = self.params.n
        return lambda r: r ** (n - 1) * float(self.evaluate(r))

    def mass_within(self, rho: float) -> float:
        """Mass contained in the ball of radius rho, by adaptive quadrature."""
        if not 0.0 < rho <= self.params.R:
            raise ValueError(f"rho must lie in (0, R] (got {rho})")
        pts = self._quad_breakpoints(rho)
        val, _ = quad(self._radial_integrand(), 0.0, rho, points=pts, limit=200)
        return sphere_area(self.params.n) * val

    def total_mass(self) -> float:
        """Total mass over the ball, by adaptive quadrature."""
        return self.mass_within(self.params.R)

    def _quad_breakpoints(self, upper: float) -> list[float] | None:
        if self.kind != "singular_capped":
            return None
        expo = self.params.n * (self.params.n - 1)
        rstar = (self.L / self.cap) ** (1.0 / expo)
        return [rstar] if 0.0 < rstar < upper else None


def make_profile(kind: str, L: float, cap: float, scale: float,
                 params: ModelParams) -> InitialProfile:
    """Construct an initial profile, validating amplitudes.

    L, cap and scale must be strictly positive; kind must be one of
    singular_capped, gaussian_bump, constant.
    """
    violations = []
    if kind not in ("singular_capped", "gaussian_bump", "constant"):
        violations.append(f"kind must be singular_capped, gaussian_bump or "
                          f"constant (got {kind!r})")
    for name, value in (("L", L), ("cap", cap), ("scale", scale)):
        if not value > 0.0:
            violations.append(f"{name} must be > 0 (got {value})")
    if violations:
        raise ParameterError(violations)
    return InitialProfile(kind=kind, L=float(L), cap=float(cap),
                          scale=float(scale), params=params)
