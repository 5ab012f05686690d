"""Blow-up-time lower bounds from the differential inequality for psi.

With sigma > n/2 the rate of psi is dominated by
B1 psi + B2 psi^{gamma1} + B3 psi^{gamma2}, where the B's collect the
interpolation-inequality split of the attraction term, the growth rate,
and a Young-inequality weight eps1.  Integrating the inequality from the
initial energy psi0 to infinity gives a convergent lower bound on the
blow-up time (gamma2 > 1); majorizing every term by its gamma2 power
gives the coarser closed-form bound 1/(A (gamma2-1) psi0^{gamma2-1}).

The interpolation constant is configured, not computed: a larger value
only weakens (lowers) the bound, so a conservative default preserves its
validity as a lower bound.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from scipy.integrate import quad

from .model import ModelParams


@dataclass(frozen=True)
class GNConfig:
    """Interpolation-inequality configuration: the constant and sigma."""

    c_gn: float = 10.0
    sigma: float = 2.0

    def validate(self, n: int) -> "GNConfig":
        if not self.c_gn > 0.0:
            raise ValueError(f"c_gn must be > 0 (got {self.c_gn})")
        if not self.sigma > n / 2.0:
            raise ValueError(
                f"sigma must exceed n/2 = {n / 2.0} (got {self.sigma})")
        return self


@dataclass(frozen=True)
class BoundConstants:
    """The assembled constants ledger behind the lower bounds."""

    sigma: float
    n: int
    c_gn: float
    theta0: float
    beta0: float
    eps1: float
    c1: float
    c2: float
    c3: float
    c1_tilde: float
    c2_tilde: float
    c3_tilde: float
    B1: float
    B2: float
    B3: float
    B4: float
    gamma1: float
    gamma2: float
    A: Optional[float] = None   # filled when psi0 is supplied

    def as_dict(self) -> dict:
        return {
            "sigma": self.sigma, "n": self.n, "c_gn": self.c_gn,
            "theta0": self.theta0, "beta0": self.beta0, "eps1": self.eps1,
            "c1": self.c1, "c2": self.c2, "c3": self.c3,
            "c1_tilde": self.c1_tilde, "c2_tilde": self.c2_tilde,
            "c3_tilde": self.c3_tilde,
            "B1": self.B1, "B2": self.B2, "B3": self.B3, "B4": self.B4,
            "gamma1": self.gamma1, "gamma2": self.gamma2, "A": self.A,
        }


def explicit_aggregate(constants: BoundConstants, psi0: float) -> float:
    """The single-power majorant coefficient A for a given initial energy."""
    two_sn = 2.0 * constants.sigma - constants.n
    return (constants.B1 * psi0 ** (-2.0 / two_sn)
            + constants.B2 * psi0 ** (-constants.n / (constants.sigma * two_sn))
            + constants.B3)


def compute_bound_constants(params: ModelParams, gn: GNConfig,
                            psi0: float | None = None) -> BoundConstants:
    """Fill the constants ledger for the psi differential inequality.

    eps1 is pinned to its largest admissible value
    4 / (sigma chi alpha C beta0), which makes the gradient coefficient
    c1_tilde equal 4(sigma-1)/sigma^2 exactly; any smaller eps1 only
    inflates B3 and therefore worsens the bound.
    """
    gn.validate(params.n)
    sigma = gn.sigma
    n = params.n
    c = gn.c_gn
    chialpha = params.chi * params.alpha

    theta0 = n / (2.0 * (sigma + 1.0))
    beta0 = n / (2.0 * sigma)
    eps1 = 4.0 / (sigma * chialpha * c * beta0)

    c1 = c * eps1 * beta0
    c2 = c * eps1 ** (-beta0 / (1.0 - beta0)) * (1.0 - beta0)
    c3 = c
    coef = chialpha * (sigma - 1.0) / sigma
    c1t, c2t, c3t = coef * c1, coef * c2, coef * c3

    gamma1 = (sigma + 1.0) / sigma
    gamma2 = (2.0 * (sigma + 1.0) - n) / (2.0 * sigma - n)
    B1 = params.lam_plus * sigma
    B2 = c3t * sigma**gamma1
    B3 = c2t * sigma**gamma2
    B4 = params.mu * params.omega_volume ** ((1.0 - params.k) / sigma) \
        * sigma ** ((sigma + params.k - 1.0) / sigma)

    constants = BoundConstants(
        sigma=sigma, n=n, c_gn=c, theta0=theta0, beta0=beta0, eps1=eps1,
        c1=c1, c2=c2, c3=c3, c1_tilde=c1t, c2_tilde=c2t, c3_tilde=c3t,
        B1=B1, B2=B2, B3=B3, B4=B4, gamma1=gamma1, gamma2=gamma2)
    if psi0 is not None:
        constants = BoundConstants(
            **{**constants.as_dict(), "A": explicit_aggregate(constants, psi0)})
    return constants


def lower_bound_integral(psi0: float, constants: BoundConstants,
                         rel_tol: float = 1e-8) -> float:
    """Integral lower bound: int_{psi0}^inf d_eta / (B1 eta + B2 eta^g1 + B3 eta^g2).

    The substitution eta = psi0/tau maps the tail onto (0, 1], where the
    integrand is integrable because gamma2 > 1; adaptive quadrature then
    resolves it to the requested relative tolerance.
    """
    if not psi0 > 0.0:
        raise ValueError(f"psi0 must be > 0 (got {psi0})")
    B1, B2, B3 = constants.B1, constants.B2, constants.B3
    g1, g2 = constants.gamma1, constants.gamma2
    if B3 <= 0.0 or B2 < 0.0 or B1 < 0.0:
        raise ValueError("bound constants must satisfy B1 >= 0, B2 >= 0, B3 > 0")

    p1 = psi0 ** (g1 - 1.0)
    p2 = psi0 ** (g2 - 1.0)

    def integrand(tau):
        return tau ** (g2 - 2.0) / (
            B1 * tau ** (g2 - 1.0) + B2 * p1 * tau ** (g2 - g1) + B3 * p2)

    value, err = quad(integrand, 0.0, 1.0, epsabs=0.0, epsrel=rel_tol,
                      limit=500)
    if not value > 0.0 or err > 10.0 * rel_tol * value:
        raise RuntimeError(
            f"tail quadrature did not converge (value={value}, err={err})")
    return float(value)


def lower_bound_explicit(psi0: float, constants: BoundConstants) -> float:
    """Closed-form bound 1/(A (gamma2 - 1) psi0^{gamma2 - 1}).

    Coarser than the integral bound: every term of the denominator is
    majorized by its gamma2 power, so this never exceeds it.
    """
    if not psi0 > 0.0:
        raise ValueError(f"psi0 must be > 0 (got {psi0})")
    A = explicit_aggregate(constants, psi0)
    g2 = constants.gamma2
    return 1.0 / (A * (g2 - 1.0) * psi0 ** (g2 - 1.0))
