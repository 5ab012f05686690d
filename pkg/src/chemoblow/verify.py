"""Built-in verification suites: identities, signs, convergence, bounds.

``verify fast`` runs the cheap invariant checks (well under a minute);
``verify full`` adds the manufactured-solution refinement studies and the
cross-formulation agreement on a real blow-up run.  Each check reports a
measured margin against its tolerance; the suite is machine-readable and
returns nonzero when anything fails.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import quad

from .bounds import GNConfig, compute_bound_constants, lower_bound_explicit, \
    lower_bound_integral
from .functionals import MomentConfig, centered_rate, energy_decomposition, phi, psi
from .grid import build_grid, radial_gradient, solve_elliptic
from .mass_solver import cumulative_profile, density_from_cumulative, \
    mass_rhs, run_mass, solve_vw
from .model import m_star, make_profile, sphere_area, validate_params
from .solver import StepControl, rhs, run, solve_signals, transport_divergence


@dataclass
class CheckResult:
    name: str
    passed: bool
    margin: float       # measured value
    tol: float          # threshold it is compared against
    detail: str = ""

    def as_dict(self):
        return {"name": self.name, "pass": self.passed,
                "margin": self.margin, "tol": self.tol, "detail": self.detail}


def _params(**over):
    base = dict(lam=0.0, mu=1.0, k=1.1, chi=2.0, xi=1.0, alpha=1.0,
                beta=1.0, gamma=0.5, delta=1.0, n=3, R=1.0)
    base.update(over)
    return validate_params(base)


def _below(name, value, tol, detail=""):
    return CheckResult(name, bool(value <= tol), float(value), float(tol), detail)


def _within(name, value, lo, hi, detail=""):
    ok = lo <= value <= hi
    return CheckResult(name, bool(ok), float(value), float(hi),
                       detail or f"expected in [{lo}, {hi}]")


def _elliptic_mms_error(cells):
    g = build_grid(3, 1.0, cells, "uniform")
    r = g.centers
    a, b, R = 1.5, 2.0, 1.0
    exact = np.cos(np.pi * r / R)
    lap = -(np.pi / R) ** 2 * np.cos(np.pi * r / R) \
        - (g.n - 1) / r * (np.pi / R) * np.sin(np.pi * r / R)
    src = (b * exact - lap) / a
    return float(np.max(np.abs(solve_elliptic(g, src, a, b) - exact)))


def _parabolic_mms_error(cells):
    p = _params(chi=1e-12, xi=1e-12, lam=0.3, mu=0.7, k=1.5)
    g = build_grid(3, 1.0, cells, "uniform")
    r = g.centers
    u = 2.0 + np.cos(np.pi * r)
    lap = -np.pi**2 * np.cos(np.pi * r) - (g.n - 1) / r * np.pi * np.sin(np.pi * r)
    expected = lap + p.lam * u - p.mu * u**p.k
    v, w = solve_signals(g, u, p)
    return float(np.max(np.abs(rhs(u, v, w, g, p) - expected)))


def fast_checks() -> list[CheckResult]:
    rng = np.random.default_rng(42)
    checks = []
    p = _params()
    g = build_grid(3, 1.0, 512, "geometric", 0.995)

    vol_err = abs(g.volumes.sum() - p.omega_volume) / p.omega_volume
    checks.append(_below("grid_volume_telescoping", vol_err, 1e-12))

    const = solve_elliptic(g, np.full(512, 3.0), 2.0, 4.0)
    checks.append(_below("elliptic_constant_exact",
                         float(np.max(np.abs(const - 1.5))) / 1.5, 1e-12))

    s1, s2 = rng.random(512), rng.random(512) - 0.3
    lin = solve_elliptic(g, s1 + s2, 1.3, 0.7) \
        - solve_elliptic(g, s1, 1.3, 0.7) - solve_elliptic(g, s2, 1.3, 0.7)
    checks.append(_below("elliptic_linearity", float(np.max(np.abs(lin))), 1e-12))

    src = rng.random(512)
    sol = solve_elliptic(g, src, 1.3, 0.7)
    mass_id = abs(0.7 * g.integrate(sol) - 1.3 * g.integrate(src)) \
        / (1.3 * g.integrate(src))
    checks.append(_below("elliptic_mass_identity", mass_id, 1e-10))
    checks.append(_below("elliptic_max_principle", float(-np.min(sol)), 0.0,
                         "solution of a nonnegative source stays nonnegative"))

    e1, e2, e3 = (_elliptic_mms_error(c) for c in (64, 128, 256))
    order = 0.5 * (math.log2(e1 / e2) + math.log2(e2 / e3))
    checks.append(_within("elliptic_mms_order", order, 1.8, 2.2))

    grad = radial_gradient(g, np.full(512, 2.5))
    checks.append(_below("gradient_constant_zero", float(np.max(np.abs(grad))), 0.0))
    gu = build_grid(3, 1.0, 64, "uniform")
    grad_lin = radial_gradient(gu, gu.centers.copy())
    checks.append(_below("gradient_linear_one",
                         float(np.max(np.abs(grad_lin[1:-1] - 1.0))), 1e-12))

    u = rng.random(512) + 0.5
    v, w = solve_signals(g, u, p)
    div = transport_divergence(g, u, v, w, p)
    scale = float(np.max(np.abs(g.volumes * div)))
    checks.append(_below("transport_conservation",
                         abs(g.integrate(div)) / scale, 1e-10))
    corrupted = transport_divergence(g, u, v, w, p, corrupt_advective_flux=True)
    checks.append(CheckResult(
        "mutation_sanity", abs(g.integrate(corrupted)) / scale > 1e-6,
        abs(g.integrate(corrupted)) / scale, 1e-6,
        "conservation check must fail when the advective flux is corrupted"))

    U = cumulative_profile(g, u)
    roundtrip = float(np.max(np.abs(density_from_cumulative(g, U) - u))
                      / np.max(u))
    checks.append(_below("transform_roundtrip", roundtrip, 1e-3))

    c = 2.5
    Uc = cumulative_profile(g, np.full(512, c))
    V, W = solve_vw(g, Uc, p)
    vw_err = float(np.max(np.abs(V - (p.alpha * c / p.beta) * g.s_nodes / 3.0))
                   / np.max(V))
    checks.append(_below("vw_constant_exact", vw_err, 1e-8))

    smooth = 100.0 * np.exp(-((g.centers / 0.3) ** 2)) + 1.0
    v_s = solve_elliptic(g, smooth, p.alpha, p.beta)
    V_direct = cumulative_profile(g, v_s)
    U_s = cumulative_profile(g, smooth)
    V_bvp, _ = solve_vw(g, U_s, p)
    checks.append(_below("vw_vs_primal_transform",
                         float(np.max(np.abs(V_bvp - V_direct)) / np.max(V_direct)),
                         1e-3))

    v, w = solve_signals(g, smooth, p)
    primal = rhs(smooth, v, w, g, p)
    dU_primal = np.concatenate(([0.0],
                                np.cumsum(g.volumes * primal) / sphere_area(3)))
    V_s, W_s = solve_vw(g, U_s, p)
    dU_mass = mass_rhs(g, U_s, V_s, W_s, p)
    checks.append(_below("mass_rhs_equivalence",
                         float(np.max(np.abs(dU_mass - dU_primal))
                               / np.max(np.abs(dU_mass))), 1e-3))

    cfg = MomentConfig(p=2.0 / 3.0, s0=0.125)
    Ulin = 2.5 * g.s_nodes / 3.0
    exact_phi = (2.5 / 3.0) * 0.125 ** (3.0 - cfg.p) \
        * (1.0 / (2.0 - cfg.p) - 1.0 / (3.0 - cfg.p))
    checks.append(_below("phi_linear_exact",
                         abs(phi(g.s_nodes, Ulin, cfg) - exact_phi) / exact_phi,
                         1e-12))

    # adaptive-quadrature oracle on the piecewise-linear interpolant
    phi_direct = phi(g.s_nodes, U_s, cfg)
    interp = lambda s: np.interp(s, g.s_nodes, U_s)
    oracle = 0.0
    s_in = g.s_nodes[g.s_nodes < cfg.s0]
    edges = np.concatenate((s_in, [cfg.s0]))
    for a, b in zip(edges[:-1], edges[1:]):
        val, _ = quad(lambda s: s ** (-cfg.p) * (cfg.s0 - s) * interp(s),
                      a, b, limit=100)
        oracle += val
    checks.append(_below("phi_oracle_agreement",
                         abs(phi_direct - oracle) / abs(oracle), 1e-6))

    scale_err = abs(psi(g, 3.0 * u, 2.0) - 9.0 * psi(g, u, 2.0)) \
        / (9.0 * psi(g, u, 2.0))
    checks.append(_below("psi_homogeneity", scale_err, 1e-12))

    gn = GNConfig(c_gn=10.0, sigma=2.0)
    consts = compute_bound_constants(p, gn)
    ident = abs(consts.c1_tilde - 4.0 * (gn.sigma - 1.0) / gn.sigma**2)
    checks.append(_below("bound_eps1_identity", ident, 1e-14))

    psi0 = 5.0
    closed = psi0 ** (1.0 - consts.gamma2) / (consts.B3 * (consts.gamma2 - 1.0))
    b1b2_zero = replace(consts, B1=0.0, B2=0.0)
    num = lower_bound_integral(psi0, b1b2_zero)
    checks.append(_below("bound_closed_form", abs(num - closed) / closed, 1e-10))

    integral = lower_bound_integral(psi0, consts)
    taus = np.linspace(0.0, 1.0, 2_000_001)
    p1 = psi0 ** (consts.gamma1 - 1.0)
    p2 = psi0 ** (consts.gamma2 - 1.0)
    with np.errstate(divide="ignore"):
        f = taus ** (consts.gamma2 - 2.0) / (
            consts.B1 * taus ** (consts.gamma2 - 1.0)
            + consts.B2 * p1 * taus ** (consts.gamma2 - consts.gamma1)
            + consts.B3 * p2)
    f[0] = 0.0 if consts.gamma2 > 2.0 else f[0]
    brute = float(np.trapezoid(f, taus))
    checks.append(_below("bound_trapezoid_oracle",
                         abs(integral - brute) / brute, 1e-6))

    ordered = all(
        lower_bound_explicit(x, consts) <= lower_bound_integral(x, consts)
        * (1.0 + 1e-7)
        for x in (0.5, 1.0, 5.0, 50.0, 1e4))
    checks.append(CheckResult("bound_ordering", ordered, 0.0, 0.0,
                              "explicit bound never exceeds integral bound"))

    mono = all(np.diff([lower_bound_integral(x, consts)
                        for x in (0.5, 1.0, 5.0, 50.0)]) < 0.0)
    checks.append(CheckResult("bound_monotone_psi0", mono, 0.0, 0.0,
                              "integral bound strictly decreasing in psi0"))

    ms = m_star(_params(lam=-1.0), 2.0)
    checks.append(_below("m_star_negative_growth", abs(ms - 2.0), 0.0))
    return checks


def full_checks() -> list[CheckResult]:
    checks = fast_checks()

    e1, e2, e3 = (_parabolic_mms_error(c) for c in (64, 128, 256))
    order = 0.5 * (math.log2(e1 / e2) + math.log2(e2 / e3))
    checks.append(_within("parabolic_mms_order", order, 1.8, 2.2))

    p = _params()
    prof = make_profile("singular_capped", L=1.0, cap=1e4, scale=1.0, params=p)
    ctrl = StepControl(t_end=3e-4, dt_init=1e-10, dt_min=1e-12, dt_max=1e-5,
                       cfl_safety=0.4, linf_blowup_threshold=1e8,
                       sample_interval=1e-6)
    g_f = build_grid(3, 1.0, 512, "geometric", 0.995)
    res_f = run(prof.on_grid(g_f), p, g_f, ctrl)
    g_c = build_grid(3, 1.0, 256, "geometric", 0.995**2)
    res_c = run(prof.on_grid(g_c), p, g_c, ctrl)
    ok = res_f.outcome == "blow_up" and res_c.outcome == "blow_up"
    change = abs(res_c.t_num - res_f.t_num) / res_f.t_num if ok else math.inf
    checks.append(_below("grid_consistency_t_num", change, 0.05,
                         "T_num shift under halved cell width"))

    ctrl_m = replace(ctrl, t_end=0.8 * res_f.t_num)
    mres = run_mass(cumulative_profile(g_f, res_f.u_samples[0]), p, g_f, ctrl_m)
    sup = 0.0
    for j in range(min(len(mres.times), len(res_f.times))):
        if not np.isclose(mres.times[j], res_f.times[j], rtol=1e-12, atol=1e-18):
            continue
        U_primal = cumulative_profile(g_f, res_f.u_samples[j])
        sup = max(sup, float(np.max(np.abs(U_primal - mres.U_samples[j]))
                             / U_primal[-1]))
    checks.append(_below("cross_formulation_u_agreement", sup, 1e-2))

    p_s = _params(lam=-0.5, mu=1.0, k=1.5, chi=0.3, xi=0.3, gamma=1.0)
    g_s = build_grid(3, 1.0, 512, "uniform")
    prof_s = make_profile("gaussian_bump", L=0.4, cap=100.0, scale=5.0,
                          params=p_s)
    ctrl_s = StepControl(t_end=2e-3, dt_init=1e-8, dt_min=1e-12, dt_max=1e-3,
                         cfl_safety=0.4, sample_interval=1e-4)
    res_s = run(prof_s.on_grid(g_s), p_s, g_s, ctrl_s)
    psis, totals = [], []
    for u in res_s.u_samples:
        v, w = solve_signals(g_s, u, p_s)
        psis.append(psi(g_s, u, 2.0))
        totals.append(energy_decomposition(g_s, u, v, w, p_s, 2.0).total)
    rate = centered_rate(res_s.times, psis)
    rel = np.abs(np.asarray(totals)[1:-1] - rate[1:-1]) / np.maximum(
        np.abs(np.asarray(totals)[1:-1]), np.abs(rate[1:-1]))
    checks.append(_below("energy_identity", float(np.max(rel)), 0.02))
    return checks


def run_suite(suite: str) -> dict:
    """Execute a suite and return the machine-readable report."""
    if suite not in ("fast", "full"):
        raise ValueError(f"suite must be 'fast' or 'full' (got {suite!r})")
    start = time.perf_counter()
    checks = fast_checks() if suite == "fast" else full_checks()
    return {
        "suite": suite,
        "all_pass": all(c.passed for c in checks),
        "wall_time_s": time.perf_counter() - start,
        "checks": [c.as_dict() for c in checks],
    }


def format_report(report: dict) -> str:
    lines = [f"verify suite={report['suite']} "
             f"wall={report['wall_time_s']:.1f}s"]
    for c in report["checks"]:
        mark = "PASS" if c["pass"] else "FAIL"
        lines.append(f"  [{mark}] {c['name']}: margin={c['margin']:.3e} "
                     f"tol={c['tol']:.3e} {c['detail']}")
    lines.append("ALL PASS" if report["all_pass"] else "FAILURES PRESENT")
    return "\n".join(lines)


def write_report(report: dict, path) -> None:
    with open(path, "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
