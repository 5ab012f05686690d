import math

import numpy as np
import pytest
from scipy.integrate import quad

from chemoblow import (MomentConfig, build_grid, check_mass_bound,
                       cumulative_profile, energy_decomposition, gn_ratio,
                       phi, phi_growth_report, psi, validate_params)
from chemoblow.functionals import SignalConsistencyError, centered_rate
from chemoblow.solver import solve_signals


def make_params(**over):
    base = dict(lam=0.5, mu=1.0, k=1.5, chi=1.0, xi=0.5, alpha=1.0, beta=1.0,
                gamma=1.0, delta=1.0, n=3, R=1.0)
    base.update(over)
    return validate_params(base)


class TestPsi:
    def test_unit_constant(self):
        g = build_grid(3, 1.0, 128)
        assert psi(g, np.ones(128), 2.0) == pytest.approx(
            0.5 * 4.0 * math.pi / 3.0, rel=1e-12)

    def test_zero_field(self):
        g = build_grid(3, 1.0, 64)
        assert psi(g, np.zeros(64), 2.5) == 0.0

    def test_homogeneity(self):
        g = build_grid(3, 1.0, 128, "geometric", 0.99)
        rng = np.random.default_rng(0)
        u = rng.random(128)
        for sigma in (1.5, 2.0, 3.0):
            assert psi(g, 2.0 * u, sigma) == pytest.approx(
                2.0**sigma * psi(g, u, sigma), rel=1e-12)

    def test_sigma_validation(self):
        g = build_grid(3, 1.0, 64)
        with pytest.raises(ValueError):
            psi(g, np.ones(64), 1.0)


class TestPhi:
    def test_linear_profile_closed_form(self):
        g = build_grid(3, 1.0, 512, "geometric", 0.995)
        cfg = MomentConfig(p=2.0 / 3.0, s0=0.125)
        c = 2.5
        U = c * g.s_nodes / 3.0
        expected = (c / 3.0) * cfg.s0 ** (3.0 - cfg.p) \
            * (1.0 / (2.0 - cfg.p) - 1.0 / (3.0 - cfg.p))
        assert phi(g.s_nodes, U, cfg) == pytest.approx(expected, rel=1e-12)

    def test_zero_profile(self):
        g = build_grid(3, 1.0, 64)
        assert phi(g.s_nodes, np.zeros(65), MomentConfig(0.5, 0.1)) == 0.0

    def test_adaptive_quadrature_oracle(self):
        # same integrand (the piecewise-linear interpolant), independent
        # integrator: per-interval adaptive quadrature
        g = build_grid(3, 1.0, 256, "geometric", 0.99)
        u = 40.0 * np.exp(-((g.centers / 0.3) ** 2)) + 1.0
        U = cumulative_profile(g, u)
        cfg = MomentConfig(p=2.0 / 3.0, s0=0.125)
        direct = phi(g.s_nodes, U, cfg)

        oracle = 0.0
        inner = g.s_nodes[g.s_nodes < cfg.s0]
        edges = np.concatenate((inner, [cfg.s0]))
        for a, b in zip(edges[:-1], edges[1:]):
            val, _ = quad(lambda s: s ** (-cfg.p) * (cfg.s0 - s)
                          * np.interp(s, g.s_nodes, U), a, b, limit=100)
            oracle += val
        assert direct == pytest.approx(oracle, rel=1e-6)

    def test_linearity(self):
        g = build_grid(3, 1.0, 128)
        rng = np.random.default_rng(4)
        U1 = np.concatenate(([0.0], np.cumsum(rng.random(128))))
        U2 = np.concatenate(([0.0], np.cumsum(rng.random(128))))
        cfg = MomentConfig(p=0.6, s0=0.25)
        lhs = phi(g.s_nodes, 2.0 * U1 + 3.0 * U2, cfg)
        rhs = 2.0 * phi(g.s_nodes, U1, cfg) + 3.0 * phi(g.s_nodes, U2, cfg)
        assert lhs == pytest.approx(rhs, rel=1e-10)

    def test_s0_validation(self):
        g = build_grid(3, 1.0, 64)
        with pytest.raises(ValueError):
            phi(g.s_nodes, np.zeros(65), MomentConfig(0.5, 2.0))

    def test_moment_config_ranges(self):
        p = make_params(n=3)
        MomentConfig(p=0.5, s0=0.125).validate(p)
        with pytest.raises(ValueError):
            MomentConfig(p=0.2, s0=0.125).validate(p)   # below 1 - 2/3
        with pytest.raises(ValueError):
            MomentConfig(p=1.0, s0=0.125).validate(p)
        with pytest.raises(ValueError):
            MomentConfig(p=0.5, s0=1.5).validate(p)


class TestEnergyDecomposition:
    def test_constant_state_closed_form(self):
        p = make_params(lam=0.7, mu=0.4, k=1.5, chi=2.0, xi=1.5)
        g = build_grid(3, 1.0, 128)
        sigma = 2.0
        c = 3.0
        u = np.full(128, c)
        v, w = solve_signals(g, u, p)
        dec = energy_decomposition(g, u, v, w, p, sigma)
        omega = g.volumes.sum()
        assert abs(dec.I1) <= 1e-12
        assert abs(dec.I2) <= 1e-9 * abs(dec.I4)   # alpha*c - beta*(alpha c/beta)
        assert abs(dec.I3) <= 1e-9 * abs(dec.I4)
        assert dec.I4 == pytest.approx(p.lam * c**sigma * omega, rel=1e-12)
        assert dec.I5 == pytest.approx(-p.mu * c ** (sigma + p.k - 1.0) * omega,
                                       rel=1e-12)

    def test_rejects_inconsistent_signals(self):
        p = make_params()
        g = build_grid(3, 1.0, 64)
        u = np.exp(-g.centers)
        v, w = solve_signals(g, u, p)
        with pytest.raises(SignalConsistencyError):
            energy_decomposition(g, u, v * 1.05, w, p, 2.0)

    def test_identity_on_smooth_scenarios(self, suite_runs):
        # |sum I_i - d(psi)/dt| within 2 percent along smooth windows
        names = ("decay_dom_neg", "growth_dom_pos", "decay_dom_pos")
        for name in names:
            bundle = suite_runs[name]
            res = bundle["result"]
            p = bundle["scenario"].params
            sigma = bundle["scenario"].sigma
            psis, totals = [], []
            for u in res.u_samples:
                v, w = solve_signals(res.grid, u, p)
                psis.append(psi(res.grid, u, sigma))
                totals.append(
                    energy_decomposition(res.grid, u, v, w, p, sigma).total)
            rate = centered_rate(res.times, psis)
            totals = np.asarray(totals)
            rel = np.abs(totals[1:-1] - rate[1:-1]) \
                / np.maximum(np.abs(totals[1:-1]), np.abs(rate[1:-1]))
            assert np.max(rel) <= 0.02, name

    def test_signs_on_every_sample_of_every_scenario(self, suite_runs):
        for name, bundle in suite_runs.items():
            res = bundle["result"]
            p = bundle["scenario"].params
            sigma = bundle["scenario"].sigma
            for j, u in enumerate(res.u_samples):
                v, w = solve_signals(res.grid, u, p)
                dec = energy_decomposition(res.grid, u, v, w, p, sigma)
                slack = 1e-12 * max(abs(dec.I1), abs(dec.I2), 1.0)
                assert dec.I1 <= 0.0, (name, j)
                assert dec.I5 <= 0.0, (name, j)
                assert dec.I3 <= slack, (name, j)

    def test_gn_ratio_positive_and_dominated(self):
        p = make_params()
        g = build_grid(3, 1.0, 128)
        u = 10.0 * np.exp(-((g.centers / 0.3) ** 2)) + 0.5
        r = gn_ratio(g, u, 2.0)
        assert 0.0 < r < 10.0   # default configured constant dominates it


class TestMassBound:
    def test_decaying_mass_stays_below_m_star(self, suite_runs):
        bundle = suite_runs["decay_dom_neg"]
        res = bundle["result"]
        masses = [res.grid.integrate(u) for u in res.u_samples]
        report = check_mass_bound(res.times, masses, bundle["scenario"].params)
        assert report.max_margin <= 0.0
        assert report.max_ode_excess <= 1e-6

    def test_equality_at_logistic_equilibrium(self):
        p = make_params(lam=1.0, mu=1.0, k=2.0, chi=1e-12, xi=1e-12)
        g = build_grid(3, 1.0, 64)
        mass = g.integrate(np.ones(64))   # exactly the capacity mass
        report = check_mass_bound(np.array([0.0, 1.0, 2.0]),
                                  np.array([mass, mass, mass]), p)
        assert report.m_star == pytest.approx(mass, rel=1e-12)
        assert report.max_margin <= 1e-12 * mass
        assert report.max_ode_excess <= 1e-9

    def test_empty_trajectory_rejected(self):
        with pytest.raises(ValueError):
            check_mass_bound([], [], make_params())


class TestPhiGrowth:
    def test_positive_on_blowup_run(self, reference_run):
        scenario = reference_run["scenario"]
        res = reference_run["result"]
        phis = [phi(res.grid.s_nodes, cumulative_profile(res.grid, u),
                    scenario.moment) for u in res.u_samples]
        report = phi_growth_report(res.times, phis, scenario.moment,
                                   scenario.params,
                                   (0.0, min(0.5, res.t_num)))
        assert report.infimum > 0.0
        assert report.flagged == 0
        assert "dominance_not_positive" not in report.hypothesis_flags

    def test_decaying_run_flags_hypothesis(self, suite_runs):
        bundle = suite_runs["decay_dom_neg"]
        res = bundle["result"]
        scenario = bundle["scenario"]
        phis = [phi(res.grid.s_nodes, cumulative_profile(res.grid, u),
                    scenario.moment) for u in res.u_samples]
        report = phi_growth_report(res.times, phis, scenario.moment,
                                   scenario.params, (0.0, 0.5))
        assert "dominance_not_positive" in report.hypothesis_flags

    def test_scaling_identity(self):
        g = build_grid(3, 1.0, 128)
        rng = np.random.default_rng(8)
        U = np.concatenate(([0.0], np.cumsum(rng.random(128))))
        cfg = MomentConfig(p=0.5, s0=0.3)
        assert phi(g.s_nodes, 3.0 * U, cfg) == pytest.approx(
            3.0 * phi(g.s_nodes, U, cfg), rel=1e-12)

    def test_zero_phi_samples_skipped_and_flagged(self):
        cfg = MomentConfig(p=0.5, s0=0.3)
        times = np.array([0.0, 1e-3, 2e-3, 3e-3, 4e-3])
        phis = np.array([0.5, 0.0, 0.7, 0.8, 0.9])   # dead sample inside
        report = phi_growth_report(times, phis, cfg, make_params(chi=5.0),
                                   (0.0, 0.5))
        assert report.flagged == 1
        assert "zero_phi_samples_skipped" in report.hypothesis_flags
        assert np.all(np.isfinite(report.ratios))


def test_centered_rate_nonuniform():
    t = np.array([0.0, 1.0, 3.0, 4.0])
    y = 2.0 * t + 1.0
    rate = centered_rate(t, y)
    assert math.isnan(rate[0]) and math.isnan(rate[-1])
    assert rate[1] == pytest.approx(2.0) and rate[2] == pytest.approx(2.0)
