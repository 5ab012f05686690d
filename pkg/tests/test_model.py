import math

import numpy as np
import pytest
from scipy.integrate import quad, solve_ivp

from chemoblow import (ParameterError, ball_volume, m_star, make_profile,
                       sphere_area, validate_params)


def params_dict(**over):
    base = dict(lam=0.0, mu=1.0, k=1.1, chi=1.0, xi=1.0, alpha=1.0, beta=1.0,
                gamma=1.0, delta=1.0, n=3, R=1.0)
    base.update(over)
    return base


class TestValidateParams:
    def test_k_range_flag_n3(self):
        p = validate_params(params_dict(n=3, k=1.1))
        assert p.k_in_blowup_range  # 1.1 < 7/6

    def test_k_range_flag_n5(self):
        p = validate_params(params_dict(n=5, k=1.2))
        assert not p.k_in_blowup_range  # 1.2 >= 1 + 1/8

    def test_k_range_boundary(self):
        assert not validate_params(params_dict(n=4, k=7.0 / 6.0)).k_in_blowup_range
        assert validate_params(params_dict(n=5, k=1.12)).k_in_blowup_range

    def test_mu_zero_rejected(self):
        with pytest.raises(ParameterError, match="mu"):
            validate_params(params_dict(mu=0.0))

    def test_all_violations_collected(self):
        with pytest.raises(ParameterError) as err:
            validate_params(params_dict(mu=-1.0, k=0.5, n=2, chi=0.0))
        text = str(err.value)
        for field in ("mu", "k", "n", "chi"):
            assert field in text

    def test_idempotent(self):
        p = validate_params(params_dict(lam=-2.0, k=1.5))
        assert validate_params(p) == p

    def test_dominance(self):
        p = validate_params(params_dict(chi=2.0, alpha=1.0, xi=1.0, gamma=0.5))
        assert p.dominance == pytest.approx(1.5)

    def test_omega_volume(self):
        p = validate_params(params_dict(n=3, R=1.0))
        assert p.omega_volume == pytest.approx(4.0 * math.pi / 3.0, rel=1e-14)
        assert ball_volume(4, 2.0) == pytest.approx(
            math.pi**2 * 16.0 / 2.0, rel=1e-14)


class TestProfiles:
    def test_singular_capped_pointwise(self):
        p = validate_params(params_dict())
        prof = make_profile("singular_capped", L=1.0, cap=1e6, scale=1.0,
                            params=p)
        assert prof.evaluate(0.5) == pytest.approx(64.0)   # min(0.5^-6, 1e6)
        assert prof.evaluate(0.0) == pytest.approx(1e6)    # cap at the origin
        r = np.linspace(1e-6, 1.0, 1000)
        assert np.all(prof.evaluate(r) * r ** 6 <= 1.0 + 1e-12)

    def test_singular_capped_total_mass_fixture(self):
        # frozen value from the adaptive-quadrature oracle; the closed form
        # 4*pi*(cap*rs^3/3 + (rs^-3 - 1)/3) with rs = 0.1 gives the same
        p = validate_params(params_dict())
        prof = make_profile("singular_capped", L=1.0, cap=1e6, scale=1.0,
                            params=p)
        assert prof.total_mass() == pytest.approx(8373.391619367994, rel=1e-9)
        analytic = 4.0 * math.pi * (1e6 * 1e-3 / 3.0 + (1e3 - 1.0) / 3.0)
        assert prof.total_mass() == pytest.approx(analytic, rel=1e-9)

    def test_mass_within_oracle(self):
        p = validate_params(params_dict())
        prof = make_profile("singular_capped", L=1.0, cap=1e4, scale=2.0,
                            params=p)
        rho = 0.3
        val, _ = quad(lambda r: r**2 * float(prof.evaluate(r)), 0.0, rho,
                      points=[1e-4 ** (1.0 / 6.0)])
        assert prof.mass_within(rho) == pytest.approx(4.0 * math.pi * val,
                                                      rel=1e-8)

    def test_grid_sampling_matches_evaluate(self):
        from chemoblow import build_grid
        p = validate_params(params_dict())
        prof = make_profile("gaussian_bump", L=0.4, cap=10.0, scale=3.0,
                            params=p)
        g = build_grid(3, 1.0, 32)
        assert np.allclose(prof.on_grid(g), prof.evaluate(g.centers))

    def test_constant_profile(self):
        p = validate_params(params_dict())
        prof = make_profile("constant", L=1.0, cap=1.0, scale=0.7, params=p)
        assert np.all(prof.evaluate(np.linspace(0, 1, 5)) == 0.7)
        assert prof.total_mass() == pytest.approx(0.7 * p.omega_volume,
                                                  rel=1e-10)

    @pytest.mark.parametrize("field", ["L", "cap", "scale"])
    def test_nonpositive_amplitudes_rejected(self, field):
        p = validate_params(params_dict())
        kwargs = dict(L=1.0, cap=1.0, scale=1.0)
        kwargs[field] = 0.0
        with pytest.raises(ParameterError, match=field):
            make_profile("singular_capped", params=p, **kwargs)

    def test_unknown_kind_rejected(self):
        p = validate_params(params_dict())
        with pytest.raises(ParameterError, match="kind"):
            make_profile("plateau", L=1.0, cap=1.0, scale=1.0, params=p)


class TestMStar:
    def test_negative_growth_keeps_initial_mass(self):
        p = validate_params(params_dict(lam=-1.0))
        assert m_star(p, 2.0) == 2.0

    def test_unit_volume_case(self):
        # lam = mu = 1, k = 2 on a unit-volume ball: capacity branch is 1
        R_unit = (1.0 / ball_volume(3, 1.0)) ** (1.0 / 3.0)
        p = validate_params(params_dict(lam=1.0, mu=1.0, k=2.0, R=R_unit))
        assert p.omega_volume == pytest.approx(1.0, rel=1e-14)
        assert m_star(p, 0.5) == pytest.approx(1.0, rel=1e-14)

    def test_capacity_branch_and_ode_steady_state(self):
        p = validate_params(params_dict(lam=2.0, mu=1.0, k=1.5))
        expected = 4.0 * (4.0 * math.pi / 3.0)   # (lam/mu)^{1/(k-1)} |Omega|
        value = m_star(p, 0.0)
        assert value == pytest.approx(expected, rel=1e-14)

        # independent check: the comparison ODE settles at the same level
        mu_bar = p.mu * p.omega_volume ** (1.0 - p.k)
        sol = solve_ivp(lambda t, y: [p.lam * y[0] - mu_bar * y[0] ** p.k],
                        (0.0, 200.0), [1.0], rtol=1e-10, atol=1e-12)
        assert sol.y[0, -1] == pytest.approx(expected, rel=1e-6)

    def test_monotone_in_initial_mass_and_lambda(self):
        p = validate_params(params_dict(lam=1.0, mu=1.0, k=2.0))
        masses = [0.0, 1.0, 5.0, 20.0]
        values = [m_star(p, m) for m in masses]
        assert all(b >= a for a, b in zip(values, values[1:]))
        lams = [-1.0, 0.0, 0.5, 2.0]
        values = [m_star(validate_params(params_dict(lam=la, mu=1.0, k=2.0)),
                         1.0) for la in lams]
        assert all(b >= a for a, b in zip(values, values[1:]))

    def test_independent_of_sensitivities(self):
        a = m_star(validate_params(params_dict(lam=1.0, chi=1.0, xi=1.0)), 1.0)
        b = m_star(validate_params(params_dict(lam=1.0, chi=9.0, xi=0.1,
                                               alpha=3.0, gamma=7.0)), 1.0)
        assert a == b

    def test_negative_initial_mass_rejected(self):
        p = validate_params(params_dict())
        with pytest.raises(ValueError):
            m_star(p, -0.1)


def test_sphere_area_matches_volume_derivative():
    for n in (3, 4, 5, 7):
        assert sphere_area(n, 1.0) == pytest.approx(n * ball_volume(n, 1.0),
                                                    rel=1e-13)
