import numpy as np
import pytest

from hjholder.core import EquationParams
from hjholder.errors import DomainError, EmptyBoundary, WindowTooSmall
from hjholder.variational import (
    hopf_lax_eval,
    legendre_brute,
    legendre_closed,
    sample_parabolic_boundary,
    semi_lax_upper_bound,
)


def brute_radius(p, A, q):
    return 2.0 * (max(abs(q), 1e-3) / (p * A)) ** (1.0 / (p - 1.0))


class TestLegendreClosed:
    def test_quadratic_coefficient(self):
        lag = legendre_closed(2.0, 1.0)
        assert lag.c_p == 0.25
        assert lag(2.0) == pytest.approx(1.0)

    def test_cubic_coefficient(self):
        lag = legendre_closed(3.0, 1.0)
        assert lag.c_p == pytest.approx(2.0 * 3.0**-1.5, rel=1e-14)

    def test_value_at_zero_is_minus_shift(self):
        for shift in (-0.3, 0.0, 0.7):
            lag = legendre_closed(2.5, 1.3, shift)
            assert lag(0.0) == pytest.approx(-shift)

    def test_reciprocal_coefficient_convention(self):
        # H = -eps + (1/A)|xi|^p  ->  L = eps + c_p A^{p'-1} |r|^{p'}
        A, eps = 2.0, 0.1
        lag = legendre_closed(3.0, 1.0 / A, -eps)
        assert lag.shift == pytest.approx(eps)
        assert lag.coeff_A_power == pytest.approx(A ** (lag.p_prime - 1.0))

    def test_rejects_bad_args(self):
        with pytest.raises(DomainError):
            legendre_closed(1.0, 1.0)
        with pytest.raises(DomainError):
            legendre_closed(2.0, 0.0)


class TestLegendreBrute:
    def test_zero_velocity(self):
        assert legendre_brute(2.0, 1.0, 0.4, 0.0, 1.0) == pytest.approx(-0.4)

    def test_quadratic_closed_form(self):
        got = legendre_brute(2.0, 1.0, 0.0, 2.0, 4.0, 100_001)
        assert got == pytest.approx(1.0, abs=1e-6)

    def test_quadratic_with_coefficient(self):
        got = legendre_brute(2.0, 2.0, 0.0, 2.0, 4.0, 100_001)
        assert got == pytest.approx(0.5, abs=1e-6)

    def test_window_too_small(self):
        with pytest.raises(WindowTooSmall):
            legendre_brute(2.0, 1.0, 0.0, 10.0, 1.0, 1001)

    def test_rejects_few_samples(self):
        with pytest.raises(DomainError):
            legendre_brute(2.0, 1.0, 0.0, 1.0, 2.0, 10)

    @pytest.mark.parametrize("p", [1.5, 2.0, 3.0, 4.0])
    @pytest.mark.parametrize("A", [0.5, 1.0, 2.0])
    def test_oracle_agreement_spot(self, p, A):
        lag = legendre_closed(p, A)
        for q in (-7.0, -1.0, 0.5, 3.0):
            brute = legendre_brute(p, A, 0.0, q, brute_radius(p, A, q), 200_001)
            assert abs(lag(q) - brute) <= 1e-6

    def test_young_inequality(self):
        p, A = 3.0, 1.5
        lag = legendre_closed(p, A)
        rng = np.random.default_rng(2)
        for _ in range(100):
            q, xi = rng.uniform(-5, 5, 2)
            assert q * xi <= A * abs(xi) ** p + lag(q) + 1e-12
        for q in (0.5, 2.0, -3.0):
            xi_star = np.sign(q) * (abs(q) / (p * A)) ** (1.0 / (p - 1.0))
            gap = A * abs(xi_star) ** p + lag(q) - q * xi_star
            assert abs(gap) <= 1e-10


class TestHopfLax:
    def test_zero_bottom_data(self):
        # x on the sample lattice: the minimizer y = x, s = t0 is hit exactly
        lag = legendre_closed(2.0, 1.0)
        bnd = sample_parabolic_boundary(lambda y, s: 0.0 if abs(y[0]) < 7.9 else 5.0,
                                        8.0, 0.0, 1.0, d=1, bottom_spacing=1 / 64)
        assert hopf_lax_eval(bnd, lag, [0.25], 0.7) == pytest.approx(0.0, abs=1e-12)

    def test_moreau_envelope_of_abs(self):
        lag = legendre_closed(2.0, 1.0)
        bnd = sample_parabolic_boundary(lambda y, s: float(np.abs(y[0])),
                                        8.0, 0.0, 1.0, d=1, bottom_spacing=1 / 512)
        for x in np.linspace(-3, 3, 20):
            exact = x * x / 4.0 if abs(x) <= 2.0 else abs(x) - 1.0
            assert hopf_lax_eval(bnd, lag, [x], 1.0) == pytest.approx(exact, abs=1e-4)

    def test_quadratic_bottom_closed_form(self):
        lag = legendre_closed(2.0, 1.0)
        bnd = sample_parabolic_boundary(lambda y, s: float(y[0] ** 2),
                                        8.0, 0.0, 1.0, d=1, bottom_spacing=1 / 512)
        for x, t in ((0.3, 0.5), (-1.2, 0.25), (0.9, 1.0)):
            assert hopf_lax_eval(bnd, lag, [x], t) == pytest.approx(
                x * x / (1 + 4 * t), abs=2e-4
            )

    def test_min_property(self):
        lag = legendre_closed(2.0, 1.0)
        bnd = sample_parabolic_boundary(lambda y, s: float(np.cos(y[0])),
                                        2.0, 0.0, 1.0, d=1, bottom_spacing=1 / 32)
        x, t = [0.2], 0.8
        v = hopf_lax_eval(bnd, lag, x, t)
        dt = t - bnd.times
        keep = dt >= 1e-9
        costs = bnd.values[keep] + dt[keep] * lag.value_at_speed(
            np.abs(x[0] - bnd.points[keep, 0]) / dt[keep]
        )
        assert v <= costs.min() + 1e-14

    def test_monotone_in_boundary_data(self):
        lag = legendre_closed(2.0, 1.0)
        low = sample_parabolic_boundary(lambda y, s: float(np.sin(y[0])),
                                        2.0, 0.0, 1.0, d=1, bottom_spacing=1 / 64)
        high = sample_parabolic_boundary(lambda y, s: float(np.sin(y[0])) + 0.2,
                                         2.0, 0.0, 1.0, d=1, bottom_spacing=1 / 64)
        v_low = hopf_lax_eval(low, lag, [0.1], 0.5)
        v_high = hopf_lax_eval(high, lag, [0.1], 0.5)
        assert v_low <= v_high <= v_low + 0.2 + 1e-12

    def test_refinement_never_increases(self):
        # halved spacing yields a superset of candidates, so the min drops
        lag = legendre_closed(2.0, 1.0)
        coarse = sample_parabolic_boundary(lambda y, s: float(np.abs(y[0])),
                                           4.0, 0.0, 1.0, d=1, bottom_spacing=1 / 32)
        fine = sample_parabolic_boundary(lambda y, s: float(np.abs(y[0])),
                                         4.0, 0.0, 1.0, d=1, bottom_spacing=1 / 64)
        for x in (-1.3, 0.4, 2.2):
            assert hopf_lax_eval(fine, lag, [x], 1.0) <= hopf_lax_eval(
                coarse, lag, [x], 1.0
            ) + 1e-14

    def test_dynamic_programming_consistency(self):
        # going through an intermediate slice of itself changes little on
        # smooth data
        lag = legendre_closed(2.0, 1.0)
        bnd = sample_parabolic_boundary(lambda y, s: float(y[0] ** 2),
                                        8.0, 0.0, 1.0, d=1, bottom_spacing=1 / 256)
        s_mid = 0.5
        ys = np.linspace(-4, 4, 513)
        mid_vals = [hopf_lax_eval(bnd, lag, [y], s_mid) for y in ys]
        from hjholder.variational import BoundarySamples

        mid = BoundarySamples(ys.reshape(-1, 1), np.full(len(ys), s_mid), mid_vals)
        for x in (0.0, 0.7, -1.1):
            direct = hopf_lax_eval(bnd, lag, [x], 1.0)
            through = hopf_lax_eval(mid, lag, [x], 1.0)
            assert through == pytest.approx(direct, abs=5e-3)

    def test_empty_boundary(self):
        lag = legendre_closed(2.0, 1.0)
        bnd = sample_parabolic_boundary(lambda y, s: 0.0, 1.0, 0.5, 1.0, d=1)
        with pytest.raises(EmptyBoundary):
            hopf_lax_eval(bnd, lag, [0.0], 0.2)

    def test_two_dimensional_sampling(self):
        lag = legendre_closed(2.0, 1.0)
        bnd = sample_parabolic_boundary(lambda y, s: float(y[0] ** 2 + y[1] ** 2),
                                        4.0, 0.0, 1.0, d=2, bottom_spacing=1 / 16)
        x = np.array([0.3, -0.2])
        t = 0.5
        exact = float(x @ x) / (1 + 4 * t)
        assert hopf_lax_eval(bnd, lag, x, t) == pytest.approx(exact, abs=5e-3)


class TestSemiLaxUpperBound:
    def _params(self):
        return EquationParams(p=3.0, A=1.0, d=1)

    def test_symmetric_minimizer_formula(self):
        params = self._params()
        C, eta, eps, t = 2.0, 1.0, 0.05, 0.7
        ys = np.linspace(-1, 1, 201).reshape(-1, 1)
        vals = np.zeros(201)
        got = semi_lax_upper_bound(ys, vals, C, eta, eps, params, [0.0], t)
        expect = C * t ** (-0.5) * (eta * t) ** (params.p_prime / 2.0) + eps * t
        assert got == pytest.approx(expect, rel=1e-12)

    def test_single_dip_bound(self):
        params = self._params()
        C, eta, eps, t = 2.0, 1.0, 0.05, 0.5
        ys = np.linspace(-1, 1, 201).reshape(-1, 1)
        vals = np.ones(201)
        k0 = 40
        vals[k0] = 0.03
        x = [0.3]
        got = semi_lax_upper_bound(ys, vals, C, eta, eps, params, x, t)
        dist2 = (x[0] - ys[k0, 0]) ** 2
        barrier = C * t ** (-0.5) * (dist2 + eta * t) ** (params.p_prime / 2.0)
        assert got <= 0.03 + barrier + eps * t + 1e-12

    def test_monotone_in_bottom_values(self):
        params = self._params()
        ys = np.linspace(-1, 1, 101).reshape(-1, 1)
        rng = np.random.default_rng(4)
        vals = rng.uniform(0, 1, 101)
        base = semi_lax_upper_bound(ys, vals, 1.0, 1.0, 0.0, params, [0.2], 0.5)
        bumped = semi_lax_upper_bound(ys, vals + 0.1, 1.0, 1.0, 0.0, params, [0.2], 0.5)
        assert base <= bumped <= base + 0.1 + 1e-12

    def test_rejects_subquadratic_and_bad_time(self):
        ys = np.zeros((1, 1))
        with pytest.raises(DomainError):
            semi_lax_upper_bound(ys, [0.0], 1.0, 1.0, 0.0,
                                 EquationParams(p=2.0, A=1.0), [0.0], 0.5)
        with pytest.raises(DomainError):
            semi_lax_upper_bound(ys, [0.0], 1.0, 1.0, 0.0, self._params(), [0.0], 0.0)
