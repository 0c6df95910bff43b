import math

import numpy as np
import pytest

from raptorlab.asymptotic import (bernoulli_numbers, beta_min,
                                  distribution_moment, hilbert_inverse_exact,
                                  hilbert_matrix, hilbert_moment_distribution,
                                  omega_infinity, phi_derivative_at_zero,
                                  phi_inverse_derivative_at_zero,
                                  small_degree_fractions,
                                  tanh_series_coefficient)
from raptorlab.numerics import (FOUR_LN2, NumericalRangeError, one_minus_phi,
                                phi, phi_inv)

LN2 = math.log(2)


class TestBernoulli:
    def test_table_values(self):
        b = bernoulli_numbers(8)
        assert b[2] == pytest.approx(1 / 6)
        assert b[4] == pytest.approx(-1 / 30)
        assert b[6] == pytest.approx(1 / 42)

    def test_tanh_series_matches_direct_evaluation(self):
        xs = np.linspace(-0.5, 0.5, 11)
        approx = sum(float(tanh_series_coefficient(n)) * xs ** (2 * n - 1)
                     for n in range(1, 16))
        assert np.max(np.abs(approx - np.tanh(xs))) < 1e-10


class TestPhiDerivatives:
    def test_exact_small_orders(self):
        # Maclaurin x/2 - x^2/4 + 5x^3/24 - 13x^4/48 + 227x^5/480 times i!
        assert phi_derivative_at_zero(0) == 0.0
        assert phi_derivative_at_zero(1) == pytest.approx(0.5)
        assert phi_derivative_at_zero(2) == pytest.approx(-0.5)
        assert phi_derivative_at_zero(3) == pytest.approx(1.25)
        assert phi_derivative_at_zero(5) == pytest.approx(56.75)

    def test_against_finite_differences(self):
        # Richardson-extrapolated central differences on phi at x0 = 0.03
        # (phi only exists for x >= 0) versus the Taylor shift of the
        # exact derivatives at zero: an independent route through phi itself
        x0, h = 0.03, 0.01
        for order in (1, 2, 3, 4):
            expected = sum(phi_derivative_at_zero(order + j) * x0 ** j
                           / math.factorial(j) for j in range(6))
            def dcentral(step):
                offsets = {1: [(0.5, step), (-0.5, -step)],
                           2: [(1.0, step), (-2.0, 0.0), (1.0, -step)],
                           3: [(0.5, 2 * step), (-1.0, step), (1.0, -step),
                               (-0.5, -2 * step)],
                           4: [(1.0, 2 * step), (-4.0, step), (6.0, 0.0),
                               (-4.0, -step), (1.0, -2 * step)]}[order]
                return sum(c * phi(x0 + off) for c, off in offsets) / step ** order
            coarse, fine = dcentral(h), dcentral(h / 2)
            richardson = fine + (fine - coarse) / 3.0
            assert richardson == pytest.approx(expected, rel=0.01)

    def test_order_cap(self):
        with pytest.raises(NumericalRangeError):
            phi_derivative_at_zero(13)


class TestSmallDegreeFractions:
    def test_closed_forms(self):
        f = small_degree_fractions(5)
        assert f[2] == pytest.approx(1 / (4 * LN2), abs=1e-12)
        assert f[3] == pytest.approx(1 / (6 * LN2), abs=1e-12)
        assert f[4] == pytest.approx(1 / (24 * LN2), abs=1e-12)
        assert f[5] == pytest.approx(1 / (10 * LN2), abs=1e-12)

    def test_partial_mass(self):
        assert sum(small_degree_fractions(5).values()) == pytest.approx(0.8055,
                                                                        abs=5e-4)
        assert sum(small_degree_fractions(5).values()) < 1.0

    def test_inverse_derivatives(self):
        assert phi_inverse_derivative_at_zero(1) == pytest.approx(2.0)
        assert phi_inverse_derivative_at_zero(2) == pytest.approx(4.0)
        assert phi_inverse_derivative_at_zero(3) == pytest.approx(4.0)
        assert phi_inverse_derivative_at_zero(4) == pytest.approx(48.0)

    def test_beyond_degree_five_rejected(self):
        with pytest.raises(NumericalRangeError):
            small_degree_fractions(6)


class TestOmegaInfinity:
    def test_endpoints(self):
        assert omega_infinity(0.0) == 0.0
        assert omega_infinity(1.0) == pytest.approx(1.0, abs=1e-3)

    def test_monotone_convex(self):
        xs = np.linspace(0.0, 0.99, 25)
        vals = np.array([omega_infinity(float(x)) for x in xs])
        d = np.diff(vals)
        assert np.all(d > 0)
        assert np.all(np.diff(d) > -1e-9)

    def test_maclaurin_matches_small_fractions(self):
        # numeric x^2, x^3 coefficients of omega_infinity
        h = 1e-2
        vals = {m: omega_infinity(m * h) for m in range(5)}
        c2 = (vals[2] - 2 * vals[1] + vals[0]) / (2 * h ** 2)
        c3 = (vals[3] - 3 * vals[2] + 3 * vals[1] - vals[0]) / (6 * h ** 3)
        assert c2 == pytest.approx(1 / (4 * LN2), abs=1e-2)
        assert c3 == pytest.approx(1 / (6 * LN2), abs=3e-2)

    def test_large_degree_design_tracks_the_limit(self):
        # a D = 1000 optimized polynomial stays within 0.05 of the limit
        # pointwise on [0, 0.9]
        from raptorlab.degree_design import design_practical
        lp = design_practical(1000, 27.0, epsilon=0.0, eta=1.0, point_count=400)
        assert lp.feasible
        for x in np.linspace(0.0, 0.9, 19):
            gap = abs(lp.distribution.evaluate(float(x)) - omega_infinity(float(x)))
            assert gap <= 0.05

    def test_domain(self):
        with pytest.raises(ValueError):
            omega_infinity(1.5)


class TestHilbert:
    def test_inverse_identity_order_six(self):
        h = hilbert_matrix(6)
        hinv = hilbert_inverse_exact(6)
        assert np.max(np.abs(h @ hinv - np.eye(6))) <= 1e-6

    def test_inverse_entries_are_integers(self):
        hinv = hilbert_inverse_exact(5)
        assert np.all(hinv == np.round(hinv))

    def test_zeroth_moment_normalizes(self):
        assert distribution_moment(0) == pytest.approx(1.0, abs=1e-3)

    def test_order_five_recovers_degree_two(self):
        fractions = hilbert_moment_distribution(5)
        assert fractions[2] == pytest.approx(1 / (4 * LN2), abs=0.05)

    def test_order_cap(self):
        with pytest.raises(NumericalRangeError):
            hilbert_moment_distribution(9)
        with pytest.raises(NumericalRangeError):
            hilbert_moment_distribution(1)


class TestBetaMin:
    def test_inverse_cancellation(self):
        for mu in (5.0, 17.0, 40.0):
            delta = float(one_minus_phi(mu))
            assert beta_min(delta) == pytest.approx(mu / FOUR_LN2, rel=1e-8)

    def test_monotone_as_delta_shrinks(self):
        vals = [beta_min(d) for d in (1e-2, 1e-3, 1e-4)]
        assert vals == sorted(vals)

    def test_searched_design_consistency(self):
        # the D=100 searched design: delta ~ 0.0034, beta 7.6878 from the
        # optimizer must exceed the floor
        floor = beta_min(0.0034)
        assert floor == pytest.approx(phi_inv(1 - 0.0034) / FOUR_LN2)
        assert floor < 7.6878

    def test_domain(self):
        for bad in (0.0, 1.0, -0.5):
            with pytest.raises(ValueError):
                beta_min(bad)
