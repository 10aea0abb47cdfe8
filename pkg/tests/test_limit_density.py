import math

import numpy as np
import pytest

from orliczfrac import (
    InvalidParameterError,
    UnsupportedDimensionError,
    equivalence_constants,
    limit_density,
    make_combination,
    make_power,
    make_power_abslog,
    make_power_log,
    sphere_log_moment,
    sphere_moment,
    tilde_closed_form,
    tilde_eval,
    tilde_prelimit,
)


class TestSphereMoments:
    def test_zero_sphere_is_two_points(self):
        assert sphere_moment(1, 0.7) == 2.0
        assert sphere_moment(1, 3.0) == 2.0

    def test_circle_second_moment(self):
        assert sphere_moment(2, 2.0) == pytest.approx(math.pi, abs=1e-10)

    def test_sphere_second_moment(self):
        assert sphere_moment(3, 2.0) == pytest.approx(4.0 * math.pi / 3.0,
                                                      abs=1e-10)

    def test_sphere_moment_closed_form(self):
        # n = 3 reduces to 4*pi/(p+1)
        for p in (1.5, 2.0, 3.7):
            assert sphere_moment(3, p) == pytest.approx(
                4.0 * math.pi / (p + 1.0), rel=1e-10)

    def test_log_moment(self):
        assert sphere_log_moment(1, 2.0) == 0.0
        assert sphere_log_moment(3, 2.0) == pytest.approx(
            4.0 * math.pi / 9.0, rel=1e-10)

    def test_unsupported_dimension(self):
        with pytest.raises(UnsupportedDimensionError):
            sphere_moment(4, 2.0)


class TestTildeEval:
    def test_square_n1(self):
        # a^p K_{n,p} / p with K_{1,2} = 2
        G = make_power(2.0)
        assert tilde_eval(G, 1, 2.0) == pytest.approx(4.0, rel=1e-9)

    def test_zero_argument(self):
        assert tilde_eval(make_power(2.0), 1, 0.0) == 0.0

    def test_abslog_unit(self):
        # direct route: 2 * int_0^1 tau |log tau| dtau = 1/2
        G = make_power_abslog(2.0)
        assert tilde_eval(G, 1, 1.0) == pytest.approx(0.5, rel=1e-9)

    def test_abslog_above_one(self):
        # exact piecewise value 4 log 2 - 1 at a = 2, n = 1
        G = make_power_abslog(2.0)
        assert tilde_eval(G, 1, 2.0) == pytest.approx(
            4.0 * math.log(2.0) - 1.0, rel=1e-8)

    def test_negative_rejected(self):
        with pytest.raises(InvalidParameterError):
            tilde_eval(make_power(2.0), 1, -1.0)


class TestPrelimit:
    def test_power_is_s_free(self):
        G = make_power(2.0)
        for s in (0.5, 0.9):
            assert tilde_prelimit(G, 1, 1.0, s) == pytest.approx(1.0,
                                                                 rel=1e-8)

    def test_zero(self):
        assert tilde_prelimit(make_power(2.0), 1, 0.0, 0.5) == 0.0

    def test_matches_substituted_form_for_kinked_kind(self):
        # the change of variables is exact, so the pre-limit agrees with the
        # substituted evaluation at every s, for every growth function
        G = make_power_log(2.0)
        ref = tilde_eval(G, 2, 1.5)
        for s in (0.3, 0.7, 0.95):
            assert tilde_prelimit(G, 2, 1.5, s) == pytest.approx(ref,
                                                                 rel=1e-6)

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_upper_bound_by_surface_measure(self, n):
        # (1-s) * pre-limit <= n omega_n G(a) for every tested s
        G = make_power_log(2.0)
        surface = {1: 2.0, 2: 2.0 * math.pi, 3: 4.0 * math.pi}[n]
        for a in (0.3, 1.0, 3.0):
            cap = surface * float(G(a))
            for s in (0.3, 0.6, 0.9):
                assert tilde_prelimit(G, n, a, s) <= cap * (1.0 + 1e-9)


class TestClosedForms:
    def test_power_example(self):
        assert tilde_closed_form("power", (2.0,), 1, 3.0) == pytest.approx(
            9.0)

    def test_max_small_argument(self):
        assert tilde_closed_form("max_powers", (2.0, 3.0), 1, 0.5) == \
            pytest.approx(0.25)

    def test_max_large_argument(self):
        # 2 a^p/p + 2 (1/q - 1/p) on the two-point sphere
        assert tilde_closed_form("max_powers", (2.0, 3.0), 1, 2.0) == \
            pytest.approx(17.0 / 3.0, rel=1e-12)

    def test_log_family_unit(self):
        assert tilde_closed_form("power_log", (2.0,), 1, 1.0) == \
            pytest.approx(0.5)

    def test_max_needs_ordered_exponents(self):
        with pytest.raises(InvalidParameterError):
            tilde_closed_form("max_powers", (3.0, 2.0), 1, 1.0)

    def test_unknown_kind(self):
        with pytest.raises(InvalidParameterError):
            tilde_closed_form("exotic", (2.0,), 1, 1.0)

    @pytest.mark.parametrize("n", [1, 2, 3])
    @pytest.mark.parametrize("a", [0.5, 1.0, 2.5])
    def test_quadrature_agreement(self, n, a):
        G = make_power_abslog(1.5)
        quad = tilde_eval(G, n, a)
        closed = tilde_closed_form("power_log", (1.5,), n, a)
        assert quad == pytest.approx(closed, rel=1e-7)


class TestStructure:
    def test_linearity(self):
        G1, G2 = make_power(2.0), make_power(3.0)
        G = make_combination("sum", [G1, G2], [0.5, 2.0])
        for a in (0.3, 1.0, 4.0):
            expected = 0.5 * tilde_eval(G1, 1, a) + 2.0 * tilde_eval(G2, 1, a)
            assert tilde_eval(G, 1, a) == pytest.approx(expected, rel=1e-8)

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_equivalence_bounds(self, n):
        G = make_power_log(3.0)
        c1, c2 = equivalence_constants(G, n)
        assert 0.0 < c1 < c2
        for a in np.logspace(-2, 2, 15):
            val = tilde_eval(G, n, float(a))
            ga = float(G(a))
            assert c1 * ga <= val * (1.0 + 1e-9)
            assert val <= c2 * ga * (1.0 + 1e-9)

    def test_density_is_monotone_convex_on_grid(self):
        dens = limit_density(make_power_log(3.0), 1, backing="quadrature")
        a = np.linspace(0.05, 5.0, 41)
        vals = np.array([dens.value(x) for x in a])
        assert np.all(np.diff(vals) > 0.0)
        mid = np.array([dens.value(x) for x in 0.5 * (a[:-1] + a[1:])])
        assert np.all(mid <= 0.5 * (vals[:-1] + vals[1:]) + 1e-10)


class TestLimitDensityObject:
    def test_closed_form_backing_detected(self):
        dens = limit_density(make_power(2.0), 1)
        assert dens.backing == "closed_form"
        assert dens.value(2.0) == pytest.approx(4.0)

    def test_quadrature_backing(self):
        dens = limit_density(make_power_log(2.0), 1)
        assert dens.backing == "quadrature"
        assert dens.value(1.0) > 0.0

    def test_derivative_formula(self):
        # d/da tilde(a) = sphere integral of G(a |w|) / a; for t^2 and n = 1
        # this is 2a, matching the closed form a^2 * K/2 = a^2
        dens = limit_density(make_power(2.0), 1)
        assert dens.deriv(1.5) == pytest.approx(3.0, rel=1e-10)

    def test_wrapping_keeps_growth_interface(self):
        tilde = limit_density(make_power(2.0), 1).as_orlicz()
        x = np.array([0.0, 0.5, 2.0])
        assert tilde(x) == pytest.approx([0.0, 0.25, 4.0])
        assert tilde.doubling_constant == pytest.approx(4.0)

    def test_closed_form_refused_when_unavailable(self):
        with pytest.raises(InvalidParameterError):
            limit_density(make_power_log(2.0), 1, backing="closed_form")
