import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import gamma as gamma_fn

from mmwave_ee import kernels
from mmwave_ee.coverage import fbs_tier_at_macro, mbs_tier_at_femto, mbs_tiers_at_macro
from mmwave_ee.distance import EquivalentDistanceMap, r_eq_inv
from mmwave_ee.laplace import (
    InterferenceTier,
    LaplaceExponent,
    QuadratureError,
    UnsupportedOrderError,
    closed_form_constant,
    laplace_derivatives,
    laplace_scaled_from_exponent,
    laplace_value,
    nakagami_conditional_coverage,
    product_exponent,
    tier_scaled_derivatives,
)
from mmwave_ee.model import FadingModel, NetworkParams, horizontal_gain_dist, nakagami_ccdf

from oracles import laplace_by_quad, laplace_fd_scaled, tier_exponent_by_quad

RHO = 50.0
Z_VALUES = (1e9, 1e10, 1e11)


def macro_exponent(m=1, rho=RHO, beta=0.003):
    p = NetworkParams(fading=FadingModel(m))
    p = replace(p, path_loss=replace(p.path_loss, beta_blockage=beta))
    los, nlos = mbs_tiers_at_macro(p)
    dmap = EquivalentDistanceMap.from_model(p.path_loss)
    return product_exponent([los.with_lower(rho), nlos.with_lower(r_eq_inv(rho, dmap))])


class TestValue:
    def test_zero_argument(self):
        assert laplace_value(macro_exponent(), 0.0) == 1.0

    def test_no_interferers(self):
        tiers = [replace(t, density=0.0) for t in macro_exponent().tiers]
        assert laplace_value(LaplaceExponent(tiers), 1e12, 5.0) == 1.0

    @pytest.mark.parametrize("m", [1, 2, 5])
    @pytest.mark.parametrize("z", Z_VALUES)
    @pytest.mark.parametrize("tilt", [0.0, 5.0, 20.0])
    def test_against_adaptive_quadrature(self, m, z, tilt):
        ex = macro_exponent(m)
        assert laplace_value(ex, z, tilt) == pytest.approx(laplace_by_quad(ex, z, tilt), rel=1e-8)

    @pytest.mark.parametrize("m", [1, 3])
    def test_closed_form_matches_quadrature(self, m):
        p = NetworkParams()
        tier = replace(fbs_tier_at_macro(p, 1e-3), fading_m=m)
        z = 1e12
        closed = tier_scaled_derivatives(tier, np.asarray(z), order=0)[0]
        quad = tier_scaled_derivatives(tier, np.asarray(z), order=0, force_quadrature=True)[0]
        assert closed == pytest.approx(quad, rel=1e-6)
        assert closed == pytest.approx(tier_exponent_by_quad(tier, z), rel=1e-6)

    def test_rayleigh_closed_form_constant(self):
        # m = 1, single gain: pi^2 delta / sin(pi delta) form
        gain = horizontal_gain_dist(0, 0, 360, 0, 0, 360)
        tier = InterferenceTier(density=1e-4, tx_power=1.0, c_ref=1.0, alpha=4.0, gain=gain)
        delta = 0.5
        expected = 1e-4 * math.pi * gamma_fn(1 - delta) * gamma_fn(1 + delta)
        assert closed_form_constant(tier) == pytest.approx(expected)
        assert closed_form_constant(tier) == pytest.approx(
            1e-4 * math.pi * math.pi / (4 * math.sin(2 * math.pi / 4)) * 2)

    @given(z1=st.floats(1e8, 1e12), factor=st.floats(1.01, 10.0))
    def test_decreasing_in_z(self, z1, factor):
        ex = macro_exponent()
        assert laplace_value(ex, z1 * factor, 5.0) <= laplace_value(ex, z1, 5.0)

    def test_negative_argument(self):
        with pytest.raises(ValueError):
            laplace_value(macro_exponent(), -1.0)


class TestDerivatives:
    def test_order_zero_is_value(self):
        ex = macro_exponent()
        assert laplace_derivatives(ex, 1e10, 5.0, 0)[0] == pytest.approx(laplace_value(ex, 1e10, 5.0))

    def test_first_derivative_central_difference(self):
        ex = macro_exponent(m=2)
        z = 1e10
        h = 1e-5 * z
        fd = (laplace_value(ex, z + h, 5.0) - laplace_value(ex, z - h, 5.0)) / (2 * h)
        assert laplace_derivatives(ex, z, 5.0, 1)[1] == pytest.approx(fd, rel=1e-4)

    @pytest.mark.parametrize("m", [1, 5])
    @pytest.mark.parametrize("z", Z_VALUES)
    def test_high_order_finite_differences(self, m, z):
        ex = macro_exponent(m)
        d = np.array(laplace_derivatives(ex, z, 5.0, 4)) * z ** np.arange(5)
        fd = laplace_fd_scaled(ex, z, 4, 5.0)
        np.testing.assert_allclose(d, fd, rtol=1e-3)

    @given(z=st.floats(1e8, 1e12))
    def test_completely_monotone_signs(self, z):
        d = laplace_derivatives(macro_exponent(), z, 5.0, 5)
        assert all((-1) ** k * v >= 0 for k, v in enumerate(d))

    def test_at_zero_gives_mean_interference(self):
        ex = macro_exponent()
        d = laplace_derivatives(ex, 0.0, 5.0, 1)
        assert d[0] == 1.0
        h = 1e2
        slope = (laplace_value(ex, h, 5.0) - 1.0) / h
        assert d[1] == pytest.approx(slope, rel=1e-6)

    def test_at_zero_diverges_without_exclusion(self):
        tier = fbs_tier_at_macro(NetworkParams(), 1e-3)
        with pytest.raises(QuadratureError):
            laplace_derivatives(product_exponent([tier]), 0.0, 0.0, 1)

    def test_order_cap(self):
        with pytest.raises(UnsupportedOrderError):
            laplace_derivatives(macro_exponent(), 1e10, 0.0, 10)

    def test_complex_tilt_gives_tilt_derivative(self):
        p = NetworkParams()
        tier = mbs_tier_at_femto(p).with_lower(20.0)
        z = np.asarray(1e10)
        a_c = tier_scaled_derivatives(tier, z, 6.0 + 1e-20j, 0)[0]
        h = 1e-4
        a_p = tier_scaled_derivatives(tier, z, 6.0 + h, 0)[0]
        a_m = tier_scaled_derivatives(tier, z, 6.0 - h, 0)[0]
        assert a_c.imag / 1e-20 == pytest.approx((a_p - a_m) / (2 * h), rel=1e-5)


class TestRecursion:
    @given(a1=st.floats(-3, 0), a2=st.floats(0, 3), a3=st.floats(-3, 0))
    def test_matches_explicit_chain_rule(self, a1, a2, a3):
        a0 = -0.5
        out = laplace_scaled_from_exponent(np.array([a0, a1, a2, a3]))
        e = math.exp(a0)
        assert out[1] == pytest.approx(a1 * e)
        assert out[2] == pytest.approx((a2 + a1**2) * e)
        assert out[3] == pytest.approx((a3 + 3 * a1 * a2 + a1**3) * e)


class TestConditionalCoverage:
    @given(z=st.floats(0, 50), s2=st.floats(0, 1), m=st.integers(1, 6))
    def test_noise_only(self, z, s2, m):
        l_scaled = np.zeros(m)
        l_scaled[0] = 1.0
        got = nakagami_conditional_coverage(l_scaled, z, s2, m)
        assert got == pytest.approx(nakagami_ccdf(z * s2 / m, m), abs=1e-12)

    def test_interference_only_rayleigh(self):
        assert nakagami_conditional_coverage(np.array([0.3]), 5.0, 0.0, 1) == pytest.approx(0.3)


class TestKernelParity:
    @pytest.mark.skipif(kernels.BACKEND != "compiled", reason="compiled kernel not built")
    @given(seed=st.integers(0, 2**32 - 1), m=st.integers(1, 6), nmax=st.integers(0, 9),
           rows=st.integers(1, 5), cols=st.integers(1, 40))
    def test_compiled_matches_python(self, seed, m, nmax, rows, cols):
        rng = np.random.default_rng(seed)
        u = rng.lognormal(0.0, 4.0, size=(rows, cols))
        w = rng.random((rows, cols)) * (rng.random((rows, cols)) > 0.2)
        a = kernels.scaled_moments(u, w, m, nmax, backend="python")
        b = kernels.scaled_moments(u, w, m, nmax, backend="compiled")
        np.testing.assert_allclose(b, a, rtol=1e-12, atol=1e-300)

    def test_complex_input_uses_numpy(self):
        u = np.array([[0.5 + 1e-20j, 2.0]])
        w = np.ones((1, 2))
        out = kernels.scaled_moments(u, w, 2, 2)
        assert np.iscomplexobj(out)

    def test_forced_python_backend(self):
        ex = macro_exponent(3)
        p = laplace_value(ex, 1e10, 5.0)
        tier = ex.tiers[0]
        a = tier_scaled_derivatives(tier, np.asarray(1e10), 5.0, 2, backend="python")
        b = tier_scaled_derivatives(tier, np.asarray(1e10), 5.0, 2)
        np.testing.assert_allclose(a, b, rtol=1e-12)
        assert 0 < p < 1
