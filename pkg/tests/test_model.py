import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from mmwave_ee.model import (
    AntennaSpec,
    FadingModel,
    HorizontalGainDist,
    NetworkParams,
    PathLossModel,
    VerticalPattern,
    db_to_linear,
    horizontal_gain_dist,
    horizontal_gain_dist_from,
    linear_to_db,
    los_probability,
    nakagami_ccdf,
    path_loss,
    vertical_gain,
)

PL = PathLossModel()


class TestBlockage:
    def test_zero_distance_is_los(self):
        assert los_probability(0.0, PL) == 1.0

    def test_one_over_beta(self):
        assert los_probability(1 / PL.beta_blockage, PL) == pytest.approx(math.exp(-1))

    def test_table_value(self):
        assert los_probability(500.0, PathLossModel(beta_blockage=0.003)) == pytest.approx(
            0.22313, abs=1e-5)

    def test_negative_distance_rejected(self):
        with pytest.raises(ValueError):
            los_probability(-1.0, PL)

    def test_negative_beta_rejected(self):
        with pytest.raises(ValueError):
            PathLossModel(beta_blockage=-0.1)


class TestPathLoss:
    def test_reference_distance(self):
        assert path_loss(1.0, "los", PL) == pytest.approx(PL.c_los)

    def test_los_exponent(self):
        pl = PathLossModel(c_los=1.0, c_nlos=1.0)
        assert path_loss(100.0, "los", pl) == pytest.approx(1e-5)
        assert path_loss(100.0, "nlos", pl) == pytest.approx(1e-8)

    def test_singular_at_zero(self):
        with pytest.raises(ValueError):
            path_loss(0.0, "los", PL)

    def test_unknown_condition(self):
        with pytest.raises(ValueError):
            path_loss(1.0, "foo", PL)


class TestVerticalPattern:
    pat = VerticalPattern(theta_3db=6.0, sll_db=20.0, h_eff=10.0)

    def test_boresight_gain_is_one(self):
        theta = 8.0
        r = self.pat.h_eff / math.tan(math.radians(theta))
        assert vertical_gain(r, theta, self.pat) == pytest.approx(1.0)

    def test_one_beamwidth_offset(self):
        # user seen at 20 degrees, tilt 14: offset equals theta_3db
        r = self.pat.h_eff / math.tan(math.radians(20.0))
        assert vertical_gain(r, 14.0, self.pat) == pytest.approx(10 ** -1.2, rel=1e-9)

    def test_side_lobe_floor(self):
        r = self.pat.h_eff / math.tan(math.radians(20.0))
        tilt = 20.0 - 6.0 * math.sqrt(20 / 12) - 0.5
        assert vertical_gain(r, tilt, self.pat) == pytest.approx(0.01)

    def test_half_span(self):
        assert self.pat.half_span == pytest.approx(7.746, abs=1e-3)

    def test_no_pattern_is_unity(self):
        assert np.all(vertical_gain(np.array([1.0, 100.0]), 30.0, None) == 1.0)

    @given(r=st.floats(0.5, 5000), tilt=st.floats(0, 90))
    def test_gain_bounds(self, r, tilt):
        g = vertical_gain(r, tilt, self.pat)
        assert 0.01 - 1e-15 <= g <= 1.0 + 1e-15

    def test_tilt_out_of_range(self):
        with pytest.raises(ValueError):
            vertical_gain(10.0, 95.0, self.pat)

    def test_complex_step_matches_finite_difference(self):
        r, tilt, h = 40.0, 10.0, 1e-6
        d_cs = vertical_gain(r, tilt + 1e-20j, self.pat).imag / 1e-20
        d_fd = (vertical_gain(r, tilt + h, self.pat) - vertical_gain(r, tilt - h, self.pat)) / (2 * h)
        assert d_cs == pytest.approx(d_fd, rel=1e-6)


class TestHorizontalGain:
    def test_table_law(self):
        dist = horizontal_gain_dist(10, -10, 30, 10, -10, 90)
        assert dist.values == pytest.approx((100.0, 1.0, 1.0, 0.01))
        assert dist.probs == pytest.approx((1 / 48, 1 / 16, 11 / 48, 11 / 16))

    def test_omni_always_aligned(self):
        dist = horizontal_gain_dist(10, -10, 360, 10, -10, 360)
        assert dist.probs == pytest.approx((1, 0, 0, 0))

    def test_swap_roles_permutes_middle(self):
        a = horizontal_gain_dist_from(AntennaSpec(10, -10, 30), AntennaSpec(5, -5, 90))
        b = horizontal_gain_dist_from(AntennaSpec(5, -5, 90), AntennaSpec(10, -10, 30))
        assert a.values[0] == pytest.approx(b.values[0])
        assert a.values[1] == pytest.approx(b.values[2])
        assert a.probs[1] == pytest.approx(b.probs[2])
        assert a.values[3] == pytest.approx(b.values[3])

    @given(bt=st.floats(1, 360), br=st.floats(1, 360),
           mt=st.floats(0, 30), st_=st.floats(-30, 0))
    def test_probabilities_sum_to_one(self, bt, br, mt, st_):
        dist = horizontal_gain_dist(mt, st_, bt, mt, st_, br)
        assert sum(dist.probs) == pytest.approx(1.0)
        assert all(p >= 0 for p in dist.probs)

    def test_invalid_beamwidth(self):
        with pytest.raises(ValueError):
            horizontal_gain_dist(10, -10, 0, 10, -10, 90)

    def test_side_above_main_rejected(self):
        with pytest.raises(ValueError):
            horizontal_gain_dist(-10, 10, 30, 10, -10, 90)

    def test_bad_probs_rejected(self):
        with pytest.raises(ValueError):
            HorizontalGainDist((1, 1, 1, 1), (0.5, 0.5, 0.5, 0.0))

    def test_sampling_frequencies(self):
        dist = horizontal_gain_dist(10, -10, 30, 10, -10, 90)
        draws = dist.sample(np.random.default_rng(1), 200_000)
        freq = [np.mean(draws == v) for v in dist.values[::3]]
        assert freq[0] == pytest.approx(1 / 48, abs=3e-3)
        assert freq[1] == pytest.approx(11 / 16, abs=5e-3)

    def test_moments(self):
        dist = horizontal_gain_dist(10, -10, 30, 10, -10, 90)
        assert dist.mean() == pytest.approx(100 / 48 + 1 / 16 + 11 / 48 + 0.01 * 11 / 16)
        assert dist.moment(1.0) == pytest.approx(dist.mean())


class TestNakagami:
    def test_zero(self):
        assert nakagami_ccdf(0.0, 3) == 1.0

    def test_rayleigh(self):
        assert nakagami_ccdf(1.0, 1) == pytest.approx(math.exp(-1))

    def test_m5(self):
        expected = math.exp(-5) * (1 + 5 + 12.5 + 125 / 6 + 625 / 24)
        assert nakagami_ccdf(1.0, 5) == pytest.approx(expected)
        assert nakagami_ccdf(1.0, 5) == pytest.approx(0.44049, abs=1e-5)

    @given(z=st.floats(0, 20), m=st.integers(1, 8))
    def test_matches_gamma_survival(self, z, m):
        assert nakagami_ccdf(z, m) == pytest.approx(stats.gamma.sf(z, m, scale=1 / m), abs=1e-12)

    def test_noninteger_m_rejected(self):
        with pytest.raises(ValueError):
            FadingModel(1.5)


class TestNetworkParams:
    def test_table_defaults(self):
        p = NetworkParams()
        assert p.macro_power_per_bs == pytest.approx(68.73 + 3.77 * 20)
        assert p.r_c_max == pytest.approx(80.0, abs=0.01)

    def test_active_density_at_max_radius(self):
        p = NetworkParams(lambda_f=1e-3)
        assert p.lambda_f_active(p.r_c_max) == pytest.approx(1e-3 * math.exp(-1))

    @pytest.mark.parametrize("field,value", [("lambda_m", 0.0), ("lambda_f", -1.0),
                                             ("sigma2", -1.0), ("ell_w", 2.0), ("p_m", 0.0)])
    def test_invalid(self, field, value):
        with pytest.raises(ValueError):
            NetworkParams(**{field: value})

    @given(x=st.floats(-50, 50))
    def test_db_roundtrip(self, x):
        assert float(linear_to_db(db_to_linear(x))) == pytest.approx(x, abs=1e-9)
