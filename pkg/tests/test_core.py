import math

import pytest
from hypothesis import given, strategies as st

from wsnbattery.core import (DEFAULT_CONFIG, PROFILES, SCALES, BatteryParams, ConfigError,
                             CurrentProfile, parse_config, precompute, round_half_away,
                             series_c0, to_scaled, truncate_scaled)

REF_R = {"pi2": 9.869, "sqrt_pi": 1.772, "beta": 1, "c0": 1.337, "lam": 0.967,
           "a": 0.03, "sqrt_a": 0.173, "inv_2sqrt_a": 2.886}
REF_I = (9869, 1772, 10, 1337, 967, 30, 173, 2886)


class TestBatteryParams:
    def test_from_mah_converts_to_mamin(self):
        p = BatteryParams.from_mah(880)
        assert p.alpha == 52800
        assert p.delta == pytest.approx(1 / 30)
        assert p.delta_ms == 2000

    @pytest.mark.parametrize("kw", [{"alpha": 0}, {"alpha": 1, "beta": 0},
                                    {"alpha": 1, "delta": 0}, {"alpha": 1, "m_max": 0},
                                    {"alpha": 1, "delta": -1}])
    def test_rejects_invalid(self, kw):
        with pytest.raises(ValueError):
            BatteryParams(**kw)


class TestPrecompute:
    def test_row_R(self, derived):
        reals = derived.reals()
        for key, expected in REF_R.items():
            assert reals[key] == pytest.approx(expected, abs=1e-3), key

    def test_row_I(self, derived):
        assert derived.scaled.as_tuple() == REF_I

    def test_lambda_is_exp(self, params, derived):
        assert derived.lam == math.exp(-params.beta ** 2 * params.delta)

    def test_c0_matches_direct_sum(self, derived):
        # mpmath, 30 digits, m = 1..10
        assert derived.c0 == pytest.approx(1.33776073640451493932, rel=1e-14)

    def test_c0_high_truncation(self):
        # mpmath, m = 1..10^4
        c0 = series_c0(1.0, 1 / 30, 10_000)
        assert c0 == pytest.approx(1.33799641475560989413, rel=1e-13)
        assert abs(c0 - 1.337) < 1e-3

    def test_c0_basel_limit(self):
        assert series_c0(1.0, 1e-12, 200_000) == pytest.approx(math.pi ** 2 / 6, abs=1e-5)

    def test_idle_fraction_sets_a(self, params):
        assert precompute(params, 0.5).a == pytest.approx(0.5 / 30)

    @pytest.mark.parametrize("frac", [0, -0.1, 1.01])
    def test_rejects_idle_fraction(self, params, frac):
        with pytest.raises(ValueError):
            precompute(params, frac)

    def test_c0_monotone_and_converged(self):
        values = [series_c0(1.0, 1 / 30, m) for m in (1, 2, 5, 10, 100, 10_000)]
        assert values == sorted(values)
        assert (values[-1] - values[3]) / values[-1] < 1e-3

    def test_c0_agrees_with_closed_form(self, params):
        closed = params.delta / 2 - math.sqrt(math.pi) * math.sqrt(params.delta) + math.pi ** 2 / 6
        assert abs(series_c0(1.0, params.delta, 10_000) - closed) < 1e-3

    @given(st.floats(1e-3, 5), st.floats(1e-4, 2))
    def test_lambda_in_unit_interval(self, beta, delta):
        d = precompute(BatteryParams(alpha=1, beta=beta, delta=delta))
        assert 0 < d.lam < 1
        assert d.c0 > 0


class TestScaling:
    def test_table_values(self):
        assert to_scaled(REF_R).as_tuple() == REF_I

    def test_zero(self):
        assert to_scaled({k: 0.0 for k in SCALES}).as_tuple() == (0,) * 8

    def test_float_noise_does_not_cost_a_unit(self):
        assert truncate_scaled(0.03 - 1e-15, 1000) == 30
        assert truncate_scaled(0.9 * (1 / 30), 1000) == 30

    def test_round_trip_within_one_unit(self, derived):
        reals = derived.reals()
        scaled = dict(zip(SCALES, derived.scaled.as_tuple()))
        for key, scale in SCALES.items():
            assert 0 <= reals[key] - scaled[key] / scale < 1 / scale, key

    def test_round_half_away(self):
        assert round_half_away(0.0545, 1000) == 55
        assert round_half_away(-0.0025, 1000) == -3
        assert round_half_away(2.886, 1000) == 2886


class TestProfiles:
    def test_builtins(self):
        assert PROFILES["sky"].as_tuple() == (1.8, 0.0545, 17.4, 18.8)
        assert PROFILES["wsn430"].as_tuple() == (2, 0.02, 16.1, 15.2)

    def test_milli(self):
        assert PROFILES["wsn430"].milli() == (2000, 20, 16100, 15200)
        assert PROFILES["sky"].milli() == (1800, 55, 17400, 18800)

    def test_invariants(self):
        with pytest.raises(ValueError):
            CurrentProfile("x", 1.0, 2.0, 1.0, 1.0)
        with pytest.raises(ValueError):
            CurrentProfile("x", 1.0, 0.1, -1.0, 1.0)


class TestConfig:
    def test_default_config(self):
        cfg = parse_config(DEFAULT_CONFIG)
        assert cfg.params.alpha == 52800
        assert cfg.params.m_max == 10
        assert cfg.idle_fraction == 0.9

    def test_missing_beta_names_key(self):
        text = DEFAULT_CONFIG.replace("beta = 1\n", "")
        with pytest.raises(ConfigError, match="'beta'"):
            parse_config(text)

    def test_zero_delta(self):
        with pytest.raises(ConfigError, match="delta"):
            parse_config(DEFAULT_CONFIG.replace("delta_seconds = 2", "delta_seconds = 0"))

    def test_profile_section(self):
        cfg = parse_config(DEFAULT_CONFIG + "\n[profile.custom]\ncpu_mA = 3\nlpm_mA = 0.1\n"
                           "tx_mA = 20\nrx_mA = 21\n")
        assert cfg.profiles["custom"].as_tuple() == (3, 0.1, 20, 21)
        assert "sky" in cfg.profiles

    def test_profile_missing_key(self):
        with pytest.raises(ConfigError, match="'rx_mA'"):
            parse_config(DEFAULT_CONFIG + "\n[profile.custom]\ncpu_mA = 3\nlpm_mA = 0.1\ntx_mA = 20\n")

    def test_digest_stable(self):
        assert parse_config(DEFAULT_CONFIG).digest() == parse_config(DEFAULT_CONFIG).digest()
        other = parse_config(DEFAULT_CONFIG.replace("alpha_mAh = 880", "alpha_mAh = 2000"))
        assert other.digest() != parse_config(DEFAULT_CONFIG).digest()
