import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hybridlink.errors import DomainError
from hybridlink.linkgeo import (LinkGeometry, RfLinkParams, WeatherCondition, WeatherKind, db_to_linear,
                                dbm_to_watt, fso_attenuation_db, fso_attenuation_gain, fso_rain_extinction,
                                linear_to_db, load_rain_table, rain_coefficients, rf_path_gain,
                                rf_path_gain_db, slant_range)

RF = RfLinkParams(45.0, 45.0, 40.0, 0.1, 0.4431, 0.8673)


@pytest.mark.parametrize("zenith,expected", [(0.0, 499.2), (60.0, 998.4), (65.0, 1181.2078)])
def test_slant_range(zenith, expected):
    assert slant_range(LinkGeometry(500.0, 0.8, zenith)) == pytest.approx(expected, abs=1e-4)


def test_slant_range_domain():
    with pytest.raises(DomainError):
        LinkGeometry(500.0, 0.8, 90.0)
    with pytest.raises(DomainError):
        LinkGeometry(0.5, 0.8, 10.0)


@given(st.floats(0.0, 89.0), st.floats(0.0, 89.0))
def test_slant_range_monotone_in_zenith(z1, z2):
    lo, hi = sorted((z1, z2))
    assert slant_range(LinkGeometry(500.0, 0.8, lo)) <= slant_range(LinkGeometry(500.0, 0.8, hi))


def test_rain_extinction_hand_value():
    # 1.067 * 25 ** 0.67 = 1.067 * exp(0.67 ln 25)
    assert fso_rain_extinction(25.0) == pytest.approx(1.067 * math.exp(0.67 * math.log(25.0)), rel=1e-15)
    assert fso_rain_extinction(25.0) == pytest.approx(9.2211, abs=1e-4)
    assert fso_rain_extinction(0.0) == 0.0


def test_fso_attenuation_ledger():
    rain = WeatherCondition(WeatherKind.RAIN, rain_rate=25.0, attenuation_path=4.0)
    assert fso_attenuation_db(rain) == pytest.approx(4.0 * 9.22113, rel=1e-5)
    fog = WeatherCondition(WeatherKind.FOG, fso_specific_attenuation=339.62, attenuation_path=1.0)
    assert fso_attenuation_db(fog) == pytest.approx(339.62)
    # amplitude gain squared gives back the dB figure
    assert -20 * math.log10(fso_attenuation_gain(rain)) == pytest.approx(fso_attenuation_db(rain), rel=1e-12)
    assert rain.rf_rain_rate == 25.0 and fog.rf_rain_rate == 0.0


def test_rf_budget_hand_arithmetic():
    L = 1181.2078
    lam = 299_792.458 / 40e9
    fspl = 20 * math.log10(4 * math.pi * L / lam)
    assert rf_path_gain_db(RF, L) == pytest.approx(90 - fspl - 0.1 * L, abs=1e-9)
    assert rf_path_gain_db(RF, L) == pytest.approx(-214.056, abs=1e-3)
    rain_db = 0.4431 * 25 ** 0.8673 * L
    assert rf_path_gain_db(RF, L, 25.0) == pytest.approx(rf_path_gain_db(RF, L) - rain_db, abs=1e-9)


@given(st.floats(1.0, 5000.0), st.floats(1.0, 5000.0), st.floats(0.0, 100.0))
def test_rf_budget_monotone_in_distance(L1, L2, R):
    lo, hi = sorted((L1, L2))
    assert rf_path_gain(RF, lo, R) >= rf_path_gain(RF, hi, R)


@given(st.floats(-300.0, 300.0))
def test_db_round_trip(x):
    assert linear_to_db(db_to_linear(x)) == pytest.approx(x, abs=1e-9)


def test_dbm():
    assert dbm_to_watt(30.0) == pytest.approx(1.0)
    assert dbm_to_watt(0.0) == pytest.approx(1e-3)
    np.testing.assert_allclose(db_to_linear(np.array([0.0, 10.0])), [1.0, 10.0])


def test_itu_table():
    assert rain_coefficients(40.0) == (0.4431, 0.8673)
    rows = load_rain_table()
    assert [r.frequency_ghz for r in rows] == sorted(r.frequency_ghz for r in rows)
    k, rho = rain_coefficients(37.0)
    lo, hi = rain_coefficients(35.0), rain_coefficients(40.0)
    assert lo[0] < k < hi[0]
    with pytest.raises(DomainError):
        rain_coefficients(500.0)
