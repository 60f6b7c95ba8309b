"""The frozen oracle values must still be what the brute-force oracle computes."""

import mpmath as mp
import pytest

import oracle


@pytest.mark.parametrize("alpha", [1.0, -1.8, -2.2])
def test_frozen_values_match_fresh_oracle(alpha):
    fresh = {
        "lemma1_flux": oracle.lemma1_flux(1, 2, 1, 1, alpha, 1.4),
        "lemma2_flux": oracle.lemma2_flux(1, 2, 1, 1, alpha, 1.4),
        "gap": oracle.gap(1, 2, alpha, 1.4),
        "p_minus": oracle.special_pressure(1, 2, 1, alpha, 1.4),
    }
    for key, value in fresh.items():
        assert abs(value - oracle.FROZEN[(alpha, key)]) < mp.mpf("1e-25"), key


def test_oracle_lemma1_flux_is_consistent_on_the_diagonal():
    # equal densities: the forced density flux is rho v
    assert abs(oracle.lemma1_flux(1.5, 1.5 * (1 + mp.mpf("1e-20")), 1, 2, 1.0, 1.4) - 3) < 1e-15


def test_oracle_special_pressure_equalizes_last_variable():
    p_m = oracle.special_pressure(1, 3, 2, -2.2, 1.4)
    a = oracle._last_variable(1, p_m, -2.2, 1.4)
    b = oracle._last_variable(3, 2, -2.2, 1.4)
    assert abs(a - b) < mp.mpf("1e-30") * abs(b)
