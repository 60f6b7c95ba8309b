import csv
import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hartenflux.euler import GasModel, HartenEntropy, LogarithmicEntropy, physical_flux, prim_to_cons
from hartenflux.fluxes import (
    BlowUpReport,
    QuadratureError,
    TwoPointFlux,
    central_flux,
    consistency_check,
    density_pressure_independence_check,
    density_rule_arithmetic,
    ec_check,
    ec_residual,
    harten_ec_quadrature_flux,
    harten_ec_solved_flux,
    harten_path_admissible,
    kep_check,
    log_ec_kep_pep_flux,
    log_mean,
    make_flux,
    pep_check,
    pep_ensemble_check,
    reports_to_csv,
    sample_pairs,
    symmetry_check,
)
from hartenflux.nonexistence import lemma2_pressure_pair

GAS = GasModel(1.4)
H1 = HartenEntropy(1.0, 1.4)

# frozen regression values; the central one is reproduced by the mpmath oracle
CENTRAL_EC_RESIDUAL_MOVING = 0.007523578383606530
HARTEN_DPI_ALPHA1 = 72.59510334282193


def cons(rho, v, p):
    return prim_to_cons(rho, np.atleast_1d(float(v)), p, GAS)


@pytest.fixture(scope="module")
def ensemble():
    return sample_pairs(10_000, 1, GAS, seed=20220712)


@pytest.fixture(scope="module")
def moderate():
    return sample_pairs(2_000, 1, GAS, seed=7, rho_range=(0.5, 2.0), p_range=(0.5, 2.0),
                        v_max=1.0)


# ---------------------------------------------------------------- log mean


def test_log_mean_examples():
    assert log_mean(1.0, 1.0) == 1.0
    assert log_mean(1.0, np.e) == pytest.approx(np.e - 1, rel=1e-15)
    assert log_mean(2.0, 2.0 * (1 + 1e-9)) == pytest.approx(2.0 * (1 + 0.5e-9), rel=1e-15)
    with pytest.raises(ValueError):
        log_mean(-1.0, 1.0)


def test_log_mean_continuous_across_series_switch():
    a = 1.3
    for rel in (0.999e-4, 1.001e-4):
        exact = a * rel / np.log1p(rel)
        assert log_mean(a, a * (1 + rel)) == pytest.approx(exact, rel=1e-14)


@settings(max_examples=300, deadline=None)
@given(st.floats(1e-3, 1e3), st.floats(1e-3, 1e3))
def test_log_mean_between_geometric_and_arithmetic(a, b):
    m = log_mean(a, b)
    assert np.sqrt(a * b) * (1 - 1e-14) <= m <= 0.5 * (a + b) * (1 + 1e-14)
    assert m == pytest.approx(log_mean(b, a), rel=1e-14)


# ---------------------------------------------------------------- central flux


def test_central_flux_is_bitwise_symmetric(ensemble):
    f = central_flux(GAS)
    assert np.array_equal(f(ensemble.u_minus, ensemble.u_plus), f(ensemble.u_plus, ensemble.u_minus))


def test_central_flux_example():
    f = central_flux(GAS)(cons(1, 0, 1), cons(2, 0, 1))
    np.testing.assert_allclose(f, [0.0, 1.0, 0.0], atol=0)


def test_central_flux_ec_residual_vanishes_at_rest():
    # with v = 0 every term of the residual carries a factor of the velocity
    r = ec_residual(central_flux(GAS), cons(1, 0, 1), cons(2, 0, 1), 0, H1)
    assert r == 0.0


def test_central_flux_ec_residual_regression():
    r = ec_residual(central_flux(GAS), cons(1, 0.1, 1), cons(2, 0.1, 1), 0, H1)
    assert r == pytest.approx(CENTRAL_EC_RESIDUAL_MOVING, rel=1e-12)


def test_central_flux_is_not_entropy_conservative(ensemble):
    assert not ec_check(central_flux(GAS), ensemble, H1, tol=1e-12).passed


# ---------------------------------------------------------------- log-entropy flux


def test_log_flux_has_all_properties(ensemble):
    f = log_ec_kep_pep_flux(GAS)
    assert ec_check(f, ensemble, tol=1e-12).passed
    assert kep_check(f, ensemble, GAS, tol=1e-13).passed
    assert pep_ensemble_check(f, n_states=20, n_densities=100, gas=GAS, tol=1e-13).passed
    assert density_pressure_independence_check(f, ensemble, GAS).worst_residual == 0.0
    assert consistency_check(f, ensemble, tol=1e-13).passed
    assert symmetry_check(f, ensemble, tol=1e-13).passed


def test_log_flux_in_two_dimensions():
    pairs = sample_pairs(2_000, 2, GAS, seed=3)
    f = log_ec_kep_pep_flux(GAS)
    for d in (0, 1):
        assert ec_check(f, pairs, direction=d, tol=1e-12).passed


def test_log_flux_near_identical_states_uses_series():
    um = cons(1.0, 0.3, 1.0)
    up = cons(1.0 + 1e-10, 0.3, 1.0 - 1e-10)
    f = log_ec_kep_pep_flux(GAS)(um, up)
    np.testing.assert_allclose(f, physical_flux(um, 0, GAS), rtol=1e-9)


def test_log_flux_entropy_is_logarithmic():
    assert isinstance(log_ec_kep_pep_flux(GAS).entropy, LogarithmicEntropy)


# ---------------------------------------------------------------- broken fluxes are caught


def test_pep_check_detects_broken_flux():
    def broken(um, up, d):
        f = central_flux(GAS)(um, up, d)
        f[..., -1] += 1e-6 * um[..., 0]
        return f

    flux = TwoPointFlux("broken", broken, gas=GAS)
    rho = np.random.default_rng(0).uniform(0.5, 2, size=(50, 2))
    assert not pep_check(flux, 1.0, 0.5, rho, GAS).passed
    assert pep_check(central_flux(GAS), 1.0, 0.5, rho, GAS).passed


def test_kep_check_detects_asymmetric_momentum(ensemble):
    def skewed(um, up, d):
        f = central_flux(GAS)(um, up, d)
        f[..., 1] += 1e-8 * (up[..., 0] - um[..., 0]) ** 2 * up[..., 0]
        return f

    assert not kep_check(TwoPointFlux("skewed", skewed, gas=GAS), ensemble, GAS).passed


def test_symmetry_check_detects_asymmetry(ensemble):
    skew = TwoPointFlux("left", lambda um, up, d: physical_flux(um, d, GAS), gas=GAS)
    assert not symmetry_check(skew, ensemble).passed
    assert consistency_check(skew, ensemble).passed


# ---------------------------------------------------------------- quadrature Harten flux


@pytest.mark.parametrize("alpha", [1.0, -1.8, -2.2])
def test_quadrature_identical_states_give_physical_flux(alpha):
    h = HartenEntropy(alpha, 1.4)
    u = cons(1.3, 0.4, 0.8)
    np.testing.assert_array_equal(harten_ec_quadrature_flux(h)(u, u), physical_flux(u, 0, GAS))


@pytest.mark.parametrize("alpha", [1.0, -1.8, -2.2])
def test_quadrature_example_pair_is_entropy_conservative(alpha):
    h = HartenEntropy(alpha, 1.4)
    flux = harten_ec_quadrature_flux(h)
    r = ec_residual(flux, cons(1, 0.1, 1), cons(2, 0.1, 1), 0, h)
    assert abs(r) <= 1e-10


def test_more_nodes_reduce_fixed_rule_residual():
    residual = {}
    for n in (3, 15):
        flux = harten_ec_quadrature_flux(H1, n_nodes=n, rtol=None)
        residual[n] = abs(ec_residual(flux, cons(1, 0.1, 1), cons(2, 0.1, 1), 0, H1))
    assert residual[3] > 1e-7
    assert residual[15] < 1e-14


def test_quadrature_flux_on_full_ensemble_alpha_one(ensemble):
    flux = harten_ec_quadrature_flux(H1)
    assert ec_check(flux, ensemble, tol=1e-10).passed
    assert symmetry_check(flux, ensemble, tol=1e-10).passed
    assert consistency_check(flux, ensemble, tol=1e-12).passed


@pytest.mark.parametrize("alpha", [-1.8, -2.2])
def test_quadrature_flux_negative_alpha_moderate_states(alpha, moderate):
    h = HartenEntropy(alpha, 1.4)
    assert np.all(harten_path_admissible(moderate.u_minus, moderate.u_plus, h))
    assert ec_check(harten_ec_quadrature_flux(h), moderate, tol=1e-10).passed


def test_quadrature_density_flux_depends_on_pressure(ensemble):
    rep = density_pressure_independence_check(harten_ec_quadrature_flux(H1), ensemble, GAS)
    assert rep.worst_residual == pytest.approx(HARTEN_DPI_ALPHA1, rel=1e-8)


def test_path_admissibility_alpha_positive_always(ensemble):
    assert np.all(harten_path_admissible(ensemble.u_minus, ensemble.u_plus, H1))


def test_path_inadmissible_pair_for_negative_alpha():
    h = HartenEntropy(-1.8, 1.4)
    um, up = cons(1.0, -5.0, 0.01), cons(1.0, 5.0, 0.01)
    assert not harten_path_admissible(um, up, h)
    flux = harten_ec_quadrature_flux(h)
    with pytest.raises(Exception):
        flux(um, up)


def test_allow_nan_marks_unevaluable_rows():
    h = HartenEntropy(-1.8, 1.4)
    um = np.stack([cons(1.0, 0.1, 1.0), cons(1.0, -5.0, 0.01)])
    up = np.stack([cons(2.0, 0.1, 1.0), cons(1.0, 5.0, 0.01)])
    ok = harten_path_admissible(um, up, h)
    assert ok.tolist() == [True, False]
    f = harten_ec_quadrature_flux(h, allow_nan=True)(um[ok], up[ok])
    assert np.all(np.isfinite(f))


def test_depth_limit_raises_or_marks_nan():
    h = HartenEntropy(-1.8, 1.4)
    um, up = cons(0.0377, 3.1018, 0.1575), cons(0.3614, 2.753, 0.543)
    assert harten_path_admissible(um, up, h)
    with pytest.raises(QuadratureError):
        harten_ec_quadrature_flux(h, max_depth=2)(um, up)
    assert np.all(np.isnan(harten_ec_quadrature_flux(h, max_depth=2, allow_nan=True)(um, up)))
    # with the default depth the same pair converges
    assert abs(ec_residual(harten_ec_quadrature_flux(h), um, up, 0, h)) <= 1e-10


def test_quadrature_accepts_complex_perturbation():
    um = cons(1.0, 0.1, 1.0).astype(complex)
    up = cons(2.0, 0.3, 1.5)
    step = 1e-20
    um[0] += 1j * step
    f = harten_ec_quadrature_flux(H1)(um, up)
    deriv = np.imag(f) / step
    base = cons(1.0, 0.1, 1.0)
    eps = 1e-6
    plus, minus = base.copy(), base.copy()
    plus[0] += eps
    minus[0] -= eps
    flux = harten_ec_quadrature_flux(H1)
    fd = (flux(plus, up) - flux(minus, up)) / (2 * eps)
    np.testing.assert_allclose(deriv, fd, rtol=1e-7, atol=1e-8)


# ---------------------------------------------------------------- solved energy flux


def test_solved_flux_identical_states():
    u = cons(1.2, 0.5, 0.9)
    np.testing.assert_array_equal(harten_ec_solved_flux(u, u, 0, H1), physical_flux(u, 0, GAS))


@pytest.mark.parametrize("alpha", [1.0, -1.8, -2.2])
def test_solved_flux_blows_up_at_special_pressure_pair(alpha):
    h = HartenEntropy(alpha, 1.4)
    p_minus = lemma2_pressure_pair(1.0, 2.0, 1.0, h)
    out = harten_ec_solved_flux(cons(1.0, 1.0, p_minus), cons(2.0, 1.0, 1.0), 0, h)
    assert isinstance(out, BlowUpReport)
    assert not out
    assert abs(out.divisor) <= out.threshold


def test_solved_flux_is_entropy_conservative_off_the_singular_set(moderate):
    for k in range(50):
        um, up = moderate.u_minus[k], moderate.u_plus[k]
        f = harten_ec_solved_flux(um, up, 0, H1, density_flux_rule=density_rule_arithmetic)
        if isinstance(f, BlowUpReport):
            continue
        r = ec_residual(lambda *_: f, um, up, 0, H1)
        assert abs(r) <= 1e-12 * (1 + np.abs(f).sum())


def test_solved_flux_with_pep_density_rule_keeps_constant_pressure_structure():
    um, up = cons(1.0, 0.7, 1.0), cons(3.0, 0.7, 1.0)
    f = harten_ec_solved_flux(um, up, 0, H1)
    assert f[1] == pytest.approx(0.7 * f[0] + 1.0, rel=1e-13)
    assert abs(ec_residual(lambda *_: f, um, up, 0, H1)) <= 1e-12


# ---------------------------------------------------------------- reports and factory


def test_reports_csv_roundtrip_and_seed(ensemble):
    f = log_ec_kep_pep_flux(GAS)
    reps = [ec_check(f, ensemble), symmetry_check(f, ensemble)]
    text = reports_to_csv(reps, seed=ensemble.seed)
    assert text.splitlines()[0] == "# seed=20220712"
    rows = list(csv.DictReader(io.StringIO("\n".join(text.splitlines()[1:]))))
    assert [r["property"] for r in rows] == ["ec", "symmetry"]
    assert all(r["pass"] == "true" for r in rows)
    assert float(rows[0]["worst_residual"]) == reps[0].worst_residual


def test_sampling_is_seed_reproducible():
    a, b = sample_pairs(100, 2, GAS, seed=11), sample_pairs(100, 2, GAS, seed=11)
    np.testing.assert_array_equal(a.u_minus, b.u_minus)
    np.testing.assert_array_equal(a.u_plus, b.u_plus)
    c = sample_pairs(100, 2, GAS, seed=12)
    assert not np.array_equal(a.u_minus, c.u_minus)


def test_make_flux_names():
    assert make_flux("central", GAS).name == "central"
    assert make_flux("log-ec", GAS).name == "log-ec"
    assert make_flux("harten-ec", GAS, alpha=1.0).entropy.alpha == 1.0
    with pytest.raises(ValueError):
        make_flux("harten-ec", GAS)
    with pytest.raises(KeyError):
        make_flux("roe", GAS)
