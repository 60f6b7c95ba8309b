import numpy as np
import pytest

from hartenflux.dg import MeshConfig, density_wave_ic, rhs
from hartenflux.euler import GasModel, HartenEntropy
from hartenflux.fluxes import central_flux, harten_ec_quadrature_flux
from hartenflux.spectrum import (
    SpectrumReport,
    assemble_jacobian,
    eigenvalues,
    read_spectrum_csv,
    spectrum,
    stability_classification,
)

GAS = GasModel(1.4)


def test_rotation_matrix_is_marginal():
    rep = spectrum([[0.0, -1.0], [1.0, 0.0]])
    np.testing.assert_allclose(np.sort(rep.eigenvalues.imag), [-1, 1], atol=1e-15)
    assert rep.spectral_abscissa == pytest.approx(0.0, abs=1e-15)
    assert rep.imag_dominance <= 1e-15
    assert rep.classification() == "marginally_stable"


def test_random_matrix_trace_and_pairing():
    a = np.random.default_rng(0).standard_normal((50, 50))
    rep = spectrum(a)
    assert rep.trace_error() <= 1e-12
    assert rep.conjugate_pairing_error() <= 1e-12


def test_companion_matrix_roots_of_unity():
    # lambda^3 - 1
    c = np.array([[0, 0, 1], [1, 0, 0], [0, 1, 0]], dtype=float)
    lam = eigenvalues(c)
    expected = np.exp(2j * np.pi * np.arange(3) / 3)
    for z in expected:
        assert np.min(np.abs(lam - z)) <= 1e-14


def test_zero_matrix():
    rep = spectrum(np.zeros((4, 4)))
    assert rep.spectral_radius == 0.0
    assert rep.imag_dominance == 0.0
    assert rep.classification() == "marginally_stable"


def test_unstable_classification():
    rep = spectrum(np.diag([0.1, -1.0]))
    assert stability_classification(rep) == "unstable"
    assert rep.imag_dominance == float("inf")


def test_eigenvalues_rejects_bad_input():
    with pytest.raises(ValueError):
        eigenvalues(np.ones((2, 3)))
    with pytest.raises(ValueError):
        eigenvalues([[np.nan, 0], [0, 1]])


def test_csv_round_trip():
    a = np.random.default_rng(4).standard_normal((12, 12))
    rep = spectrum(a, {"flux": "central", "seed": 3})
    lam, meta = read_spectrum_csv(rep.to_csv())
    assert meta == {"flux": "central", "seed": "3"}
    np.testing.assert_array_equal(np.sort_complex(lam), np.sort_complex(rep.eigenvalues))


def _closure(mesh, flux):
    return lambda x: rhs(x, mesh, flux)


@pytest.fixture(scope="module")
def small_problem():
    mesh = MeshConfig(dim=1, elements=4, degree=3)
    return mesh, density_wave_ic(mesh)


@pytest.mark.parametrize("method", ["fd", "complex"])
def test_jacobian_matvec_consistency(small_problem, method):
    mesh, u = small_problem
    flux = central_flux(GAS)
    jac = assemble_jacobian(_closure(mesh, flux), u, method=method)
    v = np.random.default_rng(0).standard_normal(u.size)
    eps = 1e-7
    directional = (rhs(u + eps * v, mesh, flux) - rhs(u - eps * v, mesh, flux)) / (2 * eps)
    np.testing.assert_allclose(jac @ v, directional, rtol=1e-6, atol=1e-6)


def test_jacobian_conserves_mass(small_problem):
    mesh, u = small_problem
    jac = assemble_jacobian(_closure(mesh, central_flux(GAS)), u, method="complex")
    m = np.repeat(mesh.mass_weights().ravel(), mesh.nvar).reshape(-1)
    rho_rows = np.arange(0, u.size, mesh.nvar)
    total = m[rho_rows] @ jac[rho_rows]
    assert np.max(np.abs(total)) <= 1e-12 * np.max(np.abs(jac))


def test_fd_and_complex_jacobians_agree(small_problem):
    mesh, u = small_problem
    flux = harten_ec_quadrature_flux(HartenEntropy(1.0))
    fd = assemble_jacobian(_closure(mesh, flux), u, method="fd")
    cs = assemble_jacobian(_closure(mesh, flux), u, method="complex")
    assert np.max(np.abs(fd - cs)) <= 1e-6 * np.max(np.abs(cs))


def test_unknown_jacobian_method(small_problem):
    mesh, u = small_problem
    with pytest.raises(ValueError):
        assemble_jacobian(_closure(mesh, central_flux(GAS)), u, method="ad")


def test_central_flux_spectrum_one_dimension(small_problem):
    mesh, u = small_problem
    jac = assemble_jacobian(_closure(mesh, central_flux(GAS)), u, method="complex")
    rep = spectrum(jac)
    assert rep.trace_error() <= 1e-10
    assert rep.imag_dominance <= 1e-6
    assert rep.classification() == "marginally_stable"


def test_report_defaults():
    rep = SpectrumReport(np.array([1j, -1j]))
    assert np.isnan(rep.trace)
    assert rep.spectral_radius == 1.0
