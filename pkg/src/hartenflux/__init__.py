"""Entropy-conservative fluxes for the Euler equations under Harten's entropy family."""

from .dg import DensityWave, LobattoOperator, MeshConfig, build_lobatto, density_wave_ic, rhs
from .euler import (
    AdmissibilityError,
    EulerState,
    GasModel,
    HartenEntropy,
    LogarithmicEntropy,
    beta_to_alpha,
    cons_to_prim,
    physical_flux,
    prim_to_cons,
)
from .fluxes import (
    TwoPointFlux,
    central_flux,
    harten_ec_quadrature_flux,
    harten_ec_solved_flux,
    log_ec_kep_pep_flux,
    log_mean,
    make_flux,
)
from .nonexistence import gap_scan, theorem_gap
from .spectrum import SpectrumReport, assemble_jacobian, eigenvalues

__all__ = [
    "AdmissibilityError",
    "DensityWave",
    "EulerState",
    "GasModel",
    "HartenEntropy",
    "LobattoOperator",
    "LogarithmicEntropy",
    "MeshConfig",
    "SpectrumReport",
    "TwoPointFlux",
    "assemble_jacobian",
    "beta_to_alpha",
    "build_lobatto",
    "central_flux",
    "cons_to_prim",
    "density_wave_ic",
    "eigenvalues",
    "gap_scan",
    "harten_ec_quadrature_flux",
    "harten_ec_solved_flux",
    "log_ec_kep_pep_flux",
    "log_mean",
    "make_flux",
    "physical_flux",
    "prim_to_cons",
    "rhs",
    "theorem_gap",
]
