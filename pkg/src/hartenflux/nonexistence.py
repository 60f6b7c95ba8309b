"""Executable form of the no-go result for Harten-entropy fluxes.

An EC + PEP flux under constant (p, v) must use one density flux
(:func:`lemma1_density_flux`), while an EC flux at the special pressure pair
of :func:`lemma2_pressure_pair` must use another (:func:`lemma2_density_flux`).
A pressure-independent density flux would have to satisfy both; the two
disagree for generic densities (:func:`theorem_gap`).
"""

from __future__ import annotations

import csv
import io
from dataclasses import asdict, dataclass

import numpy as np

from .euler import HartenEntropy, prim_to_cons
from .fluxes import _power_jump_ratio, ec_residual, ec_residual_scale, jump_power

NEAR_DIAGONAL = 1e-8
DEFAULT_RHO_GRID = tuple(2.0**k for k in range(-6, 7))
DEFAULT_ALPHAS = (1.0, -1.8, -2.2)
DEFAULT_PRESSURES = (0.1, 1.0, 10.0)
DEFAULT_VELOCITIES = (-1.0, 0.0, 0.5, 2.0)
LEMMA_COLUMNS = ["check", "alpha", "gamma", "rho_minus", "rho_plus", "p", "v", "residual",
                 "tolerance", "pass"]
GAP_COLUMNS = ["alpha", "gamma", "rho_minus", "rho_plus", "lhs", "rhs", "gap", "regime"]


def _regime(rho_minus, rho_plus) -> str:
    if rho_minus == rho_plus:
        return "diagonal"
    if abs(rho_plus / rho_minus - 1) < NEAR_DIAGONAL:
        return "near_diagonal"
    return "generic"


def _special_exponents(h: HartenEntropy):
    m = h.alpha + h.gamma - 1
    if abs(m) <= 1e-12 * (abs(h.alpha) + h.gamma):
        raise ValueError("alpha + gamma - 1 = 0 is a degenerate parameter choice")
    return h.alpha / m, (1 - h.gamma) / m


def lemma1_density_flux(rho_minus, rho_plus, v, h: HartenEntropy):
    """Density flux of an EC + PEP flux when pressure and velocity are constant."""
    ratio = _power_jump_ratio(rho_minus, rho_plus, h.density_exponent,
                              h.inverse_density_exponent)
    return -h.gamma / h.alpha * ratio * v


def pep_completed_flux(rho_minus, rho_plus, p, v, h: HartenEntropy, density_flux=None):
    """Full 1D flux ``(f_rho, v f_rho + p, v^2/2 f_rho + p v gamma/(gamma-1))``."""
    if density_flux is None:
        density_flux = lemma1_density_flux(rho_minus, rho_plus, v, h)
    f_rho = np.asarray(density_flux, dtype=float)
    g = h.gamma
    return np.stack([f_rho, v * f_rho + p, 0.5 * v * v * f_rho + p * v * g / (g - 1)], axis=-1)


def lemma1_verify(rho_minus, rho_plus, p, v, h: HartenEntropy, density_flux=None,
                  relative: bool = True):
    """EC residual of the PEP-completed flux under the Harten entropy.

    With ``relative=True`` the residual is divided by its roundoff scale
    ``1 + sum |[[w_i]] f_i| + |[[psi]]|``.
    """
    rho_minus = np.asarray(rho_minus, dtype=float)
    rho_plus = np.asarray(rho_plus, dtype=float)
    f = pep_completed_flux(rho_minus, rho_plus, p, v, h, density_flux)
    gas = h.gas
    um = prim_to_cons(rho_minus, np.full(rho_minus.shape, v), np.full(rho_minus.shape, p), gas)
    up = prim_to_cons(rho_plus, np.full(rho_plus.shape, v), np.full(rho_plus.shape, p), gas)
    fixed = lambda *_: f  # noqa: E731
    res = ec_residual(fixed, um, up, 0, h)
    if relative:
        res = res / ec_residual_scale(fixed, um, up, 0, h)
    return res


def lemma2_pressure_pair(rho_minus, rho_plus, p_plus, h: HartenEntropy):
    """Left pressure making the entropy-variable prefactor jump vanish."""
    a_over_m, _ = _special_exponents(h)
    return p_plus * (np.asarray(rho_minus, dtype=float) / rho_plus) ** a_over_m


def entropy_prefactor(rho, p, h: HartenEntropy):
    """``(rho/p) (p/rho^gamma)^(1/(alpha+gamma))``, minus the last entropy variable."""
    return rho / p * h._entropy_power(np.asarray(rho, dtype=float), np.asarray(p, dtype=float))


def lemma2_density_flux(rho_minus, rho_plus, v, h: HartenEntropy):
    """Density flux of an EC flux at the special pressure pair, exponent form."""
    a, b = _special_exponents(h)
    ratio = _power_jump_ratio(rho_minus, rho_plus, a, b)
    return -(h.gamma - 1) / h.alpha * ratio * v


def lemma2_density_flux_pressure_form(rho_minus, rho_plus, p_plus, v, h: HartenEntropy):
    """Same flux written through ``[[rho s_h]] / [[s_h]]`` with ``s_h = (p/rho^g)^(1/(a+g))``.

    Evaluated with the pressures of :func:`lemma2_pressure_pair`; no exponent
    simplification is used.
    """
    rho_minus = np.asarray(rho_minus, dtype=float)
    rho_plus = np.asarray(rho_plus, dtype=float)
    p_plus = np.asarray(p_plus, dtype=float)
    p_minus = lemma2_pressure_pair(rho_minus, rho_plus, p_plus, h)
    k = h.alpha + h.gamma
    # jumps of exp(L) taken as exp(L_-) expm1(L_+ - L_-) to avoid cancellation
    log_s_jump = (np.log(p_plus / p_minus) - h.gamma * np.log(rho_plus / rho_minus)) / k
    s_jump = np.expm1(log_s_jump)
    rho_s_jump = np.expm1(log_s_jump + np.log(rho_plus / rho_minus))
    # both jumps share the factor s_h(rho_-, p_-), which cancels in the ratio
    return -(h.gamma - 1) / h.alpha * rho_minus * rho_s_jump / s_jump * v


def lemma_suite(h: HartenEntropy, rho_grid=DEFAULT_RHO_GRID, pressures=DEFAULT_PRESSURES,
                velocities=DEFAULT_VELOCITIES, n_random: int = 1000, seed: int = 0,
                tol1: float = 1e-12, tol2: float = 1e-12, tol_prefactor: float = 1e-13):
    """Residual rows for both lemmas.

    ``lemma1`` rows cover the full ``(rho_-, rho_+, p, v)`` grid. The two
    ``lemma2`` checks (prefactor jump, agreement of the exponent and pressure
    forms) use ``n_random`` seeded log-uniform samples with ``v = 1``. A
    degenerate parameter choice yields one row with residual NaN and
    ``pass`` left empty instead of an exception.
    """
    rows = []
    grid = np.array(rho_grid, dtype=float)
    rm, rp = (x.ravel() for x in np.meshgrid(grid, grid, indexing="ij"))
    for p in pressures:
        for v in velocities:
            res = np.atleast_1d(lemma1_verify(rm, rp, p, v, h))
            rows.extend(_lemma_row("lemma1", h, a, b, p, v, r, tol1)
                        for a, b, r in zip(rm, rp, res))

    rng = np.random.default_rng(seed)
    rho_m = np.exp(rng.uniform(np.log(1e-2), np.log(1e2), n_random))
    rho_p = np.exp(rng.uniform(np.log(1e-2), np.log(1e2), n_random))
    p_p = np.exp(rng.uniform(np.log(1e-2), np.log(1e2), n_random))
    try:
        p_m = lemma2_pressure_pair(rho_m, rho_p, p_p, h)
    except ValueError:
        rows.append(_lemma_row("lemma2_degenerate", h, np.nan, np.nan, np.nan, np.nan,
                               np.nan, tol2))
        return rows
    c_m = entropy_prefactor(rho_m, p_m, h)
    c_p = entropy_prefactor(rho_p, p_p, h)
    jump = np.abs(c_p - c_m) / np.abs(c_p)
    f_exp = lemma2_density_flux(rho_m, rho_p, 1.0, h)
    f_pres = lemma2_density_flux_pressure_form(rho_m, rho_p, p_p, 1.0, h)
    agree = np.abs(f_exp - f_pres) / np.abs(f_exp)
    for k in range(n_random):
        rows.append(_lemma_row("lemma2_prefactor", h, rho_m[k], rho_p[k], p_p[k], 1.0,
                               jump[k], tol_prefactor))
    for k in range(n_random):
        rows.append(_lemma_row("lemma2_forms", h, rho_m[k], rho_p[k], p_p[k], 1.0,
                               agree[k], tol2))
    return rows


def _lemma_row(check, h, rm, rp, p, v, residual, tol):
    residual = float(residual)
    passed = "" if np.isnan(residual) else str(residual <= tol).lower()
    return {"check": check, "alpha": repr(float(h.alpha)), "gamma": repr(float(h.gamma)),
            "rho_minus": repr(float(rm)), "rho_plus": repr(float(rp)), "p": repr(float(p)),
            "v": repr(float(v)), "residual": repr(residual), "tolerance": repr(float(tol)),
            "pass": passed}


def lemma_suite_csv(rows, seed=None) -> str:
    buf = io.StringIO()
    if seed is not None:
        buf.write(f"# seed={seed}\n")
    writer = csv.DictWriter(buf, fieldnames=LEMMA_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


@dataclass(frozen=True)
class GapSample:
    """Both sides of the incompatibility equation for one density pair.

    ``lhs = -alpha * f_rho / v`` for the constant-(p, v) flux and ``rhs`` the
    same for the special-pressure flux; both tend to ``-alpha * rho`` on the
    diagonal.
    """

    rho_minus: float
    rho_plus: float
    alpha: float
    gamma: float
    lhs: float
    rhs: float
    gap: float
    regime: str

    def row(self) -> dict:
        d = asdict(self)
        return {k: (d[k] if isinstance(d[k], str) else repr(float(d[k]))) for k in GAP_COLUMNS}


def theorem_gap(rho_minus: float, rho_plus: float, h: HartenEntropy) -> GapSample:
    a1, b1 = h.density_exponent, h.inverse_density_exponent
    a2, b2 = _special_exponents(h)
    lhs = float(h.gamma * _power_jump_ratio(rho_minus, rho_plus, a1, b1))
    rhs = float((h.gamma - 1) * _power_jump_ratio(rho_minus, rho_plus, a2, b2))
    gap = 0.0 if rho_minus == rho_plus else lhs - rhs
    return GapSample(float(rho_minus), float(rho_plus), h.alpha, h.gamma, lhs, rhs, gap,
                     _regime(rho_minus, rho_plus))


def gap_scan(alphas=DEFAULT_ALPHAS, gamma: float = 1.4, rho_grid=DEFAULT_RHO_GRID):
    """All gap samples, ordered alpha, then rho_minus, then rho_plus."""
    rows = []
    for alpha in alphas:
        h = HartenEntropy(alpha, gamma)
        for rm in rho_grid:
            for rp in rho_grid:
                rows.append(theorem_gap(rm, rp, h))
    return rows


def gap_is_witnessed(sample: GapSample, tol: float = 1e-10) -> bool:
    return abs(sample.gap) > tol * (1 + abs(sample.lhs))


def witness_fraction(samples, tol: float = 1e-10) -> float:
    """Fraction of off-diagonal samples with a resolvable gap (1.0 if none)."""
    off = [s for s in samples if s.rho_minus != s.rho_plus]
    if not off:
        return 1.0
    return sum(gap_is_witnessed(s, tol) for s in off) / len(off)


def gap_scan_csv(samples) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=GAP_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for s in samples:
        writer.writerow(s.row())
    return buf.getvalue()


__all__ = [
    "GapSample",
    "entropy_prefactor",
    "gap_is_witnessed",
    "gap_scan",
    "gap_scan_csv",
    "lemma_suite",
    "lemma_suite_csv",
    "lemma1_density_flux",
    "lemma1_verify",
    "lemma2_density_flux",
    "lemma2_density_flux_pressure_form",
    "lemma2_pressure_pair",
    "pep_completed_flux",
    "theorem_gap",
    "witness_fraction",
]
