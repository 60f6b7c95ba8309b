"""Two-point numerical fluxes and structural property checks.

Every flux maps ``(u_minus, u_plus, direction)`` to a flux vector and
broadcasts over leading axes of the state arrays. Jumps are taken as
``[[a]] = a_plus - a_minus`` and means as ``{a} = (a_plus + a_minus) / 2``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .euler import (
    AdmissibilityError,
    EntropyPair,
    GasModel,
    HartenEntropy,
    LogarithmicEntropy,
    as_state_array,
    cons_to_prim,
    harten_entropy_variables,
    harten_flux_potential,
    harten_variables_to_state,
    physical_flux,
    prim_to_cons,
    random_primitives,
)

LOG_MEAN_SERIES_THRESHOLD = 1e-4
DEFAULT_QUADRATURE_NODES = 15
DEFAULT_ENSEMBLE_SIZE = 10_000
DEFAULT_SEED = 20220712
MAX_PANELS = 4096
ADAPTIVE_CHUNK = 1024


class PathError(AdmissibilityError):
    """The straight entropy-variable path left the admissible set."""


def log_mean(a, b):
    """Logarithmic mean ``(b - a) / (log b - log a)``, with ``log_mean(a, a) = a``."""
    a = as_state_array(a)
    b = as_state_array(b)
    if np.any(~(np.real(a) > 0)) or np.any(~(np.real(b) > 0)):
        raise ValueError("log_mean needs positive arguments")
    diff = b - a
    rel = np.abs(np.real(diff)) / np.real(a)
    near = rel < LOG_MEAN_SERIES_THRESHOLD
    u = (diff / (a + b)) ** 2
    series = 0.5 * (a + b) / (1 + u / 3 + u**2 / 5 + u**3 / 7)
    with np.errstate(divide="ignore", invalid="ignore"):
        # log1p loses accuracy as b/a -> 0, log(b/a) as b/a -> 1
        log_ratio = np.where(rel < 0.5, np.log1p(diff / a), np.log(b / a))
        direct = diff / log_ratio
    out = np.where(near, series, direct)
    return out[()] if out.ndim == 0 else out


@dataclass(frozen=True)
class TwoPointFlux:
    """A named two-point flux with the properties it claims.

    ``entropy`` is the entropy pair the flux is designed to conserve (None if
    it is not entropy conservative). ``tolerance`` is the accuracy to which
    consistency, symmetry and entropy conservation hold.
    """

    name: str
    function: Callable = field(repr=False)
    gas: GasModel = GasModel()
    entropy: Optional[EntropyPair] = None
    pep: bool = False
    kep: bool = False
    symmetric: bool = True
    pressure_free_density: bool = False
    tolerance: float = 1e-12

    def __call__(self, u_minus, u_plus, direction: int = 0) -> np.ndarray:
        return self.function(as_state_array(u_minus), as_state_array(u_plus), direction)

    evaluate = __call__

    def physical(self, u, direction: int = 0) -> np.ndarray:
        return physical_flux(u, direction, self.gas)


def _central(u_minus, u_plus, direction, gas):
    return 0.5 * (physical_flux(u_minus, direction, gas) + physical_flux(u_plus, direction, gas))


def central_flux(gas: GasModel = GasModel()) -> TwoPointFlux:
    return TwoPointFlux(
        "central",
        lambda um, up, d: _central(um, up, d, gas),
        gas=gas,
        pep=True,
        kep=True,
        pressure_free_density=True,
    )


def _log_ec_kep_pep(u_minus, u_plus, direction, gas):
    rho_m, v_m, p_m = cons_to_prim(u_minus, gas)
    rho_p, v_p, p_p = cons_to_prim(u_plus, gas)
    rho_log = log_mean(rho_m, rho_p)
    v_avg = 0.5 * (v_m + v_p)
    p_avg = 0.5 * (p_m + p_p)
    # 1 / log-mean of rho/p
    inv_beta = 1.0 / log_mean(rho_m / p_m, rho_p / p_p)
    f_rho = rho_log * v_avg[..., direction]
    f_mom = f_rho[..., None] * v_avg
    f_mom[..., direction] += p_avg
    vv = 0.5 * np.sum(v_m * v_p, axis=-1)
    f_energy = (
        f_rho * (vv + inv_beta / (gas.gamma - 1))
        + 0.5 * (p_m * v_p[..., direction] + p_p * v_m[..., direction])
    )
    return np.concatenate([f_rho[..., None], f_mom, f_energy[..., None]], axis=-1)


def log_ec_kep_pep_flux(gas: GasModel = GasModel()) -> TwoPointFlux:
    """EC flux for the logarithmic entropy that is also KEP and PEP."""
    return TwoPointFlux(
        "log-ec",
        lambda um, up, d: _log_ec_kep_pep(um, up, d, gas),
        gas=gas,
        entropy=LogarithmicEntropy(gas),
        pep=True,
        kep=True,
        pressure_free_density=True,
    )


def _gauss_legendre_unit(n_nodes: int):
    x, w = np.polynomial.legendre.leggauss(n_nodes)
    return 0.5 * (x + 1), 0.5 * w


class QuadratureError(ArithmeticError):
    """Adaptive path quadrature did not converge."""


@dataclass(frozen=True)
class _HartenPath:
    """Straight entropy-variable path between two states, per row.

    Along ``w(t) = (1-t) w_- + t w_+`` the quantity ``Q = w_1 c + |w_mom|^2/2``
    (``c = -w_last``) is a quadratic in ``t``; writing it through its endpoint
    values and leading coefficient avoids the cancellation of forming it from
    the interpolated entropy variables.
    """

    c: tuple
    mom: tuple
    q: tuple
    q2: np.ndarray

    @classmethod
    def between(cls, u_minus, u_plus, h: HartenEntropy):
        g, a = h.gamma, h.alpha
        ends = []
        for u in (u_minus, u_plus):
            rho, v, p = cons_to_prim(u, h.gas)
            c = rho / p * h._entropy_power(rho, p)
            q = -a / (g - 1) * (p / rho) * c**2
            ends.append((c, c[..., None] * v, q))
        (c_m, m_m, q_m), (c_p, m_p, q_p) = ends
        w1_m = q_m / c_m - 0.5 * np.sum(m_m**2, axis=-1) / c_m
        w1_p = q_p / c_p - 0.5 * np.sum(m_p**2, axis=-1) / c_p
        q2 = (w1_p - w1_m) * (c_p - c_m) + 0.5 * np.sum((m_p - m_m) ** 2, axis=-1)
        return cls((c_m, c_p), (m_m, m_p), (q_m, q_p), q2)

    def take(self, idx):
        return _HartenPath(tuple(x[idx] for x in self.c), tuple(x[idx] for x in self.mom),
                           tuple(x[idx] for x in self.q), self.q2[idx])

    def primitives(self, t, h: HartenEntropy):
        g, a = h.gamma, h.alpha
        c = (1 - t) * self.c[0] + t * self.c[1]
        mom = (1 - t)[..., None] * self.mom[0] + t[..., None] * self.mom[1]
        q = self.quadratic(t)
        theta = -(g - 1) / a * q / c**2  # p / rho
        if np.any(~(np.real(c) > 0)) or np.any(~(np.real(theta) > 0)):
            raise PathError("entropy-variable path leaves the admissible set")
        # c = theta**-1 * (theta * rho**(1-g))**(1/(a+g))
        rho = np.exp(((a + g) * np.log(c * theta) - np.log(theta)) / (1 - g))
        return rho, mom / c[..., None], theta * rho


    def quadratic(self, t):
        """``Q(t)``, expanded about the nearer endpoint.

        ``Q = q_0 + t (q_1 - q_0 - q_2) + q_2 t^2`` about ``t = 0`` and the
        mirrored form in ``s = 1 - t`` about ``t = 1``. Near an endpoint where
        ``Q`` is tiny but ``q_2`` is large these forms avoid the cancellation
        of the symmetric interpolation formula.
        """
        q0, q1, q2 = self.q[0], self.q[1], self.q2
        s = 1 - t
        from_left = q0 + t * ((q1 - q2) - q0) + q2 * t * t
        from_right = q1 + s * ((q0 - q2) - q1) + q2 * s * s
        return np.where(t <= 0.5, from_left, from_right)

    def admissible(self, alpha: float) -> np.ndarray:
        """Whether the whole path maps to positive pressure, per row."""
        q0, q1, q2 = self.q[0], self.q[1], self.q2
        # interior extremum of q2 t^2 + (q1 - q0 - q2) t + q0, in vertex form
        with np.errstate(divide="ignore", invalid="ignore"):
            t_star = (q2 + q0 - q1) / (2 * q2)
            q_star = q0 - (q2 + q0 - q1) ** 2 / (4 * q2)
        interior = (q2 != 0) & (t_star > 0) & (t_star < 1)
        q_star = np.where(interior, q_star, q0)
        sign = -np.sign(alpha)
        return (sign * q0 > 0) & (sign * q1 > 0) & (sign * q_star > 0)


def harten_path_admissible(u_minus, u_plus, h: HartenEntropy) -> np.ndarray:
    """True where the straight entropy-variable path stays admissible.

    Always true for ``alpha > 0`` (the image of the entropy-variable map is
    convex there); for ``alpha < -gamma`` distant states can fail.
    """
    u_minus, u_plus = np.broadcast_arrays(as_state_array(u_minus), as_state_array(u_plus))
    return _HartenPath.between(u_minus, u_plus, h).admissible(h.alpha)


def _primitive_flux(rho, v, p, direction, gamma):
    vd = v[..., direction]
    mass = rho * vd
    mom = mass[..., None] * v
    mom[..., direction] += p
    energy = (p * gamma / (gamma - 1) + 0.5 * rho * np.sum(v**2, axis=-1)) * vd
    return np.concatenate([mass[..., None], mom, energy[..., None]], axis=-1)


def _path_panel(path: _HartenPath, a, b, direction, h, n_nodes):
    """Gauss-Legendre estimate of ``int_a^b f(u(w(t))) dt`` per row."""
    t, weights = _gauss_legendre_unit(n_nodes)
    theta = a + (b - a) * t[:, None]
    rho, v, p = path.primitives(theta, h)
    f = np.tensordot(weights, _primitive_flux(rho, v, p, direction, h.gamma), axes=1)
    return (b - a)[:, None] * f


def _harten_quadrature(u_minus, u_plus, direction, h: HartenEntropy, n_nodes: int,
                       rtol: float, max_depth: int, allow_nan: bool = False,
                       certify: Optional[float] = None):
    u_minus, u_plus = np.broadcast_arrays(u_minus, u_plus)
    shape = u_minus.shape
    um = u_minus.reshape(-1, shape[-1])
    up = u_plus.reshape(-1, shape[-1])
    path = _HartenPath.between(um, up, h)
    m = len(um)
    f = _path_panel(path, np.zeros(m), np.ones(m), direction, h, n_nodes)

    if rtol is not None:
        # whole-interval estimate is kept when it already conserves entropy
        w_jump = harten_entropy_variables(up, h) - harten_entropy_variables(um, h)
        psi_jump = harten_flux_potential(up, h, direction) - harten_flux_potential(um, h, direction)
        res = np.abs(np.real(np.sum(w_jump * f, axis=-1) - psi_jump))
        scale = 1 + np.sum(np.abs(np.real(w_jump * f)), axis=-1) + np.abs(np.real(psi_jump))
        todo = np.flatnonzero(res > rtol * scale)
        # row chunks bound the memory held by live panels
        for start in range(0, todo.size, ADAPTIVE_CHUNK):
            rows = todo[start:start + ADAPTIVE_CHUNK]
            f[rows] = _adaptive_panels(path.take(rows), f[rows], direction, h, n_nodes,
                                       rtol, max_depth)
        if todo.size and certify is not None:
            # panels can agree with each other and still miss a steep layer
            wj, fj = w_jump[todo], f[todo]
            res = np.abs(np.real(np.sum(wj * fj, axis=-1) - psi_jump[todo]))
            scale = 1 + np.sum(np.abs(np.real(wj * fj)), axis=-1) + np.abs(np.real(psi_jump[todo]))
            f[todo[~(res <= certify * scale)]] = np.nan

    same = np.all(um == up, axis=-1)
    if np.any(same):
        f[same] = physical_flux(um[same], direction, h.gas)
    bad = np.isnan(np.real(f)).any(axis=-1)
    if np.any(bad) and not allow_nan:
        raise QuadratureError(
            f"path quadrature did not converge for {int(bad.sum())} of {m} state pairs")
    return f.reshape(shape)


def _adaptive_panels(path, coarse, direction, h, n_nodes, rtol, max_depth,
                     max_panels=MAX_PANELS):
    """Bisect panels until each agrees with its two halves.

    Rows that would need more than ``max_panels`` live panels, or more than
    ``max_depth`` bisection levels, come back as NaN.
    """
    total = np.zeros_like(coarse)
    scale = 1 + np.max(np.abs(coarse), axis=-1)
    n = len(coarse)
    idx = np.arange(n)
    a = np.zeros(n)
    b = np.ones(n)
    est = coarse
    failed = np.zeros(n, dtype=bool)
    for _ in range(max_depth):
        sub = path.take(idx)
        mid = 0.5 * (a + b)
        left = _path_panel(sub, a, mid, direction, h, n_nodes)
        right = _path_panel(sub, mid, b, direction, h, n_nodes)
        fine = left + right
        err = np.max(np.abs(fine - est), axis=-1)
        # relative floor keeps roundoff on steep panels from forcing endless bisection
        ok = err <= rtol * np.maximum((b - a) * scale[idx], np.max(np.abs(fine), axis=-1))
        np.add.at(total, idx[ok], fine[ok])
        keep = ~ok
        failed |= np.bincount(idx[keep], minlength=n) * 2 > max_panels
        keep &= ~failed[idx]
        if not np.any(keep):
            break
        idx = np.concatenate([idx[keep], idx[keep]])
        a, b = np.concatenate([a[keep], mid[keep]]), np.concatenate([mid[keep], b[keep]])
        est = np.concatenate([left[keep], right[keep]])
    else:
        failed[idx] = True
    total[failed] = np.nan
    return total


def harten_ec_quadrature_flux(h: HartenEntropy, n_nodes: int = DEFAULT_QUADRATURE_NODES,
                              tolerance: float = 1e-10, rtol: Optional[float] = 1e-13,
                              max_depth: int = 40, allow_nan: bool = False) -> TwoPointFlux:
    """Entropy-conservative flux for a Harten entropy via the path integral.

    ``f* = int_0^1 f(u(w(t))) dt`` along the straight line between the two
    entropy-variable vectors, evaluated with ``n_nodes``-point Gauss-Legendre
    quadrature. If the single-panel estimate misses entropy conservation by
    more than ``rtol`` (relative), the interval is bisected adaptively; pass
    ``rtol=None`` for the plain fixed-node rule. Paths that pass close to
    vacuum (large velocity jumps at low pressure) need the refinement.

    A refined pair that exceeds the panel budget, or whose result still
    misses entropy conservation by more than ``tolerance``, raises
    :class:`QuadratureError`, or yields a NaN row with ``allow_nan=True``
    (useful when screening large ensembles).
    """
    if n_nodes < 1:
        raise ValueError("n_nodes must be positive")
    suffix = "" if rtol is not None else ",fixed"
    return TwoPointFlux(
        f"harten-ec(alpha={h.alpha:g},n={n_nodes}{suffix})",
        lambda um, up, d: _harten_quadrature(um, up, d, h, n_nodes, rtol, max_depth,
                                                     allow_nan, tolerance),
        gas=h.gas,
        entropy=h,
        tolerance=tolerance,
    )


# ---------------------------------------------------------------------------
# Fluxes assembled from pluggable component rules


def jump_power(a, b, exponent):
    """``b**exponent - a**exponent`` without cancellation for ``a ~ b``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return np.exp(exponent * np.log(a)) * np.expm1(exponent * np.log(b / a))


def harten_pep_density_flux(rho_minus, rho_plus, velocity, h: HartenEntropy):
    """Density flux forced by EC + PEP under constant pressure and velocity."""
    a, b = h.density_exponent, h.inverse_density_exponent
    return _power_jump_ratio(rho_minus, rho_plus, a, b) * (-h.gamma / h.alpha) * velocity


def _power_jump_ratio(rho_minus, rho_plus, a, b):
    """``[[rho**a]] / [[rho**b]]`` with its analytic limit on the diagonal."""
    rho_minus = np.asarray(rho_minus, dtype=float)
    rho_plus = np.asarray(rho_plus, dtype=float)
    ratio = rho_plus / rho_minus
    near = np.abs(ratio - 1) < 1e-8
    mid = np.sqrt(rho_minus * rho_plus)
    # first-order expansion around the geometric mean is exact to O(delta^2)
    limit = a / b * mid ** (a - b)
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = jump_power(rho_minus, rho_plus, a) / jump_power(rho_minus, rho_plus, b)
    out = np.where(near, limit, direct)
    return out[()] if out.ndim == 0 else out


def density_rule_harten_pep(h: HartenEntropy):
    def rule(prim_minus, prim_plus, direction):
        (rm, vm, _), (rp, vp, _) = prim_minus, prim_plus
        v_avg = 0.5 * (vm[..., direction] + vp[..., direction])
        return harten_pep_density_flux(rm, rp, v_avg, h)
    return rule


def density_rule_arithmetic(prim_minus, prim_plus, direction):
    (rm, vm, _), (rp, vp, _) = prim_minus, prim_plus
    return 0.5 * (rm * vm[..., direction] + rp * vp[..., direction])


def momentum_rule_kep(prim_minus, prim_plus, direction, f_rho):
    (_, vm, pm), (_, vp, pp) = prim_minus, prim_plus
    f_mom = f_rho[..., None] * 0.5 * (vm + vp)
    f_mom[..., direction] += 0.5 * (pm + pp)
    return f_mom


@dataclass(frozen=True)
class BlowUpReport:
    """Returned instead of a flux when the energy component cannot be solved.

    The entropy-conservation equation is linear in the energy flux with
    coefficient ``[[w_last]]``; when that jump vanishes for distinct states
    the solved energy flux is unbounded.
    """

    divisor: float
    numerator: float
    threshold: float

    def __bool__(self):
        return False


def harten_ec_solved_flux(u_minus, u_plus, direction: int, h: HartenEntropy,
                          density_flux_rule=None, momentum_flux_rule=momentum_rule_kep,
                          threshold: float = 1e-12):
    """Prescribe density and momentum fluxes, solve entropy conservation for energy.

    Works on a single pair of states. Returns the flux vector, or a
    :class:`BlowUpReport` if ``[[w_last]]`` vanishes for distinct states.
    """
    gas = h.gas
    u_minus = as_state_array(u_minus)
    u_plus = as_state_array(u_plus)
    if np.array_equal(u_minus, u_plus):
        return physical_flux(u_minus, direction, gas)
    if density_flux_rule is None:
        density_flux_rule = density_rule_harten_pep(h)
    prim_m = cons_to_prim(u_minus, gas)
    prim_p = cons_to_prim(u_plus, gas)
    f_rho = np.asarray(density_flux_rule(prim_m, prim_p, direction), dtype=float)
    f_mom = momentum_flux_rule(prim_m, prim_p, direction, f_rho)
    w_jump = harten_entropy_variables(u_plus, h) - harten_entropy_variables(u_minus, h)
    psi_jump = (harten_flux_potential(u_plus, h, direction)
                - harten_flux_potential(u_minus, h, direction))
    numerator = float(psi_jump - w_jump[0] * f_rho - np.dot(w_jump[1:-1], f_mom))
    divisor = float(w_jump[-1])
    w_last_minus = float(harten_entropy_variables(u_minus, h)[-1])
    limit = threshold * (1 + abs(w_last_minus))
    if abs(divisor) <= limit:
        return BlowUpReport(divisor=divisor, numerator=numerator, threshold=limit)
    f_energy = numerator / divisor
    return np.concatenate([[float(f_rho)], np.atleast_1d(f_mom), [f_energy]])


# ---------------------------------------------------------------------------
# Property checks


def ec_residual(flux, u_minus, u_plus, direction: int, pair: EntropyPair):
    """``[[w]] . f*(u_minus, u_plus) - [[psi]]``, elementwise over leading axes."""
    u_minus = as_state_array(u_minus)
    u_plus = as_state_array(u_plus)
    f = flux(u_minus, u_plus, direction)
    w_jump = pair.variables(u_plus) - pair.variables(u_minus)
    psi_jump = pair.potential(u_plus, direction) - pair.potential(u_minus, direction)
    return np.sum(w_jump * f, axis=-1) - psi_jump


def ec_residual_scale(flux, u_minus, u_plus, direction, pair):
    """Roundoff scale of :func:`ec_residual`: ``1 + sum |[[w_i]] f_i| + |[[psi]]|``."""
    f = flux(u_minus, u_plus, direction)
    w_jump = pair.variables(u_plus) - pair.variables(u_minus)
    psi_jump = pair.potential(u_plus, direction) - pair.potential(u_minus, direction)
    return 1 + np.sum(np.abs(w_jump * f), axis=-1) + np.abs(psi_jump)


@dataclass
class PropertyReport:
    property: str
    flux: str
    worst_residual: float
    state_minus: np.ndarray
    state_plus: np.ndarray
    tolerance: float
    seed: Optional[int] = None
    n_samples: int = 0

    @property
    def passed(self) -> bool:
        return bool(self.worst_residual <= self.tolerance)

    def row(self) -> dict:
        return {
            "property": self.property,
            "flux": self.flux,
            "worst_residual": repr(float(self.worst_residual)),
            "state_minus": " ".join(repr(float(x)) for x in np.ravel(self.state_minus)),
            "state_plus": " ".join(repr(float(x)) for x in np.ravel(self.state_plus)),
            "pass": str(self.passed).lower(),
        }


REPORT_COLUMNS = ["property", "flux", "worst_residual", "state_minus", "state_plus", "pass"]


def reports_to_csv(reports, seed: Optional[int] = None) -> str:
    buf = io.StringIO()
    if seed is not None:
        buf.write(f"# seed={seed}\n")
    writer = csv.DictWriter(buf, fieldnames=REPORT_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for r in reports:
        writer.writerow(r.row())
    return buf.getvalue()


def _worst(name, flux, residuals, u_minus, u_plus, tol, seed):
    residuals = np.abs(np.asarray(residuals, dtype=float))
    if residuals.ndim > 1:
        residuals = residuals.reshape(residuals.shape[0], -1).max(axis=1)
    residuals = np.where(np.isnan(residuals), np.inf, residuals)
    k = int(np.argmax(residuals))  # first index on ties
    return PropertyReport(name, flux.name, float(residuals[k]), u_minus[k], u_plus[k],
                          tol, seed, len(residuals))


@dataclass(frozen=True)
class Ensemble:
    """Seeded random pairs of admissible states."""

    u_minus: np.ndarray
    u_plus: np.ndarray
    seed: int

    def __len__(self):
        return len(self.u_minus)


def sample_pairs(n: int = DEFAULT_ENSEMBLE_SIZE, dim: int = 1, gas: GasModel = GasModel(),
                 seed: int = DEFAULT_SEED, **ranges) -> Ensemble:
    rng = np.random.default_rng(seed)
    rm, vm, pm = random_primitives(rng, n, dim, **ranges)
    rp, vp, pp = random_primitives(rng, n, dim, **ranges)
    return Ensemble(prim_to_cons(rm, vm, pm, gas), prim_to_cons(rp, vp, pp, gas), seed)


def ec_check(flux, pairs: Ensemble, pair: Optional[EntropyPair] = None, direction: int = 0,
             tol: Optional[float] = None) -> PropertyReport:
    """Worst relative EC residual over an ensemble."""
    pair = pair if pair is not None else flux.entropy
    tol = flux.tolerance if tol is None else tol
    res = ec_residual(flux, pairs.u_minus, pairs.u_plus, direction, pair)
    scale = ec_residual_scale(flux, pairs.u_minus, pairs.u_plus, direction, pair)
    return _worst("ec", flux, res / scale, pairs.u_minus, pairs.u_plus, tol, pairs.seed)


def pep_check(flux, p: float, v, density_samples, gas: GasModel = GasModel(),
              direction: int = 0, tol: float = 1e-13) -> PropertyReport:
    """Check that momentum and energy fluxes have the PEP structure at fixed (p, v).

    ``density_samples`` is an array of shape ``(n, 2)`` of density pairs. The
    reported residual is the largest deviation of
    ``f_mom - v f_rho`` and ``f_energy - |v|^2/2 f_rho`` from their values on
    the best-conditioned pair, relative to the magnitude of the terms involved.
    """
    rho = np.asarray(density_samples, dtype=float)
    v = np.atleast_1d(np.asarray(v, dtype=float))
    n = len(rho)
    vel = np.broadcast_to(v, (n, len(v)))
    um = prim_to_cons(rho[:, 0], vel, np.full(n, p), gas)
    up = prim_to_cons(rho[:, 1], vel, np.full(n, p), gas)
    f = flux(um, up, direction)
    f_rho = f[:, 0]
    c1 = f[:, 1:-1] - v * f_rho[:, None]
    c2 = f[:, -1] - 0.5 * np.dot(v, v) * f_rho
    scale1 = 1 + np.abs(f[:, 1:-1]) + np.abs(v * f_rho[:, None])
    scale2 = 1 + np.abs(f[:, -1]) + np.abs(0.5 * np.dot(v, v) * f_rho)
    # compare against the best-conditioned pair; each side carries its own roundoff
    ref = int(np.argmin(scale2))
    dev = np.maximum(
        np.max(np.abs(c1 - c1[ref]) / np.maximum(scale1, scale1[ref]), axis=1),
        np.abs(c2 - c2[ref]) / np.maximum(scale2, scale2[ref]),
    )
    return _worst("pep", flux, dev, um, up, tol, None)


def pep_ensemble_check(flux, n_states: int = 100, n_densities: int = 100, dim: int = 1,
                       gas: GasModel = GasModel(), seed: int = DEFAULT_SEED,
                       tol: float = 1e-13, **ranges) -> PropertyReport:
    """:func:`pep_check` repeated over random (p, v) states, worst case reported.

    ``ranges`` are passed on to :func:`~hartenflux.euler.random_primitives`.
    """
    rng = np.random.default_rng(seed)
    _, v, p = random_primitives(rng, n_states, dim, **ranges)
    worst = None
    for k in range(n_states):
        rho_pairs = np.stack([random_primitives(rng, n_densities, dim, **ranges)[0],
                              random_primitives(rng, n_densities, dim, **ranges)[0]], axis=1)
        rep = pep_check(flux, p[k], v[k], rho_pairs, gas, tol=tol)
        if worst is None or rep.worst_residual > worst.worst_residual:
            worst = rep
    worst.seed = seed
    worst.n_samples = n_states * n_densities
    return worst


def kep_check(flux, pairs: Ensemble, gas: GasModel = GasModel(), direction: int = 0,
              tol: float = 1e-13) -> PropertyReport:
    """Check ``f_mom - {v} f_rho`` is symmetric and reduces to the pressure."""
    um, up = pairs.u_minus, pairs.u_plus
    _, v_m, p_m = cons_to_prim(um, gas)
    _, v_p, _ = cons_to_prim(up, gas)
    v_avg = 0.5 * (v_m + v_p)

    def pressure_part(a, b):
        f = flux(a, b, direction)
        return f[..., 1:-1] - v_avg * f[..., :1], f

    k_ab, f_ab = pressure_part(um, up)
    k_ba, f_ba = pressure_part(up, um)
    sym = np.max(np.abs(k_ab - k_ba), axis=-1) / (1 + np.max(np.abs(f_ab[..., 1:-1]), axis=-1))

    f_aa = flux(um, um, direction)
    k_aa = f_aa[..., 1:-1] - v_m * f_aa[..., :1]
    expected = np.zeros_like(k_aa)
    expected[..., direction] = p_m
    cons = np.max(np.abs(k_aa - expected), axis=-1) / (1 + np.max(np.abs(f_aa[..., 1:-1]), axis=-1))
    return _worst("kep", flux, np.maximum(sym, cons), um, up, tol, pairs.seed)


def density_pressure_independence_check(flux, pairs: Ensemble, gas: GasModel = GasModel(),
                                        direction: int = 0, tol: float = 0.0,
                                        factors=(0.5, 1.0, 2.0)) -> PropertyReport:
    """Largest change of the density flux when p_minus, p_plus are rescaled."""
    rm, vm, pm = cons_to_prim(pairs.u_minus, gas)
    rp, vp, pp = cons_to_prim(pairs.u_plus, gas)
    base = flux(pairs.u_minus, pairs.u_plus, direction)[..., 0]
    change = np.zeros_like(base)
    for a in factors:
        for b in factors:
            f = flux(prim_to_cons(rm, vm, a * pm, gas), prim_to_cons(rp, vp, b * pp, gas),
                     direction)[..., 0]
            change = np.maximum(change, np.abs(f - base))
    return _worst("density_pressure_independence", flux, change, pairs.u_minus, pairs.u_plus,
                  tol, pairs.seed)


def consistency_check(flux, pairs: Ensemble, direction: int = 0,
                      tol: Optional[float] = None) -> PropertyReport:
    u = pairs.u_minus
    f_exact = flux.physical(u, direction)
    err = np.max(np.abs(flux(u, u, direction) - f_exact), axis=-1)
    err = err / (1 + np.max(np.abs(f_exact), axis=-1))
    tol = flux.tolerance if tol is None else tol
    return _worst("consistency", flux, err, u, u, tol, pairs.seed)


def symmetry_check(flux, pairs: Ensemble, direction: int = 0,
                   tol: Optional[float] = None) -> PropertyReport:
    ab = flux(pairs.u_minus, pairs.u_plus, direction)
    ba = flux(pairs.u_plus, pairs.u_minus, direction)
    err = np.max(np.abs(ab - ba), axis=-1) / (1 + np.max(np.abs(ab), axis=-1))
    tol = 1e-13 if tol is None and flux.tolerance <= 1e-12 else (tol or flux.tolerance)
    return _worst("symmetry", flux, err, pairs.u_minus, pairs.u_plus, tol, pairs.seed)


FLUX_NAMES = ("central", "log-ec", "harten-ec")


def make_flux(name: str, gas: GasModel = GasModel(), alpha: Optional[float] = None,
              n_nodes: int = DEFAULT_QUADRATURE_NODES) -> TwoPointFlux:
    if name == "central":
        return central_flux(gas)
    if name in ("log-ec", "log"):
        return log_ec_kep_pep_flux(gas)
    if name == "harten-ec":
        if alpha is None:
            raise ValueError("harten-ec flux needs alpha (or beta)")
        return harten_ec_quadrature_flux(HartenEntropy(alpha, gas.gamma), n_nodes)
    raise KeyError(f"unknown flux {name!r}; choose from {', '.join(FLUX_NAMES)}")
