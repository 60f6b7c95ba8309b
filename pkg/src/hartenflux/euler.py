"""Ideal-gas compressible Euler equations in 1D and 2D.

State arrays are plain numpy arrays whose last axis holds the conservative
variables ``(rho, rho*v_1[, rho*v_2], rho*e)``; the spatial dimension is
inferred from that axis (3 -> 1D, 4 -> 2D). All functions broadcast over
leading axes. :class:`EulerState` is a small immutable convenience wrapper
for single states.

Two entropy frameworks are provided: the one-parameter Harten family

    U = -(gamma + alpha)/(gamma - 1) * rho * (p / rho**gamma)**(1/(alpha + gamma))

and the physical (logarithmic) entropy ``U = -rho*s/(gamma - 1)`` with
``s = log(p / rho**gamma)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np


class AdmissibilityError(ValueError):
    """Raised when a state has non-positive density or pressure."""


@dataclass(frozen=True)
class GasModel:
    gamma: float = 1.4

    def __post_init__(self):
        if not self.gamma > 1:
            raise ValueError(f"gamma must be > 1, got {self.gamma}")


@dataclass(frozen=True)
class EulerState:
    """A single conservative state.

    ``momentum`` has one entry per spatial direction.
    """

    rho: float
    momentum: tuple
    total_energy: float

    def __post_init__(self):
        object.__setattr__(self, "momentum", tuple(float(m) for m in self.momentum))
        if len(self.momentum) not in (1, 2):
            raise ValueError("only 1D and 2D states are supported")
        if not self.rho > 0:
            raise AdmissibilityError(f"density must be positive, got {self.rho}")
        kinetic = sum(m * m for m in self.momentum) / (2 * self.rho)
        if not self.total_energy - kinetic > 0:
            raise AdmissibilityError("internal energy must be positive")

    @property
    def dim(self) -> int:
        return len(self.momentum)

    def as_array(self) -> np.ndarray:
        return np.array([self.rho, *self.momentum, self.total_energy])

    @classmethod
    def from_array(cls, u) -> "EulerState":
        u = np.asarray(u, dtype=float)
        return cls(float(u[0]), tuple(u[1:-1]), float(u[-1]))


StateLike = Union[EulerState, np.ndarray, Sequence[float]]


def as_state_array(u: StateLike) -> np.ndarray:
    if isinstance(u, EulerState):
        return u.as_array()
    u = np.asarray(u)
    # complex input is kept for complex-step differentiation
    return u if np.iscomplexobj(u) else u.astype(float, copy=False)


def spatial_dim(u: np.ndarray) -> int:
    nvar = u.shape[-1]
    if nvar not in (3, 4):
        raise ValueError(f"expected 3 or 4 conservative variables, got {nvar}")
    return nvar - 2


def prim_to_cons(rho, velocity, pressure, gas: GasModel) -> np.ndarray:
    """Convert primitive variables to a conservative state array.

    ``velocity`` is a scalar (1D) or has a trailing axis of length 1 or 2.
    """
    rho = np.asarray(rho, dtype=float)
    pressure = np.asarray(pressure, dtype=float)
    velocity = np.asarray(velocity, dtype=float)
    if velocity.ndim == rho.ndim:
        velocity = velocity[..., None]
    if np.any(~(rho > 0)):
        raise AdmissibilityError("density must be positive")
    if np.any(~(pressure > 0)):
        raise AdmissibilityError("pressure must be positive")
    momentum = rho[..., None] * velocity
    energy = pressure / (gas.gamma - 1) + 0.5 * rho * np.sum(velocity**2, axis=-1)
    return np.concatenate([rho[..., None], momentum, energy[..., None]], axis=-1)


def cons_to_prim(u: StateLike, gas: GasModel, check: bool = True):
    """Return ``(rho, velocity, pressure)``; velocity keeps a trailing axis."""
    u = as_state_array(u)
    spatial_dim(u)
    rho = u[..., 0]
    velocity = u[..., 1:-1] / rho[..., None]
    pressure = (gas.gamma - 1) * (u[..., -1] - 0.5 * rho * np.sum(velocity**2, axis=-1))
    if check:
        # real parts only: complex-step perturbations ride along unchecked
        if np.any(~(np.real(rho) > 0)):
            raise AdmissibilityError("density must be positive")
        if np.any(~(np.real(pressure) > 0)):
            raise AdmissibilityError("derived pressure is not positive")
    return rho, velocity, pressure


def physical_flux(u: StateLike, direction: int, gas: GasModel) -> np.ndarray:
    """Euler flux in coordinate ``direction`` (0 = x, 1 = y)."""
    u = as_state_array(u)
    rho, v, p = cons_to_prim(u, gas)
    vd = v[..., direction]
    f = u * vd[..., None]
    f[..., 1 + direction] += p
    f[..., -1] += p * vd
    return f


@dataclass(frozen=True)
class HartenEntropy:
    alpha: float
    gamma: float = 1.4

    def __post_init__(self):
        GasModel(self.gamma)
        if not (self.alpha > 0 or self.alpha < -self.gamma):
            raise ValueError(
                f"alpha={self.alpha} violates the convexity constraint "
                f"alpha > 0 or alpha < -gamma (gamma={self.gamma})"
            )

    @property
    def gas(self) -> GasModel:
        return GasModel(self.gamma)

    @property
    def density_exponent(self) -> float:
        """alpha / (alpha + gamma)"""
        return self.alpha / (self.alpha + self.gamma)

    @property
    def inverse_density_exponent(self) -> float:
        """-gamma / (alpha + gamma)"""
        return -self.gamma / (self.alpha + self.gamma)

    @property
    def beta(self) -> float:
        return alpha_to_beta(self.alpha, self.gamma)

    def _entropy_power(self, rho, p):
        # (p / rho**gamma)**(1/(alpha+gamma))
        k = self.alpha + self.gamma
        return np.exp((np.log(p) - self.gamma * np.log(rho)) / k)

    def entropy(self, u):
        return harten_entropy(u, self)

    def variables(self, u):
        return harten_entropy_variables(u, self)

    def potential(self, u, direction):
        return harten_flux_potential(u, self, direction)

    def variables_to_state(self, w):
        return harten_variables_to_state(w, self)

    @property
    def name(self) -> str:
        return f"harten(alpha={self.alpha:g})"


@dataclass(frozen=True)
class LogarithmicEntropy:
    gas: GasModel = field(default_factory=GasModel)

    @property
    def gamma(self) -> float:
        return self.gas.gamma

    def entropy(self, u):
        return log_entropy_pair(u, self.gas, 0)[0]

    def variables(self, u):
        return log_entropy_pair(u, self.gas, 0)[1]

    def potential(self, u, direction):
        return log_entropy_pair(u, self.gas, direction)[2]

    @property
    def name(self) -> str:
        return "logarithmic"


EntropyPair = Union[HartenEntropy, LogarithmicEntropy]


def harten_entropy(u: StateLike, h: HartenEntropy) -> np.ndarray:
    rho, _, p = cons_to_prim(u, h.gas)
    return -(h.gamma + h.alpha) / (h.gamma - 1) * rho * h._entropy_power(rho, p)


def harten_entropy_variables(u: StateLike, h: HartenEntropy) -> np.ndarray:
    """Gradient of :func:`harten_entropy` with respect to the conservative variables."""
    rho, v, p = cons_to_prim(u, h.gas)
    c = rho / p * h._entropy_power(rho, p)
    w1 = -h.alpha / (h.gamma - 1) * p / rho - 0.5 * np.sum(v**2, axis=-1)
    w = np.concatenate([w1[..., None], v, -np.ones_like(w1)[..., None]], axis=-1)
    return c[..., None] * w


def harten_flux_potential(u: StateLike, h: HartenEntropy, direction: int) -> np.ndarray:
    rho, v, p = cons_to_prim(u, h.gas)
    return rho * h._entropy_power(rho, p) * v[..., direction]


def harten_variables_to_state(w, h: HartenEntropy) -> np.ndarray:
    """Closed-form inverse of :func:`harten_entropy_variables`.

    Raises :class:`AdmissibilityError` if ``w`` is not the image of an
    admissible state.
    """
    w = np.asarray(w, dtype=float)
    g, a = h.gamma, h.alpha
    c = -w[..., -1]
    if np.any(~(c > 0)):
        raise AdmissibilityError("last entropy variable must be negative")
    v = w[..., 1:-1] / c[..., None]
    theta = -(g - 1) / a * (w[..., 0] / c + 0.5 * np.sum(v**2, axis=-1))  # p / rho
    if np.any(~(theta > 0)):
        raise AdmissibilityError("entropy variables map to non-positive pressure")
    # c = theta**-1 * (theta * rho**(1-g))**(1/(a+g))
    log_rho = ((a + g) * np.log(c * theta) - np.log(theta)) / (1 - g)
    rho = np.exp(log_rho)
    return prim_to_cons(rho, v, theta * rho, h.gas)


def log_entropy_pair(u: StateLike, gas: GasModel, direction: int = 0):
    """Return ``(U, w, psi_d)`` for the logarithmic entropy."""
    rho, v, p = cons_to_prim(u, gas)
    g = gas.gamma
    s = np.log(p) - g * np.log(rho)
    U = -rho * s / (g - 1)
    w1 = (g - s) / (g - 1) - 0.5 * rho / p * np.sum(v**2, axis=-1)
    w = np.concatenate(
        [w1[..., None], (rho / p)[..., None] * v, (-rho / p)[..., None]], axis=-1
    )
    psi = rho * v[..., direction]
    return U, w, psi


def beta_to_alpha(beta: float, gas: GasModel) -> float:
    """Invert ``beta = (alpha + gamma) / (1 - gamma)``.

    Emits a :class:`UserWarning` when the resulting alpha lies outside the
    convexity region; the value is returned regardless.
    """
    g = gas.gamma
    alpha = beta * (1 - g) - g
    if not (alpha > 0 or alpha < -g):
        warnings.warn(
            f"beta={beta} gives alpha={alpha}, outside the convexity region",
            UserWarning,
            stacklevel=2,
        )
    return alpha


def alpha_to_beta(alpha: float, gamma: float) -> float:
    return (alpha + gamma) / (1 - gamma)


def is_convex_alpha(alpha: float, gamma: float) -> bool:
    return alpha > 0 or alpha < -gamma


def entropy_pair(kind: str, gamma: float = 1.4, alpha: float | None = None) -> EntropyPair:
    if kind in ("log", "logarithmic"):
        return LogarithmicEntropy(GasModel(gamma))
    if kind == "harten":
        if alpha is None:
            raise ValueError("harten entropy needs alpha")
        return HartenEntropy(alpha, gamma)
    raise ValueError(f"unknown entropy {kind!r}")


def finite_difference_gradient(fun, u, scale: float = 1e-6) -> np.ndarray:
    """Fourth-order central-difference gradient of a scalar function of one state.

    The step is ``scale * max(1, |u_i|)``. The five-point stencil keeps the
    truncation error negligible even where the internal energy is a tiny
    fraction of the total energy (high Mach numbers).
    """
    u = np.asarray(u, dtype=float)
    grad = np.empty_like(u)
    for i in range(u.size):
        step = scale * max(1.0, abs(u[i]))
        vals = []
        for k in (-2, -1, 1, 2):
            x = u.copy()
            x[i] += k * step
            vals.append(float(fun(x)))
        grad[i] = (vals[0] - 8 * vals[1] + 8 * vals[2] - vals[3]) / (12 * step)
    return grad


def finite_difference_hessian(fun, u, scale: float = 1e-4) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    n = u.size
    steps = np.array([scale * max(1.0, abs(x)) for x in u])
    hess = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            vals = []
            for si, sj in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
                x = u.copy()
                x[i] += si * steps[i]
                x[j] += sj * steps[j]
                vals.append(float(fun(x)))
            hess[i, j] = (vals[0] - vals[1] - vals[2] + vals[3]) / (4 * steps[i] * steps[j])
    return 0.5 * (hess + hess.T)


def random_primitives(rng: np.random.Generator, n: int, dim: int = 1,
                      rho_range=(1e-2, 1e2), p_range=(1e-2, 1e2), v_max: float = 5.0,
                      max_mach: Optional[float] = None, gamma: float = 1.4):
    """Log-uniform density/pressure and uniform velocity samples.

    With ``max_mach`` the velocity components are instead drawn uniformly
    in ``[-1, 1] * max_mach * c / sqrt(dim)``, so the Mach number stays
    below ``max_mach`` (``c`` is the sound speed for ``gamma``).
    """
    rho = np.exp(rng.uniform(math.log(rho_range[0]), math.log(rho_range[1]), n))
    p = np.exp(rng.uniform(math.log(p_range[0]), math.log(p_range[1]), n))
    if max_mach is None:
        v = rng.uniform(-v_max, v_max, (n, dim))
    else:
        c = np.sqrt(gamma * p / rho)
        v = rng.uniform(-1, 1, (n, dim)) * (max_mach * c / math.sqrt(dim))[:, None]
    return rho, v, p
