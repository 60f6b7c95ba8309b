"""Flux-differencing DGSEM on periodic Cartesian meshes.

Field layout
------------
A field is stored as a flat vector whose unflattened shape is

* 1D: ``(element, node_x, variable)``
* 2D: ``(element_x, element_y, node_x, node_y, variable)``

i.e. elements first (x-major), then tensor-product nodes, with the
conservative variable index innermost. :meth:`MeshConfig.field_shape`
returns that shape; every function here also accepts a leading batch axis
on flat vectors, ``(batch, n_dof)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence

import numpy as np

from .euler import AdmissibilityError, GasModel, cons_to_prim, prim_to_cons

MAX_DEGREE = 20


@dataclass(frozen=True, eq=False)
class LobattoOperator:
    """Lobatto-Legendre collocation operators on [-1, 1]."""

    degree: int
    nodes: np.ndarray
    weights: np.ndarray
    D: np.ndarray

    @property
    def M(self) -> np.ndarray:
        return np.diag(self.weights)

    @property
    def Q(self) -> np.ndarray:
        return self.M @ self.D

    @property
    def B(self) -> np.ndarray:
        b = np.zeros((self.degree + 1, self.degree + 1))
        b[0, 0], b[-1, -1] = -1.0, 1.0
        return b


def _legendre(n: int, x):
    """P_n(x) and P_{n-1}(x) by the three-term recurrence."""
    p_prev, p = np.ones_like(x), x.copy()
    if n == 0:
        return p_prev, np.zeros_like(x)
    for k in range(1, n):
        p_prev, p = p, ((2 * k + 1) * x * p - k * p_prev) / (k + 1)
    return p, p_prev


def build_lobatto(degree: int) -> LobattoOperator:
    """Nodes, weights and differentiation matrix for ``degree + 1`` LGL points."""
    if not (isinstance(degree, (int, np.integer)) and 1 <= degree <= MAX_DEGREE):
        raise ValueError(f"degree must be an integer in [1, {MAX_DEGREE}], got {degree!r}")
    n = int(degree)
    # Newton on (1 - x^2) P_n'(x) from Chebyshev-Gauss-Lobatto guesses
    x = -np.cos(np.pi * np.arange(n + 1) / n)
    for _ in range(100):
        p, p_prev = _legendre(n, x)
        # with V = P_n: x_new = x - (x P_n - P_{n-1}) / ((n+1) P_n)
        dx = (x * p - p_prev) / ((n + 1) * p)
        x = x - dx
        if np.max(np.abs(dx)) < 1e-16:
            break
    x[0], x[-1] = -1.0, 1.0
    x = 0.5 * (x - x[::-1])  # exact symmetry
    p, _ = _legendre(n, x)
    w = 2.0 / (n * (n + 1) * p**2)

    # barycentric differentiation matrix
    diff = x[:, None] - x[None, :]
    np.fill_diagonal(diff, 1.0)
    lam = 1.0 / np.prod(diff, axis=1)
    D = (lam[None, :] / lam[:, None]) / diff
    np.fill_diagonal(D, 0.0)
    np.fill_diagonal(D, -D.sum(axis=1))
    return LobattoOperator(n, x, w, D)


@dataclass(frozen=True)
class MeshConfig:
    """Periodic box ``[0, length]^dim`` split into ``elements`` per direction."""

    dim: int = 2
    elements: int = 4
    degree: int = 5
    length: float = 1.0
    nvar: Optional[int] = None

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError("dim must be 1 or 2")
        if self.elements < 1:
            raise ValueError("need at least one element per direction")
        if not 1 <= self.degree <= MAX_DEGREE:
            raise ValueError(f"degree must be in [1, {MAX_DEGREE}]")
        if self.nvar is None:
            object.__setattr__(self, "nvar", self.dim + 2)

    @property
    def jacobian(self) -> float:
        return 0.5 * self.length / self.elements

    @property
    def n_nodes(self) -> int:
        return self.degree + 1

    def field_shape(self):
        e, n = self.elements, self.n_nodes
        if self.dim == 1:
            return (e, n, self.nvar)
        return (e, e, n, n, self.nvar)

    @property
    def n_dof(self) -> int:
        return math.prod(self.field_shape())

    @cached_property
    def operator(self) -> LobattoOperator:
        return build_lobatto(self.degree)

    def node_coordinates(self) -> np.ndarray:
        """Physical coordinates, shape ``field_shape()[:-1] + (dim,)``."""
        op = self.operator
        h = self.length / self.elements
        x1 = (np.arange(self.elements)[:, None] + 0.5 * (op.nodes[None, :] + 1)) * h
        if self.dim == 1:
            return x1[..., None]
        e, n = self.elements, self.n_nodes
        xs = np.broadcast_to(x1[:, None, :, None], (e, e, n, n))
        ys = np.broadcast_to(x1[None, :, None, :], (e, e, n, n))
        return np.stack([xs, ys], axis=-1)

    def mass_weights(self) -> np.ndarray:
        """Diagonal mass matrix per node, shape ``field_shape()[:-1]``."""
        w = self.operator.weights * self.jacobian
        e = self.elements
        if self.dim == 1:
            return np.broadcast_to(w, (e, self.n_nodes)).copy()
        return np.broadcast_to(np.outer(w, w), (e, e, self.n_nodes, self.n_nodes)).copy()


@dataclass(frozen=True)
class DensityWave:
    rho0: float = 1.0
    amplitude: float = 0.5
    velocity: Sequence[float] = (0.1, 0.2)
    pressure: float = 1.0
    gas: GasModel = field(default_factory=GasModel)


def density_wave_ic(mesh: MeshConfig, params: DensityWave = DensityWave()) -> np.ndarray:
    """Nodal ``rho0 + A sin(2 pi sum x_i)`` with constant velocity and pressure."""
    if not 0 <= abs(params.amplitude) < params.rho0:
        raise ValueError("|amplitude| must be smaller than rho0 to keep the density positive")
    if not params.pressure > 0:
        raise ValueError("pressure must be positive")
    if len(params.velocity) < mesh.dim:
        raise ValueError(f"velocity needs {mesh.dim} components")
    x = mesh.node_coordinates()
    rho = params.rho0 + params.amplitude * np.sin(2 * np.pi * x.sum(axis=-1))
    v = np.broadcast_to(np.asarray(params.velocity[: mesh.dim], dtype=float), rho.shape + (mesh.dim,))
    p = np.full(rho.shape, float(params.pressure))
    return prim_to_cons(rho, v, p, params.gas).ravel()


def _pairwise_volume(u, axis, flux, direction, D):
    """``sum_k 2 D_ik f*(u_i, u_k)`` along node axis ``axis`` (negative index).

    Only pairs ``i < k`` are evaluated; symmetry of the flux fills the rest.
    """
    n = D.shape[0]
    u = np.moveaxis(u, axis, -2)  # (..., n, nvar)
    iu, ku = np.triu_indices(n, 1)
    f_pairs = flux(u[..., iu, :], u[..., ku, :], direction)
    f_self = flux.physical(u, direction)
    Dt = 2 * D
    out = np.einsum("i,...iv->...iv", np.diag(Dt), f_self)
    # contributions of pair (i, k) to row i and to row k
    contrib_i = Dt[iu, ku][:, None] * f_pairs
    contrib_k = Dt[ku, iu][:, None] * f_pairs
    out = out + _scatter(contrib_i, iu, n) + _scatter(contrib_k, ku, n)
    return np.moveaxis(out, -2, axis)


def _scatter(values, index, n):
    """Sum ``values[..., p, :]`` into rows ``index[p]`` of an ``(..., n, :)`` array."""
    onehot = np.zeros((n, len(index)))
    onehot[index, np.arange(len(index))] = 1.0
    return np.einsum("ip,...pv->...iv", onehot, values)


def _check_admissible(u, mesh, gas):
    rho = np.real(u[..., 0])
    p = np.real(cons_to_prim(u, gas, check=False)[2])
    bad = ~((rho > 0) & (p > 0))
    if np.any(bad):
        idx = np.argwhere(bad)[0]
        coords = mesh.node_coordinates()
        node = tuple(idx[-(len(mesh.field_shape()) - 1):])
        raise AdmissibilityError(
            f"inadmissible state at node {node}, x = {coords[node].tolist()}"
        )


def rhs(field_vec, mesh: MeshConfig, volume_flux, surface_flux=None,
        op: Optional[LobattoOperator] = None, check: bool = True) -> np.ndarray:
    """Semidiscrete time derivative of a flat field (optionally batched).

    Volume terms use flux differencing with ``volume_flux``; element
    interfaces use ``surface_flux`` (defaults to the volume flux) with the
    strong-form correction ``M^{-1} B (f_num - f)``.
    """
    op = mesh.operator if op is None else op
    surface_flux = volume_flux if surface_flux is None else surface_flux
    field_vec = np.asarray(field_vec)
    if not np.iscomplexobj(field_vec):
        field_vec = field_vec.astype(float, copy=False)
    batched = field_vec.ndim == 2
    u = field_vec.reshape((-1,) + mesh.field_shape())
    if check and mesh.nvar == mesh.dim + 2:
        _check_admissible(u, mesh, volume_flux.gas)

    D, w = op.D, op.weights
    inv_j = 1.0 / mesh.jacobian
    du = np.zeros_like(u)
    # node axis and element axis per direction, counted from the end
    axes = [(-2, 1)] if mesh.dim == 1 else [(-3, 1), (-2, 2)]
    for direction, (node_axis, elem_axis) in enumerate(axes):
        vol = _pairwise_volume(u, node_axis, volume_flux, direction, D)
        # interface between element e (right face) and e+1 (left face)
        right = np.take(u, -1, axis=node_axis)
        left = np.roll(np.take(u, 0, axis=node_axis), -1, axis=elem_axis)
        f_num = surface_flux(right, left, direction)
        corr_right = (f_num - surface_flux.physical(right, direction)) / w[-1]
        f_num_prev = np.roll(f_num, 1, axis=elem_axis)
        left_own = np.take(u, 0, axis=node_axis)
        corr_left = -(f_num_prev - surface_flux.physical(left_own, direction)) / w[0]
        surf = np.zeros_like(u)
        idx_r = [slice(None)] * u.ndim
        idx_r[node_axis] = -1
        idx_l = [slice(None)] * u.ndim
        idx_l[node_axis] = 0
        surf[tuple(idx_r)] = corr_right
        surf[tuple(idx_l)] = corr_left
        du -= inv_j * (vol + surf)
    out = du.reshape(u.shape[0], -1)
    return out if batched else out[0]


def conservation_rates(dudt, mesh: MeshConfig) -> np.ndarray:
    """Mass-weighted totals of ``du/dt`` per conservative variable."""
    du = np.asarray(dudt).reshape(mesh.field_shape())
    m = mesh.mass_weights()[..., None]
    return np.sum(m * du, axis=tuple(range(du.ndim - 1)))


def entropy_rate(field_vec, dudt, mesh: MeshConfig, pair) -> float:
    """``sum_nodes w(u) . M du/dt`` for an entropy pair."""
    u = np.asarray(field_vec).reshape(mesh.field_shape())
    du = np.asarray(dudt).reshape(mesh.field_shape())
    w = pair.variables(u)
    m = mesh.mass_weights()
    return float(np.sum(m * np.sum(w * du, axis=-1)))


def entropy_rate_scale(field_vec, dudt, mesh: MeshConfig, pair) -> float:
    """Roundoff scale ``sum_nodes M |w| . |du/dt|`` of :func:`entropy_rate`."""
    u = np.asarray(field_vec).reshape(mesh.field_shape())
    du = np.asarray(dudt).reshape(mesh.field_shape())
    w = pair.variables(u)
    m = mesh.mass_weights()
    return float(np.sum(m * np.sum(np.abs(w * du), axis=-1)))


def parse_config(text: str) -> dict:
    """Parse a flat ``key=value`` run configuration.

    Known keys: dim, elements, degree, flux, surface_flux, alpha, beta,
    gamma, amplitude, velocity (comma separated), pressure. Blank lines and
    ``#`` comments are ignored.
    """
    ints = {"dim", "elements", "degree"}
    floats = {"alpha", "beta", "gamma", "amplitude", "pressure", "rho0"}
    strings = {"flux", "surface_flux"}
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key=value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in ints:
            out[key] = int(value)
        elif key in floats:
            out[key] = float(value)
        elif key in strings:
            out[key] = value
        elif key == "velocity":
            out[key] = tuple(float(v) for v in value.split(",") if v.strip())
        else:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
    if "alpha" in out and "beta" in out:
        raise ValueError("give either alpha or beta, not both")
    return out
