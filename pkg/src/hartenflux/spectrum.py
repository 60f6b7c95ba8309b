"""Finite-difference Jacobians of the semidiscretization and their spectra."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .euler import AdmissibilityError

MARGINAL_TOL = 1e-8


def fd_step(u) -> np.ndarray:
    return np.cbrt(np.finfo(float).eps) * np.maximum(1.0, np.abs(u))


def assemble_jacobian(rhs_closure, base_field, batch_size: int = 32,
                      method: str = "fd") -> np.ndarray:
    """Dense Jacobian of ``rhs_closure`` at ``base_field``.

    ``rhs_closure`` maps a flat field, or a ``(batch, n)`` stack of them, to
    the matching time derivatives.

    method="fd"
        Central differences with step ``cbrt(eps) * max(1, |u_j|)``. A batch
        whose perturbation makes a node inadmissible is redone column by
        column, retrying once with a ten times smaller step.
    method="complex"
        Complex-step derivative ``Im rhs(u + i h e_j) / h`` with
        ``h = 1e-20 * max(1, |u_j|)``; exact to rounding, but needs an RHS
        that is analytic in its input (all fluxes in this package are).
    """
    u = np.asarray(base_field, dtype=float)
    n = u.size
    if method == "complex":
        steps = COMPLEX_STEP * np.maximum(1.0, np.abs(u))
        column = _complex_columns
    elif method == "fd":
        steps = fd_step(u)
        column = _columns
    else:
        raise ValueError(f"unknown Jacobian method {method!r}")
    jac = np.empty((n, n))
    for start in range(0, n, batch_size):
        cols = np.arange(start, min(start + batch_size, n))
        try:
            jac[:, cols] = column(rhs_closure, u, cols, steps[cols])
        except AdmissibilityError:
            if method != "fd":
                raise
            for j in cols:
                jac[:, j] = _column_with_retry(rhs_closure, u, j, steps[j])
    return jac


COMPLEX_STEP = 1e-20


def _columns(rhs_closure, u, cols, h):
    k = len(cols)
    plus = np.tile(u, (k, 1))
    minus = plus.copy()
    idx = np.arange(k)
    plus[idx, cols] += h
    minus[idx, cols] -= h
    diff = np.asarray(rhs_closure(plus)) - np.asarray(rhs_closure(minus))
    return (diff / (2 * h)[:, None]).T


def _column_with_retry(rhs_closure, u, j, h):
    try:
        return _columns(rhs_closure, u, np.array([j]), np.array([h]))[:, 0]
    except AdmissibilityError:
        return _columns(rhs_closure, u, np.array([j]), np.array([h / 10]))[:, 0]


def _complex_columns(rhs_closure, u, cols, h):
    k = len(cols)
    x = np.tile(u.astype(complex), (k, 1))
    x[np.arange(k), cols] += 1j * h
    return (np.imag(rhs_closure(x)) / h[:, None]).T


def eigenvalues(matrix) -> np.ndarray:
    """All eigenvalues of a dense real matrix (LAPACK Hessenberg-QR)."""
    a = np.asarray(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("eigenvalues needs a square matrix")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    try:
        return np.linalg.eigvals(a)
    except np.linalg.LinAlgError as exc:
        cond = np.linalg.cond(a)
        raise np.linalg.LinAlgError(f"QR iteration failed ({exc}); condition number {cond:.3e}") from exc


@dataclass
class SpectrumReport:
    eigenvalues: np.ndarray
    trace: float = float("nan")
    metadata: dict = field(default_factory=dict)

    @property
    def spectral_abscissa(self) -> float:
        return float(np.max(self.eigenvalues.real))

    @property
    def spectral_radius(self) -> float:
        return float(np.max(np.abs(self.eigenvalues)))

    @property
    def imag_dominance(self) -> float:
        """``max |Re| / max |Im|``; small for essentially imaginary spectra."""
        im = np.max(np.abs(self.eigenvalues.imag))
        re = np.max(np.abs(self.eigenvalues.real))
        if im == 0:
            return 0.0 if re == 0 else float("inf")
        return float(re / im)

    def trace_error(self) -> float:
        """``|sum(lambda) - trace| / max(1, sum |lambda|)``."""
        s = np.sum(self.eigenvalues)
        return float(abs(s - self.trace) / max(1.0, np.sum(np.abs(self.eigenvalues))))

    def conjugate_pairing_error(self) -> float:
        """Distance between the spectrum and its complex conjugate, relative to the radius."""
        lam = self.eigenvalues
        conj = np.sort_complex(np.conj(lam))
        own = np.sort_complex(lam)
        # sort_complex orders by real part first; match nearest to be robust to ties
        if np.max(np.abs(own - conj), initial=0.0) <= 1e-8 * max(1.0, self.spectral_radius):
            return float(np.max(np.abs(own - conj), initial=0.0) / max(1.0, self.spectral_radius))
        used = np.zeros(len(lam), dtype=bool)
        worst = 0.0
        for z in lam:
            d = np.abs(np.conj(lam) - z)
            d[used] = np.inf
            k = int(np.argmin(d))
            used[k] = True
            worst = max(worst, d[k])
        return float(worst / max(1.0, self.spectral_radius))

    def classification(self, tol: float = MARGINAL_TOL) -> str:
        return stability_classification(self, tol)

    def to_csv(self) -> str:
        buf = io.StringIO()
        for key, value in self.metadata.items():
            buf.write(f"# {key}={value}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["re", "im"])
        lam = self.eigenvalues
        for z in sorted(lam, key=lambda z: (z.real, z.imag)):
            writer.writerow([repr(float(z.real)), repr(float(z.imag))])
        return buf.getvalue()


def spectrum(matrix, metadata=None) -> SpectrumReport:
    a = np.asarray(matrix, dtype=float)
    return SpectrumReport(eigenvalues(a), float(np.trace(a)), dict(metadata or {}))


def stability_classification(report: SpectrumReport, tol: float = MARGINAL_TOL) -> str:
    if report.spectral_abscissa <= tol * report.spectral_radius:
        return "marginally_stable"
    return "unstable"


def read_spectrum_csv(text: str):
    """Inverse of :meth:`SpectrumReport.to_csv`: ``(eigenvalues, metadata)``."""
    meta = {}
    rows = []
    for line in text.splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            meta[key] = value
        elif line and line != "re,im":
            re, im = line.split(",")
            rows.append(complex(float(re), float(im)))
    return np.array(rows), meta
