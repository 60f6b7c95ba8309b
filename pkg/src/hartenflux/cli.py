"""Command-line front end: flux property checks, lemma labs, gap scans, spectra.

Exit codes are 0 for success, 1 when a checked property fails and 2 for
usage errors. Every output file records the seed and the entropy parameters.
"""

from __future__ import annotations

import argparse
import math
import sys
import time
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence
from xml.sax.saxutils import escape

import numpy as np

from . import dg, fluxes, nonexistence, spectrum
from .euler import (AdmissibilityError, GasModel, HartenEntropy, LogarithmicEntropy, alpha_to_beta,
                    beta_to_alpha)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
MAX_SPECTRUM_DOF = 4000


class UsageError(Exception):
    """Invalid combination of command-line options (exit code 2)."""


@dataclass
class RunConfig:
    """Resolved options of one CLI invocation."""

    subcommand: str
    gamma: float = 1.4
    alpha: Optional[float] = None
    beta: Optional[float] = None
    flux: Optional[str] = None
    entropy: Optional[str] = None
    seed: int = fluxes.DEFAULT_SEED
    out: Path = Path(".")
    tol: Optional[float] = None
    dim: Optional[int] = None
    degree: Optional[int] = None
    elements: Optional[int] = None
    samples: int = fluxes.DEFAULT_ENSEMBLE_SIZE
    spread: float = 100.0
    v_max: float = 5.0
    nodes: int = fluxes.DEFAULT_QUADRATURE_NODES
    jacobian: str = "complex"
    rho_grid: Optional[tuple] = None
    wave: dict = field(default_factory=dict)

    @property
    def gas(self) -> GasModel:
        return GasModel(self.gamma)

    def harten(self) -> HartenEntropy:
        if self.alpha is None:
            raise UsageError("this command needs --alpha or --beta")
        try:
            return HartenEntropy(self.alpha, self.gamma)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc

    def metadata(self) -> dict:
        meta = {"seed": self.seed, "gamma": self.gamma}
        if self.alpha is not None:
            meta["alpha"] = self.alpha
            meta["beta"] = self.beta
        return meta


def _float_list(text: str) -> tuple:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--gamma", type=float, default=None, help="ratio of specific heats (1.4)")
    group = common.add_mutually_exclusive_group()
    group.add_argument("--alpha", type=float, help="Harten entropy parameter")
    group.add_argument("--beta", type=float,
                       help="alternative parameter, alpha = beta (1 - gamma) - gamma")
    common.add_argument("--seed", type=int, default=fluxes.DEFAULT_SEED)
    common.add_argument("--out", type=Path, default=Path("."), help="output directory")
    common.add_argument("--tol", type=float, default=None, help="override the pass tolerance")

    parser = argparse.ArgumentParser(prog="hartenflux", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("check-flux", parents=[common], help="flux property suite")
    p.add_argument("--flux", required=True)
    p.add_argument("--entropy", choices=("log", "harten"), default=None,
                   help="entropy for the EC check (default: the flux's own)")
    p.add_argument("--dim", type=int, choices=(1, 2), default=1)
    p.add_argument("--samples", type=int, default=fluxes.DEFAULT_ENSEMBLE_SIZE)
    p.add_argument("--spread", type=float, default=100.0,
                   help="density and pressure are sampled log-uniformly in [1/spread, spread]")
    p.add_argument("--v-max", type=float, default=5.0, help="velocity components in [-v, v]")
    p.add_argument("--nodes", type=int, default=fluxes.DEFAULT_QUADRATURE_NODES)

    p = sub.add_parser("lemmas", parents=[common], help="lemma residual checks")

    p = sub.add_parser("gap-scan", parents=[common], help="incompatibility gap scan")
    p.add_argument("--rho-grid", type=_float_list, default=None,
                   help="comma-separated densities (default 2^-6 .. 2^6)")

    p = sub.add_parser("spectrum", parents=[common], help="DG Jacobian spectrum")
    p.add_argument("--flux", default=None)
    p.add_argument("--dim", type=int, choices=(1, 2), default=None)
    p.add_argument("--degree", type=int, default=None)
    p.add_argument("--elements", type=int, default=None)
    p.add_argument("--nodes", type=int, default=fluxes.DEFAULT_QUADRATURE_NODES)
    p.add_argument("--jacobian", choices=("complex", "fd"), default="complex",
                   help="complex-step (default) or central finite differences")
    p.add_argument("--config", type=Path, default=None, help="key=value run configuration")
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Merge a config file (spectrum only) with flags; flags win."""
    file_cfg = {}
    if getattr(args, "config", None) is not None:
        try:
            file_cfg = dg.parse_config(args.config.read_text())
        except (OSError, ValueError) as exc:
            raise UsageError(f"bad config file: {exc}") from exc
    alpha, beta = args.alpha, args.beta
    if alpha is None and beta is None:
        alpha, beta = file_cfg.get("alpha"), file_cfg.get("beta")
    gamma = args.gamma if args.gamma is not None else file_cfg.get("gamma", 1.4)
    if not gamma > 1:
        raise UsageError("--gamma must exceed 1")
    if beta is not None:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", UserWarning)
            alpha = beta_to_alpha(beta, GasModel(gamma))
    elif alpha is not None:
        beta = alpha_to_beta(alpha, gamma)

    def pick(name, default=None):
        value = getattr(args, name, None)
        return value if value is not None else file_cfg.get(name, default)

    wave = {k: file_cfg[k] for k in ("amplitude", "velocity", "pressure", "rho0") if k in file_cfg}
    return RunConfig(
        subcommand=args.subcommand,
        gamma=gamma,
        alpha=alpha,
        beta=beta,
        flux=pick("flux"),
        entropy=getattr(args, "entropy", None),
        seed=args.seed,
        out=args.out,
        tol=args.tol,
        dim=pick("dim"),
        degree=pick("degree"),
        elements=pick("elements"),
        samples=getattr(args, "samples", fluxes.DEFAULT_ENSEMBLE_SIZE),
        spread=getattr(args, "spread", 100.0),
        v_max=getattr(args, "v_max", 5.0),
        nodes=getattr(args, "nodes", fluxes.DEFAULT_QUADRATURE_NODES),
        jacobian=getattr(args, "jacobian", "complex"),
        rho_grid=getattr(args, "rho_grid", None),
        wave=wave,
    )


def _make_flux(config: RunConfig, allow_nan: bool = False) -> fluxes.TwoPointFlux:
    name = config.flux or "central"
    if name not in fluxes.FLUX_NAMES:
        raise UsageError(f"unknown flux {name!r}; choose from {', '.join(fluxes.FLUX_NAMES)}")
    if name == "harten-ec":
        return fluxes.harten_ec_quadrature_flux(config.harten(), config.nodes,
                                                allow_nan=allow_nan)
    return fluxes.make_flux(name, config.gas)


def _write(config: RunConfig, filename: str, text: str) -> Path:
    try:
        config.out.mkdir(parents=True, exist_ok=True)
        path = config.out / filename
        path.write_text(text)
    except OSError as exc:
        raise UsageError(f"cannot write to {config.out}: {exc}") from exc
    return path


def _header(meta: dict) -> str:
    return "".join(f"# {k}={v}\n" for k, v in meta.items())


# ---------------------------------------------------------------------------
# check-flux


def _guarded(name, flux, check, *args, **kwargs) -> fluxes.PropertyReport:
    """Run one checker; an inadmissible path counts as an infinite residual."""
    try:
        return check(flux, *args, **kwargs)
    except AdmissibilityError as exc:
        print(f"{name}: {exc}", file=sys.stderr)
        return fluxes.PropertyReport(name, flux.name, math.inf, np.nan, np.nan, 0.0)


def cmd_check_flux(config: RunConfig) -> int:
    if config.samples < 1 or not config.spread >= 1 or not config.v_max >= 0:
        raise UsageError("need --samples >= 1, --spread >= 1 and --v-max >= 0")
    flux = _make_flux(config, allow_nan=True)
    gas = config.gas
    if config.entropy is None:
        pair = flux.entropy
    elif config.entropy == "log":
        pair = LogarithmicEntropy(gas)
    else:
        pair = config.harten()

    ranges = (1 / config.spread, config.spread)
    pairs = fluxes.sample_pairs(config.samples, config.dim, gas, config.seed, rho_range=ranges,
                                p_range=ranges, v_max=config.v_max)
    if isinstance(flux.entropy, HartenEntropy):
        ok = fluxes.harten_path_admissible(pairs.u_minus, pairs.u_plus, flux.entropy)
        if not ok.all():
            print(f"using {int(ok.sum())} of {len(ok)} pairs with an admissible "
                  "entropy-variable path")
            pairs = fluxes.Ensemble(pairs.u_minus[ok], pairs.u_plus[ok], pairs.seed)

    reports, required = [], []
    if pair is not None:
        reports.append(_guarded("ec", flux, fluxes.ec_check, pairs, pair, tol=config.tol))
        required.append("ec")
    # structural checks run where the flux can be evaluated at all
    values = flux(pairs.u_minus, pairs.u_plus, 0)
    usable = ~np.isnan(np.real(values)).any(axis=-1)
    if not usable.all():
        print(f"flux could not be evaluated on {int((~usable).sum())} pairs; "
              "structural checks use the rest")
        pairs = fluxes.Ensemble(pairs.u_minus[usable], pairs.u_plus[usable], pairs.seed)
    reports.append(_guarded("consistency", flux, fluxes.consistency_check, pairs))
    reports.append(_guarded("symmetry", flux, fluxes.symmetry_check, pairs))
    required += ["consistency", "symmetry"]
    reports.append(_guarded("pep", flux, fluxes.pep_ensemble_check, dim=config.dim, gas=gas,
                            seed=config.seed, rho_range=ranges, p_range=ranges,
                            v_max=config.v_max))
    reports.append(_guarded("kep", flux, fluxes.kep_check, pairs, gas))
    reports.append(_guarded("density_pressure_independence", flux,
                            fluxes.density_pressure_independence_check, pairs, gas))
    for flag, prop in ((flux.pep, "pep"), (flux.kep, "kep"),
                       (flux.pressure_free_density, "density_pressure_independence")):
        if flag:
            required.append(prop)

    meta = config.metadata()
    meta.update(flux=flux.name, entropy=getattr(pair, "name", None), samples=len(pairs),
                spread=config.spread, v_max=config.v_max,
                required=" ".join(required))
    body = fluxes.reports_to_csv(reports)
    path = _write(config, "check_flux.csv", _header(meta) + body)
    failed = False
    for r in reports:
        need = r.property in required
        failed |= need and not r.passed
        status = "pass" if r.passed else "FAIL"
        print(f"{r.property:32s} {r.worst_residual:.3e}  {status}{'' if need else ' (informational)'}")
    print(f"wrote {path}")
    return EXIT_FAIL if failed else EXIT_OK


# ---------------------------------------------------------------------------
# lemmas / gap-scan


def cmd_lemmas(config: RunConfig) -> int:
    h = config.harten()
    kwargs = {} if config.tol is None else {"tol1": config.tol, "tol2": config.tol}
    rows = nonexistence.lemma_suite(h, seed=config.seed, **kwargs)
    path = _write(config, "lemmas.csv", _header(config.metadata())
                  + nonexistence.lemma_suite_csv(rows))
    failed = False
    for check in dict.fromkeys(r["check"] for r in rows):
        sel = [r for r in rows if r["check"] == check]
        worst = max(float(r["residual"]) for r in sel)
        ok = all(r["pass"] != "false" for r in sel)
        failed |= not ok
        print(f"{check:18s} rows={len(sel):5d} worst={worst:.3e}  {'pass' if ok else 'FAIL'}")
    print(f"wrote {path}")
    return EXIT_FAIL if failed else EXIT_OK


def cmd_gap_scan(config: RunConfig) -> int:
    alphas = (config.alpha,) if config.alpha is not None else nonexistence.DEFAULT_ALPHAS
    grid = config.rho_grid or nonexistence.DEFAULT_RHO_GRID
    if any(not r > 0 for r in grid):
        raise UsageError("densities in --rho-grid must be positive")
    try:
        samples = nonexistence.gap_scan(alphas, config.gamma, grid)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    tol = 1e-10 if config.tol is None else config.tol
    frac = nonexistence.witness_fraction(samples, tol)
    meta = config.metadata()
    meta["alphas"] = " ".join(repr(a) for a in alphas)
    meta["witness_fraction"] = frac
    path = _write(config, "gap_scan.csv", _header(meta) + nonexistence.gap_scan_csv(samples))
    print(f"rows={len(samples)} witness_fraction={frac:.4f}")
    print(f"wrote {path}")
    return EXIT_OK if frac >= 0.99 else EXIT_FAIL


# ---------------------------------------------------------------------------
# spectrum


def spectrum_svg(report: spectrum.SpectrumReport, title: str, width: int = 640,
                 height: int = 480) -> str:
    """Self-contained SVG scatter of eigenvalues, Re on x and Im on y."""
    lam = np.asarray(report.eigenvalues)
    margin = 60
    re, im = lam.real, lam.imag
    x_lo, x_hi = float(min(re.min(), 0.0)), float(max(re.max(), 0.0))
    y_lo, y_hi = float(min(im.min(), 0.0)), float(max(im.max(), 0.0))
    # pad degenerate ranges so a purely imaginary spectrum is still visible
    span = max(x_hi - x_lo, y_hi - y_lo, 1e-300)
    if x_hi - x_lo < 1e-3 * span:
        x_lo, x_hi = x_lo - 0.05 * span, x_hi + 0.05 * span
    if y_hi - y_lo < 1e-3 * span:
        y_lo, y_hi = y_lo - 0.05 * span, y_hi + 0.05 * span

    def sx(x):
        return margin + (x - x_lo) / (x_hi - x_lo) * (width - 2 * margin)

    def sy(y):
        return height - margin - (y - y_lo) / (y_hi - y_lo) * (height - 2 * margin)

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2}" y="20" text-anchor="middle" font-family="sans-serif" '
        f'font-size="11">{escape(title)}</text>',
        f'<rect x="{margin}" y="{margin}" width="{width - 2 * margin}" '
        f'height="{height - 2 * margin}" fill="none" stroke="black"/>',
    ]
    if x_lo <= 0 <= x_hi:
        parts.append(f'<line x1="{sx(0):.2f}" y1="{margin}" x2="{sx(0):.2f}" '
                     f'y2="{height - margin}" stroke="#999" stroke-dasharray="4 3"/>')
    if y_lo <= 0 <= y_hi:
        parts.append(f'<line x1="{margin}" y1="{sy(0):.2f}" x2="{width - margin}" '
                     f'y2="{sy(0):.2f}" stroke="#999" stroke-dasharray="4 3"/>')
    for k in range(5):
        xv = x_lo + k * (x_hi - x_lo) / 4
        yv = y_lo + k * (y_hi - y_lo) / 4
        parts.append(f'<text x="{sx(xv):.2f}" y="{height - margin + 16}" text-anchor="middle" '
                     f'font-family="sans-serif" font-size="10">{xv:.3g}</text>')
        parts.append(f'<text x="{margin - 6}" y="{sy(yv) + 3:.2f}" text-anchor="end" '
                     f'font-family="sans-serif" font-size="10">{yv:.3g}</text>')
    parts.append(f'<text x="{width / 2}" y="{height - 15}" text-anchor="middle" '
                 'font-family="sans-serif" font-size="12">Re(lambda)</text>')
    parts.append(f'<text x="18" y="{height / 2}" text-anchor="middle" font-family="sans-serif" '
                 f'font-size="12" transform="rotate(-90 18 {height / 2})">Im(lambda)</text>')
    parts.append('<g fill="#1f5fa8" fill-opacity="0.6">')
    parts.extend(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="2"/>' for x, y in zip(re, im))
    parts.append("</g>")
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def compute_spectrum(config: RunConfig) -> spectrum.SpectrumReport:
    """Density-wave Jacobian spectrum for a resolved configuration."""
    dim = config.dim or 2
    mesh = dg.MeshConfig(dim=dim, elements=config.elements or 4,
                         degree=config.degree or (5 if dim == 2 else 3))
    if mesh.n_dof > MAX_SPECTRUM_DOF:
        raise UsageError(f"{mesh.n_dof} degrees of freedom exceed the cap of "
                         f"{MAX_SPECTRUM_DOF}; reduce --degree or --elements")
    flux = _make_flux(config)
    wave = dict(config.wave)
    if "velocity" in wave and len(wave["velocity"]) < dim:
        raise UsageError(f"velocity needs {dim} components")
    params = dg.DensityWave(gas=config.gas, **wave)
    try:
        u0 = dg.density_wave_ic(mesh, params)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    t0 = time.perf_counter()
    jac = spectrum.assemble_jacobian(lambda x: dg.rhs(x, mesh, flux), u0,
                                     method=config.jacobian)
    meta = config.metadata()
    meta.update(flux=flux.name, dim=dim, degree=mesh.degree, elements=mesh.elements,
                n_dof=mesh.n_dof, jacobian=config.jacobian)
    report = spectrum.spectrum(jac, meta)
    tol = spectrum.MARGINAL_TOL if config.tol is None else config.tol
    meta = report.metadata
    meta.update(classification=report.classification(tol),
                spectral_abscissa=report.spectral_abscissa,
                spectral_radius=report.spectral_radius,
                imag_dominance=report.imag_dominance,
                seconds=round(time.perf_counter() - t0, 3))
    return report


def cmd_spectrum(config: RunConfig) -> int:
    report = compute_spectrum(config)
    meta = report.metadata
    stem = "spectrum_" + (config.flux or "central")
    csv_path = _write(config, stem + ".csv", report.to_csv())
    title = (f"{meta['flux']} dim={meta['dim']} N={meta['degree']} "
             f"elements={meta['elements']} gamma={meta['gamma']} "
             f"abscissa={meta['spectral_abscissa']:.3e} {meta['classification']}")
    svg_path = _write(config, stem + ".svg", spectrum_svg(report, title))
    print(meta["classification"])
    print(f"spectral_abscissa={meta['spectral_abscissa']:.6e} "
          f"spectral_radius={meta['spectral_radius']:.6e} "
          f"imag_dominance={meta['imag_dominance']:.6e}")
    print(f"wrote {csv_path} {svg_path}")
    return EXIT_OK


COMMANDS = {
    "check-flux": cmd_check_flux,
    "lemmas": cmd_lemmas,
    "gap-scan": cmd_gap_scan,
    "spectrum": cmd_spectrum,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        config = resolve_config(args)
        return COMMANDS[config.subcommand](config)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
