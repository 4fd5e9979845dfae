"""Observables and spectral analysis built on Jost matrices.

Spectral points are zeros of ``det F_in``: bound states on the physical sheet,
resonances on unphysical sheets.  ``det F_in`` comes from a *source*, either
direct integration or an expansion table, so root searches can run on either.
"""

from __future__ import annotations

import cmath
import csv
import io
from dataclasses import dataclass

import numpy as np

from .channels import ChannelSet, SheetSelector, channel_momenta, physical_sheet
from .expansion import det_in_expansion, direct_det_in, jost_from_expansion, table_label
from .ode import IntegrationError
from .potential import RadialPotential
from .solver import (
    THRESHOLD_K,
    ExpansionTable,
    JostPair,
    SolverSettings,
    ThresholdError,
    assemble_jost,
    integrate_direct,
    integrate_direct_batch,
    integrate_tilde,
)

SINGULAR_DET = 1e-14
MULLER_MAX_ITER = 60
MULLER_REL_STEP = 1e-12
SAMPLES_PER_UNIT = 400
SEED_PERCENTILE = 20.0
DEDUP_TOL = 1e-8
NOISE_STEP = 1e-7
NOISE_PATIENCE = 3


class SingularJostError(ArithmeticError):
    """``F_in`` is numerically singular: the energy sits on a spectral point."""


class RootNotFoundError(RuntimeError):
    """The root finder did not converge."""


# -- sources of det F_in -------------------------------------------------------


class DirectSource:
    """``det F_in`` by integrating the Jost equations at each energy."""

    def __init__(self, cs: ChannelSet, p: RadialPotential, settings: SolverSettings | None = None):
        self.cs = cs
        self.p = p
        self.settings = settings or SolverSettings()
        self.label = "direct"

    def det_in(self, energy, sheet) -> complex:
        sheet = SheetSelector.coerce(sheet)
        f_in, _, _ = integrate_direct_batch(self.cs, self.p, [energy], sheet, self.settings, incoming_only=True)
        return complex(np.linalg.det(f_in[0]))

    def det_in_many(self, energies, sheet) -> np.ndarray:
        return direct_det_in(self.cs, self.p, energies, SheetSelector.coerce(sheet), self.settings)

    def jost(self, energy, sheet) -> JostPair:
        return integrate_direct(self.cs, self.p, energy, sheet, self.settings)


class ExpansionSource:
    """``det F_in`` summed from an expansion table."""

    def __init__(self, table: ExpansionTable, cs: ChannelSet):
        if table.a.shape[-1] != cs.n:
            raise ValueError("table and channel set disagree on the number of channels")
        self.table = table
        self.cs = cs
        self.label = table_label(table)

    def det_in(self, energy, sheet) -> complex:
        return complex(det_in_expansion(self.table, self.cs, complex(energy), SheetSelector.coerce(sheet)))

    def det_in_many(self, energies, sheet) -> np.ndarray:
        return det_in_expansion(self.table, self.cs, energies, SheetSelector.coerce(sheet))

    def jost(self, energy, sheet) -> JostPair:
        return jost_from_expansion(self.table, self.cs, energy, sheet)


def det_fin(source, cs: ChannelSet, energy, sheet=None) -> complex:
    """``det F_in(E)`` on ``sheet`` from a direct or expansion source."""
    sheet = physical_sheet(cs) if sheet is None else SheetSelector.coerce(sheet)
    if len(sheet) != cs.n:
        raise ValueError("sheet length does not match the channel set")
    return source.det_in(complex(energy), sheet)


# -- root finding --------------------------------------------------------------------


@dataclass(frozen=True)
class SpectralPoint:
    energy: complex
    sheet: SheetSelector
    residual: float
    iterations: int
    source: str


def muller(f, x0: complex, x1: complex, x2: complex, rel_step: float = MULLER_REL_STEP,
           f_tol: float = SINGULAR_DET, max_iter: int = MULLER_MAX_ITER):
    """Muller's method for a complex analytic ``f``; returns ``(root, f(root), iterations)``.

    Stops when the step drops below ``rel_step * (1 + |x|)`` or ``|f| < f_tol``.
    A numerically evaluated ``f`` carries noise, so the iteration also stops
    once steps are below ``NOISE_STEP * (1 + |x|)`` and ``|f|`` has failed to
    improve ``NOISE_PATIENCE`` times in a row; the best iterate is returned.
    """
    xs = [complex(x0), complex(x1), complex(x2)]
    fs = [complex(f(x)) for x in xs]
    best = min(zip(xs, fs), key=lambda p: abs(p[1]))
    stalled = 0
    for it in range(1, max_iter + 1):
        if abs(best[1]) < f_tol:
            return best[0], best[1], it - 1
        (xa, xb, xc), (fa, fb, fc) = xs, fs
        h1, h2 = xb - xa, xc - xb
        if h1 == 0 or h2 == 0 or h1 + h2 == 0:
            return best[0], best[1], it - 1  # iterates coincide: nothing left to resolve
        d1, d2 = (fb - fa) / h1, (fc - fb) / h2
        a = (d2 - d1) / (h2 + h1)
        b = a * h2 + d2
        disc = cmath.sqrt(b * b - 4.0 * a * fc)
        den = b + disc if abs(b + disc) >= abs(b - disc) else b - disc
        if den == 0:
            dx = 1e-3 * (1.0 + abs(xc))  # flat parabola: nudge and continue
        else:
            dx = -2.0 * fc / den
        x_new = xc + dx
        if not cmath.isfinite(x_new):
            raise RootNotFoundError("Muller step produced a non-finite iterate")
        f_new = complex(f(x_new))
        xs, fs = [xb, xc, x_new], [fb, fc, f_new]
        if abs(dx) < rel_step * (1.0 + abs(x_new)) or abs(f_new) < f_tol:
            return x_new, f_new, it
        if abs(f_new) < abs(best[1]):
            best = (x_new, f_new)
            stalled = 0
        elif abs(dx) < NOISE_STEP * (1.0 + abs(x_new)):
            stalled += 1
            if stalled >= NOISE_PATIENCE:
                return best[0], best[1], it
    raise RootNotFoundError(f"no convergence within {max_iter} iterations (last iterate {xs[-1]:.10g})")


def find_spectral_point(source, cs: ChannelSet, guess, sheet=None, tol: float = MULLER_REL_STEP,
                        max_iter: int = MULLER_MAX_ITER, step: float | None = None) -> SpectralPoint:
    """Zero of ``det F_in`` on ``sheet`` near ``guess``.

    Raises :class:`RootNotFoundError` if Muller's method does not converge or
    the iterates leave the region the source can evaluate.
    """
    sheet = physical_sheet(cs) if sheet is None else SheetSelector.coerce(sheet)
    guess = complex(guess)
    if not cmath.isfinite(guess):
        raise ValueError("initial guess must be finite")
    h = 1e-3 * (1.0 + abs(guess)) if step is None else float(step)
    # a real guess on an unphysical sheet means the lower rim of the cut,
    # where resonances live; start the iteration just below the real axis
    shift = -1j * h if guess.imag == 0 and any(sg < 0 for sg in sheet.signs) else 0.0

    def f(e):
        return det_fin(source, cs, e, sheet)

    try:
        root, value, iters = muller(f, guess - h + shift, guess + h + shift, guess + shift,
                                    rel_step=tol, max_iter=max_iter)
    except (IntegrationError, ThresholdError) as exc:
        raise RootNotFoundError(f"root search from {guess:.6g} left the solvable region: {exc}") from exc
    return SpectralPoint(root, sheet, abs(value), iters, source.label)


def _seed_indices(values: np.ndarray, percentile: float = SEED_PERCENTILE) -> np.ndarray:
    """Sample indices next to sign changes of ``Re det`` or at small local minima of ``|det|``."""
    mag = np.abs(values)
    good = np.isfinite(mag)
    seeds = set()
    if good.sum() >= 3:
        cut = np.percentile(mag[good], percentile)
        for i in range(1, values.size - 1):
            if good[i - 1 : i + 2].all() and mag[i] <= mag[i - 1] and mag[i] <= mag[i + 1] and mag[i] <= cut:
                seeds.add(i)
    re = values.real
    for i in range(values.size - 1):
        if good[i] and good[i + 1] and np.sign(re[i]) != np.sign(re[i + 1]):
            seeds.add(i if mag[i] <= mag[i + 1] else i + 1)
    return np.array(sorted(seeds), dtype=int)


def dedupe(points, tol: float = DEDUP_TOL) -> list[SpectralPoint]:
    """Drop points closer than ``tol`` to an earlier one (same sheet); sort by energy."""
    kept: list[SpectralPoint] = []
    for pt in points:
        if not any(q.sheet == pt.sheet and abs(q.energy - pt.energy) <= tol * (1 + abs(pt.energy)) for q in kept):
            kept.append(pt)
    return sorted(kept, key=lambda q: (str(q.sheet), q.energy.real, q.energy.imag))


def bound_state_scan(source, cs: ChannelSet, interval, samples_per_unit: int = SAMPLES_PER_UNIT) -> list[SpectralPoint]:
    """Bound states in a real interval on the physical sheet.

    ``det F_in`` is sampled uniformly; samples next to sign changes and small
    local minima of ``|det|`` seed Muller searches.  Only real roots inside the
    interval are kept.
    """
    lo, hi = (float(v) for v in interval)
    if not hi > lo:
        raise ValueError("interval must have positive length")
    sheet = physical_sheet(cs)
    count = max(3, int(np.ceil((hi - lo) * samples_per_unit)) + 1)
    energies = np.linspace(lo, hi, count)
    near = np.any(np.abs(channel_momenta(cs, energies)) < 10 * THRESHOLD_K, axis=-1)
    energies = energies[~near]
    values = source.det_in_many(energies, sheet)
    if np.all(np.abs(values[np.isfinite(values)] - values[np.isfinite(values)][:1]) == 0):
        return []  # constant determinant: no interaction, no states
    spacing = (hi - lo) / (count - 1)
    found = []
    for i in _seed_indices(values):
        try:
            pt = find_spectral_point(source, cs, energies[i], sheet, step=0.25 * spacing)
        except RootNotFoundError:
            continue
        e = pt.energy
        if abs(e.imag) <= 1e-8 * (1 + abs(e)) and lo <= e.real <= hi:
            found.append(SpectralPoint(complex(e.real, 0.0), pt.sheet, pt.residual, pt.iterations, pt.source))
    return dedupe(found)


# -- S-matrix and cross sections ---------------------------------------------------


def s_matrix(jp: JostPair) -> np.ndarray:
    """``S = F_out F_in^-1``."""
    det = np.linalg.det(jp.F_in)
    if not abs(det) > SINGULAR_DET:
        raise SingularJostError(f"|det F_in| = {abs(det):.3e}: at or next to a spectral point")
    return np.linalg.solve(jp.F_in.T, jp.F_out.T).T


def flux_normalized_s(cs: ChannelSet, energy: float, s_mat) -> np.ndarray:
    """Scattering matrix between unit-flux channel states, for the open channels.

    Entries involving closed channels are NaN.  For a real potential this
    matrix is unitary above all thresholds.
    """
    k = channel_momenta(cs, complex(energy))
    open_ = (np.abs(k.imag) == 0) & (k.real > 0)
    v = np.where(open_, k.real / cs.masses, np.nan)
    root = np.sqrt(v)
    with np.errstate(invalid="ignore"):
        return (root[:, None] / root[None, :]) * np.asarray(s_mat)


def cross_sections(cs: ChannelSet, energy: float, s_mat) -> np.ndarray:
    """Partial-wave cross sections ``sigma[m, n]`` for the transition ``m -> n``.

    ``sigma[m, n] = pi / k_m**2 (2 l_m + 1) |S'_{nm} - delta_{nm}|**2`` with
    ``S'`` the flux-normalised scattering matrix.  Rows of closed entrance
    channels are NaN.
    """
    energy = float(np.real(energy))
    k = channel_momenta(cs, energy).real
    st = flux_normalized_s(cs, energy, s_mat)
    amp = np.abs(st - np.eye(cs.n)) ** 2  # amp[n, m]: from m into n
    with np.errstate(divide="ignore", invalid="ignore"):
        sigma = (np.pi / k[:, None] ** 2) * (2 * cs.ls[:, None] + 1) * amp.T
    return sigma


def scan_cross_sections(cs: ChannelSet, p: RadialPotential, energies, s: SolverSettings | None = None) -> np.ndarray:
    """Cross sections on the physical sheet for real energies; shape ``(E, N, N)``.

    Energies at a threshold or below all thresholds give NaN rows.
    """
    s = s or SolverSettings()
    energies = np.asarray(energies, dtype=float).ravel()
    out = np.full((energies.size, cs.n, cs.n), np.nan)
    if energies.size == 0:
        return out
    k = channel_momenta(cs, energies)
    ok = np.all(np.abs(k) >= THRESHOLD_K, axis=-1) & (energies > cs.thresholds.min())
    if np.any(ok):
        sheet = physical_sheet(cs)
        f_in, f_out, _ = integrate_direct_batch(cs, p, energies[ok], sheet, s)
        for idx, fi, fo in zip(np.flatnonzero(ok), f_in, f_out):
            sm = s_matrix(JostPair(fi, fo, complex(energies[idx]), sheet))
            out[idx] = cross_sections(cs, energies[idx], sm)
    return out


# -- symmetry checks -----------------------------------------------------------------


def _parity(cs: ChannelSet) -> np.ndarray:
    return (-1.0) ** (cs.ls[:, None] + cs.ls[None, :])


def symmetry_residual(cs: ChannelSet, p: RadialPotential, energy, s: SolverSettings | None = None,
                      sheet=None, method: str = "tilde") -> float:
    """``max |F_in(-k) - (-1)^(l_m+l_n) F_out(k)|`` over all entries.

    ``method="tilde"`` builds both sides from one tilded integration;
    ``method="direct"`` integrates the Jost equations separately on ``sheet``
    and on the sheet with every sign flipped.
    """
    s = s or SolverSettings()
    sheet = physical_sheet(cs) if sheet is None else SheetSelector.coerce(sheet)
    energy = complex(energy)
    if method == "tilde":
        tp = integrate_tilde(cs, p, energy, s)
        k = channel_momenta(cs, energy, sheet)
        f_in_minus, _ = assemble_jost(cs, tp.A_tilde, tp.B_tilde, -k)
        _, f_out = assemble_jost(cs, tp.A_tilde, tp.B_tilde, k)
    elif method == "direct":
        f_out = integrate_direct(cs, p, energy, sheet, s).F_out
        f_in_minus = integrate_direct(cs, p, energy, sheet.flipped(), s).F_in
    else:
        raise ValueError("method must be 'tilde' or 'direct'")
    return float(np.max(np.abs(f_in_minus - _parity(cs) * f_out)))


def s_matrix_from_flip(cs: ChannelSet, p: RadialPotential, energy, s: SolverSettings | None = None,
                       sheet=None) -> np.ndarray:
    """``S`` written with ``F_in`` alone: ``(-1)^(l_m+l_n) F_in(-k) F_in(k)^-1``."""
    s = s or SolverSettings()
    sheet = physical_sheet(cs) if sheet is None else SheetSelector.coerce(sheet)
    f_plus = integrate_direct(cs, p, energy, sheet, s).F_in
    f_minus = integrate_direct(cs, p, energy, sheet.flipped(), s).F_in
    return s_matrix(JostPair(f_plus, _parity(cs) * f_minus, complex(energy), sheet))


# -- CSV output ------------------------------------------------------------------------


def _num(x: float) -> str:
    return "" if not np.isfinite(x) else f"{x:.12g}"


def spectral_csv(points) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["re_E", "im_E", "sheet", "residual", "source"])
    for pt in points:
        w.writerow([_num(pt.energy.real), _num(pt.energy.imag), str(pt.sheet), f"{pt.residual:.3e}", pt.source])
    return buf.getvalue()


def cross_section_csv(cs: ChannelSet, energies, sigma) -> str:
    n = cs.n
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["E"] + [f"sigma_{i + 1}{j + 1}" for i in range(n) for j in range(n)])
    for e, row in zip(np.asarray(energies, dtype=float), np.asarray(sigma)):
        w.writerow([_num(e)] + [_num(v) for v in row.ravel()])
    return buf.getvalue()


__all__ = [
    "DirectSource",
    "ExpansionSource",
    "RootNotFoundError",
    "SingularJostError",
    "SpectralPoint",
    "bound_state_scan",
    "cross_section_csv",
    "cross_sections",
    "dedupe",
    "det_fin",
    "find_spectral_point",
    "flux_normalized_s",
    "muller",
    "s_matrix",
    "s_matrix_from_flip",
    "scan_cross_sections",
    "spectral_csv",
    "symmetry_residual",
]
