"""Semi-analytic Jost matrices from expansion tables, the analyticity domain and accuracy maps.

An :class:`~jostexp.solver.ExpansionTable` stores the asymptotic Taylor
coefficients of the tilded matrices around a centre ``E0``.  Because those
matrices are single-valued in ``E``, one table serves every Riemann sheet:
the sheet only enters through the explicit momentum factors.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .channels import Channel, ChannelSet, SheetSelector, channel_momenta, physical_sheet
from .ode import IntegrationError
from .potential import RadialPotential
from .solver import (
    ExpansionTable,
    JostPair,
    SolverSettings,
    ThresholdError,
    THRESHOLD_K,
    assemble_jost,
    integrate_direct_batch,
)

TABLE_FORMAT = "jost-expansion"
TABLE_VERSION = 1
DET_CHUNK = 1024


def tilde_from_expansion(tbl: ExpansionTable, energy):
    """``(A~, B~)`` summed from the table; ``energy`` may be an array."""
    energy = np.asarray(energy, dtype=complex)
    powers = (energy[..., None] - tbl.center) ** np.arange(tbl.order + 1)
    a = np.tensordot(powers, tbl.a, axes=(-1, 0))
    b = np.tensordot(powers, tbl.b, axes=(-1, 0))
    return a, b


def jost_from_expansion(tbl: ExpansionTable, cs: ChannelSet, energy, sheet=None) -> JostPair:
    """Jost matrices at ``energy`` on ``sheet`` from the truncated power series."""
    sheet = physical_sheet(cs) if sheet is None else SheetSelector.coerce(sheet)
    if tbl.a.shape[-1] != cs.n:
        raise ValueError(f"table has {tbl.a.shape[-1]} channels but the channel set has {cs.n}")
    energy = complex(energy)
    a, b = tilde_from_expansion(tbl, energy)
    f_in, f_out = assemble_jost(cs, a, b, channel_momenta(cs, energy, sheet))
    return JostPair(f_in, f_out, energy, sheet)


def det_in_expansion(tbl: ExpansionTable, cs: ChannelSet, energies, sheet=None) -> np.ndarray:
    """Vectorised ``det F_in`` from the table."""
    sheet = physical_sheet(cs) if sheet is None else SheetSelector.coerce(sheet)
    energies = np.asarray(energies, dtype=complex)
    a, b = tilde_from_expansion(tbl, energies)
    f_in, _ = assemble_jost(cs, a, b, channel_momenta(cs, energies, sheet))
    return np.linalg.det(f_in)


# -- domain of analyticity -------------------------------------------------------


def domain_margin(cs: ChannelSet, p: RadialPotential, energy) -> np.ndarray:
    """``min lambda - max_n |2 Im k_n|``; positive inside the domain.

    The branch with ``Im k >= 0`` is used, so the result does not depend on
    the sheet.
    """
    k = channel_momenta(cs, energy)
    return p.min_decay_rate() - np.max(np.abs(2.0 * k.imag), axis=-1)


def domain_d_contains(cs: ChannelSet, p: RadialPotential, energy) -> tuple[bool, float]:
    """Whether the expansion coefficients converge at ``energy``, and by how much."""
    margin = float(domain_margin(cs, p, complex(energy)))
    return margin > 0, margin


def domain_boundary(cs: ChannelSet, p: RadialPotential, im_energy) -> np.ndarray:
    """Real part of the domain boundary at each imaginary part.

    For one channel the curve ``Im k_n = lambda / 2`` is a parabola opening
    towards positive ``Re E``; the domain is the region to the right of all of
    them, so the boundary is their pointwise maximum.
    """
    lam = p.min_decay_rate()
    im_energy = np.asarray(im_energy, dtype=float)
    if not np.isfinite(lam):
        return np.full(im_energy.shape, -np.inf)
    c = lam / 2.0
    scale = cs.hbar**2 / (2.0 * cs.masses)  # E - E_n = scale * k**2
    # k = x + i c  =>  Im E = 2 scale x c,  Re E = E_n + scale (x**2 - c**2)
    x = im_energy[..., None] / (2.0 * scale * c)
    re = cs.thresholds + scale * (x**2 - c**2)
    return re.max(axis=-1)


# -- accuracy maps ------------------------------------------------------------------


@dataclass(frozen=True)
class GridSpec:
    """Rectangle in the complex energy plane sampled on a regular grid."""

    re_min: float
    re_max: float
    im_min: float
    im_max: float
    re_steps: int = 101
    im_steps: int = 101

    def __post_init__(self):
        if self.re_steps < 1 or self.im_steps < 1:
            raise ValueError("grid needs at least one point per axis")
        if not (self.re_max >= self.re_min and self.im_max >= self.im_min):
            raise ValueError("grid bounds must be ordered (min <= max)")
        if not all(np.isfinite([self.re_min, self.re_max, self.im_min, self.im_max])):
            raise ValueError("grid bounds must be finite")

    @property
    def re(self) -> np.ndarray:
        return np.linspace(self.re_min, self.re_max, self.re_steps)

    @property
    def im(self) -> np.ndarray:
        return np.linspace(self.im_min, self.im_max, self.im_steps)

    def energies(self) -> np.ndarray:
        """Grid energies with shape ``(im_steps, re_steps)``."""
        return self.re[None, :] + 1j * self.im[:, None]


@dataclass(frozen=True)
class AccuracyMap:
    grid: GridSpec
    sheet: SheetSelector
    rel_err: np.ndarray  # (im_steps, re_steps); NaN where the direct solver failed

    def within(self, tol: float = 0.01) -> np.ndarray:
        return np.nan_to_num(self.rel_err, nan=np.inf) < tol

    def count_within(self, tol: float = 0.01) -> int:
        return int(self.within(tol).sum())

    def value_at(self, energy) -> float:
        """Relative error at the grid node nearest to ``energy``."""
        e = complex(energy)
        i = int(np.argmin(np.abs(self.grid.im - e.imag)))
        j = int(np.argmin(np.abs(self.grid.re - e.real)))
        return float(self.rel_err[i, j])

    def cell_within(self, energy, tol: float = 0.01) -> bool:
        """True if every grid node of the cell enclosing ``energy`` is below ``tol``."""
        e = complex(energy)
        re, im = self.grid.re, self.grid.im

        def bracket(axis, value):
            if axis.size == 1:
                return [0]
            i = int(np.clip(np.searchsorted(axis, value) - 1, 0, axis.size - 2))
            return [i, i + 1]

        rows, cols = bracket(im, e.imag), bracket(re, e.real)
        return bool(np.all(self.within(tol)[np.ix_(rows, cols)]))

    def to_csv(self, path) -> None:
        write_map_csv(path, self)


def direct_det_in(cs: ChannelSet, p: RadialPotential, energies, sheet, s: SolverSettings) -> np.ndarray:
    """``det F_in`` by direct integration; NaN where the solver cannot reach the energy.

    Energies are integrated in fixed-size batches; a batch that fails as a
    whole is retried point by point so one bad energy only loses its own cell.
    """
    energies = np.asarray(energies, dtype=complex).ravel()
    out = np.full(energies.shape, np.nan + 0j)
    for start in range(0, energies.size, DET_CHUNK):
        idx = np.arange(start, min(start + DET_CHUNK, energies.size))
        out[idx] = _det_chunk(cs, p, energies[idx], sheet, s)
    return out


def _det_chunk(cs, p, energies, sheet, s):
    out = np.full(energies.shape, np.nan + 0j)
    k = channel_momenta(cs, energies, sheet)
    ok = np.all(np.abs(k) >= THRESHOLD_K, axis=-1)
    if not np.any(ok):
        return out
    try:
        f_in, _, _ = integrate_direct_batch(cs, p, energies[ok], sheet, s, incoming_only=True)
        out[ok] = np.linalg.det(f_in)
        return out
    except (IntegrationError, ThresholdError):
        pass
    for i in np.flatnonzero(ok):
        try:
            f_in, _, _ = integrate_direct_batch(cs, p, energies[i : i + 1], sheet, s, incoming_only=True)
            out[i] = np.linalg.det(f_in[0])
        except (IntegrationError, ThresholdError):
            continue
    return out


def _map_rows(args):
    tbl, cs, p, row_energies, sheet, s = args
    exact = direct_det_in(cs, p, row_energies, sheet, s)
    approx = det_in_expansion(tbl, cs, row_energies, sheet)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.abs(approx - exact) / np.abs(exact)


def accuracy_map(tbl: ExpansionTable, cs: ChannelSet, p: RadialPotential, grid: GridSpec, sheet=None,
                 s: SolverSettings | None = None, jobs: int = 1) -> AccuracyMap:
    """Relative error of ``det F_in`` from the table against direct integration.

    Rows of the grid are independent work items; the result does not depend
    on ``jobs``.
    """
    s = s or SolverSettings()
    sheet = physical_sheet(cs) if sheet is None else SheetSelector.coerce(sheet)
    energies = grid.energies()
    tasks = [(tbl, cs, p, row, sheet, s) for row in energies]
    rows = _run_tasks(_map_rows, tasks, jobs)
    rel = np.array(rows, dtype=float).reshape(energies.shape)
    return AccuracyMap(grid, sheet, rel)


def _run_tasks(fn, tasks, jobs: int):
    if jobs is None or jobs <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    from concurrent.futures import ProcessPoolExecutor

    with ProcessPoolExecutor(max_workers=min(jobs, len(tasks))) as pool:
        return list(pool.map(fn, tasks))


def map_csv_text(amap: AccuracyMap) -> str:
    """CSV ``re_E,im_E,rel_err``; cells the solver could not reach have an empty error."""
    lines = ["re_E,im_E,rel_err"]
    for e, err in zip(amap.grid.energies().ravel(), amap.rel_err.ravel()):
        lines.append(f"{e.real:.12g},{e.imag:.12g},{'' if not np.isfinite(err) else f'{err:.6e}'}")
    return "\n".join(lines) + "\n"


def write_map_csv(path, amap: AccuracyMap) -> None:
    _write_text(path, map_csv_text(amap))


def _write_text(path, text: str) -> None:
    if path is None or str(path) == "-":
        print(text, end="")
    else:
        Path(path).write_text(text)


# -- table serialisation ---------------------------------------------------------


def _complex_matrix(m) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m)]


def _parse_complex(value) -> complex:
    if not (isinstance(value, (list, tuple)) and len(value) == 2):
        raise ValueError(f"complex numbers must be [re, im] pairs, got {value!r}")
    return complex(float(value[0]), float(value[1]))


def table_to_dict(tbl: ExpansionTable) -> dict:
    return {
        "format": TABLE_FORMAT,
        "version": TABLE_VERSION,
        "center": [tbl.center.real, tbl.center.imag],
        "order": tbl.order,
        "channels": tbl.channels,
        "settings": tbl.settings,
        "theta": tbl.theta,
        "length": tbl.length,
        "a": [_complex_matrix(m) for m in tbl.a],
        "b": [_complex_matrix(m) for m in tbl.b],
    }


def table_from_dict(doc: dict) -> ExpansionTable:
    try:
        if doc.get("format") != TABLE_FORMAT:
            raise ValueError(f"not an expansion table (format {doc.get('format')!r})")
        order = int(doc["order"])
        a = np.array([[[_parse_complex(z) for z in row] for row in m] for m in doc["a"]], dtype=complex)
        b = np.array([[[_parse_complex(z) for z in row] for row in m] for m in doc["b"]], dtype=complex)
        center = _parse_complex(doc["center"])
        channels = doc.get("channels", {})
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed expansion table: {exc}") from None
    if a.shape != b.shape or a.ndim != 3 or a.shape[0] != order + 1 or a.shape[1] != a.shape[2]:
        raise ValueError("malformed expansion table: coefficient arrays have inconsistent shapes")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise ValueError("malformed expansion table: non-finite coefficients")
    return ExpansionTable(center, order, a, b, doc.get("settings", {}), channels,
                          float(doc.get("theta", 0.0)), float(doc.get("length", 0.0)))


def channels_from_descriptor(desc: dict) -> ChannelSet:
    try:
        chans = tuple(Channel(float(c["threshold"]), float(c["mass"]), int(c["l"])) for c in desc["channels"])
        return ChannelSet(chans, float(desc.get("hbar", 1.0)))
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed channel descriptor: {exc}") from None


def save_table(tbl: ExpansionTable, path) -> None:
    _write_text(path, json.dumps(table_to_dict(tbl), indent=1) + "\n")


def load_table(path) -> tuple[ExpansionTable, ChannelSet]:
    """Read a table and the channel set it was built for."""
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: invalid JSON ({exc})") from None
    tbl = table_from_dict(doc)
    cs = channels_from_descriptor(tbl.channels)
    if cs.n != tbl.a.shape[-1]:
        raise ValueError("malformed expansion table: channel count does not match coefficient size")
    return tbl, cs


def table_label(tbl: ExpansionTable) -> str:
    c = tbl.center
    return f"expansion(E0={c.real:g}{c.imag:+g}i;M={tbl.order})"


__all__ = [
    "AccuracyMap",
    "GridSpec",
    "accuracy_map",
    "channels_from_descriptor",
    "det_in_expansion",
    "direct_det_in",
    "domain_boundary",
    "domain_d_contains",
    "domain_margin",
    "jost_from_expansion",
    "load_table",
    "map_csv_text",
    "save_table",
    "table_from_dict",
    "table_label",
    "table_to_dict",
    "tilde_from_expansion",
    "write_map_csv",
]
