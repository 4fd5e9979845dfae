"""Radial potential matrices evaluable at complex radius.

Potentials return the channel coupling ``U_{nn'}(r)`` in energy units.  The
solver multiplies row ``n`` by ``2 mu_n / hbar**2`` to obtain the matrix on the
right-hand side of the coupled radial equations, so unequal reduced masses are
handled there and never hidden in a potential table.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np
from scipy.interpolate import CubicSpline


class OutsideSectorError(ValueError):
    """Radius lies outside the sector where the potential is analytic and decaying."""


class RadialPotential:
    """Interface for an ``N x N`` short-range potential matrix.

    Subclasses implement :meth:`_evaluate` and set ``n_channels``,
    ``decay_rates`` (N x N) and ``max_angle`` (largest allowed ``|arg r|``).
    """

    n_channels: int
    decay_rates: np.ndarray
    max_angle: float = math.pi / 2
    name: str = "potential"

    def evaluate(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=complex)
        if not np.all(np.isfinite(r)):
            raise ValueError("radius must be finite")
        angles = np.abs(np.angle(r[r != 0]))
        if self.max_angle == 0:
            if np.any(angles > 0):
                raise OutsideSectorError(f"{self.name} can only be evaluated on the positive real axis")
        elif np.any(angles >= self.max_angle):
            raise OutsideSectorError(f"{self.name}: |arg r| must stay below {self.max_angle:.6g} rad")
        return self._evaluate(r)

    __call__ = evaluate

    def _evaluate(self, r: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def min_decay_rate(self) -> float:
        return float(np.min(self.decay_rates))

    def allows_rotation(self) -> bool:
        return self.max_angle > 0

    def describe(self) -> dict:
        return {"name": self.name}


class ZeroPotential(RadialPotential):
    name = "zero"

    def __init__(self, n_channels: int):
        self.n_channels = int(n_channels)
        self.decay_rates = np.full((self.n_channels, self.n_channels), np.inf)

    def _evaluate(self, r):
        return np.zeros(r.shape + (self.n_channels, self.n_channels), dtype=complex)

    def describe(self):
        return {"name": self.name, "channels": self.n_channels}


class ExponentialPotential(RadialPotential):
    """``V_{nn'}(r) = C_{nn'} r**p exp(-lambda_{nn'} r)``."""

    name = "exponential"

    def __init__(self, strengths, power: float = 0.0, decay=1.0):
        c = np.atleast_2d(np.asarray(strengths, dtype=complex))
        if c.shape[0] != c.shape[1]:
            raise ValueError("strength matrix must be square")
        lam = np.broadcast_to(np.asarray(decay, dtype=float), c.shape).copy()
        if np.any(lam <= 0):
            raise ValueError("decay rates must be positive")
        if power < 0:
            raise ValueError("power must be non-negative (regular at the origin)")
        self.strengths = c
        self.power = float(power)
        self.decay_rates = lam
        self.n_channels = c.shape[0]

    def _evaluate(self, r):
        rr = r[..., None, None]
        return self.strengths * rr**self.power * np.exp(-self.decay_rates * rr)

    def describe(self):
        return {
            "name": self.name,
            "strengths": self.strengths.real.tolist(),
            "power": self.power,
            "decay": self.decay_rates.tolist(),
        }


class NoroTaylorPotential(ExponentialPotential):
    """Two-channel benchmark ``[[-1, -7.5], [-7.5, 7.5]] r**2 exp(-r)``."""

    name = "noro_taylor"
    STRENGTHS = ((-1.0, -7.5), (-7.5, 7.5))

    def __init__(self):
        super().__init__(self.STRENGTHS, power=2.0, decay=1.0)

    def describe(self):
        return {"name": self.name}


class ScaledPotential(RadialPotential):
    """``V(s r)`` for a real positive scale ``s``."""

    def __init__(self, base: RadialPotential, scale: float):
        if not scale > 0:
            raise ValueError("scale must be positive")
        self.base = base
        self.scale = float(scale)
        self.n_channels = base.n_channels
        self.decay_rates = base.decay_rates * self.scale
        self.max_angle = base.max_angle
        self.name = f"{base.name}*{self.scale:g}"

    def _evaluate(self, r):
        return self.base.evaluate(self.scale * r)

    def describe(self):
        return {"name": "scaled", "scale": self.scale, "base": self.base.describe()}


class TabulatedPotential(RadialPotential):
    """Potential given on a real radial grid.

    Cubic-spline interpolation inside the grid; beyond the last point every
    entry continues as ``V(r_last) exp(-lambda (r - r_last))`` with ``lambda``
    estimated from the last two grid points (or supplied).  Real axis only.
    """

    name = "tabulated"
    max_angle = 0.0

    def __init__(self, radii, values, tail_decay=None, source: str | None = None):
        radii = np.asarray(radii, dtype=float)
        values = np.asarray(values, dtype=float)
        if radii.ndim != 1 or radii.size < 4:
            raise ValueError("need at least four radial points")
        if np.any(np.diff(radii) <= 0):
            raise ValueError("radii must be strictly increasing")
        if values.ndim != 3 or values.shape[0] != radii.size or values.shape[1] != values.shape[2]:
            raise ValueError("values must have shape (npoints, N, N)")
        self.radii = radii
        self.values = values
        self.n_channels = values.shape[1]
        self.source = source
        self._spline = CubicSpline(radii, values, axis=0)
        if tail_decay is None:
            v1, v2 = np.abs(values[-2]), np.abs(values[-1])
            with np.errstate(divide="ignore", invalid="ignore"):
                lam = np.log(v1 / v2) / (radii[-1] - radii[-2])
            # entries that vanish identically decay "infinitely fast"
            lam = np.where((v1 == 0) & (v2 == 0), np.inf, lam)
            if np.any(~(lam > 0)):
                raise ValueError("tabulated potential does not decay exponentially at the end of the grid")
        else:
            lam = np.broadcast_to(np.asarray(tail_decay, dtype=float), values.shape[1:]).copy()
        self.decay_rates = lam

    @classmethod
    def from_file(cls, path, tail_decay=None) -> "TabulatedPotential":
        """Read ``# r V11 V12 ... VNN`` text tables (row-major matrix order)."""
        path = Path(path)
        data = np.loadtxt(path, comments="#", ndmin=2)
        ncols = data.shape[1] - 1
        n = math.isqrt(ncols)
        if n * n != ncols or n < 1:
            raise ValueError(f"{path}: expected 1 + N**2 columns, found {data.shape[1]}")
        return cls(data[:, 0], data[:, 1:].reshape(-1, n, n), tail_decay=tail_decay, source=str(path))

    def _evaluate(self, r):
        x = r.real
        out = np.empty(x.shape + (self.n_channels, self.n_channels), dtype=complex)
        inside = x <= self.radii[-1]
        out[inside] = self._spline(x[inside])
        if np.any(~inside):
            dx = (x[~inside] - self.radii[-1])[..., None, None]
            with np.errstate(invalid="ignore"):
                tail = self.values[-1] * np.exp(-self.decay_rates * dx)
            out[~inside] = np.nan_to_num(tail, nan=0.0)
        return out

    def describe(self):
        return {"name": self.name, "file": self.source}


def write_table(path, radii, values) -> None:
    """Write a tabulated potential file."""
    values = np.asarray(values, dtype=float)
    n = values.shape[1]
    header = "r " + " ".join(f"V{i + 1}{j + 1}" for i in range(n) for j in range(n))
    data = np.column_stack([np.asarray(radii, dtype=float), values.reshape(len(radii), -1)])
    np.savetxt(path, data, header=header, comments="# ", fmt="%.17g")


BUILTINS = {
    "noro_taylor": lambda **kw: NoroTaylorPotential(**kw),
    "zero": lambda channels=1: ZeroPotential(channels),
    "exponential": lambda strengths, power=0.0, decay=1.0: ExponentialPotential(strengths, power, decay),
}


def make_potential(name: str, **params) -> RadialPotential:
    try:
        factory = BUILTINS[name]
    except KeyError:
        raise ValueError(f"unknown builtin potential {name!r}; choose from {sorted(BUILTINS)}") from None
    return factory(**params)
