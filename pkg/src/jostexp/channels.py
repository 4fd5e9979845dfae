"""Channel structure, Riemann-sheet selectors and channel momenta."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

MAX_ENUMERATED_CHANNELS = 16


@dataclass(frozen=True)
class Channel:
    """One scattering channel: threshold energy, reduced mass and angular momentum."""

    threshold: float
    reduced_mass: float = 1.0
    angular_momentum: int = 0

    def __post_init__(self):
        if not np.isfinite(self.threshold):
            raise ValueError("channel threshold must be finite")
        if not self.reduced_mass > 0:
            raise ValueError("reduced mass must be positive")
        if int(self.angular_momentum) != self.angular_momentum or self.angular_momentum < 0:
            raise ValueError("angular momentum must be a non-negative integer")
        object.__setattr__(self, "angular_momentum", int(self.angular_momentum))


@dataclass(frozen=True)
class ChannelSet:
    """Ordered collection of channels sharing one value of hbar.

    Coincident thresholds are allowed; channels that differ only in angular
    momentum are simply listed separately.
    """

    channels: tuple[Channel, ...]
    hbar: float = 1.0
    thresholds: np.ndarray = field(init=False, repr=False, compare=False)
    masses: np.ndarray = field(init=False, repr=False, compare=False)
    ls: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        channels = tuple(self.channels)
        if len(channels) < 1:
            raise ValueError("a channel set needs at least one channel")
        if not self.hbar > 0:
            raise ValueError("hbar must be positive")
        object.__setattr__(self, "channels", channels)
        for name, values, dtype in (
            ("thresholds", [c.threshold for c in channels], float),
            ("masses", [c.reduced_mass for c in channels], float),
            ("ls", [c.angular_momentum for c in channels], int),
        ):
            arr = np.array(values, dtype=dtype)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def from_lists(cls, thresholds, masses=None, ls=None, hbar=1.0) -> "ChannelSet":
        n = len(thresholds)
        masses = [1.0] * n if masses is None else masses
        ls = [0] * n if ls is None else ls
        if not len(masses) == len(ls) == n:
            raise ValueError("thresholds, masses and ls must have equal length")
        return cls(tuple(Channel(float(e), float(m), int(l)) for e, m, l in zip(thresholds, masses, ls)), hbar)

    @property
    def n(self) -> int:
        return len(self.channels)

    def __len__(self) -> int:
        return len(self.channels)

    def describe(self) -> dict:
        return {
            "hbar": self.hbar,
            "channels": [
                {"threshold": c.threshold, "mass": c.reduced_mass, "l": c.angular_momentum}
                for c in self.channels
            ],
        }


@dataclass(frozen=True)
class SheetSelector:
    """Signs in front of each channel momentum; all ``+1`` is the physical sheet."""

    signs: tuple[int, ...]

    def __post_init__(self):
        signs = tuple(int(s) for s in self.signs)
        if not signs or any(s not in (1, -1) for s in signs):
            raise ValueError(f"sheet signs must be a non-empty sequence of +1/-1, got {self.signs!r}")
        object.__setattr__(self, "signs", signs)

    @classmethod
    def parse(cls, text: str) -> "SheetSelector":
        """Build a selector from a sign string such as ``"+-"``."""
        text = text.strip().strip("()")
        mapping = {"+": 1, "-": -1}
        try:
            return cls(tuple(mapping[ch] for ch in text))
        except KeyError:
            raise ValueError(f"invalid sheet string {text!r}; use characters '+' and '-'") from None

    @classmethod
    def coerce(cls, value) -> "SheetSelector":
        if isinstance(value, SheetSelector):
            return value
        if isinstance(value, str):
            return cls.parse(value)
        return cls(tuple(value))

    def __str__(self) -> str:
        return "".join("+" if s > 0 else "-" for s in self.signs)

    def __len__(self) -> int:
        return len(self.signs)

    def flipped(self) -> "SheetSelector":
        return SheetSelector(tuple(-s for s in self.signs))

    @property
    def array(self) -> np.ndarray:
        return np.array(self.signs, dtype=float)


def physical_sheet(cs: ChannelSet) -> SheetSelector:
    return SheetSelector((1,) * cs.n)


def enumerate_sheets(cs: ChannelSet) -> list[SheetSelector]:
    """All ``2**N`` sheets in binary-counting order, channel 1 as the lowest bit.

    Bit value 0 means ``+1``, so the physical sheet comes first.
    """
    n = cs.n
    if n > MAX_ENUMERATED_CHANNELS:
        raise ValueError(f"refusing to enumerate 2**{n} sheets (limit is {MAX_ENUMERATED_CHANNELS} channels)")
    sheets = []
    for index in range(2**n):
        sheets.append(SheetSelector(tuple(-1 if (index >> bit) & 1 else 1 for bit in range(n))))
    return sheets


def upper_sqrt(z):
    """Square root with ``Im >= 0``; on the cut (positive real ``z``) the positive root.

    This places the branch cut of ``sqrt(E - E_n)`` along ``E > E_n``, so the
    physical sheet is reached from the upper half plane (``E + i0``).
    """
    root = np.sqrt(np.asarray(z, dtype=complex))
    return np.where(root.imag < 0, -root, root)


def channel_momenta(cs: ChannelSet, energy, sheet: SheetSelector | Sequence[int] | str | None = None) -> np.ndarray:
    """Channel momenta ``k_n = sign_n * sqrt(2 mu_n (E - E_n)) / hbar``.

    ``energy`` may be a scalar or an array; the channel index is appended as
    the last axis of the result.
    """
    sheet = physical_sheet(cs) if sheet is None else SheetSelector.coerce(sheet)
    if len(sheet) != cs.n:
        raise ValueError(f"sheet has {len(sheet)} signs but the channel set has {cs.n} channels")
    energy = np.asarray(energy, dtype=complex)
    if not np.all(np.isfinite(energy)):
        raise ValueError("energy must be finite")
    arg = 2.0 * cs.masses * (energy[..., None] - cs.thresholds) / cs.hbar**2
    return sheet.array * upper_sqrt(arg)


def kinetic_k2(cs: ChannelSet, energy) -> np.ndarray:
    """``k_n**2`` for every channel; sheet independent."""
    energy = np.asarray(energy, dtype=complex)
    return 2.0 * cs.masses * (energy[..., None] - cs.thresholds) / cs.hbar**2


def sheets_from_strings(values: Iterable[str]) -> list[SheetSelector]:
    return [SheetSelector.parse(v) for v in values]
