"""Radial integration of the Jost-matrix equations.

Three first-order matrix systems are integrated along a ray
``r = t exp(i theta)``, ``t`` from ``r_min`` to the contour length:

* direct:  dF_in/dr  = -1/(2i) K^-1 W_out V (W_in F_in + W_out F_out),
           dF_out/dr = +1/(2i) K^-1 W_in  V (W_in F_in + W_out F_out),
           F_in = F_out = I/2 at the start;
* tilded:  dA/dr = -Y~ V (J~ A - Y~ B),  dB/dr = -J~ V (J~ A - Y~ B),
           A = I, B = 0 at the start;
* expansion coefficients of the tilded system in powers of (E - E0),
  integrated jointly for n = 0..M.

Batched variants take arrays of energies and integrate them together.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .channels import ChannelSet, SheetSelector, channel_momenta, kinetic_k2, physical_sheet, upper_sqrt
from .ode import DivergenceError, IntegrationError, IntegrationStats, integrate
from .potential import RadialPotential
from .riccati import hankel_table, taylor_tables, tilde_j_table, tilde_y_table

THETA_SCAN = np.linspace(-1.2, 1.2, 49)
MAX_LENGTH_FACTOR = 4.0
THRESHOLD_K = 1e-6


class ThresholdError(ValueError):
    """A channel momentum vanishes (or nearly so) where a formula divides by it."""


class DomainError(DivergenceError):
    """No contour makes the requested integrals converge at this energy."""


@dataclass(frozen=True)
class SolverSettings:
    """Integration settings.

    ``theta=None`` selects the rotation angle automatically per energy; the
    contour length ``R`` is then stretched by ``min_decay / margin`` (capped
    at four times ``R``) so the integrand has decayed by the same amount as
    on the unrotated path.
    """

    r_min: float = 1e-6
    R: float = 40.0
    theta: float | None = None
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_steps: int = 200_000

    def __post_init__(self):
        if not 0 < self.r_min < self.R:
            raise ValueError("need 0 < r_min < R")
        if self.theta is not None and not abs(self.theta) < math.pi / 2:
            raise ValueError("|theta| must be below pi/2")
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.max_steps < 1:
            raise ValueError("max_steps must be positive")

    def with_(self, **changes) -> "SolverSettings":
        return replace(self, **changes)

    def describe(self) -> dict:
        return {
            "r_min": self.r_min,
            "R": self.R,
            "theta": "auto" if self.theta is None else self.theta,
            "rel_tol": self.rel_tol,
            "abs_tol": self.abs_tol,
            "max_steps": self.max_steps,
        }


@dataclass(frozen=True)
class ContourPath:
    """Straight ray from ``r_min e^{i theta}`` to ``length e^{i theta}``.

    The closing arc back to the real axis is not integrated: the potential is
    negligible there.
    """

    r_min: float
    length: float
    theta: float = 0.0

    @property
    def direction(self) -> complex:
        return complex(np.exp(1j * self.theta))

    @property
    def start(self) -> complex:
        return self.r_min * self.direction

    @property
    def end(self) -> complex:
        return self.length * self.direction

    def point(self, t):
        return np.asarray(t) * self.direction


def build_contour(s: SolverSettings, theta: float | None = None, length: float | None = None) -> ContourPath:
    th = s.theta if theta is None else theta
    return ContourPath(s.r_min, s.R if length is None else length, 0.0 if th is None else float(th))


@dataclass(frozen=True)
class TildePair:
    A_tilde: np.ndarray
    B_tilde: np.ndarray
    energy: complex
    theta: float = 0.0


@dataclass(frozen=True)
class JostPair:
    F_in: np.ndarray
    F_out: np.ndarray
    energy: complex
    sheet: SheetSelector

    @property
    def det_in(self) -> complex:
        return complex(np.linalg.det(self.F_in))

    @property
    def det_out(self) -> complex:
        return complex(np.linalg.det(self.F_out))


@dataclass(frozen=True)
class ExpansionTable:
    """Asymptotic Taylor coefficients ``a_j``, ``b_j`` of the tilded matrices around ``center``."""

    center: complex
    order: int
    a: np.ndarray  # (order + 1, N, N)
    b: np.ndarray
    settings: dict = field(default_factory=dict)
    channels: dict = field(default_factory=dict)
    theta: float = 0.0
    length: float = 0.0

    def truncated(self, order: int) -> "ExpansionTable":
        if not 0 <= order <= self.order:
            raise ValueError(f"order must lie in 0..{self.order}")
        return replace(self, order=order, a=self.a[: order + 1], b=self.b[: order + 1])


# -- rotation angle heuristics --------------------------------------------------


def decay_margins(cs: ChannelSet, p: RadialPotential, energy, sheet=None, thetas=THETA_SCAN):
    """Exponential decay margins of the integrands along rays at angles ``thetas``.

    Returns ``(both, incoming)``, each with shape ``energy.shape + thetas.shape``.
    ``both`` is ``min (lambda cos th - |Im k_m e^{i th}| - |Im k_p e^{i th}|)``,
    governing the tilded system and the two direct Jost matrices together;
    ``incoming`` is ``min (lambda cos th + Im k_m e^{i th} - |Im k_p e^{i th}|)``,
    which only guarantees convergence of F_in.
    """
    k = channel_momenta(cs, energy, sheet)  # (..., N)
    rot = np.exp(1j * np.asarray(thetas))
    s = (k[..., None, :] * rot[:, None]).imag  # (..., T, N)
    lam = p.decay_rates  # (N, N)
    cos = np.cos(thetas)[:, None, None]
    with np.errstate(invalid="ignore"):
        lam_cos = np.where(np.isinf(lam), np.inf, lam * cos)
        both = lam_cos - np.abs(s)[..., :, None] - np.abs(s)[..., None, :]
        incoming = lam_cos + s[..., :, None] - np.abs(s)[..., None, :]
    return both.min(axis=(-1, -2)), incoming.min(axis=(-1, -2))


def _allowed_thetas(p: RadialPotential) -> np.ndarray:
    if not p.allows_rotation():
        return np.array([0.0])
    return THETA_SCAN[np.abs(THETA_SCAN) < p.max_angle]


def choose_theta(cs: ChannelSet, p: RadialPotential, energy, sheet=None, incoming_only: bool = False):
    """Pick the rotation angle for each energy.

    Real energies with a positive margin on the real axis keep ``theta = 0``;
    otherwise the scanned angle with the largest margin wins (smallest
    ``|theta|`` on ties).  With ``incoming_only`` the ``F_in`` margin is used
    whenever no angle makes both Jost matrices converge.  Returns
    ``(theta, margin)`` arrays; raises :class:`DomainError` where no angle
    has a positive margin.
    """
    energy = np.atleast_1d(np.asarray(energy, dtype=complex))
    thetas = _allowed_thetas(p)
    order = np.argsort(np.abs(thetas), kind="stable")
    thetas = thetas[order]
    both, inc = decay_margins(cs, p, energy, sheet, thetas)
    zero = np.flatnonzero(thetas == 0.0)
    best = np.argmax(both, axis=-1)
    margin = np.take_along_axis(both, best[:, None], -1)[:, 0]
    theta = thetas[best]
    if zero.size:
        keep = (energy.imag == 0) & (both[:, zero[0]] > 0)
        theta = np.where(keep, 0.0, theta)
        margin = np.where(keep, both[:, zero[0]], margin)
    if incoming_only:
        best_in = np.argmax(inc, axis=-1)
        use_in = margin <= 0
        theta = np.where(use_in, thetas[best_in], theta)
        margin = np.where(use_in, np.take_along_axis(inc, best_in[:, None], -1)[:, 0], margin)
    bad = ~(margin > 0)
    if np.any(bad):
        e = energy[np.flatnonzero(bad)[0]]
        raise DomainError(
            f"no rotation angle gives convergent integrals at E = {e:.6g}: outside the analyticity domain"
        )
    return theta, margin


def _plan(cs, p, energy, s: SolverSettings, sheet=None, incoming_only=False, extra_length=0.0):
    energy = np.atleast_1d(np.asarray(energy, dtype=complex))
    if s.theta is not None:
        theta = np.full(energy.shape, float(s.theta))
        length = np.full(energy.shape, s.R + extra_length)
        return theta, length
    theta, margin = choose_theta(cs, p, energy, sheet, incoming_only)
    lam = p.min_decay_rate()
    factor = np.ones_like(margin) if not np.isfinite(lam) else np.clip(lam / margin, 1.0, MAX_LENGTH_FACTOR)
    return theta, s.R * factor + extra_length


class _Ray:
    """Batch of rays sharing one integration parameter ``t`` in ``[r_min, R]``.

    Member ``b`` maps ``t`` affinely onto ``|r|`` in ``[r_min, length_b]`` at angle
    ``theta_b``, so members with different contour lengths share one step
    sequence.
    """

    def __init__(self, theta, length, s: SolverSettings):
        self.t0 = s.r_min
        self.t1 = s.R
        stretch = (np.asarray(length, dtype=float) - s.r_min) / (s.R - s.r_min)
        rot = np.exp(1j * np.asarray(theta, dtype=float))
        self.rot = rot
        self.stretch = stretch
        self.dr = stretch * rot

    def r(self, t):
        return (self.t0 + (t - self.t0) * self.stretch) * self.rot


def _checked_potential(p: RadialPotential, cs: ChannelSet, theta):
    """Validate the contour angles once; return a fast evaluator of ``(2 mu_n / hbar**2) U(r)``."""
    if p.n_channels != cs.n:
        raise ValueError(f"potential has {p.n_channels} channels but the channel set has {cs.n}")
    theta = np.atleast_1d(theta)
    p.evaluate(np.exp(1j * theta))  # raises OutsideSectorError for forbidden angles
    reduce = (2.0 * cs.masses / cs.hbar**2)[:, None]

    def v(r):
        return reduce * p._evaluate(r)

    return v


def _integrate_batch(rhs_factory, y0, theta, length, s: SolverSettings, stats=None):
    ray = _Ray(theta, length, s)
    return integrate(rhs_factory(ray), ray.t0, ray.t1, y0, s.rel_tol, s.abs_tol, s.max_steps, stats=stats)


def _order_columns(table, ls):
    """Pick ``table[..., c, ls[c]]`` for every channel ``c``."""
    ls = np.asarray(ls)
    return table[..., np.arange(ls.size), ls]


# -- tilded system ----------------------------------------------------------------


def integrate_tilde_batch(cs: ChannelSet, p: RadialPotential, energies, s: SolverSettings, stats=None):
    """Integrate the tilded equations for many energies; returns ``(A, B, theta)``."""
    energies = np.atleast_1d(np.asarray(energies, dtype=complex))
    n = cs.n
    theta, length = _plan(cs, p, energies, s)
    v_of = _checked_potential(p, cs, theta)
    k = upper_sqrt(kinetic_k2(cs, energies))  # any branch: tilded functions are even in k
    ls = cs.ls
    lmax = int(ls.max())

    def factory(ray):
        dr = ray.dr[:, None, None, None]

        def rhs(t, y):
            r = ray.r(t)
            jt = _order_columns(tilde_j_table(lmax, k, r[:, None]), ls)
            yt = _order_columns(tilde_y_table(lmax, k, r[:, None]), ls)
            q = v_of(r) @ (jt[:, :, None] * y[:, 0] - yt[:, :, None] * y[:, 1])
            d = np.empty_like(y)
            d[:, 0] = -yt[:, :, None] * q
            d[:, 1] = -jt[:, :, None] * q
            return d * dr

        return rhs

    y0 = np.zeros((energies.size, 2, n, n), dtype=complex)
    y0[:, 0] = np.eye(n)
    y = _integrate_batch(factory, y0, theta, length, s, stats)
    return y[:, 0], y[:, 1], theta


def integrate_tilde(cs: ChannelSet, p: RadialPotential, energy: complex, s: SolverSettings | None = None) -> TildePair:
    s = s or SolverSettings()
    a, b, theta = integrate_tilde_batch(cs, p, [energy], s)
    return TildePair(a[0], b[0], complex(energy), float(theta[0]))


# -- assembling Jost matrices -----------------------------------------------------


def momentum_factors(cs: ChannelSet, k):
    """Factors multiplying A~ and B~ in the semi-analytic Jost matrices.

    Returns ``(fa, fb)`` with ``fa[m, n] = k_n^(l_n+1) / (2 k_m^(l_m+1))`` and
    ``fb[m, n] = i k_m^l_m k_n^(l_n+1) / 2``.
    """
    k = np.asarray(k, dtype=complex)
    if np.any(k == 0):
        raise ThresholdError("a channel momentum is zero (energy at a threshold)")
    ls = cs.ls
    kl1 = k ** (ls + 1)
    kl = k**ls
    fa = kl1[..., None, :] / (2.0 * kl1[..., :, None])
    fb = 0.5j * kl[..., :, None] * kl1[..., None, :]
    return fa, fb


def assemble_jost(cs: ChannelSet, a_tilde, b_tilde, k):
    """``(F_in, F_out)`` from tilded matrices and momenta on the chosen sheet."""
    fa, fb = momentum_factors(cs, k)
    ta = fa * a_tilde
    tb = fb * b_tilde
    return ta - tb, ta + tb


def jost_from_tilde(cs: ChannelSet, tp: TildePair, energy=None, sheet=None) -> JostPair:
    energy = tp.energy if energy is None else complex(energy)
    sheet = physical_sheet(cs) if sheet is None else SheetSelector.coerce(sheet)
    k = channel_momenta(cs, energy, sheet)
    f_in, f_out = assemble_jost(cs, tp.A_tilde, tp.B_tilde, k)
    return JostPair(f_in, f_out, energy, sheet)


# -- direct system ----------------------------------------------------------------


def integrate_direct_batch(cs: ChannelSet, p: RadialPotential, energies, sheet, s: SolverSettings,
                           incoming_only: bool = False, stats=None):
    """Integrate the direct Jost equations; returns ``(F_in, F_out, theta)``.

    With ``incoming_only`` the contour may be chosen so that only ``F_in``
    converges (needed for bound states below the analyticity domain);
    ``F_out`` is then meaningless.
    """
    energies = np.atleast_1d(np.asarray(energies, dtype=complex))
    sheet = physical_sheet(cs) if sheet is None else SheetSelector.coerce(sheet)
    n = cs.n
    k = channel_momenta(cs, energies, sheet)
    if np.any(np.abs(k) < THRESHOLD_K):
        raise ThresholdError(
            "direct formulation needs |k_n| >= 1e-6 in every channel; use the tilded route near thresholds"
        )
    theta, length = _plan(cs, p, energies, s, sheet, incoming_only)
    v_of = _checked_potential(p, cs, theta)
    ls = cs.ls
    lmax = int(ls.max())
    half_inv_ik = 1.0 / (2j * k)

    def factory(ray):
        dr = ray.dr[:, None, None, None]

        def rhs(t, y):
            r = ray.r(t)
            hp, hm = hankel_table(lmax, k * r[:, None])
            hp = _order_columns(hp, ls)
            hm = _order_columns(hm, ls)
            q = v_of(r) @ (hm[:, :, None] * y[:, 0] + hp[:, :, None] * y[:, 1])
            d = np.empty_like(y)
            d[:, 0] = -(half_inv_ik * hp)[:, :, None] * q
            d[:, 1] = (half_inv_ik * hm)[:, :, None] * q
            return d * dr

        return rhs

    y0 = np.zeros((energies.size, 2, n, n), dtype=complex)
    y0[:, 0] = 0.5 * np.eye(n)
    y0[:, 1] = 0.5 * np.eye(n)
    y = _integrate_batch(factory, y0, theta, length, s, stats)
    return y[:, 0], y[:, 1], theta


def integrate_direct(cs: ChannelSet, p: RadialPotential, energy: complex, sheet=None,
                     s: SolverSettings | None = None) -> JostPair:
    s = s or SolverSettings()
    sheet = physical_sheet(cs) if sheet is None else SheetSelector.coerce(sheet)
    f_in, f_out, _ = integrate_direct_batch(cs, p, [energy], sheet, s)
    return JostPair(f_in[0], f_out[0], complex(energy), sheet)


# -- expansion coefficients -------------------------------------------------------


def integrate_coefficients(cs: ChannelSet, p: RadialPotential, center: complex, order: int,
                           s: SolverSettings | None = None, stats=None) -> ExpansionTable:
    """Asymptotic Taylor coefficients of the tilded matrices around ``center``.

    The equations for coefficient ``n`` only involve coefficients ``<= n``, so
    truncating at ``order`` introduces no error in the retained ones.
    """
    s = s or SolverSettings()
    if order < 0 or int(order) != order:
        raise ValueError("expansion order must be a non-negative integer")
    order = int(order)
    n = cs.n
    center = complex(center)
    theta, length = _plan(cs, p, [center], s, extra_length=2.0 * order)
    v_of = _checked_potential(p, cs, theta)
    k0 = upper_sqrt(kinetic_k2(cs, center))  # (N,)
    ls, mus, hbar = cs.ls, cs.masses, cs.hbar
    m1 = order + 1

    def factory(ray):
        dr = ray.dr[0]

        def rhs(t, y):
            r = ray.r(t)[0]
            gamma, eta = taylor_tables(ls, mus, hbar, k0, r, order)  # (M+1, N)
            alpha, beta = y[0, 0], y[0, 1]  # (M+1, N, N)
            # c[m] = sum_{j+k=m} gamma_j alpha_k - eta_j beta_k
            c = np.zeros_like(alpha)
            for j in range(m1):
                c[j:] += gamma[j][:, None] * alpha[: m1 - j] - eta[j][:, None] * beta[: m1 - j]
            q = v_of(np.asarray(r)) @ c
            d = np.zeros_like(y)
            for i in range(m1):
                d[0, 0, i:] -= eta[i][:, None] * q[: m1 - i]
                d[0, 1, i:] -= gamma[i][:, None] * q[: m1 - i]
            return d * dr

        return rhs

    y0 = np.zeros((1, 2, m1, n, n), dtype=complex)
    y0[0, 0, 0] = np.eye(n)
    y = _integrate_batch(factory, y0, theta, length, s, stats)
    return ExpansionTable(
        center=center,
        order=order,
        a=y[0, 0].copy(),
        b=y[0, 1].copy(),
        settings=s.describe(),
        channels=cs.describe(),
        theta=float(theta[0]),
        length=float(length[0]),
    )


__all__ = [
    "ContourPath",
    "DivergenceError",
    "DomainError",
    "ExpansionTable",
    "IntegrationError",
    "IntegrationStats",
    "JostPair",
    "SolverSettings",
    "ThresholdError",
    "TildePair",
    "assemble_jost",
    "build_contour",
    "choose_theta",
    "decay_margins",
    "integrate_coefficients",
    "integrate_direct",
    "integrate_direct_batch",
    "integrate_tilde",
    "integrate_tilde_batch",
    "jost_from_tilde",
    "momentum_factors",
]
