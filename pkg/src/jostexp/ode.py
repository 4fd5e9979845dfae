"""Embedded Dormand-Prince 5(4) integrator for batches of complex ODE systems.

The state has shape ``(batch, ...)``.  All members of a batch share one step
sequence; the error estimate is the RMS over each member, maximised over the
batch, so a batch of energies is integrated as cheaply as the worst of them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Dormand & Prince (1980) tableau
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)

SAFETY = 0.9
FAC_MIN = 0.2
FAC_MAX = 10.0
BETA = 0.04  # PI stabilisation
ALPHA = 0.2 - 0.75 * BETA


class IntegrationError(RuntimeError):
    """The integrator could not reach the end of the contour."""


class DivergenceError(IntegrationError):
    """The solution blew up: the energy is outside the convergence domain for this contour."""


@dataclass
class IntegrationStats:
    steps: int = 0
    rejected: int = 0
    evaluations: int = 0


def _member_norm(err, scale):
    ratio = np.abs(err) / scale
    axes = tuple(range(1, ratio.ndim))
    return np.sqrt(np.mean(ratio**2, axis=axes)) if axes else ratio


def _initial_step(rhs, t0, y0, f0, direction_len, rtol, atol):
    scale = atol + rtol * np.abs(y0)
    d0 = np.max(_member_norm(y0, scale))
    d1 = np.max(_member_norm(f0, scale))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, direction_len)
    y1 = y0 + h0 * f0
    f1 = rhs(t0 + h0, y1)
    d2 = np.max(_member_norm(f1 - f0, scale)) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1, direction_len)


def integrate(rhs, t0: float, t1: float, y0, rtol: float, atol: float, max_steps: int = 200_000,
              overflow: float = 1e100, stats: IntegrationStats | None = None):
    """Integrate ``dy/dt = rhs(t, y)`` from real ``t0`` to ``t1 > t0``; return ``y(t1)``."""
    if not t1 > t0:
        raise ValueError("integration interval must be increasing")
    stats = stats if stats is not None else IntegrationStats()
    y = np.array(y0, dtype=complex)
    t = float(t0)
    f = rhs(t, y)
    stats.evaluations += 1
    h = _initial_step(rhs, t, y, f, t1 - t0, rtol, atol)
    stats.evaluations += 1
    err_old = 1e-4
    k = [None] * 7
    while t < t1:
        if stats.steps + stats.rejected >= max_steps:
            raise IntegrationError(f"maximum number of steps ({max_steps}) exceeded at t = {t:.6g}")
        if h < 1e-14 * max(1.0, abs(t)):
            raise IntegrationError(f"step size underflow at t = {t:.6g}")
        last = t + h >= t1
        if last:
            h = t1 - t
        k[0] = f
        for stage in range(1, 7):
            acc = y.copy()
            for j, a in enumerate(_A[stage]):
                if a:
                    acc += (h * a) * k[j]
            if stage == 6:
                y_new = acc
            k[stage] = rhs(t + _C[stage] * h, acc)
        stats.evaluations += 6
        err = sum((h * e) * kj for e, kj in zip(_E, k) if e)
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err_norm = float(np.max(_member_norm(err, scale)))
        if not np.isfinite(err_norm):
            raise DivergenceError(f"non-finite solution at t = {t:.6g}")
        if err_norm <= 1.0:
            t = t1 if last else t + h
            y = y_new
            f = k[6]
            stats.steps += 1
            if np.max(np.abs(y)) > overflow:
                raise DivergenceError(
                    f"solution exceeded {overflow:.0e} at t = {t:.6g}: outside the analyticity/convergence domain"
                )
            fac = SAFETY * max(err_norm, 1e-10) ** -ALPHA * err_old**BETA
            h *= min(FAC_MAX, max(FAC_MIN, fac))
            err_old = max(err_norm, 1e-4)
        else:
            stats.rejected += 1
            h *= max(FAC_MIN, SAFETY * err_norm**-ALPHA)
    return y
