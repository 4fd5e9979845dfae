"""Riccati-Bessel, Riccati-Neumann and Riccati-Hankel functions of complex argument.

Conventions::

    j_0(z) = sin z,   y_0(z) = -cos z,   h^(+-)_l = j_l +- i y_l,   h^(+-)_0 = -+ i exp(+-iz)

Small arguments use the power series in ``z**2``; elsewhere the Hankel pair is
built by upward recurrence (stable for both kinds) and ``j``, ``y`` follow by
linear combination.  The momentum-factorised ("tilded") forms

    tilde_j_l(E, r) = j_l(k r) / k**(l+1),    tilde_y_l(E, r) = k**l y_l(k r)

depend on ``k`` only through ``k**2`` and are evaluated straight from the
series near ``k = 0``.  Negative Neumann orders use
``y_{-n}(z) = (-1)**(n+1) j_{n-1}(z)``.
"""

from __future__ import annotations

import math

import numpy as np

SERIES_RTOL = 1e-17
MAX_SERIES_TERMS = 400


def _check_finite(*arrays):
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise ValueError("non-finite argument")


def _scalar_out(value, *inputs):
    if all(np.ndim(x) == 0 for x in inputs):
        return complex(value[()]) if isinstance(value, np.ndarray) else complex(value)
    return value


def _series_threshold(order: int) -> float:
    return order + 1.0


def _double_factorial_odd(m: int) -> float:
    """(2m-1)!! with (-1)!! = 1."""
    out = 1.0
    for i in range(1, 2 * m, 2):
        out *= i
    return out


def _sum_series(q, ratio):
    """Sum 1 + sum_n prod_{i<=n} ratio(i) * q, element-wise, until terms are negligible."""
    q = np.asarray(q, dtype=complex)
    term = np.ones_like(q)
    total = np.ones_like(q)
    for n in range(1, MAX_SERIES_TERMS):
        term = term * ratio(n) * q
        total = total + term
        if np.all(np.abs(term) <= SERIES_RTOL * np.abs(total)):
            break
    return total


def _tj_series(order: int, q, r):
    """tilde_j via the series; ``q = (k r)**2``."""
    s = _sum_series(q, lambda n: -0.5 / (n * (2 * order + 2 * n + 1)))
    return r ** (order + 1) / _double_factorial_odd(order + 1) * s


def _ty_series(order: int, q, r):
    """tilde_y (order >= 0) via the series; ``q = (k r)**2``."""
    s = _sum_series(q, lambda n: -0.5 / (n * (2 * n - 1 - 2 * order)))
    return -_double_factorial_odd(order) / r**order * s


def hankel_table(lmax: int, z):
    """Riccati-Hankel functions ``h^(+)``, ``h^(-)`` for orders ``0..lmax``.

    Returns two arrays of shape ``z.shape + (lmax + 1,)``.  ``z`` must be nonzero.
    """
    z = np.asarray(z, dtype=complex)
    ep = np.exp(1j * z)
    em = np.exp(-1j * z)
    hp = np.empty(z.shape + (lmax + 1,), dtype=complex)
    hm = np.empty_like(hp)
    hp[..., 0] = -1j * ep
    hm[..., 0] = 1j * em
    if lmax >= 1:
        inv = 1.0 / z
        hp[..., 1] = -ep * (1.0 + 1j * inv)
        hm[..., 1] = -em * (1.0 - 1j * inv)
        for order in range(1, lmax):
            c = (2 * order + 1) * inv
            hp[..., order + 1] = c * hp[..., order] - hp[..., order - 1]
            hm[..., order + 1] = c * hm[..., order] - hm[..., order - 1]
    return hp, hm


def _jy_large(order: int, z):
    hp, hm = hankel_table(order, z)
    hp, hm = hp[..., order], hm[..., order]
    return 0.5 * (hp + hm), -0.5j * (hp - hm)


def riccati_j(l: int, z):
    """Riccati-Bessel function ``j_l(z) = z * spherical_jn(l, z)``."""
    if l < 0:
        raise ValueError("Riccati-Bessel order must be non-negative")
    z = np.asarray(z, dtype=complex)
    _check_finite(z)
    small = np.abs(z) < _series_threshold(l)
    out = np.empty(z.shape, dtype=complex)
    if np.any(small):
        zs = z[small]
        out[small] = _tj_series(l, zs * zs, zs)
    if np.any(~small):
        out[~small] = _jy_large(l, z[~small])[0]
    return _scalar_out(out, z)


def riccati_y(l: int, z):
    """Riccati-Neumann function ``y_l(z) = z * spherical_yn(l, z)``; ``y_0 = -cos z``.

    Negative orders are defined by ``y_{-n}(z) = (-1)**(n+1) j_{n-1}(z)``.
    """
    if l < 0:
        n = -l
        return _scalar_out((-1) ** (n + 1) * np.asarray(riccati_j(n - 1, z)), z)
    z = np.asarray(z, dtype=complex)
    _check_finite(z)
    if l > 0 and np.any(z == 0):
        raise ValueError(f"y_{l}(z) is singular at z = 0")
    small = np.abs(z) < _series_threshold(l)
    out = np.empty(z.shape, dtype=complex)
    if np.any(small):
        zs = z[small]
        with np.errstate(divide="ignore", invalid="ignore"):
            out[small] = _ty_series(l, zs * zs, zs)
    if np.any(~small):
        out[~small] = _jy_large(l, z[~small])[1]
    return _scalar_out(out, z)


def riccati_h(sign: int | str, l: int, z):
    """Riccati-Hankel function ``h^(+-)_l = j_l +- i y_l``; singular at ``z = 0``."""
    s = _sign(sign)
    if l < 0:
        raise ValueError("Riccati-Hankel order must be non-negative")
    z = np.asarray(z, dtype=complex)
    _check_finite(z)
    if np.any(z == 0):
        raise ValueError("Riccati-Hankel functions are singular at z = 0")
    hp, hm = hankel_table(l, z)
    return _scalar_out((hp if s > 0 else hm)[..., l], z)


def _sign(sign) -> int:
    if sign in (1, "+", "+1"):
        return 1
    if sign in (-1, "-", "-1"):
        return -1
    raise ValueError(f"sign must be + or -, got {sign!r}")


def riccati_j_prime(l: int, z):
    """``d j_l / dz = (l+1)/z j_l - j_{l+1}``."""
    z = np.asarray(z, dtype=complex)
    if l == 0:
        return _scalar_out(np.cos(z), z)
    return _scalar_out((l + 1) / z * np.asarray(riccati_j(l, z)) - np.asarray(riccati_j(l + 1, z)), z)


def riccati_y_prime(l: int, z):
    z = np.asarray(z, dtype=complex)
    return _scalar_out((l + 1) / z * np.asarray(riccati_y(l, z)) - np.asarray(riccati_y(l + 1, z)), z)


def riccati_h_prime(sign, l: int, z):
    s = _sign(sign)
    z = np.asarray(z, dtype=complex)
    hp, hm = hankel_table(l + 1, z)
    h = hp if s > 0 else hm
    return _scalar_out((l + 1) / z * h[..., l] - h[..., l + 1], z)


# -- momentum-factorised forms ------------------------------------------------


def tilde_j(l: int, k, r):
    """``j_l(k r) / k**(l+1)``, finite and smooth through ``k = 0``."""
    if l < 0:
        raise ValueError("order must be non-negative")
    k, r = np.broadcast_arrays(np.asarray(k, dtype=complex), np.asarray(r, dtype=complex))
    _check_finite(k, r)
    return _scalar_out(tilde_j_table(l, k, r)[..., l], k, r)


def tilde_y(l: int, k, r):
    """``k**l y_l(k r)``; negative orders via the reflection relation."""
    k, r = np.broadcast_arrays(np.asarray(k, dtype=complex), np.asarray(r, dtype=complex))
    _check_finite(k, r)
    if l < 0:
        n = -l
        return _scalar_out((-1) ** (n + 1) * tilde_j_table(n - 1, k, r)[..., n - 1], k, r)
    if l > 0 and np.any(r == 0):
        raise ValueError(f"tilde_y_{l} is singular at r = 0")
    return _scalar_out(tilde_y_table(l, k, r)[..., l], k, r)


def tilde_j_table(lmax: int, k, r):
    """tilde_j for orders ``0..lmax``; shape ``broadcast(k, r).shape + (lmax + 1,)``."""
    k, r = np.broadcast_arrays(np.asarray(k, dtype=complex), np.asarray(r, dtype=complex))
    z = k * r
    q = z * z
    az = np.abs(z)
    out = np.empty(z.shape + (lmax + 1,), dtype=complex)
    large_any = az >= _series_threshold(0)
    if np.any(large_any):
        hp, hm = hankel_table(lmax, z[large_any])
        jl = 0.5 * (hp + hm)
        kl = k[large_any][..., None] ** (np.arange(lmax + 1) + 1)
        large_vals = jl / kl
    for order in range(lmax + 1):
        small = az < _series_threshold(order)
        if np.any(small):
            out[small, order] = _tj_series(order, q[small], r[small])
        big = ~small
        if np.any(big):
            # big is a subset of large_any; map it into the compacted array
            out[big, order] = large_vals[big[large_any], order]
    return out


def tilde_y_table(lmax: int, k, r):
    """tilde_y for orders ``0..lmax`` (non-negative)."""
    k, r = np.broadcast_arrays(np.asarray(k, dtype=complex), np.asarray(r, dtype=complex))
    z = k * r
    q = z * z
    az = np.abs(z)
    out = np.empty(z.shape + (lmax + 1,), dtype=complex)
    large_any = az >= _series_threshold(0)
    if np.any(large_any):
        hp, hm = hankel_table(lmax, z[large_any])
        yl = -0.5j * (hp - hm)
        kl = k[large_any][..., None] ** np.arange(lmax + 1)
        large_vals = yl * kl
    with np.errstate(divide="ignore", invalid="ignore"):
        for order in range(lmax + 1):
            small = az < _series_threshold(order)
            if np.any(small):
                out[small, order] = _ty_series(order, q[small], r[small])
            big = ~small
            if np.any(big):
                out[big, order] = large_vals[big[large_any], order]
    return out


# -- Taylor coefficients in the energy -----------------------------------------


def _k_of(e0, mu, hbar, threshold):
    arg = 2.0 * mu * (np.asarray(e0, dtype=complex) - threshold) / hbar**2
    return np.sqrt(arg)


def taylor_g(l: int, n: int, e0, r, mu: float = 1.0, hbar: float = 1.0, threshold: float = 0.0):
    """n-th Taylor coefficient of ``tilde_j_l(E, r)`` in ``(E - e0)``.

    ``g = (1/n!) (-mu r / hbar**2)**n  j_{l+n}(k r) / k**(l+n+1)`` at ``E = e0``.
    """
    if n < 0:
        raise ValueError("Taylor index must be non-negative")
    k = _k_of(e0, mu, hbar, threshold)
    r = np.asarray(r, dtype=complex)
    val = (-mu * r / hbar**2) ** n / math.factorial(n) * np.asarray(tilde_j(l + n, k, r))
    return _scalar_out(val, e0, r)


def taylor_t(l: int, n: int, e0, r, mu: float = 1.0, hbar: float = 1.0, threshold: float = 0.0):
    """n-th Taylor coefficient of ``tilde_y_l(E, r)`` in ``(E - e0)``.

    ``t = (1/n!) (mu r / hbar**2)**n  k**(l-n) y_{l-n}(k r)`` at ``E = e0``.
    """
    if n < 0:
        raise ValueError("Taylor index must be non-negative")
    r = np.asarray(r, dtype=complex)
    if np.any(r == 0):
        raise ValueError("taylor_t is evaluated at r != 0")
    k = _k_of(e0, mu, hbar, threshold)
    val = (mu * r / hbar**2) ** n / math.factorial(n) * np.asarray(tilde_y(l - n, k, r))
    return _scalar_out(val, e0, r)


def taylor_tables(ls, mus, hbar: float, k, r, order: int):
    """Diagonal Taylor coefficients ``gamma_n`` and ``eta_n`` for all channels.

    ``ls``, ``mus``: per-channel arrays (length N); ``k``: momenta at the
    expansion centre, shape ``(..., N)``; ``r``: radius broadcastable to
    ``k``.  Returns ``(gamma, eta)`` with shape ``(order + 1, ..., N)``.
    """
    k, r = np.broadcast_arrays(np.asarray(k, dtype=complex), np.asarray(r, dtype=complex))
    ls = np.asarray(ls, dtype=int)
    lmax = int(ls.max())
    tj = tilde_j_table(lmax + order, k, r)
    lowest_y = int(ls.max())
    ty = tilde_y_table(lowest_y, k, r)
    gamma = np.empty((order + 1,) + k.shape, dtype=complex)
    eta = np.empty_like(gamma)
    scale = np.asarray(mus, dtype=float) * r / hbar**2
    for c, l in enumerate(ls):
        sc = scale[..., c]
        power = np.ones_like(sc)
        for n in range(order + 1):
            if n > 0:
                power = power * sc / n
            gamma[n, ..., c] = (-1) ** n * power * tj[..., c, l + n]
            m = l - n
            if m >= 0:
                eta[n, ..., c] = power * ty[..., c, m]
            else:
                p = -m
                eta[n, ..., c] = power * (-1) ** (p + 1) * tj[..., c, p - 1]
    return gamma, eta
