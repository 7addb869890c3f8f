r"""Sine and cosine integrals, their auxiliary functions, and the kernel G.

Definitions used throughout::

    si(x)  = \int_0^x sin(u)/u du
    ci(x)  = gamma + ln x + \int_0^x (cos(u) - 1)/u du
    f(z)   = ci(z) sin(z) + (pi/2 - si(z)) cos(z)  = \int_0^\infty sin(t)/(t+z) dt
    g(z)   = -ci(z) cos(z) + (pi/2 - si(z)) sin(z) = \int_0^\infty cos(t)/(t+z) dt

For ``x <= 4`` the power series are summed directly; beyond that the pair
``(f, g)`` comes from the continued fraction of ``exp(z) E1(z)`` at
``z = i x`` (``g - i f``), which avoids the cancellation in ``pi/2 - si``.

All functions accept scalars or arrays and return the same shape.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

EULER_GAMMA = 0.57721566490153286060651209008240243
HALF_PI = 0.5 * np.pi

CROSSOVER = 4.0
_N_SERIES = 24
_CF_MAXIT = 400
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class SpecFunValue:
    """A special-function value together with a bound on its absolute error."""

    value: float
    abs_err_bound: float


def _as_array(x, name):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name}: argument must be finite, got {x!r}")
    return arr


def _wrap(arr, like):
    if np.ndim(like) == 0:
        return float(arr)
    return arr


def _series(x):
    """Power series for (si, ci - gamma - ln x) and a rounding bound on each."""
    x2 = x * x
    t = x.copy()            # x^(2k+1)/(2k+1)!, with sign
    u = np.ones_like(x)     # x^(2k)/(2k)!, with sign
    s = t.copy()
    c = np.zeros_like(x)
    abs_s = np.abs(t)
    abs_c = np.zeros_like(x)
    for k in range(1, _N_SERIES):
        t = -t * x2 / ((2 * k) * (2 * k + 1))
        u = -u * x2 / ((2 * k - 1) * (2 * k))
        s += t / (2 * k + 1)
        c += u / (2 * k)
        abs_s += np.abs(t) / (2 * k + 1)
        abs_c += np.abs(u) / (2 * k)
    return s, c, 4 * _EPS * abs_s, 4 * _EPS * abs_c


def _fg_continued_fraction(x):
    """(f, g) for x > 0 from the Lentz evaluation of exp(ix) E1(ix) = g - i f."""
    tiny = 1e-300
    b = 1.0 + 1j * x
    c = np.full(x.shape, 1.0 / tiny, dtype=complex)
    d = 1.0 / b
    h = d.copy()
    done = np.zeros(x.shape, dtype=bool)
    for i in range(1, _CF_MAXIT):
        a = -float(i * i)
        b = b + 2.0
        d = 1.0 / (a * d + b)
        c = b + a / c
        delta = c * d
        h = np.where(done, h, h * delta)
        done |= np.abs(delta - 1.0) < _EPS
        if done.all():
            break
    return -h.imag, h.real


def _split(x):
    small = x <= CROSSOVER
    return small, ~small


def si(x):
    """Sine integral. Odd extension for negative arguments."""
    arr = _as_array(x, "si")
    ax = np.abs(arr)
    out = np.empty_like(ax)
    small, large = _split(ax)
    if small.any():
        out[small] = _series(ax[small])[0]
    if large.any():
        xl = ax[large]
        f, g = _fg_continued_fraction(xl)
        out[large] = HALF_PI - f * np.cos(xl) - g * np.sin(xl)
    return _wrap(np.sign(arr) * out, x)


def ci(x):
    """Cosine integral; only defined for ``x > 0``."""
    arr = _as_array(x, "ci")
    if np.any(arr <= 0):
        raise DomainError("ci: argument must be > 0 (branch point at 0)")
    out = np.empty_like(arr)
    small, large = _split(arr)
    if small.any():
        xs = arr[small]
        out[small] = EULER_GAMMA + np.log(xs) + _series(xs)[1]
    if large.any():
        xl = arr[large]
        f, g = _fg_continued_fraction(xl)
        out[large] = f * np.sin(xl) - g * np.cos(xl)
    return _wrap(out, x)


def sici(x):
    """Return ``(si(x), ci(x))`` for ``x > 0`` in one pass."""
    arr = _as_array(x, "sici")
    if np.any(arr <= 0):
        raise DomainError("sici: argument must be > 0")
    s = np.empty_like(arr)
    c = np.empty_like(arr)
    small, large = _split(arr)
    if small.any():
        xs = arr[small]
        ss, cc, _, _ = _series(xs)
        s[small] = ss
        c[small] = EULER_GAMMA + np.log(xs) + cc
    if large.any():
        xl = arr[large]
        f, g = _fg_continued_fraction(xl)
        cs, sn = np.cos(xl), np.sin(xl)
        s[large] = HALF_PI - f * cs - g * sn
        c[large] = f * sn - g * cs
    return _wrap(s, x), _wrap(c, x)


def aux_fg(z):
    """Return the auxiliary pair ``(f(z), g(z))`` for ``z > 0``."""
    arr = _as_array(z, "aux_fg")
    if np.any(arr <= 0):
        raise DomainError("aux_f/aux_g: argument must be > 0")
    f = np.empty_like(arr)
    g = np.empty_like(arr)
    small, large = _split(arr)
    if small.any():
        zs = arr[small]
        ss, cc, _, _ = _series(zs)
        cin = EULER_GAMMA + np.log(zs) + cc
        tail = HALF_PI - ss
        sn, cs = np.sin(zs), np.cos(zs)
        f[small] = cin * sn + tail * cs
        g[small] = -cin * cs + tail * sn
    if large.any():
        f[large], g[large] = _fg_continued_fraction(arr[large])
    return _wrap(f, z), _wrap(g, z)


def aux_f(z):
    """``f(z) = int_0^inf sin(t)/(t+z) dt``."""
    return aux_fg(z)[0]


def aux_g(z):
    """``g(z) = int_0^inf cos(t)/(t+z) dt``."""
    return aux_fg(z)[1]


def _bound(x, series_bound):
    """Absolute error bound: series rounding below the crossover, CF tolerance above."""
    if x <= CROSSOVER:
        return float(series_bound) + 4 * _EPS
    return 8 * _EPS * (1.0 + HALF_PI)


def si_value(x: float) -> SpecFunValue:
    """``si`` with an a-priori absolute error bound."""
    v = si(x)
    ax = abs(float(x))
    sb = _series(np.array([ax]))[2][0] if ax <= CROSSOVER else 0.0
    return SpecFunValue(v, _bound(ax, sb))


def ci_value(x: float) -> SpecFunValue:
    """``ci`` with an a-priori absolute error bound."""
    v = ci(x)
    sb = _series(np.array([float(x)]))[3][0] if x <= CROSSOVER else 0.0
    # ln x contributes one rounding of its own magnitude
    extra = 2 * _EPS * abs(np.log(x)) if x <= CROSSOVER else 0.0
    return SpecFunValue(v, _bound(float(x), sb) + extra)


def g_kernel(x, t):
    """Time-evolution kernel ``G(x, t) = int_0^t exp(i x s) ds = (exp(ixt) - 1)/(ix)``.

    Written as ``t exp(ixt/2) sin(xt/2)/(xt/2)`` so that ``x -> 0`` is exact.
    """
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise DomainError("g_kernel: t must be >= 0")
    x_arr = np.asarray(x, dtype=float)
    half = 0.5 * x_arr * t_arr
    safe = np.where(half == 0, 1.0, half)
    ratio = np.where(half == 0, 1.0, np.sin(safe) / safe)
    out = t_arr * np.exp(1j * half) * ratio
    if np.ndim(out) == 0:
        return complex(out)
    return out
