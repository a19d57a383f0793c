"""Special functions of p-tempered alpha-stable laws.

``k_const`` is the Mellin-type constant linking a stable Levy measure to its
Rosinski measure, ``g_tail`` the tail of the radial tempering kernel
``x**(-1-alpha) * exp(-x**p)`` and ``g_tail_inverse`` its inverse.

With ``y = x**p`` the kernel tail reduces to an upper incomplete gamma
function with parameter ``s = -alpha/p``, which is negative when alpha > 0.
SciPy only covers ``s > 0``, so :func:`upper_gamma` extends it.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special

from .exceptions import DivergenceError, ValidationError


@dataclass(frozen=True)
class TemperingParams:
    """Tempering exponent ``p > 0`` and stability index ``alpha < 2, alpha != 0``."""

    p: float
    alpha: float

    def __post_init__(self):
        if not (np.isfinite(self.p) and self.p > 0):
            raise ValidationError(f"p must be > 0, got {self.p}", "p")
        if not (np.isfinite(self.alpha) and self.alpha < 2 and self.alpha != 0):
            raise ValidationError(f"alpha must lie in (-inf, 2) without 0, got {self.alpha}", "alpha")

    @property
    def gamma(self):
        return max(self.alpha, 0.0)

    @property
    def s(self):
        """Incomplete-gamma parameter ``-alpha/p``."""
        return -self.alpha / self.p


def _as_params(params=None, alpha=None, p=None):
    if params is None:
        return TemperingParams(p=p, alpha=alpha)
    return params


def _gamma_cf(s, x, max_iter=300):
    """Upper incomplete gamma via Legendre's continued fraction (modified Lentz).

    Valid for any real ``s`` when ``x`` is at least about 1.
    """
    tiny = 1e-300
    b = x + 1.0 - s
    c = np.full_like(x, 1.0 / tiny)
    d = 1.0 / b
    h = d.copy()
    active = np.ones(x.shape, dtype=bool)
    for i in range(1, max_iter + 1):
        an = -i * (i - s)
        b = b + 2.0
        d_new = an * d + b
        d_new = np.where(np.abs(d_new) < tiny, tiny, d_new)
        c_new = b + an / c
        c_new = np.where(np.abs(c_new) < tiny, tiny, c_new)
        d_new = 1.0 / d_new
        delta = d_new * c_new
        d = np.where(active, d_new, d)
        c = np.where(active, c_new, c)
        h = np.where(active, h * delta, h)
        active &= np.abs(delta - 1.0) > 1e-16
        if not active.any():
            break
    return np.exp(-x + s * np.log(x)) * h


def _upper_regularized(a, x):
    """``Q(a, x)`` for ``a > 0``; SciPy's complement form is much faster when ``P`` is small."""
    x = np.asarray(x, dtype=float)
    P = special.gammainc(a, x)
    out = 1.0 - P
    hard = P > 0.9
    if np.any(hard):
        out[hard] = special.gammaincc(a, x[hard])
    return out


def upper_gamma(s, x):
    """Non-normalized upper incomplete gamma ``Gamma(s, x)`` for real ``s`` and ``x > 0``.

    For ``s > 0`` this is ``scipy.special.gamma(s) * gammaincc(s, x)``; ``x = 0``
    is allowed in that case. For ``s <= 0`` the continued fraction is used
    when ``x >= 1`` and the downward recurrence
    ``Gamma(s, x) = (Gamma(s + 1, x) - x**s * exp(-x)) / s`` otherwise.
    """
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    if s > 0:
        out = special.gamma(s) * _upper_regularized(s, x)
        return out[0] if scalar else out
    out = np.empty_like(x)
    big = x >= 1.0
    if big.any():
        out[big] = _gamma_cf(s, x[big])
    small = ~big
    if small.any():
        xs = x[small]
        k = int(math.ceil(-s))
        top = s + k
        if top == 0.0:
            val = special.exp1(xs)
        else:
            val = special.gamma(top) * _upper_regularized(top, xs)
        lx = np.log(xs)
        for j in range(k - 1, -1, -1):
            a = s + j
            val = (val - np.exp(a * lx - xs)) / a
        out[small] = val
    return out[0] if scalar else out


def k_const(eta, params=None, *, alpha=None, p=None):
    """``K = int_0^inf t**(eta-alpha-1) exp(-t**p) dt = Gamma((eta-alpha)/p) / p``."""
    params = _as_params(params, alpha, p)
    if not eta > params.alpha:
        raise DivergenceError(
            f"K diverges: need eta > alpha, got eta={eta}, alpha={params.alpha}")
    return math.gamma((eta - params.alpha) / params.p) / params.p


def c_const(params):
    """``G(0)``: finite only for alpha < 0, where it equals ``Gamma(-alpha/p) / p``."""
    if params.alpha > 0:
        return math.inf
    return math.gamma(params.s) / params.p


def g_tail(u, params=None, *, alpha=None, p=None):
    """``G(u) = int_u^inf x**(-1-alpha) exp(-x**p) dx``, vectorized over ``u``.

    ``u = 0`` gives ``c = G(0)`` when alpha < 0 and ``inf`` otherwise.
    """
    params = _as_params(params, alpha, p)
    u = np.asarray(u, dtype=float)
    if np.any(u < 0):
        raise ValidationError("g_tail requires u >= 0", "u")
    scalar = u.ndim == 0
    u = np.atleast_1d(u)
    out = np.empty_like(u)
    zero = u == 0
    out[zero] = c_const(params)
    pos = ~zero
    if pos.any():
        out[pos] = upper_gamma(params.s, u[pos] ** params.p) / params.p
    return out[0] if scalar else out


def g_tail_log_slope(u, params):
    """``d log G / d log u``, always negative."""
    u = np.asarray(u, dtype=float)
    return -(u ** -params.alpha) * np.exp(-(u ** params.p)) / g_tail(u, params)


@lru_cache(maxsize=64)
def _inverse_table(p, alpha):
    params = TemperingParams(p=p, alpha=alpha)
    top = 60.0 ** (1.0 / p)
    lu = np.linspace(-14.0 * math.log(10.0), math.log(top), 2000)
    lg = np.log(g_tail(np.exp(lu), params))
    ok = np.isfinite(lg) & (lg > -700)
    # decreasing in u: reverse for interpolation on log G
    return lg[ok][::-1], lu[ok][::-1]


def g_tail_inverse(t, params=None, *, alpha=None, p=None, rtol=1e-12):
    """Inverse of :func:`g_tail`: the ``u > 0`` with ``G(u) = t``, vectorized.

    A tabulated inverse gives the starting point, followed by safeguarded
    Newton steps on ``log G`` in ``log u`` inside a maintained bracket.
    """
    params = _as_params(params, alpha, p)
    t = np.asarray(t, dtype=float)
    scalar = t.ndim == 0
    t = np.atleast_1d(t)
    if np.any(~(t > 0)):
        raise ValidationError("g_tail_inverse requires t > 0", "t")
    c = c_const(params)
    if np.any(t >= c):
        raise ValidationError(f"t must be below G(0) = {c}", "t")
    a, pp = params.alpha, params.p
    lt = np.log(t)
    lg_tab, lu_tab = _inverse_table(pp, a)
    lu = np.interp(lt, lg_tab, lu_tab)
    # asymptotic starting points outside the table
    high = lt > lg_tab[-1]
    if high.any():
        if a > 0:
            lu[high] = -(np.log(a) + lt[high]) / a
        else:
            lu[high] = lu_tab[-1]
    low = lt < lg_tab[0]
    if low.any():
        lu[low] = np.log(np.maximum(-np.log(t[low] * pp), 1.0)) / pp

    # bracket in log u: G(exp(lo)) >= t >= G(exp(hi))
    lo = lu - 1.0
    hi = lu + 1.0
    for _ in range(200):
        bad = g_tail(np.exp(lo), params) < t
        if not bad.any():
            break
        lo[bad] -= 2.0 * (1.0 + np.abs(lo[bad]))
    for _ in range(200):
        bad = g_tail(np.exp(hi), params) > t
        if not bad.any():
            break
        hi[bad] += np.maximum(1.0, 0.5 * np.abs(hi[bad]))
    lu = np.clip(lu, lo, hi)

    active = np.ones_like(lu, dtype=bool)
    for _ in range(100):
        idx = np.nonzero(active)[0]
        if idx.size == 0:
            break
        x = lu[idx]
        u = np.exp(x)
        g = g_tail(u, params)
        resid = np.log(g) - lt[idx]
        # shrink bracket
        above = resid > 0
        lo[idx] = np.where(above, x, lo[idx])
        hi[idx] = np.where(above, hi[idx], x)
        slope = -(u ** -a) * np.exp(-(u ** pp)) / g
        with np.errstate(divide="ignore", invalid="ignore"):
            dx = resid / slope
            step = x - dx
        # small residual in G (implies |G(u) - t| <= rtol * max(1, t)) and in u;
        # G is nearly flat where u**-a e**-u**p << G, so the first alone is not enough
        done = (np.abs(resid) <= 0.5 * rtol) & ~(np.abs(dx) > 0.5 * rtol)
        l, h = lo[idx], hi[idx]
        outside = ~np.isfinite(step) | (step <= l) | (step >= h)
        step = np.where(outside, 0.5 * (l + h), step)
        stalled = (h - l) <= 4e-16 * np.maximum(1.0, np.abs(x))
        lu[idx] = np.where(done, x, step)
        active[idx[done | stalled]] = False
    out = np.exp(lu)
    return out[0] if scalar else out
