"""One-dimensional radial measures on (0, inf).

Every Levy measure in the toolkit decomposes into finitely many pieces of the
form ``w * delta_u (x) nu(dr)``: a direction ``u``, a weight ``w`` and a radial
measure ``nu``. The classes here implement ``nu``: tail masses, moments,
integrals against radial functions, the one-sided characteristic integral and
exact sampling of radii above a cutoff.
"""

import math
from functools import cached_property

import numpy as np
from scipy import integrate as sp_integrate

from . import specfun
from .exceptions import DivergenceError, ValidationError
from .quadrature import DEFAULT_ABSTOL, DEFAULT_RELTOL, radial_integral


def _sin_minus_x(x):
    """``sin(x) - x`` without cancellation near 0."""
    x = np.asarray(x, dtype=float)
    out = np.sin(x) - x
    small = np.abs(x) < 1e-2
    xs = x[small]
    x2 = xs * xs
    out[small] = -xs * x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0))
    return out


def char_kernel(a, s):
    """``exp(i a s) - 1 - i a s / (1 + s**2)`` evaluated stably for small ``a s``."""
    x = a * s
    re = -2.0 * np.sin(0.5 * x) ** 2
    im = _sin_minus_x(x) + x * s * s / (1.0 + s * s)
    return re + 1j * im


class Radial:
    """Base class. Subclasses set ``lo``/``hi`` (support) and implement the hooks."""

    lo = 0.0
    hi = math.inf

    def scales(self):
        return [1.0]

    def density(self, s):
        raise NotImplementedError

    def tail(self, r):
        """``nu((r, inf))``, vectorized over ``r``."""
        raise NotImplementedError

    def integrate(self, g, lo=0.0, hi=math.inf, closed_hi=False, *, abstol=DEFAULT_ABSTOL,
                  reltol=DEFAULT_RELTOL):
        """``int g(s) nu(ds)`` over ``(lo, hi)`` (or ``(lo, hi]``); ``g`` vectorized.

        Raises :class:`DivergenceError` if the integral diverges at 0 or infinity.
        """
        a, b = max(lo, self.lo), min(hi, self.hi)
        if not a < b:
            return 0.0
        value, _ = radial_integral(lambda s: g(s) * self.density(s), a, b,
                                   scales=self.scales(), abstol=abstol, reltol=reltol)
        return value

    def moment(self, m, lo=0.0, hi=math.inf, closed_hi=False):
        """``int s**m nu(ds)`` over the range; ``inf`` when divergent."""
        try:
            return float(self.integrate(lambda s: s ** m, lo, hi, closed_hi))
        except DivergenceError:
            return math.inf

    def char_integral(self, a):
        """``int (exp(i a s) - 1 - i a s/(1 + s**2)) nu(ds)`` for scalar ``a``."""
        if a == 0:
            return 0j
        cut = max(20.0 * math.pi / abs(a), 10.0 * max(self.scales()))
        if np.isfinite(self.hi) and self.hi <= cut:
            return complex(self.integrate(lambda s: char_kernel(a, s), 0.0, self.hi))
        body = complex(self.integrate(lambda s: char_kernel(a, s), 0.0, cut))
        start = max(cut, self.lo)

        def dens(s):
            return float(self.density(np.array([s]))[0])

        opts = dict(weight="cos", wvar=abs(a), epsabs=1e-13, limlst=200)
        cos_part = sp_integrate.quad(dens, start, np.inf, **opts)[0]
        opts["weight"] = "sin"
        sin_part = math.copysign(sp_integrate.quad(dens, start, np.inf, **opts)[0], a)
        drift = self.integrate(lambda s: s / (1.0 + s * s), start, math.inf)
        tail = float(self.tail(start))
        return body + (cos_part - tail) + 1j * (sin_part - a * drift)

    def sample_above(self, eps, size, rng):
        """``size`` radii from ``nu`` restricted to ``(eps, inf)`` and normalized."""
        raise NotImplementedError

    def pushforward_inverse(self, weight_power):
        """Radial part of the image under ``r -> 1/r`` with weight ``r**weight_power``."""
        raise NotImplementedError(f"{type(self).__name__} has no closed-form inversion")


class PointMass(Radial):
    """Unit point mass at ``radius``."""

    def __init__(self, radius):
        if not (np.isfinite(radius) and radius > 0):
            raise ValidationError(f"atom radius must be positive and finite, got {radius}")
        self.radius = float(radius)
        self.lo = self.hi = self.radius

    def scales(self):
        return [self.radius]

    def tail(self, r):
        return (self.radius > np.asarray(r, dtype=float)).astype(float)

    def integrate(self, g, lo=0.0, hi=math.inf, closed_hi=False, **kw):
        inside = lo < self.radius and (self.radius < hi or (closed_hi and self.radius == hi))
        return np.asarray(g(np.array([self.radius])))[0] if inside else 0.0

    def moment(self, m, lo=0.0, hi=math.inf, closed_hi=False):
        return float(self.integrate(lambda s: s ** m, lo, hi, closed_hi))

    def char_integral(self, a):
        return complex(char_kernel(a, np.array([self.radius]))[0])

    def sample_above(self, eps, size, rng):
        return np.full(size, self.radius)

    def pushforward_inverse(self, weight_power):
        return PointMass(1.0 / self.radius), self.radius ** weight_power

    def __eq__(self, other):
        return isinstance(other, PointMass) and other.radius == self.radius

    def __repr__(self):
        return f"PointMass({self.radius!r})"


class PowerLaw(Radial):
    """Density ``s**(-1-index)`` on ``(lo, hi)``; the stable profile when lo=0, hi=inf."""

    def __init__(self, index, lo=0.0, hi=math.inf):
        lo, hi = float(lo), float(hi)
        if not (0.0 <= lo < hi):
            raise ValidationError(f"power-law cutoffs must satisfy 0 <= lo < hi, got {lo}, {hi}")
        if not np.isfinite(index):
            raise ValidationError("power-law index must be finite")
        self.index = float(index)
        self.lo, self.hi = lo, hi

    def scales(self):
        return [s for s in (self.lo, self.hi) if 0 < s < math.inf] or [1.0]

    def density(self, s):
        s = np.asarray(s, dtype=float)
        inside = (s > self.lo) & (s < self.hi)
        with np.errstate(divide="ignore", over="ignore"):
            return np.where(inside, s ** (-1.0 - self.index), 0.0)

    def _antideriv_gap(self, a, b, m):
        """``int_a^b s**(m-1-index) ds`` for arrays a <= b, allowing 0 and inf."""
        e = m - self.index
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            if e == 0:
                out = np.log(b) - np.log(a)
            else:
                out = (b ** e - a ** e) / e
                # no cancellation when e * log(b/a) is small
                fin = (a > 0) & np.isfinite(b) & (b > a)
                if np.any(fin):
                    af, bf = np.broadcast_to(a, out.shape)[fin], np.broadcast_to(b, out.shape)[fin]
                    out = np.array(out, dtype=float)
                    out[fin] = af ** e * np.expm1(e * (np.log(bf) - np.log(af))) / e
        out = np.where(b <= a, 0.0, out)
        return np.where(np.isnan(out), math.inf, out)

    def tail(self, r):
        r = np.asarray(r, dtype=float)
        a = np.maximum(r, self.lo)
        return self._antideriv_gap(a, np.full_like(a, self.hi), 0.0)

    def moment(self, m, lo=0.0, hi=math.inf, closed_hi=False):
        a, b = max(lo, self.lo), min(hi, self.hi)
        if not a < b:
            return 0.0
        return float(self._antideriv_gap(a, b, m))

    def sample_above(self, eps, size, rng):
        a = max(eps, self.lo)
        k = self.index
        v = 1.0 - rng.random(size)  # in (0, 1]
        if k == 0:
            return self.hi * (a / self.hi) ** v
        hk = 0.0 if (self.hi == math.inf and k > 0) else self.hi ** -k
        return (hk + v * (a ** -k - hk)) ** (-1.0 / k)

    def pushforward_inverse(self, weight_power):
        # s = 1/r: r**(w) * r**(-1-k) dr = s**(-1-(w-k)) ds
        lo = 0.0 if self.hi == math.inf else 1.0 / self.hi
        hi = math.inf if self.lo == 0 else 1.0 / self.lo
        return PowerLaw(weight_power - self.index, lo, hi), 1.0

    def __eq__(self, other):
        return (isinstance(other, PowerLaw) and other.index == self.index
                and other.lo == self.lo and other.hi == self.hi)

    def __repr__(self):
        return f"PowerLaw(index={self.index!r}, lo={self.lo!r}, hi={self.hi!r})"


class Table(Radial):
    """Tabulated density, interpolated linearly in log-log between nodes.

    A segment with a zero endpoint is treated as a gap (zero density). The
    density vanishes outside ``[r[0], r[-1]]``.
    """

    def __init__(self, r, density):
        r = np.asarray(r, dtype=float)
        d = np.asarray(density, dtype=float)
        if r.ndim != 1 or r.shape != d.shape or r.size < 2:
            raise ValidationError("table needs matching 1-d 'r' and 'density' with >= 2 nodes")
        if not (np.all(r > 0) and np.all(np.isfinite(r)) and np.all(np.diff(r) > 0)):
            raise ValidationError("table radii must be positive, finite and strictly increasing", "r")
        if not (np.all(d >= 0) and np.all(np.isfinite(d))):
            raise ValidationError("table density must be finite and nonnegative", "density")
        self.r, self.d = r, d
        self.r.setflags(write=False)
        self.d.setflags(write=False)
        self.lo, self.hi = float(r[0]), float(r[-1])
        live = (d[:-1] > 0) & (d[1:] > 0)
        with np.errstate(divide="ignore", invalid="ignore"):
            k = np.log(d[1:] / d[:-1]) / np.log(r[1:] / r[:-1])
        self._live = live
        self._k = np.where(live, k, 0.0)

    def scales(self):
        return [self.lo, self.hi]

    def density(self, s):
        s = np.asarray(s, dtype=float)
        j = np.clip(np.searchsorted(self.r, s, side="right") - 1, 0, self.r.size - 2)
        inside = (s >= self.lo) & (s <= self.hi) & self._live[j]
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            val = self.d[j] * (s / self.r[j]) ** self._k[j]
        return np.where(inside, val, 0.0)

    def _segment_moment(self, j, a, b, m):
        """``int_a^b s**m rho(s) ds`` within segment j, arrays."""
        rj = self.r[j]
        e = m + self._k[j] + 1.0
        la = np.log(a / rj)
        lb = np.log(b / rj)
        with np.errstate(over="ignore", invalid="ignore"):
            small = np.abs(e) < 1e-12
            safe_e = np.where(small, 1.0, e)
            val = np.where(small, lb - la,
                           (np.exp(e * lb) - np.exp(e * la)) / safe_e)
        return np.where(self._live[j] & (b > a), self.d[j] * rj ** (m + 1.0) * val, 0.0)

    @cached_property
    def _suffix(self):
        seg = self._segment_moment(np.arange(self.r.size - 1), self.r[:-1], self.r[1:], 0.0)
        return np.concatenate([np.cumsum(seg[::-1])[::-1], [0.0]]), seg

    def moment(self, m, lo=0.0, hi=math.inf, closed_hi=False):
        a, b = max(lo, self.lo), min(hi, self.hi)
        if not a < b:
            return 0.0
        j = np.arange(self.r.size - 1)
        sa = np.clip(self.r[:-1], a, b)
        sb = np.clip(self.r[1:], a, b)
        return float(self._segment_moment(j, sa, sb, float(m)).sum())

    def tail(self, r):
        r = np.asarray(r, dtype=float)
        scalar = r.ndim == 0
        r = np.atleast_1d(r)
        suffix, _ = self._suffix
        rc = np.clip(r, self.lo, self.hi)
        j = np.clip(np.searchsorted(self.r, rc, side="right") - 1, 0, self.r.size - 2)
        partial = self._segment_moment(j, rc, self.r[j + 1], 0.0)
        out = partial + suffix[j + 1]
        out = np.where(r >= self.hi, 0.0, out)
        return out[0] if scalar else out

    def integrate(self, g, lo=0.0, hi=math.inf, closed_hi=False, **kw):
        a, b = max(lo, self.lo), min(hi, self.hi)
        if not a < b:
            return 0.0
        from .quadrature import gauss_kronrod
        la, lb = math.log(a), math.log(b)
        nodes = np.log(self.r[(self.r > a) & (self.r < b)])

        def H(v):
            s = np.exp(v)
            return g(s) * self.density(s) * s

        value, _ = gauss_kronrod(H, la, lb, breakpoints=nodes,
                                 abstol=kw.get("abstol", DEFAULT_ABSTOL),
                                 reltol=kw.get("reltol", DEFAULT_RELTOL))
        return value

    def sample_above(self, eps, size, rng):
        a = max(eps, self.lo)
        nseg = self.r.size - 1
        j = np.arange(nseg)
        sa = np.clip(self.r[:-1], a, self.hi)
        masses = self._segment_moment(j, sa, self.r[1:], 0.0)
        cdf = np.cumsum(masses)
        if cdf[-1] <= 0:
            raise ValidationError("table has no mass above the cutoff")
        seg = np.minimum(np.searchsorted(cdf, rng.random(size) * cdf[-1], side="right"), nseg - 1)
        lo_s, hi_s = sa[seg], self.r[1:][seg]
        e = self._k[seg] + 1.0
        u = rng.random(size)
        flat = np.abs(e) < 1e-12
        safe_e = np.where(flat, 1.0, e)
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            # inverse CDF of s**k on [lo_s, hi_s], computed relative to lo_s
            ratio = hi_s / lo_s
            pw = np.where(flat, ratio ** u, (1.0 + u * (ratio ** safe_e - 1.0)) ** (1.0 / safe_e))
        return lo_s * pw

    def pushforward_inverse(self, weight_power):
        # density at s = 1/r is rho(1/s) * s**(-weight_power) * s**-2; exact in log-log
        s = 1.0 / self.r[::-1]
        dens = self.d[::-1] * s ** (-weight_power - 2.0)
        return Table(s, dens), 1.0

    def __eq__(self, other):
        return (isinstance(other, Table) and np.array_equal(other.r, self.r)
                and np.array_equal(other.d, self.d))

    def __repr__(self):
        return f"Table(n={self.r.size}, lo={self.lo:g}, hi={self.hi:g})"


class TemperedRadial(Radial):
    """Radial part of a tempered-stable Levy measure built from a Rosinski radial ``base``.

    ``nu(A) = int int 1_A(t x) t**(-1-alpha) exp(-t**p) dt base(dx)``.
    """

    def __init__(self, base, params):
        self.base = base
        self.params = params
        self.lo, self.hi = 0.0, math.inf

    def scales(self):
        return self.base.scales()

    def _kernel(self, t):
        a, p = self.params.alpha, self.params.p
        with np.errstate(over="ignore", divide="ignore"):
            return t ** (-1.0 - a) * np.exp(-(t ** p))

    def tail(self, r):
        r = np.asarray(r, dtype=float)
        scalar = r.ndim == 0
        r = np.atleast_1d(r)
        params = self.params
        if isinstance(self.base, PointMass):
            out = specfun.g_tail(r / self.base.radius, params)
        else:
            out = np.array([
                self.base.integrate(lambda x, rr=rr: specfun.g_tail(rr / x, params))
                if rr > 0 else self.base.integrate(lambda x: np.full_like(x, specfun.c_const(params)))
                for rr in r])
        return out[0] if scalar else out

    def density(self, s):
        s = np.asarray(s, dtype=float)
        if isinstance(self.base, PointMass):
            rho = self.base.radius
            return self._kernel(s / rho) / rho
        return np.array([self.base.integrate(lambda x, ss=ss: self._kernel(ss / x) / x)
                         if ss > 0 else 0.0 for ss in np.atleast_1d(s)]).reshape(s.shape)

    def moment(self, m, lo=0.0, hi=math.inf, closed_hi=False):
        if not isinstance(self.base, PointMass):
            return super().moment(m, lo, hi, closed_hi)
        # int_lo^hi s**m rho**-1 k(s/rho) ds = rho**m (Gamma(e, y_lo) - Gamma(e, y_hi)) / p
        rho, a, p = self.base.radius, self.params.alpha, self.params.p
        e = (m - a) / p
        if lo <= 0 and e <= 0:
            return math.inf
        y_lo = (lo / rho) ** p
        g_lo = specfun.upper_gamma(e, y_lo) if y_lo > 0 else math.gamma(e)
        g_hi = specfun.upper_gamma(e, (hi / rho) ** p) if np.isfinite(hi) else 0.0
        return float(rho ** m * (g_lo - g_hi) / p)

    def integrate(self, g, lo=0.0, hi=math.inf, closed_hi=False, **kw):
        if isinstance(self.base, PointMass):
            return super().integrate(g, lo, hi, closed_hi, **kw)

        def inner(xs):
            out = []
            for x in xs:
                val, _ = radial_integral(lambda t, x=x: g(t * x) * self._kernel(t),
                                         lo / x, hi / x, scales=[1.0])
                out.append(val)
            return np.array(out)

        return self.base.integrate(inner)

    def sample_above(self, eps, size, rng):
        params = self.params
        base = self.base
        if isinstance(base, PointMass):
            rho = base.radius
            top = specfun.g_tail(eps / rho, params)
            v = 1.0 - rng.random(size)
            return rho * specfun.g_tail_inverse(v * top, params)
        if isinstance(base, PowerLaw) and base.lo == 0 and base.hi == math.inf:
            # the Levy measure is K * s**(-1-index) exactly
            return PowerLaw(base.index).sample_above(eps, size, rng)
        # general base: draw the Rosinski radius from its tabulated jump-rate
        # distribution, then the tempering factor exactly given that radius
        lo = base.lo if base.lo > 0 else eps * 1e-12
        hi = base.hi if np.isfinite(base.hi) else max(base.scales()) * 1e12
        hi = max(hi, lo * 10)
        grid = np.geomspace(lo, hi, max(int(512 * math.log10(hi / lo)), 64))
        rate = base.density(grid) * specfun.g_tail(eps / grid, params) * grid
        cdf = np.concatenate([[0.0], np.cumsum(0.5 * (rate[1:] + rate[:-1]) * np.diff(np.log(grid)))])
        if cdf[-1] <= 0:
            raise ValidationError("no jumps above the cutoff")
        x = np.exp(np.interp(rng.random(size) * cdf[-1], cdf, np.log(grid)))
        top = specfun.g_tail(eps / x, params)
        v = 1.0 - rng.random(size)
        return x * specfun.g_tail_inverse(v * top, params)

    def __eq__(self, other):
        return (isinstance(other, TemperedRadial) and other.params == self.params
                and other.base == self.base)

    def __repr__(self):
        return f"TemperedRadial({self.base!r}, p={self.params.p}, alpha={self.params.alpha})"
