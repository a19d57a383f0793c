"""Inversions of measures through the unit sphere.

The beta-inversion pushes a measure forward under ``x -> x/|x|**2`` and
reweights by ``|x|**(2+beta)``. It is an involution on the moment class of
order beta and exchanges behaviour near 0 with behaviour near infinity. The
log-inversion uses the weight ``|x|**2 (1+|log|x||)**kappa`` with
``kappa = +1`` outside the unit ball and ``-1`` inside.
"""

import math

import numpy as np

from . import specfun
from .exceptions import DivergenceError, MomentClassError, ValidationError
from .measures import (AtomicMeasure, PolarMeasure, SphericalMeasure, StableMeasure, SumMeasure,
                       TemperedStableMeasure, moment, moment_class_check)
from .radial import PointMass, PowerLaw, Table, TemperedRadial

PER_DECADE = 512


def _require_class(M, beta):
    report = moment_class_check(M, beta)
    if not report.member:
        raise MomentClassError(f"measure is not in the moment class of order {beta:g}: "
                               f"{report.failing_integral()} diverges", "beta")
    return report


def _invert(M, beta):
    if isinstance(M, AtomicMeasure):
        n2 = M.norms ** 2
        return AtomicMeasure(M.points / n2[:, None], M.weights * M.norms ** (2.0 + beta), M.dim)
    if isinstance(M, StableMeasure):
        return StableMeasure(2.0 + beta - M.eta, M.sigma)
    if isinstance(M, PolarMeasure):
        rad, factor = M.radial.pushforward_inverse(2.0 + beta)
        return PolarMeasure(M.sigma.scaled(factor) if factor != 1.0 else M.sigma, rad)
    if isinstance(M, SumMeasure):
        return SumMeasure([_invert(p, beta) for p in M.parts])
    if isinstance(M, TemperedStableMeasure):
        raise ValidationError("tempered-stable Levy measures are inverted through their Rosinski "
                              "measure: use rosinski_inversion, or flatten_to_polar first", "measure")
    raise ValidationError(f"cannot invert {type(M).__name__}")


def beta_inversion(M, beta):
    """``M^beta(A) = int 1_A(x/|x|^2) |x|^(2+beta) M(dx)``.

    Exact for atomic, stable (index ``2+beta-eta``, same spherical part) and
    polar measures with power-law or tabulated profiles.
    """
    if not 0 <= beta <= 2:
        raise ValidationError(f"beta must lie in [0, 2], got {beta}", "beta")
    if isinstance(M, TemperedStableMeasure):
        _invert(M, beta)
    _require_class(M, beta)
    return _invert(M, beta)


def rosinski_inversion(R, gamma=None):
    """Invert a Rosinski measure with ``beta = gamma``.

    ``R`` may also be a tempered-stable measure, in which case its Rosinski
    measure is inverted with ``gamma = max(alpha, 0)`` and a tempered-stable
    measure with the same parameters is returned.
    """
    if isinstance(R, TemperedStableMeasure):
        if gamma is not None and gamma != R.params.gamma:
            raise ValidationError("gamma is fixed by alpha for a tempered-stable measure", "gamma")
        inv = rosinski_inversion(R.rosinski, R.params.gamma)
        return TemperedStableMeasure(R.p, R.alpha, inv)
    if gamma is None:
        raise ValidationError("gamma is required for a bare Rosinski measure", "gamma")
    if not 0 <= gamma < 2:
        raise ValidationError(f"gamma must lie in [0, 2), got {gamma}", "gamma")
    return beta_inversion(R, gamma)


def _log_weight(r):
    r = np.asarray(r, dtype=float)
    lr = np.abs(np.log(r))
    return r ** 2 * np.where(r >= 1.0, 1.0 + lr, 1.0 / (1.0 + lr))


def _tab_range(rad, lo, hi):
    a = rad.lo if rad.lo > 0 else lo
    b = rad.hi if np.isfinite(rad.hi) else hi
    return a, b


def _log_grid(a, b, per_decade):
    n = max(int(math.ceil(per_decade * math.log10(b / a))), 1) + 1
    return np.geomspace(a, b, n)


def log_inversion(R, *, lo=1e-12, hi=1e12, per_decade=PER_DECADE):
    """Log-inversion ``|x|^2 (1+|log|x||)^kappa`` pushed through ``x -> x/|x|^2``.

    Exact on atomic measures. Continuous profiles are tabulated at
    ``per_decade`` points per decade on their support, with infinite ends
    truncated to ``[lo, hi]``; the result is a polar measure with a table.
    """
    if isinstance(R, TemperedStableMeasure):
        raise ValidationError("log-inversion applies to Rosinski measures", "measure")
    report = moment_class_check(R, 0.0)
    logm = _log_moment(R)
    if not report.member or not np.isfinite(logm):
        raise MomentClassError("measure is not in the log moment class: "
                               + (report.failing_integral() if not report.member
                                  else "int_{|x|>1} log|x| R(dx)") + " diverges", "measure")
    if isinstance(R, AtomicMeasure):
        n2 = R.norms ** 2
        return AtomicMeasure(R.points / n2[:, None], R.weights * _log_weight(R.norms), R.dim)
    if isinstance(R, SumMeasure):
        return SumMeasure([log_inversion(p, lo=lo, hi=hi, per_decade=per_decade) for p in R.parts])
    rad = R.radial
    a, b = _tab_range(rad, lo, hi)
    s = _log_grid(1.0 / b, 1.0 / a, per_decade)
    # density at s of the image: rho(1/s) * w(1/s) * s**-2
    dens = rad.density(1.0 / s) * _log_weight(1.0 / s) / s ** 2
    dens = np.where(np.isfinite(dens), dens, 0.0)
    return PolarMeasure(R.sigma, Table(s, dens))


def _log_moment(R):
    if isinstance(R, AtomicMeasure):
        big = R.norms > 1
        return float(np.sum(np.log(R.norms[big]) * R.weights[big]))
    total = 0.0
    for _, w, rad in R.components():
        try:
            total += w * float(rad.integrate(np.log, 1.0, math.inf))
        except DivergenceError:
            return math.inf
    return total


def sigma_prime(sigma, eta, alpha=None, p=None, params=None):
    """Scale ``sigma`` by ``K_{2+gamma-eta}/K_eta``."""
    params = params or specfun.TemperingParams(p=p, alpha=alpha)
    g = params.gamma
    if not g < eta < 2:
        raise DivergenceError(f"eta must lie in (gamma, 2) = ({g}, 2), got {eta}")
    return sigma.scaled(kappa_ratio(eta, params))


def kappa_ratio(eta, params):
    """``K_{2+gamma-eta} / K_eta``, the one constant shared by sigma' and the TS norming."""
    return specfun.k_const(2.0 + params.gamma - eta, params) / specfun.k_const(eta, params)


def stable_rosinski(eta, sigma, alpha=None, p=None, params=None):
    """Rosinski measure ``K^{-1} * stable(eta, sigma)`` whose tempered law is exactly stable."""
    params = params or specfun.TemperingParams(p=p, alpha=alpha)
    return StableMeasure(eta, sigma.scaled(1.0 / specfun.k_const(eta, params)))


def _tempered_table(rad, lo, hi, per_decade):
    s = _log_grid(lo, hi, per_decade)
    dens = rad.density(s)
    return Table(s, np.where(np.isfinite(dens) & (dens > 1e-300), dens, 0.0))


def flatten_to_polar(M, *, lo=None, hi=None, per_decade=PER_DECADE):
    """Tabulate the radial profile of a tempered-stable Levy measure.

    Returns a polar measure (or a sum of them when the profile differs across
    directions). A stable Rosinski measure gives an exact power law. Otherwise
    the density is tabulated on ``[lo, hi]`` at ``per_decade`` points per
    decade; mass outside is dropped and log-log interpolation error is of
    order ``(ln 10 / per_decade)**2 * p**2 * (s/|x|)**p / 8`` relative.
    """
    if not isinstance(M, TemperedStableMeasure):
        return M
    R, params = M.rosinski, M.params
    if isinstance(R, StableMeasure):
        return StableMeasure(R.eta, R.sigma.scaled(specfun.k_const(R.eta, params)))
    scales = [s for _, _, rad in R.components() for s in rad.scales()]
    lo = lo if lo is not None else min(scales) * 1e-12
    top = max(scales) * 45.0 ** (1.0 / params.p)
    hi = hi if hi is not None else top
    if isinstance(R, PolarMeasure):
        rad = TemperedRadial(R.radial, params)
        if isinstance(R.radial, PowerLaw) and R.radial.lo == 0 and R.radial.hi == math.inf:
            k = specfun.k_const(R.radial.index, params)
            return PolarMeasure(R.sigma.scaled(k), PowerLaw(R.radial.index))
        return PolarMeasure(R.sigma, _tempered_table(rad, lo, hi, per_decade))
    # atomic: one polar piece per distinct radius
    groups = {}
    for u, w, rad in R.components():
        groups.setdefault(rad.radius, []).append((u, w))
    parts = []
    for radius, items in sorted(groups.items()):
        sigma = SphericalMeasure([u for u, _ in items], [w for _, w in items])
        table = _tempered_table(TemperedRadial(PointMass(radius), params), lo, hi, per_decade)
        parts.append(PolarMeasure(sigma, table))
    return parts[0] if len(parts) == 1 else SumMeasure(parts)


def moment_exchange(M, beta):
    """``(int_{|x|>1} |x|^2 dM, int_{|x|<=1} |x|^beta dM^beta)``: finite together or not at all."""
    inv = _invert(M, beta)
    return moment(M, 2.0, 1.0, math.inf), moment(inv, float(beta), 0.0, 1.0, closed_hi=True)
