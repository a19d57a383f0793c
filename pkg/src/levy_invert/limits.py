"""Norming functions and limit experiments for small and large times.

Long-time norming ``a_t`` solves ``t M(|x| > 1/a_t) = level``. The short-time
norming of the inverted process is built from it through
``h(t) ~ t^-1 a_t^-2`` and ``b_t = [(1/t) h^-1(1/t)]^(1/2)`` (tempered-stable
mode: exponent ``2+gamma`` and the factor ``kappa^(-1/eta)``). Centerings are
the exact shifts that give the scaled law zero drift in the
``x/(1+|x|^2)`` convention.

Monte Carlo checks compare scaled increments with a tabulated stable CDF
through the Kolmogorov-Smirnov distance.
"""

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from . import specfun
from .exceptions import UnsupportedError, ValidationError
from .inversion import beta_inversion, flatten_to_polar, kappa_ratio, rosinski_inversion
from .measures import (AtomicMeasure, ID0Law, SphericalMeasure, StableMeasure, TemperedStableMeasure,
                       moment, radial_scalar_integral, radial_vector_integral, tail_mass)
from .regvar import estimate_rv_index
from .simulate import SimConfig, eps_for_bias, sample_increment
from .stable import ks_distance, project_stable, stable_cdf

KS_BAND_C = 1.36
KS_SE_C = 0.26
BIAS_TARGET = 1e-3
RV_TOL = 0.05


@dataclass
class ScalingFunctions:
    a: object
    zeta: object
    b: object
    xi: object
    h: object
    h_inv: object
    mode: str = "id0"
    kappa: float = None


def _as_law(law):
    return law if isinstance(law, ID0Law) else ID0Law(law)


def _analytic(M):
    """Tempered-stable measures with a stable Rosinski part are exactly stable."""
    if isinstance(M, TemperedStableMeasure) and isinstance(M.rosinski, StableMeasure):
        return flatten_to_polar(M)
    return M


def tail_norming(M, t, level=1.0):
    """``c`` with ``t M(|x| > 1/c) = level``, by root finding in ``log r``."""
    M = _analytic(M)
    target = math.log(level / t)

    def f(lr):
        return math.log(max(float(tail_mass(M, math.exp(lr))), 1e-300)) - target

    lo, hi = -1.0, 1.0
    while f(lo) < 0:
        lo *= 2
        if lo < -1400:
            raise ValidationError(f"t M(|x|>r) stays below {level:g} at t={t:g}; total mass too small", "t")
    while f(hi) > 0:
        hi *= 2
        if hi > 1400:
            raise ValidationError("tail mass does not vanish at infinity", "measure")
    return math.exp(-optimize.brentq(f, lo, hi, xtol=1e-14, rtol=1e-15))


def centering(law, t, c):
    """Shift ``zeta`` such that ``c (X_t - zeta)`` has zero drift."""
    law = _as_law(law)
    M = _analytic(law.measure)
    if M.is_symmetric() and not np.any(law.shift):
        return np.zeros(M.dim)
    if c == 1.0:
        return t * law.shift
    c2 = c * c
    v = radial_vector_integral(M, lambda s: s * (1.0 / (1.0 + c2 * s * s) - 1.0 / (1.0 + s * s)))
    return t * (law.shift + v)


def _vectorize(f):
    def g(t):
        arr = np.asarray(t, dtype=float)
        if arr.ndim == 0:
            return f(float(arr))
        return np.array([f(float(x)) for x in arr.ravel()])
    return g


def _check_rv(M, eta, endpoint):
    est = estimate_rv_index(M, endpoint)
    if abs(est.rho_hat + eta) > RV_TOL or not est.is_rv:
        where = "infinity" if endpoint == "infinity" else "zero"
        raise ValidationError(f"measure is not regularly varying at {where} with index {-eta:g} "
                              f"(estimated {est.rho_hat:.4f})", "eta")
    return est


def long_time_norming(M, eta, shift=None, level=1.0, check=True):
    """``(a, zeta)`` for ``a_t (X_t - zeta_t) => S_eta`` as ``t -> infinity``."""
    if not 0 < eta < 2:
        raise ValidationError(f"eta must lie in (0, 2), got {eta}", "eta")
    if not M.has_unbounded_support:
        raise ValidationError("long-time norming needs unbounded support", "measure")
    M = _analytic(M)
    if check:
        _check_rv(M, eta, "infinity")
    law = ID0Law(M, shift)
    if eta == 1.0 and not (M.is_symmetric() and not np.any(law.shift)):
        raise UnsupportedError("eta = 1 is supported for symmetric laws only")
    a = _vectorize(lambda t: tail_norming(M, t, level))
    zeta = _vectorize(lambda t: centering(law, t, tail_norming(M, t, level)))
    return a, zeta


def _loglog_interp(x, y):
    """Linear interpolation in log-log coordinates with linear extrapolation at both ends."""
    lx, ly = np.log(x), np.log(y)
    s0 = (ly[1] - ly[0]) / (lx[1] - lx[0])
    s1 = (ly[-1] - ly[-2]) / (lx[-1] - lx[-2])

    def f(t):
        lt = np.log(np.asarray(t, dtype=float))
        out = np.interp(lt, lx, ly)
        out = np.where(lt < lx[0], ly[0] + s0 * (lt - lx[0]), out)
        out = np.where(lt > lx[-1], ly[-1] + s1 * (lt - lx[-1]), out)
        out = np.exp(out)
        return float(out) if out.ndim == 0 else out
    return f


def short_time_scaling_from_long(a, eta, mode="id0", params=None, measure=None, shift=None,
                                 grid=None, zeta=None):
    """Short-time norming ``b`` of the inverted process from the long-time norming ``a``.

    ``measure``/``shift`` describe the short-time process; they only enter
    the centering ``xi`` (zero when omitted). In ``"ts"`` mode ``params``
    are the tempering parameters and ``kappa = K_{2+gamma-eta} / K_eta``.
    """
    if mode not in ("id0", "ts"):
        raise ValidationError(f"mode must be 'id0' or 'ts', got {mode!r}", "mode")
    if mode == "ts":
        if params is None:
            raise ValidationError("ts mode needs tempering parameters", "params")
        if not isinstance(params, specfun.TemperingParams):
            params = specfun.TemperingParams(*params)
        gamma = params.gamma
        kappa = kappa_ratio(eta, params)
    else:
        gamma, kappa = 0.0, None
    expo = 2.0 + gamma
    T = np.geomspace(1e-2, 1e30, 129) if grid is None else np.asarray(grid, dtype=float)
    aT = np.asarray(a(T), dtype=float)
    hT = 1.0 / (T * aT ** expo)
    if not np.all(np.isfinite(hT)) or np.any(np.diff(np.log(hT)) <= 0):
        raise ValidationError("h is not strictly increasing; a is not regularly varying", "a")
    h = _loglog_interp(T, hT)
    h_inv = _loglog_interp(hT, T)
    factor = 1.0 if kappa is None else kappa ** (-1.0 / eta)

    def b(t):
        t = np.asarray(t, dtype=float)
        out = factor * (h_inv(1.0 / t) / t) ** (1.0 / expo)
        return float(out) if np.ndim(out) == 0 else out

    if measure is None:
        def xi(t):
            return np.zeros(1)
    else:
        law = ID0Law(measure, shift)
        xi = _vectorize(lambda t: centering(law, t, b(t)))
    return ScalingFunctions(a=a, zeta=zeta, b=b, xi=xi, h=h, h_inv=h_inv, mode=mode, kappa=kappa)


def _target_sigma(M, eta, endpoint, sigma):
    if sigma is not None:
        return sigma
    M = _analytic(M)
    est = estimate_rv_index(M, endpoint)
    return est.sigma_hat.scaled(eta / est.sigma_hat.total_mass)


@dataclass
class LimitRow:
    t: float
    norming: float
    centering: np.ndarray
    ks: float
    band: float
    se: float
    iqr_ratio: float
    eps: float
    bias_bound: float
    jump_rate: float
    passed: bool


@dataclass
class LimitReport:
    eta: float
    sigma: SphericalMeasure
    mode: str
    n: int
    threshold: float
    rows: list
    monotone: bool = True
    verdict: bool = True

    def ks(self):
        return np.array([r.ks for r in self.rows])


def _child_seed(seed, i, k):
    return int(np.random.SeedSequence(int(seed)).spawn(k)[i].generate_state(1, np.uint64)[0])


def _ks_per_direction(y, eta, sigma, shift_target):
    """KS distances of the projections of ``y`` onto the coordinate axes (and IQR ratios)."""
    d = y.shape[1]
    out = []
    for i in range(d):
        e = np.zeros(d)
        e[i] = 1.0
        if d == 1:
            s1, b1 = sigma, 0.0
        else:
            s1, b1 = project_stable(eta, sigma, e, shift_target)
        cdf = stable_cdf(eta, s1, b1)
        col = y[:, i]
        q = np.quantile(col, [0.25, 0.75])
        iqr = float(cdf.quantile(0.75) - cdf.quantile(0.25))
        out.append((ks_distance(col, cdf), float(q[1] - q[0]) / iqr))
    return out


def short_time_limit_check(law, eta, sigma=None, t_grid=(1e-1, 1e-2, 1e-3), cfg=None, mode="short",
                           norming=None, threshold=None, bias_target=BIAS_TARGET):
    """Simulate scaled increments and compare them with ``S_eta(sigma, 0)``.

    ``mode`` is ``"short"`` (grid decreasing to 0) or ``"long"`` (grid
    increasing). The norming ``c_t`` defaults to tail matching,
    ``t M(|x| > 1/c_t) = sigma(S)/eta``; ``norming`` may instead be a
    callable ``t -> c_t``. ``sigma`` defaults to the estimated spherical part
    at the relevant endpoint scaled to total mass ``eta``. The small-jump
    cutoff keeps ``c_t^2`` times the bias bound below ``bias_target`` unless
    ``cfg.eps`` fixes it. Verdict: KS values nonincreasing along the grid
    within two standard errors and the last one at most ``threshold``
    (default ``1.36/sqrt(n) + 0.02``).
    """
    law = _as_law(law)
    law = ID0Law(_analytic(law.measure), law.shift)
    M = law.measure
    if mode not in ("short", "long"):
        raise ValidationError(f"mode must be 'short' or 'long', got {mode!r}", "mode")
    cfg = cfg or SimConfig(t=1.0, n=10_000)
    if not 0 < eta <= 2 or eta == 2:
        raise ValidationError(f"eta must lie in (0, 2), got {eta}", "eta")
    endpoint = "zero" if mode == "short" else "infinity"
    sigma = _target_sigma(M, eta, endpoint, sigma)
    if sigma.dim != M.dim:
        raise ValidationError("sigma and the law differ in dimension", "sigma")
    level = sigma.total_mass / eta
    n = int(cfg.n)
    band = KS_BAND_C / math.sqrt(n)
    se = KS_SE_C / math.sqrt(n)
    threshold = band + 0.02 if threshold is None else threshold
    t_grid = [float(t) for t in t_grid]
    rows = []
    for i, t in enumerate(t_grid):
        c = norming(t) if norming is not None else tail_norming(M, t, level)
        zeta = centering(law, t, c)
        eps = cfg.eps
        if eps is None and not isinstance(M, StableMeasure):
            eps = eps_for_bias(M, t, bias_target / (c * c))
            if isinstance(M, AtomicMeasure) and M.weights.size:
                eps = min(eps, 0.5 * float(M.norms.min()))
        sub = SimConfig(t=t, n=n, eps=eps, seed=_child_seed(cfg.seed, i, len(t_grid)), blocks=cfg.blocks)
        x, plan = sample_increment(law, sub, return_plan=True)
        y = c * (x - zeta)
        res = _ks_per_direction(y, eta, sigma, np.zeros(M.dim))
        ks = max(r[0] for r in res)
        iqr = res[int(np.argmax([r[0] for r in res]))][1]
        rows.append(LimitRow(t, float(c), np.asarray(zeta), float(ks), band, se, iqr, float(plan.eps),
                             float(plan.bias_bound) * c * c, float(plan.jump_rate), ks <= threshold))
    ks = np.array([r.ks for r in rows])
    monotone = bool(np.all(np.diff(ks) <= 2 * se))
    verdict = monotone and bool(ks[-1] <= threshold)
    return LimitReport(float(eta), sigma, mode, n, threshold, rows, monotone, verdict)


def write_limit_csv(path, report):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "b_t", "KS", "band", "verdict"])
        for r in report.rows:
            w.writerow([repr(r.t), repr(r.norming), repr(r.ks), repr(r.band), "pass" if r.passed else "fail"])


@dataclass
class CorrespondenceReport:
    long: LimitReport
    short: LimitReport
    scaling: ScalingFunctions
    sigma_long: SphericalMeasure
    sigma_short: SphericalMeasure
    b_ratio: float

    @property
    def passed(self):
        return self.long.verdict and self.short.verdict


def inversion_correspondence_check(M, eta, t_small, t_large, cfg=None, shift=None, sigma=None):
    """Long-time check of ``M`` against ``S_eta`` paired with a short-time check
    of the inverted measure against ``S_{2-eta}`` (``S_{2+gamma-eta}`` for
    tempered-stable ``M``), with ``b_t`` linked to ``a_t`` through ``h``.

    ``b_ratio`` compares ``b`` at ``t_small`` with the tail-matching norming
    of the inverted law at the same level.
    """
    cfg = cfg or SimConfig(t=1.0, n=10_000)
    if isinstance(M, TemperedStableMeasure):
        mode = "ts"
        params = M.params
        inv = rosinski_inversion(M)
        eta_short = 2.0 + params.gamma - eta
    else:
        mode, params = "id0", None
        inv = beta_inversion(M, 0.0)
        eta_short = 2.0 - eta
    sigma_long = _target_sigma(M, eta, "infinity", sigma)
    level = sigma_long.total_mass / eta
    a, zeta = long_time_norming(M, eta, shift, level=level)
    scal = short_time_scaling_from_long(a, eta, mode, params, measure=inv, shift=shift, zeta=zeta)
    factor = 1.0 if mode == "id0" else scal.kappa ** (1.0 - eta_short / eta)
    sigma_short = sigma_long.scaled(factor)
    long = short_time_limit_check(ID0Law(M, shift), eta, sigma_long, [t_large], cfg, mode="long", norming=a)
    short = short_time_limit_check(ID0Law(inv, shift), eta_short, sigma_short, [t_small], cfg,
                                   mode="short", norming=scal.b)
    ref = tail_norming(inv, t_small, sigma_short.total_mass / eta_short)
    return CorrespondenceReport(long, short, scal, sigma_long, sigma_short, float(scal.b(t_small)) / ref)


# sequence criteria

BUMP_CENTERS = np.geomspace(1e-2, 1e2, 12)
BUMP_HALF_WIDTH = 0.5
EPS_GRID = (1e-1, 1e-2, 1e-3, 1e-4)
N_GRID = (1e1, 1e2, 1e3, 1e4)


def bump(center, half_width=BUMP_HALF_WIDTH):
    """Smooth radial bump supported on ``|log10(r/center)| < half_width``."""
    def f(r):
        u = np.log10(np.asarray(r, dtype=float) / center) / half_width
        inside = np.abs(u) < 1
        out = np.zeros_like(u)
        out[inside] = np.exp(1.0 - 1.0 / (1.0 - u[inside] ** 2))
        return out
    return f


def bump_integrals(M):
    out = []
    for c in BUMP_CENTERS:
        lo, hi = c * 10 ** -BUMP_HALF_WIDTH, c * 10 ** BUMP_HALF_WIDTH
        out.append(radial_scalar_integral(M, bump(c), lo, hi))
    return np.array(out)


@dataclass
class CriterionResult:
    name: str
    grid: list
    values: list
    passed: bool


@dataclass
class SequenceReport:
    mode: str
    criteria: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(c.passed for c in self.criteria.values())

    def verdicts(self):
        return {k: c.passed for k, c in self.criteria.items()}


def _unpack(item, mode):
    if isinstance(item, ID0Law):
        M, b = item.measure, item.shift
    elif isinstance(item, tuple):
        M, b = item[0], item[1]
    else:
        M, b = item, None
    if mode == "ts" and isinstance(M, TemperedStableMeasure):
        M = M.rosinski
    b = np.zeros(M.dim) if b is None else np.asarray(b, dtype=float)
    return M, b


def _gamma_of(items, gamma):
    if gamma is not None:
        return float(gamma)
    for it in items:
        M = it.measure if isinstance(it, ID0Law) else (it[0] if isinstance(it, tuple) else it)
        if isinstance(M, TemperedStableMeasure):
            return M.params.gamma
    raise ValidationError("ts mode needs gamma (or tempered-stable elements)", "gamma")


def _nonincreasing(v, rtol=1e-9):
    v = np.asarray(v, dtype=float)
    return bool(np.all(v[1:] <= v[:-1] * (1 + rtol) + 1e-300))


def sequence_convergence_check(sequence, limit, mode="id0", tol=1e-2, gamma=None):
    """Finite-sequence proxies for the convergence criteria of ``(M_n, b_n) -> (M_0, b_0)``.

    In ``"ts"`` mode the measures are Rosinski measures (tempered-stable
    entries are unwrapped) and the tail integrand carries ``|x|^gamma``.
    Criteria: ``vague`` (12 bump integrals of the last element within
    relative ``tol`` of the limit's, bump by bump), ``shift``, ``small_ball``
    (``max_{n in last half} int_{|x|<eps} |x|^2 M_n`` along the eps grid)
    and ``tail`` (same with ``int_{|x|>N} |x|^w M_n``). Array criteria pass
    when the proxy is nonincreasing along the grid and its last value is at
    most ``tol``.
    """
    if mode not in ("id0", "ts"):
        raise ValidationError(f"mode must be 'id0' or 'ts', got {mode!r}", "mode")
    if not sequence:
        raise ValidationError("empty sequence", "sequence")
    w = _gamma_of(list(sequence) + [limit], gamma) if mode == "ts" else 0.0
    items = [_unpack(s, mode) for s in sequence]
    M0, b0 = _unpack(limit, mode)
    report = SequenceReport(mode)

    Ml, bl = items[-1]
    I_n, I_0 = bump_integrals(Ml), bump_integrals(M0)
    # relative per bump, so the verdict does not depend on the overall scale of the measures
    floor = 1e-12 * max(float(np.max(np.abs(I_n))), float(np.max(np.abs(I_0))), 1e-300)
    err = np.abs(I_n - I_0) / np.maximum(np.maximum(np.abs(I_n), np.abs(I_0)), floor)
    report.criteria["vague"] = CriterionResult("vague", BUMP_CENTERS.tolist(), err.tolist(), bool(err.max() <= tol))

    d = float(np.linalg.norm(bl - b0))
    report.criteria["shift"] = CriterionResult("shift", [len(items)], [d], d <= tol)

    tail_half = items[len(items) // 2:]
    small = [max(moment(M, 2.0, 0.0, e) for M, _ in tail_half) for e in EPS_GRID]
    report.criteria["small_ball"] = CriterionResult("small_ball", list(EPS_GRID), small,
                                                    _nonincreasing(small) and small[-1] <= tol)
    tails = [max(moment(M, w, N, math.inf) if M.dim else 0.0 for M, _ in tail_half) for N in N_GRID]
    report.criteria["tail"] = CriterionResult("tail", list(N_GRID), tails,
                                              _nonincreasing(tails) and tails[-1] <= tol)
    return report


def write_sequence_csv(path, report):
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["criterion", "grid_point", "value", "verdict"])
        for c in report.criteria.values():
            for g, v in zip(c.grid, c.values):
                wr.writerow([c.name, repr(float(g)), repr(float(v)), "pass" if c.passed else "fail"])
