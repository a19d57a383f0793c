"""Regular variation of Levy measures at 0 and at infinity.

A measure is regularly varying at ``a`` with index ``rho`` when
``M(|x| > r t, x/|x| in D) / M(|x| > r) -> t**rho sigma(D) / sigma(S)`` as
``r -> a``. Everything here is computed from the measure itself (tail masses
on geometric grids), not from samples.
"""

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ValidationError
from .inversion import beta_inversion, flatten_to_polar
from .measures import (AtomicMeasure, Cap, SphericalMeasure, TemperedStableMeasure, cone_mask,
                       moment_class_check, tail_mass)

CAP_SLACK = 1e-9
R2_THRESHOLD = 0.999


def default_grid(endpoint, n=40, decades=4.0, start=1e4):
    """``n`` geometric radii over ``decades`` decades, beginning ``start`` away from 1."""
    if endpoint == "zero":
        return np.geomspace(1.0 / start, 10.0 ** -(math.log10(start) + decades), n)
    if endpoint == "infinity":
        return np.geomspace(start, start * 10.0 ** decades, n)
    raise ValidationError(f"endpoint must be 'zero' or 'infinity', got {endpoint!r}", "endpoint")


def axis_caps(dim):
    """The ``2*dim`` caps of half-angle pi/4 around the signed coordinate axes."""
    caps = []
    for i in range(dim):
        for sgn in (1.0, -1.0):
            e = np.zeros(dim)
            e[i] = sgn
            caps.append(Cap(e, math.pi / 4))
    return caps


def _labels(directions, caps):
    """Index of the cap holding each direction (-1 if none); default is the nearest signed axis."""
    directions = np.atleast_2d(directions)
    if caps is None:
        i = np.argmax(np.abs(directions), axis=1)
        sgn = directions[np.arange(len(i)), i] < 0
        return 2 * i + sgn
    out = np.full(directions.shape[0], -1)
    for j, cap in enumerate(caps):
        hit = cone_mask(directions, cap, CAP_SLACK) & (out < 0)
        out[hit] = j
    return out


def _component_tails(M, r):
    """Tails per component: (directions (k, d), tails (k, len(r)))."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    if isinstance(M, AtomicMeasure):
        return M.directions, M.weights[:, None] * (M.norms[:, None] > r[None, :])
    comps = M.components()
    cache = {}
    rows = []
    for _, w, rad in comps:
        key = id(rad)
        if key not in cache:
            cache[key] = np.atleast_1d(rad.tail(r))
        rows.append(w * cache[key])
    return np.array([c[0] for c in comps]), np.array(rows)


@dataclass
class RVEstimate:
    endpoint: str
    rho_hat: float
    sigma_hat: SphericalMeasure
    ell_samples: list
    fit_r2: float
    grid: np.ndarray
    cap_fractions: np.ndarray = field(default=None)
    max_ratio_drift: float = 0.0

    @property
    def is_rv(self):
        """Diagnostic verdict: log-linear tail with a stable directional split."""
        return self.fit_r2 >= R2_THRESHOLD or self.max_ratio_drift <= 1e-3


def _ols(x, y):
    A = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    pred = A @ coef
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot <= 1e-28 * max(1.0, float(np.sum(y ** 2))):
        r2 = 1.0
    else:
        r2 = max(0.0, 1.0 - ss_res / ss_tot)
    return coef[0], coef[1], r2


def estimate_rv_index(M, endpoint, grid=None, caps=None):
    """Estimate the index, spherical part and slowly varying factor of ``M`` at ``endpoint``.

    ``grid`` lists radii in order of approach to the endpoint; the last radius
    is used for the directional split. ``caps`` is a list of :class:`Cap`;
    by default directions are assigned to the nearest signed coordinate axis.
    """
    grid = default_grid(endpoint) if grid is None else np.asarray(grid, dtype=float)
    if endpoint not in ("zero", "infinity"):
        raise ValidationError(f"endpoint must be 'zero' or 'infinity', got {endpoint!r}", "endpoint")
    if endpoint == "infinity" and not M.has_unbounded_support:
        raise ValidationError("regular variation at infinity needs unbounded support", "measure")
    dirs, comp = _component_tails(M, grid)
    tails = comp.sum(axis=0)
    if np.any(~(tails > 0)) or np.any(~np.isfinite(tails)):
        raise ValidationError("tail mass must be finite and positive on the whole grid", "grid")
    lr, lt = np.log(grid), np.log(tails)
    slope, _, r2 = _ols(lr, lt)
    rho = min(float(slope), 0.0)
    if abs(rho) < 1e-13:
        rho = 0.0

    labels = _labels(dirs, caps)
    ncaps = 2 * M.dim if caps is None else len(caps)
    per_cap = np.zeros((ncaps, grid.size))
    for lab, row in zip(labels, comp):
        if lab >= 0:
            per_cap[lab] += row
    fractions = per_cap / tails[None, :]
    drift = float(np.max(np.abs(fractions[:, -1] - fractions[:, grid.size // 2])))
    centers = axis_caps(M.dim) if caps is None else caps
    keep = fractions[:, -1] > 0
    sigma_hat = SphericalMeasure(np.array([c.center for c in centers])[keep], fractions[keep, -1])
    ell = [(float(t), float(v * t ** -rho)) for t, v in zip(grid, tails)]
    return RVEstimate(endpoint=endpoint, rho_hat=rho, sigma_hat=sigma_hat.normalized(),
                      ell_samples=ell, fit_r2=r2, grid=grid, cap_fractions=fractions[:, -1],
                      max_ratio_drift=drift)


@dataclass
class CheckRow:
    cap_id: int
    t: float
    r: float
    ratio: float
    prediction: float
    passed: bool


@dataclass
class CheckReport:
    rows: list

    @property
    def passed(self):
        return all(r.passed for r in self.rows)


def check_rv_sigma(M, endpoint, rho, sigma, caps, t_values, tol=1e-8, r=None):
    """Compare ``M(|x|>r t, D)/M(|x|>r)`` with ``t**rho sigma(D)/sigma(S)`` at radius ``r``.

    ``r`` defaults to the extreme radius of the default grid. Each row
    passes when the absolute difference is within ``tol``.
    """
    if r is None:
        r = default_grid(endpoint)[-1]
    base = float(tail_mass(M, r))
    if not base > 0:
        raise ValidationError("tail mass at the test radius is zero", "r")
    total = sigma.total_mass
    rows = []
    for j, cap in enumerate(caps):
        share = sigma.mass(cap, CAP_SLACK) / total
        for t in t_values:
            ratio = float(tail_mass(M, r * t, cap, CAP_SLACK)) / base
            pred = t ** rho * share
            rows.append(CheckRow(j, float(t), float(r), ratio, pred, abs(ratio - pred) <= tol))
    return CheckReport(rows)


@dataclass
class Prop2Row:
    t: float
    cap_id: int
    small_ball: float
    small_ball_pred: float
    inverted_tail: float
    inverted_tail_pred: float

    @property
    def small_ball_ratio(self):
        return self.small_ball / self.small_ball_pred

    @property
    def inverted_tail_ratio(self):
        return self.inverted_tail / self.inverted_tail_pred


@dataclass
class Prop2Report:
    beta: float
    rho: float
    constant: float
    rows: list
    in_moment_class: bool = True

    def max_deviation(self, t_min=None):
        rows = [r for r in self.rows if t_min is None or r.t >= t_min]
        return max(max(abs(r.small_ball_ratio - 1), abs(r.inverted_tail_ratio - 1)) for r in rows)


def inverted_measure(M, beta):
    """``M^beta``; tempered-stable measures are tabulated first."""
    if isinstance(M, TemperedStableMeasure):
        M = flatten_to_polar(M)
    return beta_inversion(M, beta)


def prop2_constant_check(M, beta, rho, sigma=None, t_grid=(1e2, 1e3, 1e4), caps=None, ell=None):
    """Evaluate both sides of the small-ball / inverted-tail correspondence.

    With ``s = rho + 2 + beta``, compares ``M(|x| > 1/t, D)`` with
    ``sigma(D) t**s ell(t)`` and ``M^beta(|x| > t, D)`` with
    ``s/|rho| sigma(D) t**rho ell(t)``. When ``ell`` is omitted it is read off
    the full-sphere small-ball tail, so the first check is exact on the full
    sphere and the second one tests the constant ``s/|rho|``. When ``sigma``
    is omitted the estimated spherical part at 0 is used.
    """
    if not -2.0 - beta < rho < 0:
        raise ValidationError(f"rho must lie in (-2-beta, 0) = ({-2 - beta}, 0), got {rho}", "rho")
    member = moment_class_check(M, beta).member
    if sigma is None:
        sigma = estimate_rv_index(M, "zero").sigma_hat
    s = rho + 2.0 + beta
    const = s / abs(rho)
    caps = [None] if caps is None else list(caps)
    if member:
        Mb = inverted_measure(M, beta)

        def inverted_tail(t, cap):
            return float(tail_mass(Mb, t, cap, CAP_SLACK))
    else:
        # M^beta is not a Levy measure here, but its tail away from 0 is finite:
        # M^beta(|x| > t, D) = int_{|x| < 1/t, D} |x|^(2+beta) M(dx)
        def inverted_tail(t, cap):
            return _cone_moment(M, 2.0 + beta, 1.0 / t, cap)
    total = sigma.total_mass
    if ell is None:
        def ell(t):
            return float(tail_mass(M, 1.0 / t)) / (total * t ** s)
    rows = []
    for t in t_grid:
        lt = ell(t)
        for j, cap in enumerate(caps):
            sd = total if cap is None else sigma.mass(cap, CAP_SLACK)
            small = float(tail_mass(M, 1.0 / t, cap, CAP_SLACK))
            inv = inverted_tail(t, cap)
            rows.append(Prop2Row(float(t), j, small, sd * t ** s * lt, inv, const * sd * t ** rho * lt))
    return Prop2Report(float(beta), float(rho), const, rows, member)


def _cone_moment(M, m, hi, cap):
    """``int_{|x| < hi, x/|x| in cap} |x|^m M(dx)``."""
    comps = M.components()
    dirs = np.array([c[0] for c in comps])
    keep = cone_mask(dirs, cap, CAP_SLACK)
    return float(sum(w * rad.moment(m, 0.0, hi) for k, (_, w, rad) in zip(keep, comps) if k))


def write_rv_csv(path, M, estimate, caps=None):
    """Rows ``(r, tail, cap_id, ratio, prediction)`` along the estimate's grid."""
    dirs, comp = _component_tails(M, estimate.grid)
    labels = _labels(dirs, caps)
    tails = comp.sum(axis=0)
    share = estimate.cap_fractions
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["r", "tail", "cap_id", "ratio", "prediction"])
        for lab in range(share.size):
            row = comp[labels == lab].sum(axis=0)
            for r, tot, part in zip(estimate.grid, tails, row):
                w.writerow([repr(float(r)), repr(float(tot)), lab, repr(float(part / tot)),
                            repr(float(share[lab]))])
