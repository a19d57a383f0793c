"""Levy measures, Rosinski measures and their evaluation primitives.

Four concrete representations are supported: atomic, polar (spherical atoms
times a common radial profile), stable and tempered-stable (through a
Rosinski measure). A finite sum of these is also allowed; it is what a
tempered-stable measure flattens to when its radial profile differs between
directions.

All measures are immutable. Every measure exposes ``components()``: a list of
``(direction, weight, radial)`` triples; the generic operations below are
sums over components.
"""

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import specfun
from .exceptions import DivergenceError, MomentClassError, ValidationError
from .radial import PointMass, PowerLaw, Radial, Table, TemperedRadial

DIRECTION_ATOL = 1e-12


def _unit_rows(u, field="u"):
    u = np.atleast_2d(np.asarray(u, dtype=float))
    norms = np.linalg.norm(u, axis=1)
    if np.any(~np.isfinite(norms)) or np.any(norms == 0):
        raise ValidationError("directions must be finite and nonzero", field)
    return u / norms[:, None]


@dataclass(frozen=True, eq=False)
class Cap:
    """Spherical cap ``{u : angle(u, center) <= half_angle}``."""

    center: np.ndarray
    half_angle: float

    def __post_init__(self):
        c = _unit_rows(self.center, "center")[0]
        c.setflags(write=False)
        object.__setattr__(self, "center", c)
        if not 0 <= self.half_angle <= math.pi:
            raise ValidationError("half_angle must lie in [0, pi]", "half_angle")

    def contains(self, u, slack=0.0):
        u = np.atleast_2d(u)
        cosang = np.clip(u @ self.center, -1.0, 1.0)
        return np.arccos(cosang) <= self.half_angle + slack


def cone_mask(directions, cone, slack=0.0):
    """Membership of unit ``directions`` (k, d) in ``cone``: None, a Cap or a union of Caps."""
    directions = np.atleast_2d(directions)
    if cone is None:
        return np.ones(directions.shape[0], dtype=bool)
    if isinstance(cone, Cap):
        return cone.contains(directions, slack)
    mask = np.zeros(directions.shape[0], dtype=bool)
    for cap in cone:
        mask |= cap.contains(directions, slack)
    return mask


class SphericalMeasure:
    """Finite measure on the unit sphere given by weighted unit-vector atoms."""

    def __init__(self, directions, weights):
        u = _unit_rows(directions)
        w = np.atleast_1d(np.asarray(weights, dtype=float))
        if w.shape != (u.shape[0],):
            raise ValidationError("need one weight per direction", "w")
        if np.any(~np.isfinite(w)) or np.any(w <= 0):
            raise ValidationError("spherical weights must be positive and finite", "w")
        u.setflags(write=False)
        w.setflags(write=False)
        self.directions = u
        self.weights = w

    @property
    def dim(self):
        return self.directions.shape[1]

    @property
    def total_mass(self):
        return float(self.weights.sum())

    def mass(self, cone=None, slack=0.0):
        return float(self.weights[cone_mask(self.directions, cone, slack)].sum())

    def scaled(self, c):
        return SphericalMeasure(self.directions, self.weights * c)

    def normalized(self):
        return self.scaled(1.0 / self.total_mass)

    def is_symmetric(self, atol=1e-12):
        for u, w in zip(self.directions, self.weights):
            hit = np.all(np.abs(self.directions + u) <= atol, axis=1)
            if not np.any(np.abs(self.weights[hit] - w) <= atol * max(1.0, w)):
                return False
        return True

    def __eq__(self, other):
        return (isinstance(other, SphericalMeasure) and other.directions.shape == self.directions.shape
                and np.array_equal(other.directions, self.directions)
                and np.array_equal(other.weights, self.weights))

    def __repr__(self):
        return f"SphericalMeasure(k={self.weights.size}, d={self.dim}, mass={self.total_mass:g})"


def unit_sphere_measure(dim, directions, weights):
    """Helper accepting plain lists; ``dim`` is checked against the directions."""
    sm = SphericalMeasure(directions, weights)
    if sm.dim != dim:
        raise ValidationError(f"directions have dimension {sm.dim}, expected {dim}")
    return sm


class LevyMeasure:
    """Common interface of all measure representations."""

    kind = None
    dim = None

    def components(self):
        """List of ``(direction, weight, radial)``."""
        raise NotImplementedError

    def scaled(self, c):
        raise NotImplementedError

    def is_symmetric(self):
        return False

    @property
    def has_unbounded_support(self):
        return any(np.isinf(rad.hi) for _, _, rad in self.components())


class AtomicMeasure(LevyMeasure):
    """Finite sum of weighted point masses ``sum_k w_k delta_{x_k}``."""

    kind = "atomic"

    def __init__(self, points, weights, dim=None):
        pts = np.asarray(points, dtype=float)
        if pts.size == 0:
            if dim is None:
                raise ValidationError("empty atomic measure needs an explicit dim", "dim")
            pts = np.zeros((0, int(dim)))
        pts = np.atleast_2d(pts)
        if dim is not None and pts.shape[1] != dim:
            raise ValidationError(f"atoms have dimension {pts.shape[1]}, expected {dim}", "x")
        w = np.atleast_1d(np.asarray(weights, dtype=float)).reshape(-1)
        if w.shape != (pts.shape[0],):
            raise ValidationError("need one weight per atom", "w")
        if np.any(~np.isfinite(pts)):
            raise ValidationError("atom locations must be finite", "x")
        if np.any(~np.isfinite(w)) or np.any(w <= 0):
            raise ValidationError("atom weights must be positive and finite", "w")
        norms = np.linalg.norm(pts, axis=1)
        if np.any(norms == 0):
            raise ValidationError("atoms at the origin are not allowed (M({0}) = 0)", "x")
        pts.setflags(write=False)
        w.setflags(write=False)
        self.points, self.weights = pts, w
        self.dim = pts.shape[1]

    @cached_property
    def norms(self):
        return np.linalg.norm(self.points, axis=1)

    @cached_property
    def directions(self):
        return self.points / self.norms[:, None]

    def components(self):
        return [(u, float(w), PointMass(r)) for u, w, r in zip(self.directions, self.weights, self.norms)]

    def scaled(self, c):
        return AtomicMeasure(self.points, self.weights * c, self.dim)

    @property
    def total_mass(self):
        return float(self.weights.sum())

    def is_symmetric(self, atol=1e-12):
        for x, w in zip(self.points, self.weights):
            hit = np.all(np.abs(self.points + x) <= atol * max(1.0, np.abs(x).max()), axis=1)
            if not np.any(np.abs(self.weights[hit] - w) <= atol * max(1.0, w)):
                return False
        return True

    def __repr__(self):
        return f"AtomicMeasure(k={self.weights.size}, d={self.dim})"


class PolarMeasure(LevyMeasure):
    """``sigma(du) x radial(dr)`` with one radial profile shared by all directions."""

    kind = "polar"

    def __init__(self, sigma, radial):
        if not isinstance(radial, (PowerLaw, Table)):
            raise ValidationError("polar radial profile must be a power law or a table", "radial")
        self.sigma, self.radial = sigma, radial
        self.dim = sigma.dim

    def components(self):
        return [(u, float(w), self.radial) for u, w in zip(self.sigma.directions, self.sigma.weights)]

    def scaled(self, c):
        return PolarMeasure(self.sigma.scaled(c), self.radial)

    def is_symmetric(self):
        return self.sigma.is_symmetric()

    def __repr__(self):
        return f"PolarMeasure({self.sigma!r}, {self.radial!r})"


class StableMeasure(LevyMeasure):
    """Stable Levy measure ``r**(-1-eta) dr sigma(du)`` with ``0 < eta < 2``."""

    kind = "stable"

    def __init__(self, eta, sigma):
        if not (0 < eta < 2):
            raise ValidationError(f"eta must lie in (0, 2), got {eta}", "eta")
        self.eta = float(eta)
        self.sigma = sigma
        self.dim = sigma.dim

    @cached_property
    def radial(self):
        return PowerLaw(self.eta)

    def components(self):
        return [(u, float(w), self.radial) for u, w in zip(self.sigma.directions, self.sigma.weights)]

    def scaled(self, c):
        return StableMeasure(self.eta, self.sigma.scaled(c))

    def is_symmetric(self):
        return self.sigma.is_symmetric()

    def __repr__(self):
        return f"StableMeasure(eta={self.eta}, {self.sigma!r})"


class TemperedStableMeasure(LevyMeasure):
    """Levy measure of a p-tempered alpha-stable law with Rosinski measure ``rosinski``.

    ``M(A) = int int 1_A(t x) t**(-1-alpha) exp(-t**p) dt R(dx)``. The Rosinski
    measure must belong to the moment class of order ``max(alpha, 0)``.
    """

    kind = "tempered"

    def __init__(self, p, alpha, rosinski, check=True):
        self.params = specfun.TemperingParams(p=float(p), alpha=float(alpha))
        if isinstance(rosinski, (TemperedStableMeasure, SumMeasure)):
            raise ValidationError("Rosinski measure must be atomic, polar or stable", "rosinski")
        if check:
            report = moment_class_check(rosinski, self.params.gamma)
            if not report.member:
                raise MomentClassError(
                    f"Rosinski measure not in moment class {self.params.gamma}: "
                    f"{report.failing_integral()} diverges", "rosinski")
        self.rosinski = rosinski
        self.dim = rosinski.dim

    @property
    def p(self):
        return self.params.p

    @property
    def alpha(self):
        return self.params.alpha

    @cached_property
    def _components(self):
        return [(u, w, TemperedRadial(rad, self.params)) for u, w, rad in self.rosinski.components()]

    def components(self):
        return self._components

    def scaled(self, c):
        return TemperedStableMeasure(self.p, self.alpha, self.rosinski.scaled(c), check=False)

    def is_symmetric(self):
        return self.rosinski.is_symmetric()

    def __repr__(self):
        return f"TemperedStableMeasure(p={self.p}, alpha={self.alpha}, {self.rosinski!r})"


class SumMeasure(LevyMeasure):
    """Finite sum of measures of the other kinds."""

    kind = "sum"

    def __init__(self, parts):
        parts = list(parts)
        if not parts:
            raise ValidationError("sum measure needs at least one part", "parts")
        dims = {p.dim for p in parts}
        if len(dims) != 1:
            raise ValidationError("all parts must share one dimension", "parts")
        self.parts = tuple(parts)
        self.dim = dims.pop()

    def components(self):
        return [c for part in self.parts for c in part.components()]

    def scaled(self, c):
        return SumMeasure([p.scaled(c) for p in self.parts])

    def is_symmetric(self):
        return all(p.is_symmetric() for p in self.parts)

    def __repr__(self):
        return f"SumMeasure({list(self.parts)!r})"


@dataclass(frozen=True)
class ID0Law:
    """Infinitely divisible law without Gaussian part: Levy measure plus shift ``b``."""

    measure: LevyMeasure
    shift: np.ndarray = None

    def __post_init__(self):
        b = np.zeros(self.measure.dim) if self.shift is None else np.asarray(self.shift, dtype=float).reshape(-1)
        if b.shape != (self.measure.dim,):
            raise ValidationError(f"shift must have length {self.measure.dim}", "shift")
        b.setflags(write=False)
        object.__setattr__(self, "shift", b)

    @property
    def dim(self):
        return self.measure.dim


@dataclass(frozen=True)
class MomentClassReport:
    beta: float
    member: bool
    small_ball_integral: float
    tail_integral: float

    def failing_integral(self):
        bad = []
        if not np.isfinite(self.small_ball_integral):
            bad.append("int_{|x|<=1} |x|^2 M(dx)")
        if not np.isfinite(self.tail_integral):
            bad.append(f"int_{{|x|>1}} |x|^{self.beta:g} M(dx)")
        return " and ".join(bad) or "none"


# ---------------------------------------------------------------------------
# operations


def _check_radius(r):
    r = np.asarray(r, dtype=float)
    if np.any(~(r > 0)):
        raise ValidationError("radius must be positive", "r")
    return r


def tail_mass(M, r, cone=None, slack=0.0):
    """``M(|x| > r, x/|x| in cone)``, vectorized over ``r``.

    ``cone`` is None (whole sphere), a :class:`Cap` or an iterable of caps.
    """
    r = _check_radius(r)
    if isinstance(M, AtomicMeasure):
        keep = cone_mask(M.directions, cone, slack) if M.weights.size else np.zeros(0, bool)
        norms, w = M.norms[keep], M.weights[keep]
        return (w[None, :] * (norms[None, :] > np.atleast_1d(r)[:, None])).sum(axis=1).reshape(r.shape)
    total = np.zeros_like(r)
    comps = M.components()
    if not comps:
        return total
    dirs = np.array([c[0] for c in comps])
    mask = cone_mask(dirs, cone, slack)
    # components sharing one radial object are evaluated once
    groups = {}
    for keep, (_, w, rad) in zip(mask, comps):
        if keep:
            g = groups.setdefault(id(rad), [rad, 0.0])
            g[1] += w
    for rad, w in groups.values():
        total = total + w * rad.tail(r)
    return total


def integrate(M, f, annulus=(0.0, math.inf)):
    """``int 1{r_lo < |x| < r_hi} f(x) M(dx)``.

    ``f`` takes an ``(n, d)`` array of points and returns ``n`` values. The
    integral must converge; otherwise :class:`DivergenceError` is raised.
    """
    lo, hi = float(annulus[0]), float(annulus[1])
    if not (0 <= lo < hi):
        raise ValidationError("annulus must satisfy 0 <= r_lo < r_hi", "annulus")
    if isinstance(M, AtomicMeasure):
        keep = (M.norms > lo) & (M.norms < hi)
        if not keep.any():
            return 0.0
        return np.sum(M.weights[keep] * np.asarray(f(M.points[keep])))
    total = 0.0
    for u, w, rad in M.components():
        total = total + w * rad.integrate(lambda s, u=u: f(s[:, None] * u[None, :]), lo, hi)
    return total


def radial_vector_integral(M, g, lo=0.0, hi=math.inf, closed_hi=False):
    """``int 1{lo < |x| < hi} g(|x|) x/|x| M(dx)`` as a d-vector; ``g`` radial."""
    out = np.zeros(M.dim)
    if isinstance(M, AtomicMeasure):
        keep = (M.norms > lo) & ((M.norms < hi) | (closed_hi & (M.norms == hi)))
        if keep.any():
            vals = np.asarray(g(M.norms[keep])) * M.weights[keep]
            out = (vals[:, None] * M.directions[keep]).sum(axis=0)
        return out
    for u, w, rad in M.components():
        out = out + w * float(np.real(rad.integrate(g, lo, hi, closed_hi))) * u
    return out


def radial_scalar_integral(M, g, lo=0.0, hi=math.inf, closed_hi=False):
    """``int 1{lo < |x| < hi} g(|x|) M(dx)`` for radial ``g``."""
    if isinstance(M, AtomicMeasure):
        keep = (M.norms > lo) & ((M.norms < hi) | (closed_hi & (M.norms == hi)))
        return float(np.sum(np.asarray(g(M.norms[keep])) * M.weights[keep])) if keep.any() else 0.0
    total = 0.0
    for _, w, rad in M.components():
        total += w * float(rad.integrate(g, lo, hi, closed_hi))
    return total


def _moment_over(M, m, lo, hi, closed_hi=False):
    if isinstance(M, AtomicMeasure):
        keep = (M.norms > lo) & ((M.norms < hi) | (closed_hi & (M.norms == hi)))
        return float(np.sum(M.norms[keep] ** m * M.weights[keep]))
    total = 0.0
    groups = {}
    for _, w, rad in M.components():
        g = groups.setdefault(id(rad), [rad, 0.0])
        g[1] += w
    for rad, w in groups.values():
        total += w * rad.moment(m, lo, hi, closed_hi)
    return total


def moment(M, m, lo=0.0, hi=math.inf, closed_hi=False):
    """``int 1{lo < |x| < hi} |x|**m M(dx)``; ``inf`` when divergent."""
    return _moment_over(M, m, lo, hi, closed_hi)


def moment_class_check(M, beta):
    """Report membership of ``M`` in the class with ``int (|x|^2 ^ |x|^beta) dM < inf``."""
    if not 0 <= beta <= 2:
        raise ValidationError(f"beta must lie in [0, 2], got {beta}", "beta")
    if isinstance(M, StableMeasure):
        mass = M.sigma.total_mass
        small = mass / (2.0 - M.eta)
        tail = mass / (M.eta - beta) if beta < M.eta else math.inf
    else:
        small = _moment_over(M, 2.0, 0.0, 1.0, closed_hi=True)
        tail = _moment_over(M, float(beta), 1.0, math.inf)
    return MomentClassReport(beta=float(beta), member=bool(np.isfinite(small) and np.isfinite(tail)),
                             small_ball_integral=small, tail_integral=tail)


def char_exponent(law, z):
    """``C(z) = i<b, z> + int (exp(i<z,x>) - 1 - i<z,x>/(1+|x|^2)) M(dx)``.

    ``z`` may be a single d-vector or an ``(m, d)`` batch.
    """
    if isinstance(law, LevyMeasure):
        law = ID0Law(law)
    z = np.asarray(z, dtype=float)
    single = z.ndim == 1
    Z = np.atleast_2d(z)
    if Z.shape[1] != law.dim:
        raise ValidationError(f"z must have dimension {law.dim}", "z")
    M = law.measure
    out = 1j * (Z @ law.shift)
    if isinstance(M, AtomicMeasure):
        if M.weights.size:
            proj = Z @ M.directions.T  # (m, k)
            from .radial import char_kernel
            out = out + (char_kernel(proj, M.norms[None, :]) * M.weights[None, :]).sum(axis=1)
        return out[0] if single else out
    for row, zz in enumerate(Z):
        acc = 0j
        for u, w, rad in M.components():
            acc += w * rad.char_integral(float(zz @ u))
        out[row] += acc
    return out[0] if single else out


def rosinski_to_levy(R, p, alpha):
    """Wrap a Rosinski measure into the Levy measure of the p-tempered alpha-stable law."""
    return TemperedStableMeasure(p, alpha, R)


def levy_check(M):
    """Raise unless ``int (|x|^2 ^ 1) M(dx) < inf``."""
    report = moment_class_check(M, 0.0)
    if not report.member:
        raise MomentClassError(f"not a Levy measure: {report.failing_integral()} diverges")
    return report


__all__ = [
    "AtomicMeasure", "Cap", "ID0Law", "LevyMeasure", "MomentClassReport", "PolarMeasure",
    "PointMass", "PowerLaw", "Radial", "SphericalMeasure", "StableMeasure", "SumMeasure", "Table",
    "TemperedStableMeasure", "char_exponent", "cone_mask", "integrate", "levy_check", "moment",
    "moment_class_check", "radial_scalar_integral", "radial_vector_integral", "rosinski_to_levy",
    "tail_mass", "DivergenceError",
]
