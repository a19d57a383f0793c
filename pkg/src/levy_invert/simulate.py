"""Monte Carlo increments of Levy processes without Gaussian part.

A sample of ``X_t`` with ``X_1 ~ ID_0(M, b)`` is drawn as a compound Poisson
sum of the jumps larger than ``eps`` plus a deterministic drift

    t b - t int_{|x|>eps} x/(1+|x|^2) M(dx) + t int_{|x|<=eps} x |x|^2/(1+|x|^2) M(dx),

which is exactly the first-order small-jump term of the exponent. The
neglected part is bounded by ``t int_{|x|<=eps} |x|^2 M(dx)`` (the reported
bias); the characteristic function at ``z`` is off by at most
``|z|^2 / 2`` times that. Stable measures are sampled exactly.

Parallelism: the ``n`` samples are split into ``blocks`` contiguous blocks,
block ``k`` draws from ``SeedSequence(seed).spawn(blocks)[k]`` and the
blocks are concatenated in order, so the output depends on ``(seed, blocks)``
only, not on the thread count.
"""

import csv
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from . import specfun
from .exceptions import ValidationError
from .measures import (AtomicMeasure, ID0Law, StableMeasure, TemperedStableMeasure, moment,
                       radial_vector_integral, tail_mass)
from .stable import sample_stable

JUMP_BUDGET = 1_000_000
THREADS_ENV = "LEVY_INVERT_THREADS"


@dataclass(frozen=True)
class SimConfig:
    t: float
    n: int
    eps: float = None
    seed: int = 0
    blocks: int = 1

    def __post_init__(self):
        if not (self.t > 0 and math.isfinite(self.t)):
            raise ValidationError("t must be positive and finite", "t")
        if int(self.n) != self.n or self.n < 1:
            raise ValidationError("n must be a positive integer", "n")
        if self.eps is not None and not self.eps > 0:
            raise ValidationError("eps must be positive", "eps")
        if int(self.blocks) != self.blocks or self.blocks < 1:
            raise ValidationError("blocks must be a positive integer", "blocks")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ValidationError("seed must fit in 64 bits", "seed")


def max_workers(blocks):
    env = os.environ.get(THREADS_ENV)
    cap = os.cpu_count() or 1
    if env:
        try:
            cap = max(1, int(env))
        except ValueError:
            raise ValidationError(f"{THREADS_ENV} must be a positive integer, got {env!r}") from None
    return max(1, min(cap, blocks))


def block_streams(seed, blocks):
    """Per-block generators derived from one root seed."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(int(seed)).spawn(int(blocks))]


def _block_sizes(n, blocks):
    base, extra = divmod(int(n), int(blocks))
    return [base + (1 if k < extra else 0) for k in range(int(blocks))]


def run_blocks(fn, cfg):
    """Apply ``fn(size, rng)`` per block (in threads) and concatenate in block order."""
    sizes = _block_sizes(cfg.n, cfg.blocks)
    rngs = block_streams(cfg.seed, cfg.blocks)
    workers = max_workers(cfg.blocks)
    if workers == 1:
        parts = [fn(m, r) for m, r in zip(sizes, rngs)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(fn, sizes, rngs))
    return np.concatenate(parts, axis=0)


def _scales(M):
    return [s for _, _, rad in M.components() for s in rad.scales()] or [1.0]


def default_eps(M, t, n_block, budget=JUMP_BUDGET):
    """Smallest cutoff keeping the expected jump count of one block within ``budget``."""
    if isinstance(M, AtomicMeasure):
        return 0.5 * float(M.norms.min()) if M.weights.size else 1.0
    target = budget / (t * n_block)
    sc = _scales(M)
    lo, hi = min(sc) * 1e-12, max(sc) * 1e12

    def excess(le):
        return math.log(max(float(tail_mass(M, math.exp(le))), 1e-300)) - math.log(target)

    if excess(math.log(lo)) <= 0:
        return lo
    if excess(math.log(hi)) > 0:
        raise ValidationError("jump budget exceeded at every cutoff; reduce n or t", "eps")
    return math.exp(optimize.brentq(excess, math.log(lo), math.log(hi), xtol=1e-6))


@dataclass
class IncrementPlan:
    """Everything that is deterministic about a batch: cutoff, rates, drift and bias."""

    t: float
    eps: float
    jump_rate: float
    drift: np.ndarray
    bias_bound: float
    exact: bool = False

    def metadata(self, cfg):
        return {"seed": int(cfg.seed), "blocks": int(cfg.blocks), "n": int(cfg.n), "t": self.t,
                "eps": self.eps, "bias_bound": self.bias_bound, "jump_rate": self.jump_rate,
                "exact": self.exact}

    def cf_bias(self, z):
        """Bound on ``|E exp(i<z,X>) - exp(t C(z))|`` from the small-jump approximation."""
        z = np.atleast_2d(np.asarray(z, dtype=float))
        return 0.5 * np.sum(z * z, axis=1) * self.bias_bound


def plan_increment(law, cfg):
    if not isinstance(law, ID0Law):
        law = ID0Law(law)
    M, t = law.measure, cfg.t
    if isinstance(M, StableMeasure):
        return IncrementPlan(t, 0.0, math.inf, t * law.shift, 0.0, exact=True)
    n_block = _block_sizes(cfg.n, cfg.blocks)[0]
    eps = cfg.eps if cfg.eps is not None else default_eps(M, t, n_block)
    rate = t * float(tail_mass(M, eps))
    if not math.isfinite(rate):
        raise ValidationError(f"infinite jump rate above eps={eps:g}; use a larger eps", "eps")
    big = radial_vector_integral(M, lambda s: s / (1.0 + s * s), eps, math.inf)
    small = radial_vector_integral(M, lambda s: s ** 3 / (1.0 + s * s), 0.0, eps, closed_hi=True)
    drift = t * (law.shift - big + small)
    bias = t * moment(M, 2.0, 0.0, eps, closed_hi=True)
    return IncrementPlan(t, float(eps), rate, drift, float(bias))


def _jump_sampler(M, plan):
    comps = M.components()
    rates = np.array([w * float(rad.tail(plan.eps)) for _, w, rad in comps]) * plan.t
    keep = rates > 0
    comps = [c for c, k in zip(comps, keep) if k]
    rates = rates[keep]
    dirs = np.array([c[0] for c in comps]) if comps else np.zeros((0, M.dim))
    total = float(rates.sum())
    probs = rates / total if total > 0 else rates

    def draw(m, rng):
        out = np.tile(plan.drift, (m, 1))
        if total == 0 or m == 0:
            return out
        counts = rng.poisson(total, size=m)
        njump = int(counts.sum())
        if njump == 0:
            return out
        owner = np.repeat(np.arange(m), counts)
        which = rng.choice(len(comps), size=njump, p=probs) if len(comps) > 1 else np.zeros(njump, int)
        radii = np.empty(njump)
        for j, (_, _, rad) in enumerate(comps):
            sel = which == j
            k = int(sel.sum())
            if k:
                radii[sel] = rad.sample_above(plan.eps, k, rng)
        jumps = radii[:, None] * dirs[which]
        for i in range(M.dim):
            out[:, i] += np.bincount(owner, weights=jumps[:, i], minlength=m)
        return out

    return draw


def sample_increment(law, cfg, return_plan=False):
    """``cfg.n`` draws of ``X_t`` as an ``(n, d)`` array (optionally with the plan)."""
    if not isinstance(law, ID0Law):
        law = ID0Law(law)
    plan = plan_increment(law, cfg)
    M = law.measure
    if plan.exact:
        sigma_t = M.sigma.scaled(cfg.t)

        def draw(m, rng):
            return sample_stable(M.eta, sigma_t, plan.drift, m, rng=rng)
    else:
        draw = _jump_sampler(M, plan)
    x = run_blocks(draw, cfg)
    return (x, plan) if return_plan else x


def sample_tempered_increment(R, params, b, cfg, return_plan=False):
    """Increment of the tempered-stable process with Rosinski measure ``R``."""
    if not isinstance(params, specfun.TemperingParams):
        params = specfun.TemperingParams(*params)
    M = TemperedStableMeasure(params.p, params.alpha, R)
    return sample_increment(ID0Law(M, b), cfg, return_plan)


def eps_for_bias(M, t, target, lo=1e-300):
    """Largest cutoff with ``t int_{|x|<=eps} |x|^2 M(dx) <= target``."""
    sc = _scales(M)

    def f(le):
        return math.log(max(t * moment(M, 2.0, 0.0, math.exp(le), closed_hi=True), 1e-300)) - math.log(target)

    a, b = math.log(min(sc)) - 40.0, math.log(max(sc)) + 10.0
    if f(b) <= 0:
        return math.exp(b)
    if f(a) > 0:
        raise ValidationError("bias target not reachable", "eps")
    return math.exp(optimize.brentq(f, a, b, xtol=1e-8))


def write_samples_csv(path, x):
    """One row per sample: ``sample_id, x_1, ..., x_d`` with round-trip float formatting."""
    x = np.atleast_2d(x)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["sample_id"] + [f"x_{i + 1}" for i in range(x.shape[1])])
        for i, row in enumerate(x):
            w.writerow([i] + [repr(float(v)) for v in row])
