"""Command-line front end.

Exit status: 0 on success or a passing verdict, 1 on a failing verdict,
2 on usage or validation errors.
"""

import argparse
import json
import re
import sys
from pathlib import Path

import numpy as np

from . import specfun
from .exceptions import LevyError, ValidationError
from .inversion import beta_inversion, log_inversion, rosinski_inversion
from .limits import (sequence_convergence_check, short_time_limit_check, write_limit_csv,
                     write_sequence_csv)
from .measures import Cap, TemperedStableMeasure
from .regvar import estimate_rv_index, prop2_constant_check, write_rv_csv
from .serialization import _read_json, dump_measure, law_from_dict, load_law, load_measure
from .simulate import SimConfig, max_workers, sample_increment, write_samples_csv


def parse_t_grid(spec):
    """``geom:<start>:<stop>:<count>`` to a list of floats."""
    parts = spec.split(":")
    if len(parts) != 4 or parts[0] != "geom":
        raise ValidationError(f"expected geom:<start>:<stop>:<count>, got {spec!r}", "t-grid")
    try:
        a, b, k = float(parts[1]), float(parts[2]), int(parts[3])
    except ValueError:
        raise ValidationError(f"bad number in {spec!r}", "t-grid") from None
    if not (a > 0 and b > 0 and k >= 1):
        raise ValidationError("start and stop must be positive and count at least 1", "t-grid")
    return np.geomspace(a, b, k).tolist()


def load_caps(path):
    data = _read_json(path)
    if not isinstance(data, list):
        raise ValidationError("expected a list of caps", "caps")
    caps = []
    for i, c in enumerate(data):
        if not isinstance(c, dict) or "center" not in c or "half_angle" not in c:
            raise ValidationError("cap needs 'center' and 'half_angle'", f"caps[{i}]")
        caps.append(Cap(c["center"], float(c["half_angle"])))
    return caps


def _sidecar(out):
    p = Path(out)
    side = p.with_suffix(".json")
    return side if side != p else p.with_suffix(".meta.json")


def _write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


def cmd_invert(args):
    M = load_measure(args.measure)
    if args.log:
        out = log_inversion(M)
    elif isinstance(M, TemperedStableMeasure):
        if args.beta is not None and args.beta != M.params.gamma:
            raise ValidationError(f"a tempered-stable measure inverts with beta = gamma = {M.params.gamma:g}",
                                  "beta")
        out = rosinski_inversion(M)
    else:
        if args.beta is None:
            raise ValidationError("--beta is required", "beta")
        out = beta_inversion(M, args.beta)
    dump_measure(out, args.out)
    print(args.out)
    return 0


def cmd_kconst(args):
    v = specfun.k_const(args.eta, alpha=args.alpha, p=args.p)
    print(repr(float(f"{v:.15g}")))
    return 0


def cmd_regvar(args):
    M = load_measure(args.measure)
    caps = load_caps(args.caps) if args.caps else None
    est = estimate_rv_index(M, args.endpoint, caps=caps)
    print(f"endpoint {est.endpoint}")
    print(f"rho_hat {est.rho_hat:.10g}")
    print(f"fit_r2 {est.fit_r2:.10g}")
    for u, w in zip(est.sigma_hat.directions, est.sigma_hat.weights):
        print("sigma_hat " + " ".join(f"{c:.6g}" for c in u) + f" {w:.10g}")
    print(f"regularly_varying {'yes' if est.is_rv else 'no'}")
    if args.out:
        write_rv_csv(args.out, M, est, caps)
    return 0 if est.is_rv else 1


def cmd_simulate(args):
    law = load_law(args.law)
    cfg = SimConfig(t=args.t, n=args.n, eps=args.eps, seed=args.seed, blocks=args.blocks)
    x, plan = sample_increment(law, cfg, return_plan=True)
    write_samples_csv(args.out, x)
    _write_json(_sidecar(args.out), plan.metadata(cfg))
    print(args.out)
    return 0


def cmd_limit_check(args):
    law = load_law(args.law)
    grid = parse_t_grid(args.t_grid)
    cfg = SimConfig(t=1.0, n=args.n, eps=args.eps, seed=args.seed, blocks=args.blocks)
    rep = short_time_limit_check(law, args.eta, None, grid, cfg, mode=args.mode, threshold=args.threshold)
    print("t,b_t,KS,band,verdict")
    for r in rep.rows:
        print(f"{r.t:.6g},{r.norming:.6g},{r.ks:.5f},{r.band:.5f},{'pass' if r.passed else 'fail'}")
    print(f"verdict {'pass' if rep.verdict else 'fail'} (monotone={rep.monotone}, threshold={rep.threshold:.5f})")
    if args.out:
        write_limit_csv(args.out, rep)
        _write_json(_sidecar(args.out), {
            "eta": rep.eta, "mode": rep.mode, "n": rep.n, "seed": args.seed, "blocks": args.blocks,
            "threshold": rep.threshold, "monotone": rep.monotone, "verdict": rep.verdict,
            "rows": [{"t": r.t, "eps": r.eps, "bias_bound": r.bias_bound, "jump_rate": r.jump_rate,
                      "iqr_ratio": r.iqr_ratio} for r in rep.rows]})
    return 0 if rep.verdict else 1


def _natural_key(p):
    return [int(s) if s.isdigit() else s for s in re.split(r"(\d+)", p.name)]


def cmd_seq_check(args):
    d = Path(args.sequence)
    if not d.is_dir():
        raise ValidationError(f"{d} is not a directory", "sequence")
    limit_path = d / "limit.json"
    if not limit_path.exists():
        raise ValidationError("directory needs a limit.json", "sequence")
    files = sorted((p for p in d.glob("*.json") if p.name != "limit.json"), key=_natural_key)
    if not files:
        raise ValidationError("no sequence elements found", "sequence")
    seq = []
    for p in files:
        try:
            seq.append(law_from_dict(_read_json(p)))
        except ValidationError as exc:
            raise ValidationError(exc.msg, f"{p.name}:{exc.field}" if exc.field else p.name) from None
    limit = load_law(limit_path)
    rep = sequence_convergence_check(seq, limit, args.mode, tol=args.tol, gamma=args.gamma)
    for c in rep.criteria.values():
        print(f"{c.name} {'pass' if c.passed else 'fail'} " + " ".join(f"{v:.4g}" for v in c.values))
    if args.out:
        write_sequence_csv(args.out, rep)
    return 0 if rep.passed else 1


def cmd_prop2(args):
    M = load_measure(args.measure)
    rep = prop2_constant_check(M, args.beta, args.rho)
    print("t,small_ball_ratio,inverted_tail_ratio")
    for r in rep.rows:
        print(f"{r.t:.6g},{r.small_ball_ratio:.12g},{r.inverted_tail_ratio:.12g}")
    dev = rep.max_deviation()
    ok = dev <= args.tol
    print(f"constant {rep.constant:.12g} max_deviation {dev:.3e} verdict {'pass' if ok else 'fail'}")
    return 0 if ok else 1


def build_parser():
    ap = argparse.ArgumentParser(prog="levy-invert", description="Inversions and limit diagnostics for Levy measures.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("invert", help="beta- or log-inversion of a measure")
    p.add_argument("--measure", required=True)
    p.add_argument("--beta", type=float)
    p.add_argument("--log", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_invert)

    p = sub.add_parser("kconst", help="the tempering constant K_{eta,alpha,p}")
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--p", type=float, required=True)
    p.set_defaults(func=cmd_kconst)

    p = sub.add_parser("regvar", help="regular-variation index and spherical part")
    p.add_argument("--measure", required=True)
    p.add_argument("--endpoint", choices=["zero", "infinity"], required=True)
    p.add_argument("--caps")
    p.add_argument("--out")
    p.set_defaults(func=cmd_regvar)

    p = sub.add_parser("simulate", help="sample increments X_t")
    p.add_argument("--law", required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--eps", type=float)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--blocks", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("limit-check", help="KS distance of scaled increments to a stable law")
    p.add_argument("--law", required=True)
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--mode", choices=["short", "long"], required=True)
    p.add_argument("--t-grid", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--eps", type=float)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--blocks", type=int, default=1)
    p.add_argument("--threshold", type=float)
    p.add_argument("--out")
    p.set_defaults(func=cmd_limit_check)

    p = sub.add_parser("seq-check", help="convergence criteria for a sequence of measures")
    p.add_argument("--sequence", required=True, help="directory with limit.json and the elements")
    p.add_argument("--mode", choices=["id0", "ts"], required=True)
    p.add_argument("--gamma", type=float)
    p.add_argument("--tol", type=float, default=1e-2)
    p.add_argument("--out")
    p.set_defaults(func=cmd_seq_check)

    p = sub.add_parser("prop2", help="small-ball versus inverted-tail constants")
    p.add_argument("--measure", required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--rho", type=float, required=True)
    p.add_argument("--tol", type=float, default=1e-6)
    p.set_defaults(func=cmd_prop2)
    return ap


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        max_workers(1)
        return args.func(args)
    except LevyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
