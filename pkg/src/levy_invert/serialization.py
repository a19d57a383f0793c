"""JSON specs for measures and laws.

Schema::

    {"kind": "atomic", "atoms": [{"x": [...], "w": ...}, ...]}
    {"kind": "stable", "eta": ..., "sigma": [{"u": [...], "w": ...}, ...]}
    {"kind": "polar", "sigma": [...], "radial": RADIAL}
    {"kind": "tempered", "p": ..., "alpha": ..., "rosinski": MEASURE}
    {"kind": "sum", "parts": [MEASURE, ...]}

    RADIAL = {"kind": "powerlaw", "index": ..., "cutoffs": [lo, hi]}
           | {"kind": "table", "r": [...], "density": [...]}

An infinite upper cutoff is written as ``null``. A law is a measure spec with
an optional ``"shift"`` entry. Errors name the offending field, for example
``rosinski.atoms[2].w``.
"""

import json
import math

import numpy as np

from .exceptions import LevyError, ValidationError
from .measures import (AtomicMeasure, ID0Law, PolarMeasure, SphericalMeasure, StableMeasure,
                       SumMeasure, TemperedStableMeasure)
from .radial import PowerLaw, Table


def _join(path, field):
    if not path:
        return field
    if field.startswith("["):
        return path + field
    return f"{path}.{field}"


def _require(d, key, path):
    if not isinstance(d, dict):
        raise ValidationError("expected an object", path or "<root>")
    if key not in d:
        raise ValidationError("missing field", _join(path, key))
    return d[key]


def _number(v, path):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ValidationError("expected a number", path)
    return float(v)


def _vector(v, path):
    if not isinstance(v, list) or not v:
        raise ValidationError("expected a non-empty list of numbers", path)
    return [_number(c, f"{path}[{i}]") for i, c in enumerate(v)]


def _list(v, path):
    if not isinstance(v, list):
        raise ValidationError("expected a list", path)
    return v


def _reraise(path):
    """Wrap a constructor call so that its field errors are prefixed with ``path``."""
    class _Ctx:
        def __enter__(self):
            return self

        def __exit__(self, et, ev, tb):
            if isinstance(ev, ValidationError):
                field = _join(path, ev.field) if ev.field else (path or None)
                raise ValidationError(ev.msg, field) from None
            return False
    return _Ctx()


def _sigma_from(v, path):
    items = _list(v, path)
    if not items:
        raise ValidationError("spherical measure needs at least one atom", path)
    dirs, ws = [], []
    for i, it in enumerate(items):
        p = f"{path}[{i}]"
        dirs.append(_vector(_require(it, "u", p), _join(p, "u")))
        w = _number(_require(it, "w", p), _join(p, "w"))
        if not (w > 0 and math.isfinite(w)):
            raise ValidationError("weight must be positive and finite", _join(p, "w"))
        ws.append(w)
    if len({len(d) for d in dirs}) != 1:
        raise ValidationError("all directions must have the same dimension", path)
    with _reraise(path):
        return SphericalMeasure(dirs, ws)


def _radial_from(v, path):
    kind = _require(v, "kind", path)
    if kind == "powerlaw":
        index = _number(_require(v, "index", path), _join(path, "index"))
        cut = v.get("cutoffs", [0.0, None])
        cut = _list(cut, _join(path, "cutoffs"))
        if len(cut) != 2:
            raise ValidationError("cutoffs must be [lo, hi]", _join(path, "cutoffs"))
        lo = 0.0 if cut[0] is None else _number(cut[0], _join(path, "cutoffs[0]"))
        hi = math.inf if cut[1] is None else _number(cut[1], _join(path, "cutoffs[1]"))
        with _reraise(_join(path, "cutoffs")):
            return PowerLaw(index, lo, hi)
    if kind == "table":
        r = _vector(_require(v, "r", path), _join(path, "r"))
        d = _vector(_require(v, "density", path), _join(path, "density"))
        with _reraise(path):
            return Table(r, d)
    raise ValidationError(f"unknown radial kind {kind!r}", _join(path, "kind"))


def measure_from_dict(spec, path="", allow_tempered=True):
    """Build a measure from a parsed JSON spec."""
    kind = _require(spec, "kind", path)
    if kind == "atomic":
        atoms = _list(_require(spec, "atoms", path), _join(path, "atoms"))
        pts, ws = [], []
        for i, a in enumerate(atoms):
            p = _join(path, f"atoms[{i}]")
            x = _vector(_require(a, "x", p), _join(p, "x"))
            w = _number(_require(a, "w", p), _join(p, "w"))
            if not (w > 0 and math.isfinite(w)):
                raise ValidationError("weight must be positive and finite", _join(p, "w"))
            if not any(c != 0 for c in x):
                raise ValidationError("atom at the origin is not allowed", _join(p, "x"))
            if pts and len(x) != len(pts[0]):
                raise ValidationError(f"dimension {len(x)} differs from {len(pts[0])}", _join(p, "x"))
            pts.append(x)
            ws.append(w)
        dim = spec.get("dim")
        if not atoms and dim is None:
            raise ValidationError("empty atom list needs 'dim'", _join(path, "dim"))
        with _reraise(path):
            return AtomicMeasure(pts, ws, dim)
    if kind == "stable":
        eta = _number(_require(spec, "eta", path), _join(path, "eta"))
        sigma = _sigma_from(_require(spec, "sigma", path), _join(path, "sigma"))
        with _reraise(path):
            return StableMeasure(eta, sigma)
    if kind == "polar":
        sigma = _sigma_from(_require(spec, "sigma", path), _join(path, "sigma"))
        radial = _radial_from(_require(spec, "radial", path), _join(path, "radial"))
        with _reraise(path):
            return PolarMeasure(sigma, radial)
    if kind == "tempered":
        if not allow_tempered:
            raise ValidationError("a Rosinski measure cannot itself be tempered", _join(path, "kind"))
        p = _number(_require(spec, "p", path), _join(path, "p"))
        alpha = _number(_require(spec, "alpha", path), _join(path, "alpha"))
        R = measure_from_dict(_require(spec, "rosinski", path), _join(path, "rosinski"), allow_tempered=False)
        with _reraise(path):
            return TemperedStableMeasure(p, alpha, R)
    if kind == "sum":
        parts = _list(_require(spec, "parts", path), _join(path, "parts"))
        built = [measure_from_dict(s, _join(path, f"parts[{i}]"), allow_tempered) for i, s in enumerate(parts)]
        with _reraise(path):
            return SumMeasure(built)
    raise ValidationError(f"unknown measure kind {kind!r}", _join(path, "kind"))


def _num_out(v):
    v = float(v)
    return None if math.isinf(v) else v


def _sigma_to(sigma):
    return [{"u": u.tolist(), "w": float(w)} for u, w in zip(sigma.directions, sigma.weights)]


def _radial_to(rad):
    if isinstance(rad, PowerLaw):
        return {"kind": "powerlaw", "index": rad.index, "cutoffs": [rad.lo, _num_out(rad.hi)]}
    if isinstance(rad, Table):
        return {"kind": "table", "r": rad.r.tolist(), "density": rad.d.tolist()}
    raise ValidationError(f"radial profile {rad!r} has no JSON form")


def measure_to_dict(M):
    if isinstance(M, AtomicMeasure):
        out = {"kind": "atomic", "atoms": [{"x": x.tolist(), "w": float(w)} for x, w in zip(M.points, M.weights)]}
        if not M.weights.size:
            out["dim"] = M.dim
        return out
    if isinstance(M, StableMeasure):
        return {"kind": "stable", "eta": M.eta, "sigma": _sigma_to(M.sigma)}
    if isinstance(M, PolarMeasure):
        return {"kind": "polar", "sigma": _sigma_to(M.sigma), "radial": _radial_to(M.radial)}
    if isinstance(M, TemperedStableMeasure):
        return {"kind": "tempered", "p": M.p, "alpha": M.alpha, "rosinski": measure_to_dict(M.rosinski)}
    if isinstance(M, SumMeasure):
        return {"kind": "sum", "parts": [measure_to_dict(p) for p in M.parts]}
    raise ValidationError(f"cannot serialize {type(M).__name__}")


def law_from_dict(spec):
    """A measure spec plus optional ``"shift"`` (defaults to zero)."""
    M = measure_from_dict(spec)
    shift = spec.get("shift")
    if shift is not None:
        shift = _vector(shift, "shift")
        if len(shift) != M.dim:
            raise ValidationError(f"shift must have length {M.dim}", "shift")
    return ID0Law(M, shift)


def law_to_dict(law):
    out = measure_to_dict(law.measure)
    out["shift"] = law.shift.tolist()
    return out


def _read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}",
                              str(path)) from None
    except OSError as exc:
        raise LevyError(f"cannot read {path}: {exc.strerror}") from None


def load_measure(path):
    return measure_from_dict(_read_json(path))


def load_law(path):
    return law_from_dict(_read_json(path))


def dump_measure(M, path):
    with open(path, "w") as fh:
        json.dump(measure_to_dict(M), fh, indent=2)
        fh.write("\n")


def measures_equal(A, B, atol=1e-12):
    """Structural equality up to ``atol`` on atom locations and relative ``atol`` on weights."""
    return _specs_close(measure_to_dict(A), measure_to_dict(B), atol)


def _specs_close(a, b, atol):
    if isinstance(a, dict):
        return (isinstance(b, dict) and a.keys() == b.keys()
                and all(_specs_close(a[k], b[k], atol) for k in a))
    if isinstance(a, list):
        return isinstance(b, list) and len(a) == len(b) and all(_specs_close(x, y, atol) for x, y in zip(a, b))
    if isinstance(a, float) and isinstance(b, (int, float)):
        return bool(np.isclose(a, b, rtol=atol, atol=atol))
    return a == b
