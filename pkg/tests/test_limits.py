import math

import numpy as np
import pytest

from levy_invert import AtomicMeasure, ID0Law, PolarMeasure, SphericalMeasure, StableMeasure, TemperedStableMeasure
from levy_invert.exceptions import UnsupportedError, ValidationError
from levy_invert.inversion import beta_inversion, kappa_ratio
from levy_invert.limits import (centering, inversion_correspondence_check, long_time_norming,
                                sequence_convergence_check, short_time_limit_check,
                                short_time_scaling_from_long, tail_norming, write_limit_csv,
                                write_sequence_csv)
from levy_invert.radial import PowerLaw
from levy_invert.simulate import SimConfig
from levy_invert.specfun import TemperingParams
from levy_invert.stable import symmetric_sigma

SKEW = SphericalMeasure([[1.0], [-1.0]], [1.0, 0.25])


def slope(f, a, b):
    return (math.log(f(b)) - math.log(f(a))) / (math.log(b) - math.log(a))


def test_stable_long_time_norming():
    eta, s = 1.2, 1.25
    a, zeta = long_time_norming(StableMeasure(eta, SKEW), eta)
    for t in (1.0, 1e3, 1e6):
        assert a(t) == pytest.approx((s / eta) ** (-1 / eta) * t ** (-1 / eta), rel=1e-12)
    assert slope(a, 1e3, 1e6) == pytest.approx(-1 / eta, abs=1e-10)


def test_bounded_support_rejected():
    with pytest.raises(ValidationError, match="unbounded"):
        long_time_norming(AtomicMeasure([[1.0]], [1.0]), 1.0)


def test_wrong_index_rejected():
    with pytest.raises(ValidationError, match="regularly varying"):
        long_time_norming(StableMeasure(1.2, SKEW), 0.8)


def test_eta_one_asymmetric_unsupported():
    with pytest.raises(UnsupportedError):
        long_time_norming(StableMeasure(1.0, SKEW), 1.0)
    long_time_norming(StableMeasure(1.0, symmetric_sigma()), 1.0)


def test_centering_gives_zero_drift():
    # c (X_t - zeta) must have the exponent of the pushed measure with zero shift
    from levy_invert import char_exponent
    M = PolarMeasure(SKEW, PowerLaw(1.3, 0.0, 50.0))
    law = ID0Law(M, [0.4])
    t, c = 2.0, 0.3
    zeta = centering(law, t, c)
    z = np.array([[0.7], [-1.9]])
    lhs = t * char_exponent(law, c * z) - 1j * (c * z @ zeta)
    scaled = ID0Law(PolarMeasure(SKEW.scaled(t * c ** 1.3), PowerLaw(1.3, 0.0, 50.0 * c)))
    np.testing.assert_allclose(lhs, char_exponent(scaled, z), rtol=1e-8, atol=1e-10)


def test_scaling_functions_stable():
    eta = 1.2
    M = StableMeasure(eta, symmetric_sigma(0.5))
    a, zeta = long_time_norming(M, eta)
    sc = short_time_scaling_from_long(a, eta)
    for t in (10.0, 1e3, 1e5):
        assert sc.h_inv(sc.h(t)) == pytest.approx(t, rel=1e-9)
    assert slope(sc.b, 1e-6, 1e-2) == pytest.approx(-1 / (2 - eta), abs=0.01)
    # b_t = t^{-1/(2-eta)} (eta/s)^{1/(2-eta)} by the composition of power laws
    assert sc.b(1e-3) == pytest.approx(1e-3 ** (-1 / (2 - eta)) * eta ** (1 / (2 - eta)), rel=1e-9)


def test_ts_scaling_uses_kappa_verbatim():
    eta, params = 1.3, TemperingParams(1.0, 0.5)
    M = StableMeasure(eta, symmetric_sigma(0.5))
    a, _ = long_time_norming(M, eta)
    ts = short_time_scaling_from_long(a, eta, "ts", params)
    kappa = kappa_ratio(eta, params)
    assert ts.kappa == kappa
    # same h with the plain exponent 2 + gamma and no kappa
    h_exp = 2.0 + params.gamma
    for t in (1e-4, 1e-2):
        plain = (ts.h_inv(1 / t) / t) ** (1 / h_exp)
        assert ts.b(t) / plain == pytest.approx(kappa ** (-1 / eta), rel=1e-14)
    assert slope(ts.b, 1e-6, 1e-2) == pytest.approx(-1 / (2 + 0.5 - eta), abs=0.01)


def test_non_monotone_h_rejected():
    with pytest.raises(ValidationError, match="increasing"):
        short_time_scaling_from_long(lambda t: np.ones_like(t) * 1.0, 1.0, grid=np.geomspace(1, 10, 5))


def test_stable_short_time_check_within_band():
    law = ID0Law(StableMeasure(1.3, SKEW))
    rep = short_time_limit_check(law, 1.3, None, [1e-1, 1e-2, 1e-3], SimConfig(1.0, 5000, seed=1))
    assert all(r.ks <= 1.36 / math.sqrt(5000) for r in rep.rows)
    assert rep.verdict


def test_wrong_eta_fails():
    M = TemperedStableMeasure(1.0, 0.8, AtomicMeasure([[1.0], [-1.0]], [1.0, 1.0]))
    rep = short_time_limit_check(M, 1.0, None, [1e-1, 1e-2, 1e-3], SimConfig(1.0, 10000, seed=3))
    assert not rep.verdict


def test_correspondence_stable():
    M = StableMeasure(1.2, symmetric_sigma(0.5))
    rep = inversion_correspondence_check(M, 1.2, 1e-3, 1e3, SimConfig(1.0, 5000, seed=1))
    assert rep.passed
    assert rep.b_ratio == pytest.approx(1.0, rel=1e-9)


def test_correspondence_tempered():
    M = TemperedStableMeasure(1.0, 0.5, StableMeasure(1.3, symmetric_sigma(0.5)))
    rep = inversion_correspondence_check(M, 1.3, 1e-3, 1e3, SimConfig(1.0, 5000, seed=2))
    assert rep.passed
    assert rep.scaling.mode == "ts"
    assert rep.b_ratio == pytest.approx(1.0, rel=1e-9)


def test_limit_csv(tmp_path):
    rep = short_time_limit_check(StableMeasure(1.5, SKEW), 1.5, None, [1e-2], SimConfig(1.0, 200, seed=0))
    p = tmp_path / "l.csv"
    write_limit_csv(p, rep)
    assert p.read_text().splitlines()[0] == "t,b_t,KS,band,verdict"


def truncated(eta, ns, sig=symmetric_sigma(0.5)):
    return [PolarMeasure(sig, PowerLaw(eta, 1 / n, n)) for n in ns]


NS = np.geomspace(10, 1e6, 12)


def test_truncated_stable_sequence_passes():
    rep = sequence_convergence_check(truncated(1.2, NS), StableMeasure(1.2, symmetric_sigma(0.5)))
    assert rep.passed


def test_escaping_atom_fails_only_tail():
    seq = [AtomicMeasure([[n]], [1.0]) for n in NS]
    rep = sequence_convergence_check(seq, AtomicMeasure(np.zeros((0, 1)), [], dim=1))
    assert rep.verdicts() == {"vague": True, "shift": True, "small_ball": True, "tail": False}


def test_shift_criterion():
    seq = [ID0Law(AtomicMeasure([[1.0]], [1.0]), [1.0 + 1 / n]) for n in NS]
    good = sequence_convergence_check(seq, ID0Law(AtomicMeasure([[1.0]], [1.0]), [1.0]))
    bad = sequence_convergence_check(seq, ID0Law(AtomicMeasure([[1.0]], [1.0]), [0.0]))
    assert good.criteria["shift"].passed and not bad.criteria["shift"].passed


def test_modes_are_independent():
    # plain tail n^-0.6 -> 0 but |x|^0.8-weighted tail n^0.2 grows
    seq = [AtomicMeasure([[1.0], [n]], [1.0, n ** -0.6]) for n in NS]
    limit = AtomicMeasure([[1.0]], [1.0])
    id0 = sequence_convergence_check(seq, limit, "id0")
    ts = sequence_convergence_check(seq, limit, "ts", gamma=0.8)
    assert id0.criteria["tail"].passed and not ts.criteria["tail"].passed
    assert id0.criteria["small_ball"].values == ts.criteria["small_ball"].values


def test_ts_mode_unwraps_tempered():
    R = [AtomicMeasure([[1.0]], [1.0 + 1 / n]) for n in NS]
    seq = [TemperedStableMeasure(1.0, 0.5, r) for r in R]
    rep = sequence_convergence_check(seq, TemperedStableMeasure(1.0, 0.5, AtomicMeasure([[1.0]], [1.0])), "ts")
    assert rep.passed


def test_vague_transport_under_inversion():
    seq = truncated(1.2, NS)
    limit = StableMeasure(1.2, symmetric_sigma(0.5))
    inv = [beta_inversion(m, 0.5) for m in seq]
    a = sequence_convergence_check(seq, limit).criteria["vague"].passed
    b = sequence_convergence_check(inv, beta_inversion(limit, 0.5)).criteria["vague"].passed
    assert a == b


def test_sequence_csv(tmp_path):
    rep = sequence_convergence_check([AtomicMeasure([[2.0]], [1.0])], AtomicMeasure([[2.0]], [1.0]))
    p = tmp_path / "s.csv"
    write_sequence_csv(p, rep)
    rows = p.read_text().splitlines()
    assert rows[0] == "criterion,grid_point,value,verdict" and len(rows) == 1 + 12 + 1 + 4 + 4


def test_tail_norming_level():
    M = StableMeasure(0.7, SKEW)
    c = tail_norming(M, 5.0, 2.0)
    assert 5.0 * 1.25 * c ** 0.7 / 0.7 == pytest.approx(2.0, rel=1e-12)
