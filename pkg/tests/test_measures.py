import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from levy_invert import (AtomicMeasure, Cap, ID0Law, PolarMeasure, SphericalMeasure, StableMeasure,
                         SumMeasure, TemperedStableMeasure, char_exponent, integrate, moment,
                         moment_class_check, tail_mass)
from levy_invert.exceptions import DivergenceError, MomentClassError, ValidationError
from levy_invert.measures import levy_check, rosinski_to_levy
from levy_invert.radial import PowerLaw, Table
from levy_invert.specfun import g_tail, k_const

E1 = SphericalMeasure([[1.0, 0.0]], [1.0])


def test_atomic_tail():
    M = AtomicMeasure([[2.0, 0.0]], [3.0])
    assert tail_mass(M, 1.0) == 3.0
    assert tail_mass(M, 2.0) == 0.0


def test_stable_tail_closed_form():
    M = StableMeasure(1.2, E1)
    assert tail_mass(M, 2.0) == pytest.approx(2 ** -1.2 / 1.2, rel=1e-14)


def test_tempered_tail_is_g():
    M = TemperedStableMeasure(1.0, 0.5, AtomicMeasure([[1.0, 0.0]], [1.0]))
    for s in (0.01, 0.3, 1.0, 4.0):
        # G_{0.5,1}(s) from the closed-form special-function route
        assert tail_mass(M, s) == pytest.approx(g_tail(s, alpha=0.5, p=1.0), rel=1e-9)


def test_tempered_tail_cone():
    R = AtomicMeasure([[1.0, 0.0], [0.0, 2.0]], [1.0, 1.0])
    M = TemperedStableMeasure(1.0, 0.5, R)
    right = tail_mass(M, 0.5, Cap([1.0, 0.0], 0.1))
    assert right == pytest.approx(g_tail(0.5, alpha=0.5, p=1.0), rel=1e-9)


def test_negative_alpha_total_mass():
    R = AtomicMeasure([[1.0], [-3.0]], [0.5, 2.0])
    M = rosinski_to_levy(R, 1.0, -0.5)
    assert tail_mass(M, 1e-300) == pytest.approx(2.5 * math.gamma(0.5), rel=1e-9)


def test_positive_alpha_tail_blows_up():
    M = rosinski_to_levy(AtomicMeasure([[1.0]], [1.0]), 1.0, 0.5)
    t = tail_mass(M, np.array([1e-2, 1e-4, 1e-6]))
    assert np.all(np.diff(t) > 0) and t[-1] > 1e2


def test_rosinski_of_stable_reproduces_stable_tails():
    eta, a, p = 1.3, 0.5, 1.0
    sig = SphericalMeasure([[1.0], [-1.0]], [0.7, 0.3])
    R = StableMeasure(eta, sig.scaled(1.0 / k_const(eta, alpha=a, p=p)))
    M = TemperedStableMeasure(p, a, R)
    for r in (0.1, 1.0, 5.0):
        assert tail_mass(M, r) == pytest.approx(tail_mass(StableMeasure(eta, sig), r), rel=1e-7)


def test_tempered_rejects_bad_rosinski():
    with pytest.raises(MomentClassError):
        TemperedStableMeasure(1.0, 0.8, StableMeasure(0.5, E1))


def test_integrate_examples():
    M = AtomicMeasure([[1.0, 0.0]], [2.0])
    assert integrate(M, lambda x: np.ones(len(x)), (0.5, 2.0)) == 2.0
    S = StableMeasure(1.0, E1)
    assert integrate(S, lambda x: np.sum(x * x, axis=1), (0.0, 1.0)) == pytest.approx(1.0, rel=1e-9)
    with pytest.raises(DivergenceError):
        integrate(S, lambda x: np.ones(len(x)), (0.0, 1.0))


def test_integrate_rejects_bad_annulus():
    with pytest.raises(ValidationError):
        integrate(StableMeasure(1.0, E1), lambda x: x[:, 0], (2.0, 1.0))


def test_moment_class():
    assert moment_class_check(AtomicMeasure([[5.0]], [1.0]), 2.0).member
    S = StableMeasure(1.5, E1)
    assert moment_class_check(S, 1.0).member
    rep = moment_class_check(S, 1.5)
    assert not rep.member and rep.tail_integral == math.inf
    assert "1.5" in rep.failing_integral()
    assert moment_class_check(StableMeasure(0.5, E1), 0.0).member


@pytest.mark.parametrize("eta", [0.4, 1.1, 1.7])
def test_moment_class_monotone_in_beta(eta):
    S = StableMeasure(eta, E1)
    flags = [moment_class_check(S, b).member for b in np.linspace(0, 2, 21)]
    # once false, stays false
    assert flags == sorted(flags, reverse=True)


def test_char_exponent_atomic():
    law = ID0Law(AtomicMeasure([[1.0, 0.0]], [2.0]))
    c = char_exponent(law, [math.pi, 0.0])
    assert c == pytest.approx(-4 - 1j * math.pi, abs=1e-14)
    assert char_exponent(law, [0.0, 0.0]) == 0


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.floats(-50, 50), st.floats(1e-3, 10)), min_size=1, max_size=8),
       st.floats(-20, 20))
def test_char_exponent_hermitian(atoms, z):
    pts = [[x] for x, _ in atoms if abs(x) > 1e-9]
    if not pts:
        return
    ws = [w for x, w in atoms if abs(x) > 1e-9]
    law = ID0Law(AtomicMeasure(pts, ws), [0.3])
    assert char_exponent(law, [-z]) == pytest.approx(np.conj(char_exponent(law, [z])), abs=1e-12)


def test_symmetric_stable_exponent_is_real():
    law = ID0Law(StableMeasure(1.3, SphericalMeasure([[1.0], [-1.0]], [1.0, 1.0])))
    for z in (0.2, 1.0, 7.0):
        assert abs(char_exponent(law, [z]).imag) < 1e-9


def test_stable_exponent_one_dim_closed_form():
    # C(z) = -w |z|^eta Gamma(-eta)... compare |Re| with w Gamma(1-eta)/eta cos(pi eta/2) |z|^eta
    eta, w = 0.7, 1.0
    law = ID0Law(StableMeasure(eta, SphericalMeasure([[1.0], [-1.0]], [w, w])))
    expected = -2 * w * math.gamma(1 - eta) / eta * math.cos(math.pi * eta / 2) * 2.0 ** eta
    assert char_exponent(law, [2.0]).real == pytest.approx(expected, rel=1e-8)


def test_tail_mass_nonincreasing():
    ms = [StableMeasure(0.9, E1),
          PolarMeasure(E1, Table([0.1, 1.0, 10.0], [5.0, 1.0, 0.2])),
          TemperedStableMeasure(2.0, -0.5, AtomicMeasure([[1.0, 1.0]], [1.0]))]
    r = np.geomspace(1e-3, 1e2, 60)
    for M in ms:
        assert np.all(np.diff(tail_mass(M, r)) <= 1e-15)


def test_sum_measure_adds():
    A = AtomicMeasure([[2.0, 0.0]], [1.0])
    S = StableMeasure(1.0, E1)
    M = SumMeasure([A, S])
    assert tail_mass(M, 1.0) == pytest.approx(1.0 + 1.0)


def test_polar_powerlaw_moment():
    M = PolarMeasure(E1, PowerLaw(0.5, 0.0, 4.0))
    # int_0^4 s^2 s^-1.5 ds = 4^1.5 / 1.5
    assert moment(M, 2.0) == pytest.approx(8 / 1.5)


def test_validation_errors():
    with pytest.raises(ValidationError):
        AtomicMeasure([[0.0, 0.0]], [1.0])
    with pytest.raises(ValidationError):
        AtomicMeasure([[1.0]], [-1.0])
    with pytest.raises(ValidationError):
        StableMeasure(2.0, E1)
    with pytest.raises(ValidationError):
        tail_mass(StableMeasure(1.0, E1), 0.0)


def test_levy_check():
    assert levy_check(StableMeasure(1.5, E1)).member
    with pytest.raises(MomentClassError):
        levy_check(PolarMeasure(E1, PowerLaw(2.5, 0.0, 1.0)))
