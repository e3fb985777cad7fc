import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from circleskew import PeriodicSeq, Word, periodic_orbit_from_word
from circleskew.measures import (AtomicMeasure, LogDerivativeObservable, TestFunction,
                                 TestFunctionBank, density_report, exponent_continuity_check,
                                 integrate, weak_star_gap)
from circleskew.skew import PeriodicOrbit

points = st.lists(st.floats(0, 1, exclude_max=True), min_size=1, max_size=30)


def measure(xs, word=(1, 2, 2)):
    xs = np.asarray(xs, float)
    return AtomicMeasure(Word(word), np.arange(xs.size), xs)


def test_integrate_examples(seed, fam):
    mu = measure([0.1, 0.4, 0.9])
    assert integrate(mu, lambda s, x: 1.0) == 1.0
    dirac = AtomicMeasure.dirac(PeriodicSeq(Word([1])), 0.0)
    assert integrate(dirac, TestFunction(Word(), 1, "cos")) == 1.0
    assert integrate(AtomicMeasure.from_orbit(seed, fam), LogDerivativeObservable(fam)) == \
        pytest.approx(math.log(0.5), abs=1e-15)


def test_log_derivative_observable_is_the_exponent(demo_run, fam):
    X = demo_run.orbits[1]
    mu = AtomicMeasure.from_orbit(X, fam)
    assert integrate(mu, LogDerivativeObservable(fam)) == pytest.approx(X.exponent, abs=1e-12)


def test_weights_sum_to_one():
    assert measure([0.1, 0.2, 0.3]).weights.sum() == pytest.approx(1.0)
    with pytest.raises(ValueError):
        AtomicMeasure(Word([1]), np.zeros(0, np.int64), np.zeros(0))


@given(points, st.floats(-3, 3), st.floats(-3, 3))
def test_integrate_is_linear_and_monotone(xs, a, b):
    mu = measure(xs)
    f, g = TestFunction(Word([2]), 1, "cos"), TestFunction(Word(), 2, "sin")
    combo = a * f.values(mu) + b * g.values(mu)
    lhs = integrate(mu, lambda s, x: combo)
    assert lhs == pytest.approx(a * integrate(mu, f) + b * integrate(mu, g), abs=1e-12)
    assert integrate(mu, lambda s, x: np.abs(combo)) >= integrate(mu, lambda s, x: combo) - 1e-15


def test_bank_integrals_match_single_functions():
    bank = TestFunctionBank(2, 3, 4)
    assert len(bank) == 15 * 9 == len(bank.functions())
    mu = measure(np.random.default_rng(0).random(40), word=(1, 2, 2, 1, 1))
    direct = [integrate(mu, f) for f in bank.functions()]
    assert bank.integrals(mu) == pytest.approx(direct, abs=1e-14)


def test_weak_star_gap_examples():
    bank = TestFunctionBank(2, 0, 1)
    d0 = AtomicMeasure.dirac(PeriodicSeq(Word([1])), 0.0)
    d5 = AtomicMeasure.dirac(PeriodicSeq(Word([1])), 0.5)
    assert weak_star_gap(d0, d0, bank) == 0.0
    assert weak_star_gap(d0, d5, bank) == pytest.approx(2.0)


@settings(max_examples=40)
@given(points, points, points)
def test_weak_star_gap_is_a_pseudometric(a, b, c):
    bank = TestFunctionBank(2)
    ma, mb, mc = measure(a), measure(b), measure(c)
    assert weak_star_gap(ma, mb, bank) == pytest.approx(weak_star_gap(mb, ma, bank))
    assert weak_star_gap(ma, mc, bank) <= weak_star_gap(ma, mb, bank) + \
        weak_star_gap(mb, mc, bank) + 1e-12


def test_density_examples(seed, fam):
    r = density_report(seed, 1.0, fam)
    assert (r.cells_total, r.cells_hit, r.eta_dense) == (2, 1, False)
    r = density_report(seed, 0.25, fam)
    assert r.cells_hit == 1 and not r.eta_dense
    with pytest.raises(ValueError):
        density_report(seed, 0.0, fam)


def test_density_of_a_mixed_orbit(fam):
    # both first symbols appear, so the coarsest grid is covered
    w = Word([1, 1, 2, 2, 1, 2])
    X = periodic_orbit_from_word(fam, w, 0.10006527491433141, tol=1e-9)
    assert density_report(X, 1.0, fam).eta_dense


@settings(max_examples=30, deadline=None)
@given(st.floats(0.05, 1.5), st.floats(0.05, 1.5))
def test_density_is_monotone_in_eta(demo_run, fam, a, b):
    X = demo_run.orbits[1]
    lo, hi = min(a, b), max(a, b)
    if density_report(X, lo, fam).eta_dense:
        assert density_report(X, hi, fam).eta_dense


def test_exponent_continuity_examples(seed, fam):
    rows, trend = exponent_continuity_check([seed, seed], fam)
    assert rows == [(seed.exponent, 0.0), (seed.exponent, 0.0)]
    with pytest.raises(ValueError):
        exponent_continuity_check([seed], fam)


def test_exponent_continuity_on_demo_run(demo_run, fam):
    rows, trend = exponent_continuity_check(demo_run.orbits, fam)
    assert trend["exponents_increasing"] and trend["gaps_decreasing"]
    assert rows[-1][1] == 0.0
