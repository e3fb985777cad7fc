import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from circleskew import Arc, CircleMap, InvalidMap, canon, circle_dist, compose, rotation, sine_map
from circleskew.circle import (IDENTITY, _num, arc_image, deriv_bounds_on_arc, map_eval_deriv,
                               maps_close)

SINE = sine_map(0.0, 1.0 / (4.0 * math.pi))
unit = st.floats(0.0, 1.0, exclude_max=True, allow_nan=False)
amplitudes = st.floats(-0.15, 0.15, allow_nan=False)

MAPS = [
    rotation(0.3),
    SINE,
    sine_map(0.2, -0.1),
    SINE.inverse(),
    compose(rotation(0.25), SINE, sine_map(0.1, 0.05)),
]


@pytest.mark.parametrize("x, y, d", [(0.1, 0.9, 0.2), (0.37, 0.37, 0.0), (0.25, 0.5, 0.25)])
def test_circle_dist_examples(x, y, d):
    assert circle_dist(x, y) == pytest.approx(d, abs=1e-15)


def test_canon_ties_at_one():
    assert canon(1.0) == 0.0
    assert canon(-1e-20) == 0.0
    assert canon(np.array([1.0, 2.5, -0.25])).tolist() == [0.0, 0.5, 0.75]


@given(unit, unit)
def test_circle_dist_symmetric_and_bounded(x, y):
    d = circle_dist(x, y)
    assert d == circle_dist(y, x)
    assert 0.0 <= d <= 0.5


@given(st.floats(-50, 50, allow_nan=False))
def test_canon_range(x):
    assert 0.0 <= canon(x) < 1.0


def test_arc_validation_and_wrap():
    with pytest.raises(ValueError):
        Arc(0.2, 0.0)
    with pytest.raises(ValueError):
        Arc(0.2, 1.5)
    a = Arc(0.9, 0.2)
    assert a.contains(0.05) and a.contains(0.95) and not a.contains(0.5)
    assert a.end == pytest.approx(0.1)
    assert Arc(0.3, 1.0).is_full and Arc(0.3, 1.0).contains(0.1)


@given(unit, st.floats(1e-6, 0.999), unit)
def test_arc_margin_matches_containment(s, length, x):
    a = Arc(s, length)
    m = a.margin(x)
    assert 0.0 <= m <= length / 2 + 1e-12
    if m > 1e-12:
        assert a.contains(x)


def test_map_eval_deriv_examples():
    y, d = map_eval_deriv(rotation(0.3), 0.9)
    assert y == pytest.approx(0.2) and d == 1.0
    assert map_eval_deriv(SINE, 0.5) == pytest.approx((0.5, 0.5), abs=1e-15)
    assert map_eval_deriv(SINE, 0.0) == pytest.approx((0.0, 1.5), abs=1e-15)


def test_amplitude_bound_enforced():
    with pytest.raises(InvalidMap):
        sine_map(0.0, 1.0 / (2.0 * math.pi))
    with pytest.raises(InvalidMap):
        CircleMap.from_dict({"kind": "sine", "amplitude": 0.01, "angle": 0.1})
    with pytest.raises(InvalidMap):
        CircleMap.from_dict({"kind": "spiral"})


def test_arc_image_examples():
    img = arc_image(rotation(0.3), Arc(0.8, 0.3))
    assert img.start == pytest.approx(0.1) and img.length == pytest.approx(0.3)
    a = Arc(0.42, 0.13)
    same = arc_image(IDENTITY, a)
    assert (same.start, same.length) == pytest.approx((a.start, a.length), abs=1e-15)
    img = arc_image(SINE, Arc(0.4, 0.2))
    assert img.start == pytest.approx(SINE(0.4), abs=1e-15)
    assert img.end == pytest.approx(SINE(0.6), abs=1e-15)
    assert img.length < 0.2


@pytest.mark.parametrize("f", MAPS)
def test_full_circle_image_has_length_one(f):
    assert arc_image(f, Arc(0.3, 1.0)).length == 1.0
    assert f.lift(0.3 + 1.0) - f.lift(0.3) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("f", MAPS)
def test_derivative_matches_finite_differences(f):
    x = np.linspace(0.0, 1.0, 10_000, endpoint=False)
    h = 1e-6
    d = f.deriv(x)
    assert np.all(d > 0)
    err = np.abs(f.lift(x + h) - f.lift(x) - d * h)
    # Taylor remainder plus rounding of the lift difference
    assert np.all(err <= 0.5 * f.second_deriv_bound * h * h + 4e-16)


@pytest.mark.parametrize("f", MAPS)
def test_log_derivative_lipschitz_bound(f):
    rng = np.random.default_rng(1)
    x, y = rng.random(5000), rng.random(5000)
    lhs = np.abs(np.log(f.deriv(x)) - np.log(f.deriv(y)))
    assert np.all(lhs <= f.log_deriv_lipschitz * circle_dist(x, y) + 1e-12)


@settings(max_examples=50)
@given(unit, amplitudes, unit)
def test_inverse_round_trip(b, a, x):
    f = sine_map(b, a)
    assert circle_dist(f.inverse()(f(x)), x) < 1e-13
    assert f.inverse().deriv(f(x)) * f.deriv(x) == pytest.approx(1.0, rel=1e-12)


def test_composite_chain_rule():
    g = compose(rotation(0.25), SINE)
    x = 0.17
    assert g(x) == pytest.approx(SINE(canon(x + 0.25)))
    assert g.deriv(x) == pytest.approx(SINE.deriv(x + 0.25))
    assert maps_close(compose(SINE, SINE.inverse()), IDENTITY) < 1e-14


def test_deriv_bounds_on_arc_encloses_samples():
    arc = Arc(0.4, 0.2)
    lo, hi = deriv_bounds_on_arc(SINE, arc, 64)
    d = SINE.deriv(arc.grid(10_001))
    assert lo <= d.min() and d.max() <= hi
    assert hi < 1.0  # f' < 1 on (0.25, 0.75)


def test_number_parsing():
    assert _num("1/(4*pi)") == pytest.approx(1.0 / (4.0 * math.pi))
    assert _num("(sqrt(5) - 1) / 2") == pytest.approx((math.sqrt(5) - 1) / 2)
    with pytest.raises(ValueError):
        _num("__import__('os')")


def test_serialization_round_trip():
    for f in MAPS:
        assert maps_close(CircleMap.from_dict(f.to_dict()), f) == 0.0
