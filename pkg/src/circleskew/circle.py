"""Circle arithmetic, arcs and closed-form circle diffeomorphisms.

Points of S^1 = R/Z are plain floats kept in [0, 1).  Every map is a
composition of *primitive steps*

    kind 0:  x -> x + b + a sin(2 pi x)          (rotation when a == 0)
    kind 1:  the inverse of a kind-0 step

so values and derivatives are exact closed forms, the inverse step being
solved by Newton iteration to machine precision.
"""
from __future__ import annotations

import ast
import math
import operator
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InvalidMap

TWO_PI = 2.0 * math.pi

FORWARD = 0
INVERSE = 1


def canon(x):
    """Canonical representative of x in [0, 1); 1.0 after rounding maps to 0.0."""
    if isinstance(x, np.ndarray):
        y = x - np.floor(x)
        y[y >= 1.0] = 0.0
        return y
    y = x - math.floor(x)
    return 0.0 if y >= 1.0 else y


def circle_dist(x, y):
    """Arc-length distance on R/Z, a value in [0, 0.5]."""
    d = abs(canon(x) - canon(y))
    if isinstance(d, np.ndarray):
        return np.minimum(d, 1.0 - d)
    return min(d, 1.0 - d)


@dataclass(frozen=True)
class Arc:
    """The closed arc [start, start + length] of S^1; length 1 is the full circle."""

    start: float
    length: float

    def __post_init__(self):
        if not (0.0 < self.length <= 1.0):
            raise ValueError(f"arc length must lie in (0, 1], got {self.length!r}")
        object.__setattr__(self, "start", canon(float(self.start)))

    @classmethod
    def centered(cls, center: float, length: float) -> "Arc":
        return cls(center - 0.5 * length, length)

    @property
    def end(self) -> float:
        return canon(self.start + self.length)

    @property
    def midpoint(self) -> float:
        return canon(self.start + 0.5 * self.length)

    @property
    def is_full(self) -> bool:
        return self.length >= 1.0

    def offset(self, x):
        """Position of x measured forward from the arc start, in [0, 1)."""
        return canon(np.asarray(x, dtype=float) - self.start) if isinstance(x, np.ndarray) \
            else canon(x - self.start)

    def contains(self, x, slack: float = 0.0):
        if self.is_full:
            return np.ones(np.shape(x), bool) if isinstance(x, np.ndarray) else True
        t = self.offset(x)
        if isinstance(t, np.ndarray):
            return (t <= self.length + slack) | (t >= 1.0 - slack)
        return t <= self.length + slack or t >= 1.0 - slack

    def margin(self, x):
        """Distance from x to the complement of the arc (0 outside it).

        The full circle reports 0.5, so that twice the margin is its length.
        """
        if self.is_full:
            return np.full(np.shape(x), 0.5) if isinstance(x, np.ndarray) else 0.5
        t = self.offset(x)
        if isinstance(t, np.ndarray):
            m = np.minimum(t, self.length - t)
            m[t > self.length] = 0.0
            return m
        return min(t, self.length - t) if t <= self.length else 0.0

    def contains_arc(self, other: "Arc", slack: float = 0.0) -> bool:
        if self.is_full:
            return True
        if other.is_full:
            return False
        t = self.offset(other.start)
        if t > 1.0 - slack:
            t -= 1.0
        return t >= -slack and t + other.length <= self.length + slack

    def grid(self, n: int) -> np.ndarray:
        """n points spread evenly over the arc, endpoints included."""
        if n == 1:
            return np.array([self.midpoint])
        return canon(self.start + self.length * np.linspace(0.0, 1.0, n))

    def to_dict(self) -> dict:
        return {"start": self.start, "length": self.length}

    @classmethod
    def from_dict(cls, d) -> "Arc":
        return cls(float(d["start"]), float(d["length"]))


def _prim_lift(kind, b, a, x):
    if kind == FORWARD:
        if isinstance(x, np.ndarray):
            return x + b + a * np.sin(TWO_PI * x)
        return x + b + a * math.sin(TWO_PI * x)
    # inverse step: solve t + b + a sin(2 pi t) = x
    t = x - b
    sin, cos = (np.sin, np.cos) if isinstance(x, np.ndarray) else (math.sin, math.cos)
    for _ in range(60):
        step = (t + b + a * sin(TWO_PI * t) - x) / (1.0 + TWO_PI * a * cos(TWO_PI * t))
        t = t - step
        if np.max(np.abs(step)) < 1e-17:
            break
    return t


def _prim_deriv(kind, b, a, x):
    cos = np.cos if isinstance(x, np.ndarray) else math.cos
    if kind == FORWARD:
        return 1.0 + TWO_PI * a * cos(TWO_PI * x)
    t = _prim_lift(kind, b, a, x)
    return 1.0 / (1.0 + TWO_PI * a * cos(TWO_PI * t))


def _prim_bounds(kind, a):
    """(inf f', sup f', Lip of log f', sup |f''|) for one primitive step."""
    eps = TWO_PI * abs(a)
    lip_fwd = TWO_PI * eps / math.sqrt(1.0 - eps * eps)
    if kind == FORWARD:
        return 1.0 - eps, 1.0 + eps, lip_fwd, TWO_PI * eps
    return 1.0 / (1.0 + eps), 1.0 / (1.0 - eps), lip_fwd / (1.0 - eps), \
        TWO_PI * eps / (1.0 - eps) ** 3


@dataclass(frozen=True)
class CircleMap:
    """An orientation-preserving circle diffeomorphism with exact derivative.

    Build instances with :func:`rotation`, :func:`sine_map` and :func:`compose`.
    ``kind`` is one of ``"rotation"``, ``"sine"``, ``"inverse_sine"`` and
    ``"composite"``; composite parts are applied first to last.
    """

    kind: str
    angle: float = 0.0
    amplitude: float = 0.0
    parts: tuple = ()
    prims: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.kind in ("rotation", "sine", "inverse_sine"):
            if self.kind == "rotation" and self.amplitude != 0.0:
                raise InvalidMap("rotation carries no amplitude")
            if abs(TWO_PI * self.amplitude) >= 1.0:
                raise InvalidMap(
                    f"|2 pi amplitude| = {abs(TWO_PI * self.amplitude):.6g} >= 1: "
                    "not a diffeomorphism")
            k = INVERSE if self.kind == "inverse_sine" else FORWARD
            prims = ((k, float(self.angle), float(self.amplitude)),)
        elif self.kind == "composite":
            if not self.parts:
                raise InvalidMap("empty composite")
            prims = tuple(p for part in self.parts for p in part.prims)
        else:
            raise InvalidMap(f"unknown map kind {self.kind!r}")
        object.__setattr__(self, "prims", prims)

    # evaluation -----------------------------------------------------------
    def lift(self, x):
        """Evaluate the canonical lift R -> R (no reduction mod 1)."""
        for kind, b, a in self.prims:
            x = _prim_lift(kind, b, a, x)
        return x

    def __call__(self, x):
        return canon(self.lift(x))

    def deriv(self, x):
        d = 1.0
        for kind, b, a in self.prims:
            d = d * _prim_deriv(kind, b, a, x)
            x = _prim_lift(kind, b, a, x)
        return d

    def eval_deriv(self, x):
        d = 1.0
        for kind, b, a in self.prims:
            d = d * _prim_deriv(kind, b, a, x)
            x = _prim_lift(kind, b, a, x)
        return canon(x), d

    # analytic bounds --------------------------------------------------------
    @property
    def sup_deriv(self) -> float:
        return math.prod(_prim_bounds(k, a)[1] for k, _, a in self.prims)

    @property
    def inf_deriv(self) -> float:
        return math.prod(_prim_bounds(k, a)[0] for k, _, a in self.prims)

    @property
    def log_deriv_lipschitz(self) -> float:
        """Lipschitz constant of x -> log f'(x) with respect to circle distance."""
        total, scale = 0.0, 1.0
        for k, _, a in self.prims:
            _, hi, lip, _ = _prim_bounds(k, a)
            total += lip * scale
            scale *= hi
        return total

    @property
    def second_deriv_bound(self) -> float:
        s1, s2 = 1.0, 0.0
        for k, _, a in self.prims:
            _, hi, _, d2 = _prim_bounds(k, a)
            s1, s2 = hi * s1, d2 * s1 * s1 + hi * s2
        return s2

    def inverse(self) -> "CircleMap":
        if self.kind == "rotation":
            return rotation(-self.angle)
        if self.kind == "sine":
            return CircleMap("inverse_sine", self.angle, self.amplitude)
        if self.kind == "inverse_sine":
            return sine_map(self.angle, self.amplitude)
        return CircleMap("composite", parts=tuple(p.inverse() for p in reversed(self.parts)))

    # serialization ------------------------------------------------------------
    def to_dict(self) -> dict:
        if self.kind == "composite":
            return {"kind": "composite", "parts": [p.to_dict() for p in self.parts]}
        if self.kind == "rotation":
            return {"kind": "rotation", "angle": self.angle}
        return {"kind": self.kind, "base_angle": self.angle, "amplitude": self.amplitude}

    @classmethod
    def from_dict(cls, d) -> "CircleMap":
        kind = d["kind"]
        allowed = _MAP_KEYS.get(kind)
        if allowed is None:
            raise InvalidMap(f"unknown map kind {kind!r}")
        extra = set(d) - allowed - {"kind"}
        if extra:
            raise InvalidMap(f"unexpected keys for a {kind} map: {sorted(extra)}")
        if kind == "composite":
            return compose(*(cls.from_dict(p) for p in d["parts"]))
        if kind == "rotation":
            return rotation(_num(d["angle"]))
        if kind in ("sine", "sine_perturbed"):
            return sine_map(_num(d.get("base_angle", 0.0)), _num(d["amplitude"]))
        if kind == "inverse_sine":
            return CircleMap("inverse_sine", _num(d.get("base_angle", 0.0)), _num(d["amplitude"]))
        raise InvalidMap(f"unknown map kind {kind!r}")


_MAP_KEYS = {"rotation": {"angle"}, "sine": {"base_angle", "amplitude"},
             "sine_perturbed": {"base_angle", "amplitude"},
             "inverse_sine": {"base_angle", "amplitude"}, "composite": {"parts"}}

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_UNARY = {ast.UAdd: operator.pos, ast.USub: operator.neg}
_NAMES = {"pi": math.pi}
_FUNCS = {"sqrt": math.sqrt}


def _arith(node):
    if isinstance(node, ast.Expression):
        return _arith(node.body)
    if isinstance(node, ast.Constant) and type(node.value) in (int, float):
        return float(node.value)
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_arith(node.left), _arith(node.right))
    if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
        return _UNARY[type(node.op)](_arith(node.operand))
    if isinstance(node, ast.Name) and node.id in _NAMES:
        return _NAMES[node.id]
    if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
            and node.func.id in _FUNCS and len(node.args) == 1 and not node.keywords):
        return _FUNCS[node.func.id](_arith(node.args[0]))
    raise ValueError("only numbers, pi, sqrt() and + - * / ** are allowed")


def _num(v) -> float:
    """A number, or a decimal string / arithmetic expression such as "1/(4*pi)"."""
    if isinstance(v, bool):
        raise ValueError("booleans are not numbers")
    if isinstance(v, str):
        return float(_arith(ast.parse(v, mode="eval")))
    return float(v)


def rotation(angle: float) -> CircleMap:
    return CircleMap("rotation", float(angle))


def sine_map(base_angle: float, amplitude: float) -> CircleMap:
    """x -> x + base_angle + amplitude * sin(2 pi x)."""
    return CircleMap("sine", float(base_angle), float(amplitude))


def compose(*maps: CircleMap) -> CircleMap:
    """Composite applying ``maps[0]`` first."""
    if len(maps) == 1:
        return maps[0]
    return CircleMap("composite", parts=tuple(maps))


IDENTITY = rotation(0.0)
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def map_eval_deriv(f: CircleMap, x: float):
    """(f(x) mod 1, f'(x))."""
    return f.eval_deriv(x)


def arc_image(f: CircleMap, arc: Arc) -> Arc:
    """Image of an arc under an orientation-preserving map, from its endpoint images."""
    if arc.is_full:
        return Arc(f(arc.start), 1.0)
    a = f.lift(arc.start)
    b = f.lift(arc.start + arc.length)
    return Arc(a, min(b - a, 1.0))


def rotation_number(f: CircleMap, n: int = 20000, x0: float = 0.0) -> float:
    """Average lifted displacement over n iterates, reduced mod 1."""
    x = x0
    for _ in range(n):
        x = f.lift(x)
    return canon((x - x0) / n)


def deriv_bounds_on_arc(f: CircleMap, arc: Arc, n: int = 256) -> tuple[float, float]:
    """Certified (inf, sup) of f' over an arc: grid extrema with Lipschitz slack."""
    xs = arc.grid(n)
    logd = np.log(f.deriv(xs))
    slack = f.log_deriv_lipschitz * (arc.length / max(n - 1, 1))
    return math.exp(logd.min() - slack), math.exp(logd.max() + slack)


def maps_close(f: CircleMap, g: CircleMap, n: int = 257) -> float:
    """Max circle distance between f and g on an n-point grid."""
    xs = np.linspace(0.0, 1.0, n, endpoint=False)
    return float(np.max(circle_dist(f(xs), g(xs))))


__all__: Sequence[str] = [
    "Arc", "CircleMap", "GOLDEN", "IDENTITY", "arc_image", "canon", "circle_dist",
    "compose", "deriv_bounds_on_arc", "map_eval_deriv", "rotation", "rotation_number",
    "sine_map",
]
