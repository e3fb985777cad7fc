"""Word compositions, skew-product orbits and fiber Lyapunov exponents.

A word w = w_0 w_1 ... w_{P-1} acts on the fiber by
T_w = f_{w_{P-1}} o ... o f_{w_0}: symbol 0 is applied first.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import _kernels as kern
from .circle import Arc, CircleMap, canon, circle_dist
from .errors import EmptyWord, InvarianceViolated, NoConvergence, NotContraction, NotFixed
from .symbolic import PeriodicSeq, Word

DEFAULT_FIXPOINT_TOL = 1e-12


class IfsFamily:
    """A finite family f_1..f_k of circle diffeomorphisms (k >= 2 for skew-products)."""

    def __init__(self, generators, *, min_size: int = 1):
        generators = list(generators)
        if len(generators) < min_size:
            raise ValueError(f"need at least {min_size} generators")
        self.generators = generators
        self.k = len(generators)
        self.L = max(g.sup_deriv for g in generators)
        self.L_inv_bound = max(1.0 / g.inf_deriv for g in generators)
        width = max(len(g.prims) for g in generators)
        self._kind = np.zeros((self.k, width), np.int64)
        self._b = np.zeros((self.k, width))
        self._a = np.zeros((self.k, width))
        self._lip = np.zeros((self.k, width))
        self._plen = np.array([len(g.prims) for g in generators], np.int64)
        for i, g in enumerate(generators):
            for j, (kind, b, a) in enumerate(g.prims):
                self._kind[i, j], self._b[i, j], self._a[i, j] = kind, b, a
                self._lip[i, j] = CircleMap("inverse_sine" if kind else "sine", b, a) \
                    .log_deriv_lipschitz
        self.log_deriv_lipschitz = max(g.log_deriv_lipschitz for g in generators)

    @property
    def tables(self):
        return self._kind, self._b, self._a, self._plen

    def __len__(self):
        return self.k

    def _arr(self, w) -> np.ndarray:
        a = w.array if isinstance(w, Word) else np.asarray(w, np.int64)
        if a.size == 0:
            raise EmptyWord("empty word: the identity composition is not allowed")
        if a.min() < 1 or a.max() > self.k:
            raise ValueError(f"word uses symbols outside 1..{self.k}")
        return a

    # single points ----------------------------------------------------------
    def apply(self, w, x: float) -> tuple[float, float]:
        """(T_w(x), log T_w'(x))."""
        y, _, ld = kern.run_word(*self.tables, self._arr(w), float(x))
        return y, ld

    def lift(self, w, x: float) -> float:
        y, carry, _ = kern.run_word(*self.tables, self._arr(w), float(x))
        return y + carry

    def orbit(self, w, x: float):
        """Fiber points x_0..x_P and per-step log-derivatives along w."""
        return kern.orbit_word(*self.tables, self._arr(w), float(x))

    def logderiv_grid(self, w, xs: np.ndarray) -> np.ndarray:
        return kern.logderiv_grid(*self.tables, self._arr(w), np.ascontiguousarray(xs, float))

    # arcs ---------------------------------------------------------------------
    def push(self, w, starts, llo, lhi):
        """Vectorized arc push; see ``_kernels.push_arcs``."""
        return kern.push_arcs(*self.tables, self._lip, self._arr(w),
                              np.atleast_1d(np.asarray(starts, float)),
                              np.atleast_1d(np.asarray(llo, float)),
                              np.atleast_1d(np.asarray(lhi, float)))

    def arc_push(self, w, arc: Arc, subdivisions: int = 1) -> "ArcPush":
        """Image of ``arc`` under T_w with certified derivative bounds over the arc."""
        if subdivisions == 1:
            starts = np.array([arc.start])
            ll = np.array([math.log(arc.length)])
        else:
            starts = canon(arc.start + arc.length * np.arange(subdivisions) / subdivisions)
            ll = np.full(subdivisions, math.log(arc.length / subdivisions))
        s, lo, hi, dlo, dhi, pmax = self.push(w, starts, ll, ll)
        if subdivisions == 1:
            image_start, image_lhi, image_llo = s[0], hi[0], lo[0]
        else:
            # image of the whole arc: start of the first piece, total of the piece lengths
            image_start = s[0]
            image_lhi = math.log(min(float(np.sum(np.exp(hi))), 1.0))
            image_llo = math.log(max(float(np.sum(np.exp(lo))), 1e-300))
        return ArcPush(float(image_start), float(image_llo), float(image_lhi),
                       float(dlo.min()), float(dhi.max()), float(pmax.max()))

    def to_dict(self) -> dict:
        return {"generators": [g.to_dict() for g in self.generators]}

    @classmethod
    def from_dict(cls, d) -> "IfsFamily":
        return cls([CircleMap.from_dict(g) for g in d["generators"]])


@dataclass(frozen=True)
class ArcPush:
    start: float
    log_len_lo: float
    log_len_hi: float
    log_deriv_lo: float
    log_deriv_hi: float
    max_prefix_log_len: float

    @property
    def length_hi(self) -> float:
        return math.exp(self.log_len_hi)

    def inside(self, target: Arc, slack: float = 0.0) -> bool:
        if self.log_len_hi >= 0.0:
            return target.is_full
        return target.contains_arc(Arc(self.start, self.length_hi), slack)


def word_eval_deriv(fam: IfsFamily, w, x: float):
    """(T_w(x), T_w'(x), [x_0, ..., x_P]) by the chain rule."""
    xs, logd = fam.orbit(w, x)
    return float(xs[-1]), float(math.exp(math.fsum(logd))), [float(v) for v in xs]


@dataclass
class PeriodicOrbit:
    """Periodic orbit of the skew-product generated by a fixed point of T_word."""

    word: Word
    fiber_point: float
    exponent: float
    contraction_cert: dict | None = None
    _cache: tuple | None = field(default=None, repr=False, compare=False)

    @property
    def period(self) -> int:
        return len(self.word)

    @property
    def sequence(self) -> PeriodicSeq:
        return PeriodicSeq(self.word)

    def trajectory(self, fam: IfsFamily):
        """(x_0..x_{P-1}, log f'_{w_j}(x_j)) along one period."""
        if self._cache is None or self._cache[0] is not fam:
            xs, logd = fam.orbit(self.word, self.fiber_point)
            self._cache = (fam, xs[:-1], logd)
        return self._cache[1], self._cache[2]

    def log_multiplier(self, fam: IfsFamily) -> float:
        return math.fsum(self.trajectory(fam)[1])

    def residual(self, fam: IfsFamily) -> float:
        y, _ = fam.apply(self.word, self.fiber_point)
        return float(circle_dist(y, self.fiber_point))

    def csv_rows(self, fam: IfsFamily):
        xs, logd = self.trajectory(fam)
        w = self.word.array
        for j in range(self.period):
            yield j, int(w[j]), float(xs[j]), float(logd[j])

    def to_dict(self, include_word: bool = True) -> dict:
        d = {"period": self.period, "fiber_point": self.fiber_point, "exponent": self.exponent,
             "contraction_cert": self.contraction_cert}
        if include_word:
            d["word"] = self.word.to_string()
        return d

    @classmethod
    def from_dict(cls, d, word: Word | None = None) -> "PeriodicOrbit":
        w = word if word is not None else Word.from_string(d["word"])
        return cls(w, float(d["fiber_point"]), float(d["exponent"]), d.get("contraction_cert"))


def certify_contraction(fam: IfsFamily, w, J: Arc, grid: int = 256, slack: float = 0.0):
    """(sup-derivative bound of T_w over J, image push of J)."""
    sub = fam.arc_push(w, J, subdivisions=grid)
    whole = fam.arc_push(w, J)
    return math.exp(sub.log_deriv_hi), whole


def fixed_point_in_interval(fam: IfsFamily, w, J: Arc, tol: float = DEFAULT_FIXPOINT_TOL,
                            grid: int = 256) -> float:
    """Fixed point of T_w in J by Picard iteration, after certifying contraction."""
    arr = fam._arr(w)
    sup_d, image = certify_contraction(fam, arr, J, grid)
    if not sup_d < 1.0:
        raise NotContraction(f"sup of T_w' over J is {sup_d:.6g} >= 1")
    if not image.inside(J):
        raise InvarianceViolated("T_w(J) is not contained in J")
    return picard_fixed_point(fam, arr, J, sup_d, tol)


def picard_fixed_point(fam: IfsFamily, w, J: Arc, sup_deriv: float,
                       tol: float = DEFAULT_FIXPOINT_TOL) -> float:
    """Picard iteration from the midpoint of J for a map certified contracting on J."""
    arr = fam._arr(w)
    budget = 8
    if 0.0 < sup_deriv < 1.0:
        budget += max(0, math.ceil(math.log(tol / J.length) / math.log(sup_deriv)))
    x = J.midpoint
    for _ in range(budget):
        y, _ = fam.apply(arr, x)
        if circle_dist(x, y) < tol:
            return float(y)
        x = y
    raise NoConvergence(f"no fixed point within {budget} Picard steps")


def periodic_orbit_from_word(fam: IfsFamily, w, x: float, tol: float = DEFAULT_FIXPOINT_TOL,
                             contraction_cert: dict | None = None) -> PeriodicOrbit:
    word = w if isinstance(w, Word) else Word(w)
    y, _ = fam.apply(word, x)
    if not circle_dist(x, y) < tol:
        raise NotFixed(f"|T_w(x) - x| = {circle_dist(x, y):.3g} >= {tol:g}")
    _, logd = fam.orbit(word, x)
    exponent = math.fsum(logd) / len(word)
    return PeriodicOrbit(word, float(x), exponent, contraction_cert)


def birkhoff_estimate(fam: IfsFamily, seq: PeriodicSeq, x: float, n: int) -> float:
    """(1/n) sum_{j<n} log f'_{w_j}(x_j) along the sequence."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return kern.birkhoff_sum(*fam.tables, seq.word.array, float(x), int(n)) / n


def find_fixed_points(fam: IfsFamily, w, grid: int = 2048):
    """All fixed points of T_w on S^1 detected on a grid, as (x, T_w'(x)) pairs.

    Roots of T~(x) - x - p for the integers p in the range of the displacement.
    """
    arr = fam._arr(w)
    xs = np.linspace(0.0, 1.0, grid + 1)
    disp = kern.lift_grid(*fam.tables, arr, xs) - xs
    out = []
    for p in range(math.floor(disp.min()), math.ceil(disp.max()) + 1):
        g = disp - p
        for i in np.flatnonzero((g[:-1] == 0.0) | (g[:-1] * g[1:] < 0.0)):
            if g[i] == 0.0:
                root = xs[i]
            else:
                root = brentq(lambda t: fam.lift(arr, t) - t - p, xs[i], xs[i + 1],
                              xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
            root = canon(float(root))
            if all(circle_dist(root, r) > 1e-9 for r, _ in out):
                _, ld = fam.apply(arr, root)
                out.append((root, math.exp(ld)))
    out.sort()
    return out


def certified_attracting_orbit(fam: IfsFamily, w, x: float, tol: float = DEFAULT_FIXPOINT_TOL,
                               half_width: float = 0.05, min_half_width: float = 1e-9):
    """Orbit through the attracting fixed point x of T_w with a contraction certificate.

    Shrinks a centred arc until contraction and invariance both certify.
    """
    word = w if isinstance(w, Word) else Word(w)
    h = half_width
    while h >= min_half_width:
        J = Arc.centered(x, 2 * h)
        try:
            xf = fixed_point_in_interval(fam, word, J, tol)
        except (NotContraction, InvarianceViolated):
            h *= 0.5
            continue
        sup_d, _ = certify_contraction(fam, word, J)
        cert = {"arc": J.to_dict(), "sup_deriv_bound": sup_d}
        return periodic_orbit_from_word(fam, word, xf, tol, cert)
    raise NotContraction("no certified attracting neighbourhood found")
