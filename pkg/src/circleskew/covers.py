"""Numerical certificates for minimality, backward expansion and landing.

Everything here is certified at a declared grid resolution: grid values of a
word's log-derivative are widened by the word's Lipschitz constant times the
grid spacing, and arcs are tracked with outward-rounded length bounds.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as kern
from .circle import Arc, canon
from .errors import NoCoverFound, NotACover, SearchExhausted
from .skew import IfsFamily
from .symbolic import Word, cylinder_depth

DEFAULT_GRID = 10_000


def word_log_deriv_lipschitz(fam: IfsFamily, w) -> float:
    """Lipschitz constant of log T_w' from the per-generator constants."""
    total, scale = 0.0, 1.0
    for s in w:
        g = fam.generators[s - 1]
        total += g.log_deriv_lipschitz * scale
        scale *= g.sup_deriv
    return total


# --- expanding covers ---------------------------------------------------------

@dataclass(frozen=True)
class CoverEntry:
    word: Word
    arc: Arc
    min_deriv: float
    sup_deriv: float

    def to_dict(self) -> dict:
        return {"word": self.word.to_string(), "arc": self.arc.to_dict(),
                "min_deriv": self.min_deriv, "sup_deriv": self.sup_deriv}

    @classmethod
    def from_dict(cls, d) -> "CoverEntry":
        return cls(Word.from_string(d["word"]), Arc.from_dict(d["arc"]),
                   float(d["min_deriv"]), float(d["sup_deriv"]))


@dataclass(frozen=True)
class ExpandingCover:
    entries: tuple
    nu: float
    lebesgue_number: float
    grid: int

    @property
    def L1(self) -> float:
        return max(e.sup_deriv for e in self.entries)

    @property
    def H(self) -> int:
        return max(len(e.word) for e in self.entries)

    @property
    def arcs(self):
        return [e.arc for e in self.entries]

    def member_containing(self, start: float, length: float) -> int | None:
        """Lowest index i with [start, start + length] inside B_i (length may underflow to 0)."""
        for i, e in enumerate(self.entries):
            B = e.arc
            if B.is_full or B.offset(start) + length <= B.length:
                return i
        return None

    def to_dict(self) -> dict:
        return {"entries": [e.to_dict() for e in self.entries], "nu": self.nu,
                "lebesgue_number": self.lebesgue_number, "L1": self.L1, "H": self.H,
                "grid": self.grid}

    @classmethod
    def from_dict(cls, d) -> "ExpandingCover":
        return cls(tuple(CoverEntry.from_dict(e) for e in d["entries"]), float(d["nu"]),
                   float(d["lebesgue_number"]), int(d["grid"]))


def _components(mask: np.ndarray):
    """Maximal circular runs of True as (first index, run length)."""
    n = mask.size
    if mask.all():
        return [(0, n)]
    if not mask.any():
        return []
    # rotate so that index 0 is False, then scan linearly
    off = int(np.flatnonzero(~mask)[0])
    m = np.roll(mask, -off)
    edges = np.diff(np.concatenate([[0], m.astype(np.int8), [0]]))
    starts = np.flatnonzero(edges == 1)
    ends = np.flatnonzero(edges == -1)
    return [((s + off) % n, e - s) for s, e in zip(starts, ends)]


def _map_signature(fam: IfsFamily, w: np.ndarray, probe: np.ndarray) -> bytes:
    return np.round(kern.lift_grid(*fam.tables, w, probe), 10).tobytes()


def find_expanding_cover(fam: IfsFamily, nu_target: float, max_word_len: int,
                         grid: int = DEFAULT_GRID, frontier_cap: int = 512) -> ExpandingCover:
    """Cover of S^1 by arcs B_i on which some word map h_i has h_i' > nu_target.

    Breadth-first over words in shortlex order; words inducing the same map
    (checked on a probe grid) are kept once, and each level keeps at most
    ``frontier_cap`` words.
    """
    if not nu_target > 1.0:
        raise ValueError("nu_target must exceed 1")
    xs = np.arange(grid) / grid
    spacing = 1.0 / grid
    log_nu = math.log(nu_target)
    probe = np.linspace(0.0, 1.0, 33)[:-1]
    covered = np.zeros(grid, bool)
    entries: list[CoverEntry] = []
    seen: set[bytes] = set()
    frontier = [np.array([s], np.int64) for s in range(1, fam.k + 1)]
    for _length in range(1, max_word_len + 1):
        level = []
        for w in frontier:
            sig = _map_signature(fam, w, probe)
            if sig in seen:
                continue
            seen.add(sig)
            level.append(w)
        for w in level:
            logd = kern.logderiv_grid(*fam.tables, w, xs)
            slack = word_log_deriv_lipschitz(fam, w) * spacing
            ok = logd - slack > log_nu
            if not ok.any():
                continue
            for first, run in _components(ok):
                idx = (first + np.arange(run)) % grid
                # interior points of the component get positive margin
                inner = idx if run == grid else idx[1:-1]
                if inner.size == 0 or covered[inner].all():
                    continue
                covered[inner] = True
                arc = Arc(0.0, 1.0) if run == grid else Arc(float(xs[first]), float((run - 1) * spacing))
                lo = math.exp(float(logd[idx].min()) - slack)
                hi = math.exp(float(logd.max()) + 0.5 * slack)
                entries.append(CoverEntry(Word(w), arc, lo, hi))
        if covered.all():
            leb = lebesgue_number([e.arc for e in entries], grid) - spacing
            if leb <= 0:
                raise NoCoverFound("cover found but its Lebesgue number is below grid resolution")
            return ExpandingCover(tuple(entries), nu_target, leb, grid)
        frontier = [np.append(w, s) for w in level[:frontier_cap] for s in range(1, fam.k + 1)]
        if not frontier:
            break
    raise NoCoverFound(f"no expanding cover with words of length <= {max_word_len}")


def lebesgue_number(arcs, grid: int = DEFAULT_GRID) -> float:
    """2 * min over grid points of the best containment margin among the arcs."""
    xs = np.arange(grid) / grid
    best = np.zeros(grid)
    for a in arcs:
        np.maximum(best, a.margin(xs), out=best)
    m = float(best.min())
    if m <= 0.0:
        raise NotACover(f"grid point {xs[int(best.argmin())]:.6g} has no positive margin")
    return 2.0 * m


def verify_cover(fam: IfsFamily, cover: ExpandingCover, points: np.ndarray) -> np.ndarray:
    """Per point: does some entry contain it with word derivative above nu there."""
    ok = np.zeros(points.size, bool)
    for e in cover.entries:
        inside = e.arc.contains(points)
        if inside.any():
            d = kern.logderiv_grid(*fam.tables, e.word.array, np.ascontiguousarray(points[inside]))
            ok[np.flatnonzero(inside)[d > math.log(cover.nu)]] = True
    return ok


# --- minimality -------------------------------------------------------------------

def _max_gap(points: np.ndarray) -> float:
    p = np.sort(canon(points))
    return float(max(np.max(np.diff(p)) if p.size > 1 else 0.0, 1.0 - p[-1] + p[0]))


def minimality_probe(fam: IfsFamily, eps: float, max_word_len: int,
                     sample_points: int = 16) -> bool:
    """Is the forward semigroup orbit of every sample point eps-dense?

    Orbit points are merged on cells of size eps/4; the orbit is eps-dense when
    no circular gap between orbit points exceeds 2 eps.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    if eps >= 0.5:
        return True
    q = eps / 4.0
    ncell = math.ceil(1.0 / q)
    for x0 in np.arange(sample_points) / sample_points:
        seen = np.zeros(ncell, bool)
        pts = [np.array([x0])]
        seen[int(x0 / q) % ncell] = True
        frontier = np.array([x0])
        dense = False
        for _ in range(max_word_len):
            children = np.concatenate([g(frontier) for g in fam.generators])
            cells = (children / q).astype(np.int64) % ncell
            _, first = np.unique(cells, return_index=True)
            first = np.sort(first)
            fresh = first[~seen[cells[first]]]
            if fresh.size == 0:
                break
            seen[cells[fresh]] = True
            frontier = children[fresh]
            pts.append(frontier)
            if _max_gap(np.concatenate(pts)) <= 2 * eps:
                dense = True
                break
        if not dense and _max_gap(np.concatenate(pts)) > 2 * eps:
            return False
    return True


# --- tour and go home ------------------------------------------------------------

@dataclass(frozen=True)
class CellGrid:
    """Product cells: depth-D cylinders times fiber arcs [f/N, (f+1)/N] with 1/N <= eta.

    N is a power of two, so grids for different eta are nested and being
    eta-dense is monotone in eta.
    """

    k: int
    depth: int
    nfiber: int

    @classmethod
    def for_eta(cls, k: int, eta: float) -> "CellGrid":
        return cls(k, cylinder_depth(eta), 2 ** max(0, math.ceil(-math.log2(eta) - 1e-12)))

    @property
    def ncyl(self) -> int:
        return self.k ** self.depth

    @property
    def total(self) -> int:
        return self.ncyl * self.nfiber

    def cylinder_index(self, symbols) -> int:
        i = 0
        for s in symbols:
            i = i * self.k + (int(s) - 1)
        return i

    def cylinder_indices(self, word: np.ndarray, starts: np.ndarray) -> np.ndarray:
        """Cylinder index of the cyclic windows word[j:j+D] for each j in starts."""
        idx = np.zeros(starts.size, np.int64)
        for t in range(self.depth):
            idx = idx * self.k + (word[(starts + t) % word.size] - 1)
        return idx

    def cylinder_word(self, index: int) -> np.ndarray:
        out = np.empty(self.depth, np.int64)
        for j in range(self.depth - 1, -1, -1):
            out[j] = index % self.k + 1
            index //= self.k
        return out

    def fiber_cell_containing(self, start: float, length: float) -> int | None:
        """Fiber cell holding the whole arc [start, start + length], if any."""
        a = math.floor(start * self.nfiber)
        if (start + length) * self.nfiber <= a + 1:
            return a % self.nfiber
        return None


def tour_hits(fam: IfsFamily, word: np.ndarray, arc: Arc, cells: CellGrid) -> np.ndarray:
    """Cells visited from every point of cylinder(word) x arc.

    Cell (c, f) counts at step j when j + D <= |word|, word[j:j+D] spells c
    and the image T_{word[:j]}(arc) lies inside fiber cell f.
    """
    hit = np.zeros((cells.ncyl, cells.nfiber), bool)
    n = word.size
    if n < cells.depth:
        return hit
    ll = math.log(arc.length)
    s, _, hi = kern.trace_arc(*fam.tables, fam._lip, word, arc.start, ll, ll)
    for j in range(n - cells.depth + 1):
        f = cells.fiber_cell_containing(s[j], math.exp(hi[j]))
        if f is not None:
            hit[cells.cylinder_index(word[j:j + cells.depth]), f] = True
    return hit


def steer(fam: IfsFamily, start: float, llo: float, lhi: float, accept, max_len: int,
          beam: int = 2048, quantum: float = 1e-7):
    """Shortlex-first word u, |u| <= max_len, with accept(start', lo', hi') for T_u(arc).

    ``accept`` is vectorized over arrays of image starts and log-length
    bounds.  States landing on the same quantized (start, length) are merged
    and each level keeps the first ``beam`` states.
    """
    s = np.array([start])
    lo = np.array([llo])
    hi = np.array([lhi])
    ok = accept(s, lo, hi)
    if ok[0]:
        return np.empty(0, np.int64)
    words = np.empty((1, 0), np.int64)
    k = fam.k
    for _ in range(max_len):
        s, lo, hi = kern.expand_arcs(*fam.tables, fam._lip, k, s, lo, hi)
        words = np.concatenate([np.repeat(words, k, axis=0),
                                np.tile(np.arange(1, k + 1), words.shape[0])[:, None]], axis=1)
        ok = accept(s, lo, hi)
        if ok.any():
            return words[int(np.flatnonzero(ok)[0])].copy()
        key = np.stack([np.round(s / quantum), np.round(hi / 1e-3)], axis=1)
        _, first = np.unique(key, axis=0, return_index=True)
        keep = np.sort(first)[:beam]
        s, lo, hi, words = s[keep], lo[keep], hi[keep], words[keep]
    return None


def _inside_accept(target: Arc):
    if target.is_full:
        return lambda s, lo, hi: np.ones(s.size, bool)

    def accept(s, lo, hi):
        t = canon(s - target.start)
        return (hi < 0.0) & (t + np.exp(hi) <= target.length) & (t <= target.length)
    return accept


def _cell_accept(f: int, nfiber: int):
    lo_edge = f / nfiber
    width = 1.0 / nfiber

    def accept(s, lo, hi):
        t = canon(s - lo_edge)
        return (hi < 0.0) & (t < width) & (t + np.exp(hi) <= width)
    return accept


@dataclass(frozen=True)
class LandingEntry:
    word: Word
    density_certified: bool


@dataclass
class LandingTable:
    eta: float
    target: Arc
    delta0: float
    K: int
    entries: list = field(default_factory=list)
    cell_depth: int = 1
    fiber_cells: int = 1

    @property
    def sample_arcs(self):
        n = len(self.entries)
        return [Arc(i * self.delta0, min(2 * self.delta0, 1.0)) for i in range(n)]

    def lookup(self, arc: Arc) -> int:
        """Index of the sample arc [i delta0, (i + 2) delta0] containing arc."""
        if arc.length > self.delta0:
            raise ValueError("arc longer than delta0")
        i = int(math.floor(arc.start / self.delta0)) % len(self.entries)
        return i

    def words(self):
        return [e.word for e in self.entries]

    def to_dict(self) -> dict:
        return {"eta": self.eta, "target": self.target.to_dict(), "delta0": self.delta0,
                "K": self.K, "cell_depth": self.cell_depth, "fiber_cells": self.fiber_cells,
                "entries": [{"word": e.word.to_string(), "density_certified": e.density_certified}
                            for e in self.entries]}


def _tour_word(fam, arc: Arc, cells: CellGrid, budget: int, beam: int):
    word = np.empty(0, np.int64)
    ll = math.log(arc.length)
    hit = np.zeros((cells.ncyl, cells.nfiber), bool)
    while not hit.all():
        c, f = (int(v) for v in np.argwhere(~hit)[0])
        s, lo, hi = arc.start, ll, ll
        if word.size:
            s, lo, hi = (float(v[-1]) for v in kern.trace_arc(*fam.tables, fam._lip, word,
                                                               arc.start, ll, ll))
        u = steer(fam, s, lo, hi, _cell_accept(f, cells.nfiber),
                  budget - word.size - cells.depth, beam)
        if u is None:
            return None
        word = np.concatenate([word, u, cells.cylinder_word(c)])
        hit |= tour_hits(fam, word, arc, cells)
    return word


def tour_and_go_home(fam: IfsFamily, J: Arc, eta: float, max_word_len: int,
                     beam: int = 2048, min_arcs: int = 16, max_arcs: int = 4096) -> LandingTable:
    """Landing table: per sample arc, a word touring every eta-cell and then landing in J.

    Sample arcs are [i delta0, (i + 2) delta0] with delta0 = 1/N; N doubles
    from ``min_arcs`` until every sample arc gets a word of length <= max_word_len.
    """
    if not eta > 0:
        raise ValueError("eta must be positive")
    vacuous = eta >= 1.0
    cells = CellGrid.for_eta(fam.k, eta)
    home = _inside_accept(J)
    n = min_arcs
    while n <= max_arcs:
        delta0 = 1.0 / n
        entries = []
        for i in range(n):
            arc = Arc(i * delta0, min(2 * delta0, 1.0))
            tour = np.empty(0, np.int64)
            if not vacuous:
                tour = _tour_word(fam, arc, cells, max_word_len, beam)
                if tour is None:
                    break
            ll = math.log(arc.length)
            s, lo, hi = arc.start, ll, ll
            if tour.size:
                s, lo, hi = (float(v[-1]) for v in kern.trace_arc(*fam.tables, fam._lip, tour,
                                                                   arc.start, ll, ll))
            u = steer(fam, s, lo, hi, home, max_word_len - tour.size, beam)
            if u is None:
                break
            w = np.concatenate([tour, u])
            certified = vacuous or bool(tour_hits(fam, w, arc, cells).all())
            entries.append(LandingEntry(Word(w), certified))
        else:
            K = max(len(e.word) for e in entries)
            return LandingTable(eta, J, delta0, K, entries, cells.depth, cells.nfiber)
        n *= 2
    raise SearchExhausted(f"no landing words of length <= {max_word_len} into J "
                          f"for sample arcs down to 1/{max_arcs}")


def verify_landing(fam: IfsFamily, table: LandingTable) -> bool:
    """Re-push every sample arc through its word and check T_w(arc) inside J."""
    for arc, e in zip(table.sample_arcs, table.entries):
        if len(e.word) == 0:
            if not table.target.contains_arc(arc):
                return False
            continue
        p = fam.arc_push(e.word, arc)
        if not p.inside(table.target):
            return False
    return True
