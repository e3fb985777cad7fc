"""Atomic measures on Sigma_k x S^1 and finite weak-* diagnostics."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .covers import CellGrid
from .skew import IfsFamily, PeriodicOrbit
from .symbolic import PeriodicSeq, Word


@dataclass(frozen=True)
class AtomicMeasure:
    """Uniform weights on the points (sigma^{offsets[j]}(word word ...), points[j])."""

    word: Word
    offsets: np.ndarray
    points: np.ndarray

    def __post_init__(self):
        if self.offsets.shape != self.points.shape or self.points.size == 0:
            raise ValueError("need matching, nonempty offsets and points")

    @property
    def size(self) -> int:
        return int(self.points.size)

    @property
    def weights(self) -> np.ndarray:
        return np.full(self.size, 1.0 / self.size)

    @classmethod
    def from_orbit(cls, orbit: PeriodicOrbit, fam: IfsFamily) -> "AtomicMeasure":
        xs, _ = orbit.trajectory(fam)
        return cls(orbit.word, np.arange(orbit.period), np.asarray(xs, float))

    @classmethod
    def dirac(cls, seq: PeriodicSeq, x: float) -> "AtomicMeasure":
        return cls(seq.word, np.zeros(1, np.int64), np.array([float(x)]))

    def symbols(self, depth: int) -> np.ndarray:
        """(N, depth) array of the first symbols of each support sequence."""
        w = self.word.array
        idx = (self.offsets[:, None] + np.arange(depth)[None, :]) % w.size
        return w[idx]


@dataclass(frozen=True)
class TestFunction:
    """1_[cylinder](omega) * trig(2 pi m x) with trig in {cos, sin}."""

    __test__ = False  # not a pytest class

    cylinder: Word
    mode: int
    kind: str = "cos"

    def values(self, mu: AtomicMeasure) -> np.ndarray:
        n = len(self.cylinder)
        ind = np.all(mu.symbols(n) == self.cylinder.array[None, :], axis=1) if n else \
            np.ones(mu.size, bool)
        trig = np.cos if self.kind == "cos" else np.sin
        return ind * trig(2.0 * math.pi * self.mode * mu.points)


@dataclass(frozen=True)
class TestFunctionBank:
    """Cylinders of depth 0..D times cos modes 0..m_max and sin modes 1..m_max."""

    __test__ = False

    k: int
    depth: int = 3
    m_max: int = 4

    def cylinders(self):
        out = [Word()]
        for n in range(1, self.depth + 1):
            for i in range(self.k ** n):
                out.append(Word([(i // self.k ** (n - 1 - t)) % self.k + 1 for t in range(n)]))
        return out

    def functions(self):
        return [TestFunction(w, m, kind) for w in self.cylinders()
                for kind, modes in (("cos", range(self.m_max + 1)), ("sin", range(1, self.m_max + 1)))
                for m in modes]

    def __len__(self):
        return sum(self.k ** n for n in range(self.depth + 1)) * (2 * self.m_max + 1)

    def integrals(self, mu: AtomicMeasure) -> np.ndarray:
        """All bank integrals at once, ordered as ``functions()``."""
        sym = mu.symbols(self.depth) - 1
        trig = []
        for kind, modes in (("cos", range(self.m_max + 1)), ("sin", range(1, self.m_max + 1))):
            f = np.cos if kind == "cos" else np.sin
            trig.extend(f(2.0 * math.pi * m * mu.points) for m in modes)
        out = []
        for n in range(self.depth + 1):
            idx = np.zeros(mu.size, np.int64)
            for t in range(n):
                idx = idx * self.k + sym[:, t]
            sums = np.stack([np.bincount(idx, weights=v, minlength=self.k ** n) for v in trig])
            out.append(sums.T.reshape(-1))
        return np.concatenate(out) / mu.size

    def to_dict(self) -> dict:
        return {"depth": self.depth, "m_max": self.m_max, "size": len(self)}


class LogDerivativeObservable:
    """(omega, x) -> log f'_{omega_0}(x); its integral against mu_X is the exponent of X."""

    def __init__(self, fam: IfsFamily):
        self.fam = fam

    def values(self, mu: AtomicMeasure) -> np.ndarray:
        first = mu.symbols(1)[:, 0]
        out = np.empty(mu.size)
        for s in np.unique(first):
            sel = first == s
            out[sel] = np.log(self.fam.generators[s - 1].deriv(mu.points[sel]))
        return out


def integrate(mu: AtomicMeasure, phi) -> float:
    """(1/N) sum of phi over the support.

    ``phi`` is a test function or observable with ``values(mu)``, or a callable
    phi(first_symbols, x) vectorized over the support.
    """
    if hasattr(phi, "values"):
        v = phi.values(mu)
    else:
        v = np.broadcast_to(np.asarray(phi(mu.symbols(1)[:, 0], mu.points), float), (mu.size,))
    return math.fsum(v) / mu.size


def weak_star_gap(mu1: AtomicMeasure, mu2: AtomicMeasure, bank: TestFunctionBank) -> float:
    return float(np.max(np.abs(bank.integrals(mu1) - bank.integrals(mu2))))


@dataclass(frozen=True)
class DensityReport:
    cells_total: int
    cells_hit: int
    eta_dense: bool
    depth: int
    fiber_cells: int
    eta: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def density_report(orbit: PeriodicOrbit, eta: float, fam: IfsFamily) -> DensityReport:
    """Which (depth-D cylinder, fiber arc of length <= eta) cells hold an orbit point."""
    if not eta > 0:
        raise ValueError("eta must be positive")
    cells = CellGrid.for_eta(fam.k, eta)
    xs, _ = orbit.trajectory(fam)
    cyl = cells.cylinder_indices(orbit.word.array, np.arange(orbit.period))
    fib = np.minimum((np.asarray(xs) * cells.nfiber).astype(np.int64), cells.nfiber - 1)
    hit = np.unique(cyl * cells.nfiber + fib).size
    return DensityReport(cells.total, int(hit), hit == cells.total, cells.depth, cells.nfiber, eta)


def exponent_continuity_check(orbits, fam: IfsFamily, bank: TestFunctionBank | None = None):
    """Per orbit: (exponent, weak-* gap to the last orbit's measure), plus trend flags."""
    orbits = list(orbits)
    if len(orbits) < 2:
        raise ValueError("need at least two orbits")
    bank = bank or TestFunctionBank(fam.k)
    last = bank.integrals(AtomicMeasure.from_orbit(orbits[-1], fam))
    rows = []
    for o in orbits:
        gap = float(np.max(np.abs(bank.integrals(AtomicMeasure.from_orbit(o, fam)) - last)))
        rows.append((o.exponent, gap))
    exps = [e for e, _ in rows]
    gaps = [g for _, g in rows]
    trend = {
        "exponents_increasing": all(a < b for a, b in zip(exps, exps[1:])),
        "gaps_decreasing": all(a >= b for a, b in zip(gaps, gaps[1:])),
    }
    return rows, trend
