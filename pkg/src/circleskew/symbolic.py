"""Finite words, periodic sequences and cylinders over the alphabet {1, ..., k}."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .circle import circle_dist

# beyond this many agreeing symbols 2**-m underflows to 0.0 in double precision
METRIC_HORIZON = 1100


class Word:
    """An immutable finite word; symbol 0 is the first map applied."""

    __slots__ = ("_a", "_hash")

    def __init__(self, symbols=(), k: int | None = None):
        a = np.array(symbols, dtype=np.int64).ravel()
        if a.size and a.min() < 1:
            raise ValueError("symbols start at 1")
        if k is not None and a.size and a.max() > k:
            raise ValueError(f"symbol {int(a.max())} outside alphabet of size {k}")
        a.setflags(write=False)
        self._a = a
        self._hash = None

    @classmethod
    def _wrap(cls, arr: np.ndarray) -> "Word":
        w = cls.__new__(cls)
        arr.setflags(write=False)
        w._a = arr
        w._hash = None
        return w

    @property
    def array(self) -> np.ndarray:
        return self._a

    def __len__(self) -> int:
        return int(self._a.size)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return Word._wrap(self._a[i].copy())
        return int(self._a[i])

    def __iter__(self):
        return (int(s) for s in self._a)

    def __add__(self, other: "Word") -> "Word":
        return word_concat(self, other)

    def __mul__(self, n: int) -> "Word":
        return word_power(self, n)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Word):
            return NotImplemented
        return self._a.size == other._a.size and bool(np.array_equal(self._a, other._a))

    def __lt__(self, other: "Word") -> bool:
        # shortlex order, used for deterministic tie-breaking
        return (len(self), tuple(self)) < (len(other), tuple(other))

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self._a.tobytes())
        return self._hash

    def __repr__(self) -> str:
        s = self.to_string()
        return f"Word({s[:40]}{'...' if len(s) > 40 else ''})"

    def to_string(self) -> str:
        if self._a.size and self._a.max() > 9:
            raise ValueError("digit-string serialization needs an alphabet of size <= 9")
        return (self._a.astype(np.uint8) + ord("0")).tobytes().decode("ascii")

    @classmethod
    def from_string(cls, s: str) -> "Word":
        if not s:
            return cls()
        return cls._wrap(np.frombuffer(s.encode("ascii"), dtype=np.uint8).astype(np.int64) - ord("0"))


def word_concat(a: Word, b: Word) -> Word:
    return Word._wrap(np.concatenate([a.array, b.array]))


def word_power(a: Word, n: int) -> Word:
    if n < 0:
        raise ValueError("negative power")
    return Word._wrap(np.tile(a.array, n))


@dataclass(frozen=True)
class PeriodicSeq:
    """The one-sided sequence w w w ... for a nonempty word w."""

    word: Word

    def __post_init__(self):
        if len(self.word) == 0:
            raise ValueError("a periodic sequence needs a nonempty repeating word")

    @property
    def period(self) -> int:
        return len(self.word)

    def __getitem__(self, i: int) -> int:
        return self.word[i % self.period]

    def prefix(self, n: int) -> np.ndarray:
        return np.resize(self.word.array, n) if n else np.empty(0, np.int64)

    def window(self, start: int, n: int) -> np.ndarray:
        idx = (start + np.arange(n)) % self.period
        return self.word.array[idx]

    def shift(self, m: int = 1) -> "PeriodicSeq":
        """sigma^m applied to the sequence."""
        m %= self.period
        return PeriodicSeq(Word._wrap(np.roll(self.word.array, -m).copy()))


@dataclass(frozen=True)
class Cylinder:
    prefix: Word

    def contains(self, seq: PeriodicSeq) -> bool:
        n = len(self.prefix)
        return bool(np.array_equal(seq.prefix(n), self.prefix.array))


def first_difference(a: PeriodicSeq, b: PeriodicSeq, offset_a: int = 0, offset_b: int = 0,
                     horizon: int = METRIC_HORIZON) -> int | None:
    """First index m >= 0 with sigma^offset_a(a)_m != sigma^offset_b(b)_m.

    Periodic sequences agreeing on lcm(periods) symbols are equal; agreement
    past ``horizon`` symbols is reported as equality as well, since the metric
    value there is below the smallest subnormal double.
    """
    n = min(math.lcm(a.period, b.period), horizon)
    diff = np.flatnonzero(a.window(offset_a, n) != b.window(offset_b, n))
    return int(diff[0]) if diff.size else None


def seq_metric(a: PeriodicSeq, b: PeriodicSeq) -> float:
    """2**-m with m the first index where the sequences differ, 0 if equal."""
    m = first_difference(a, b)
    return 0.0 if m is None else math.ldexp(1.0, -m)


def product_metric(p, q) -> float:
    """max of the sequence metric and the circle distance for (seq, x) pairs."""
    return max(seq_metric(p[0], q[0]), float(circle_dist(p[1], q[1])))


def cylinder_depth(eta: float) -> int:
    """Smallest depth D >= 1 with 2**-D <= eta."""
    if eta <= 0:
        raise ValueError("eta must be positive")
    return max(1, math.ceil(-math.log2(eta) - 1e-12))


__all__ = [
    "Cylinder", "PeriodicSeq", "Word", "cylinder_depth", "first_difference",
    "product_metric", "seq_metric", "word_concat", "word_power",
]
