"""Conjugating a family by a circle diffeomorphism, and the invariance of fiber exponents.

For a conjugacy phi the family g -> phi o g o phi^-1 has the periodic orbit
through phi(x) for each orbit through x, and the log phi' terms telescope
over a period, so the exponents coincide.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .circle import CircleMap, circle_dist, compose, rotation
from .errors import NotFixed
from .skew import IfsFamily, PeriodicOrbit

CONJUGACY_TOL = 1e-10


@dataclass(frozen=True)
class ConjugacyMap:
    phi: CircleMap

    @property
    def inverse(self) -> CircleMap:
        return self.phi.inverse()

    @property
    def is_identity(self) -> bool:
        return self.phi.kind == "rotation" and self.phi.angle == 0.0

    def __call__(self, x):
        return self.phi(x)


def conjugate_map(g: CircleMap, phi: ConjugacyMap) -> CircleMap:
    """phi o g o phi^-1 (phi^-1 applied first)."""
    if phi.is_identity:
        return g
    if g.kind == "rotation" and phi.phi.kind == "rotation":
        return rotation(g.angle)
    return compose(phi.inverse, g, phi.phi)


def conjugate_family(fam: IfsFamily, phi: ConjugacyMap) -> IfsFamily:
    return IfsFamily([conjugate_map(g, phi) for g in fam.generators])


def conjugate_orbit(fam: IfsFamily, phi: ConjugacyMap, X: PeriodicOrbit,
                    tol: float = CONJUGACY_TOL):
    """(conjugated family, orbit of the same word through phi(x), largest one-step residual).

    Each step g^_{w_j}(phi(x_j)) = phi(x_{j+1}) is checked on its own. Iterating
    the whole conjugated word from phi(x) instead would amplify the rounding
    differences between the two evaluations along the expanding parts of long words.
    """
    hat = conjugate_family(fam, phi)
    xs, _ = fam.orbit(X.word, X.fiber_point)
    ys = np.asarray(phi(np.asarray(xs)), float)
    w = X.word.array
    images = np.empty(X.period)
    logd = np.empty(X.period)
    for s in np.unique(w):
        sel = np.flatnonzero(w == s)
        g = hat.generators[s - 1]
        images[sel] = g(ys[sel])
        logd[sel] = np.log(g.deriv(ys[sel]))
    targets = np.append(ys[1:-1], ys[0])  # the last step must close up at phi(x_0)
    residual = float(np.max(circle_dist(images, targets)))
    if not residual < tol:
        raise NotFixed(f"phi(x) is not periodic for the conjugated family: step residual "
                       f"{residual:.3g} >= {tol:g}")
    Y = PeriodicOrbit(X.word, float(ys[0]), math.fsum(logd) / X.period)
    return hat, Y, residual


def check_exponent_invariance(fam: IfsFamily, phi: ConjugacyMap, X: PeriodicOrbit,
                              tol: float = CONJUGACY_TOL) -> tuple[float, float]:
    """(lambda of X, lambda of the conjugated orbit); raises NotFixed if phi(x) is not periodic."""
    _, Y, _ = conjugate_orbit(fam, phi, X, tol)
    return X.exponent, Y.exponent


def pushforward_gap(fam: IfsFamily, phi: ConjugacyMap, X: PeriodicOrbit,
                    tol: float = CONJUGACY_TOL) -> float:
    """Largest distance between g^_{w_j}(phi(x_j)) and phi(x_{j+1 mod P}) over one period."""
    return conjugate_orbit(fam, phi, X, tol)[2]


__all__ = ["ConjugacyMap", "check_exponent_invariance", "conjugate_family", "conjugate_map",
           "conjugate_orbit", "pushforward_gap"]
