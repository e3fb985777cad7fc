"""Compiled inner loops over long words.

Maps are flattened into primitive-step tables (see ``circle``): row g holds
the steps of generator g + 1.  Words are int64 arrays of 1-based symbols.
"""
import math

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover - pure-python fallback, slow on long words
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f

TWO_PI = 2.0 * math.pi
# arcs shorter than this are tracked through derivative bounds, longer ones by endpoints
TINY = 1e-7
ENDPOINT_ERR = 4.5e-16


@njit(cache=True)
def _step(kind, b, a, x):
    if kind == 0:
        return x + b + a * math.sin(TWO_PI * x), 1.0 + TWO_PI * a * math.cos(TWO_PI * x)
    t = x - b
    for _ in range(60):
        step = (t + b + a * math.sin(TWO_PI * t) - x) / (1.0 + TWO_PI * a * math.cos(TWO_PI * t))
        t -= step
        if abs(step) < 1e-17:
            break
    return t, 1.0 / (1.0 + TWO_PI * a * math.cos(TWO_PI * t))


@njit(cache=True)
def _cos_range(t0, t1):
    """min and max of cos(2 pi t) over [t0, t1] (t1 >= t0)."""
    if t1 - t0 >= 1.0:
        return -1.0, 1.0
    c0 = math.cos(TWO_PI * t0)
    c1 = math.cos(TWO_PI * t1)
    lo = min(c0, c1)
    hi = max(c0, c1)
    if math.floor(t1) > math.floor(t0) or t0 == math.floor(t0):
        hi = 1.0
    if math.floor(t1 - 0.5) > math.floor(t0 - 0.5) or t0 - 0.5 == math.floor(t0 - 0.5):
        lo = -1.0
    return lo, hi


@njit(cache=True)
def run_word(kind, pb, pa, plen, word, x0):
    """T_word(x0) reduced mod 1, the integer carry of the lift, and log T'(x0)."""
    x = x0
    carry = 0
    logd = 0.0
    for s in word:
        g = s - 1
        d = 1.0
        for j in range(plen[g]):
            x, dj = _step(kind[g, j], pb[g, j], pa[g, j], x)
            d *= dj
        logd += math.log(d)
        fl = math.floor(x)
        x -= fl
        carry += int(fl)
        if x >= 1.0:
            x = 0.0
            carry += 1
    return x, carry, logd


@njit(cache=True)
def orbit_word(kind, pb, pa, plen, word, x0):
    """Fiber points x_0..x_P (reduced) and per-symbol log-derivatives."""
    n = word.size
    xs = np.empty(n + 1)
    logd = np.empty(n)
    x = x0
    xs[0] = x
    for i in range(n):
        g = word[i] - 1
        d = 1.0
        for j in range(plen[g]):
            x, dj = _step(kind[g, j], pb[g, j], pa[g, j], x)
            d *= dj
        logd[i] = math.log(d)
        x -= math.floor(x)
        if x >= 1.0:
            x = 0.0
        xs[i + 1] = x
    return xs, logd


@njit(cache=True)
def lift_grid(kind, pb, pa, plen, word, xs):
    """Lifted values T~(x) for every x of a grid."""
    out = np.empty(xs.size)
    for i in range(xs.size):
        y, carry, _ = run_word(kind, pb, pa, plen, word, xs[i])
        out[i] = y + carry
    return out


@njit(cache=True)
def logderiv_grid(kind, pb, pa, plen, word, xs):
    out = np.empty(xs.size)
    for i in range(xs.size):
        _, _, ld = run_word(kind, pb, pa, plen, word, xs[i])
        out[i] = ld
    return out


@njit(cache=True)
def birkhoff_sum(kind, pb, pa, plen, word, x0, nsteps):
    """Sum of log f'_{w_j}(x_j) along nsteps of the sequence w w w ..."""
    x = x0
    total = 0.0
    p = word.size
    for i in range(nsteps):
        g = word[i % p] - 1
        d = 1.0
        for j in range(plen[g]):
            x, dj = _step(kind[g, j], pb[g, j], pa[g, j], x)
            d *= dj
        total += math.log(d)
        x -= math.floor(x)
        if x >= 1.0:
            x = 0.0
    return total


@njit(cache=True)
def _push_symbol(kind, pb, pa, plen, lip, g, x, lo, hi):
    """One generator step of an arc [x, x + len], len in [e^lo, e^hi].

    Returns the image start, its log-length bounds and bounds on log f_g'
    over the arc.
    """
    dlo = 0.0
    dhi = 0.0
    for j in range(plen[g]):
        k = kind[g, j]
        b = pb[g, j]
        a = pa[g, j]
        len_hi = math.exp(hi)
        if len_hi >= TINY:
            len_lo = math.exp(lo)
            ya, _ = _step(k, b, a, x)
            yb, _ = _step(k, b, a, x + len_hi)
            yc, _ = _step(k, b, a, x + len_lo)
            err = ENDPOINT_ERR * (abs(ya) + abs(yb) + 2.0)
            nh = yb - ya + err
            nl = yc - ya - err
            if nl < 1e-300:
                nl = 1e-300
            # exact extremes of the step derivative over the arc
            e = TWO_PI * a
            if k == 0:
                c_lo, c_hi = _cos_range(x, x + len_hi)
                if e >= 0:
                    d_lo = 1.0 + e * c_lo
                    d_hi = 1.0 + e * c_hi
                else:
                    d_lo = 1.0 + e * c_hi
                    d_hi = 1.0 + e * c_lo
            else:
                c_lo, c_hi = _cos_range(ya, yb)
                if e >= 0:
                    d_lo = 1.0 / (1.0 + e * c_hi)
                    d_hi = 1.0 / (1.0 + e * c_lo)
                else:
                    d_lo = 1.0 / (1.0 + e * c_lo)
                    d_hi = 1.0 / (1.0 + e * c_hi)
            dlo += math.log(d_lo) - 1e-15
            dhi += math.log(d_hi) + 1e-15
            x = ya
            lo = math.log(nl)
            hi = math.log(min(nh, 1.0))
        else:
            y, d = _step(k, b, a, x)
            ld = math.log(d)
            sl = lip[g, j] * len_hi + 1e-15
            dlo += ld - sl
            dhi += ld + sl
            lo += ld - sl
            hi += ld + sl
            x = y
    x -= math.floor(x)
    if x >= 1.0:
        x = 0.0
    return x, lo, hi, dlo, dhi


@njit(cache=True)
def push_arcs(kind, pb, pa, plen, lip, word, starts, llo, lhi):
    """Push arcs [s, s + len] through T_word.

    Each arc carries log-length bounds (llo, lhi).  Returns, per arc, the image
    start, image log-length bounds, bounds on log T_word' over the arc, and the
    largest upper log-length among the prefix images T_{w[:m]}(arc), m < |w|.
    """
    m = starts.size
    out_s = np.empty(m)
    out_lo = np.empty(m)
    out_hi = np.empty(m)
    dlo = np.zeros(m)
    dhi = np.zeros(m)
    pmax = np.full(m, -np.inf)
    for i in range(m):
        x = starts[i]
        lo = llo[i]
        hi = lhi[i]
        for w in word:
            if hi > pmax[i]:
                pmax[i] = hi
            x, lo, hi, a, b = _push_symbol(kind, pb, pa, plen, lip, w - 1, x, lo, hi)
            dlo[i] += a
            dhi[i] += b
        out_s[i] = x
        out_lo[i] = lo
        out_hi[i] = hi
    return out_s, out_lo, out_hi, dlo, dhi, pmax


@njit(cache=True)
def trace_arc(kind, pb, pa, plen, lip, word, start, llo, lhi):
    """Starts and log-length bounds of T_{w[:m]}(arc) for m = 0..|w|."""
    n = word.size
    s = np.empty(n + 1)
    lo = np.empty(n + 1)
    hi = np.empty(n + 1)
    s[0], lo[0], hi[0] = start, llo, lhi
    for m in range(n):
        s[m + 1], lo[m + 1], hi[m + 1], _, _ = _push_symbol(
            kind, pb, pa, plen, lip, word[m] - 1, s[m], lo[m], hi[m])
    return s, lo, hi


@njit(cache=True)
def expand_arcs(kind, pb, pa, plen, lip, k, starts, llo, lhi):
    """Children of every arc under each of the k generators, parent-major order."""
    m = starts.size
    cs = np.empty(m * k)
    clo = np.empty(m * k)
    chi = np.empty(m * k)
    for i in range(m):
        for g in range(k):
            cs[i * k + g], clo[i * k + g], chi[i * k + g], _, _ = _push_symbol(
                kind, pb, pa, plen, lip, g, starts[i], llo[i], lhi[i])
    return cs, clo, chi
