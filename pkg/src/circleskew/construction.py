"""Shrinking-exponent periodic orbits: stage constructor, verifier and sequence driver.

One stage turns an attracting periodic orbit X (word w, fixed point x,
multiplier alpha) into X' with word w^n k1 k2:

* w^n contracts an arc J around x by roughly alpha^n,
* k1 is a chain of expanding-cover words that blows the arc back up to a
  size below delta,
* k2 is a landing word that tours every eta-cell and brings the arc home
  into J.

T_{w^n k1 k2} then contracts J into itself and its fixed point generates X'.
Every inequality the construction relies on is stored with the certificate
and re-checked by ``verify_stage_certificate``.  All multiplier-like
quantities are kept as logarithms since alpha = exp(P lambda) underflows
for long periods.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .circle import Arc, circle_dist
from .covers import (ExpandingCover, LandingTable, find_expanding_cover, minimality_probe,
                     tour_and_go_home)
from .errors import (ChaseFailed, ContractionFailed, ExponentTooLarge, HypothesisFailed,
                     LandingFailed, ParamSearchFailed, StageError)
from .measures import AtomicMeasure, TestFunctionBank, density_report, weak_star_gap
from .skew import (DEFAULT_FIXPOINT_TOL, IfsFamily, PeriodicOrbit, certified_attracting_orbit,
                   find_fixed_points, periodic_orbit_from_word, picard_fixed_point)
from .symbolic import METRIC_HORIZON, Word

LOG2 = math.log(2.0)
CERT_SLACK = 1e-9
# the spread bound L^{2P}|J| < gamma is used when it costs at most this many halvings of J
UNIFORM_SPREAD_HALVINGS = 6


def _le(a: float, b: float, slack: float = CERT_SLACK) -> bool:
    return a <= b + slack * max(1.0, abs(a), abs(b))


def _lt(a: float, b: float, slack: float = CERT_SLACK) -> bool:
    return a < b + slack * max(1.0, abs(a), abs(b))


def _close(a: float, b: float, slack: float = CERT_SLACK) -> bool:
    return abs(a - b) <= slack * max(1.0, abs(a), abs(b))


# --- parameters -------------------------------------------------------------------

@dataclass
class StageParams:
    P: int
    log_alpha: float
    log_alpha_minus: float
    log_alpha_plus: float
    alpha_offset: float
    J: Arc
    J_log_deriv_lo: float
    J_log_deriv_hi: float
    spread_mode: str
    spread_log_bound: float
    gamma: float
    eta: float
    M: int
    n: int
    r: int
    delta: float
    delta0: float
    K: int
    nu: float
    L: float
    L1: float
    H: int
    lebesgue: float
    C1: float
    C1_sampled: bool
    C1_samples: int
    C1_seed: int
    C2: float
    C3: float
    C4: float
    c: float
    d: float

    @property
    def alpha(self) -> float:
        return math.exp(self.log_alpha)

    @property
    def alpha_minus(self) -> float:
        return math.exp(self.log_alpha_minus)

    @property
    def alpha_plus(self) -> float:
        return math.exp(self.log_alpha_plus)

    @property
    def exponent(self) -> float:
        return self.log_alpha / self.P

    @property
    def aleph(self) -> float:
        return 1.0 - self.d * abs(self.exponent)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["J"] = self.J.to_dict()
        d["alpha"] = self.alpha
        d["aleph"] = self.aleph
        return d

    @classmethod
    def from_dict(cls, d) -> "StageParams":
        names = cls.__dataclass_fields__
        kw = {k: d[k] for k in names}
        kw["J"] = Arc.from_dict(d["J"])
        return cls(**kw)


def r_lower_bound(n: int, log_alpha_plus: float, log_delta: float, L1: float,
                  log_J: float) -> float:
    """Lower end of the bracket fixing r: log(alpha_+^-n delta / (L1 |J|)) / log L1."""
    return (-n * log_alpha_plus + log_delta - math.log(L1) - log_J) / math.log(L1)


def choose_r(n: int, log_alpha_plus: float, delta: float, L1: float, J_len: float) -> int:
    """The unique integer r with lower <= r < lower + 1."""
    return math.ceil(r_lower_bound(n, log_alpha_plus, math.log(delta), L1, math.log(J_len)))


def smallest_M(gamma: float, P: int) -> int:
    """Smallest positive integer M with 2^(-M P) < gamma."""
    if gamma > 1.0:
        return 1
    m = max(1, math.floor(math.log2(1.0 / gamma) / P) + 1)
    while m > 1 and (m - 1) * P * LOG2 > -math.log(gamma):
        m -= 1
    while not m * P * LOG2 > -math.log(gamma):
        m += 1
    return m


def _fit_arc(fam: IfsFamily, X: PeriodicOrbit, lo: float, hi: float, start: float,
             grid: int, min_len: float = 1e-12):
    """Largest centred arc (halving from ``start``) with lo <= log T_w' <= hi and T_w(J) inside J."""
    ell = start
    while ell >= min_len:
        J = Arc.centered(X.fiber_point, ell)
        sub = fam.arc_push(X.word, J, grid)
        if sub.log_deriv_lo >= lo and sub.log_deriv_hi <= hi and fam.arc_push(X.word, J).inside(J):
            return J, sub
        ell *= 0.5
    return None


def _spread(fam: IfsFamily, X: PeriodicOrbit, J: Arc, gamma: float, lo: float, hi: float,
            grid: int):
    """Shrink J until max_{m < 2P} |f^m_omega(J)| < gamma is certified.

    Uses the bound L^{2P}|J| when that costs few halvings, and otherwise the
    certified prefix image lengths of J along w w.
    """
    P = X.period
    log_gamma = math.log(gamma)
    log_uniform = log_gamma - 2 * P * math.log(fam.L)
    ell = J.length
    if math.log(ell) - log_uniform <= UNIFORM_SPREAD_HALVINGS * LOG2:
        while not math.log(ell) < log_uniform:
            ell *= 0.5
        J = Arc.centered(X.fiber_point, ell)
        sub = fam.arc_push(X.word, J, grid)
        return J, sub, "uniform", 2 * P * math.log(fam.L) + math.log(ell)
    twice = X.word * 2
    while ell >= 1e-12:
        J = Arc.centered(X.fiber_point, ell)
        spread = fam.arc_push(twice, J).max_prefix_log_len
        if spread < log_gamma:
            sub = fam.arc_push(X.word, J, grid)
            if sub.log_deriv_lo >= lo and sub.log_deriv_hi <= hi:
                return J, sub, "traced", spread
        ell *= 0.5
    raise ParamSearchFailed("no arc J meets the spread bound")


def estimate_C1(fam: IfsFamily, table: LandingTable, samples: int, seed: int) -> float:
    """Lower bound of log T_R' over S^1 for the landing words plus a seeded sample of |R| <= K."""
    if table.K == 0:
        return 0.0
    words = {w for w in table.words() if len(w)}
    rng = np.random.default_rng(seed)
    for _ in range(samples):
        n = int(rng.integers(1, table.K + 1))
        words.add(Word(rng.integers(1, fam.k + 1, n)))
    starts = np.arange(64) / 64.0
    ll = np.full(64, math.log(1.0 / 64.0))
    best = 0.0  # the empty word
    for w in sorted(words):
        best = min(best, float(fam.push(w, starts, ll, ll)[3].min()))
    return best


def select_stage_params(fam: IfsFamily, cover: ExpandingCover, X: PeriodicOrbit, gamma: float,
                        eta: float, *, table_builder=None, max_word_len: int = 60,
                        max_n: int = 1_000_000, max_period: int = 5_000_000,
                        allow_negative_aleph: bool = False, c1_samples: int = 256,
                        seed: int = 0, grid: int = 256):
    """Constants of one stage; returns (StageParams, LandingTable)."""
    if not (gamma > 0 and eta > 0):
        raise ValueError("gamma and eta must be positive")
    log_alpha = X.log_multiplier(fam)
    if not log_alpha < 0:
        raise ParamSearchFailed("the parent orbit is not attracting")
    P = X.period
    lam = log_alpha / P
    nu, L1, H, L = cover.nu, cover.L1, cover.H, fam.L
    a = math.log(nu) / math.log(L1)
    c = 1.0 - a / 2.0
    d = 2.0 * H / math.log(L1)
    if not 1.0 - d * abs(lam) > 0 and not allow_negative_aleph:
        raise ExponentTooLarge(f"1 - d|lambda| = {1.0 - d * abs(lam):.6g} <= 0")

    # alpha_pm = alpha^(1 -+ s), s halved until the exponent-gain inequality holds
    s = 0.5
    while not (1 - 2 * a / 3) * log_alpha <= log_alpha * (1 + s) - a * log_alpha * (1 - s):
        s *= 0.5
    la_minus, la_plus = log_alpha * (1 + s), log_alpha * (1 - s)
    fit = _fit_arc(fam, X, la_minus, la_plus, min(0.25, gamma), grid)
    if fit is None:
        raise ParamSearchFailed("no arc around the fixed point meets the derivative window")
    J, sub, mode, spread = _spread(fam, X, fit[0], gamma, la_minus, la_plus, grid)

    table = (table_builder or (lambda J_, eta_: tour_and_go_home(fam, J_, eta_, max_word_len)))(J, eta)
    K = table.K
    log_J = math.log(J.length)
    log_delta = min(math.log(table.delta0), log_J - K * math.log(L),
                    math.log(cover.lebesgue_number) - math.log(L1))
    delta = math.exp(log_delta)
    C1 = estimate_C1(fam, table, c1_samples, seed)
    C2 = a * (log_delta - math.log(L1) - log_J)
    C3 = C1 + C2
    M = smallest_M(gamma, P)
    C4 = K + (2 * M + 1) * P - K * H * math.log(L) / math.log(L1)

    def ok(n: int) -> bool:
        return (n > 2 * M + 1
                and C3 / (n * P) > lam * a / 6.0
                and C4 / (n * P) <= abs(lam) * H / math.log(L1)
                and r_lower_bound(n, la_plus, log_delta, L1, log_J) > 0)

    hi = 1
    while not ok(hi):
        hi *= 2
        if hi > 2 * max_n:
            raise ParamSearchFailed(f"n exceeds the cap {max_n}")
    lo = hi // 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        lo, hi = (lo, mid) if ok(mid) else (mid, hi)
    n = hi
    if n > max_n:
        raise ParamSearchFailed(f"n = {n} exceeds the cap {max_n}")
    r = choose_r(n, la_plus, delta, L1, J.length)
    if n * P + r > max_period:
        raise ParamSearchFailed(f"period at least {n * P + r} exceeds the cap {max_period}")
    params = StageParams(
        P=P, log_alpha=log_alpha, log_alpha_minus=la_minus, log_alpha_plus=la_plus,
        alpha_offset=s, J=J, J_log_deriv_lo=sub.log_deriv_lo, J_log_deriv_hi=sub.log_deriv_hi,
        spread_mode=mode, spread_log_bound=spread, gamma=gamma, eta=eta, M=M, n=n, r=r,
        delta=delta, delta0=table.delta0, K=K, nu=nu, L=L, L1=L1, H=H,
        lebesgue=cover.lebesgue_number, C1=C1, C1_sampled=True, C1_samples=c1_samples,
        C1_seed=seed, C2=C2, C3=C3, C4=C4, c=c, d=d)
    return params, table


# --- good approximation -------------------------------------------------------------

@dataclass
class GoodApproxCertificate:
    gamma: float
    aleph_bound: float
    gamma_observed: float
    aleph_observed: float
    gamma_size: int
    preimage_count: int
    fiber_counts_equal: bool
    verdicts: tuple

    @property
    def ok(self) -> bool:
        return all(self.verdicts)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["verdicts"] = list(self.verdicts)
        return d

    @classmethod
    def from_dict(cls, d) -> "GoodApproxCertificate":
        kw = dict(d)
        kw["verdicts"] = tuple(kw["verdicts"])
        return cls(**kw)


def _next_mismatch(eq: np.ndarray) -> np.ndarray:
    """For each t, the first index >= t where eq is False (len(eq) if none)."""
    n = eq.size
    pos = np.where(eq, n, np.arange(n))
    return np.minimum.accumulate(pos[::-1])[::-1]


def _seq_dist(child_word: np.ndarray, parent_word: np.ndarray, child_at: np.ndarray,
              parent_at: np.ndarray, span: int) -> np.ndarray:
    """2^-m distances between sigma^{c}(w'...) and sigma^{p}(w...) for aligned starts.

    child_at / parent_at are consecutive runs (child_at[t] = child_at[0] + t);
    ``span`` extra symbols beyond the run are compared, agreement past them
    counts as equality.
    """
    m = child_at.size
    t = np.arange(m + span)
    eq = child_word[(child_at[0] + t) % child_word.size] == parent_word[(parent_at[0] + t) % parent_word.size]
    nxt = _next_mismatch(eq)[:m]
    gap = nxt - np.arange(m)
    out = np.ldexp(1.0, -np.minimum(gap, 2000))
    out[nxt >= m + span] = 0.0
    return out


def verify_good_approximation(fam: IfsFamily, X: PeriodicOrbit, Xp: PeriodicOrbit, gamma: float,
                              aleph_bound: float, gamma_range=None, rho_offset: int = 0,
                              gamma_indices=None, rho_indices=None) -> GoodApproxCertificate:
    """Check the three good-approximation conditions for X' against X.

    Gamma is either the contiguous child index range [a, b) with
    rho(j) = j + rho_offset mod P, or explicit index arrays.
    """
    P, Pp = X.period, Xp.period
    xs, _ = X.trajectory(fam)
    xps, _ = Xp.trajectory(fam)
    w, wp = X.word.array, Xp.word.array
    if gamma_indices is None:
        a, b = gamma_range if gamma_range is not None else (0, Pp)
        g_idx = np.arange(a, b, dtype=np.int64)
        r_idx = (g_idx + rho_offset) % P
        if g_idx.size:
            # the distance for (y = F^j, i) depends only on m = i + j
            m = np.arange(a, b + P - 1, dtype=np.int64)
            fib = circle_dist(xps[m % Pp], xs[(m + rho_offset) % P])
            seq = _seq_dist(wp, w, m, m + rho_offset, METRIC_HORIZON)
            gobs = float(np.max(np.maximum(fib, seq)))
        else:
            gobs = 0.0
    else:
        g_idx = np.asarray(gamma_indices, np.int64)
        r_idx = np.asarray(rho_indices, np.int64) % P
        gobs = 0.0
        i = np.arange(P)
        for g, r in zip(g_idx, r_idx):
            fib = circle_dist(xps[(g + i) % Pp], xs[(r + i) % P])
            seq = _seq_dist(wp, w, g + i, r + i, METRIC_HORIZON)
            gobs = max(gobs, float(np.max(np.maximum(fib, seq))))
    counts = np.bincount(r_idx, minlength=P) if r_idx.size else np.zeros(P, np.int64)
    equal = bool(np.all(counts == counts[0]))
    aobs = g_idx.size / Pp
    return GoodApproxCertificate(
        gamma=gamma, aleph_bound=aleph_bound, gamma_observed=gobs, aleph_observed=aobs,
        gamma_size=int(g_idx.size), preimage_count=int(counts[0]) if equal else -1,
        fiber_counts_equal=equal,
        verdicts=(gobs < gamma, aobs >= aleph_bound, equal))


# --- stage construction ----------------------------------------------------------------

@dataclass
class StageCertificate:
    params: StageParams
    parent: PeriodicOrbit
    child: PeriodicOrbit
    kappa1: Word
    kappa2: Word
    chase: list
    landing_index: int
    landing_density_certified: bool
    checks: dict
    good_approx: GoodApproxCertificate
    exponent_bounds_ok: bool
    density: dict
    density_eta_ok: bool
    stage: int | None = None
    bootstrap: bool = False

    @property
    def kappa0(self) -> Word:
        return self.parent.word * self.params.n

    @property
    def M(self) -> int:
        return self.params.M

    def to_dict(self) -> dict:
        return {
            "stage": self.stage, "bootstrap": self.bootstrap,
            "params": self.params.to_dict(),
            "parent": self.parent.to_dict(),
            "child": self.child.to_dict(include_word=False),
            "kappa1": self.kappa1.to_string(), "kappa2": self.kappa2.to_string(),
            "chase": list(self.chase), "landing_index": self.landing_index,
            "landing_density_certified": self.landing_density_certified,
            "checks": self.checks, "good_approx": self.good_approx.to_dict(),
            "exponent_bounds_ok": self.exponent_bounds_ok,
            "density": self.density, "density_eta_ok": self.density_eta_ok,
        }

    @classmethod
    def from_dict(cls, d) -> "StageCertificate":
        params = StageParams.from_dict(d["params"])
        parent = PeriodicOrbit.from_dict(d["parent"])
        k1, k2 = Word.from_string(d["kappa1"]), Word.from_string(d["kappa2"])
        child = PeriodicOrbit.from_dict(d["child"], parent.word * params.n + k1 + k2)
        return cls(params, parent, child, k1, k2, list(d["chase"]), int(d["landing_index"]),
                   bool(d["landing_density_certified"]), dict(d["checks"]),
                   GoodApproxCertificate.from_dict(d["good_approx"]),
                   bool(d["exponent_bounds_ok"]), dict(d["density"]), bool(d["density_eta_ok"]),
                   d.get("stage"), bool(d.get("bootstrap", False)))


def construct_next_orbit(fam: IfsFamily, cover: ExpandingCover, params: StageParams,
                         X: PeriodicOrbit, table: LandingTable, *,
                         tol: float = DEFAULT_FIXPOINT_TOL, max_period: int = 5_000_000,
                         grid: int = 256, stage: int | None = None,
                         bootstrap: bool = False) -> StageCertificate:
    p = params
    J = p.J
    kappa0 = X.word * p.n
    ll = math.log(J.length)
    s, lo, hi, *_ = (float(v[0]) for v in fam.push(kappa0, [J.start], [ll], [ll]))
    contracted = [lo, hi]

    # chase the contracted arc through the expanding cover
    chase, pieces = [], []
    for _ in range(p.r):
        length = math.exp(hi)
        if not length < p.lebesgue:
            raise ChaseFailed(f"arc of length {length:.3g} exceeds the Lebesgue number")
        i = cover.member_containing(s, length)
        if i is None:
            raise ChaseFailed("no cover member contains the chased arc")
        w = cover.entries[i].word
        s, lo, hi, *_ = (float(v[0]) for v in fam.push(w, [s], [lo], [hi]))
        chase.append(i)
        pieces.append(w.array)
    kappa1 = Word._wrap(np.concatenate(pieces)) if pieces else Word()

    length = math.exp(hi)
    if not length < p.delta0:
        raise LandingFailed(f"|I| = {length:.3g} is not below delta0 = {p.delta0:.3g}")
    I = Arc(s, length)
    li = table.lookup(I)
    entry = table.entries[li]
    kappa2 = entry.word
    if len(kappa2):
        landed = fam.arc_push(kappa2, I)
        inside = landed.inside(J)
        landed_arc = {"start": landed.start, "log_len_hi": landed.log_len_hi}
    else:
        inside = J.contains_arc(I)
        landed_arc = {"start": I.start, "log_len_hi": math.log(I.length)}
    if not inside:
        raise LandingFailed("the landing word does not bring I into J")

    word = kappa0 + kappa1 + kappa2
    if len(word) > max_period:
        raise ParamSearchFailed(f"period {len(word)} exceeds the cap {max_period}")
    sub = fam.arc_push(word, J, grid)
    whole = fam.arc_push(word, J)
    if not (sub.log_deriv_hi < 0.0 and whole.inside(J)):
        raise ContractionFailed("T_w is not certified to contract J into itself")
    xf = picard_fixed_point(fam, word, J, math.exp(sub.log_deriv_hi), tol)
    cert = {"arc": J.to_dict(), "log_sup_deriv_bound": sub.log_deriv_hi,
            "sup_deriv_bound": math.exp(sub.log_deriv_hi)}
    child = periodic_orbit_from_word(fam, word, xf, tol, cert)

    aleph = 1.0 - p.d * abs(X.exponent)
    ga = verify_good_approximation(fam, X, child, p.gamma, aleph,
                                   gamma_range=(p.M * p.P, (p.n - p.M - 1) * p.P))
    dens = density_report(child, p.eta, fam)
    checks = {
        "contracted_log_len": contracted,
        "I_start": I.start, "I_log_len": [lo, hi],
        "landed": landed_arc,
        "J_image": {"start": whole.start, "log_len_hi": whole.log_len_hi},
        "contraction_log_sup": sub.log_deriv_hi,
        "fixpoint_tol": tol,
        "fixpoint_residual": child.residual(fam),
    }
    return StageCertificate(
        params=p, parent=X, child=child, kappa1=kappa1, kappa2=kappa2, chase=chase,
        landing_index=li, landing_density_certified=entry.density_certified, checks=checks,
        good_approx=ga, exponent_bounds_ok=p.c * X.exponent < child.exponent < 0.0,
        density=dens.to_dict(), density_eta_ok=dens.eta_dense, stage=stage, bootstrap=bootstrap)


def build_stage(fam: IfsFamily, cover: ExpandingCover, X: PeriodicOrbit, gamma: float, eta: float,
                *, max_word_len: int = 60, max_n: int = 1_000_000, max_period: int = 5_000_000,
                allow_negative_aleph: bool = False, c1_samples: int = 256, seed: int = 0,
                tol: float = DEFAULT_FIXPOINT_TOL, grid: int = 256, stage: int | None = None,
                bootstrap: bool = False) -> StageCertificate:
    params, table = select_stage_params(
        fam, cover, X, gamma, eta, max_word_len=max_word_len, max_n=max_n,
        max_period=max_period, allow_negative_aleph=allow_negative_aleph,
        c1_samples=c1_samples, seed=seed, grid=grid)
    return construct_next_orbit(fam, cover, params, X, table, tol=tol, max_period=max_period,
                                grid=grid, stage=stage, bootstrap=bootstrap)


# --- re-verification ---------------------------------------------------------------------

def verify_stage_certificate(cert, fam: IfsFamily | None = None, slack: float = CERT_SLACK,
                             recompute_contraction: bool = False) -> dict:
    """Re-check a stage certificate; returns {check name: bool}.

    Without ``fam`` only the stored constants are checked, by direct
    arithmetic.  With ``fam`` the child orbit, its exponent, the good
    approximation and the density report are recomputed from the words.
    """
    if isinstance(cert, dict):
        cert = StageCertificate.from_dict(cert)
    p = cert.params
    lL, lL1, lnu = math.log(p.L), math.log(p.L1), math.log(p.nu)
    a = lnu / lL1
    la, lam, lmi = p.log_alpha_plus, p.exponent, p.log_alpha_minus
    lJ, ld = math.log(p.J.length), math.log(p.delta)
    ch = cert.checks
    Pp = cert.child.period
    out = {}
    out["alpha_order"] = lmi < p.log_alpha < la < 0.0
    out["J_derivative_window"] = _le(lmi, p.J_log_deriv_lo, slack) and _le(p.J_log_deriv_hi, la, slack)
    if p.spread_mode == "uniform":
        out["J_spread"] = _lt(2 * p.P * lL + lJ, math.log(p.gamma), slack)
    else:
        out["J_spread"] = _lt(p.spread_log_bound, math.log(p.gamma), slack)
    out["delta_definition"] = _close(ld, min(math.log(p.delta0), lJ - p.K * lL,
                                             math.log(p.lebesgue) - lL1), slack)
    lower = r_lower_bound(p.n, la, ld, p.L1, lJ)
    out["r_bracket"] = _lt(0.0, lower, slack) and _le(lower, p.r, slack) and _lt(p.r, lower + 1, slack)
    mid = p.n * la + p.r * lL1 + lJ
    out["r_scale"] = _le(ld - lL1, mid, slack) and _lt(mid, ld, slack)
    lo_b = p.n * lmi + p.r * lnu + lJ
    out["chase_length"] = _le(lo_b, ch["I_log_len"][0], slack) and _le(ch["I_log_len"][1], mid, slack)
    out["child_period"] = (Pp == p.n * p.P + len(cert.kappa1) + len(cert.kappa2) and Pp > p.P
                           and len(cert.kappa2) <= p.K)
    img = ch["J_image"]
    out["J_invariant"] = img["log_len_hi"] < 0 and p.J.contains_arc(Arc(img["start"], math.exp(img["log_len_hi"])))
    out["contraction"] = _lt(p.K * lL + p.r * lL1 + p.n * la, 0.0, slack) and ch["contraction_log_sup"] < 0.0
    out["alpha_window"] = _le((1 - 2 * a / 3) * p.log_alpha, lmi - a * la, slack)
    out["constants"] = all([
        _close(p.c, 1 - a / 2, slack), _close(p.d, 2 * p.H / lL1, slack),
        _close(p.C2, a * (ld - lL1 - lJ), slack), _close(p.C3, p.C1 + p.C2, slack),
        _close(p.C4, p.K + (2 * p.M + 1) * p.P - p.K * p.H * lL / lL1, slack),
        _close(cert.parent.exponent, lam, slack),
        _close(cert.good_approx.aleph_bound, 1 - p.d * abs(lam), slack),
    ])
    out["M_minimal"] = (p.M * p.P * LOG2 > -math.log(p.gamma)
                        and (p.M == 1 or (p.M - 1) * p.P * LOG2 <= -math.log(p.gamma))
                        and 2 * p.M + 1 < p.n)
    out["exponent_bounds"] = _lt(p.c * lam, cert.child.exponent, slack) and cert.child.exponent < 0.0
    ga = cert.good_approx
    out["good_approximation"] = ga.ok and ga.preimage_count == p.n - 2 * p.M - 1 \
        and ga.gamma_size == (p.n - 2 * p.M - 1) * p.P
    out["density"] = cert.density_eta_ok
    if fam is not None:
        child = cert.child
        out["fixed_point"] = child.residual(fam) < ch["fixpoint_tol"]
        xs, logd = fam.orbit(child.word, child.fiber_point)
        out["child_exponent"] = _close(math.fsum(logd) / Pp, child.exponent, slack)
        ga2 = verify_good_approximation(fam, cert.parent, child, p.gamma, 1 - p.d * abs(lam),
                                        gamma_range=(p.M * p.P, (p.n - p.M - 1) * p.P))
        out["good_approximation_recomputed"] = ga2.ok and ga2.preimage_count == p.n - 2 * p.M - 1
        out["density_recomputed"] = density_report(child, p.eta, fam).eta_dense
        if recompute_contraction:
            sub = fam.arc_push(child.word, p.J, 256)
            out["contraction_recomputed"] = sub.log_deriv_hi < 0 and fam.arc_push(child.word, p.J).inside(p.J)
    return out


# --- sequences ------------------------------------------------------------------------------

def attracting_seed_search(fam: IfsFamily, max_len: int, tol: float = DEFAULT_FIXPOINT_TOL,
                           grid: int = 2048) -> PeriodicOrbit:
    """First word in shortlex order whose map has an attracting fixed point, as a certified orbit."""
    frontier = [[]]
    for _ in range(max_len):
        frontier = [w + [s] for w in frontier for s in range(1, fam.k + 1)]
        for w in frontier:
            for x, dx in find_fixed_points(fam, w, grid):
                if 0 < dx < 1:
                    try:
                        return certified_attracting_orbit(fam, Word(w), x, tol)
                    except Exception:
                        continue
    raise HypothesisFailed(f"no attracting periodic point for words of length <= {max_len}")


def seed_orbit(fam: IfsFamily, word: Word, tol: float = DEFAULT_FIXPOINT_TOL,
               grid: int = 2048) -> PeriodicOrbit:
    """Certified orbit through the most attracting fixed point of a configured seed word."""
    pts = [(dx, x) for x, dx in find_fixed_points(fam, word, grid) if 0 < dx < 1]
    if not pts:
        raise HypothesisFailed(f"seed word {word.to_string()} has no attracting fixed point")
    dx, x = min(pts)
    return certified_attracting_orbit(fam, word, x, tol)


@dataclass
class SequenceReport:
    config: dict
    hypotheses: dict
    seed: dict
    bootstrap: list = field(default_factory=list)
    stages: list = field(default_factory=list)
    orbits: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    failure: dict | None = None

    @property
    def ok(self) -> bool:
        return self.failure is None and self.summary.get("all_ok", False)

    def to_dict(self) -> dict:
        return {"config": self.config, "hypotheses": self.hypotheses, "seed": self.seed,
                "bootstrap": [c.to_dict() for c in self.bootstrap],
                "stages": [c.to_dict() for c in self.stages],
                "orbits": [o.to_dict(include_word=False) for o in self.orbits],
                "summary": self.summary, "failure": self.failure}


def _stage_ok(c: StageCertificate) -> bool:
    v = verify_stage_certificate(c)
    if c.bootstrap:
        v.pop("density", None)
    return all(v.values())


def run_sequence(config, raise_errors: bool = True) -> SequenceReport:
    """Build X_1, ..., X_N; X_{s+1} is constructed from X_s with gamma_s and eta_{s+1}.

    While 1 - d|lambda| <= 0 preliminary stages shrink the exponent of the
    seed; their last orbit becomes X_1.
    """
    fam = config.family()
    caps = config.caps
    tol = config.fixpoint_tol
    grid = config.contraction_grid
    report = SequenceReport(config=config.to_dict(), hypotheses={}, seed={})
    minimal = minimality_probe(fam, config.minimality_eps, caps["minimality_word_len"],
                               config.minimality_samples)
    report.hypotheses["minimal"] = minimal
    cover = find_expanding_cover(fam, config.nu, caps["cover_word_len"], config.circle_grid)
    report.hypotheses["cover"] = cover.to_dict()
    if not minimal:
        raise HypothesisFailed("minimality probe failed")
    seed = seed_orbit(fam, config.seed_word, tol) if config.seed_word is not None else \
        attracting_seed_search(fam, caps["seed_word_len"], tol)
    report.seed = seed.to_dict()
    common = dict(max_word_len=caps["max_word_len"], max_n=caps["max_n"],
                  max_period=caps["max_period"], c1_samples=config.c1_samples,
                  seed=config.rng_seed, tol=tol, grid=grid)
    d = 2.0 * cover.H / math.log(cover.L1)
    X = seed
    try:
        b = 0
        while not 1.0 - d * abs(X.exponent) > 0:
            b += 1
            if b > caps["max_bootstrap"]:
                raise ParamSearchFailed("bootstrap stages did not bring 1 - d|lambda| above 0")
            cert = build_stage(fam, cover, X, config.gamma(1), config.eta(1),
                               allow_negative_aleph=True, stage=-b, bootstrap=True, **common)
            report.bootstrap.append(cert)
            X = cert.child
        report.orbits.append(X)
        for s in range(1, config.stages):
            try:
                cert = build_stage(fam, cover, X, config.gamma(s), config.eta(s + 1),
                                   stage=s, **common)
            except Exception as e:  # noqa: BLE001 - re-raised with the stage index
                raise StageError(s, e) from e
            report.stages.append(cert)
            X = cert.child
            report.orbits.append(X)
    except Exception as e:
        if raise_errors:
            raise
        report.failure = {"error": type(getattr(e, "cause", e)).__name__, "message": str(e),
                          "stage": getattr(e, "stage", None),
                          "completed_orbits": len(report.orbits)}
    report.summary = summarize(fam, cover, report, config)
    return report


def summarize(fam: IfsFamily, cover: ExpandingCover, report: SequenceReport, config) -> dict:
    orbits = report.orbits
    c = 1.0 - math.log(cover.nu) / (2 * math.log(cover.L1))
    d = 2.0 * cover.H / math.log(cover.L1)
    exps = [o.exponent for o in orbits]
    gammas = [config.gamma(s) for s in range(1, len(orbits))]
    alephs = [1.0 - d * abs(e) for e in exps[:-1]]
    bank = TestFunctionBank(fam.k, config.cylinder_depth, config.fourier_modes)
    measures = [AtomicMeasure.from_orbit(o, fam) for o in orbits]
    gaps = [weak_star_gap(m1, m2, bank) for m1, m2 in zip(measures, measures[1:])]
    dens = [density_report(o, config.eta(i + 1), fam).to_dict() for i, o in enumerate(orbits)]
    prod = math.prod(alephs) if alephs else 1.0
    log_sum = math.fsum(math.log(x) for x in alephs) if all(x > 0 for x in alephs) else None
    shrink = all(abs(b) < abs(a) and b < 0 for a, b in zip(exps, exps[1:]))
    c_bound = all(c ** (i + 1) * exps[0] < e < 0 for i, e in enumerate(exps[1:]))
    stage_ok = [_stage_ok(cert) for cert in report.stages]
    boot_ok = [_stage_ok(cert) for cert in report.bootstrap]
    return {
        "c": c, "d": d,
        "periods": [o.period for o in orbits],
        "exponents": exps,
        "gammas": gammas, "gamma_partial_sum": math.fsum(gammas),
        "gamma_series_bound": config.gamma0 / (1.0 - config.gamma_ratio),
        "etas": [config.eta(i + 1) for i in range(len(orbits))],
        "alephs": alephs, "aleph_product": prod, "aleph_log_sum": log_sum,
        "aleph_product_identity": (log_sum is not None and _close(prod, math.exp(log_sum))
                                   and prod > 0) if alephs else True,
        "weak_star_gaps": gaps, "bank": bank.to_dict(),
        "gaps_decreasing": all(b < a for a, b in zip(gaps, gaps[1:])),
        "density": dens,
        "exponents_shrink": shrink, "c_power_bound": c_bound,
        "stage_certificates_ok": stage_ok, "bootstrap_certificates_ok": boot_ok,
        "all_ok": (report.failure is None and shrink and c_bound and all(stage_ok)
                   and all(boot_ok) and all(x > 0 for x in alephs)),
    }


__all__ = [
    "GoodApproxCertificate", "SequenceReport", "StageCertificate", "StageParams",
    "attracting_seed_search", "build_stage", "choose_r", "construct_next_orbit",
    "run_sequence", "select_stage_params", "smallest_M", "verify_good_approximation",
    "verify_stage_certificate",
]
