"""One test per acceptance criterion; each prints a PASS/FAIL line."""
import math
import time

import numpy as np
import pytest

from circleskew import (GOLDEN, IfsFamily, PeriodicSeq, Word, birkhoff_estimate, rotation,
                        word_eval_deriv)
from circleskew.cli import main
from circleskew.config import RunConfig
from circleskew.conjugacy import ConjugacyMap, check_exponent_invariance
from circleskew.covers import find_expanding_cover, minimality_probe, verify_cover
from circleskew.errors import NoCoverFound
from circleskew.construction import build_stage, run_sequence, verify_good_approximation, verify_stage_certificate
from circleskew.measures import density_report
from circleskew.skew import certified_attracting_orbit, find_fixed_points
from circleskew.circle import sine_map
from conftest import ACCEPTANCE_LINES, DEMO_CONFIG


def report(n, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def random_certified_orbits(fam, count, max_period, seed):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        w = Word(rng.integers(1, fam.k + 1, int(rng.integers(1, max_period + 1))))
        attracting = [x for x, d in find_fixed_points(fam, w) if d < 1]
        if attracting:
            out.append(certified_attracting_orbit(fam, w, attracting[0]))
    return out


def test_criterion_1_exponent_identity(fam):
    t0 = time.perf_counter()
    _, d, _ = word_eval_deriv(fam, Word([2]), 0.5)
    chain = math.log(d)
    birk = birkhoff_estimate(fam, PeriodicSeq(Word([2])), 0.5, 10_000)
    dt = time.perf_counter() - t0
    e1, e2 = abs(chain - math.log(0.5)), abs(birk - math.log(0.5))
    report(1, e1 <= 1e-12 and e2 <= 1e-8 and dt < 1.0,
           f"|chain - log 1/2| = {e1:.1e}, |birkhoff - log 1/2| = {e2:.1e}, {dt:.3f} s")


def test_criterion_2_three_way_agreement(fam):
    t0 = time.perf_counter()
    worst = 0.0
    orbits = random_certified_orbits(fam, 50, 50, seed=2)
    for X in orbits:
        _, d, _ = word_eval_deriv(fam, X.word, X.fiber_point)
        chain = math.log(d) / X.period
        birk = birkhoff_estimate(fam, X.sequence, X.fiber_point, 1000 * X.period)
        worst = max(worst, abs(chain - X.exponent), abs(birk - X.exponent))
    dt = time.perf_counter() - t0
    report(2, len(orbits) == 50 and worst <= 1e-9 and dt < 30,
           f"50 orbits (periods {min(o.period for o in orbits)}..{max(o.period for o in orbits)}), "
           f"max disagreement {worst:.1e}, {dt:.1f} s")


def test_criterion_3_hypothesis_certificates(fam, rotations):
    t0 = time.perf_counter()
    minimal = minimality_probe(fam, 0.02, 200)
    cover = find_expanding_cover(fam, 1.1, 40)
    passed = verify_cover(fam, cover, np.random.default_rng(3).random(10_000))
    try:
        find_expanding_cover(rotations, 1.1, 40)
        rot_ok = False
    except NoCoverFound:
        rot_ok = True
    dt = time.perf_counter() - t0
    report(3, minimal and passed.all() and rot_ok and dt < 120,
           f"minimal={minimal}, cover of {len(cover.entries)} words re-verified at "
           f"{int(passed.sum())}/10000 points, rotations -> NoCoverFound={rot_ok}, {dt:.1f} s")


def test_criterion_4_one_stage(fam, cover, seed):
    t0 = time.perf_counter()
    cert = build_stage(fam, cover, seed, 0.25, 0.5, allow_negative_aleph=True)
    checks = verify_stage_certificate(cert, fam, slack=1e-9, recompute_contraction=True)
    p = cert.params
    lam, lam2 = seed.exponent, cert.child.exponent
    bounds = p.c * lam < lam2 < 0
    counts = cert.good_approx.fiber_counts_equal and cert.good_approx.preimage_count == p.n - 2 * p.M - 1
    dt = time.perf_counter() - t0
    failed = [k for k, v in checks.items() if not v]
    report(4, not failed and bounds and counts and dt < 300,
           f"P'={cert.child.period}, c*lambda={p.c * lam:.4f} < lambda'={lam2:.4f} < 0, "
           f"preimages {cert.good_approx.preimage_count} = n-2M-1 = {p.n - 2 * p.M - 1}, "
           f"{len(checks)} checks, failed={failed}, {dt:.1f} s")


def test_criterion_5_trivial_good_approximation(fam, seed):
    t0 = time.perf_counter()
    ga = verify_good_approximation(fam, seed, seed, 1e-6, 1.0)
    dt = time.perf_counter() - t0
    report(5, ga.verdicts == (True, True, True) and ga.gamma_observed == 0.0
           and ga.aleph_observed == 1.0 and dt < 1.0,
           f"verdicts={ga.verdicts}, gamma_obs={ga.gamma_observed}, aleph_obs={ga.aleph_observed}")


def test_criterion_6_two_stage_run(fam):
    t0 = time.perf_counter()
    raw = RunConfig.from_file(DEMO_CONFIG).to_dict()
    raw["stages"] = 2
    cfg = RunConfig.from_dict(raw)
    rep = run_sequence(cfg)
    s = rep.summary
    X1, X2 = rep.orbits
    dens = density_report(X2, cfg.eta(2), fam)
    dt = time.perf_counter() - t0
    ok = (abs(X2.exponent) < abs(X1.exponent) and X2.exponent < 0 and s["aleph_product"] > 0
          and s["gamma_partial_sum"] < cfg.gamma0 / (1 - cfg.gamma_ratio) and dens.eta_dense
          and dt < 900)
    report(6, ok, f"lambda1={X1.exponent:.5f}, lambda2={X2.exponent:.5f}, "
           f"prod aleph={s['aleph_product']:.4f}, sum gamma={s['gamma_partial_sum']} < "
           f"{cfg.gamma0 / (1 - cfg.gamma_ratio)}, X2 hits {dens.cells_hit}/{dens.cells_total} "
           f"cells at eta2={cfg.eta(2)}, {dt:.1f} s")


def test_criterion_7_weak_star_gaps(demo_run):
    g = demo_run.summary["weak_star_gaps"]
    report(7, len(g) == 2 and g[1] < g[0],
           f"gap(X1,X2)={g[0]:.5f}, gap(X2,X3)={g[1]:.5f} "
           f"(three stages, periods {demo_run.summary['periods']})")


def test_criterion_8_conjugacy_invariance(fam):
    t0 = time.perf_counter()
    orbits = random_certified_orbits(fam, 20, 50, seed=8)
    phis = [rotation(0.0), rotation(0.3), sine_map(0.0, 1.0 / (8.0 * math.pi))]
    worst = 0.0
    for phi in phis:
        for X in orbits:
            lam, lam_hat = check_exponent_invariance(fam, ConjugacyMap(phi), X)
            worst = max(worst, abs(lam - lam_hat))
    dt = time.perf_counter() - t0
    report(8, worst <= 1e-9 and dt < 60,
           f"20 orbits x 3 conjugacies, max |lambda - lambda_hat| = {worst:.1e}, {dt:.1f} s")


def test_criterion_9_determinism(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    codes = [main(["build-sequence", "--config", str(DEMO_CONFIG), "--out", str(d)]) for d in (a, b)]
    files = sorted(p.relative_to(a) for p in a.rglob("*") if p.is_file())
    same = all((a / f).read_bytes() == (b / f).read_bytes() for f in files)
    same = same and files == sorted(p.relative_to(b) for p in b.rglob("*") if p.is_file())
    report(9, codes == [0, 0] and same and len(files) > 0,
           f"exit codes {codes}, {len(files)} files byte-identical={same}")
