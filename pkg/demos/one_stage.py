"""Build one stage from the period-1 orbit and re-check its certificate."""
import math
import time

from circleskew import GOLDEN, IfsFamily, Word, rotation, sine_map
from circleskew.covers import find_expanding_cover
from circleskew.construction import build_stage, verify_stage_certificate
from circleskew.skew import certified_attracting_orbit

fam = IfsFamily([rotation(GOLDEN), sine_map(0.0, 1.0 / (4.0 * math.pi))])
cover = find_expanding_cover(fam, 1.1, 40)
X = certified_attracting_orbit(fam, Word([2]), 0.5)

t0 = time.perf_counter()
# the period-1 orbit contracts too strongly for a positive mass bound, so this
# stage runs as an exponent-shrinking preliminary stage
cert = build_stage(fam, cover, X, gamma=0.25, eta=0.5, allow_negative_aleph=True)
p = cert.params
print(f"built in {time.perf_counter() - t0:.2f} s")
print(f"n = {p.n}, r = {p.r}, K = {p.K}, M = {p.M}, |J| = {p.J.length:.3g}, delta = {p.delta:.3g}")
print(f"alpha- < alpha < alpha+: {p.alpha_minus:.4g} < {p.alpha:.4g} < {p.alpha_plus:.4g}")
print(f"child period {cert.child.period}: {cert.kappa0.to_string()[:20]}... + "
      f"{len(cert.kappa1)} chase symbols + {len(cert.kappa2)} landing symbols")
print(f"exponents: parent {X.exponent:.5f}, child {cert.child.exponent:.5f}, "
      f"lower bound c * parent = {p.c * X.exponent:.5f}")
ga = cert.good_approx
print(f"good approximation: gamma_obs {ga.gamma_observed:.3g} < {ga.gamma}, "
      f"mass {ga.aleph_observed:.4f}, preimages per point {ga.preimage_count}")
for name, ok in verify_stage_certificate(cert, fam).items():
    print(f"  {name:32s} {ok}")
