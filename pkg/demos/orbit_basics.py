"""The attracting fixed point of the sine map and its fiber exponent, three ways."""
import math

from circleskew import GOLDEN, IfsFamily, PeriodicSeq, Word, birkhoff_estimate, rotation, sine_map
from circleskew.covers import find_expanding_cover, minimality_probe
from circleskew.skew import certified_attracting_orbit, find_fixed_points

fam = IfsFamily([rotation(GOLDEN), sine_map(0.0, 1.0 / (4.0 * math.pi))])

print("fixed points of f_2:", [(round(x, 6), round(d, 6)) for x, d in find_fixed_points(fam, [2])])
X = certified_attracting_orbit(fam, Word([2]), 0.5)
print(f"orbit through 0.5: period {X.period}, exponent {X.exponent:.15f} (log 1/2 = {math.log(0.5):.15f})")
print("contraction certificate:", X.contraction_cert)
print("Birkhoff average from x = 0.1 over 10^4 steps:",
      birkhoff_estimate(fam, PeriodicSeq(Word([2])), 0.1, 10_000))

print("\nminimal at resolution 0.02:", minimality_probe(fam, 0.02, 200))
cover = find_expanding_cover(fam, 1.1, 40)
for e in cover.entries:
    print(f"  word {e.word.to_string():>4}  arc [{e.arc.start:.4f}, +{e.arc.length:.4f}]  "
          f"T' in [{e.min_deriv:.4f}, {e.sup_deriv:.4f}]")
print(f"Lebesgue number {cover.lebesgue_number:.4f}, L1 = {cover.L1:.5f}, H = {cover.H}")
