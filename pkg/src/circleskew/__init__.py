"""Periodic orbits of skew-products over circle IFSs with vanishing fiber exponents."""
from .circle import (GOLDEN, Arc, CircleMap, arc_image, canon, circle_dist, compose,
                     map_eval_deriv, rotation, sine_map)
from .conjugacy import ConjugacyMap, check_exponent_invariance, conjugate_family
from .covers import (ExpandingCover, LandingTable, find_expanding_cover, lebesgue_number,
                     minimality_probe, tour_and_go_home)
from .errors import *  # noqa: F401,F403
from .construction import (GoodApproxCertificate, StageCertificate, StageParams, build_stage,
                           construct_next_orbit, run_sequence, select_stage_params,
                           verify_good_approximation, verify_stage_certificate)
from .measures import (AtomicMeasure, TestFunctionBank, density_report,
                       exponent_continuity_check, integrate, weak_star_gap)
from .skew import (IfsFamily, PeriodicOrbit, birkhoff_estimate, fixed_point_in_interval,
                   periodic_orbit_from_word, word_eval_deriv)
from .symbolic import (Cylinder, PeriodicSeq, Word, product_metric, seq_metric, word_concat,
                       word_power)

__version__ = "0.1.0"
