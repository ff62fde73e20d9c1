"""fiberdyn: numerical thermodynamic formalism for skew product systems.

Fiber Bowen metrics, separated-set pressure, Birkhoff level-set counting,
Legendre-transform multifractal spectra, Katok entropy estimation and a
constructive fiber-specification shadowing engine for affine hyperbolic
fibers, validated against closed-form oracles at desk scale.
"""

__version__ = "0.1.0"

from .drivers import BasePoint, DrivingSystem, base_distance, base_step, sturmian_symbol
from .errors import (BackwardNotInvertible, BudgetExceeded, ConfigError,
                     EmptySample, EpsilonTooLarge, FiberdynError, NotAffine,
                     NotHyperbolic, PointsTooFar, SpacingTooSmall)
from .systems import (ExpansivityReport, FourierMap, HyperbolicFrame, SkewSystem,
                      bowen_ball_area, bowen_distance, expansivity_constants,
                      fiber_step, hyperbolic_frame, load_system)
from .observables import Observable, birkhoff_sum, birkhoff_sums
from .counting import (CountTable, Restriction, SeparatedSet, cylinder_counts,
                       deviation_set_membership, max_separated_set,
                       min_spanning_count, periodic_cardinality, periodic_points)
from .pressure import (LevelSetRate, PressureCurve, PressureEstimate,
                       SpectrumCurve, legendre_conjugate, level_set_rate,
                       partition_sum, pressure_curve, pressure_estimate,
                       spectrum_crosscheck)
from .shadowing import (AffineManifold, OmegaSpecification, ShadowResult,
                        local_product, mixing_gap, random_specification,
                        shadow, verify_shadowing)
from .katok import KatokEstimate, MeasureSampler, katok_entropy_estimate
