"""Extended-precision tools for analytic function spaces on the unit disc.

Evaluate and normalize polynomials and lacunary series, compute explicit
point-evaluation constants, build certified lacunary series that blow up
near every boundary point, and run grid experiments on balls around dense
polynomials.
"""

from .errors import (DiscSpacesError, InfeasibleError, NotApplicableError, NotFoundError,
                     PreconditionError, RangeError, ToleranceNotMet)
from .series import (DEFAULT_PRECISION, DiscPoint, LacunarySeries, LacunaryTerm, PowerSeries,
                     circle_profile, derivative, evaluate, evaluate_lacunary, grid_values,
                     radial_power)
from .spaces import NormReport, QuadratureConfig, SpaceSpec, norm, norm_report, s_nu_norm
from .bounds import (EvalBound, c_k_over_disc, c_of_r, c_of_r_normalized, kernel_bound,
                     kernel_norm, kernel_norm_polylog, l_of_r, l1_bound, verify_l1_bound)
from .construction import (BuildConfig, LacunaryWitness, VerificationReport, WeightFunction,
                           WitnessStep, build, dump_witness, load_witness,
                           min_modulus_lower_bound, membership_tail, verify)
from .baire import (BaireBall, BoundaryGrid, MeasureEstimate, a_set_measure, dyadic_polynomials,
                    find_r_M, h_set_measure, make_ball, run_experiment, sample_ball)

__version__ = "0.1.0"
