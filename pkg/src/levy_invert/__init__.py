"""Inversions, tempered-stable calculus and limit diagnostics for Levy measures."""

from .exceptions import (DivergenceError, LevyError, MomentClassError, QuadratureError,
                         UnsupportedError, ValidationError)
from .inversion import (beta_inversion, flatten_to_polar, kappa_ratio, log_inversion, rosinski_inversion,
                        sigma_prime, stable_rosinski)
from .limits import (ScalingFunctions, inversion_correspondence_check, long_time_norming,
                     sequence_convergence_check, short_time_limit_check, short_time_scaling_from_long)
from .measures import (AtomicMeasure, Cap, ID0Law, PolarMeasure, SphericalMeasure, StableMeasure,
                       SumMeasure, TemperedStableMeasure, char_exponent, integrate, moment,
                       moment_class_check, tail_mass)
from .radial import PointMass, PowerLaw, Table
from .regvar import estimate_rv_index, prop2_constant_check
from .serialization import load_law, load_measure, measure_from_dict, measure_to_dict
from .simulate import SimConfig, sample_increment
from .specfun import TemperingParams, g_tail, g_tail_inverse, k_const

__version__ = "0.1.0"
