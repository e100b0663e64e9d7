"""Hitting-time simulation and limit-law verification for one-dimensional
random walks whose jumps are attracted to a stable law."""

from .errors import RefinementError, StatisticalRefusal, ValidationError
from .jump_models import (JumpModel, NormingSequence, cauchy_standard,
                          char_fn, char_fn_modulus, cramer_margin,
                          escape_probability, gaussian_unit,
                          limit_density_at_zero, parse_model,
                          recurrence_constant, sample_jump, sample_jumps,
                          symmetric_stable, uniform_sym, zero_atom_mixture)
from .limit_laws import (LimitLawSpec, VolterraSolution, cdf_E_over_absN,
                         cdf_alpha1, cdf_limit_via_volterra, laplace_check,
                         limit_cdf, sample_limit_W, sample_limit_Y,
                         sample_one_sided_stable, solve_volterra,
                         transform_constant)
from .normalization import NormalizerG
from .stats import (EmpiricalCdf, KsReport, SlopeReport, build_ecdf,
                    dkw_halfwidth, ks_truncated, loglog_slope)
from .walk_engine import (HittingSample, InitialDistribution, SampleSet,
                          SlopeInput, WalkConfig, escape_probability_for,
                          gaussian_shift, hitting_time, local_limit_probe,
                          parse_initial, point_mass, rate_experiment,
                          run_batch, uniform_interval)

__version__ = "0.1.0"
