"""Exact dyadic harmonic analysis on adaptive step functions."""

from .core import (DyadicCube, StepFunction, build_uniform, common_refinement, cube_average,
                   haar_coefficient, haar_coefficients, haar_function, haar_reconstruct, haar_synthesize)
from .operators import (GeneralizedShiftSpec, HaarShiftSpec, VectorStepFunction, dyadic_hilbert,
                        dyadic_maximal, generalized_haar_shift, haar_multiplier, haar_shift,
                        maximal_haar_shift, orlicz_maximal, paraproduct, rubio_de_francia,
                        square_function, truncated_shift, vector_maximal, weighted_dyadic_maximal)
from .oscillation import (LernerDecomposition, lerner_decompose, local_mean_oscillation,
                          local_sharp_maximal, median, median_oscillation_bounds, rearrangement_value,
                          verify_lerner_bound)
from .weights import (Weight, YoungFunction, ap_constant, associate, bmo_dyadic_norm, bp_classify,
                      bump_constant, luxemburg_norm, power_weight, weighted_lp_norm)

__version__ = "0.1.0"
