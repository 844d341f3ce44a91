from .maximal import (VectorStepFunction, dyadic_maximal, orlicz_maximal, rubio_de_francia,
                      vector_maximal, weighted_dyadic_maximal)
from .shifts import (GeneralizedShiftSpec, HaarShiftSpec, dyadic_hilbert, generalized_haar_shift,
                     haar_multiplier, haar_shift, maximal_haar_shift, paraproduct, truncated_shift)
from .square import square_function, square_function_squared

__all__ = [
    "GeneralizedShiftSpec", "HaarShiftSpec", "VectorStepFunction", "dyadic_hilbert", "dyadic_maximal",
    "generalized_haar_shift", "haar_multiplier", "haar_shift", "maximal_haar_shift", "orlicz_maximal",
    "paraproduct", "rubio_de_francia", "square_function", "square_function_squared", "truncated_shift",
    "vector_maximal", "weighted_dyadic_maximal",
]
