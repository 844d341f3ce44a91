from .cube import DyadicCube
from .step import StepFunction, build_uniform, common_refinement, cube_average
from .haar import haar_coefficient, haar_coefficients, haar_function, haar_reconstruct, haar_synthesize

__all__ = [
    "DyadicCube",
    "StepFunction",
    "build_uniform",
    "common_refinement",
    "cube_average",
    "haar_coefficient",
    "haar_coefficients",
    "haar_function",
    "haar_reconstruct",
    "haar_synthesize",
]
