"""Adaptive dyadic step functions, Haar coefficients and the dyadic operators."""

import numpy as np

from dyadic_sharp import (DyadicCube, build_uniform, dyadic_hilbert, dyadic_maximal, haar_coefficients,
                          haar_reconstruct, square_function)

# a step function on the four quarters of [0, 1)
f = build_uniform(1, 2, [1.0, 1.0, -1.0, -1.0])
print("leaves:", f.leaves)
print("values:", f.values)

# only the root interval carries a Haar coefficient
for I, c in haar_coefficients(f).items():
    print(f"<f, h_{I}> = {c:+.3f}")

# the square function of a single Haar function is constant
print("S_d f:", square_function(f).values)

# H^d moves each coefficient to the two children with opposite signs
print("H^d f:", dyadic_hilbert(f).values)

# a spike: M^d f decays like 1/x away from it
spike = build_uniform(1, 3, [8.0, 0, 0, 0, 0, 0, 0, 0])
print("M^d spike:", dyadic_maximal(spike).values)

# adaptivity: refine only near the left end point
g = f.refine([DyadicCube.interval(10, 0)])
print("refined leaves:", g.size, "deepest level:", g.depth)

# Haar reconstruction is exact up to rounding
rng = np.random.default_rng(0)
h = build_uniform(1, 6, rng.normal(size=64))
print("reconstruction error:", haar_reconstruct(h).max_abs_diff(h))
