"""Orlicz bumps: associates, the B_p test, and a two-weight check across depths."""

import numpy as np

from dyadic_sharp import YoungFunction, associate, bp_classify
from dyadic_sharp.experiments import log_bump_pair, two_weight_singular_check

# A(t) = t^2 log(e + t)^{3/2}; its associate behaves like t^2 log(e + t)^{-3/2}
A = YoungFunction.logbump(2.0, 1.5)
Abar = associate(A)
t = np.array([0.5, 2.0, 10.0, 100.0])
print("A(t)    :", np.round(A(t), 3))
print("Abar(t) :", np.round(Abar(t), 3))
print("Abar asymptotic class:", Abar.asymptotic)

# B_2 membership hinges on the log power: -3/2 < -1 converges, -1/2 does not
print("Abar in B_2:", bp_classify(Abar, 2.0))
print("associate of t^2 log^{1/2} in B_2:", bp_classify(associate(YoungFunction.logbump(2.0, 0.5)), 2.0))

# the two-weight ratios stay flat as the step approximation is refined
A, B = log_bump_pair("hilbert_d", 3.0, delta=0.5)
rep = two_weight_singular_check(None, 3.0, A, B, "hilbert_d", depths=range(6, 10), n_random=10)
for d, b, r in zip(rep.depths, rep.bump_constants, rep.ratios):
    print(f"depth {d}: bump constant {b:.3f}, ||H f||_{{L^3(u)}} / ||f||_{{L^3(v)}} = {r:.3f}")
print("blow-up flagged:", rep.blow_up)
