"""How operator norms grow with [w]_{A_p}: sweeps over power weights, and the p^{1/2} example."""

from dyadic_sharp.experiments import extremal_sd, sharpness_sweep, theorem_exponent

eps = [2.0 ** -k for k in range(2, 8)]

# Buckley's power weights w = x^{(1-eps)(p-1)} with f = x^{-1+eps}; slopes are lower estimates
for op, p in [("maximal", 2.0), ("maximal", 3.0), ("hilbert_d", 2.0), ("square", 3.0), ("vmaximal", 3.0)]:
    res = sharpness_sweep(op, p, eps, depth=40)
    print(f"{op:10s} p={p:g}: slope {res.slope:.3f}  (theorem exponent {theorem_exponent(op, p):.3f})")

# at finite depth the maximal-function slope for p=2 lags behind 1: the truncated weights saturate
res = sharpness_sweep("maximal", 2.0, eps, depth=40)
print(res.to_csv())

# the square function example: ||S_d f||_p / ||f||_p grows like p^{1/2} for large p
rep = extremal_sd(20)
for p, a, b in zip(rep.ps, rep.f_norms, rep.sd_norms):
    print(f"p={p:4g}: ||f||_p={a:.4f}  ||S_d f||_p={b:.4f}  ratio={b / a:.3f}")
print(f"log-log slope over these p: {rep.slope:.3f}")
