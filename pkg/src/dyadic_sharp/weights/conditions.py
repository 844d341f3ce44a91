"""Weights and the one- and two-weight conditions, as suprema over tree nodes."""

from __future__ import annotations

import numpy as np

from ..core import StepFunction, common_refinement
from ..core.haar import _require_line
from .young import YoungFunction, node_luxemburg


class Weight(StepFunction):
    """A step function with strictly positive values."""

    def __init__(self, dim, levels, coords, values, *, check: bool = True):
        super().__init__(dim, levels, coords, values, check=check)
        if np.any(self.values <= 0):
            raise ValueError("weights must be strictly positive on every leaf")

    @classmethod
    def of(cls, f: StepFunction) -> "Weight":
        if isinstance(f, Weight):
            return f
        return cls(f.dim, f.levels, f.coords, f.values, check=False)


def _dual(p: float) -> float:
    return p / (p - 1.0)


def ap_constant(w: StepFunction, p: float) -> float:
    """[w]_{A_p}: max over tree nodes of (avg w)(avg w^{1-p'})^{p-1}."""
    if not p > 1:
        raise ValueError(f"A_p needs p > 1, got {p}")
    w = Weight.of(w)
    sigma = w.values ** (1.0 - _dual(p))
    vals = w.node_averages() * w.node_averages(sigma) ** (p - 1.0)
    return float(vals.max())


def bump_constant(u: StepFunction, v: StepFunction, p: float, A: YoungFunction, B: YoungFunction,
                  u_exponent: float | None = None, u_root: float = 1.0) -> float:
    """max over nodes of ||u^{1/p}||_{A,Q} ||v^{-1/p}||_{B,Q}.

    `u_exponent` and `u_root` give the variant ||u^e||_{A,Q}^{root} used for
    square functions (e = 2/p, root = 1/2).
    """
    if not p > 1:
        raise ValueError(f"bump condition needs p > 1, got {p}")
    u, v = common_refinement(Weight.of(u), Weight.of(v))
    e = 1.0 / p if u_exponent is None else u_exponent
    nu = node_luxemburg(A, u, u.values ** e) ** u_root
    nv = node_luxemburg(B, v, v.values ** (-1.0 / p))
    return float((nu * nv).max())


def weighted_lp_norm(f: StepFunction, p: float, w: StepFunction | None = None) -> float:
    """(int |f|^p w)^{1/p}; Lebesgue measure when w is None."""
    if not p >= 1:
        raise ValueError(f"L^p norm needs p >= 1, got {p}")
    if w is None:
        return f.lp_norm(p)
    f, w = common_refinement(f, w)
    return float(np.dot(np.abs(f.values) ** p * w.values, f.measures) ** (1.0 / p))


def bmo_dyadic_norm(b: StepFunction) -> float:
    """max over intervals of (avg_I |b - b_I|^2)^{1/2}."""
    _require_line(b.dim)
    t = b.tree
    avg = b.node_averages()
    dev = (b.values[t.pair_leaf] - avg[t.pair_node]) ** 2 * b.measures[t.pair_leaf]
    var = np.bincount(t.pair_node, weights=dev, minlength=t.size) / t.measure
    return float(np.sqrt(var.max()))


def geometric_cells(depth: int) -> tuple[np.ndarray, np.ndarray]:
    """Leaves [2^-k-1, 2^-k) for k < depth plus [0, 2^-depth), as (levels, coords)."""
    if depth < 1:
        raise ValueError(f"depth must be >= 1, got {depth}")
    levels = np.concatenate(([depth], np.arange(1, depth + 1)))
    coords = np.concatenate(([0], np.ones(depth, dtype=np.int64))).reshape(-1, 1)
    return levels, coords


def power_function(gamma: float, depth: int = 40) -> StepFunction:
    """Exact cell averages of x^gamma on the geometric partition toward 0."""
    if not gamma > -1:
        raise ValueError(f"x^gamma is not integrable near 0 for gamma = {gamma}")
    levels, coords = geometric_cells(depth)
    a = coords[:, 0] * np.ldexp(1.0, -levels)
    b = (coords[:, 0] + 1) * np.ldexp(1.0, -levels)
    g1 = gamma + 1.0
    vals = (b ** g1 - a ** g1) / (g1 * (b - a))
    return StepFunction(1, levels, coords, vals)


def power_weight(gamma: float, depth: int = 40) -> Weight:
    """The weight x^gamma, step-approximated by power_function."""
    return Weight.of(power_function(gamma, depth))
