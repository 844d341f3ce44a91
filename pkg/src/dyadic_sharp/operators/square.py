"""The dyadic square function."""

from __future__ import annotations

import numpy as np

from ..core import DyadicCube, StepFunction


def _jump_squares(f: StepFunction) -> np.ndarray:
    """(f_Q - f_parent(Q))^2 for every node, zero at the root."""
    t = f.tree
    avg = f.node_averages()
    jumps = np.zeros(t.size)
    kids = t.parent >= 0
    jumps[kids] = (avg[kids] - avg[t.parent[kids]]) ** 2
    return jumps


def square_function_squared(f: StepFunction, within: DyadicCube | None = None) -> StepFunction:
    """sum_Q (f_Q - f_parent(Q))^2 chi_Q over Q strictly inside `within` (default: the root)."""
    g = f if within is None else f.refine([within])
    t = g.tree
    jumps = _jump_squares(g)
    if within is not None:
        inside = t.subtree_mask(t.index(within))
        inside[t.index(within)] = False
        jumps = np.where(inside, jumps, 0.0)
    return g.with_values(t.chain_sum(jumps[t.pair_node]))


def square_function(f: StepFunction) -> StepFunction:
    """S_d f = (sum over Q strictly inside the root of (f_Q - f_parent(Q))^2 chi_Q)^{1/2}."""
    return square_function_squared(f).map(np.sqrt)
