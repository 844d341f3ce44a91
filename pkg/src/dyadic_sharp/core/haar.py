"""The canonical Haar system on dyadic intervals of [0, 1)."""

from __future__ import annotations

from typing import Mapping

import numpy as np

from .cube import DyadicCube
from .step import StepFunction


def _require_line(dim: int):
    if dim != 1:
        raise ValueError(f"the canonical Haar system is defined for n = 1 only (got n = {dim})")


def haar_function(I: DyadicCube) -> StepFunction:
    """h_I = |I|^{-1/2} (chi_{I-} - chi_{I+})."""
    _require_line(I.dim)
    amp = I.measure ** -0.5
    return StepFunction.indicator(I.left, amp) + StepFunction.indicator(I.right, -amp)


def haar_coefficient(f: StepFunction, I: DyadicCube) -> float:
    """<f, h_I>; zero whenever f is constant on I."""
    _require_line(f.dim)
    _require_line(I.dim)
    return 0.5 * np.sqrt(I.measure) * (f.average(I.left) - f.average(I.right))


def node_haar_coefficients(f: StepFunction) -> np.ndarray:
    """<f, h_I> for every node I of f's tree (zero on leaves)."""
    _require_line(f.dim)
    t = f.tree
    avg = f.node_averages()
    left = np.zeros(t.size)
    right = np.zeros(t.size)
    kids = np.nonzero(t.parent >= 0)[0]
    is_left = t.child_bits[kids, 0] == 0
    left[t.parent[kids[is_left]]] = avg[kids[is_left]]
    right[t.parent[kids[~is_left]]] = avg[kids[~is_left]]
    coef = 0.5 * np.sqrt(t.measure) * (left - right)
    coef[t.is_leaf] = 0.0
    return coef


def haar_coefficients(f: StepFunction) -> dict[DyadicCube, float]:
    """All possibly nonzero Haar coefficients of f, keyed by interval."""
    coef = node_haar_coefficients(f)
    t = f.tree
    return {t.cube(i): float(coef[i]) for i in np.nonzero(~t.is_leaf)[0]}


def synthesize_on(f: StepFunction, node_coef: np.ndarray) -> np.ndarray:
    """Leaf values of sum_I c_I h_I, for c given per node of f's tree.

    Coefficients on leaves must vanish; refine first when they do not.
    """
    t = f.tree
    pn = t.pair_node
    nxt = np.empty_like(pn)
    nxt[:-1] = pn[1:]
    nxt[-1] = pn[-1]
    sign = np.where(t.child_bits[nxt, 0] == 0, 1.0, -1.0)
    vals = node_coef[pn] * sign / np.sqrt(t.measure[pn])
    ends = np.concatenate((t.leaf_starts[1:], [len(pn)])) - 1
    vals[ends] = 0.0
    return t.chain_sum(vals)


def haar_synthesize(coefs: Mapping[DyadicCube, float], mean: float = 0.0,
                    base: StepFunction | None = None) -> StepFunction:
    """mean + sum_I c_I h_I as an exact step function.

    The result lives on the coarsest refinement of `base` (or of the trivial
    partition) on which every h_I with c_I != 0 is constant on leaves.
    """
    active = [I for I, c in coefs.items() if c != 0.0]
    for I in active:
        _require_line(I.dim)
    g = base if base is not None else StepFunction.constant(0.0)
    _require_line(g.dim)
    g = make_internal(g, active)
    t = g.tree
    node_coef = np.zeros(t.size)
    for I in active:
        node_coef[t.index(I)] += coefs[I]
    return g.with_values(mean + synthesize_on(g, node_coef))


def make_internal(g: StepFunction, cubes) -> StepFunction:
    """Refine g so that every given cube is an internal node."""
    t = g.tree
    deep = [I for I in cubes if t.index(I) is None]
    if deep:
        g = g.refine(deep)
        t = g.tree
    leaf_mask = np.zeros(g.size, dtype=bool)
    for I in cubes:
        i = t.index(I)
        if t.is_leaf[i]:
            leaf_mask[t.node_leaf[i]] = True
    return g.split(leaf_mask)


def haar_reconstruct(f: StepFunction, Q0: DyadicCube | None = None) -> StepFunction:
    """f_{Q0} chi_{Q0} + sum over I in Delta(Q0) of <f, h_I> h_I; equals f chi_{Q0}."""
    _require_line(f.dim)
    if Q0 is None:
        Q0 = DyadicCube.root(1)
    coefs = {I: c for I, c in haar_coefficients(f).items() if Q0.contains(I)}
    base = f.refine([Q0])
    t = base.tree
    node_coef = np.zeros(t.size)
    for I, c in coefs.items():
        node_coef[t.index(I)] = c
    vals = synthesize_on(base, node_coef)
    inside = np.zeros(base.size, dtype=bool)
    i, j = base._range(Q0)
    inside[i:j] = True
    # synthesize_on also picks up coefficients above Q0 if any were set; none are
    vals = np.where(inside, vals + f.average(Q0), 0.0)
    return base.with_values(vals)
