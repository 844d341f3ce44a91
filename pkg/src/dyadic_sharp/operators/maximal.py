"""Dyadic maximal operators and the Rubio de Francia iteration."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..core import DyadicCube, StepFunction
from ..core.step import _refine_many
from ..weights.young import YoungFunction, node_luxemburg


@dataclass(frozen=True)
class VectorStepFunction:
    """A finite sequence of step functions on the same root cube."""

    components: tuple[StepFunction, ...]

    def __init__(self, components: Sequence[StepFunction]):
        comps = tuple(components)
        if not comps:
            raise ValueError("a vector step function needs at least one component")
        if any(c.dim != comps[0].dim for c in comps):
            raise ValueError("components must share the dimension")
        object.__setattr__(self, "components", comps)

    @property
    def dim(self) -> int:
        return self.components[0].dim

    def __len__(self):
        return len(self.components)

    def aligned(self) -> list[StepFunction]:
        return _refine_many(list(self.components))

    def lq_norm(self, q: float) -> StepFunction:
        """Pointwise (sum_i |f_i|^q)^{1/q}."""
        parts = self.aligned()
        vals = np.sum([np.abs(p.values) ** q for p in parts], axis=0) ** (1.0 / q)
        return parts[0].with_values(vals)

    def restricted_to(self, Q: DyadicCube) -> "VectorStepFunction":
        return VectorStepFunction([c.restricted_to(Q) for c in self.components])


def dyadic_maximal(f: StepFunction) -> StepFunction:
    """M^d f: per leaf, the largest average of |f| over dyadic cubes containing it."""
    avg = f.node_averages(np.abs(f.values))
    return f.with_values(f.tree.chain_max(avg))


def weighted_dyadic_maximal(sigma: StepFunction, f: StepFunction) -> StepFunction:
    """M^d_sigma f = sup over Q containing x of sigma(Q)^{-1} int_Q |f| sigma."""
    sigma, f = _refine_many([sigma, f])
    if np.any(sigma.values <= 0):
        raise ValueError("sigma must be strictly positive on every leaf")
    t = f.tree
    num = t.node_sums(np.abs(f.values) * sigma.values, f.measures)
    den = t.node_sums(sigma.values, f.measures)
    return f.with_values(t.chain_max(num / den))


def vector_maximal(q: float, F: VectorStepFunction | Sequence[StepFunction]) -> StepFunction:
    """(sum_i (M^d f_i)^q)^{1/q}."""
    if not 1 < q < np.inf:
        raise ValueError(f"q must lie in (1, inf), got {q}")
    if not isinstance(F, VectorStepFunction):
        F = VectorStepFunction(F)
    parts = F.aligned()
    vals = np.sum([dyadic_maximal(p).values ** q for p in parts], axis=0) ** (1.0 / q)
    return parts[0].with_values(vals)


def orlicz_maximal(A: YoungFunction, f: StepFunction) -> StepFunction:
    """M_A f: per leaf, the largest Luxemburg norm ||f||_{A,Q} along its dyadic ancestors."""
    if not isinstance(A, YoungFunction):
        raise TypeError("orlicz_maximal expects a YoungFunction")
    norms = node_luxemburg(A, f)
    return f.with_values(f.tree.chain_max(norms))


def rubio_de_francia(h: StepFunction, s: float, K: int) -> StepFunction:
    """sum_{k<K} (M^d)^k h / (2 s')^k, with the L^s bound s' standing in for ||M^d||."""
    if not s > 1:
        raise ValueError(f"s must exceed 1, got {s}")
    if K < 1:
        raise ValueError(f"truncation length must be >= 1, got {K}")
    if np.any(h.values < 0):
        raise ValueError("the iteration needs h >= 0")
    ratio = 1.0 / (2.0 * s / (s - 1.0))
    term = h
    total = h.values.copy()
    for k in range(1, K):
        term = dyadic_maximal(term)
        total += term.values * ratio ** k
    return h.with_values(total)
