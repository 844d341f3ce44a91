"""Rearrangements, medians and local mean oscillation on dyadic cubes.

All quantities are computed from the finite list of leaf values inside a
cube.  Measures are handled as integers in units of the finest cell, so the
strict inequality |{|f| > a}| < t in the rearrangement is decided exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .core.cube import DyadicCube
from .core.step import StepFunction


def _cells(f: StepFunction, Q: DyadicCube | None):
    if Q is None:
        Q = DyadicCube.root(f.dim)
    vals, units, total = f.restrict_units(Q)
    return vals, units, total, Q


def _max_excluded(t_units: float) -> int:
    """Largest integer measure that is still < t_units."""
    return math.ceil(t_units) - 1


def _rearrangement(absvals: np.ndarray, units: np.ndarray, t_units: float) -> float:
    """inf{a > 0 : sum(units[absvals > a]) < t_units}.

    The distribution function only jumps at the values themselves, so the
    infimum is attained among 0 and the distinct values.
    """
    order = np.argsort(absvals, kind="stable")
    a, u = absvals[order], units[order]
    levels = np.unique(np.concatenate(([0.0], a)))
    upto = np.concatenate(([0], np.cumsum(u)))[np.searchsorted(a, levels, side="right")]
    excluded = upto[-1] - upto
    ok = excluded <= _max_excluded(t_units)
    return float(levels[np.argmax(ok)])


def rearrangement_value(f: StepFunction, Q: DyadicCube | None, t: float) -> float:
    """(f chi_Q)^*(t) = inf{a > 0 : |{x in Q : |f(x)| > a}| < t}."""
    vals, units, total, Q = _cells(f, Q)
    if not 0 < t <= Q.measure:
        raise ValueError(f"t must lie in (0, |Q|] = (0, {Q.measure}], got {t}")
    t_units = t / Q.measure * total
    return _rearrangement(np.abs(vals), units, t_units)


def weak_lp_norm(f: StepFunction, Q: DyadicCube | None, p: float) -> float:
    """||f||_{L^{p,oo}(Q, |Q|^{-1} dx)} = sup_a a (|{x in Q: |f| > a}| / |Q|)^{1/p}."""
    vals, units, total, Q = _cells(f, Q)
    a = np.abs(vals)
    order = np.argsort(-a, kind="stable")
    a, u = a[order], units[order]
    # just below a_k the superlevel set is every cell with value >= a_k
    distinct, first = np.unique(-a, return_index=True)
    levels = -distinct
    last = np.concatenate((first[1:], [len(a)]))
    mass = np.cumsum(u)[last - 1] / total
    return float(np.max(levels * mass ** (1.0 / p)))


@dataclass(frozen=True)
class MedianResult:
    lo: float
    hi: float

    @property
    def canonical(self) -> float:
        return self.lo

    def __contains__(self, m: float) -> bool:
        return self.lo <= m <= self.hi


def _median(vals: np.ndarray, units: np.ndarray, total: int) -> MedianResult:
    order = np.argsort(vals, kind="stable")
    v, u = vals[order], units[order]
    distinct, first = np.unique(v, return_index=True)
    csum = np.concatenate(([0], np.cumsum(u)))
    below = csum[first]                     # |{f < v_k}|
    last = np.concatenate((first[1:], [len(v)]))
    above = total - csum[last]              # |{f > v_k}|
    lo_ok = 2 * above <= total
    hi_ok = 2 * below <= total
    lo = distinct[np.argmax(lo_ok)]
    hi = distinct[len(distinct) - 1 - np.argmax(hi_ok[::-1])]
    return MedianResult(float(lo), float(hi))


def median(f: StepFunction, Q: DyadicCube | None = None) -> MedianResult:
    """Every median of f on Q, as the closed interval [lo, hi]."""
    vals, units, total, _ = _cells(f, Q)
    return _median(vals, units, total)


def _oscillation(vals: np.ndarray, units: np.ndarray, total: int, lam: float) -> float:
    """inf_c ((f - c) chi_Q)^*(lam |Q|) by a sliding window over sorted values.

    A window [v_i, v_j] of consecutive distinct values is admissible when the
    mass outside it is < lam |Q|; the best constant is its midpoint and the
    oscillation is half the narrowest admissible width.
    """
    distinct, inv = np.unique(vals, return_inverse=True)
    mass = np.bincount(inv.reshape(-1), weights=units, minlength=len(distinct)).astype(np.int64)
    pref = np.concatenate(([0], np.cumsum(mass)))
    need = total - _max_excluded(lam * total)
    k = np.searchsorted(pref, pref[:-1] + need, side="left")
    valid = k <= len(distinct)
    i = np.nonzero(valid)[0]
    width = distinct[k[valid] - 1] - distinct[i]
    return float(np.min(width) / 2.0)


def local_mean_oscillation(f: StepFunction, Q: DyadicCube | None, lam: float) -> float:
    """omega_lambda(f, Q) = inf over constants c of ((f - c) chi_Q)^*(lambda |Q|)."""
    if not 0 < lam < 1:
        raise ValueError(f"lambda must lie in (0, 1), got {lam}")
    vals, units, total, _ = _cells(f, Q)
    return _oscillation(vals, units, total, lam)


def median_oscillation_bounds(f: StepFunction, Q: DyadicCube | None, lam: float,
                              m: float | None = None) -> tuple[float, float]:
    """(omega_lambda(f, Q), ((f - m) chi_Q)^*(lambda |Q|)) for a median m (canonical by default)."""
    if not 0 < lam <= 0.5:
        raise ValueError(f"lambda must lie in (0, 1/2], got {lam}")
    vals, units, total, _ = _cells(f, Q)
    if m is None:
        m = _median(vals, units, total).canonical
    omega = _oscillation(vals, units, total, lam)
    centered = _rearrangement(np.abs(vals - m), units, lam * total)
    return omega, centered


def node_oscillations(f: StepFunction, lam: float, within: DyadicCube | None = None) -> np.ndarray:
    """omega_lambda(f, Q) for every node Q of f's tree (nan outside `within`)."""
    if not 0 < lam < 1:
        raise ValueError(f"lambda must lie in (0, 1), got {lam}")
    t = f.tree
    out = np.full(t.size, np.nan)
    nodes = np.nonzero(t.subtree_mask(t.index(within)))[0] if within is not None else range(t.size)
    for i in nodes:
        if t.is_leaf[i]:
            out[i] = 0.0
            continue
        lo, hi = t.leaf_lo[i], t.leaf_hi[i]
        out[i] = _oscillation(f.values[lo:hi], f.units[lo:hi], int(t.units[i]), lam)
    return out


def local_sharp_maximal(f: StepFunction, Q0: DyadicCube | None = None, lam: float = 0.25) -> StepFunction:
    """M^{#,d}_{lambda,Q0} f(x) = sup over dyadic Q' with x in Q' in Delta(Q0) of omega_lambda(f, Q').

    Returned on f's partition refined to contain Q0; zero outside Q0.
    """
    if not 0 < lam < 1:
        raise ValueError(f"lambda must lie in (0, 1), got {lam}")
    if Q0 is None:
        Q0 = DyadicCube.root(f.dim)
    g = f.refine([Q0])
    t = g.tree
    osc = node_oscillations(g, lam, within=Q0)
    vals = t.chain_max(np.nan_to_num(osc, nan=0.0))
    i, j = g._range(Q0)
    out = np.zeros(g.size)
    out[i:j] = vals[i:j]
    return g.with_values(out)


# ---------------------------------------------------------------------- decomposition

@dataclass
class LernerDecomposition:
    """Nested generations of cubes for the median-based decomposition of f on `root`.

    generations[k - 1] holds the cubes Q_j^k of generation k >= 1.
    """

    root: DyadicCube
    generations: list[list[DyadicCube]]
    lambda_n: float
    # parent generation-(k-1) cube of every selected cube
    parents: dict[DyadicCube, DyadicCube] = field(default_factory=dict)

    def omega(self, k: int) -> list[DyadicCube]:
        """Omega_k as its list of cubes."""
        if k < 1:
            raise ValueError("generations start at k = 1")
        return self.generations[k - 1] if k <= len(self.generations) else []

    def ground_sets(self, f: StepFunction) -> dict[DyadicCube, tuple[np.ndarray, int]]:
        """E_j^k = Q_j^k minus Omega_{k+1}, as (leaf mask on f's refinement, integer measure)."""
        g = _refined(f, self)
        out = {}
        for k, gen in enumerate(self.generations, start=1):
            nxt = self.omega(k + 1)
            for Q in gen:
                mask = _leaf_mask(g, [Q])
                mask &= ~_leaf_mask(g, [P for P in nxt if Q.contains(P)])
                out[Q] = (mask, int(g.units[mask].sum()))
        return out

    def to_json(self) -> dict:
        return {
            "root": self.root.to_json(),
            "lambda_n": self.lambda_n,
            "generations": [[Q.to_json() for Q in gen] for gen in self.generations],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json())

    @classmethod
    def from_json(cls, obj: dict, dim: int) -> "LernerDecomposition":
        gens = [[DyadicCube.from_json(c, dim) for c in gen] for gen in obj["generations"]]
        root = DyadicCube.from_json(obj["root"], dim)
        lam = float(obj.get("lambda_n", 2.0 ** (-dim - 2)))
        d = cls(root, gens, lam)
        for k in range(1, len(gens)):
            for Q in gens[k]:
                d.parents[Q] = next(P for P in gens[k - 1] if P.contains(Q))
        for Q in gens[0] if gens else []:
            d.parents[Q] = root
        return d


def _refined(f: StepFunction, d: LernerDecomposition) -> StepFunction:
    return f.refine([d.root] + [Q for gen in d.generations for Q in gen])


def _leaf_mask(g: StepFunction, cubes) -> np.ndarray:
    mask = np.zeros(g.size, dtype=bool)
    for Q in cubes:
        i, j = g._range(Q)
        mask[i:j] = True
    return mask


def _select(f: StepFunction, P: DyadicCube, lam_n: float) -> list[DyadicCube]:
    """Maximal dyadic Q in P with |Q cap E(P)| > |Q|/2."""
    vals, units, total = f.restrict_units(P)
    m = _median(vals, units, total).canonical
    dev = np.abs(vals - m)
    alpha = _rearrangement(dev, units, lam_n * total)
    in_e = dev > alpha
    if not in_e.any():
        return []
    i0, _ = f._range(P)
    # walk the subtree of P top-down, stopping at the first cube that qualifies
    t = f.tree
    root_idx = t.index(P)
    if root_idx is None:
        return []
    e_units = np.zeros(f.size, dtype=np.int64)
    e_units[i0:i0 + len(vals)] = np.where(in_e, units, 0)
    node_e = np.bincount(t.pair_node, weights=e_units[t.pair_leaf], minlength=t.size)
    chosen = []
    sub = t.subtree_mask(root_idx)
    qualifies = sub & (2 * node_e > t.units)
    qualifies[root_idx] = False
    # maximal: no proper ancestor inside P qualifies
    for i in np.nonzero(qualifies)[0]:
        a = t.parent[i]
        blocked = False
        while a != root_idx and a >= 0:
            if qualifies[a]:
                blocked = True
                break
            a = t.parent[a]
        if not blocked:
            chosen.append(t.cube(i))
    chosen.sort()
    return chosen


def lerner_decompose(f: StepFunction, Q0: DyadicCube | None = None) -> LernerDecomposition:
    """Build generations of cubes: inside each selected P, pick the maximal dyadic Q
    with |Q cap E(P)| > |Q|/2 where E(P) = {|f - m_f(P)| > ((f - m_f(P)) chi_P)^*(lambda_n |P|)}.
    """
    if Q0 is None:
        Q0 = DyadicCube.root(f.dim)
    lam_n = 2.0 ** (-f.dim - 2)
    g = f.refine([Q0])
    d = LernerDecomposition(Q0, [], lam_n)
    current = [Q0]
    while True:
        nxt = []
        for P in current:
            for Q in _select(g, P, lam_n):
                d.parents[Q] = P
                nxt.append(Q)
        if not nxt:
            break
        nxt.sort()
        d.generations.append(nxt)
        current = nxt
    return d


@dataclass
class LernerReport:
    max_residual: float
    max_ratio: float
    lhs: StepFunction
    rhs: StepFunction
    constant: float = 4.0

    @property
    def passed(self) -> bool:
        return self.max_residual <= 0.0

    def to_json(self) -> dict:
        return {"max_residual": self.max_residual, "max_ratio": self.max_ratio,
                "constant": self.constant, "passed": self.passed}


def verify_lerner_bound(f: StepFunction, Q0: DyadicCube | None, d: LernerDecomposition,
                        constant: float = 4.0) -> LernerReport:
    """Compare |f - m_f(Q0)| with 4 M^{#,d}_{1/4,Q0} f + 4 sum omega_{lambda_n}(f, parent(Q_j^k)) chi_{Q_j^k}."""
    if Q0 is None:
        Q0 = DyadicCube.root(f.dim)
    if d.root != Q0:
        raise ValueError(f"decomposition was built for {d.root!r}, not {Q0!r}")
    for gen in d.generations:
        for Q in gen:
            if not Q0.contains(Q) or Q == Q0:
                raise ValueError(f"cube {Q!r} does not lie strictly inside {Q0!r}")
    g = _refined(f, d)
    i, j = g._range(Q0)
    m0 = median(g, Q0).canonical
    lhs = np.zeros(g.size)
    lhs[i:j] = np.abs(g.values[i:j] - m0)
    sharp = local_sharp_maximal(g, Q0, 0.25)
    sharp_vals = common_refinement_values(g, sharp)
    rhs = constant * sharp_vals
    for gen in d.generations:
        for Q in gen:
            w = local_mean_oscillation(g, Q.parent, d.lambda_n)
            a, b = g._range(Q)
            rhs[a:b] += constant * w
    resid = lhs[i:j] - rhs[i:j]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(rhs[i:j] > 0, lhs[i:j] / rhs[i:j], np.where(lhs[i:j] > 0, np.inf, 0.0))
    return LernerReport(float(resid.max()), float(ratio.max()), g.with_values(lhs), g.with_values(rhs), constant)


def common_refinement_values(g: StepFunction, h: StepFunction) -> np.ndarray:
    """Values of h on g's leaves, where g refines h."""
    from .core.step import common_refinement

    a, b = common_refinement(g, h)
    if a.size != g.size:
        raise ValueError("g must refine h")
    return b.values
