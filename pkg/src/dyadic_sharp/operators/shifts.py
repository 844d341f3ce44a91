"""Haar shifts, generalized shifts, paraproducts and Haar multipliers."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

import numpy as np

from ..core import DyadicCube, StepFunction
from ..core.haar import _require_line, haar_function, haar_synthesize, node_haar_coefficients
from ..core.step import _refine_many

_TOL = 1e-12


def _node_coefficient_map(f: StepFunction) -> dict[DyadicCube, float]:
    t = f.tree
    coef = node_haar_coefficients(f)
    return {t.cube(i): float(coef[i]) for i in np.nonzero(coef)[0]}


@dataclass(frozen=True)
class HaarShiftSpec:
    """Coefficients a_{Q',Q''} of a Haar shift of index tau.

    Entries are keyed by (Q, Q', Q'') with Q', Q'' dyadic subintervals of Q at
    most tau generations below it.  `bound` scales the size condition
    |a| <= bound * (|Q'||Q''|)^{1/2} / |Q|.
    """

    tau: int
    entries: Mapping[tuple[DyadicCube, DyadicCube, DyadicCube], float] = field(default_factory=dict)
    bound: float = 1.0

    def __post_init__(self):
        if self.tau < 0:
            raise ValueError(f"shift index must be >= 0, got {self.tau}")
        for k, ((Q, Qp, Qpp), a) in enumerate(self.entries.items()):
            where = f"entry {k} (Q={Q!r}, Qp={Qp!r}, Qpp={Qpp!r}, a={a})"
            if Q.dim != 1 or Qp.dim != 1 or Qpp.dim != 1:
                raise ValueError(f"{where}: Haar shifts use intervals (n = 1)")
            for sub in (Qp, Qpp):
                if not Q.contains(sub):
                    raise ValueError(f"{where}: {sub!r} is not inside Q")
                if sub.level - Q.level > self.tau:
                    raise ValueError(f"{where}: {sub!r} is more than tau = {self.tau} generations below Q")
            if not np.isfinite(a):
                raise ValueError(f"{where}: coefficient is not finite")
            limit = self.bound * np.sqrt(Qp.measure * Qpp.measure) / Q.measure
            if abs(a) > limit * (1 + _TOL):
                raise ValueError(f"{where}: |a| exceeds the size bound {limit:.6g}")

    @classmethod
    def dyadic_hilbert(cls, depth: int) -> "HaarShiftSpec":
        """H^d on all intervals above the given level; needs bound sqrt(2)."""
        entries = {}
        for lvl in range(depth):
            for I in DyadicCube.root(1).descendants(lvl):
                entries[(I, I, I.left)] = 1.0
                entries[(I, I, I.right)] = -1.0
        return cls(1, entries, bound=np.sqrt(2.0))

    @classmethod
    def identity(cls, depth: int) -> "HaarShiftSpec":
        """tau = 0 with a_{Q,Q} = 1: the projection f - f_root."""
        entries = {(I, I, I): 1.0 for lvl in range(depth) for I in DyadicCube.root(1).descendants(lvl)}
        return cls(0, entries)

    def to_json(self) -> dict:
        return {"tau": self.tau, "bound": self.bound,
                "entries": [{"Q": Q.to_json(), "Qp": Qp.to_json(), "Qpp": Qpp.to_json(), "a": a}
                            for (Q, Qp, Qpp), a in self.entries.items()]}

    @classmethod
    def from_json(cls, obj: dict) -> "HaarShiftSpec":
        entries = {}
        for k, e in enumerate(obj.get("entries", [])):
            try:
                key = tuple(DyadicCube.from_json(e[name], 1) for name in ("Q", "Qp", "Qpp"))
                a = float(e["a"])
            except (KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"entry {k} is malformed: {exc}") from exc
            entries[key] = entries.get(key, 0.0) + a
        return cls(int(obj["tau"]), entries, float(obj.get("bound", 1.0)))

    @classmethod
    def loads(cls, text: str) -> "HaarShiftSpec":
        return cls.from_json(json.loads(text))


def _synthesize(coefs: dict[DyadicCube, float], base: StepFunction) -> StepFunction:
    return haar_synthesize(coefs, 0.0, base.with_values(np.zeros(base.size)))


def haar_shift(spec: HaarShiftSpec, f: StepFunction) -> StepFunction:
    """sum over entries of a_{Q',Q''} <f, h_{Q'}> h_{Q''}."""
    _require_line(f.dim)
    fc = _node_coefficient_map(f)
    out: dict[DyadicCube, float] = {}
    for (Q, Qp, Qpp), a in spec.entries.items():
        c = fc.get(Qp, 0.0)
        if c != 0.0 and a != 0.0:
            out[Qpp] = out.get(Qpp, 0.0) + a * c
    return _synthesize(out, f)


def dyadic_hilbert(f: StepFunction) -> StepFunction:
    """H^d f = sum_I <f, h_I> (h_{I-} - h_{I+})."""
    _require_line(f.dim)
    out: dict[DyadicCube, float] = {}
    for I, c in _node_coefficient_map(f).items():
        out[I.left] = out.get(I.left, 0.0) + c
        out[I.right] = out.get(I.right, 0.0) - c
    return _synthesize(out, f)


def paraproduct(b: StepFunction, f: StepFunction) -> StepFunction:
    """pi_b f = sum_I f_I <b, h_I> h_I."""
    _require_line(b.dim)
    _require_line(f.dim)
    bc = _node_coefficient_map(b)
    base, = _refine_many([f], extra=(b.levels, b.coords))
    out = {I: c * f.average(I) for I, c in bc.items()}
    return _synthesize(out, base)


def haar_multiplier(alpha, f: StepFunction) -> StepFunction:
    """T_alpha f = sum_I alpha_I <f, h_I> h_I.

    `alpha` may be a number, a mapping from intervals (missing ones count as
    zero) or a callable on intervals.
    """
    _require_line(f.dim)
    if callable(alpha):
        get = alpha
    elif isinstance(alpha, Mapping):
        get = lambda I: alpha.get(I, 0.0)
    else:
        get = lambda I, c=float(alpha): c
    out = {}
    for I, c in _node_coefficient_map(f).items():
        a = float(get(I))
        if not np.isfinite(a):
            raise ValueError(f"multiplier is not finite on {I!r}")
        out[I] = a * c
    return _synthesize(out, f)


# ---------------------------------------------------------------- generalized shifts


@dataclass(frozen=True)
class GeneralizedShiftSpec:
    """Pairs (g_Q, gamma_Q) of a generalized Haar shift of index tau.

    At construction every pair is checked for support in Q, constancy on
    subcubes of measure <= 2^{-tau n}|Q| and sup norm <= bound |Q|^{-1/2}.
    """

    tau: int
    pairs: Mapping[DyadicCube, tuple[StepFunction, StepFunction]] = field(default_factory=dict)
    bound: float = 1.0

    def __post_init__(self):
        if self.tau < 0:
            raise ValueError(f"shift index must be >= 0, got {self.tau}")
        for Q, pair in self.pairs.items():
            for name, g in zip(("g", "gamma"), pair):
                self._check(Q, name, g)

    def _check(self, Q: DyadicCube, name: str, g: StepFunction):
        where = f"{name}_Q for Q={Q!r}"
        if g.dim != Q.dim:
            raise ValueError(f"{where}: dimension mismatch")
        gq = g.refine([Q])
        i, j = gq._range(Q)
        outside = np.concatenate((gq.values[:i], gq.values[j:]))
        if np.any(outside != 0):
            raise ValueError(f"{where}: not supported in Q")
        if np.max(np.abs(gq.values), initial=0.0) > self.bound * Q.measure ** -0.5 * (1 + _TOL):
            raise ValueError(f"{where}: sup norm exceeds {self.bound:g} |Q|^(-1/2)")
        lv = gq.levels[i:j]
        deep = lv > Q.level + self.tau
        if deep.any():
            shift = lv[deep] - (Q.level + self.tau)
            anc = gq.coords[i:j][deep] >> shift[:, None]
            vals = gq.values[i:j][deep]
            _, grp = np.unique(anc, axis=0, return_inverse=True)
            grp = grp.reshape(-1)
            hi = np.full(grp.max() + 1, -np.inf)
            lo = np.full(grp.max() + 1, np.inf)
            np.maximum.at(hi, grp, vals)
            np.minimum.at(lo, grp, vals)
            if np.any(hi - lo > 0):
                raise ValueError(f"{where}: not constant on subcubes {self.tau} generations below Q")

    @classmethod
    def haar(cls, cubes: Iterable[DyadicCube]) -> "GeneralizedShiftSpec":
        """g_Q = gamma_Q = h_Q: the projection f - f_root."""
        pairs = {}
        for I in cubes:
            h = haar_function(I)
            pairs[I] = (h, h)
        return cls(1, pairs)

    @classmethod
    def hilbert(cls, cubes: Iterable[DyadicCube]) -> "GeneralizedShiftSpec":
        """g_I = h_I, gamma_I = h_{I-} - h_{I+}; sup norm sqrt(2)|I|^{-1/2}."""
        pairs = {I: (haar_function(I), haar_function(I.left) - haar_function(I.right)) for I in cubes}
        return cls(2, pairs, bound=np.sqrt(2.0))

    @classmethod
    def paraproduct(cls, b: StepFunction) -> "GeneralizedShiftSpec":
        """g_I = |I|^{-1/2} chi_I, gamma_I = <b,h_I> |I|^{-1/2} h_I; needs ||b||_{*,d} <= 1."""
        pairs = {}
        for I, c in _node_coefficient_map(b).items():
            s = I.measure ** -0.5
            pairs[I] = (StepFunction.indicator(I, s), haar_function(I) * (c * s))
        return cls(1, pairs)

    @staticmethod
    def complete(depth: int) -> list[DyadicCube]:
        return [I for lvl in range(depth) for I in DyadicCube.root(1).descendants(lvl)]


def _shift_terms(spec: GeneralizedShiftSpec, f: StepFunction):
    """Common partition, per-cube coefficients <f, g_Q> and gamma_Q values on it."""
    cubes = list(spec.pairs)
    gammas = [spec.pairs[Q][1] for Q in cubes]
    parts = _refine_many([f] + gammas) if gammas else [f]
    base = parts[0]
    coefs = []
    for Q in cubes:
        g = spec.pairs[Q][0]
        fg, gg = _refine_many([f, g])
        coefs.append(float(np.dot(fg.values * gg.values, fg.measures)))
    return base, cubes, np.array(coefs), [p.values for p in parts[1:]]


def generalized_haar_shift(spec: GeneralizedShiftSpec, f: StepFunction) -> StepFunction:
    """T f = sum_Q <f, g_Q> gamma_Q."""
    return truncated_shift(spec, f, 0.0, _allow_zero=True)


def truncated_shift(spec: GeneralizedShiftSpec, f: StepFunction, eps: float,
                    _allow_zero: bool = False) -> StepFunction:
    """T_eps f: the sum restricted to cubes with |Q| >= eps^n."""
    if not (eps > 0 or (_allow_zero and eps == 0)):
        raise ValueError(f"truncation parameter must be positive, got {eps}")
    if any(Q.dim != f.dim for Q in spec.pairs):
        raise ValueError("dimension mismatch between spec and function")
    base, cubes, coefs, gvals = _shift_terms(spec, f)
    out = np.zeros(base.size)
    for Q, c, gv in zip(cubes, coefs, gvals):
        if Q.side >= eps and c != 0.0:
            out += c * gv
    return base.with_values(out)


def maximal_haar_shift(spec: GeneralizedShiftSpec, f: StepFunction) -> StepFunction:
    """T_* f = max over truncation scales of |T_eps f|, per leaf."""
    base, cubes, coefs, gvals = _shift_terms(spec, f)
    levels = sorted({Q.level for Q in cubes})
    per_level = {lvl: np.zeros(base.size) for lvl in levels}
    for Q, c, gv in zip(cubes, coefs, gvals):
        if c != 0.0:
            per_level[Q.level] += c * gv
    running = np.zeros(base.size)
    best = np.zeros(base.size)
    for lvl in levels:
        running = running + per_level[lvl]
        best = np.maximum(best, np.abs(running))
    return base.with_values(best)
