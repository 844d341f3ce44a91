"""Young functions, their associates, Luxemburg norms and the B_p condition."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate

from ..core import DyadicCube, StepFunction

_E = np.e
# log2 grid used to tabulate numerically computed associates
_GRID = np.linspace(-80.0, 80.0, 16001)


@dataclass(frozen=True, eq=False)
class YoungFunction:
    """A Young function A: [0, inf) -> [0, inf).

    Built-in families are ``power`` (coef * t^r) and ``logbump``
    (coef * t^r log(e + t)^a).  ``custom`` wraps a vectorized callable;
    `deriv` is optional and only used when taking the associate.
    `asymptotic` records the (r, a) log-bump class at infinity, which is
    what decides B_p.
    """

    family: str
    r: float = 1.0
    a: float = 0.0
    coef: float = 1.0
    func: Callable | None = field(default=None, repr=False)
    deriv: Callable | None = field(default=None, repr=False)
    asymptotic: tuple[float, float] | None = None
    label: str = ""

    @classmethod
    def power(cls, r: float, coef: float = 1.0) -> "YoungFunction":
        if not r >= 1 or not coef > 0:
            raise ValueError(f"power Young function needs r >= 1 and coef > 0, got r={r}, coef={coef}")
        return cls("power", float(r), 0.0, float(coef), asymptotic=(float(r), 0.0))

    @classmethod
    def logbump(cls, r: float, a: float, coef: float = 1.0) -> "YoungFunction":
        A = cls("logbump", float(r), float(a), float(coef), asymptotic=(float(r), float(a)))
        A.validate()
        return A

    @classmethod
    def custom(cls, func: Callable, deriv: Callable | None = None,
               asymptotic: tuple[float, float] | None = None, label: str = "custom") -> "YoungFunction":
        A = cls("custom", func=func, deriv=deriv, asymptotic=asymptotic, label=label)
        A.validate()
        return A

    @classmethod
    def from_config(cls, obj: dict) -> "YoungFunction":
        """Build from a descriptor such as {"family": "logbump", "r": 2, "a": 1.5}."""
        family = obj.get("family")
        if family == "power":
            return cls.power(obj["r"], obj.get("coef", 1.0))
        if family == "logbump":
            return cls.logbump(obj["r"], obj.get("a", 0.0), obj.get("coef", 1.0))
        raise ValueError(f"unknown Young function family {family!r}")

    def to_config(self) -> dict:
        if self.family == "custom":
            raise ValueError("custom Young functions have no descriptor")
        return {"family": self.family, "r": self.r, "a": self.a, "coef": self.coef}

    def __call__(self, t):
        t = np.asarray(t, dtype=np.float64)
        if self.family == "power":
            return self.coef * t ** self.r
        if self.family == "logbump":
            return self.coef * t ** self.r * np.log(_E + t) ** self.a
        return np.asarray(self.func(t), dtype=np.float64)

    def derivative(self, t):
        t = np.asarray(t, dtype=np.float64)
        if self.family == "power":
            return self.coef * self.r * t ** (self.r - 1)
        if self.family == "logbump":
            lg = np.log(_E + t)
            return self.coef * (self.r * t ** (self.r - 1) * lg ** self.a
                                + self.a * t ** self.r * lg ** (self.a - 1) / (_E + t))
        if self.deriv is not None:
            return np.asarray(self.deriv(t), dtype=np.float64)
        h = 1e-6 * np.maximum(t, 1e-12)
        return (self(t + h) - self(np.maximum(t - h, 0.0))) / (t + h - np.maximum(t - h, 0.0))

    def inverse(self, y):
        """A^{-1}(y) by bisection in log scale."""
        y = np.asarray(y, dtype=np.float64)
        lo = np.full(y.shape, -200.0)
        hi = np.full(y.shape, 200.0)
        for _ in range(90):
            mid = 0.5 * (lo + hi)
            big = self(np.exp2(mid)) > y
            hi = np.where(big, mid, hi)
            lo = np.where(big, lo, mid)
        return np.where(y > 0, np.exp2(0.5 * (lo + hi)), 0.0)

    def validate(self):
        """Numerical check of A(0) = 0, monotonicity and convexity on a log grid."""
        t = np.exp2(np.linspace(-20, 20, 801))
        with np.errstate(over="ignore", invalid="ignore"):
            v = self(t)
            v0 = float(self(np.array(0.0)))
        if abs(v0) > 0 or not np.all(np.isfinite(v)) or np.any(v <= 0):
            raise ValueError(f"invalid Young function {self!r}: needs A(0) = 0 and A > 0 on (0, inf)")
        if np.any(np.diff(v) <= 0):
            raise ValueError(f"invalid Young function {self!r}: not strictly increasing")
        slope = np.diff(v) / np.diff(t)
        if np.any(np.diff(slope) < -1e-9 * np.abs(slope[1:])):
            raise ValueError(f"invalid Young function {self!r}: not convex")
        return self

    def __repr__(self):
        if self.family == "power":
            return f"YoungFunction.power({self.r:g}, coef={self.coef:g})"
        if self.family == "logbump":
            return f"YoungFunction.logbump({self.r:g}, {self.a:g}, coef={self.coef:g})"
        return f"YoungFunction.custom({self.label})"


def _legendre(A: YoungFunction, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """sup_s (st - A(s)) and the maximizing s, solving A'(s) = t by bisection."""
    lo = np.full(t.shape, -200.0)
    hi = np.full(t.shape, 200.0)
    for _ in range(120):
        mid = 0.5 * (lo + hi)
        with np.errstate(over="ignore", invalid="ignore"):
            big = ~(A.derivative(np.exp2(mid)) < t)
        hi = np.where(big, mid, hi)
        lo = np.where(big, lo, mid)
    s = np.exp2(0.5 * (lo + hi))
    return np.maximum(s * t - A(s), 0.0), s


def _tabulated(x_log2: np.ndarray, y: np.ndarray) -> Callable:
    """Log-log interpolation, extended linearly in log-log beyond the table."""
    ly = np.log2(y)
    lo_slope = (ly[1] - ly[0]) / (x_log2[1] - x_log2[0])
    hi_slope = (ly[-1] - ly[-2]) / (x_log2[-1] - x_log2[-2])

    def fn(t):
        t = np.asarray(t, dtype=np.float64)
        with np.errstate(divide="ignore"):
            lt = np.log2(t)
        out = np.interp(lt, x_log2, ly)
        out = np.where(lt < x_log2[0], ly[0] + lo_slope * (lt - x_log2[0]), out)
        out = np.where(lt > x_log2[-1], ly[-1] + hi_slope * (lt - x_log2[-1]), out)
        return np.where(t > 0, np.exp2(out), 0.0)

    return fn


def associate(A: YoungFunction) -> YoungFunction:
    """The associate (Legendre dual) function sup_s (st - A(s)).

    Closed form for powers; otherwise tabulated from an exact bisection on a
    log grid.  For log-bumps the asymptotic class (r', -a/(r-1)) is recorded.
    """
    if A.family == "power":
        r = A.r
        if r <= 1:
            raise ValueError("the associate of a linear function is not a finite Young function")
        rp = r / (r - 1)
        coef = (r - 1) / r * (A.coef * r) ** (-1.0 / (r - 1))
        return YoungFunction.power(rp, coef)
    t = np.exp2(_GRID)
    vals, s = _legendre(A, t)
    keep = vals > 0
    if keep.sum() < 10:
        raise ValueError(f"cannot tabulate the associate of {A!r}")
    func = _tabulated(_GRID[keep], vals[keep])
    deriv = _tabulated(_GRID[keep], s[keep])
    asym = None
    if A.asymptotic is not None and A.asymptotic[0] > 1:
        r, a = A.asymptotic
        asym = (r / (r - 1), -a / (r - 1))
    return YoungFunction("custom", func=func, deriv=deriv, asymptotic=asym,
                         label=f"associate of {A!r}")


def bp_classify(A: YoungFunction, p: float) -> bool | None:
    """Whether int^inf A(t) t^{-p} dt/t converges; None when inconclusive."""
    if not p > 1:
        raise ValueError(f"B_p needs p > 1, got {p}")
    if A.asymptotic is not None:
        r, a = A.asymptotic
        if r != p:
            return bool(r < p)
        return bool(a < -1)
    # integral in u = log t over doubling windows [U, 2U]; a tail ~ U^-eps
    # halves-ish per window when convergent and stays flat when divergent
    def piece(u0, u1):
        with np.errstate(over="ignore", invalid="ignore"), warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            val, _ = integrate.quad(lambda u: float(A(np.exp(u))) * np.exp(-p * u), u0, u1, limit=200)
        return val

    parts = []
    for k in range(3, 9):
        val = piece(2.0 ** k, 2.0 ** (k + 1))
        if not np.isfinite(val):
            break
        parts.append(val)
    if len(parts) < 3:
        return None
    if parts[-1] == 0.0:
        return True
    ratios = np.array([b / a for a, b in zip(parts[-3:-1], parts[-2:]) if a > 0])
    if len(ratios) == 0:
        return None
    decay = -np.log2(ratios.max())
    if decay > 0.2:
        return True
    if decay < 0.02:
        return False
    return None


def node_luxemburg(A: YoungFunction, f: StepFunction, values=None) -> np.ndarray:
    """Luxemburg norm ||g||_{A,Q} for every node Q of f's tree, g = values or f.

    Vectorized bisection in log2(lambda) on the monotone predicate
    avg_Q A(|g| / lambda) <= 1.
    """
    t = f.tree
    g = np.abs(f.values if values is None else np.asarray(values, dtype=np.float64))
    meas = f.measures
    pl, pn = t.pair_leaf, t.pair_node
    gv = g[pl]
    w = meas[pl] / t.measure[pn]
    top = np.zeros(t.size)
    np.maximum.at(top, pn, gv)
    pos = top > 0
    ltop = np.log2(np.where(pos, top, 1.0))

    def excess(lam_log2):
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            x = A(gv / np.exp2(lam_log2[pn]))
        x = np.where(gv > 0, x, 0.0)
        return np.bincount(pn, weights=w * x, minlength=t.size) > 1.0

    lo = ltop - 64.0
    hi = ltop + 64.0
    for _ in range(8):
        bad = pos & ~excess(lo)
        if not bad.any():
            break
        lo = np.where(bad, lo - 64.0, lo)
    for _ in range(8):
        bad = pos & excess(hi)
        if not bad.any():
            break
        hi = np.where(bad, hi + 64.0, hi)
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        big = excess(mid)
        lo = np.where(big, mid, lo)
        hi = np.where(big, hi, mid)
        if np.all(hi - lo < 1e-14):
            break
    return np.where(pos, np.exp2(hi), 0.0)


def luxemburg_norm(A: YoungFunction, f: StepFunction, Q: DyadicCube | None = None) -> float:
    """inf{lambda > 0 : avg_Q A(|f| / lambda) <= 1}."""
    if Q is None:
        Q = DyadicCube.root(f.dim)
    g = f.refine([Q])
    i = g.tree.index(Q)
    return float(node_luxemburg(A, g)[i])
