"""Exact step functions on adaptive dyadic partitions of [0, 1)^n.

A StepFunction stores the leaves of a finite dyadic partition tree together
with one value per leaf.  Leaves are kept in Morton (depth-first) order, with
children ordered lexicographically in their offset vectors, so that every
dyadic cube is a contiguous run of leaves.  All integer bookkeeping is done
with Morton keys at the finest level of the tree, which keeps measure
comparisons exact.
"""

from __future__ import annotations

import json
from functools import cached_property
from typing import Callable, Iterable, Sequence

import numpy as np

from .cube import DyadicCube

MAX_KEY_BITS = 62


def _check_bits(depth: int, dim: int):
    if depth * dim > MAX_KEY_BITS:
        raise ValueError(
            f"tree too deep: depth {depth} in dimension {dim} needs {depth * dim} key bits "
            f"(limit {MAX_KEY_BITS})"
        )


def morton_keys(coords: np.ndarray, levels: np.ndarray, depth: int) -> np.ndarray:
    """Morton key of the lower corner of each cube, measured at `depth`."""
    coords = np.asarray(coords, dtype=np.int64)
    levels = np.asarray(levels, dtype=np.int64)
    m, n = coords.shape
    scaled = coords << (depth - levels)[:, None]
    if n == 1:
        return scaled[:, 0].copy()
    keys = np.zeros(m, dtype=np.int64)
    for b in range(depth):
        for d in range(n):
            keys |= ((scaled[:, d] >> b) & 1) << (b * n + (n - 1 - d))
    return keys


def morton_coords(keys: np.ndarray, levels: np.ndarray, depth: int, dim: int) -> np.ndarray:
    """Inverse of morton_keys for cubes at the given levels."""
    keys = np.asarray(keys, dtype=np.int64)
    levels = np.asarray(levels, dtype=np.int64)
    if dim == 1:
        scaled = keys[:, None]
    else:
        scaled = np.zeros((len(keys), dim), dtype=np.int64)
        for b in range(depth):
            for d in range(dim):
                scaled[:, d] |= ((keys >> (b * dim + (dim - 1 - d))) & 1) << b
    return scaled >> (depth - levels)[:, None]


class _Tree:
    """Node indexing for a partition: every leaf and every ancestor of a leaf.

    Nodes are ordered by (level, Morton key), so index 0 is the root.  The
    ancestor chains are flattened leaf-major into `pair_node` / `pair_leaf`,
    with each chain running from the root down to the leaf itself.
    """

    def __init__(self, f: "StepFunction"):
        n, D = f.dim, f.depth
        lv = f.levels
        chain_len = lv + 1
        self.leaf_starts = np.concatenate(([0], np.cumsum(chain_len)[:-1])).astype(np.int64)
        pair_leaf = np.repeat(np.arange(f.size), chain_len)
        pair_level = np.arange(chain_len.sum()) - np.repeat(self.leaf_starts, chain_len)
        shift = (D - pair_level) * n
        pair_key = (f.keys[pair_leaf] >> shift) << shift
        ids = np.stack([pair_level, pair_key], axis=1)
        uniq, inverse = np.unique(ids, axis=0, return_inverse=True)
        inverse = inverse.reshape(-1)
        self.pair_leaf = pair_leaf
        self.pair_node = inverse
        self.size = len(uniq)
        self.level = uniq[:, 0].copy()
        self.key = uniq[:, 1].copy()
        self.units = np.left_shift(np.int64(1), (D - self.level) * n)
        self.measure = np.ldexp(1.0, -(self.level * n).astype(np.int64))

        self.parent = np.full(self.size, -1, dtype=np.int64)
        not_start = np.ones(len(inverse), dtype=bool)
        not_start[self.leaf_starts] = False
        idx = np.nonzero(not_start)[0]
        self.parent[inverse[idx]] = inverse[idx - 1]

        leaf_ends = self.leaf_starts + chain_len - 1
        self.leaf_node = inverse[leaf_ends]
        self.is_leaf = np.zeros(self.size, dtype=bool)
        self.is_leaf[self.leaf_node] = True
        # index of the leaf for leaf nodes, -1 otherwise
        self.node_leaf = np.full(self.size, -1, dtype=np.int64)
        self.node_leaf[self.leaf_node] = np.arange(f.size)

        coords = np.zeros((self.size, n), dtype=np.int64)
        coords[inverse] = f.coords[pair_leaf] >> (lv[pair_leaf] - pair_level)[:, None]
        self.coords = coords
        # every node covers a contiguous run of leaves
        self.leaf_lo = np.full(self.size, f.size, dtype=np.int64)
        self.leaf_hi = np.zeros(self.size, dtype=np.int64)
        np.minimum.at(self.leaf_lo, inverse, pair_leaf)
        np.maximum.at(self.leaf_hi, inverse, pair_leaf + 1)
        # parity of the last coordinate tells left/right halves in n = 1
        self.child_bits = coords & 1
        self._dim = n
        self._index = None

    def cube(self, i: int) -> DyadicCube:
        return DyadicCube(self._dim, int(self.level[i]), tuple(self.coords[i]))

    def index(self, Q: DyadicCube) -> int | None:
        if self._index is None:
            self._index = {
                (int(l), tuple(int(c) for c in co)): i
                for i, (l, co) in enumerate(zip(self.level, self.coords))
            }
        return self._index.get((Q.level, Q.coords))

    def node_sums(self, leaf_vals: np.ndarray, leaf_meas: np.ndarray) -> np.ndarray:
        """Integral over every node of a leaf-wise constant function."""
        return np.bincount(self.pair_node, weights=(leaf_vals * leaf_meas)[self.pair_leaf],
                           minlength=self.size)

    def chain_max(self, node_vals: np.ndarray) -> np.ndarray:
        """Per leaf, the maximum of node_vals over its ancestors (leaf included)."""
        return np.maximum.reduceat(node_vals[self.pair_node], self.leaf_starts)

    def chain_sum(self, pair_vals: np.ndarray) -> np.ndarray:
        """Per leaf, the sum of pair-indexed values along its chain."""
        return np.add.reduceat(pair_vals, self.leaf_starts)

    def subtree_mask(self, i: int) -> np.ndarray:
        """Boolean mask of the nodes lying inside node i (node i included)."""
        lvl = self.level[i]
        mask = self.level >= lvl
        sub = (self.coords[mask] >> (self.level[mask] - lvl)[:, None]) == self.coords[i]
        out = np.zeros(self.size, dtype=bool)
        out[np.nonzero(mask)[0]] = sub.all(axis=1)
        return out


class StepFunction:
    """A real function on [0, 1)^dim, constant on the leaves of a dyadic tree.

    Instances are immutable.  Use :meth:`from_leaves` or :func:`build_uniform`
    to construct one; the plain constructor expects validated arrays.
    """

    __slots__ = ("dim", "levels", "coords", "values", "depth", "keys", "units", "__dict__")

    def __init__(self, dim: int, levels, coords, values, *, check: bool = True):
        levels = np.asarray(levels, dtype=np.int64).reshape(-1)
        coords = np.asarray(coords, dtype=np.int64).reshape(len(levels), dim)
        values = np.asarray(values, dtype=np.float64).reshape(-1)
        if len(values) != len(levels):
            raise ValueError("one value per leaf is required")
        if len(levels) == 0:
            raise ValueError("a partition needs at least one leaf")
        depth = int(levels.max())
        _check_bits(depth, dim)
        keys = morton_keys(coords, levels, depth)
        order = np.argsort(keys, kind="stable")
        levels, coords, values, keys = levels[order], coords[order], values[order], keys[order]
        units = np.left_shift(np.int64(1), (depth - levels) * dim)
        if check:
            if not np.all(np.isfinite(values)):
                raise ValueError("step function values must be finite")
            if np.any(levels < 0) or np.any(coords < 0) or np.any(coords >= (np.int64(1) << levels)[:, None]):
                raise ValueError("leaf cube lies outside the root cube")
            ends = keys + units
            total = np.int64(1) << (depth * dim)
            if keys[0] != 0 or ends[-1] != total or np.any(ends[:-1] != keys[1:]):
                raise ValueError("leaves must be pairwise disjoint and cover the root cube")
        for arr in (levels, coords, values, keys, units):
            arr.setflags(write=False)
        self.dim = dim
        self.levels = levels
        self.coords = coords
        self.values = values
        self.depth = depth
        self.keys = keys
        self.units = units

    # ------------------------------------------------------------------ construction

    @classmethod
    def from_leaves(cls, cubes: Iterable[DyadicCube], values: Iterable[float]) -> "StepFunction":
        cubes = list(cubes)
        if not cubes:
            raise ValueError("a partition needs at least one leaf")
        dim = cubes[0].dim
        if any(c.dim != dim for c in cubes):
            raise ValueError("all leaves must share one dimension")
        levels = [c.level for c in cubes]
        coords = [c.coords for c in cubes]
        return cls(dim, levels, coords, list(values))

    @classmethod
    def constant(cls, c: float, dim: int = 1) -> "StepFunction":
        return cls(dim, [0], [[0] * dim], [c])

    @classmethod
    def indicator(cls, Q: DyadicCube, value: float = 1.0) -> "StepFunction":
        """value * chi_Q on the smallest tree having Q as a leaf."""
        cubes, vals = [], []
        cur = Q
        while cur.level > 0:
            for sib in cur.parent.children():
                if sib != cur:
                    cubes.append(sib)
                    vals.append(0.0)
            cur = cur.parent
        cubes.append(Q)
        vals.append(value)
        return cls.from_leaves(cubes, vals)

    def with_values(self, values) -> "StepFunction":
        """Same partition, new leaf values (in this function's leaf order)."""
        values = np.asarray(values, dtype=np.float64)
        if values.shape != self.values.shape:
            raise ValueError("value array does not match the partition")
        if not np.all(np.isfinite(values)):
            raise ValueError("step function values must be finite")
        out = object.__new__(StepFunction)
        for name in ("dim", "levels", "coords", "depth", "keys", "units"):
            setattr(out, name, getattr(self, name))
        values = values.copy()
        values.setflags(write=False)
        out.values = values
        if "tree" in self.__dict__:
            out.__dict__["tree"] = self.__dict__["tree"]
        return out

    # ------------------------------------------------------------------ structure

    @property
    def size(self) -> int:
        return len(self.values)

    @cached_property
    def tree(self) -> _Tree:
        return _Tree(self)

    @property
    def leaves(self) -> list[DyadicCube]:
        return [DyadicCube(self.dim, int(l), tuple(c)) for l, c in zip(self.levels, self.coords)]

    @property
    def measures(self) -> np.ndarray:
        return np.ldexp(1.0, -(self.levels * self.dim))

    def cells(self):
        return zip(self.leaves, self.values.tolist())

    def same_partition(self, other: "StepFunction") -> bool:
        return (self.dim == other.dim and self.size == other.size
                and np.array_equal(self.levels, other.levels)
                and np.array_equal(self.coords, other.coords))

    def _range(self, Q: DyadicCube) -> tuple[int, int]:
        """Leaf index range [i, j) of leaves meeting Q."""
        if Q.dim != self.dim:
            raise ValueError(f"cube dimension {Q.dim} does not match function dimension {self.dim}")
        if Q.level <= self.depth:
            k = int(morton_keys(np.array([Q.coords]), np.array([Q.level]), self.depth)[0])
            size = 1 << ((self.depth - Q.level) * self.dim)
            i = int(np.searchsorted(self.keys, k, side="right")) - 1
            j = int(np.searchsorted(self.keys, k + size, side="left"))
            return i, j
        anc = Q.ancestor(Q.level - self.depth)
        return self._range(anc)

    def restrict(self, Q: DyadicCube) -> tuple[np.ndarray, np.ndarray]:
        """Values and measures of the pieces of the partition inside Q."""
        i, j = self._range(Q)
        if j - i == 1 and self.levels[i] <= Q.level:
            return self.values[i:j].copy(), np.array([Q.measure])
        return self.values[i:j].copy(), self.measures[i:j]

    def restrict_units(self, Q: DyadicCube) -> tuple[np.ndarray, np.ndarray, int]:
        """Values, integer measures and the integer measure of Q, in a common unit."""
        i, j = self._range(Q)
        if j - i == 1 and self.levels[i] <= Q.level:
            return self.values[i:j].copy(), np.array([1], dtype=np.int64), 1
        return self.values[i:j].copy(), self.units[i:j].copy(), 1 << ((self.depth - Q.level) * self.dim)

    # ------------------------------------------------------------------ evaluation

    def __call__(self, x) -> np.ndarray | float:
        pts = np.asarray(x, dtype=np.float64)
        scalar = pts.ndim == 0 or (pts.ndim == 1 and self.dim > 1)
        pts = pts.reshape(-1, self.dim)
        if np.any(pts < 0) or np.any(pts >= 1):
            raise ValueError("evaluation points must lie in [0, 1)^n")
        cells = np.floor(np.ldexp(pts, self.depth)).astype(np.int64)
        keys = morton_keys(cells, np.full(len(cells), self.depth), self.depth)
        idx = np.searchsorted(self.keys, keys, side="right") - 1
        out = self.values[idx]
        return float(out[0]) if scalar else out

    def integral(self, Q: DyadicCube | None = None) -> float:
        if Q is None:
            return float(np.dot(self.values, self.measures))
        vals, meas = self.restrict(Q)
        return float(np.dot(vals, meas))

    def average(self, Q: DyadicCube | None = None) -> float:
        if Q is None:
            return self.integral()
        return self.integral(Q) / Q.measure

    def node_averages(self, values=None) -> np.ndarray:
        """Average of (values or self.values) over every node of the tree."""
        t = self.tree
        v = self.values if values is None else np.asarray(values, dtype=np.float64)
        return t.node_sums(v, self.measures) / t.measure

    def lp_norm(self, p: float = 2.0) -> float:
        if np.isinf(p):
            return float(np.max(np.abs(self.values)))
        return float(np.dot(np.abs(self.values) ** p, self.measures) ** (1.0 / p))

    def spread(self, Q: DyadicCube | None = None) -> float:
        """max - min of the values on Q (0 means constant there)."""
        vals = self.values if Q is None else self.restrict(Q)[0]
        return float(vals.max() - vals.min())

    # ------------------------------------------------------------------ arithmetic

    def map(self, fn: Callable[[np.ndarray], np.ndarray]) -> "StepFunction":
        return self.with_values(fn(self.values))

    def __neg__(self):
        return self.with_values(-self.values)

    def __abs__(self):
        return self.with_values(np.abs(self.values))

    def __pow__(self, p):
        return self.with_values(self.values ** p)

    def _binary(self, other, op) -> "StepFunction":
        if isinstance(other, StepFunction):
            a, b = common_refinement(self, other)
            return a.with_values(op(a.values, b.values))
        return self.with_values(op(self.values, float(other)))

    def __add__(self, other):
        return self._binary(other, np.add)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __rsub__(self, other):
        return self._binary(other, lambda a, b: b - a)

    def __mul__(self, other):
        return self._binary(other, np.multiply)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._binary(other, np.divide)

    def restricted_to(self, Q: DyadicCube) -> "StepFunction":
        """f * chi_Q."""
        return self * StepFunction.indicator(Q)

    def refine(self, cubes: Iterable[DyadicCube]) -> "StepFunction":
        """Split leaves so that every given cube is a node of the tree."""
        parts = [_path_partition(Q) for Q in cubes]
        if not parts:
            return self
        levels = np.concatenate([p[0] for p in parts])
        coords = np.concatenate([p[1] for p in parts])
        return _refine_many([self], extra=(levels, coords))[0]

    def split(self, mask) -> "StepFunction":
        """Replace every masked leaf by its 2^n children (values copied)."""
        mask = np.asarray(mask, dtype=bool)
        if not mask.any():
            return self
        n = self.dim
        bits = np.array(list(np.ndindex(*(2,) * n)), dtype=np.int64)
        kids_lv = np.repeat(self.levels[mask] + 1, len(bits))
        kids_co = (2 * self.coords[mask])[:, None, :] + bits[None, :, :]
        kids_val = np.repeat(self.values[mask], len(bits))
        keep = ~mask
        return StepFunction(n,
                            np.concatenate((self.levels[keep], kids_lv)),
                            np.concatenate((self.coords[keep], kids_co.reshape(-1, n))),
                            np.concatenate((self.values[keep], kids_val)), check=False)

    def refine_uniform(self, depth: int) -> "StepFunction":
        """Split every leaf down to at least the given depth."""
        cubes = [c for leaf in self.leaves if leaf.level < depth
                 for c in leaf.descendants(depth - leaf.level)]
        return self.refine(cubes)

    def allclose(self, other: "StepFunction", atol: float = 1e-12, rtol: float = 0.0) -> bool:
        a, b = common_refinement(self, other)
        return bool(np.allclose(a.values, b.values, atol=atol, rtol=rtol))

    def max_abs_diff(self, other: "StepFunction") -> float:
        a, b = common_refinement(self, other)
        return float(np.max(np.abs(a.values - b.values)))

    # ------------------------------------------------------------------ serialization

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "leaves": [
                {"level": int(l), "coords": [int(c) for c in co], "value": float(v)}
                for l, co, v in zip(self.levels, self.coords, self.values)
            ],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json())

    @classmethod
    def from_json(cls, obj: dict) -> "StepFunction":
        try:
            dim = int(obj["dim"])
            leaves = obj["leaves"]
            levels = [int(leaf["level"]) for leaf in leaves]
            coords = [[int(c) for c in leaf["coords"]] for leaf in leaves]
            values = [float(leaf["value"]) for leaf in leaves]
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed step function JSON: {exc}") from exc
        if any(len(c) != dim for c in coords):
            raise ValueError("leaf coordinate length does not match dim")
        return cls(dim, levels, coords, values)

    @classmethod
    def loads(cls, text: str) -> "StepFunction":
        return cls.from_json(json.loads(text))

    def __repr__(self):
        if self.size <= 8:
            body = ", ".join(f"{c!r}: {v:g}" for c, v in self.cells())
            return f"StepFunction({body})"
        return f"StepFunction(dim={self.dim}, leaves={self.size}, depth={self.depth})"


def _path_partition(Q: DyadicCube) -> tuple[np.ndarray, np.ndarray]:
    """The coarsest partition containing Q as a leaf (siblings along its ancestor chain)."""
    levels, coords = [Q.level], [Q.coords]
    cur = Q
    while cur.level > 0:
        for sib in cur.parent.children():
            if sib != cur:
                levels.append(sib.level)
                coords.append(sib.coords)
        cur = cur.parent
    return np.array(levels, dtype=np.int64), np.array(coords, dtype=np.int64).reshape(len(levels), Q.dim)


def _refine_many(funcs: Sequence[StepFunction], extra=None) -> list[StepFunction]:
    dim = funcs[0].dim
    if any(f.dim != dim for f in funcs):
        raise ValueError("dimension mismatch")
    level_parts = [f.levels for f in funcs]
    coord_parts = [f.coords for f in funcs]
    if extra is not None:
        level_parts.append(extra[0])
        coord_parts.append(extra[1])
    levels = np.concatenate(level_parts)
    coords = np.concatenate(coord_parts)
    D = int(levels.max())
    _check_bits(D, dim)
    keys = morton_keys(coords, levels, D)
    # finest cell starting at every boundary
    order = np.lexsort((-levels, keys))
    keys, levels = keys[order], levels[order]
    first = np.ones(len(keys), dtype=bool)
    first[1:] = keys[1:] != keys[:-1]
    keys, levels = keys[first], levels[first]
    if all(f.size == len(keys) and f.depth == D for f in funcs):
        return list(funcs)
    new_coords = morton_coords(keys, levels, D, dim)
    out = []
    for f in funcs:
        fk = f.keys << ((D - f.depth) * dim)
        idx = np.searchsorted(fk, keys, side="right") - 1
        out.append(StepFunction(dim, levels, new_coords, f.values[idx], check=False))
    return out


def common_refinement(f: StepFunction, g: StepFunction, *more: StepFunction) -> tuple[StepFunction, ...]:
    """Re-express the inputs on one shared partition without changing them pointwise."""
    funcs = (f, g) + more
    if any(h.dim != f.dim for h in funcs):
        raise ValueError(f"dimension mismatch: {[h.dim for h in funcs]}")
    return tuple(_refine_many(funcs))


def build_uniform(n: int, L: int, vals: Sequence[float]) -> StepFunction:
    """Step function on the complete tree of depth L; vals are in lexicographic coordinate order."""
    vals = np.asarray(vals, dtype=np.float64).reshape(-1)
    count = 1 << (n * L)
    if len(vals) != count:
        raise ValueError(f"expected {count} values for dimension {n}, level {L}; got {len(vals)}")
    if not np.all(np.isfinite(vals)):
        raise ValueError("step function values must be finite")
    grids = np.meshgrid(*[np.arange(1 << L)] * n, indexing="ij")
    coords = np.stack([g.reshape(-1) for g in grids], axis=1)
    return StepFunction(n, np.full(count, L), coords, vals)


def cube_average(f: StepFunction, Q: DyadicCube) -> float:
    return f.average(Q)
