"""Dyadic cubes of the unit cube [0, 1)^n."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterator, Sequence


@dataclass(frozen=True, order=True)
class DyadicCube:
    """The cube prod_d [k_d 2^-level, (k_d + 1) 2^-level) inside [0, 1)^dim."""

    dim: int
    level: int
    coords: tuple[int, ...]

    def __post_init__(self):
        coords = tuple(int(k) for k in self.coords)
        object.__setattr__(self, "coords", coords)
        if self.dim < 1:
            raise ValueError(f"dimension must be positive, got {self.dim}")
        if self.level < 0:
            raise ValueError(f"level must be >= 0, got {self.level}")
        if len(coords) != self.dim:
            raise ValueError(f"expected {self.dim} coordinates, got {len(coords)}")
        side = 1 << self.level
        for k in coords:
            if not 0 <= k < side:
                raise ValueError(f"cube {coords} at level {self.level} lies outside the root cube")

    @classmethod
    def root(cls, dim: int = 1) -> "DyadicCube":
        return cls(dim, 0, (0,) * dim)

    @classmethod
    def interval(cls, level: int, k: int) -> "DyadicCube":
        """The dyadic interval [k 2^-level, (k+1) 2^-level)."""
        return cls(1, level, (k,))

    @property
    def side(self) -> float:
        return 2.0 ** -self.level

    @property
    def measure(self) -> float:
        return 2.0 ** (-self.level * self.dim)

    @property
    def lower(self) -> tuple[float, ...]:
        return tuple(k * self.side for k in self.coords)

    @property
    def upper(self) -> tuple[float, ...]:
        return tuple((k + 1) * self.side for k in self.coords)

    @property
    def parent(self) -> "DyadicCube":
        if self.level == 0:
            raise ValueError("the root cube has no parent")
        return DyadicCube(self.dim, self.level - 1, tuple(k >> 1 for k in self.coords))

    def ancestor(self, tau: int) -> "DyadicCube":
        """The ancestor Q^tau with |Q^tau| = 2^(tau n) |Q|."""
        if tau < 0 or tau > self.level:
            raise ValueError(f"cube at level {self.level} has no ancestor of generation {tau}")
        return DyadicCube(self.dim, self.level - tau, tuple(k >> tau for k in self.coords))

    def children(self) -> list["DyadicCube"]:
        """The 2^n children in lexicographic order of their offsets."""
        return [
            DyadicCube(self.dim, self.level + 1, tuple(2 * k + b for k, b in zip(self.coords, bits)))
            for bits in product((0, 1), repeat=self.dim)
        ]

    @property
    def left(self) -> "DyadicCube":
        if self.dim != 1:
            raise ValueError("halves are only defined for intervals")
        return DyadicCube(1, self.level + 1, (2 * self.coords[0],))

    @property
    def right(self) -> "DyadicCube":
        if self.dim != 1:
            raise ValueError("halves are only defined for intervals")
        return DyadicCube(1, self.level + 1, (2 * self.coords[0] + 1,))

    def contains(self, other: "DyadicCube") -> bool:
        """True when other is a (not necessarily proper) dyadic subcube."""
        if other.dim != self.dim or other.level < self.level:
            return False
        shift = other.level - self.level
        return all((k >> shift) == c for k, c in zip(other.coords, self.coords))

    def contains_point(self, x: Sequence[float]) -> bool:
        return all(lo <= xi < hi for xi, lo, hi in zip(x, self.lower, self.upper))

    def descendants(self, depth: int) -> Iterator["DyadicCube"]:
        """All subcubes exactly `depth` levels below, lexicographic in coordinates."""
        n = 1 << depth
        for offs in product(range(n), repeat=self.dim):
            yield DyadicCube(self.dim, self.level + depth,
                             tuple((k << depth) + o for k, o in zip(self.coords, offs)))

    def to_json(self) -> dict:
        return {"level": self.level, "coords": list(self.coords)}

    @classmethod
    def from_json(cls, obj: dict, dim: int | None = None) -> "DyadicCube":
        coords = tuple(obj["coords"])
        return cls(dim if dim is not None else len(coords), int(obj["level"]), coords)

    def __repr__(self):
        if self.dim == 1:
            k = self.coords[0]
            return f"I[{k}/2^{self.level}, {k + 1}/2^{self.level})"
        return f"Q(level={self.level}, coords={self.coords})"
