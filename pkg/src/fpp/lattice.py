"""Geometry of the hypercubic lattice Z^d.

Vertices are plain tuples of ints. Axes are numbered 1..d in the public API,
so ``Edge(base, 1)`` is the edge from ``base`` to ``base + e1``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

from fpp.errors import DomainError, MalformedPathError

Vertex = tuple[int, ...]


def basis(k: int, d: int) -> Vertex:
    """The unit vector e_k in Z^d (k is 1-based)."""
    if not 1 <= k <= d:
        raise DomainError(f"axis {k} outside 1..{d}")
    return tuple(1 if j == k - 1 else 0 for j in range(d))


def on_axis(n: int, d: int) -> Vertex:
    """The vertex n*e1."""
    return (n,) + (0,) * (d - 1)


def shift(v: Sequence[int], axis: int, step: int = 1) -> Vertex:
    w = list(v)
    w[axis - 1] += step
    return tuple(w)


@dataclass(frozen=True, order=True)
class Edge:
    """Unordered nearest-neighbour pair ``{base, base + e_axis}``.

    Always construct through :meth:`between` (or with ``base`` already the
    endpoint with the smaller ``axis`` coordinate); equality is then
    equality of unordered pairs.
    """

    base: Vertex
    axis: int

    def __post_init__(self):
        if not 1 <= self.axis <= len(self.base):
            raise DomainError(f"axis {self.axis} outside 1..{len(self.base)}")

    @classmethod
    def between(cls, u: Sequence[int], v: Sequence[int]) -> "Edge":
        u, v = tuple(u), tuple(v)
        if len(u) != len(v):
            raise DomainError(f"dimension mismatch between {u} and {v}")
        diff = [j for j in range(len(u)) if u[j] != v[j]]
        if len(diff) != 1 or abs(u[diff[0]] - v[diff[0]]) != 1:
            raise DomainError(f"{u} and {v} are not lattice neighbours")
        j = diff[0]
        return cls(u if u[j] < v[j] else v, j + 1)

    @property
    def tip(self) -> Vertex:
        return shift(self.base, self.axis)

    @property
    def endpoints(self) -> tuple[Vertex, Vertex]:
        return self.base, self.tip

    @property
    def column(self) -> int:
        return self.base[0]


@dataclass(frozen=True)
class EdgeClass:
    """``H(i)`` for axis-1 edges from column i to i+1, ``V(i)`` for transverse edges in column i."""

    kind: str
    column: int

    def __repr__(self):
        return f"{self.kind}({self.column})"


def H(i: int) -> EdgeClass:
    return EdgeClass("H", i)


def V(i: int) -> EdgeClass:
    return EdgeClass("V", i)


def edge_class(e: Edge) -> EdgeClass:
    return EdgeClass("H" if e.axis == 1 else "V", e.base[0])


@dataclass(frozen=True)
class Region:
    """Axis-aligned box in Z^d; ``None`` bounds an axis from neither side."""

    bounds: tuple[Optional[tuple[int, int]], ...]

    def __post_init__(self):
        bounds = tuple(None if b is None else (int(b[0]), int(b[1])) for b in self.bounds)
        object.__setattr__(self, "bounds", bounds)
        if len(bounds) < 2:
            raise DomainError(f"dimension must be at least 2, got {len(bounds)}")
        for b in bounds:
            if b is not None and b[0] > b[1]:
                raise DomainError(f"empty axis range {b}")

    @classmethod
    def box(cls, *ranges: tuple[int, int]) -> "Region":
        return cls(tuple(ranges))

    @classmethod
    def cylinder(cls, n: int, d: int, radius: Optional[int] = None) -> "Region":
        """Slab 0 <= x1 <= n, other axes limited to [-radius, radius] (unbounded if None)."""
        other = None if radius is None else (-radius, radius)
        return cls(((0, n),) + (other,) * (d - 1))

    @property
    def d(self) -> int:
        return len(self.bounds)

    @property
    def bounded(self) -> bool:
        return all(b is not None for b in self.bounds)

    @property
    def lo(self) -> Vertex:
        self._require_bounded()
        return tuple(b[0] for b in self.bounds)

    @property
    def hi(self) -> Vertex:
        self._require_bounded()
        return tuple(b[1] for b in self.bounds)

    @property
    def shape(self) -> tuple[int, ...]:
        self._require_bounded()
        return tuple(b[1] - b[0] + 1 for b in self.bounds)

    @property
    def size(self) -> int:
        size = 1
        for s in self.shape:
            size *= s
        return size

    def _require_bounded(self):
        if not self.bounded:
            raise DomainError("operation requires a region bounded on every axis")

    def contains(self, v: Sequence[int]) -> bool:
        if len(v) != self.d:
            return False
        return all(b is None or b[0] <= x <= b[1] for x, b in zip(v, self.bounds))

    def __contains__(self, v) -> bool:
        return self.contains(v)

    def issubset(self, other: "Region") -> bool:
        if other.d != self.d:
            return False
        for mine, theirs in zip(self.bounds, other.bounds):
            if theirs is None:
                continue
            if mine is None or mine[0] < theirs[0] or mine[1] > theirs[1]:
                return False
        return True

    def vertices(self) -> Iterator[Vertex]:
        """All vertices, in vertex_index order."""
        return itertools.product(*(range(lo, hi + 1) for lo, hi in self.bounds))

    def edges(self) -> Iterator[Edge]:
        for v in self.vertices():
            for axis in range(1, self.d + 1):
                w = shift(v, axis)
                if self.contains(w):
                    yield Edge(v, axis)

    def to_json(self) -> dict:
        return {"d": self.d, "bounds": [None if b is None else list(b) for b in self.bounds]}

    @classmethod
    def from_json(cls, obj: dict) -> "Region":
        bounds = obj["bounds"]
        if len(bounds) != obj["d"]:
            raise DomainError(f"region has d={obj['d']} but {len(bounds)} bounds")
        return cls(tuple(None if b is None else tuple(b) for b in bounds))


def neighbors(v: Sequence[int], r: Region) -> list[tuple[Vertex, Edge]]:
    v = tuple(v)
    if not r.contains(v):
        raise DomainError(f"{v} lies outside {r}")
    out = []
    for axis in range(1, r.d + 1):
        for step in (-1, 1):
            w = shift(v, axis, step)
            if r.contains(w):
                out.append((w, Edge.between(v, w)))
    return out


def vertex_index(v: Sequence[int], r: Region) -> int:
    """Row-major index of v in a bounded region, axis 1 outermost."""
    r._require_bounded()
    if not r.contains(v):
        raise DomainError(f"{tuple(v)} lies outside {r}")
    index = 0
    for x, (lo, hi) in zip(v, r.bounds):
        index = index * (hi - lo + 1) + (x - lo)
    return index


def vertex_at(index: int, r: Region) -> Vertex:
    """Inverse of vertex_index."""
    if not 0 <= index < r.size:
        raise DomainError(f"index {index} outside [0, {r.size})")
    coords = []
    for lo, hi in reversed(r.bounds):
        width = hi - lo + 1
        coords.append(lo + index % width)
        index //= width
    return tuple(reversed(coords))


def path_edges(path: Sequence[Sequence[int]]) -> list[Edge]:
    """Edges traversed by consecutive vertices; raises MalformedPathError on a gap."""
    edges = []
    for u, v in zip(path, path[1:]):
        try:
            edges.append(Edge.between(u, v))
        except DomainError as exc:
            raise MalformedPathError(str(exc)) from None
    return edges
