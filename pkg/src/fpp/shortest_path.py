"""Exact passage times T(a, b) on Z^d.

The lattice is infinite, so every query runs on a finite region that is
certified to contain every geodesic.  With minimum edge weight ``S_-`` > 0
and ``U`` the cost of the straight axis-by-axis path, a geodesic has at most
``L = floor(U / S_-)`` edges, so each of its vertices v satisfies
``|v - a|_1 + |v - b|_1 <= L``.  The search is confined to that L1 ellipse
(intersected with the mode's own bounds).  Fields with a free column
(weight 0 on H^i, blocked on V^i) use the same bound after collapsing
column i+1 onto column i, since only the free edges escape the ``S_-``
floor and they vanish under that collapse.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field as dc_field
from typing import Optional, Sequence, Union

import numpy as np

from fpp import _kernels as K
from fpp.errors import DomainError, NotCertifiableError
from fpp.lattice import Region, Vertex, edge_class, path_edges


@dataclass(frozen=True)
class Free:
    """All of Z^d."""


@dataclass(frozen=True)
class Cylinder:
    """The slab 0 <= x1 <= n."""

    n: int


@dataclass(frozen=True)
class Explicit:
    region: Region


Mode = Union[Free, Cylinder, Explicit]

FREE = Free()


def mode_region(mode: Mode, d: int) -> Region:
    if isinstance(mode, Free):
        return Region((None,) * d)
    if isinstance(mode, Cylinder):
        return Region.cylinder(mode.n, d)
    if isinstance(mode, Explicit):
        if mode.region.d != d:
            raise DomainError(f"region dimension {mode.region.d} != vertex dimension {d}")
        return mode.region
    raise DomainError(f"unknown mode {mode!r}")


@dataclass
class PassageResult:
    value: float
    geodesic: Optional[list[Vertex]]
    region_used: Region
    settled_count: int
    truncation_certified: bool
    edge_budget: Optional[int] = None


@dataclass
class PathStats:
    """Edge-class counts of a path: ``h_counts[i]`` = card(path ∩ H^i), likewise V."""

    h_counts: Counter = dc_field(default_factory=Counter)
    v_counts: Counter = dc_field(default_factory=Counter)
    length: int = 0

    def h_total(self, lo: int, hi: int) -> int:
        """Sum of h_counts[i] for lo <= i < hi."""
        return sum(self.h_counts[i] for i in range(lo, hi))

    def v_total(self, lo: int, hi: int) -> int:
        return sum(self.v_counts[i] for i in range(lo, hi))


def _bounds_arrays(region: Region) -> tuple[np.ndarray, np.ndarray]:
    rlo = np.array([-K.UNBOUNDED if b is None else b[0] for b in region.bounds], dtype=np.int64)
    rhi = np.array([K.UNBOUNDED if b is None else b[1] for b in region.bounds], dtype=np.int64)
    return rlo, rhi


def straight_path(a: Sequence[int], b: Sequence[int]) -> list[Vertex]:
    """Monotone path from a to b that moves along axis 1 first, then axis 2, ..."""
    cur = list(a)
    path = [tuple(cur)]
    for j in range(len(a)):
        step = 1 if b[j] > cur[j] else -1
        while cur[j] != b[j]:
            cur[j] += step
            path.append(tuple(cur))
    return path


def straight_cost(field, a: Sequence[int], b: Sequence[int]) -> float:
    params = field.kernel_params()
    if params is not None:
        fi, ff = params
        return float(K.straight_cost(fi, ff, np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64)))
    total = 0.0
    for e in path_edges(straight_path(a, b)):
        total += field.weight(e)
    return total


def _weight_table(field, params, lo: np.ndarray, shape: np.ndarray) -> np.ndarray:
    if params is not None:
        return np.full((len(shape), math.prod(int(s) for s in shape)), np.nan)
    return field.weight_table(lo, shape)


def passage_time(field, a: Sequence[int], b: Sequence[int], mode: Mode = FREE, *, pad: int = 0) -> PassageResult:
    """T(a, b) for ``field`` restricted to the mode's region.

    ``pad`` widens the certified edge budget, for checking that truncation
    does not affect the value.
    """
    a, b = tuple(int(x) for x in a), tuple(int(x) for x in b)
    if len(a) != len(b):
        raise DomainError(f"dimension mismatch between {a} and {b}")
    region = mode_region(mode, len(a))
    for v in (a, b):
        if v not in region:
            raise DomainError(f"{v} lies outside {region}")
    if a == b:
        return PassageResult(0.0, [a], Region(tuple((x, x) for x in a)), 1, True)

    rlo, rhi = _bounds_arrays(region)
    free_col = K.NO_COLUMN if field.free_column is None else field.free_column
    budget = -1
    unbounded = not region.bounded
    if unbounded:
        if not field.min_weight > 0:
            raise NotCertifiableError(
                f"truncation not certifiable: minimum edge weight is {field.min_weight}; "
                "give an Explicit bounded region")
        upper = straight_cost(field, a, b)
        if not math.isfinite(upper):
            raise NotCertifiableError("truncation not certifiable: the straight path is blocked")
        budget = int(K.edge_budget(upper, field.min_weight)) + pad
    av, bv = np.array(a, dtype=np.int64), np.array(b, dtype=np.int64)
    lo, shape, ea, eb = K.plan_region(av, bv, rlo, rhi, budget, free_col, unbounded)
    used = Region(tuple((int(l), int(l + s - 1)) for l, s in zip(lo, shape)))
    params = field.kernel_params()
    W = _weight_table(field, params, lo, shape)
    fi, ff = params or _EXPLICIT_PARAMS
    src, dst = K.flat_index(av, lo, shape), K.flat_index(bv, lo, shape)
    value, pred, settled = K.dijkstra(fi, ff, W, lo, shape, src, dst, unbounded, ea, eb, budget, free_col)
    geodesic = None
    if math.isfinite(value):
        idx = K.walk(pred, src, dst)
        coords = np.column_stack(np.unravel_index(idx, tuple(shape))) + lo
        geodesic = list(map(tuple, coords.tolist()))
    return PassageResult(float(value), geodesic, used, int(settled), True, budget if unbounded else None)


_EXPLICIT_PARAMS = (np.array([K.EXPLICIT, 0, 0, 0, 0, 0, 0, 0, 0], dtype=np.int64), np.zeros(3))


def path_cost(field, path: Sequence[Sequence[int]]) -> float:
    """tau(r): weights summed along the path in traversal order."""
    total = 0.0
    for e in path_edges(path):
        total += field.weight(e)
    return total


def path_stats(geodesic: Sequence[Sequence[int]], n: Optional[int] = None) -> PathStats:
    """Count each traversed edge into its H^i / V^i bucket.

    With ``n`` given, columns 0..n are present in both counters even when zero.
    """
    stats = PathStats()
    if n is not None:
        for i in range(n + 1):
            stats.h_counts[i] += 0
            stats.v_counts[i] += 0
    for e in path_edges(geodesic):
        cls = edge_class(e)
        (stats.h_counts if cls.kind == "H" else stats.v_counts)[cls.column] += 1
        stats.length += 1
    return stats


def v_count_bound(result: PassageResult, n: int, s_minus: float) -> float:
    """Upper bound (T - n S_-) / S_- on the number of transverse edges of a geodesic to n e1."""
    if not s_minus > 0:
        raise DomainError(f"S_- = {s_minus} must be positive")
    if not math.isfinite(result.value):
        raise DomainError("passage time is infinite")
    return (result.value - n * s_minus) / s_minus
