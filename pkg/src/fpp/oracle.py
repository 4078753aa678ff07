"""Brute-force references for the shortest-path engine and for a(n) on tiny regions."""

from __future__ import annotations

import heapq
import itertools
import math
import numbers
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping, Sequence, Union

import numba
import numpy as np

from fpp.errors import DomainError, OracleSizeError
from fpp.lattice import Edge, Region, Vertex, neighbors
from fpp.weights import Dirac, TwoPoint, WeightSpec

MAX_VERTICES = 16
MAX_CONFIGURATIONS = 2**22


def _weight_fn(weights) -> Callable[[Edge], object]:
    if isinstance(weights, Mapping):
        return weights.__getitem__
    return weights.weight


def _adjacency(weights, region: Region) -> tuple[list[Vertex], list[list[tuple[int, object]]]]:
    w = _weight_fn(weights)
    verts = list(region.vertices())
    index = {v: k for k, v in enumerate(verts)}
    adj = []
    for v in verts:
        out = []
        for u, e in neighbors(v, region):
            x = w(e)
            if x != math.inf:
                out.append((index[u], x))
        adj.append(out)
    return verts, adj


def brute_force_from(weights, a: Sequence[int], region: Region) -> dict[Vertex, object]:
    """Minimum cost over all simple paths from ``a`` to every reachable vertex of ``region``.

    ``weights`` is a field (anything with ``.weight(edge)``) or a mapping
    ``Edge -> weight``; Fraction weights give exact results. Costs are summed
    in traversal order from ``a``.
    """
    if not region.bounded or region.size > MAX_VERTICES:
        raise OracleSizeError(f"brute force is limited to bounded regions of <= {MAX_VERTICES} vertices")
    a = tuple(a)
    if a not in region:
        raise DomainError(f"{a} lies outside {region}")
    verts, adj = _adjacency(weights, region)
    best = _simple_path_minima(adj, verts.index(a))
    return {v: c for v, c in zip(verts, best) if c is not None}


@numba.njit(cache=True)
def _enumerate_compiled(nbr, wts, deg, start):
    """Depth-first walk over every simple path from ``start``, with an explicit stack."""
    nv = nbr.shape[0]
    best = np.full(nv, np.inf)
    best[start] = 0.0
    on_path = np.zeros(nv, np.bool_)
    on_path[start] = True
    stack_v = np.empty(nv, np.int64)
    stack_k = np.empty(nv, np.int64)
    stack_c = np.empty(nv, np.float64)
    top = 0
    stack_v[0], stack_k[0], stack_c[0] = start, 0, 0.0
    while top >= 0:
        v = stack_v[top]
        k = stack_k[top]
        if k == deg[v]:
            on_path[v] = False
            top -= 1
            continue
        stack_k[top] = k + 1
        u = nbr[v, k]
        if on_path[u]:
            continue
        c = stack_c[top] + wts[v, k]
        if c < best[u]:
            best[u] = c
        on_path[u] = True
        top += 1
        stack_v[top], stack_k[top], stack_c[top] = u, 0, c
    return best


def _all_float(adj) -> bool:
    return all(isinstance(x, (float, np.floating)) or (isinstance(x, numbers.Integral)) for out in adj for _, x in out)


def _simple_path_minima(adj, start: int) -> list:
    if _all_float(adj):
        nbr = np.zeros((len(adj), max(1, max(len(o) for o in adj))), np.int64)
        wts = np.zeros(nbr.shape)
        deg = np.array([len(o) for o in adj], np.int64)
        for v, out in enumerate(adj):
            for k, (u, x) in enumerate(out):
                nbr[v, k], wts[v, k] = u, float(x)
        best = _enumerate_compiled(nbr, wts, deg, start)
        return [None if math.isinf(c) else float(c) for c in best]
    return _simple_path_minima_exact(adj, start)


def _simple_path_minima_exact(adj, start: int) -> list:
    best: list = [None] * len(adj)
    best[start] = 0
    on_path = [False] * len(adj)
    on_path[start] = True

    def extend(v, cost):
        for u, x in adj[v]:
            if on_path[u]:
                continue
            c = cost + x
            if best[u] is None or c < best[u]:
                best[u] = c
            on_path[u] = True
            extend(u, c)
            on_path[u] = False

    extend(start, 0)
    return best


def brute_force_all(weights, region: Region) -> dict[tuple[Vertex, Vertex], object]:
    """brute_force_passage for every ordered pair of vertices of ``region``."""
    if not region.bounded or region.size > MAX_VERTICES:
        raise OracleSizeError(f"brute force is limited to bounded regions of <= {MAX_VERTICES} vertices")
    verts, adj = _adjacency(weights, region)
    out = {}
    for k, a in enumerate(verts):
        for b, c in zip(verts, _simple_path_minima(adj, k)):
            out[a, b] = math.inf if c is None else c
    return out


def brute_force_passage(weights, a: Sequence[int], b: Sequence[int], region: Region):
    """inf over simple paths a -> b inside ``region``; +inf when b is unreachable."""
    b = tuple(b)
    if b not in region:
        raise DomainError(f"{b} lies outside {region}")
    return brute_force_from(weights, a, region).get(b, math.inf)


def reference_passage(weights, a: Sequence[int], b: Sequence[int], region: Region) -> float:
    """Textbook heap Dijkstra on an explicit bounded region, for instances too big to enumerate."""
    if not region.bounded:
        raise DomainError("reference Dijkstra needs a bounded region")
    w = _weight_fn(weights)
    a, b = tuple(a), tuple(b)
    dist = {a: 0.0}
    heap = [(0.0, a)]
    done = set()
    while heap:
        du, u = heapq.heappop(heap)
        if u in done:
            continue
        if u == b:
            return du
        done.add(u)
        for v, e in neighbors(u, region):
            x = w(e)
            if x == math.inf or v in done:
                continue
            nd = du + x
            if nd < dist.get(v, math.inf):
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return math.inf


@dataclass(frozen=True)
class ExactExpectation:
    value: Union[Fraction, float]
    configurations: int

    def __float__(self):
        return float(self.value)


def _rational(x: float) -> Fraction:
    # Read parameters as the decimal literals they were written as.
    return Fraction(repr(float(x)))


def atoms(spec: WeightSpec) -> list[tuple[Fraction, Fraction]]:
    """(value, probability) pairs of a finite-support law, as exact rationals."""
    if isinstance(spec, Dirac):
        return [(_rational(spec.c), Fraction(1))]
    if isinstance(spec, TwoPoint):
        p = _rational(spec.p_hi)
        pairs = [(_rational(spec.lo), 1 - p), (_rational(spec.hi), p)]
        if spec.lo == spec.hi:
            return [(pairs[0][0], Fraction(1))]
        return [(v, q) for v, q in pairs if q > 0]
    raise DomainError(f"exact expectation needs a finite-support law, got {spec!r}")


def exact_expectation(spec: WeightSpec, a: Sequence[int], b: Sequence[int], region: Region) -> ExactExpectation:
    """E T(a, b) restricted to ``region``, summed over every weight configuration."""
    support = atoms(spec)
    edges = list(region.edges()) if region.bounded else []
    if not region.bounded or region.size > MAX_VERTICES:
        raise OracleSizeError(f"exact expectation is limited to bounded regions of <= {MAX_VERTICES} vertices")
    configurations = len(support) ** len(edges)
    if configurations > MAX_CONFIGURATIONS:
        raise OracleSizeError(f"{configurations} configurations exceed the cap {MAX_CONFIGURATIONS}")
    total = Fraction(0)
    for choice in itertools.product(support, repeat=len(edges)):
        prob = Fraction(1)
        for _, q in choice:
            prob *= q
        assignment = {e: v for e, (v, _) in zip(edges, choice)}
        total += prob * brute_force_passage(assignment, a, b, region)
    return ExactExpectation(total, configurations)
