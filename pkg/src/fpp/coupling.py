"""The column coupling behind a(n) >= a(n-1) + margin, made checkable sample by sample.

For a column i, the modified field tau^i makes every H^i edge free and
every V^i edge impassable.  Collapsing column i+1 onto column i then turns
the n-problem under tau^i into the (n-1)-problem under the original
weights, edge for edge (``contract_column``).  Rerouting a geodesic around
its V^i edges (``surgery``) bounds T^i from above, and summing over i gives
the domination inequality checked by ``verify_coupling``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field as dc_field
from typing import Optional, Sequence

import numpy as np

from fpp import _kernels as K
from fpp._parallel import map_replicates
from fpp.errors import DomainError, HypothesisError
from fpp.lattice import Edge, Vertex, edge_class, on_axis, path_edges, shift
from fpp.shortest_path import FREE, Cylinder, Free, Mode, _bounds_arrays, mode_region, passage_time, path_cost, path_stats
from fpp.weights import WeightField, WeightSpec, as_int64, resample_seed, theorem1_margin

THEOREM1 = "theorem1"
CS2 = "cs2"

# Absolute tolerance per unit of n for the floating-point inequality checks.
TOL_PER_N = 1e-9


@dataclass(frozen=True)
class ModifiedField:
    """tau^i: 0 on H^i, blocked on V^i, and (CS2 variant) the resampled copy on V^{i+1}."""

    base: WeightField
    column: int
    variant: str = THEOREM1
    resample: Optional[WeightField] = None

    def __post_init__(self):
        if self.variant not in (THEOREM1, CS2):
            raise DomainError(f"unknown variant {self.variant!r}")
        if (self.variant == CS2) != (self.resample is not None):
            raise DomainError("the CS2 variant needs a resample field, and only it")
        if self.resample is not None and self.resample.spec != self.base.spec:
            raise DomainError("resample field must share the base law")

    @property
    def spec(self) -> WeightSpec:
        return self.base.spec

    @property
    def min_weight(self) -> float:
        return self.base.min_weight

    @property
    def free_column(self) -> int:
        return self.column

    def weight(self, e: Edge) -> float:
        cls = edge_class(e)
        if cls.column == self.column:
            return 0.0 if cls.kind == "H" else math.inf
        if self.variant == CS2 and cls.kind == "V" and cls.column == self.column + 1:
            return self.resample.weight(e)
        return self.base.weight(e)

    def kernel_params(self):
        fi, ff = self.base.kernel_params()
        fi[3] = K.THEOREM1 if self.variant == THEOREM1 else K.CS2
        fi[4] = self.column
        if self.resample is not None:
            fi[5] = as_int64(self.resample.master_seed)
            fi[6] = self.resample.replicate
        return fi, ff


def modified_field(field: WeightField, i: int, variant: str = THEOREM1,
                   resample: Optional[WeightField] = None) -> ModifiedField:
    return ModifiedField(field, i, variant, resample)


@dataclass(frozen=True)
class ContractedField:
    """The original weights seen through the collapse of column ``column`` + 1 onto ``column``.

    Edges based at x1 < column keep their weights; everything from the merged
    column rightwards reads the edge one step further along e1.
    """

    base: WeightField
    column: int

    @property
    def min_weight(self) -> float:
        return self.base.min_weight

    free_column = None

    def weight(self, e: Edge) -> float:
        if e.base[0] >= self.column:
            e = Edge(shift(e.base, 1), e.axis)
        return self.base.weight(e)

    def kernel_params(self):
        fi, ff = self.base.kernel_params()
        fi[7] = 1
        fi[8] = self.column
        return fi, ff


def contract_column(field: WeightField, i: int, n: int) -> ContractedField:
    """Weights on the (n-1)-problem whose passage times equal those of tau^i on the n-problem."""
    if not 0 <= i <= n - 1:
        raise DomainError(f"column {i} outside 0..{n - 1}")
    return ContractedField(field, i)


def contracted_mode(mode: Mode) -> Mode:
    if isinstance(mode, Cylinder):
        return Cylinder(mode.n - 1)
    if isinstance(mode, Free):
        return mode
    raise DomainError("column contraction is defined for free and cylinder modes")


def surgery(pi: Sequence[Sequence[int]], i: int) -> list[Vertex]:
    """Replace every V^i step x -> y of ``pi`` by x -> x+e1 -> y+e1 -> y."""
    pi = [tuple(v) for v in pi]
    edges = path_edges(pi)
    out = [pi[0]]
    for (x, y), e in zip(zip(pi, pi[1:]), edges):
        if e.axis != 1 and e.base[0] == i:
            out.extend([shift(x, 1), shift(y, 1)])
        out.append(y)
    return out


# -- the proof chain ---------------------------------------------------------

@dataclass
class CouplingReport:
    n: int
    T: float
    T_i: list[float]
    h_counts: list[int]
    v_counts: list[int]
    slack_ti: list[float]
    slack_somme: float
    slack_domination: float
    h_total_ok: bool
    v_bound_ok: bool
    replicate: Optional[int] = None
    slack_surgery: Optional[list[float]] = None

    def to_json(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}

    @property
    def min_slack(self) -> float:
        return min(min(self.slack_ti, default=math.inf), self.slack_somme, self.slack_domination)


def proof_chain(n: int, T, Ti, h, v, s_minus: float, s_plus: float) -> dict:
    """Slacks (RHS - LHS) of every inequality in the chain, vectorised over replicates.

    T: (R,); Ti: (R, n); h, v: (R, >= n) edge counts of the geodesic for columns 0, 1, ...
    """
    T, Ti = np.asarray(T, float), np.asarray(Ti, float)
    h = np.asarray(h)[:, :n]
    v = np.asarray(v)[:, :n]
    tol = TOL_PER_N * max(n, 1)
    spread = s_plus - s_minus
    h_sum = h.sum(axis=1)
    v_sum = v.sum(axis=1)
    sum_Ti = Ti.sum(axis=1)
    slack_ti = T[:, None] - s_minus * h + spread * v - Ti
    slack_somme = n * T - s_minus * h_sum + spread * v_sum - sum_Ti
    slack_domination = n * T - n * s_minus + n * spread**2 / s_minus - sum_Ti
    h_total_ok = h_sum >= n
    v_bound = (T - n * s_minus) / s_minus
    v_bound_ok = (
        (v_sum <= v_bound + tol)
        & (T >= s_minus * (v_sum + h_sum) - tol)
        & (T <= n * s_plus + tol)
    )
    return {
        "slack_ti": slack_ti,
        "slack_somme": slack_somme,
        "slack_domination": slack_domination,
        "h_total_ok": h_total_ok,
        "v_bound_ok": v_bound_ok,
    }


def _require_theorem1(spec: WeightSpec) -> float:
    applies, margin = theorem1_margin(spec)
    if not applies:
        raise HypothesisError(f"{spec!r} does not satisfy 0 < S_- and S_+ <= 2 S_-")
    return margin


def verify_coupling(field: WeightField, n: int, mode: Mode = FREE, *, d: int = 2) -> CouplingReport:
    """Run the whole chain on one field: T, a geodesic, every T^i, and all slacks."""
    spec = field.spec
    _require_theorem1(spec)
    if n < 1:
        raise DomainError(f"n={n} must be at least 1")
    origin, target = (0,) * d, on_axis(n, d)
    res = passage_time(field, origin, target, mode)
    stats = path_stats(res.geodesic, n)
    Ti = [passage_time(modified_field(field, i), origin, target, mode).value for i in range(n)]
    h = [stats.h_counts[i] for i in range(n + 1)]
    v = [stats.v_counts[i] for i in range(n + 1)]
    chain = proof_chain(n, [res.value], [Ti], [h], [v], spec.s_minus, spec.s_plus)
    spread = spec.s_plus - spec.s_minus
    surgery_slack = []
    for i in range(n):
        rerouted = surgery(res.geodesic, i)
        bound = res.value - spec.s_minus * stats.h_counts[i] + spread * stats.v_counts[i]
        surgery_slack.append(bound - path_cost(modified_field(field, i), rerouted))
    return CouplingReport(
        n=n, T=res.value, T_i=Ti, h_counts=h, v_counts=v,
        slack_ti=chain["slack_ti"][0].tolist(),
        slack_somme=float(chain["slack_somme"][0]),
        slack_domination=float(chain["slack_domination"][0]),
        h_total_ok=bool(chain["h_total_ok"][0]),
        v_bound_ok=bool(chain["v_bound_ok"][0]),
        replicate=field.replicate,
        slack_surgery=surgery_slack,
    )


def _batch_bounds(mode: Mode, n: int, d: int):
    if isinstance(mode, Cylinder) and mode.n != n:
        raise DomainError(f"cylinder width {mode.n} differs from n={n}")
    return _bounds_arrays(mode_region(mode, d))


def _coupling_chunk(reps, fi, ff, n, rlo, rhi, min_w):
    return K.batch_coupling(fi, ff, reps, n, rlo, rhi, min_w)


@dataclass
class CouplingBatch:
    """Coupling reports for replicates 0..R-1 of one (law, seed), stored column-wise."""

    spec: WeightSpec
    n: int
    master_seed: int
    T: np.ndarray
    Ti: np.ndarray
    h: np.ndarray
    v: np.ndarray
    length: np.ndarray
    chain: dict = dc_field(repr=False)

    @property
    def replicates(self) -> int:
        return len(self.T)

    def report(self, r: int) -> CouplingReport:
        c = self.chain
        return CouplingReport(
            n=self.n, T=float(self.T[r]), T_i=self.Ti[r].tolist(),
            h_counts=self.h[r].tolist(), v_counts=self.v[r].tolist(),
            slack_ti=c["slack_ti"][r].tolist(),
            slack_somme=float(c["slack_somme"][r]),
            slack_domination=float(c["slack_domination"][r]),
            h_total_ok=bool(c["h_total_ok"][r]), v_bound_ok=bool(c["v_bound_ok"][r]),
            replicate=r,
        )

    def summary(self) -> dict:
        c = self.chain
        tol = TOL_PER_N * self.n
        mins = {
            "min_slack_ti": float(c["slack_ti"].min()) if self.n else math.inf,
            "min_slack_somme": float(c["slack_somme"].min()),
            "min_slack_domination": float(c["slack_domination"].min()),
        }
        return {
            "n": self.n,
            "replicates": self.replicates,
            **mins,
            "h_total_ok": bool(c["h_total_ok"].all()),
            "v_bound_ok": bool(c["v_bound_ok"].all()),
            "tolerance": tol,
            "ok": bool(all(m >= -tol for m in mins.values()) and c["h_total_ok"].all() and c["v_bound_ok"].all()),
        }


def verify_coupling_batch(spec: WeightSpec, n: int, replicates: int, master_seed: int, *,
                          d: int = 2, mode: Mode = FREE, workers: int = 1) -> CouplingBatch:
    """verify_coupling over replicates 0..replicates-1, in compiled code."""
    _require_theorem1(spec)
    if n < 1:
        raise DomainError(f"n={n} must be at least 1")
    fi, ff = WeightField(spec, master_seed).kernel_params()
    rlo, rhi = _batch_bounds(mode, n, d)
    reps = np.arange(replicates, dtype=np.int64)
    T, Ti, h, v, length = map_replicates(_coupling_chunk, reps, workers, fi, ff, n, rlo, rhi, spec.s_minus)
    chain = proof_chain(n, T, Ti, h, v, spec.s_minus, spec.s_plus)
    return CouplingBatch(spec, n, master_seed, T, Ti, h, v, length, chain)


# -- the CS2 variant -----------------------------------------------------------

@dataclass
class Cs2Report:
    n: int
    T: float
    h_counts: list[int]
    v_counts: list[int]
    avg_Ti: list[float]
    se_Ti: list[float]
    rhs: list[float]
    slack: list[float]
    ok: list[bool]
    slack_somme2: float
    se_somme2: float
    somme2_ok: bool
    replicate: Optional[int] = None

    def to_json(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}


def cs2_chain(n: int, T, Ti, h, v, s_minus: float, mean: float, cushion: float = 3.0) -> dict:
    """Resample-averaged slacks of the CS2 inequalities. Ti: (R, n, K) with K >= 2 resamples."""
    T = np.asarray(T, float)
    Ti = np.asarray(Ti, float)
    h = np.asarray(h)[:, : n + 1]
    v = np.asarray(v)[:, : n + 1]
    k = Ti.shape[2]
    if k < 2:
        raise DomainError("need at least two resamples for a standard error")
    tol = TOL_PER_N * max(n, 1)
    excess = mean - s_minus
    avg = Ti.mean(axis=2)
    se = Ti.std(axis=2, ddof=1) / math.sqrt(k)
    rhs = T[:, None] - s_minus * h[:, :n] + excess * (v[:, :n] + v[:, 1 : n + 1])
    slack = rhs - avg
    ok = slack >= -cushion * se - tol
    somme_rhs = n * T - s_minus * h[:, :n].sum(axis=1) + 2 * excess * v[:, : n + 1].sum(axis=1)
    slack_somme2 = somme_rhs - avg.sum(axis=1)
    se_somme2 = np.sqrt((se**2).sum(axis=1))
    return {
        "avg_Ti": avg, "se_Ti": se, "rhs": rhs, "slack": slack, "ok": ok,
        "slack_somme2": slack_somme2, "se_somme2": se_somme2,
        "somme2_ok": slack_somme2 >= -cushion * se_somme2 - tol,
    }


def _require_cs2(spec: WeightSpec):
    if not spec.s_minus > 0:
        raise HypothesisError(f"{spec!r} has S_- = {spec.s_minus}; CS2 needs S_- > 0")
    if not math.isfinite(spec.mean):
        raise HypothesisError(f"{spec!r} has infinite mean")


def cs2_resample(field: WeightField, i: int, k: int) -> WeightField:
    """The k-th independent copy used for column i of ``field``'s CS2 check."""
    return WeightField(field.spec, resample_seed(field.master_seed, field.replicate, i), k)


def verify_cs2(field: WeightField, resamples: int, n: int, mode: Mode = FREE, *, d: int = 2) -> Cs2Report:
    spec = field.spec
    _require_cs2(spec)
    origin, target = (0,) * d, on_axis(n, d)
    res = passage_time(field, origin, target, mode)
    stats = path_stats(res.geodesic, n)
    Ti = np.empty((n, resamples))
    for i in range(n):
        for k in range(resamples):
            mf = modified_field(field, i, CS2, cs2_resample(field, i, k))
            Ti[i, k] = passage_time(mf, origin, target, mode).value
    h = [stats.h_counts[i] for i in range(n + 1)]
    v = [stats.v_counts[i] for i in range(n + 1)]
    c = cs2_chain(n, [res.value], Ti[None], [h], [v], spec.s_minus, spec.mean)
    return Cs2Report(
        n=n, T=res.value, h_counts=h, v_counts=v,
        avg_Ti=c["avg_Ti"][0].tolist(), se_Ti=c["se_Ti"][0].tolist(), rhs=c["rhs"][0].tolist(),
        slack=c["slack"][0].tolist(), ok=c["ok"][0].tolist(),
        slack_somme2=float(c["slack_somme2"][0]), se_somme2=float(c["se_somme2"][0]),
        somme2_ok=bool(c["somme2_ok"][0]), replicate=field.replicate,
    )


def _cs2_chunk(reps, fi, ff, n, resamples, rlo, rhi, min_w):
    return K.batch_cs2(fi, ff, reps, n, resamples, rlo, rhi, min_w)


@dataclass
class Cs2Batch:
    spec: WeightSpec
    n: int
    resamples: int
    T: np.ndarray
    Ti: np.ndarray
    h: np.ndarray
    v: np.ndarray
    chain: dict = dc_field(repr=False)

    def report(self, r: int) -> Cs2Report:
        c = self.chain
        return Cs2Report(
            n=self.n, T=float(self.T[r]), h_counts=self.h[r].tolist(), v_counts=self.v[r].tolist(),
            avg_Ti=c["avg_Ti"][r].tolist(), se_Ti=c["se_Ti"][r].tolist(), rhs=c["rhs"][r].tolist(),
            slack=c["slack"][r].tolist(), ok=c["ok"][r].tolist(),
            slack_somme2=float(c["slack_somme2"][r]), se_somme2=float(c["se_somme2"][r]),
            somme2_ok=bool(c["somme2_ok"][r]), replicate=r,
        )

    def summary(self) -> dict:
        c = self.chain
        z = c["slack"] / np.where(c["se_Ti"] > 0, c["se_Ti"], np.inf)
        return {
            "n": self.n,
            "replicates": len(self.T),
            "resamples": self.resamples,
            "min_slack": float(c["slack"].min()),
            "min_slack_in_se": float(z.min()),
            "min_slack_somme2": float(c["slack_somme2"].min()),
            "all_ok": bool(c["ok"].all()),
            "somme2_ok": bool(c["somme2_ok"].all()),
            "ok": bool(c["ok"].all() and c["somme2_ok"].all()),
        }


def verify_cs2_batch(spec: WeightSpec, n: int, replicates: int, resamples: int, master_seed: int, *,
                     d: int = 2, mode: Mode = FREE, workers: int = 1) -> Cs2Batch:
    _require_cs2(spec)
    fi, ff = WeightField(spec, master_seed).kernel_params()
    rlo, rhi = _batch_bounds(mode, n, d)
    reps = np.arange(replicates, dtype=np.int64)
    T, Ti, h, v = map_replicates(_cs2_chunk, reps, workers, fi, ff, n, resamples, rlo, rhi, spec.s_minus)
    chain = cs2_chain(n, T, Ti, h, v, spec.s_minus, spec.mean)
    return Cs2Batch(spec, n, resamples, T, Ti, h, v, chain)


# -- the box event -------------------------------------------------------------

@dataclass(frozen=True)
class BoxEventField:
    """Deterministic weights: ``a`` on the faces of a box, ``b`` strictly inside it, ``background`` elsewhere.

    An edge is a face edge when both endpoints are in the box and they share
    an extreme coordinate on some axis other than the edge's own.
    """

    box_lo: Vertex
    box_hi: Vertex
    a: float
    b: float
    background: float

    @property
    def d(self) -> int:
        return len(self.box_lo)

    @property
    def min_weight(self) -> float:
        return min(self.a, self.b, self.background)

    free_column = None

    def kernel_params(self):
        return None

    def weight(self, e: Edge) -> float:
        u, w = e.endpoints
        lo, hi = self.box_lo, self.box_hi
        if not all(lo[j] <= u[j] and w[j] <= hi[j] for j in range(self.d)):
            return self.background
        on_face = any(u[j] in (lo[j], hi[j]) for j in range(self.d) if j != e.axis - 1)
        return self.a if on_face else self.b

    def weight_table(self, lo: np.ndarray, shape: np.ndarray) -> np.ndarray:
        d = len(shape)
        grids = np.meshgrid(*[np.arange(l, l + s) for l, s in zip(lo, shape)], indexing="ij")
        coords = [g.ravel() for g in grids]
        blo, bhi = np.asarray(self.box_lo), np.asarray(self.box_hi)
        in_box = np.ones(coords[0].shape, bool)
        for j in range(d):
            in_box &= (coords[j] >= blo[j]) & (coords[j] <= bhi[j])
        table = np.empty((d, coords[0].size))
        for axis in range(d):
            tip_in = in_box & (coords[axis] + 1 <= bhi[axis])
            face = np.zeros_like(in_box)
            for j in range(d):
                if j != axis:
                    face |= (coords[j] == blo[j]) | (coords[j] == bhi[j])
            table[axis] = np.where(tip_in, np.where(face, self.a, self.b), self.background)
        return table


@dataclass
class BoxEventResult:
    C: int
    D: int
    n: int
    t_prev: float
    t_n: float
    violation: bool
    field: BoxEventField = dc_field(repr=False)
    reverified: Optional[bool] = None


def _box_field(spec: WeightSpec, a: float, b: float, C: int, D: int, n: int,
               background: Optional[float], d: int) -> BoxEventField:
    if not spec.s_minus < a < b < spec.s_plus:
        raise DomainError(f"need S_- < a < b < S_+, got S_-={spec.s_minus}, a={a}, b={b}, S_+={spec.s_plus}")
    if not n > C >= 1 or D < 0:
        raise DomainError(f"need n > C >= 1 and D >= 0, got C={C}, D={D}, n={n}")
    if background is None:
        background = (a + b) / 2
    if not spec.s_minus <= background <= spec.s_plus:
        raise DomainError(f"background {background} lies outside the support")
    return BoxEventField((n - C,) + (-D,) * (d - 1), (n,) + (D,) * (d - 1), a, b, background)


def footnote_event(spec: WeightSpec, a: float, b: float, C: int, D: int, n: int, *,
                   background: Optional[float] = None, d: int = 2) -> BoxEventResult:
    """Compare T(0, (n-1)e1) and T(0, n e1) on the box-event configuration."""
    field = _box_field(spec, a, b, C, D, n, background, d)
    origin = (0,) * d
    t_prev = passage_time(field, origin, on_axis(n - 1, d)).value
    t_n = passage_time(field, origin, on_axis(n, d)).value
    return BoxEventResult(C, D, n, t_prev, t_n, t_prev > t_n, field)


def box_event_search(spec: WeightSpec, a: float, b: float, *, max_C: int = 12, max_D: int = 12,
                    max_n: int = 30, background: Optional[float] = None, d: int = 2,
                    reverify: bool = True) -> Optional[BoxEventResult]:
    """First (n, C, D), in increasing n then C then D, whose box event reverses T; None if none."""
    for n in range(2, max_n + 1):
        for C in range(1, min(max_C, n - 1) + 1):
            for D in range(0, max_D + 1):
                found = footnote_event(spec, a, b, C, D, n, background=background, d=d)
                if found.violation:
                    if reverify:
                        found.reverified = reverify_box_event(found)
                    return found
    return None


def reverify_box_event(found: BoxEventResult) -> bool:
    """Recompute both times with the oracle: exhaustive if the search box is tiny, else reference Dijkstra."""
    from fpp import oracle

    d = found.field.d
    agree = True
    for k, value in ((found.n - 1, found.t_prev), (found.n, found.t_n)):
        res = passage_time(found.field, (0,) * d, on_axis(k, d))
        region = res.region_used
        if region.size <= oracle.MAX_VERTICES:
            ref = oracle.brute_force_passage(found.field, (0,) * d, on_axis(k, d), region)
        else:
            ref = oracle.reference_passage(found.field, (0,) * d, on_axis(k, d), region)
        agree &= ref == value
    return bool(agree and found.t_prev > found.t_n)
