"""Monte Carlo estimates of a(n) and a'(n), paired monotonicity scans, and the
small-epsilon cylinder counterexample.

Replicate r of a run is the field ``WeightField(spec, master_seed, r)``; every
quantity compared within a replicate (T(0, n e1) against T(0, (n-1) e1),
a'(2) against a'(1), T against the T^i) is computed on that same field.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from fpp import _kernels as K
from fpp._parallel import map_replicates
from fpp.coupling import verify_coupling_batch
from fpp.errors import DomainError, HypothesisError, NotCertifiableError
from fpp.lattice import Region
from fpp.shortest_path import Cylinder, Explicit, Free, _bounds_arrays
from fpp.weights import TwoPoint, WeightField, WeightSpec, theorem1_margin

Z95 = 1.96


@dataclass(frozen=True)
class Estimate:
    mean: float
    std_err: float
    count: int
    ci95: tuple[float, float]

    @classmethod
    def from_samples(cls, samples: Iterable[float]) -> "Estimate":
        x = [float(s) for s in samples]
        count = len(x)
        if count < 2:
            raise DomainError(f"need at least 2 samples, got {count}")
        mean = math.fsum(x) / count
        var = math.fsum((s - mean) ** 2 for s in x) / (count - 1)
        se = math.sqrt(var / count)
        return cls(mean, se, count, (mean - Z95 * se, mean + Z95 * se))


@dataclass(frozen=True)
class ScanRow:
    n: int
    a_hat: Estimate
    diff_hat: Estimate
    margin: Optional[float]
    speed: float

    CSV_HEADER = "n,a_mean,a_stderr,diff_mean,diff_stderr,diff_ci_lo,diff_ci_hi,margin,speed"

    def csv_fields(self) -> list:
        return [self.n, self.a_hat.mean, self.a_hat.std_err, self.diff_hat.mean, self.diff_hat.std_err,
                self.diff_hat.ci95[0], self.diff_hat.ci95[1], self.margin, self.speed]


ModeArg = Union[str, Free, Cylinder, Explicit]


def _target_bounds(mode: ModeArg, n: int, d: int, height: Optional[int] = None) -> Region:
    if mode in ("free", None) or isinstance(mode, Free):
        return Region((None,) * d)
    if mode == "cylinder" or isinstance(mode, Cylinder):
        return Region.cylinder(n, d, height)
    if isinstance(mode, Explicit):
        return mode.region
    raise DomainError(f"unknown mode {mode!r}; expected 'free', 'cylinder' or Explicit(region)")


def _passage_chunk(reps, fi, ff, sources, targets, rlo, rhi, min_w):
    return (K.batch_passage(fi, ff, reps, sources, targets, rlo, rhi, min_w),)


def passage_samples(spec: WeightSpec, ns: Sequence[int], replicates: int, master_seed: int, *,
                    d: int = 2, mode: ModeArg = "free", height: Optional[int] = None,
                    workers: int = 1) -> np.ndarray:
    """T(0, n e1) for every replicate (rows) and every n in ``ns`` (columns).

    In cylinder mode column n is restricted to the slab 0 <= x1 <= n, and
    to |x_k| <= height on the other axes when a height is given.
    """
    regions = [_target_bounds(mode, n, d, height) for n in ns]
    if any(not r.bounded for r in regions) and not spec.s_minus > 0:
        raise NotCertifiableError(f"truncation not certifiable: S_- = {spec.s_minus}")
    bounds = [_bounds_arrays(r) for r in regions]
    rlo = np.array([b[0] for b in bounds], dtype=np.int64)
    rhi = np.array([b[1] for b in bounds], dtype=np.int64)
    targets = np.zeros((len(ns), d), dtype=np.int64)
    targets[:, 0] = ns
    for r, t in zip(regions, targets):
        if tuple(t) not in r or (0,) * d not in r:
            raise DomainError(f"endpoints 0 and {tuple(t)} must lie in {r}")
    sources = np.zeros_like(targets)
    fi, ff = WeightField(spec, master_seed).kernel_params()
    reps = np.arange(replicates, dtype=np.int64)
    min_w = spec.s_minus if spec.s_minus > 0 else 1.0
    (out,) = map_replicates(_passage_chunk, reps, workers, fi, ff, sources, targets, rlo, rhi, min_w)
    return out


def estimate_a(spec: WeightSpec, n: int, replicates: int, mode: ModeArg = "free", master_seed: int = 0, *,
               d: int = 2, workers: int = 1) -> Estimate:
    """Monte Carlo estimate of a(n) (free) or a'(n) (cylinder) over independent replicate fields."""
    if replicates < 2:
        raise DomainError(f"replicates={replicates} must be at least 2")
    samples = passage_samples(spec, [n], replicates, master_seed, d=d, mode=mode, workers=workers)
    return Estimate.from_samples(samples[:, 0])


def monotonicity_scan(spec: WeightSpec, n_max: int, replicates: int, mode: ModeArg = "free",
                      master_seed: int = 0, *, d: int = 2, workers: int = 1) -> list[ScanRow]:
    """Rows n = 1..n_max with a(n) and the paired increment T(0, n e1) - T(0, (n-1) e1)."""
    if replicates < 2:
        raise DomainError(f"replicates={replicates} must be at least 2")
    samples = passage_samples(spec, list(range(n_max + 1)), replicates, master_seed, d=d, mode=mode,
                              workers=workers)
    applies, margin = theorem1_margin(spec)
    rows = []
    for n in range(1, n_max + 1):
        a_hat = Estimate.from_samples(samples[:, n])
        diff = Estimate.from_samples(samples[:, n] - samples[:, n - 1])
        rows.append(ScanRow(n, a_hat, diff, margin if applies else None, a_hat.mean / n))
    return rows


def pathwise_reversals(spec: WeightSpec, n: int, replicates: int, master_seed: int = 0, *,
                       d: int = 2, mode: ModeArg = "free", workers: int = 1) -> int:
    """Number of replicates with T(0, (n-1) e1) > T(0, n e1)."""
    samples = passage_samples(spec, [n - 1, n], replicates, master_seed, d=d, mode=mode, workers=workers)
    return int(np.count_nonzero(samples[:, 0] > samples[:, 1]))


@dataclass(frozen=True)
class CounterexampleResult:
    epsilon: float
    p: float
    a1: Estimate
    a2: Estimate
    diff: Estimate
    uncertified: int

    @property
    def violation(self) -> bool:
        """The 95% interval of a'(2) - a'(1) lies strictly below zero."""
        return self.diff.ci95[1] < 0

    CSV_HEADER = ("epsilon,p,a1_mean,a1_stderr,a2_mean,a2_stderr,diff_mean,diff_stderr,"
                  "diff_ci_lo,diff_ci_hi,violation,uncertified")

    def csv_fields(self) -> list:
        return [self.epsilon, self.p, self.a1.mean, self.a1.std_err, self.a2.mean, self.a2.std_err,
                self.diff.mean, self.diff.std_err, self.diff.ci95[0], self.diff.ci95[1],
                int(self.violation), self.uncertified]


def _straight_chunk(reps, fi, ff, n):
    out = np.empty(len(reps))
    a = np.zeros(2, dtype=np.int64)
    b = np.array([n, 0], dtype=np.int64)
    for k, r in enumerate(reps):
        fi = fi.copy()
        fi[2] = r
        out[k] = K.straight_cost(fi, ff, a, b)
    return (out,)


def counterexample_run(epsilon: float, p: float, replicates: int, master_seed: int = 0, *,
                       height: Optional[int] = None, workers: int = 1) -> CounterexampleResult:
    """a'(1), a'(2) and their paired difference for TwoPoint(epsilon, 1, p) in d = 2.

    With ``height`` unset the transverse extent comes from the certified
    truncation; with a height, the runner also counts replicates whose
    certified extent would exceed it (``uncertified``).
    """
    if not epsilon > 0:
        raise NotCertifiableError("truncation not certifiable: epsilon must be positive")
    spec = TwoPoint(epsilon, 1.0, p)
    uncertified = 0
    if height is not None:
        if height < 0:
            raise DomainError(f"height={height} must be non-negative")
        uncertified = _count_uncertified(spec, master_seed, replicates, height, workers)
    samples = passage_samples(spec, [1, 2], replicates, master_seed, d=2, mode="cylinder", height=height,
                              workers=workers)
    return CounterexampleResult(
        epsilon, p,
        Estimate.from_samples(samples[:, 0]),
        Estimate.from_samples(samples[:, 1]),
        Estimate.from_samples(samples[:, 1] - samples[:, 0]),
        uncertified,
    )


def _count_uncertified(spec, master_seed, replicates, height, workers) -> int:
    fi, ff = WeightField(spec, master_seed).kernel_params()
    reps = np.arange(replicates, dtype=np.int64)
    worst = 0
    for n in (1, 2):
        (upper,) = map_replicates(_straight_chunk, reps, workers, fi, ff, n)
        budget = np.floor(upper / spec.s_minus * (1.0 + K.BUDGET_CUSHION))
        reach = (budget - n) // 2
        worst = max(worst, int(np.count_nonzero(reach > height)))
    return worst


def counterexample_sweep(epsilons: Sequence[float], ps: Sequence[float], replicates: int,
                         master_seed: int = 0, *, height: Optional[int] = None,
                         workers: int = 1) -> list[CounterexampleResult]:
    return [counterexample_run(eps, p, replicates, master_seed, height=height, workers=workers)
            for eps in epsilons for p in ps]


def domination_expectation_check(spec: WeightSpec, n: int, replicates: int, master_seed: int = 0, *,
                                 d: int = 2, workers: int = 1) -> Estimate:
    """Estimate of E[n T - sum_i T^i] - n * margin, which the coupling makes non-negative."""
    applies, margin = theorem1_margin(spec)
    if not applies:
        raise HypothesisError(f"{spec!r} does not satisfy 0 < S_- and S_+ <= 2 S_-")
    batch = verify_coupling_batch(spec, n, replicates, master_seed, d=d, workers=workers)
    return Estimate.from_samples(n * batch.T - batch.Ti.sum(axis=1) - n * margin)
