"""Edge-weight laws, seeded per-edge sampling, and the monotonicity criteria.

Sampling is stateless: the weight of an edge is a pure function of
``(master_seed, replicate, axis, base coordinates)``.  The key is folded
through the SplitMix64 finaliser, one word at a time::

    h = mix(seed ^ 0x6A09E667F3BCC909)
    h = mix(h ^ replicate)
    h = mix(h ^ axis)                 # 1-based
    h = mix(h ^ x_k)  for each coordinate, as two's-complement uint64
    u = ((h >> 11) + 0.5) * 2**-53    # exact, u in (0, 1)

and ``u`` goes through the law's inverse CDF (``WeightSpec.ppf``).  The
compiled kernels implement the same recipe; ``tests/test_weights.py`` pins
them to each other and to golden values.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from fpp import _kernels as K
from fpp.errors import DomainError, HypothesisError
from fpp.lattice import Edge

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_KEY_SALT = 0x6A09E667F3BCC909
_RESAMPLE_SALT = 0xBB67AE8584CAA73B

CS2_THRESHOLD = 1.0 + 2.0**-0.5


def mix64(z: int) -> int:
    z = (z + _GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & MASK64
    return z ^ (z >> 31)


def key_uniform(seed: int, replicate: int, axis: int, coords: Sequence[int]) -> float:
    h = mix64((seed & MASK64) ^ _KEY_SALT)
    h = mix64(h ^ (replicate & MASK64))
    h = mix64(h ^ (axis & MASK64))
    for x in coords:
        h = mix64(h ^ (x & MASK64))
    return ((h >> 11) + 0.5) * 2.0**-53


def resample_seed(master_seed: int, replicate: int, column: int) -> int:
    """Seed of the independent copy used for column ``column`` of a CS2 check."""
    h = mix64((master_seed & MASK64) ^ _RESAMPLE_SALT)
    h = mix64(h ^ (replicate & MASK64))
    return mix64(h ^ (column & MASK64))


def as_int64(x: int) -> int:
    x &= MASK64
    return x - (1 << 64) if x >= 1 << 63 else x


@dataclass(frozen=True)
class Dirac:
    c: float
    kind = "dirac"

    def __post_init__(self):
        _check_nonneg(c=self.c)

    @property
    def s_minus(self) -> float:
        return self.c

    @property
    def s_plus(self) -> float:
        return self.c

    @property
    def mean(self) -> float:
        return self.c

    def ppf(self, u: float) -> float:
        return self.c

    def kernel_params(self):
        return K.DIRAC, (self.c, 0.0, 0.0)

    def to_json(self) -> dict:
        return {"kind": self.kind, "c": self.c}


@dataclass(frozen=True)
class TwoPoint:
    """``hi`` with probability ``p_hi``, ``lo`` otherwise."""

    lo: float
    hi: float
    p_hi: float
    kind = "two_point"

    def __post_init__(self):
        _check_nonneg(lo=self.lo, hi=self.hi)
        if self.lo > self.hi:
            raise DomainError(f"lo={self.lo} exceeds hi={self.hi}")
        if not 0.0 <= self.p_hi <= 1.0:
            raise DomainError(f"p_hi={self.p_hi} outside [0, 1]")

    # Support is the set of atoms that carry mass.
    @property
    def s_minus(self) -> float:
        return self.hi if self.p_hi == 1.0 else self.lo

    @property
    def s_plus(self) -> float:
        return self.lo if self.p_hi == 0.0 else self.hi

    @property
    def mean(self) -> float:
        return self.lo + self.p_hi * (self.hi - self.lo)

    def ppf(self, u: float) -> float:
        return self.hi if u < self.p_hi else self.lo

    def kernel_params(self):
        return K.TWO_POINT, (self.lo, self.hi, self.p_hi)

    def to_json(self) -> dict:
        return {"kind": self.kind, "lo": self.lo, "hi": self.hi, "p_hi": self.p_hi}


@dataclass(frozen=True)
class Uniform:
    lo: float
    hi: float
    kind = "uniform"

    def __post_init__(self):
        _check_nonneg(lo=self.lo, hi=self.hi)
        if self.lo > self.hi:
            raise DomainError(f"lo={self.lo} exceeds hi={self.hi}")

    @property
    def s_minus(self) -> float:
        return self.lo

    @property
    def s_plus(self) -> float:
        return self.hi

    @property
    def mean(self) -> float:
        return (self.lo + self.hi) / 2

    def ppf(self, u: float) -> float:
        return self.lo + (self.hi - self.lo) * u

    def kernel_params(self):
        return K.UNIFORM, (self.lo, self.hi, 0.0)

    def to_json(self) -> dict:
        return {"kind": self.kind, "lo": self.lo, "hi": self.hi}


@dataclass(frozen=True)
class ShiftedExponential:
    shift: float
    rate: float
    kind = "shifted_exponential"

    def __post_init__(self):
        _check_nonneg(shift=self.shift)
        if not self.rate > 0:
            raise DomainError(f"rate={self.rate} must be positive")

    @property
    def s_minus(self) -> float:
        return self.shift

    @property
    def s_plus(self) -> float:
        return math.inf

    @property
    def mean(self) -> float:
        return self.shift + 1.0 / self.rate

    def ppf(self, u: float) -> float:
        return self.shift - math.log1p(-u) / self.rate

    def kernel_params(self):
        return K.SHIFTED_EXP, (self.shift, self.rate, 0.0)

    def to_json(self) -> dict:
        return {"kind": self.kind, "shift": self.shift, "rate": self.rate}


WeightSpec = Union[Dirac, TwoPoint, Uniform, ShiftedExponential]

_KINDS = {cls.kind: cls for cls in (Dirac, TwoPoint, Uniform, ShiftedExponential)}


def _check_nonneg(**params):
    for name, value in params.items():
        if not (value >= 0 and math.isfinite(value)):
            raise DomainError(f"{name}={value} must be finite and non-negative")


def spec_from_json(obj: Union[str, dict]) -> WeightSpec:
    """Parse ``{"kind": ..., <params>}`` (or its JSON text) into a WeightSpec."""
    if isinstance(obj, str):
        try:
            obj = json.loads(obj)
        except json.JSONDecodeError as exc:
            raise DomainError(f"weight spec is not valid JSON: {exc}") from None
    if not isinstance(obj, dict) or "kind" not in obj:
        raise DomainError(f"weight spec needs a 'kind' field: {obj!r}")
    params = dict(obj)
    kind = params.pop("kind")
    if kind not in _KINDS:
        raise DomainError(f"unknown weight kind {kind!r}; expected one of {sorted(_KINDS)}")
    try:
        return _KINDS[kind](**{k: float(v) for k, v in params.items()})
    except TypeError as exc:
        raise DomainError(f"bad parameters for {kind}: {exc}") from None


def support_bounds(spec: WeightSpec) -> tuple[float, float]:
    return spec.s_minus, spec.s_plus


def theorem1_margin(spec: WeightSpec) -> tuple[bool, Optional[float]]:
    """Whether 0 < S_- and S_+ <= 2 S_-, and if so the guaranteed increment of a(n)."""
    lo, hi = support_bounds(spec)
    if not (lo > 0 and hi <= 2 * lo):
        return False, None
    return True, lo * (1.0 - (hi - lo) ** 2 / lo**2)


def cs2_condition(spec: WeightSpec, a_n_over_n: float) -> tuple[bool, float]:
    """Product (a(n)/(n S_-) - 1)(E tau / S_- - 1) and whether it is at most 1/2."""
    lo = spec.s_minus
    if not lo > 0:
        raise HypothesisError(f"S_- = {lo}; the criterion needs S_- > 0")
    if a_n_over_n < lo:
        raise DomainError(f"a(n)/n = {a_n_over_n} is below S_- = {lo}")
    product = (a_n_over_n / lo - 1.0) * (spec.mean / lo - 1.0)
    return product <= 0.5, product


def cs2_sufficient(spec: WeightSpec) -> bool:
    lo = spec.s_minus
    return lo > 0 and spec.mean <= CS2_THRESHOLD * lo


@dataclass(frozen=True)
class WeightField:
    """The i.i.d. field tau for one replicate: ``weight(e)`` is a pure function of the key."""

    spec: WeightSpec
    master_seed: int
    replicate: int = 0

    def __post_init__(self):
        if self.replicate < 0:
            raise DomainError(f"replicate={self.replicate} must be non-negative")

    def weight(self, e: Edge) -> float:
        u = key_uniform(self.master_seed, self.replicate, e.axis, e.base)
        return self.spec.ppf(u)

    def weights(self, bases: np.ndarray, axes: np.ndarray) -> np.ndarray:
        """Vectorised weight lookup: bases (M, d) canonical base coordinates, axes (M,) 1-based."""
        fi, ff = self.kernel_params()
        bases = np.ascontiguousarray(bases, dtype=np.int64)
        return K.bulk_weights(fi, ff, bases, np.asarray(axes, dtype=np.int64) - 1)

    @property
    def min_weight(self) -> float:
        return self.spec.s_minus

    free_column = None

    def kernel_params(self) -> tuple[np.ndarray, np.ndarray]:
        kind, params = self.spec.kernel_params()
        fi = np.array([kind, as_int64(self.master_seed), self.replicate, K.PLAIN, 0, 0, 0, 0, 0], dtype=np.int64)
        return fi, np.array(params, dtype=np.float64)

    def with_replicate(self, replicate: int) -> "WeightField":
        return WeightField(self.spec, self.master_seed, replicate)
