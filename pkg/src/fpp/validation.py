"""Oracle equivalence checks shared by the ``oracle-check`` command and the acceptance tests."""

from __future__ import annotations

import math
from fractions import Fraction

from fpp import oracle
from fpp.coupling import contract_column, contracted_mode, modified_field
from fpp.estimator import estimate_a
from fpp.lattice import Region, on_axis
from fpp.shortest_path import FREE, Cylinder, Explicit, passage_time
from fpp.weights import TwoPoint, WeightField

EQUIVALENCE_LAW = TwoPoint(1.0, 2.0, 0.5)
SMALL_CYLINDER = Region.cylinder(1, 2, 1)
CYLINDER_LAW = TwoPoint(0.01, 1.0, 0.3)


def engine_equivalence(fields: int = 200, master_seed: int = 0, side: int = 4) -> dict:
    """Compare passage_time with exhaustive enumeration for every ordered pair of a side x side box."""
    box = Region.box((0, side - 1), (0, side - 1))
    mode = Explicit(box)
    mismatches = 0
    pairs = 0
    for r in range(fields):
        field = WeightField(EQUIVALENCE_LAW, master_seed, r)
        reference = oracle.brute_force_all(field, box)
        for (a, b), expected in reference.items():
            pairs += 1
            if passage_time(field, a, b, mode).value != expected:
                mismatches += 1
    return {"fields": fields, "pairs": pairs, "mismatches": mismatches}


def contraction_identity(fields: int = 500, master_seed: int = 0, ns=range(2, 7), cylinder: bool = False) -> dict:
    """max |T^i(0, n e1) - T_contracted(0, (n-1) e1)| over fields, n and columns i."""
    worst = 0.0
    checks = 0
    for r in range(fields):
        field = WeightField(EQUIVALENCE_LAW, master_seed, r)
        for n in ns:
            mode = Cylinder(n) if cylinder else FREE
            for i in range(n):
                ti = passage_time(modified_field(field, i), (0, 0), on_axis(n, 2), mode).value
                tc = passage_time(contract_column(field, i, n), (0, 0), on_axis(n - 1, 2), contracted_mode(mode)).value
                worst = max(worst, abs(ti - tc))
                checks += 1
    return {"fields": fields, "checks": checks, "max_abs_diff": worst}


def exact_vs_monte_carlo(replicates: int = 10_000, master_seed: int = 0) -> dict:
    """a'(1) on the seven-edge truncated cylinder: exact enumeration against estimate_a."""
    exact = oracle.exact_expectation(CYLINDER_LAW, (0, 0), (1, 0), SMALL_CYLINDER)
    est = estimate_a(CYLINDER_LAW, 1, replicates, Explicit(SMALL_CYLINDER), master_seed)
    z = (est.mean - float(exact.value)) / est.std_err if est.std_err > 0 else math.inf
    return {
        "exact": float(exact.value),
        "exact_rational": str(exact.value),
        "configurations": exact.configurations,
        "mc_mean": est.mean,
        "mc_stderr": est.std_err,
        "z": z,
    }


def single_edge_expectation(epsilon: float = 0.01, p: float = 0.3) -> dict:
    region = Region.box((0, 1), (0, 0))
    exact = oracle.exact_expectation(TwoPoint(epsilon, 1.0, p), (0, 0), (1, 0), region).value
    p_, eps_ = Fraction(repr(p)), Fraction(repr(epsilon))
    return {"exact": str(exact), "expected": str(eps_ * (1 - p_) + p_)}


def oracle_suite(replicates: int = 10_000, master_seed: int = 0) -> list[tuple[str, bool, dict]]:
    """Every oracle check with its pass flag; ``replicates`` sizes the Monte Carlo comparison."""
    results = []
    eq = engine_equivalence(200, master_seed)
    results.append(("engine_vs_brute_force", eq["mismatches"] == 0, eq))
    ci = contraction_identity(100, master_seed)
    results.append(("contraction_identity", ci["max_abs_diff"] <= 1e-12, ci))
    se = single_edge_expectation()
    results.append(("single_edge_expectation", se["exact"] == se["expected"], se))
    mc = exact_vs_monte_carlo(replicates, master_seed)
    results.append(("exact_vs_monte_carlo", abs(mc["z"]) <= 4.0, mc))
    return results
