"""Ground-truth verification at desk scale.

Brute force, axiom checkers, and certificate recomputation. Everything here
is exhaustive or sampled against explicit definitions, never against the
solvers' own bookkeeping, so these routines are the arbiter in tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    ElementSet,
    FLOAT_POLICY,
    MatroidOracle,
    NumericPolicy,
    RandomSource,
    ValueOracle,
)
from .objectives import make_tracker
from .solvers import LocalOptCertificate, RunReport, _certificate_from_tracker

MAX_BRUTE_FORCE = 22


@dataclass(frozen=True)
class BruteForceResult:
    """Exact optimum over all independent sets.

    Ties keep the first maximizer in ascending DFS order. enumerated counts
    the independent sets visited (the empty set included).
    """

    opt_set: ElementSet
    opt_value: float
    enumerated: int


def brute_force_opt(
    f: ValueOracle, matroid: MatroidOracle, max_ground: int = MAX_BRUTE_FORCE
) -> BruteForceResult:
    """DFS over independent sets in ascending element order.

    Dependent branches are pruned; by downward closure no independent set
    is missed. Strictly better values replace the incumbent, so the
    reported optimum is the lexicographically earliest maximizer.
    """
    n = f.ground_size
    if n != matroid.ground_size:
        raise ValueError("objective and matroid universes differ")
    if n > max_ground:
        raise ValueError(f"brute force capped at n <= {max_ground}")

    best_mask = 0
    best_value = f.eval(ElementSet.empty(n))
    enumerated = 1

    stack = [(0, 0)]  # (mask, next element to try)
    while stack:
        mask, start = stack.pop()
        for u in range(start, n):
            cand = mask | (1 << u)
            if not matroid.is_independent(ElementSet(n, cand)):
                continue
            val = f.eval(ElementSet(n, cand))
            enumerated += 1
            if val > best_value:
                best_value = val
                best_mask = cand
            stack.append((cand, u + 1))
    return BruteForceResult(
        opt_set=ElementSet(n, best_mask), opt_value=best_value, enumerated=enumerated
    )


def localopt_gap(
    f: ValueOracle,
    matroid: MatroidOracle,
    s: ElementSet,
    *,
    eps: float = 0.0,
    warm_value: float = 0.0,
) -> LocalOptCertificate:
    """Challenger certificate for an arbitrary solution set.

    Recomputes the weights f(v | S - v), the greedy witness, and the gap
    with the same summation order the solvers use, so a solver-produced
    certificate can be checked for float-exact equality. The stored bound
    is eps * warm_value (zero unless provided).
    """
    tracker = make_tracker(f, s)
    return _certificate_from_tracker(tracker, matroid, eps, warm_value)


def exhaustive_gap(
    f: ValueOracle, matroid: MatroidOracle, s: ElementSet, max_ground: int = 64
) -> float:
    """max over all independent T of sum_T f(v|S-v) - sum_S f(u|S-u).

    Enumerates independent sets only (pruned DFS), then recomputes the
    winning difference with ascending-index sums, the same order
    localopt_gap uses, so the cross-check against the greedy witness can
    demand float-exact equality.
    """
    n = f.ground_size
    if n > max_ground:
        raise ValueError(f"exhaustive gap capped at n <= {max_ground}")
    tracker = make_tracker(f, s)
    w = [
        tracker.marginal_drop(v) if v in s else tracker.marginal_add(v)
        for v in range(n)
    ]
    base_sum = sum(w[u] for u in s)
    best = -base_sum  # T empty
    best_mask = 0
    stack = [(0, 0, 0.0)]
    while stack:
        mask, start, total = stack.pop()
        for u in range(start, n):
            cand = mask | (1 << u)
            if not matroid.is_independent(ElementSet(n, cand)):
                continue
            cand_total = total + w[u]
            if cand_total - base_sum > best:
                best = cand_total - base_sum
                best_mask = cand
            stack.append((cand, u + 1, cand_total))
    return sum(w[v] for v in ElementSet(n, best_mask)) - base_sum


def check_matroid_axioms(
    matroid: MatroidOracle, max_ground: int = 12, max_reports: int = 20
) -> list[str]:
    """Exhaustive matroid axiom check; returns violation descriptions.

    Empty list means the oracle passed. Checks non-emptiness, downward
    closure, and the exchange axiom (between sizes k and k+1, which
    implies the general form by downward closure).
    """
    n = matroid.ground_size
    if n > max_ground:
        raise ValueError(f"axiom check capped at n <= {max_ground}")
    ind = [matroid.is_independent(ElementSet(n, m)) for m in range(1 << n)]
    issues: list[str] = []

    def report(msg: str) -> bool:
        issues.append(msg)
        return len(issues) >= max_reports

    if not ind[0]:
        report("empty set is dependent")
    for m in range(1, 1 << n):
        if not ind[m]:
            continue
        rem = m
        while rem:
            lsb = rem & -rem
            rem ^= lsb
            if not ind[m ^ lsb]:
                if report(
                    f"downward closure fails: {_fmt(m, n)} independent but "
                    f"{_fmt(m ^ lsb, n)} is not"
                ):
                    return issues
    # addable[m] = elements whose addition keeps m independent
    addable = [0] * (1 << n)
    by_size: dict[int, list[int]] = {}
    for m in range(1 << n):
        if not ind[m]:
            continue
        by_size.setdefault(m.bit_count(), []).append(m)
        a = 0
        for u in range(n):
            if not m >> u & 1 and ind[m | (1 << u)]:
                a |= 1 << u
        addable[m] = a
    for k, smaller in sorted(by_size.items()):
        for t in by_size.get(k + 1, ()):
            for s in smaller:
                if not t & ~s & addable[s]:
                    if report(
                        f"exchange fails: {_fmt(s, n)} cannot grow from {_fmt(t, n)}"
                    ):
                        return issues
    return issues


def _fmt(mask: int, n: int) -> str:
    return "{" + ",".join(str(u) for u in ElementSet(n, mask)) + "}"


def _random_mask(rng: RandomSource, n: int) -> int:
    mask = 0
    for shift in range(0, n, 64):
        mask |= rng.next_u64() << shift
    return mask & ((1 << n) - 1)


def check_value_oracle(
    f: ValueOracle,
    *,
    max_exhaustive: int = 10,
    trials: int = 10_000,
    rng: RandomSource | None = None,
    policy: NumericPolicy = FLOAT_POLICY,
    max_reports: int = 20,
) -> list[str]:
    """Non-negativity, monotonicity, submodularity check.

    Exhaustive up to max_exhaustive ground elements (pairwise local
    submodularity over all sets, which is equivalent to the lattice
    definition); sampled S subset of T triples otherwise. Returns violation
    descriptions, empty on pass.
    """
    n = f.ground_size
    issues: list[str] = []

    def report(msg: str) -> bool:
        issues.append(msg)
        return len(issues) >= max_reports

    if n <= max_exhaustive:
        vals = np.array([f.eval(ElementSet(n, m)) for m in range(1 << n)])
        slack = policy.comparison_slack

        def holds(left, right):
            # vectorized policy.ge: left >= right - slack*max(1,|l|,|r|)
            pad = slack * np.maximum(1.0, np.maximum(np.abs(left), np.abs(right)))
            return left >= right - pad

        masks = np.arange(1 << n, dtype=np.int64)
        bad = np.nonzero(~holds(vals, 0.0))[0]
        for m in bad[:max_reports]:
            if report(f"negative value at {_fmt(int(m), n)}"):
                return issues
        for u in range(n):
            without = masks[(masks >> u) & 1 == 0]
            gain = vals[without | (1 << u)] - vals[without]
            bad = np.nonzero(~holds(gain, 0.0))[0]
            for i in bad[:max_reports]:
                if report(
                    f"monotonicity fails adding {u} to {_fmt(int(without[i]), n)}"
                ):
                    return issues
            for v in range(n):
                if v == u:
                    continue
                both = without[(without >> v) & 1 == 0]
                gain_small = vals[both | (1 << u)] - vals[both]
                withv = both | (1 << v)
                gain_large = vals[withv | (1 << u)] - vals[withv]
                bad = np.nonzero(~holds(gain_small, gain_large))[0]
                for i in bad[:max_reports]:
                    if report(
                        f"submodularity fails: element {u} gains more on "
                        f"{_fmt(int(withv[i]), n)} than on {_fmt(int(both[i]), n)}"
                    ):
                        return issues
        return issues

    if rng is None:
        rng = RandomSource(0)
    for _ in range(trials):
        t_mask = _random_mask(rng, n)
        s_mask = t_mask & _random_mask(rng, n)
        t = ElementSet(n, t_mask)
        s = ElementSet(n, s_mask)
        ft = f.eval(t)
        fs = f.eval(s)
        if ft < 0 or fs < 0:
            if report("negative value on sampled set"):
                return issues
        if not policy.ge(ft, fs):
            if report(f"monotonicity fails: f({_fmt(t_mask, n)}) < f({_fmt(s_mask, n)})"):
                return issues
        outside = ElementSet(n, ((1 << n) - 1) & ~t_mask)
        if len(outside) == 0:
            continue
        members = outside.to_list()
        u = members[rng.randrange(len(members))]
        if not policy.ge(
            f.eval(s.add(u)) - fs,
            f.eval(t.add(u)) - ft,
        ):
            if report(
                f"submodularity fails for element {u} between {_fmt(s_mask, n)} "
                f"and {_fmt(t_mask, n)}"
            ):
                return issues
    return issues


@dataclass(frozen=True)
class ApproximationReport:
    ratio: float
    target: float
    passed: bool
    run_value: float
    opt_value: float


def approximation_report(
    run: RunReport,
    truth: BruteForceResult,
    policy: NumericPolicy = FLOAT_POLICY,
) -> ApproximationReport:
    """Achieved ratio vs the level-dependent target (1-(1+1/L)^-L) - eps.

    Ratio is defined as 1 when the optimum is 0 (the output can do no
    better). Raises on universe mismatch between the run and the truth.
    """
    if run.output_set.n != truth.opt_set.n:
        raise ValueError("run and brute-force truth use different universes")
    if truth.opt_value <= 0:
        ratio = 1.0
    else:
        ratio = run.objective_value / truth.opt_value
    ell = run.levels
    target = 1.0 - (ell / (ell + 1.0)) ** ell - run.eps
    return ApproximationReport(
        ratio=ratio,
        target=target,
        passed=policy.ge(ratio, target),
        run_value=run.objective_value,
        opt_value=truth.opt_value,
    )


def projected_value_bound(
    opt_value: float, empty_value: float, levels: int, eps: float
) -> float:
    """Solve-quality floor: (1 - q) f(OPT) + q f(empty) - eps f(OPT) with
    q = (1 + 1/levels)^(-levels). Float version; acceptance tests redo it
    in exact rationals."""
    q = (levels / (levels + 1.0)) ** levels
    return (1.0 - q) * opt_value + q * empty_value - eps * opt_value


def check_certificate(
    certificate: LocalOptCertificate,
    f: ValueOracle,
    matroid: MatroidOracle,
    s: ElementSet,
    policy: NumericPolicy = FLOAT_POLICY,
) -> list[str]:
    """Recompute a certificate against a solution and compare field by field.

    Float equality is intentional: both computations follow the same
    canonical summation order, so any difference means the inputs changed.
    """
    issues = []
    fresh = localopt_gap(
        f, matroid, s, eps=certificate.eps, warm_value=certificate.warm_value
    )
    if fresh.gap != certificate.gap:
        issues.append(
            f"gap mismatch: recomputed {fresh.gap!r}, stored {certificate.gap!r}"
        )
    if fresh.witness != certificate.witness:
        issues.append("witness mismatch")
    expected_bound = certificate.eps * certificate.warm_value
    if certificate.bound != expected_bound:
        issues.append(
            f"bound mismatch: stored {certificate.bound!r}, "
            f"eps * warm_value = {expected_bound!r}"
        )
    if math.isfinite(certificate.gap) and not certificate.passes(policy):
        issues.append(
            f"certificate does not pass: gap {certificate.gap!r} exceeds "
            f"bound {certificate.bound!r}"
        )
    return issues
