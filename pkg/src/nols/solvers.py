"""Local-search solvers and their run artifacts.

Four searches live here. ``reference_local_search`` is the exact-arithmetic
partitioned search used to sanity-check the guide machinery at toy scale.
``deterministic_local_search`` and ``randomized_local_search`` are the real
workers: swap searches over any (value oracle, matroid) pair that stop at an
approximate local optimum certified by a greedy challenger set.
``non_oblivious_solve`` composes them with the lifted guide to reach the
target approximation factor, and ``regularized_solve`` does the same with a
modular regularizer folded into the guide.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .core import (
    CountingMatroidOracle,
    CountingValueOracle,
    ElementId,
    ElementSet,
    FLOAT_POLICY,
    MatroidOracle,
    NumericPolicy,
    QueryLedger,
    RandomSource,
    ValueOracle,
    sample_without_replacement,
)
from .matroids import extend_to_base, lift, max_weight_independent, min_weight_exchange
from .matroids import rank as matroid_rank
from .objectives import (
    GuideWeights,
    LiftedGuide,
    LinearRegularizer,
    RegularizedGuide,
    guide_weights,
    make_tracker,
    project_all,
)

DETERMINISTIC = "deterministic"
RANDOMIZED = "randomized"

THRESHOLD_GREEDY = "threshold_greedy"
PLAIN_GREEDY = "plain_greedy"

_DECAY = 0.125  # warm-start threshold decay step


@dataclass(frozen=True)
class SolverConfig:
    """Knobs shared by the solve entry points.

    levels_override replaces the eps-derived level count (1 gives ordinary
    local search on f itself). warm_start picks the warm-start routine.
    """

    eps: float = 0.25
    variant: str = DETERMINISTIC
    seed: int = 0
    levels_override: int | None = None
    warm_start: str = THRESHOLD_GREEDY

    def __post_init__(self):
        if not 0 < self.eps < 1:
            raise ValueError("eps must be in (0, 1)")
        if self.variant not in (DETERMINISTIC, RANDOMIZED):
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.warm_start not in (THRESHOLD_GREEDY, PLAIN_GREEDY):
            raise ValueError(f"unknown warm start {self.warm_start!r}")
        if self.levels_override is not None and self.levels_override < 1:
            raise ValueError("levels_override must be at least 1")


@dataclass(frozen=True)
class LocalOptCertificate:
    """Evidence that no independent challenger set beats the solution.

    gap = sum of f(v | S - v) over the greedy max-weight challenger witness
    minus the same sum over S. The solve-time bound is eps * warm_value;
    both inputs are stored so the product can be rechecked later.
    """

    witness: ElementSet
    gap: float
    bound: float
    eps: float
    warm_value: float

    def passes(self, policy: NumericPolicy = FLOAT_POLICY) -> bool:
        return policy.ge(self.bound, self.gap)


@dataclass
class LocalSearchResult:
    """Outcome of one search on the instance it actually ran on (which for
    the lifted solvers is the lifted instance)."""

    solution: ElementSet
    value: float
    warm_set: ElementSet
    warm_value: float
    iterations: int
    certificate: LocalOptCertificate


@dataclass
class RunReport:
    """Full record of a solve, sufficient to recheck it from the instance."""

    output_set: ElementSet
    objective_value: float
    ledger: QueryLedger
    iterations: int
    failed: bool
    certificate: LocalOptCertificate | None
    eps: float
    eps_inner: float
    levels: int
    variant: str
    seed: int
    rank: int
    lifted_solution: ElementSet | None
    warm_value: float


def default_levels(eps: float) -> int:
    """Level count for a target eps: 1 + ceil(1/eps).

    The small nudge keeps float noise in 1/eps from bumping the ceiling
    (0.2 and friends are not exact binary fractions).
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    return 1 + math.ceil(1.0 / eps - 1e-9)


def inner_eps(eps: float, levels: int) -> float:
    """Accuracy handed to the inner search: eps / (e * (1 + ln levels))."""
    return eps / (math.e * (1.0 + math.log(levels)))


def amplification_attempts(eps: float) -> int:
    """Retry budget for the randomized search: ceil(log3(1/eps)), at least 1.

    Each attempt fails with probability at most 1/3, so this drives the
    total failure probability below eps.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    return max(1, math.ceil(math.log(1.0 / eps, 3) - 1e-12))


# ----- warm start -----


def _threshold_greedy_warm(tracker, matroid: MatroidOracle, policy: NumericPolicy):
    """Descending-thresholds greedy, in place on the tracker.

    tau starts at the largest singleton value and decays by (1 - 1/8) until
    below (1/8) * max / n; each sweep adds any independent element whose
    marginal clears tau. Lazy upper bounds skip re-evaluations (marginals
    only shrink as S grows) and elements whose addition went dependent stay
    dead for good (downward closure), so the output matches the eager sweep
    exactly at a fraction of the queries.
    """
    n = tracker.ground_size
    if n == 0:
        return
    empty_value = tracker.value
    ub = [tracker.marginal_add(u) for u in range(n)]
    tau_max = max(empty_value + m for m in ub)  # largest singleton value
    if tau_max <= 0:
        return
    floor = _DECAY * tau_max / n
    dead = 0
    tau = tau_max
    while tau >= floor:
        for u in range(n):
            if u in tracker.current or (dead >> u) & 1:
                continue
            if not policy.ge(ub[u], tau):
                continue
            m = tracker.marginal_add(u)
            ub[u] = m
            if policy.ge(m, tau):
                if matroid.is_independent(tracker.current.add(u)):
                    tracker.apply(add=u)
                else:
                    dead |= 1 << u
        tau *= 1.0 - _DECAY


def _plain_greedy_warm(tracker, matroid: MatroidOracle, policy: NumericPolicy):
    """Exact best-marginal insertion until a base; ties to the smaller id."""
    n = tracker.ground_size
    dead = 0
    while True:
        ranked = sorted(
            (
                (-tracker.marginal_add(u), u)
                for u in range(n)
                if u not in tracker.current and not (dead >> u) & 1
            ),
        )
        added = False
        for _, u in ranked:
            if matroid.is_independent(tracker.current.add(u)):
                tracker.apply(add=u)
                added = True
                break
            dead |= 1 << u
        if not added:
            return


def _run_warm_start(tracker, matroid, variant: str, policy: NumericPolicy):
    if variant == THRESHOLD_GREEDY:
        _threshold_greedy_warm(tracker, matroid, policy)
    elif variant == PLAIN_GREEDY:
        _plain_greedy_warm(tracker, matroid, policy)
    else:
        raise ValueError(f"unknown warm start {variant!r}")


def warm_start(
    f: ValueOracle,
    matroid: MatroidOracle,
    variant: str = THRESHOLD_GREEDY,
    policy: NumericPolicy = FLOAT_POLICY,
) -> ElementSet:
    """Independent set worth at least a third of the optimum.

    The contract is enforced by the brute-force acceptance suite rather
    than assumed from the internals.
    """
    tracker = make_tracker(f, ElementSet.empty(f.ground_size))
    _run_warm_start(tracker, matroid, variant, policy)
    return tracker.current


def _certificate_from_tracker(
    tracker, matroid: MatroidOracle, eps: float, warm_value: float
) -> LocalOptCertificate:
    """Greedy challenger certificate at the tracker's current solution.

    Weights are f(v | S - v) for every ground element; the witness is the
    greedy max-weight independent set, which is exact for linear objectives
    over a matroid, so the gap equals the worst case over all independent
    challengers. Sums run in ascending element order so recomputation is
    float-identical.
    """
    n = tracker.ground_size
    s = tracker.current
    w: dict[ElementId, float] = {}
    for v in range(n):
        w[v] = tracker.marginal_drop(v) if v in s else tracker.marginal_add(v)
    witness = max_weight_independent(matroid, w)
    gap = sum(w[v] for v in witness) - sum(w[u] for u in s)
    return LocalOptCertificate(
        witness=witness,
        gap=gap,
        bound=eps * warm_value,
        eps=eps,
        warm_value=warm_value,
    )


# ----- deterministic search -----


def deterministic_local_search(
    f: ValueOracle,
    matroid: MatroidOracle,
    eps: float,
    *,
    warm_variant: str = THRESHOLD_GREEDY,
    policy: NumericPolicy = FLOAT_POLICY,
) -> LocalSearchResult:
    """Swap local search with acceptance threshold (eps / r) * f(S0).

    Warm start, extend to a base, then repeat: compute the drop marginal of
    every member, and for each candidate v (ascending, singleton
    independent) find the cheapest feasible drop by binary search; the
    first pair clearing the threshold is swapped in. A scan with no
    accepted swap ends the search. Each swap raises f(S) by at least the
    threshold, so scans are bounded by ceil(3 r / eps) + 1.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    n = f.ground_size
    tracker = make_tracker(f, ElementSet.empty(n))
    _run_warm_start(tracker, matroid, warm_variant, policy)
    warm_set = tracker.current
    warm_value = tracker.value
    base = extend_to_base(matroid, warm_set)
    for u in base.difference(warm_set):
        tracker.apply(add=u)
    r = len(tracker.current)
    threshold = (eps / r) * warm_value if r > 0 else 0.0
    max_scans = math.ceil(3 * r / eps) + 1 if r > 0 else 1

    iterations = 0
    while True:
        iterations += 1
        if iterations > max_scans:
            raise RuntimeError(
                "swap-count invariant violated; value oracle is likely not "
                "monotone submodular"
            )
        s = tracker.current
        drop_w = {u: tracker.marginal_drop(u) for u in s}
        swapped = False
        for v in range(n):
            if v in s:
                continue
            if not matroid.is_independent(ElementSet(n, 1 << v)):
                continue
            gain_add = tracker.marginal_add(v)
            u_v = min_weight_exchange(matroid, s, s, v, drop_w)
            gain = gain_add - drop_w[u_v]
            if policy.ge(gain, threshold) if threshold > 0 else policy.gt(gain, 0.0):
                tracker.apply(add=v, drop=u_v)
                swapped = True
                break
        if not swapped:
            break

    certificate = _certificate_from_tracker(tracker, matroid, eps, warm_value)
    return LocalSearchResult(
        solution=tracker.current,
        value=tracker.value,
        warm_set=warm_set,
        warm_value=warm_value,
        iterations=iterations,
        certificate=certificate,
    )


# ----- randomized search -----


def _ceil_sqrt(n: int) -> int:
    root = math.isqrt(n)
    return root + (1 if root * root < n else 0)


def randomized_local_search_once(
    f: ValueOracle,
    matroid: MatroidOracle,
    eps: float,
    rng: RandomSource,
    *,
    warm_variant: str = THRESHOLD_GREEDY,
    policy: NumericPolicy = FLOAT_POLICY,
) -> LocalSearchResult | None:
    """One sampled-swap run; returns None when the final check fails.

    k = ceil(18 r / eps) iterations each sample a drop pool R1 from the
    solution (size min(r, ceil(sqrt n))) and a candidate pool R2 from the
    ground set (size max(ceil(n / r), ceil(sqrt n))), then apply the best
    feasible swap if its gain is non-negative. One trajectory index i in
    [k] is then drawn uniformly; S_{i-1} is tested against the challenger
    certificate at threshold eps * f(S0) and returned when it passes.
    """
    result, _ = _randomized_once(
        f, matroid, eps, rng, warm_variant=warm_variant, policy=policy
    )
    return result


def _randomized_once(
    f: ValueOracle,
    matroid: MatroidOracle,
    eps: float,
    rng: RandomSource,
    *,
    warm_variant: str,
    policy: NumericPolicy,
) -> tuple[LocalSearchResult | None, int]:
    if eps <= 0:
        raise ValueError("eps must be positive")
    n = f.ground_size
    tracker = make_tracker(f, ElementSet.empty(n))
    _run_warm_start(tracker, matroid, warm_variant, policy)
    warm_set = tracker.current
    warm_value = tracker.value
    base = extend_to_base(matroid, warm_set)
    for u in base.difference(warm_set):
        tracker.apply(add=u)
    r = len(tracker.current)

    k = max(1, math.ceil(18 * r / eps))
    root = _ceil_sqrt(n)
    r1_size = min(r, root)
    r2_size = min(n, max(math.ceil(n / r) if r > 0 else root, root))
    ground = ElementSet.full(n)

    trajectory = [tracker.current]
    for _ in range(k):
        s = tracker.current
        r1 = sample_without_replacement(rng, s, r1_size)
        r2 = sample_without_replacement(rng, ground, r2_size)
        stripped = s.mask & ~r1.mask
        feasible = [
            v
            for v in r2
            if v not in s
            and matroid.is_independent(ElementSet(n, stripped | (1 << v)))
        ]
        if feasible and len(r1) > 0:
            drop_w = {u: tracker.marginal_drop(u) for u in r1}
            best: tuple[float, ElementId, ElementId] | None = None
            for v in feasible:  # ascending; first best kept on ties
                gain_add = tracker.marginal_add(v)
                u_v = min_weight_exchange(matroid, s, r1, v, drop_w)
                gain = gain_add - drop_w[u_v]
                if best is None or gain > best[0]:
                    best = (gain, v, u_v)
            gain, v, u = best
            if policy.ge(gain, 0.0):
                tracker.apply(add=v, drop=u)
        trajectory.append(tracker.current)

    i = 1 + rng.randrange(k)
    tested = trajectory[i - 1]
    if tested == tracker.current:
        test_tracker = tracker
    else:
        test_tracker = make_tracker(f, tested)
    certificate = _certificate_from_tracker(test_tracker, matroid, eps, warm_value)
    threshold = certificate.bound
    failed = (
        policy.ge(certificate.gap, threshold)
        if threshold > 0
        else policy.gt(certificate.gap, 0.0)
    )
    if failed:
        return None, k
    return (
        LocalSearchResult(
            solution=tested,
            value=test_tracker.value,
            warm_set=warm_set,
            warm_value=warm_value,
            iterations=k,
            certificate=certificate,
        ),
        k,
    )


def randomized_local_search(
    f: ValueOracle,
    matroid: MatroidOracle,
    eps: float,
    rng: RandomSource,
    *,
    attempts: int | None = None,
    warm_variant: str = THRESHOLD_GREEDY,
    policy: NumericPolicy = FLOAT_POLICY,
) -> LocalSearchResult | None:
    """Amplified randomized search: first passing attempt wins.

    attempts defaults to ceil(log3(1/eps)); all attempts draw from the one
    generator, so replay is deterministic. Returns None only when every
    attempt fails.
    """
    result, _ = _randomized_amplified(
        f, matroid, eps, rng, attempts=attempts, warm_variant=warm_variant,
        policy=policy,
    )
    return result


def _randomized_amplified(
    f, matroid, eps, rng, *, attempts, warm_variant, policy
) -> tuple[LocalSearchResult | None, int]:
    if attempts is None:
        attempts = amplification_attempts(eps)
    total_iterations = 0
    for _ in range(attempts):
        res, k = _randomized_once(
            f, matroid, eps, rng, warm_variant=warm_variant, policy=policy
        )
        total_iterations += k
        if res is not None:
            res.iterations = total_iterations
            return res, total_iterations
    return None, total_iterations


# ----- reference search (exact arithmetic, toy scale) -----


@dataclass
class ReferenceResult:
    parts: list[ElementSet]
    union: ElementSet
    guide_value: Fraction
    moves: int


def reference_local_search(
    f: ValueOracle,
    matroid: MatroidOracle,
    levels: int,
    *,
    max_ground: int = 16,
    max_rank: int = 6,
) -> ReferenceResult:
    """Exhaustive partitioned local search in exact rational arithmetic.

    State is a tuple of disjoint level sets whose union is a base. Moves
    either relocate a member to another level or swap a member for an
    outside element (at any level) keeping the union independent; the first
    strictly improving move in scan order is taken until none exists.
    Values are memoized Fractions, so termination and the no-improving-move
    postcondition are exact. Intended for verification; enforced to toy
    scale.
    """
    n = f.ground_size
    if n > max_ground:
        raise ValueError(f"reference search capped at n <= {max_ground}")
    weights = guide_weights(levels)
    base = extend_to_base(matroid, ElementSet.empty(n))
    r = len(base)
    if r > max_rank:
        raise ValueError(f"reference search capped at rank <= {max_rank}")

    memo: dict[int, Fraction] = {}

    def f_exact(mask: int) -> Fraction:
        if mask not in memo:
            memo[mask] = Fraction(f.eval(ElementSet(n, mask)))
        return memo[mask]

    wf = weights.fractions
    nsub = 1 << levels

    def g_exact(parts: tuple[int, ...]) -> Fraction:
        union = [0] * nsub
        total = Fraction(0)
        for j in range(1, nsub):
            low = j & -j
            union[j] = union[j ^ low] | parts[low.bit_length() - 1]
            total += wf[j.bit_count()] * f_exact(union[j])
        return total

    parts = [base.mask] + [0] * (levels - 1)
    current = g_exact(tuple(parts))
    moves = 0

    def union_mask() -> int:
        m = 0
        for p in parts:
            m |= p
        return m

    improved = True
    while improved:
        improved = False
        um = union_mask()
        members = [(u, lvl) for lvl in range(levels) for u in _mask_bits(parts[lvl])]
        members.sort()
        # relocate u to a different level
        for u, lvl in members:
            for target in range(levels):
                if target == lvl:
                    continue
                parts[lvl] &= ~(1 << u)
                parts[target] |= 1 << u
                cand = g_exact(tuple(parts))
                if cand > current:
                    current = cand
                    moves += 1
                    improved = True
                    break
                parts[target] &= ~(1 << u)
                parts[lvl] |= 1 << u
            if improved:
                break
        if improved:
            continue
        # swap u out for an outside v placed at any level
        for u, lvl in members:
            for v in range(n):
                if um >> v & 1:
                    continue
                swapped_union = (um & ~(1 << u)) | (1 << v)
                if not matroid.is_independent(ElementSet(n, swapped_union)):
                    continue
                for target in range(levels):
                    parts[lvl] &= ~(1 << u)
                    parts[target] |= 1 << v
                    cand = g_exact(tuple(parts))
                    if cand > current:
                        current = cand
                        moves += 1
                        improved = True
                        break
                    parts[target] &= ~(1 << v)
                    parts[lvl] |= 1 << u
                if improved:
                    break
            if improved:
                break

    out_parts = [ElementSet(n, p) for p in parts]
    return ReferenceResult(
        parts=out_parts,
        union=ElementSet(n, union_mask()),
        guide_value=current,
        moves=moves,
    )


def _mask_bits(mask: int):
    while mask:
        lsb = mask & -mask
        yield lsb.bit_length() - 1
        mask ^= lsb


# ----- full solvers -----


def non_oblivious_solve(
    f: ValueOracle,
    matroid: MatroidOracle,
    config: SolverConfig,
    *,
    regularizer: LinearRegularizer | None = None,
    retry_budget: int | None = None,
    policy: NumericPolicy = FLOAT_POLICY,
) -> RunReport:
    """End-to-end solve: lift, search the guide, project back.

    The level count is 1 + ceil(1/eps) unless overridden; the inner search
    runs at eps / (e (1 + ln levels)) on the lifted instance, whose
    independence queries cost one base query each and whose guide queries
    decompose into base value queries through the tracker. The certificate
    lives on the lifted instance. A randomized run that exhausts its retry
    budget returns the empty set with failed=True. retry_budget is a test
    hook overriding the amplification attempt count.
    """
    ledger = QueryLedger()
    f_counted = CountingValueOracle(f, ledger)
    m_counted = CountingMatroidOracle(matroid, ledger)
    levels = (
        config.levels_override
        if config.levels_override is not None
        else default_levels(config.eps)
    )
    weights = guide_weights(levels)
    if regularizer is None:
        guide: ValueOracle = LiftedGuide(f_counted, weights)
    else:
        guide = RegularizedGuide(f_counted, weights, regularizer)
    lifted_matroid = lift(m_counted, levels)
    eps_in = inner_eps(config.eps, levels)

    if config.variant == DETERMINISTIC:
        result: LocalSearchResult | None = deterministic_local_search(
            guide, lifted_matroid, eps_in, warm_variant=config.warm_start,
            policy=policy,
        )
        iterations = result.iterations
    else:
        rng = RandomSource(config.seed)
        result, iterations = _randomized_amplified(
            guide,
            lifted_matroid,
            eps_in,
            rng,
            attempts=retry_budget,
            warm_variant=config.warm_start,
            policy=policy,
        )

    n = f.ground_size
    if result is None:
        output = ElementSet.empty(n)
        return RunReport(
            output_set=output,
            objective_value=f.eval(output),
            ledger=ledger,
            iterations=iterations,
            failed=True,
            certificate=None,
            eps=config.eps,
            eps_inner=eps_in,
            levels=levels,
            variant=config.variant,
            seed=config.seed,
            rank=matroid_rank(matroid),  # uncounted; reporting only
            lifted_solution=None,
            warm_value=0.0,
        )

    output = project_all(result.solution, levels)
    return RunReport(
        output_set=output,
        objective_value=f.eval(output),  # uncounted; reporting only
        ledger=ledger,
        iterations=iterations,
        failed=False,
        certificate=result.certificate,
        eps=config.eps,
        eps_inner=eps_in,
        levels=levels,
        variant=config.variant,
        seed=config.seed,
        rank=len(result.solution),
        lifted_solution=result.solution,
        warm_value=result.warm_value,
    )


def regularized_solve(
    f: ValueOracle,
    matroid: MatroidOracle,
    regularizer: LinearRegularizer,
    config: SolverConfig,
    *,
    retry_budget: int | None = None,
    policy: NumericPolicy = FLOAT_POLICY,
) -> RunReport:
    """non_oblivious_solve against the regularizer-augmented guide.

    The output trades f against the modular term: for every independent T,
    f(S) + reg(S) is guaranteed near (1 - 1/e) f(T) + reg(T) when the
    regularizer is non-negative.
    """
    return non_oblivious_solve(
        f,
        matroid,
        config,
        regularizer=regularizer,
        retry_budget=retry_budget,
        policy=policy,
    )
