"""Value oracles, guide weights, and the lifted guide objective.

The solvers do not optimize the input objective f directly. They optimize a
guide built from f: copies of the ground set are stacked into ``levels``
layers, and the guide value of a lifted set is a weighted sum of f over the
unions of every non-empty subset of layers. The weights (one per subset
size) are chosen so the schedule telescopes, which is what buys the final
approximation factor. This module owns those weights, the lifting/projection
helpers, and the marginal trackers that keep guide queries cheap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .core import ElementId, ElementSet, ValueOracle

MAX_LEVELS = 20  # 2**levels subset evaluations per guide query; hard cap


def marginal(f: ValueOracle, u: ElementId, s: ElementSet) -> float:
    """f(u | S) = f(S + u) - f(S). Two value queries."""
    return f.eval(s.add(u)) - f.eval(s)


def marginal_without(f: ValueOracle, u: ElementId, s: ElementSet) -> float:
    """f(u | S - u) = f(S + u) - f(S - u). Two value queries.

    For u outside S this equals the ordinary marginal.
    """
    base = ElementSet(s.n, s.mask & ~(1 << u))
    return f.eval(base.add(u)) - f.eval(base)


class CoverageFunction:
    """Weighted coverage: f(S) = total weight of universe points covered by S.

    covers[u] lists the points element u covers. Weights default to 1, in
    which case values are plain ints.
    """

    __slots__ = ("ground_size", "universe_size", "_cover_masks", "_weights", "_unit")

    def __init__(
        self,
        universe_size: int,
        covers: Sequence[Sequence[int]],
        point_weights: Sequence[int] | None = None,
    ):
        masks = []
        for pts in covers:
            m = 0
            for p in pts:
                if not 0 <= p < universe_size:
                    raise ValueError(f"point {p} outside universe")
                m |= 1 << p
            masks.append(m)
        self.ground_size = len(masks)
        self.universe_size = universe_size
        self._cover_masks = tuple(masks)
        if point_weights is None:
            self._unit = True
            self._weights = None
        else:
            if len(point_weights) != universe_size:
                raise ValueError("one weight per universe point required")
            if any(w < 0 for w in point_weights):
                raise ValueError("point weights must be non-negative")
            self._unit = all(w == 1 for w in point_weights)
            self._weights = np.asarray(point_weights, dtype=np.float64)

    def eval(self, s: ElementSet) -> float:
        covered = 0
        for u in s:
            covered |= self._cover_masks[u]
        if self._unit:
            return covered.bit_count()
        nbytes = (self.universe_size + 7) // 8
        bits = np.unpackbits(
            np.frombuffer(covered.to_bytes(nbytes, "little"), dtype=np.uint8),
            bitorder="little",
        )[: self.universe_size]
        return float(bits @ self._weights)

    def covers(self, u: ElementId) -> list[int]:
        m = self._cover_masks[u]
        out = []
        while m:
            lsb = m & -m
            out.append(lsb.bit_length() - 1)
            m ^= lsb
        return out


class ModularFunction:
    """Additive objective with non-negative weights."""

    __slots__ = ("ground_size", "weights")

    def __init__(self, weights: Sequence[float]):
        if any(w < 0 for w in weights):
            raise ValueError("modular objective weights must be non-negative")
        self.ground_size = len(weights)
        self.weights = tuple(weights)

    def eval(self, s: ElementSet) -> float:
        return sum(self.weights[u] for u in s)


class ConcaveOfModular:
    """phi(sum of weights), phi concave non-decreasing with phi(0) = 0.

    Supported shapes: phi = sqrt, and phi = min(x, cap). The cap shape keeps
    integer weights integer-valued.
    """

    __slots__ = ("ground_size", "weights", "shape", "cap")

    def __init__(self, weights: Sequence[float], shape: str = "sqrt", cap: float = 0):
        if any(w < 0 for w in weights):
            raise ValueError("weights must be non-negative")
        if shape not in ("sqrt", "cap"):
            raise ValueError(f"unknown shape {shape!r}")
        if shape == "cap" and cap < 0:
            raise ValueError("cap must be non-negative")
        self.ground_size = len(weights)
        self.weights = tuple(weights)
        self.shape = shape
        self.cap = cap

    def eval(self, s: ElementSet) -> float:
        total = sum(self.weights[u] for u in s)
        if self.shape == "sqrt":
            return math.sqrt(total)
        return min(total, self.cap)


class LinearRegularizer:
    """Modular regularizer; weights may carry either sign."""

    __slots__ = ("ground_size", "weights")

    def __init__(self, weights: Sequence[float]):
        self.ground_size = len(weights)
        self.weights = tuple(weights)

    def eval(self, s: ElementSet) -> float:
        return sum(self.weights[u] for u in s)


class GuideWeights:
    """Per-subset-size weights of the guide objective for a level count.

    weight(i) for subset size i in 1..levels is
    (1 + 1/levels)^(i-1) / binom(levels-1, i-1); sizes 0 and levels+1 get
    weight 0. Stored exactly as Fractions with a float view for solver hot
    paths. The schedule satisfies, for i in 1..levels-1,
    weight(i) * i * (1 + 1/levels) == weight(i+1) * (levels - i),
    the telescoping identity the approximation analysis rests on.
    """

    __slots__ = ("levels", "fractions", "floats")

    def __init__(self, levels: int):
        if not 1 <= levels <= MAX_LEVELS:
            raise ValueError(f"levels must be in [1, {MAX_LEVELS}]")
        fr = [Fraction(0)]
        for i in range(1, levels + 1):
            fr.append(
                Fraction(levels + 1, levels) ** (i - 1) / math.comb(levels - 1, i - 1)
            )
        fr.append(Fraction(0))
        self.levels = levels
        self.fractions = tuple(fr)
        self.floats = tuple(float(a) for a in fr)

    @property
    def top(self) -> Fraction:
        """Weight of the full level set, (1 + 1/levels)^(levels-1)."""
        return self.fractions[self.levels]

    def __repr__(self):
        return f"GuideWeights(levels={self.levels})"


def guide_weights(levels: int) -> GuideWeights:
    return GuideWeights(levels)


def guide_value(
    f: ValueOracle, weights: GuideWeights, parts: Sequence[ElementSet]
) -> float:
    """Guide value of a partitioned solution (parts[i] is layer i+1).

    Sums weight(|J|) * f(union of parts in J) over non-empty layer subsets
    J; costs 2^levels - 1 value queries. Parts must be pairwise disjoint.
    """
    ell = weights.levels
    if len(parts) != ell:
        raise ValueError(f"expected {ell} parts, got {len(parts)}")
    n = f.ground_size
    seen = 0
    for p in parts:
        if p.n != n:
            raise ValueError("part universe does not match the objective")
        if p.mask & seen:
            raise ValueError("parts must be pairwise disjoint")
        seen |= p.mask
    wf = weights.floats
    union = [0] * (1 << ell)
    total = 0.0
    for j in range(1, 1 << ell):
        low = j & -j
        union[j] = union[j ^ low] | parts[low.bit_length() - 1].mask
        total += wf[j.bit_count()] * f.eval(ElementSet(n, union[j]))
    return total


# ----- lifted ground set indexing -----
#
# lifted index = base * levels + (level - 1), levels are 1-based


def lifted_index(base: ElementId, level: int, levels: int) -> ElementId:
    if not 1 <= level <= levels:
        raise ValueError(f"level {level} outside [1, {levels}]")
    return base * levels + (level - 1)


def lifted_base(x: ElementId, levels: int) -> ElementId:
    return x // levels


def lifted_level(x: ElementId, levels: int) -> int:
    return x % levels + 1


@dataclass(frozen=True)
class LiftedElement:
    """(base, level) view of a lifted index; level is 1-based."""

    base: ElementId
    level: int

    def flatten(self, levels: int) -> ElementId:
        return lifted_index(self.base, self.level, levels)

    @classmethod
    def unflatten(cls, x: ElementId, levels: int) -> "LiftedElement":
        return cls(lifted_base(x, levels), lifted_level(x, levels))


def level_masks(s: ElementSet, levels: int) -> list[int]:
    """Base-universe bitmasks of the elements held at each level (index 0
    holds level 1)."""
    if s.n % levels:
        raise ValueError("lifted universe size must be a multiple of levels")
    lm = [0] * levels
    for x in s:
        lm[x % levels] |= 1 << (x // levels)
    return lm


def project(s: ElementSet, levels: int, level_subset: Sequence[int]) -> ElementSet:
    """Base elements appearing in s at any level in level_subset (1-based)."""
    lm = level_masks(s, levels)
    mask = 0
    for lvl in level_subset:
        if not 1 <= lvl <= levels:
            raise ValueError(f"level {lvl} outside [1, {levels}]")
        mask |= lm[lvl - 1]
    return ElementSet(s.n // levels, mask)


def project_all(s: ElementSet, levels: int) -> ElementSet:
    """Projection onto the base ground set across every level."""
    return project(s, levels, range(1, levels + 1))


class LiftedGuide:
    """Guide objective over the lifted ground set, as a value oracle.

    eval(S') sums weight(|J|) * f(projection of S' onto levels J) over
    non-empty level subsets J, so one guide evaluation costs
    2^levels - 1 inner value queries. Query accounting happens on the inner
    oracle; wrap f with counting before lifting.
    """

    __slots__ = ("inner", "weights", "levels", "ground_size", "_wj")

    def __init__(self, inner: ValueOracle, weights: GuideWeights):
        self.inner = inner
        self.weights = weights
        self.levels = weights.levels
        self.ground_size = inner.ground_size * weights.levels
        # weight per level-subset mask, indexed by the mask
        self._wj = tuple(
            weights.floats[j.bit_count()] for j in range(1 << self.levels)
        )

    def eval(self, s: ElementSet) -> float:
        lm = level_masks(s, self.levels)
        n = self.inner.ground_size
        union = [0] * (1 << self.levels)
        total = 0.0
        for j in range(1, 1 << self.levels):
            low = j & -j
            union[j] = union[j ^ low] | lm[low.bit_length() - 1]
            total += self._wj[j] * self.inner.eval(ElementSet(n, union[j]))
        return total

    def make_tracker(self, start: ElementSet) -> "LiftedTracker":
        return LiftedTracker(self, start)

    def __repr__(self):
        return f"LiftedGuide(levels={self.levels}, inner={self.inner!r})"


def lifted_guide_value(
    f: ValueOracle, weights: GuideWeights, s: ElementSet
) -> float:
    """Standalone guide evaluation; 2^levels - 1 value queries."""
    return LiftedGuide(f, weights).eval(s)


def lifted_guide_marginal(
    f: ValueOracle, weights: GuideWeights, x: ElementId, s: ElementSet
) -> float:
    """Marginal of the guide at lifted element x given lifted set s.

    Decomposes over the level subsets containing x's level: each term is an
    f-marginal on the corresponding projection (identically zero when the
    base element already appears there, in which case no query is spent).
    Equals eval(s + x) - eval(s); zero when x is already in s.
    """
    ell = weights.levels
    lm = level_masks(s, ell)
    n = f.ground_size
    u = x // ell
    lvl_bit = 1 << (x % ell)
    ubit = 1 << u
    wf = weights.floats
    union = [0] * (1 << ell)
    total = 0.0
    for j in range(1, 1 << ell):
        low = j & -j
        union[j] = union[j ^ low] | lm[low.bit_length() - 1]
        if j & lvl_bit and not union[j] & ubit:
            proj = ElementSet(n, union[j])
            total += wf[j.bit_count()] * marginal(f, u, proj)
    return total


class RegularizedGuide:
    """Lifted guide plus top_weight * (levels + 1) times a modular term.

    The modular term charges each lifted element its base element's
    regularizer weight and costs no oracle queries. With non-negative
    regularizer weights the guide stays monotone submodular; negative
    weights are accepted but the solver guarantees are then not certified
    by this package's checks.
    """

    __slots__ = ("lifted", "regularizer", "scale")

    def __init__(
        self, inner: ValueOracle, weights: GuideWeights, regularizer: LinearRegularizer
    ):
        if regularizer.ground_size != inner.ground_size:
            raise ValueError("regularizer universe does not match the objective")
        self.lifted = LiftedGuide(inner, weights)
        self.regularizer = regularizer
        self.scale = weights.floats[weights.levels] * (weights.levels + 1)

    @property
    def ground_size(self) -> int:
        return self.lifted.ground_size

    @property
    def levels(self) -> int:
        return self.lifted.levels

    @property
    def weights(self) -> GuideWeights:
        return self.lifted.weights

    @property
    def inner(self) -> ValueOracle:
        return self.lifted.inner

    def reg_term(self, s: ElementSet) -> float:
        ell = self.lifted.levels
        w = self.regularizer.weights
        return self.scale * sum(w[x // ell] for x in s)

    def eval(self, s: ElementSet) -> float:
        return self.lifted.eval(s) + self.reg_term(s)

    def make_tracker(self, start: ElementSet) -> "RegularizedTracker":
        return RegularizedTracker(self, start)


# ----- marginal trackers -----


class SolutionTracker:
    """Caches f(S) for a working solution so marginals cost one query.

    marginal_add(u) and marginal_drop(u) are f(u | S) and f(u | S - u);
    apply() commits a move and refreshes the cache with one query.
    """

    __slots__ = ("oracle", "current", "value")

    def __init__(self, oracle: ValueOracle, start: ElementSet):
        self.oracle = oracle
        self.current = start
        self.value = oracle.eval(start)

    @property
    def ground_size(self) -> int:
        return self.oracle.ground_size

    def marginal_add(self, u: ElementId) -> float:
        if u in self.current:
            return 0.0
        return self.oracle.eval(self.current.add(u)) - self.value

    def marginal_drop(self, u: ElementId) -> float:
        if u not in self.current:
            raise KeyError(u)
        return self.value - self.oracle.eval(self.current.remove(u))

    def apply(self, add: ElementId | None = None, drop: ElementId | None = None):
        s = self.current
        if drop is not None:
            s = s.remove(drop)
        if add is not None:
            s = s.add(add)
        self.current = s
        self.value = self.oracle.eval(s)


class LiftedTracker:
    """Incremental guide state: one projection and cached f value per level
    subset.

    A marginal at a lifted element touches only the 2^(levels-1) subsets
    containing its level and costs one inner query per touched subset whose
    projection actually changes. apply() re-evaluates exactly the touched
    projections. The tracked set must keep each base element on at most one
    level (solvers maintain this through matroid independence).
    """

    __slots__ = ("guide", "current", "value", "_proj", "_fval", "_with_level")

    def __init__(self, guide: LiftedGuide, start: ElementSet):
        self.guide = guide
        ell = guide.levels
        self.current = start
        lm = level_masks(start, ell)
        nsub = 1 << ell
        proj = [0] * nsub
        for j in range(1, nsub):
            low = j & -j
            proj[j] = proj[j ^ low] | lm[low.bit_length() - 1]
        if proj[nsub - 1].bit_count() != len(start):
            raise ValueError("tracked set holds a base element on two levels")
        self._proj = proj
        inner = guide.inner
        n = inner.ground_size
        self._fval = [0.0] * nsub
        for j in range(1, nsub):
            self._fval[j] = inner.eval(ElementSet(n, proj[j]))
        self._with_level = tuple(
            tuple(j for j in range(1, nsub) if j >> lvl & 1) for lvl in range(ell)
        )
        self._recompute_value()

    @property
    def ground_size(self) -> int:
        return self.guide.ground_size

    def _recompute_value(self):
        wj = self.guide._wj
        fv = self._fval
        self.value = sum(wj[j] * fv[j] for j in range(1, len(fv)))

    def marginal_add(self, x: ElementId) -> float:
        if x in self.current:
            return 0.0
        ell = self.guide.levels
        ubit = 1 << (x // ell)
        inner = self.guide.inner
        n = inner.ground_size
        wj = self.guide._wj
        total = 0.0
        for j in self._with_level[x % ell]:
            pj = self._proj[j]
            if pj & ubit:
                continue
            total += wj[j] * (inner.eval(ElementSet(n, pj | ubit)) - self._fval[j])
        return total

    def marginal_drop(self, x: ElementId) -> float:
        if x not in self.current:
            raise KeyError(x)
        ell = self.guide.levels
        ubit = 1 << (x // ell)
        inner = self.guide.inner
        n = inner.ground_size
        wj = self.guide._wj
        total = 0.0
        for j in self._with_level[x % ell]:
            total += wj[j] * (
                self._fval[j] - inner.eval(ElementSet(n, self._proj[j] & ~ubit))
            )
        return total

    def apply(self, add: ElementId | None = None, drop: ElementId | None = None):
        ell = self.guide.levels
        s = self.current
        if drop is not None:
            s = s.remove(drop)
            ubit = 1 << (drop // ell)
            for j in self._with_level[drop % ell]:
                self._proj[j] &= ~ubit
        if add is not None:
            s = s.add(add)
            ubit = 1 << (add // ell)
            if add not in self.current and self._proj[-1] & ubit:
                raise ValueError("base element already tracked on another level")
            for j in self._with_level[add % ell]:
                self._proj[j] |= ubit
        self.current = s
        inner = self.guide.inner
        n = inner.ground_size
        refresh = set()
        if drop is not None:
            refresh.update(self._with_level[drop % ell])
        if add is not None:
            refresh.update(self._with_level[add % ell])
        for j in sorted(refresh):
            self._fval[j] = inner.eval(ElementSet(n, self._proj[j]))
        self._recompute_value()


class RegularizedTracker(LiftedTracker):
    """LiftedTracker plus the query-free modular regularizer term."""

    __slots__ = ("rguide", "_reg_total")

    def __init__(self, rguide: RegularizedGuide, start: ElementSet):
        self.rguide = rguide
        ell = rguide.levels
        w = rguide.regularizer.weights
        self._reg_total = sum(w[x // ell] for x in start)
        super().__init__(rguide.lifted, start)

    def _recompute_value(self):
        super()._recompute_value()
        self.value += self.rguide.scale * self._reg_total

    def _reg_weight(self, x: ElementId) -> float:
        return self.rguide.regularizer.weights[x // self.rguide.levels]

    def marginal_add(self, x: ElementId) -> float:
        if x in self.current:
            return 0.0
        return super().marginal_add(x) + self.rguide.scale * self._reg_weight(x)

    def marginal_drop(self, x: ElementId) -> float:
        return super().marginal_drop(x) + self.rguide.scale * self._reg_weight(x)

    def apply(self, add: ElementId | None = None, drop: ElementId | None = None):
        if drop is not None:
            self._reg_total -= self._reg_weight(drop)
        if add is not None:
            self._reg_total += self._reg_weight(add)
        super().apply(add=add, drop=drop)


def make_tracker(oracle: ValueOracle, start: ElementSet):
    """Tracker for the oracle's structure; plain oracles get the generic
    cached-value tracker."""
    if hasattr(oracle, "make_tracker"):
        return oracle.make_tracker(start)
    return SolutionTracker(oracle, start)
