"""Matroid independence oracles and exchange subroutines.

All matroids answer through ``is_independent(S)`` only; solvers never peek
at internal structure. The exchange helpers (``extend_to_base``,
``max_weight_independent``, ``min_weight_exchange``, ``exchange_bijection``)
are written against that interface so they work unchanged on counted
oracles and on lifted matroids.
"""

from __future__ import annotations

from typing import Mapping, Sequence

from .core import ElementId, ElementSet, MatroidOracle


class UniformMatroid:
    """Independent iff |S| <= k."""

    __slots__ = ("ground_size", "k")

    def __init__(self, n: int, k: int):
        if n < 0 or k < 0:
            raise ValueError("n and k must be non-negative")
        self.ground_size = n
        self.k = k

    def is_independent(self, s: ElementSet) -> bool:
        return len(s) <= self.k

    def __repr__(self):
        return f"UniformMatroid(n={self.ground_size}, k={self.k})"


class PartitionMatroid:
    """Blocks partition the ground set; at most capacity[i] picks per block."""

    __slots__ = ("ground_size", "blocks", "capacities", "_block_masks")

    def __init__(
        self,
        n: int,
        blocks: Sequence[Sequence[ElementId]],
        capacities: Sequence[int],
    ):
        if len(blocks) != len(capacities):
            raise ValueError("one capacity per block required")
        masks = []
        seen = 0
        for block in blocks:
            m = 0
            for u in block:
                if not 0 <= u < n:
                    raise ValueError(f"element {u} outside universe")
                m |= 1 << u
            if m & seen:
                raise ValueError("blocks must be disjoint")
            seen |= m
            masks.append(m)
        if seen != (1 << n) - 1:
            raise ValueError("blocks must cover the ground set")
        if any(c < 0 for c in capacities):
            raise ValueError("capacities must be non-negative")
        self.ground_size = n
        self.blocks = [tuple(sorted(b)) for b in blocks]
        self.capacities = tuple(capacities)
        self._block_masks = tuple(masks)

    def is_independent(self, s: ElementSet) -> bool:
        return all(
            (s.mask & m).bit_count() <= c
            for m, c in zip(self._block_masks, self.capacities)
        )

    def __repr__(self):
        return f"PartitionMatroid(n={self.ground_size}, blocks={len(self.blocks)})"


class _UnionFind:
    # plain array union-find with path halving; rebuilt per query on purpose
    __slots__ = ("parent",)

    def __init__(self, size: int):
        self.parent = list(range(size))

    def find(self, x: int) -> int:
        p = self.parent
        while p[x] != x:
            p[x] = p[p[x]]
            x = p[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[ra] = rb
        return True


class GraphicMatroid:
    """Ground set = edges of a multigraph; independent iff the edges are acyclic.

    Each query runs a fresh union-find over the selected edges, so the
    oracle is stateless between calls.
    """

    __slots__ = ("ground_size", "vertex_count", "edges")

    def __init__(self, vertex_count: int, edges: Sequence[tuple[int, int]]):
        for a, b in edges:
            if not (0 <= a < vertex_count and 0 <= b < vertex_count):
                raise ValueError(f"edge ({a},{b}) outside vertex range")
        self.ground_size = len(edges)
        self.vertex_count = vertex_count
        self.edges = tuple((a, b) for a, b in edges)

    def is_independent(self, s: ElementSet) -> bool:
        uf = _UnionFind(self.vertex_count)
        for e in s:
            a, b = self.edges[e]
            if a == b or not uf.union(a, b):
                return False  # self-loop or cycle closed
        return True

    def __repr__(self):
        return (
            f"GraphicMatroid(vertices={self.vertex_count}, edges={self.ground_size})"
        )


class ExplicitMatroid:
    """Matroid given by the full list of independent sets. Test scale only.

    The family is validated against the matroid axioms at construction
    (non-empty, downward closed, exchange). Pass validate=False to build a
    deliberately broken family for negative tests.
    """

    MAX_GROUND = 20

    __slots__ = ("ground_size", "_family")

    def __init__(
        self,
        n: int,
        independent: Sequence[Sequence[ElementId]] | Sequence[int],
        validate: bool = True,
    ):
        if n > self.MAX_GROUND:
            raise ValueError(f"explicit matroid capped at n <= {self.MAX_GROUND}")
        masks = set()
        for s in independent:
            if isinstance(s, int):
                mask = s
                if mask < 0 or mask >> n:
                    raise ValueError("mask outside universe")
            else:
                mask = ElementSet.from_iterable(n, s).mask
            masks.add(mask)
        self.ground_size = n
        self._family = frozenset(masks)
        if validate:
            self._validate()

    def _validate(self) -> None:
        fam = self._family
        if 0 not in fam:
            raise ValueError("independent family must contain the empty set")
        for mask in fam:
            m = mask
            while m:
                lsb = m & -m
                if mask ^ lsb not in fam:
                    raise ValueError("family is not downward closed")
                m ^= lsb
        by_size: dict[int, list[int]] = {}
        for mask in fam:
            by_size.setdefault(mask.bit_count(), []).append(mask)
        # exchange between sizes k and k+1 suffices; larger gaps follow by
        # downward closure
        for k, smaller in by_size.items():
            for t in by_size.get(k + 1, ()):
                for s in smaller:
                    if not any(s | bit in fam for bit in _bits(t & ~s)):
                        raise ValueError("family violates the exchange axiom")

    def is_independent(self, s: ElementSet) -> bool:
        return s.mask in self._family

    def __repr__(self):
        return f"ExplicitMatroid(n={self.ground_size}, sets={len(self._family)})"


def _bits(mask: int):
    while mask:
        lsb = mask & -mask
        yield lsb
        mask ^= lsb


class LiftedMatroid:
    """Matroid over ground x {1..levels} flattened to base*levels + (level-1).

    A lifted set is independent iff no base element appears at two levels
    and the projection of the occupied base elements is independent in the
    inner matroid. The level-multiplicity check is free; each call costs at
    most one inner independence query.
    """

    __slots__ = ("inner", "levels", "ground_size")

    def __init__(self, inner: MatroidOracle, levels: int):
        if levels < 1:
            raise ValueError("levels must be >= 1")
        self.inner = inner
        self.levels = levels
        self.ground_size = inner.ground_size * levels

    def is_independent(self, s: ElementSet) -> bool:
        base_n = self.inner.ground_size
        seen = 0
        for x in s:
            bit = 1 << (x // self.levels)
            if seen & bit:
                return False  # same base element at two levels
            seen |= bit
        return self.inner.is_independent(ElementSet(base_n, seen))

    def __repr__(self):
        return f"LiftedMatroid(levels={self.levels}, inner={self.inner!r})"


def lift(matroid: MatroidOracle, levels: int) -> LiftedMatroid:
    """Build the lifted matroid over ground x {1..levels}."""
    return LiftedMatroid(matroid, levels)


def extend_to_base(matroid: MatroidOracle, start: ElementSet) -> ElementSet:
    """Grow an independent set into a base with one ascending pass.

    One pass suffices: if some element could still be added afterwards, it
    could already be added when visited (downward closure). Costs one
    independence query per element outside the start set.
    """
    s = start
    for u in range(matroid.ground_size):
        if u in s:
            continue
        cand = s.add(u)
        if matroid.is_independent(cand):
            s = cand
    return s


def rank(matroid: MatroidOracle) -> int:
    """Rank of the matroid, computed by extending the empty set."""
    return len(extend_to_base(matroid, ElementSet.empty(matroid.ground_size)))


def max_weight_independent(
    matroid: MatroidOracle, weights: Sequence[float] | Mapping[ElementId, float]
) -> ElementSet:
    """Maximum-weight independent set by greedy, exact for matroids.

    Elements are tried in descending weight, ties toward the smaller id.
    Strictly negative weights are skipped (never helpful in a downward
    closed family); zero-weight elements are still added, so all-zero
    weights return the greedy base.
    """
    n = matroid.ground_size
    w = [weights[u] for u in range(n)]
    order = sorted(range(n), key=lambda u: (-w[u], u))
    s = ElementSet.empty(n)
    for u in order:
        if w[u] < 0:
            continue
        cand = s.add(u)
        if matroid.is_independent(cand):
            s = cand
    return s


def min_weight_exchange(
    matroid: MatroidOracle,
    s: ElementSet,
    s_prime: ElementSet,
    v: ElementId,
    weights: Mapping[ElementId, float],
) -> ElementId:
    """Cheapest u in s_prime whose removal lets v join: argmin w(u) with
    S - u + v independent.

    Preconditions (trusted, not queried): S independent, s_prime subset of
    S, v outside S with S + v dependent, and (S - s_prime) + v independent.
    Label s_prime ascending by (weight, id); feasibility of keeping the
    label suffix is monotone, so the boundary label is found by binary
    search in at most ceil(log2(|s_prime|)) queries, and the boundary
    element is exactly the (weight, id)-minimal feasible swap.
    """
    if len(s_prime) == 0:
        raise ValueError("s_prime must be non-empty")
    labels = sorted(s_prime, key=lambda u: (weights[u], u))
    m = len(labels)
    # suffix[i] = mask of labels[i:]
    suffix = [0] * (m + 1)
    for i in range(m - 1, -1, -1):
        suffix[i] = suffix[i + 1] | (1 << labels[i])
    outside = (s.mask & ~s_prime.mask) | (1 << v)
    n = s.n

    def keeps_suffix(i: int) -> bool:
        # independent when keeping labels[i-1:] (1-indexed position i)
        return matroid.is_independent(ElementSet(n, outside | suffix[i - 1]))

    # invariant: P(lo) false, P(hi) true, with P(1) false and P(m+1) true
    # guaranteed by the preconditions
    lo, hi = 1, m + 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if keeps_suffix(mid):
            hi = mid
        else:
            lo = mid
    return labels[hi - 2]


def exchange_bijection(
    matroid: MatroidOracle, a: ElementSet, b: ElementSet
) -> dict[ElementId, ElementId]:
    """Bijection h from base a onto base b with b - h(u) + u independent for
    every u in a, fixing a's overlap with b pointwise.

    Computed as a perfect matching on the swap-feasibility graph between
    a - b and b - a (Kuhn's augmenting paths). Intended for verification
    at test scale; call with uncounted oracles to keep it out of ledgers.
    Raises RuntimeError if no perfect matching exists, which for genuine
    bases of a matroid cannot happen.
    """
    if len(a) != len(b):
        raise ValueError("bases must have equal size")
    left = [u for u in a if u not in b]
    right = [x for x in b if x not in a]
    adj: list[list[int]] = []
    for u in left:
        row = []
        for j, x in enumerate(right):
            if matroid.is_independent(b.remove(x).add(u)):
                row.append(j)
        adj.append(row)

    match_right: list[int | None] = [None] * len(right)

    def try_augment(i: int, visited: set[int]) -> bool:
        for j in adj[i]:
            if j in visited:
                continue
            visited.add(j)
            if match_right[j] is None or try_augment(match_right[j], visited):
                match_right[j] = i
                return True
        return False

    for i in range(len(left)):
        if not try_augment(i, set()):
            raise RuntimeError("no perfect exchange matching; inputs are not bases")

    h = {u: u for u in a if u in b}
    for j, i in enumerate(match_right):
        assert i is not None
        h[left[i]] = right[j]
    return h
