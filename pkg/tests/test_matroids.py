import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nols.core import ElementSet, QueryLedger, RandomSource, with_counting
from nols.matroids import (
    ExplicitMatroid,
    GraphicMatroid,
    PartitionMatroid,
    UniformMatroid,
    exchange_bijection,
    extend_to_base,
    lift,
    max_weight_independent,
    min_weight_exchange,
    rank,
)
from suite import greedy_independent


def _es(n, items):
    return ElementSet.from_iterable(n, items)


def test_uniform_matroid():
    m = UniformMatroid(5, 2)
    assert m.is_independent(_es(5, []))
    assert m.is_independent(_es(5, [1, 4]))
    assert not m.is_independent(_es(5, [0, 1, 2]))
    assert rank(m) == 2


def test_partition_matroid():
    m = PartitionMatroid(6, [[0, 1, 2], [3, 4, 5]], [2, 1])
    assert m.is_independent(_es(6, [0, 2, 4]))
    assert not m.is_independent(_es(6, [0, 1, 2]))
    assert not m.is_independent(_es(6, [3, 4]))
    assert rank(m) == 3
    with pytest.raises(ValueError):
        PartitionMatroid(4, [[0, 1], [1, 2, 3]], [1, 1])  # overlapping blocks
    with pytest.raises(ValueError):
        PartitionMatroid(4, [[0, 1]], [1])  # not a cover


def test_graphic_matroid_triangle():
    # edges 0:(0,1), 1:(1,2), 2:(0,2) form a triangle: any 2 ok, all 3 cycle
    m = GraphicMatroid(3, [[0, 1], [1, 2], [0, 2]])
    for pair in ([0, 1], [1, 2], [0, 2]):
        assert m.is_independent(_es(3, pair))
    assert not m.is_independent(_es(3, [0, 1, 2]))
    assert rank(m) == 2


def test_graphic_matroid_multigraph():
    # parallel edges form a 2-cycle; a self-loop is never independent
    m = GraphicMatroid(3, [[0, 1], [0, 1], [2, 2]])
    assert m.is_independent(_es(3, [0]))
    assert not m.is_independent(_es(3, [0, 1]))
    assert not m.is_independent(_es(3, [2]))


def test_explicit_matroid_validates_axioms():
    good = [0b00, 0b01, 0b10, 0b11]
    ExplicitMatroid(2, good)  # should not raise
    with pytest.raises(ValueError):
        ExplicitMatroid(2, [0b00, 0b11])  # not downward closed
    with pytest.raises(ValueError):
        ExplicitMatroid(3, [0b000, 0b001, 0b010, 0b100, 0b011])  # exchange fails
    bad = ExplicitMatroid(2, [0b00, 0b11], validate=False)
    assert bad.is_independent(_es(2, [0, 1]))  # stored as given, for negative tests


def test_extend_to_base_examples():
    assert extend_to_base(UniformMatroid(4, 2), _es(4, [])) == _es(4, [0, 1])
    m = PartitionMatroid(4, [[0, 1], [2, 3]], [1, 1])
    assert extend_to_base(m, _es(4, [1])) == _es(4, [1, 2])


def test_extend_to_base_always_reaches_rank():
    rng = RandomSource(17)
    for _ in range(200):
        n = 2 + rng.randrange(9)
        kind = rng.randrange(3)
        if kind == 0:
            m = UniformMatroid(n, 1 + rng.randrange(n))
        elif kind == 1:
            r = 1 + rng.randrange(3)
            blocks = [[u for u in range(n) if u % r == i] for i in range(r)]
            m = PartitionMatroid(n, blocks, [1 + rng.randrange(2) for _ in range(r)])
        else:
            v = 2 + rng.randrange(min(4, n))
            edges = [[rng.randrange(w), w] for w in range(1, v)]
            while len(edges) < n:
                a, b = rng.randrange(v), rng.randrange(v)
                if a != b:
                    edges.append(sorted((a, b)))
            m = GraphicMatroid(v, edges)
        n = m.ground_size
        start = ElementSet.empty(n)
        for u in range(0, n, 3):
            cand = start.add(u)
            if m.is_independent(cand):
                start = cand
        base = extend_to_base(m, start)
        assert start.issubset(base)
        assert len(base) == rank(m)


def test_max_weight_independent_examples():
    assert max_weight_independent(UniformMatroid(4, 2), [5, 1, 3, 2]) == _es(4, [0, 2])
    m = PartitionMatroid(4, [[0, 1], [2, 3]], [1, 1])
    assert max_weight_independent(m, [2, 9, 4, 4]) == _es(4, [1, 2])
    # zero weights still extend to a base; negative weights are left out
    assert max_weight_independent(UniformMatroid(3, 2), [0, 0, 0]) == _es(3, [0, 1])
    assert max_weight_independent(UniformMatroid(3, 2), [-1, 5, -2]) == _es(3, [1])


def test_min_weight_exchange_matches_linear_scan():
    rng = RandomSource(42)
    cases = 0
    while cases < 1000:
        n = 3 + rng.randrange(10)
        kind = rng.randrange(3)
        if kind == 0:
            m = UniformMatroid(n, 1 + rng.randrange(max(1, n // 2)))
        elif kind == 1:
            r = 1 + rng.randrange(3)
            blocks = [[u for u in range(n) if u % r == i] for i in range(r)]
            m = PartitionMatroid(n, blocks, [1 + rng.randrange(2) for _ in range(r)])
        else:
            v = 2 + rng.randrange(4)
            edges = [[rng.randrange(w), w] for w in range(1, v)]
            while len(edges) < n:
                a, b = rng.randrange(v), rng.randrange(v)
                if a != b:
                    edges.append(sorted((a, b)))
            m = GraphicMatroid(v, edges)
        s = greedy_independent(m, n, rng)
        blocked = [
            v
            for v in range(n)
            if v not in s
            and m.is_independent(ElementSet.empty(n).add(v))
            and not m.is_independent(s.add(v))
        ]
        if not blocked or len(s) == 0:
            continue
        cases += 1
        v = blocked[rng.randrange(len(blocked))]
        weights = {u: rng.randrange(100) / 7.0 for u in s}
        ledger = QueryLedger()
        got = min_weight_exchange(with_counting(m, ledger), s, s, v, weights)
        want = min(
            (weights[u], u) for u in s if m.is_independent(s.remove(u).add(v))
        )[1]
        assert got == want
        log_term = math.ceil(math.log2(len(s))) if len(s) > 1 else 0
        assert ledger.independence_queries <= log_term + 2


def test_min_weight_exchange_rejects_empty_pool():
    m = UniformMatroid(3, 1)
    with pytest.raises(ValueError):
        min_weight_exchange(m, _es(3, [0]), ElementSet.empty(3), 1, {})


def test_lifted_matroid_counts_one_base_query():
    base = UniformMatroid(3, 2)
    ledger = QueryLedger()
    lm = lift(with_counting(base, ledger), 2)
    assert lm.ground_size == 6
    # elements 0,1 are the two copies of base element 0: free rejection
    before = ledger.independence_queries
    assert not lm.is_independent(_es(6, [0, 1]))
    assert ledger.independence_queries == before
    before = ledger.independence_queries
    assert lm.is_independent(_es(6, [0, 3]))
    assert ledger.independence_queries == before + 1
    assert rank(lm) == rank(base)


@given(st.integers(1, 4), st.integers(1, 3), st.integers(0, 2**12 - 1))
@settings(max_examples=150)
def test_lifted_membership_matches_projection_rule(n, levels, raw):
    base = UniformMatroid(n, max(1, n - 1))
    lm = lift(base, levels)
    mask = raw & ((1 << (n * levels)) - 1)
    s = ElementSet(n * levels, mask)
    bases = [x // levels for x in s]
    expected = len(bases) == len(set(bases)) and base.is_independent(
        ElementSet.from_iterable(n, set(bases))
    )
    assert lm.is_independent(s) == expected


def test_exchange_bijection_maps_between_bases():
    m = GraphicMatroid(4, [[0, 1], [1, 2], [2, 3], [0, 3], [0, 2]])
    a = _es(5, [0, 1, 2])
    b = _es(5, [1, 3, 4])
    assert m.is_independent(a) and m.is_independent(b)
    phi = exchange_bijection(m, a, b)
    assert set(phi.keys()) == set(a)
    assert sorted(phi.values()) == sorted(b)
    assert phi[1] == 1  # shared elements map to themselves
    for u in a:
        if phi[u] == u:
            continue
        swapped = a.remove(u).add(phi[u])
        assert m.is_independent(swapped)


def test_exchange_bijection_identity():
    m = UniformMatroid(4, 2)
    a = _es(4, [1, 3])
    phi = exchange_bijection(m, a, a)
    assert phi == {1: 1, 3: 3}
