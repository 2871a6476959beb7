"""Shared primitives: ground sets, query accounting, randomness, numeric policy.

Everything downstream manipulates subsets of a ground set {0, ..., n-1}
through :class:`ElementSet`, counts oracle traffic through
:class:`QueryLedger`, and draws randomness through :class:`RandomSource`
so that every run is replayable from a single integer seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Protocol, runtime_checkable

ElementId = int

_MASK64 = (1 << 64) - 1


class ElementSet:
    """Immutable subset of a ground set {0, ..., n-1}, stored as a bitmask.

    Mutating operations return new sets; copies are O(1) on small universes
    because the state is a single int. Two sets compare equal only when both
    the universe size and the membership mask agree.
    """

    __slots__ = ("n", "mask")

    def __init__(self, n: int, mask: int = 0):
        if n < 0:
            raise ValueError("universe size must be non-negative")
        if mask < 0 or mask >> n:
            raise ValueError("mask has bits outside the universe")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "mask", mask)

    def __setattr__(self, name, value):  # pragma: no cover - guard
        raise AttributeError("ElementSet is immutable")

    @classmethod
    def empty(cls, n: int) -> "ElementSet":
        return cls(n, 0)

    @classmethod
    def full(cls, n: int) -> "ElementSet":
        return cls(n, (1 << n) - 1)

    @classmethod
    def from_iterable(cls, n: int, items: Iterable[ElementId]) -> "ElementSet":
        mask = 0
        for u in items:
            if not 0 <= u < n:
                raise ValueError(f"element {u} outside universe of size {n}")
            mask |= 1 << u
        return cls(n, mask)

    def __contains__(self, u: ElementId) -> bool:
        return 0 <= u < self.n and (self.mask >> u) & 1 == 1

    def __iter__(self) -> Iterator[ElementId]:
        # ascending order, used as the canonical iteration order everywhere
        m = self.mask
        while m:
            lsb = m & -m
            yield lsb.bit_length() - 1
            m ^= lsb

    def __len__(self) -> int:
        return self.mask.bit_count()

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, ElementSet)
            and self.n == other.n
            and self.mask == other.mask
        )

    def __hash__(self) -> int:
        return hash((self.n, self.mask))

    def __repr__(self) -> str:
        return f"ElementSet({self.n}, {{{', '.join(map(str, self))}}})"

    def add(self, u: ElementId) -> "ElementSet":
        if not 0 <= u < self.n:
            raise ValueError(f"element {u} outside universe of size {self.n}")
        return ElementSet(self.n, self.mask | (1 << u))

    def remove(self, u: ElementId) -> "ElementSet":
        if u not in self:
            raise KeyError(u)
        return ElementSet(self.n, self.mask & ~(1 << u))

    def union(self, other: "ElementSet") -> "ElementSet":
        self._check_universe(other)
        return ElementSet(self.n, self.mask | other.mask)

    def intersection(self, other: "ElementSet") -> "ElementSet":
        self._check_universe(other)
        return ElementSet(self.n, self.mask & other.mask)

    def difference(self, other: "ElementSet") -> "ElementSet":
        self._check_universe(other)
        return ElementSet(self.n, self.mask & ~other.mask)

    def issubset(self, other: "ElementSet") -> bool:
        self._check_universe(other)
        return self.mask & ~other.mask == 0

    __or__ = union
    __and__ = intersection
    __sub__ = difference
    __le__ = issubset

    def complement(self) -> "ElementSet":
        return ElementSet(self.n, ((1 << self.n) - 1) & ~self.mask)

    def to_list(self) -> list[ElementId]:
        return list(self)

    def _check_universe(self, other: "ElementSet") -> None:
        if self.n != other.n:
            raise ValueError("sets live over different universes")


@dataclass
class QueryLedger:
    """Counts oracle invocations. Never reset; snapshot and diff instead.

    Counters are plain ints; a solver run owns its ledger, so no
    synchronization is done here. Share across threads only with external
    locking.
    """

    value_queries: int = 0
    independence_queries: int = 0

    def snapshot(self) -> tuple[int, int]:
        return (self.value_queries, self.independence_queries)

    def since(self, snap: tuple[int, int]) -> tuple[int, int]:
        return (self.value_queries - snap[0], self.independence_queries - snap[1])

    @property
    def total(self) -> int:
        return self.value_queries + self.independence_queries


class RandomSource:
    """Deterministic 64-bit PRNG (SplitMix64) behind every random draw.

    SplitMix64 is a counter-based generator: the state advances along a Weyl
    sequence and a fixed avalanche mix produces each output word. The same
    seed yields the same draw sequence on every platform and Python build,
    which is what makes replay tests byte-stable.
    """

    __slots__ = ("seed", "_state")

    def __init__(self, seed: int):
        self.seed = seed
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def randrange(self, bound: int) -> int:
        """Uniform integer in [0, bound). Unbiased via rejection sampling."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        # accept only draws below the largest multiple of bound
        limit = (1 << 64) - ((1 << 64) % bound)
        while True:
            x = self.next_u64()
            if x < limit:
                return x % bound

    def uniform(self) -> float:
        # 53 bits of mantissa, in [0, 1)
        return (self.next_u64() >> 11) * (2.0**-53)

    def shuffle(self, items: list) -> None:
        for i in range(len(items) - 1, 0, -1):
            j = self.randrange(i + 1)
            items[i], items[j] = items[j], items[i]


def sample_without_replacement(
    rng: RandomSource, pool: ElementSet, k: int
) -> ElementSet:
    """Uniform k-subset of pool, deterministic given the generator state.

    Partial Fisher-Yates over the ascending member list: draw k swap
    positions, keep the prefix. k must satisfy 0 <= k <= |pool|.
    """
    m = len(pool)
    if not 0 <= k <= m:
        raise ValueError(f"cannot sample {k} elements from a pool of {m}")
    items = pool.to_list()
    for i in range(k):
        j = i + rng.randrange(m - i)
        items[i], items[j] = items[j], items[i]
    return ElementSet.from_iterable(pool.n, items[:k])


@dataclass(frozen=True)
class NumericPolicy:
    """Comparison policy for objective values.

    comparison_slack is a relative tolerance: ge(a, b) accepts when
    a >= b - slack * max(1, |a|, |b|). The default 0 gives exact
    comparisons, right for integer-valued objectives. Solvers working in
    floats use FLOAT_POLICY.
    """

    comparison_slack: float = 0.0

    def _scale(self, lhs: float, rhs: float) -> float:
        return self.comparison_slack * max(1.0, abs(lhs), abs(rhs))

    def ge(self, lhs: float, rhs: float) -> bool:
        return lhs >= rhs - self._scale(lhs, rhs)

    def gt(self, lhs: float, rhs: float) -> bool:
        """Strict comparison with the slack on the other side.

        Used where accepting a rounding-noise improvement would break
        termination (zero-threshold loops)."""
        return lhs > rhs + self._scale(lhs, rhs)


EXACT_POLICY = NumericPolicy(0.0)
FLOAT_POLICY = NumericPolicy(1e-9)


@runtime_checkable
class ValueOracle(Protocol):
    """Set function oracle: eval(S) -> value. ground_size is |N|."""

    ground_size: int

    def eval(self, s: ElementSet) -> float: ...


@runtime_checkable
class MatroidOracle(Protocol):
    """Independence oracle: is_independent(S) -> bool. ground_size is |N|."""

    ground_size: int

    def is_independent(self, s: ElementSet) -> bool: ...


class CountingValueOracle:
    """Pass-through value oracle that charges one query per eval."""

    __slots__ = ("inner", "ledger")

    def __init__(self, inner: ValueOracle, ledger: QueryLedger):
        self.inner = inner
        self.ledger = ledger

    @property
    def ground_size(self) -> int:
        return self.inner.ground_size

    def eval(self, s: ElementSet) -> float:
        self.ledger.value_queries += 1
        return self.inner.eval(s)


class CountingMatroidOracle:
    """Pass-through independence oracle that charges one query per call."""

    __slots__ = ("inner", "ledger")

    def __init__(self, inner: MatroidOracle, ledger: QueryLedger):
        self.inner = inner
        self.ledger = ledger

    @property
    def ground_size(self) -> int:
        return self.inner.ground_size

    def is_independent(self, s: ElementSet) -> bool:
        self.ledger.independence_queries += 1
        return self.inner.is_independent(s)


def with_counting(oracle, ledger: QueryLedger):
    """Wrap a value or independence oracle so the ledger sees every call."""
    if hasattr(oracle, "is_independent"):
        return CountingMatroidOracle(oracle, ledger)
    if hasattr(oracle, "eval"):
        return CountingValueOracle(oracle, ledger)
    raise TypeError(f"not an oracle: {oracle!r}")
