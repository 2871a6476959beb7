"""Shared fixture builders used across the test modules.

Everything here is deterministic: builders take explicit seeds and the
returned instances are integer-valued so bound checks can run in exact
arithmetic.
"""

from __future__ import annotations

import math

from nols.core import ElementSet, RandomSource
from nols.instances import InstanceFile, generate_instance
from nols.matroids import UniformMatroid
from nols.objectives import CoverageFunction

# f({1}) = 2, f({3}) = 3, f({1,3}) = 5 = OPT under a rank-2 uniform matroid
TINY_COVERS = [[0], [0, 1], [1, 2], [2, 3, 4]]
TINY_UNIVERSE = 5


def tiny_coverage() -> tuple[CoverageFunction, UniformMatroid]:
    return CoverageFunction(TINY_UNIVERSE, TINY_COVERS), UniformMatroid(4, 2)


SUITE_SHAPES = (
    (8, 2, 1),
    (10, 3, 2),
    (12, 3, 3),
    (14, 4, 4),
    (9, 2, 5),
    (11, 3, 6),
    (13, 4, 7),
    (10, 4, 8),
)


def brute_forceable_suite() -> list[InstanceFile]:
    """32 integer-valued instances with n <= 14, r <= 4, all four families."""
    return [
        generate_instance(family, n, r, seed)
        for family in ("coverage", "partition", "graphic", "modular")
        for (n, r, seed) in SUITE_SHAPES
    ]


def small_suite(max_n: int = 10) -> list[InstanceFile]:
    return [inst for inst in brute_forceable_suite() if inst.n <= max_n]


def ceil_sqrt(n: int) -> int:
    root = math.isqrt(n)
    return root + (1 if root * root < n else 0)


def bait_chain(
    n: int, r: int, seed: int, patch: int = 100, bite: int = 51
) -> tuple[CoverageFunction, UniformMatroid]:
    """Coverage instance whose greedy warm start needs a long repair chain.

    r disjoint "true" patches of size patch sit at the top of the index
    space; bait elements each straddle two consecutive patches covering
    bite points of each, so their singleton value beats a patch and greedy
    swallows the whole chain. Local search then has to swap baits out one
    at a time, exercising the swap loop rather than terminating on the
    first confirming scan. Junk singletons at the low indices make every
    scan pay the full candidate walk.
    """
    if n < 2 * r:
        raise ValueError("need n >= 2r for the chain construction")
    rng = RandomSource(seed)
    junk = max(4 * (n - (2 * r - 1)), 1)
    universe = r * patch + junk
    base = r * patch
    covers: list[list[int]] = []
    while len(covers) < n - (2 * r - 1):
        covers.append([base + rng.randrange(junk)])
    for j in range(r - 1):
        pts = list(range(j * patch, j * patch + bite))
        pts += list(range((j + 1) * patch, (j + 1) * patch + bite))
        covers.append(pts)
    for i in range(r):
        covers.append(list(range(i * patch, (i + 1) * patch)))
    return CoverageFunction(universe, covers), UniformMatroid(n, r)


def greedy_independent(matroid, n: int, rng: RandomSource) -> ElementSet:
    """A random maximal-ish independent set, for exchange test cases."""
    s = ElementSet.empty(n)
    order = list(range(n))
    rng.shuffle(order)
    for u in order:
        cand = s.add(u)
        if matroid.is_independent(cand):
            s = cand
    return s
