"""Instance files: a kind-tagged JSON document per problem instance.

The document carries the ground-set size, an objective spec, a matroid
spec, the declared rank, and an optional modular regularizer. Writing is
canonical (sorted keys, two-space indent, trailing newline), so generating
the same instance twice produces byte-identical files.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .core import ElementSet, RandomSource, sample_without_replacement
from .matroids import (
    ExplicitMatroid,
    GraphicMatroid,
    MatroidOracle,
    PartitionMatroid,
    UniformMatroid,
    rank as matroid_rank,
)
from .objectives import (
    ConcaveOfModular,
    CoverageFunction,
    LinearRegularizer,
    ModularFunction,
)

FORMAT_VERSION = 1

FAMILIES = ("coverage", "partition", "graphic", "modular")


@dataclass
class InstanceFile:
    """Parsed instance document plus builders for the live oracles."""

    name: str
    n: int
    r: int
    objective: dict
    matroid: dict
    regularizer: dict | None = None
    format_version: int = FORMAT_VERSION

    def to_document(self) -> dict:
        return {
            "format_version": self.format_version,
            "name": self.name,
            "n": self.n,
            "r": self.r,
            "objective": self.objective,
            "matroid": self.matroid,
            "regularizer": self.regularizer,
        }

    @classmethod
    def from_document(cls, doc: dict) -> "InstanceFile":
        if doc.get("format_version") != FORMAT_VERSION:
            raise ValueError(
                f"unsupported format_version {doc.get('format_version')!r}"
            )
        for key in ("name", "n", "r", "objective", "matroid"):
            if key not in doc:
                raise ValueError(f"instance document missing {key!r}")
        return cls(
            name=doc["name"],
            n=doc["n"],
            r=doc["r"],
            objective=doc["objective"],
            matroid=doc["matroid"],
            regularizer=doc.get("regularizer"),
        )

    def build_objective(self):
        obj = self.objective
        kind = obj.get("kind")
        if kind == "coverage":
            f = CoverageFunction(
                universe_size=obj["universe"],
                covers=obj["covers"],
                point_weights=obj.get("point_weights"),
            )
        elif kind == "modular":
            f = ModularFunction(obj["weights"])
        elif kind == "concave_modular":
            f = ConcaveOfModular(
                obj["weights"], shape=obj.get("shape", "sqrt"), cap=obj.get("cap", 0)
            )
        else:
            raise ValueError(f"unknown objective kind {kind!r}")
        if f.ground_size != self.n:
            raise ValueError("objective ground size disagrees with n")
        return f

    def build_matroid(self) -> MatroidOracle:
        spec = self.matroid
        kind = spec.get("kind")
        if kind == "uniform":
            m: MatroidOracle = UniformMatroid(self.n, spec["k"])
        elif kind == "partition":
            m = PartitionMatroid(self.n, spec["blocks"], spec["capacities"])
        elif kind == "graphic":
            m = GraphicMatroid(spec["vertices"], [tuple(e) for e in spec["edges"]])
        elif kind == "explicit":
            m = ExplicitMatroid(self.n, spec["independent"])
        else:
            raise ValueError(f"unknown matroid kind {kind!r}")
        if m.ground_size != self.n:
            raise ValueError("matroid ground size disagrees with n")
        return m

    def build_regularizer(self) -> LinearRegularizer | None:
        if self.regularizer is None:
            return None
        weights = self.regularizer["weights"]
        if len(weights) != self.n:
            raise ValueError("regularizer length disagrees with n")
        return LinearRegularizer(weights)


def dumps_canonical(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def save_instance(instance: InstanceFile, path: str | Path) -> None:
    Path(path).write_text(dumps_canonical(instance.to_document()))


def load_instance(path: str | Path) -> InstanceFile:
    return InstanceFile.from_document(json.loads(Path(path).read_text()))


# ----- generators -----


def generate_instance(family: str, n: int, r: int, seed: int) -> InstanceFile:
    """Deterministic instance for (family, n, r, seed).

    Objectives are integer valued. The declared rank always matches the
    generated matroid (asserted before returning).
    """
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}; choose from {FAMILIES}")
    if n < 1 or r < 1:
        raise ValueError("n and r must be positive")
    if r > n:
        raise ValueError("rank cannot exceed the ground size")
    rng = RandomSource(_mix_seed(family, n, r, seed))

    if family == "coverage":
        objective = _coverage_spec(rng, n)
        matroid = {"kind": "uniform", "k": r}
    elif family == "modular":
        objective = {
            "kind": "modular",
            "weights": [1 + rng.randrange(9) for _ in range(n)],
        }
        matroid = {"kind": "uniform", "k": r}
    elif family == "partition":
        objective = _coverage_spec(rng, n)
        blocks = [[u for u in range(n) if u % r == i] for i in range(r)]
        matroid = {
            "kind": "partition",
            "blocks": blocks,
            "capacities": [1] * r,
        }
    else:  # graphic
        vertices = r + 1
        edges = []
        for v in range(1, vertices):
            edges.append([rng.randrange(v), v])  # random spanning tree
        while len(edges) < n:
            a = rng.randrange(vertices)
            b = rng.randrange(vertices)
            if a != b:
                edges.append(sorted((a, b)))
        objective = _coverage_spec(rng, n)
        matroid = {"kind": "graphic", "vertices": vertices, "edges": edges}

    instance = InstanceFile(
        name=f"{family}-n{n}-r{r}-s{seed}",
        n=n,
        r=r,
        objective=objective,
        matroid=matroid,
    )
    actual = matroid_rank(instance.build_matroid())
    if actual != r:
        raise AssertionError(
            f"generator produced rank {actual}, declared {r} ({instance.name})"
        )
    return instance


def _coverage_spec(rng: RandomSource, n: int) -> dict:
    # universe of 2n unit-weight points; each element covers a small random
    # patch, so marginals overlap and local search has real work to do
    universe = 2 * n
    pool = ElementSet.full(universe)
    max_patch = max(2, min(8, universe // 2))
    covers = []
    for _ in range(n):
        size = 1 + rng.randrange(max_patch)
        covers.append(sorted(sample_without_replacement(rng, pool, size)))
    return {"kind": "coverage", "universe": universe, "covers": covers}


def _mix_seed(family: str, n: int, r: int, seed: int) -> int:
    # fold the grid coordinates into the seed so cells draw distinct streams
    h = 1469598103934665603  # FNV offset basis
    for token in (family, str(n), str(r), str(seed)):
        for ch in token.encode():
            h = (h ^ ch) * 1099511628211 % (1 << 64)
        h = (h ^ 0x2D) * 1099511628211 % (1 << 64)
    return h
