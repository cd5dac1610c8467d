"""Feasibility constraints and sum-of-values subroutines.

Every supported matroid is a partition matroid in disguise: FREE is one
block with unbounded capacity, UNIFORM(k) is one block with capacity k.
Independence is therefore always "per-block counts within capacity", which
keeps the offline greedy and the online rules short.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import ConfigError

FREE = "free"
UNIFORM = "uniform"
PARTITION = "partition"


@dataclass(frozen=True)
class Matroid:
    kind: str
    ground: frozenset[int]
    k: int | None = None
    parts: tuple[tuple[int, ...], ...] = ()
    caps: tuple[int, ...] = ()

    def __post_init__(self):
        if self.kind not in (FREE, UNIFORM, PARTITION):
            raise ConfigError(f"unknown matroid kind {self.kind!r}")
        if self.kind == UNIFORM and (self.k is None or self.k < 0):
            raise ConfigError("uniform matroid needs k >= 0")
        if self.kind == PARTITION:
            if len(self.parts) != len(self.caps):
                raise ConfigError("partition matroid needs one cap per part")
            if any(c < 0 for c in self.caps):
                raise ConfigError("partition caps must be nonnegative")
            seen: set[int] = set()
            for part in self.parts:
                overlap = seen.intersection(part)
                if overlap:
                    raise ConfigError(f"elements {sorted(overlap)} appear in two parts")
                seen.update(part)
            if seen != set(self.ground):
                missing = sorted(set(self.ground) - seen)
                raise ConfigError(f"partition does not cover elements {missing}")

    @classmethod
    def free(cls, ground: Iterable[int]) -> "Matroid":
        return cls(FREE, frozenset(ground))

    @classmethod
    def uniform(cls, ground: Iterable[int], k: int) -> "Matroid":
        return cls(UNIFORM, frozenset(ground), k=k)

    @classmethod
    def partition(cls, parts: Sequence[Sequence[int]], caps: Sequence[int]) -> "Matroid":
        parts_t = tuple(tuple(p) for p in parts)
        ground = frozenset(i for p in parts_t for i in p)
        return cls(PARTITION, ground, parts=parts_t, caps=tuple(caps))

    @classmethod
    def from_json(cls, spec: Mapping, ground: Iterable[int]) -> "Matroid":
        kind = spec.get("kind", FREE)
        if kind == FREE:
            return cls.free(ground)
        if kind == UNIFORM:
            if "k" not in spec:
                raise ConfigError("uniform feasibility needs 'k'")
            return cls.uniform(ground, int(spec["k"]))
        if kind == PARTITION:
            if "parts" not in spec or "caps" not in spec:
                raise ConfigError("partition feasibility needs 'parts' and 'caps'")
            m = cls.partition(spec["parts"], [int(c) for c in spec["caps"]])
            if m.ground != frozenset(ground):
                raise ConfigError("partition parts must cover exactly the instance elements")
            return m
        raise ConfigError(f"unknown feasibility kind {kind!r}")

    def to_json(self) -> dict:
        if self.kind == FREE:
            return {"kind": FREE}
        if self.kind == UNIFORM:
            return {"kind": UNIFORM, "k": self.k}
        return {"kind": PARTITION, "parts": [list(p) for p in self.parts], "caps": list(self.caps)}

    def restrict(self, ids: Iterable[int]) -> "Matroid":
        """The same constraint on a subset of the ground set."""
        keep = frozenset(ids)
        if self.kind == PARTITION:
            parts = tuple(tuple(i for i in p if i in keep) for p in self.parts)
            return Matroid(PARTITION, keep, parts=parts, caps=self.caps)
        return Matroid(self.kind, keep, k=self.k)

    # block view -------------------------------------------------------

    @property
    def _block(self) -> dict[int, int]:
        if self.kind != PARTITION:
            return {}
        cached = self.__dict__.get("_block_cache")
        if cached is None:
            cached = {i: b for b, part in enumerate(self.parts) for i in part}
            object.__setattr__(self, "_block_cache", cached)
        return cached

    def block(self, e: int) -> int:
        if e not in self.ground:
            raise ConfigError(f"element {e} is not in the matroid ground set")
        return self._block[e] if self.kind == PARTITION else 0

    def capacity(self, block: int) -> float:
        if self.kind == FREE:
            return math.inf
        if self.kind == UNIFORM:
            return self.k
        return self.caps[block]

    def blocks(self) -> list[tuple[int, ...]]:
        if self.kind == PARTITION:
            return list(self.parts)
        return [tuple(sorted(self.ground))]

    def rank(self) -> int:
        return sum(int(min(self.capacity(b), len(p))) for b, p in enumerate(self.blocks()))

    def is_independent(self, ids: Iterable[int]) -> bool:
        counts = Counter(self.block(e) for e in ids)
        return all(n <= self.capacity(b) for b, n in counts.items())


def is_independent(m: Matroid, A: Iterable[int]) -> bool:
    return m.is_independent(A)


def matroid_greedy(m: Matroid, weights: Mapping[int, Fraction | int]) -> frozenset[int]:
    """Maximum-weight independent set among elements of positive weight.

    Standard greedy: scan by weight descending (ties by smaller id), keep an
    element whenever its block still has room. Exact for matroids.
    """
    used: Counter[int] = Counter()
    chosen = []
    for e in sorted((e for e, w in weights.items() if w > 0), key=lambda e: (-weights[e], e)):
        b = m.block(e)
        if used[b] < m.capacity(b):
            used[b] += 1
            chosen.append(e)
    return frozenset(chosen)


class _Block:
    """Online rule for one block of capacity ``cap`` over ``n`` arrivals.

    cap == 1 is Dynkin's rule (observe floor(n/e), then take the first
    arrival beating everything observed).  cap > 1 observes floor(n/2) and
    then takes arrivals beating the cap-th largest observation while room
    remains.  Unbounded capacity accepts every positive arrival.
    """

    def __init__(self, n: int, cap: float):
        self.cap = cap
        self.seen = 0
        self.taken = 0
        if cap == math.inf:
            self.sample_size = 0
        elif cap == 1:
            self.sample_size = math.floor(n / math.e)
        else:
            self.sample_size = n // 2
        self.sample: list = []
        self.threshold = None

    def offer(self, value) -> bool:
        self.seen += 1
        if self.taken >= self.cap:
            return False
        if self.seen <= self.sample_size:
            self.sample.append(value)
            return False
        if self.threshold is None:
            self.threshold = self._threshold()
        if self.cap == math.inf:
            ok = value > 0
        else:
            ok = self.threshold is None or value > self.threshold
        if ok:
            self.taken += 1
        return ok

    def _threshold(self):
        if self.cap == math.inf or len(self.sample) < self.cap:
            return None
        return sorted(self.sample, reverse=True)[int(self.cap) - 1]


class SumOfValuesSecretary:
    """Online sum-of-values algorithm for a FREE/UNIFORM/PARTITION matroid.

    The arrival count of every block must be known up front; callers pass
    the sub-stream they are going to feed, in order.  Each block runs its
    own rule, so the accepted set is independent by construction.
    """

    def __init__(self, m: Matroid, stream: Sequence[int]):
        self.m = m
        per_block = Counter(m.block(e) for e in stream)
        self._blocks = {b: _Block(per_block[b], m.capacity(b)) for b in per_block}
        self.accepted: list[int] = []

    def offer(self, e: int, value) -> bool:
        if self.m.capacity(self.m.block(e)) < 1:
            return False
        ok = self._blocks[self.m.block(e)].offer(value)
        if ok:
            self.accepted.append(e)
        return ok


def online_sum_values(m: Matroid, stream: Sequence[int], objective: Mapping[int, Fraction | int]) -> list[int]:
    """Run the online rule over ``stream``; returns accepted ids in arrival order."""
    alg = SumOfValuesSecretary(m, stream)
    for e in stream:
        alg.offer(e, objective[e])
    return alg.accepted
