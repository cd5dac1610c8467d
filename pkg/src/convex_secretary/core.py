"""Exact data model: elements, convex costs, profits and density prefixes.

Everything that can be non-integral (densities, fractional sizes, profits of
fractional sets) is a :class:`fractions.Fraction`.  Values, sizes and costs
at integral sizes stay plain ``int``.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import ConfigError
from .matroid import Matroid

Number = int | Fraction


def to_fraction(x) -> Fraction:
    """Parse ints, Fractions and ``"p/q"`` strings."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise ConfigError(f"not a rational: {x!r}")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x)
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"not a rational: {x!r}") from exc
    raise ConfigError(f"not a rational: {x!r}")


def fmt_rational(x) -> str | int:
    """JSON form of a rational: ints stay ints, the rest become ``"p/q"``."""
    if isinstance(x, int):
        return x
    x = Fraction(x)
    if x.denominator == 1:
        return x.numerator
    return f"{x.numerator}/{x.denominator}"


# ---------------------------------------------------------------- elements


@dataclass(frozen=True)
class Element:
    id: int
    value: int
    sizes: tuple[int, ...]

    def __post_init__(self):
        if not isinstance(self.value, int) or self.value < 0:
            raise ConfigError(f"element {self.id}: value must be a nonnegative integer")
        if not self.sizes:
            raise ConfigError(f"element {self.id}: needs at least one size")
        if any((not isinstance(s, int)) or s < 0 for s in self.sizes):
            raise ConfigError(f"element {self.id}: sizes must be nonnegative integers")
        if all(s == 0 for s in self.sizes):
            raise ConfigError(f"element {self.id}: at least one size must be positive")

    @property
    def size(self) -> int:
        return self.sizes[0]


# ------------------------------------------------------------------- costs


@dataclass(frozen=True)
class CostFunction:
    """Convex nondecreasing integer cost with C(0) = 0.

    ``kind="poly"``: ``coeffs[p]`` multiplies ``s**p``; ``coeffs[0]`` must be 0.
    ``kind="table"``: explicit marginals c(1..tmax); beyond the table the
    marginal keeps growing by one per unit, c(t) = c(tmax) + (t - tmax).
    """

    kind: str
    coeffs: tuple[int, ...] = ()
    marginals: tuple[int, ...] = ()
    _prefix: tuple[int, ...] = field(default=(), compare=False, repr=False)

    def __post_init__(self):
        if self.kind == "poly":
            co = self.coeffs
            if len(co) < 2 or any((not isinstance(a, int)) or a < 0 for a in co):
                raise ConfigError("poly cost needs nonnegative integer coefficients, degree >= 1")
            if co[0] != 0:
                raise ConfigError("poly cost must have zero constant term so that C(0) = 0")
            if all(a == 0 for a in co[1:]):
                raise ConfigError("poly cost must have a positive coefficient")
            # strip trailing zeros so degree is meaningful
            while co[-1] == 0:
                co = co[:-1]
            object.__setattr__(self, "coeffs", tuple(co))
        elif self.kind == "table":
            m = self.marginals
            if not m or any((not isinstance(a, int)) or a < 1 for a in m):
                raise ConfigError("table cost needs positive integer marginals")
            if any(b < a for a, b in zip(m, m[1:])):
                raise ConfigError("table marginals must be nondecreasing (convex cost)")
            pre = [0]
            for a in m:
                pre.append(pre[-1] + a)
            object.__setattr__(self, "_prefix", tuple(pre))
        else:
            raise ConfigError(f"unknown cost kind {self.kind!r}")

    @classmethod
    def poly(cls, *coeffs: int) -> "CostFunction":
        return cls("poly", coeffs=tuple(coeffs))

    @classmethod
    def power(cls, d: int, a: int = 1) -> "CostFunction":
        """C(s) = a * s**d."""
        return cls.poly(*([0] * d + [a]))

    @classmethod
    def table(cls, marginals: Sequence[int]) -> "CostFunction":
        return cls("table", marginals=tuple(marginals))

    @classmethod
    def from_json(cls, spec: Mapping) -> "CostFunction":
        kind = spec.get("kind")
        if kind == "poly":
            return cls.poly(*spec.get("coeffs", ()))
        if kind == "table":
            return cls.table(spec.get("marginals", ()))
        raise ConfigError(f"unknown cost kind {kind!r}")

    def to_json(self) -> dict:
        if self.kind == "poly":
            return {"kind": "poly", "coeffs": list(self.coeffs)}
        return {"kind": "table", "marginals": list(self.marginals)}

    @property
    def unbounded(self) -> bool:
        """True when marginals grow without bound (tables always do via the extension)."""
        return self.kind == "table" or len(self.coeffs) >= 3

    def _total_int(self, s: int) -> int:
        if s < 0:
            raise ConfigError("cost evaluated at negative size")
        if self.kind == "poly":
            return sum(a * s**p for p, a in enumerate(self.coeffs))
        tmax = len(self.marginals)
        if s <= tmax:
            return self._prefix[s]
        d = s - tmax
        return self._prefix[tmax] + d * self.marginals[-1] + d * (d + 1) // 2

    def marginal(self, s: int) -> int:
        """c(s) = C(s) - C(s-1) for integral s >= 1."""
        if s < 1:
            raise ConfigError("marginal cost needs s >= 1")
        if self.kind == "table":
            tmax = len(self.marginals)
            if s <= tmax:
                return self.marginals[s - 1]
            return self.marginals[-1] + (s - tmax)
        return self._total_int(s) - self._total_int(s - 1)

    def total(self, x: Number) -> Number:
        """C(x); non-integral x interpolates linearly between integer points."""
        if isinstance(x, int):
            return self._total_int(x)
        x = Fraction(x)
        if x.denominator == 1:
            return self._total_int(x.numerator)
        lo = math.floor(x)
        return self._total_int(lo) + (x - lo) * self.marginal(lo + 1)

    __call__ = total

    def inverse_marginal(self, rho: Number) -> int:
        """max{s : c(s) <= rho} (0 if c(1) > rho).

        Doubling to find an upper bracket, then binary search.  Raises
        :class:`ConfigError` when the marginals are bounded by ``rho``
        (linear cost), since the answer would be infinite.
        """
        if rho < 0:
            raise ConfigError("inverse marginal needs rho >= 0")
        if self.marginal(1) > rho:
            return 0
        if not self.unbounded and self.marginal(1) <= rho:
            # linear cost: constant marginal
            raise ConfigError(f"inverse marginal at {rho} is unbounded for a linear cost")
        hi = doubling_bound(self, rho)
        lo = hi // 2  # c(lo) <= rho < c(hi)
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if self.marginal(mid) <= rho:
                lo = mid
            else:
                hi = mid
        return lo


def doubling_bound(C: CostFunction, v: Number) -> int:
    """First power of two t with c(t) > v."""
    if not C.unbounded and C.marginal(1) <= v:
        raise ConfigError("doubling never terminates: cost marginals are bounded")
    t = 1
    while C.marginal(t) <= v:
        t *= 2
    return t


def marginal_cost(C: CostFunction, s: int) -> int:
    return C.marginal(s)


def inverse_marginal(C: CostFunction, rho: Number) -> int:
    return C.inverse_marginal(rho)


# --------------------------------------------------------- fractional sets


@dataclass(frozen=True)
class FractionalSet:
    fractions: Mapping[int, Fraction]

    def __post_init__(self):
        clean = {}
        for e, a in self.fractions.items():
            a = to_fraction(a)
            if not (0 < a <= 1):
                raise ConfigError(f"fraction for element {e} must lie in (0, 1], got {a}")
            clean[e] = a
        object.__setattr__(self, "fractions", clean)

    @classmethod
    def of(cls, ids: Iterable[int]) -> "FractionalSet":
        return cls({e: Fraction(1) for e in ids})

    @property
    def support(self) -> frozenset[int]:
        return frozenset(self.fractions)

    @property
    def integral(self) -> frozenset[int]:
        """Elements taken in full."""
        return frozenset(e for e, a in self.fractions.items() if a == 1)

    @property
    def is_integral(self) -> bool:
        return all(a == 1 for a in self.fractions.values())

    def __len__(self):
        return len(self.fractions)

    def to_json(self) -> dict:
        return {str(e): fmt_rational(a) for e, a in sorted(self.fractions.items())}


class Kind(enum.Enum):
    FRACTIONAL = "F"
    INTEGRAL = "I"


# ---------------------------------------------------------------- instance


@dataclass(frozen=True)
class Instance:
    elements: tuple[Element, ...]
    costs: tuple[CostFunction, ...]
    feasibility: Matroid | None = None
    _memo: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        object.__setattr__(self, "costs", tuple(self.costs))
        if not self.costs:
            raise ConfigError("instance needs at least one cost function")
        ids = [e.id for e in self.elements]
        if len(set(ids)) != len(ids):
            raise ConfigError("element ids must be unique")
        ell = len(self.costs)
        for e in self.elements:
            if len(e.sizes) != ell:
                raise ConfigError(f"element {e.id} has {len(e.sizes)} sizes, expected {ell}")
            if ell == 1 and e.sizes[0] < 1:
                raise ConfigError(f"element {e.id}: single-dimensional sizes must be >= 1")
        if self.feasibility is None:
            object.__setattr__(self, "feasibility", Matroid.free(ids))
        elif self.feasibility.ground != frozenset(ids):
            raise ConfigError("feasibility ground set must equal the element ids")
        if ell > 1:
            self._check_multi()
        object.__setattr__(self, "_by_id", {e.id: e for e in self.elements})

    def _check_multi(self):
        for j, C in enumerate(self.costs):
            if not C.unbounded:
                raise ConfigError(f"dimension {j}: marginal costs must be unbounded (use degree >= 2 or a table)")
        if not self.elements:
            return
        vmax = max(e.value for e in self.elements)
        for j, C in enumerate(self.costs):
            total = sum(e.sizes[j] for e in self.elements)
            if total == 0 or C.marginal(total) <= vmax:
                raise ConfigError(
                    f"dimension {j}: need c_j(s_j(U)) > max value ({vmax}); "
                    "scale costs up or add size"
                )

    # basic accessors ---------------------------------------------------

    @property
    def dims(self) -> int:
        return len(self.costs)

    @property
    def ids(self) -> tuple[int, ...]:
        return tuple(e.id for e in self.elements)

    @property
    def n(self) -> int:
        return len(self.elements)

    def __getitem__(self, eid: int) -> Element:
        try:
            return self._by_id[eid]  # type: ignore[attr-defined]
        except KeyError:
            raise ConfigError(f"unknown element id {eid}") from None

    def __contains__(self, eid) -> bool:
        return eid in self._by_id  # type: ignore[attr-defined]

    def with_feasibility(self, m: Matroid | None) -> "Instance":
        return Instance(self.elements, self.costs, m)

    def memo(self, key, make):
        """Per-instance cache for derived immutable data."""
        if key not in self._memo:
            self._memo[key] = make()
        return self._memo[key]

    # profit ------------------------------------------------------------

    def profit(self, A) -> Fraction | int:
        """pi(A) for a FractionalSet or an iterable of ids (taken in full)."""
        if isinstance(A, FractionalSet):
            items = A.fractions.items()
        else:
            items = ((e, 1) for e in A)
        val: Number = 0
        sizes: list[Number] = [0] * self.dims
        for eid, a in items:
            e = self[eid]
            val += a * e.value
            for j, s in enumerate(e.sizes):
                sizes[j] += a * s
        return val - sum(C.total(s) for C, s in zip(self.costs, sizes))

    def single_profit(self, eid: int):
        table = self.memo("single", lambda: {e.id: self.profit((e.id,)) for e in self.elements})
        return table[eid]

    def classify(self, eid: int) -> Kind:
        e = self[eid]
        if self.dims == 1:
            return Kind.FRACTIONAL if density(e) < self.costs[0].marginal(e.size) else Kind.INTEGRAL
        slope = sum(s * C.marginal(s) for C, s in zip(self.costs, e.sizes) if s > 0)
        return Kind.FRACTIONAL if e.value < slope else Kind.INTEGRAL

    @property
    def integral_ids(self) -> frozenset[int]:
        return self.memo("I", lambda: frozenset(e.id for e in self.elements if self.classify(e.id) is Kind.INTEGRAL))

    # JSON --------------------------------------------------------------

    @classmethod
    def from_json(cls, data: Mapping) -> "Instance":
        try:
            costs = tuple(CostFunction.from_json(c) for c in data["costs"])
            elements = tuple(
                Element(int(d["id"]), d["value"], tuple(d["sizes"])) for d in data["elements"]
            )
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"malformed instance: {exc}") from exc
        dims = data.get("dims", len(costs))
        if dims != len(costs):
            raise ConfigError(f"dims={dims} but {len(costs)} cost functions given")
        ids = [e.id for e in elements]
        feas = Matroid.from_json(data.get("feasibility", {"kind": "free"}), ids)
        return cls(elements, costs, feas)

    def to_json(self) -> dict:
        return {
            "dims": self.dims,
            "costs": [c.to_json() for c in self.costs],
            "elements": [{"id": e.id, "value": e.value, "sizes": list(e.sizes)} for e in self.elements],
            "feasibility": self.feasibility.to_json(),
        }

    @classmethod
    def load(cls, path) -> "Instance":
        try:
            with open(path) as fh:
                data = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read instance {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"instance {path} is not valid JSON: {exc}") from exc
        return cls.from_json(data)

    def dump(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=1)
            fh.write("\n")


def single_dim(elements: Iterable[tuple[int, int]], cost: CostFunction, start_id: int = 1,
               feasibility: Matroid | None = None) -> Instance:
    """Shorthand: build a one-dimensional instance from (value, size) pairs."""
    els = tuple(Element(start_id + i, v, (s,)) for i, (v, s) in enumerate(elements))
    return Instance(els, (cost,), feasibility)


# -------------------------------------------------------------- densities


def density(e: Element) -> Fraction:
    if len(e.sizes) != 1:
        raise ConfigError("density is only defined for single-dimensional elements")
    return Fraction(e.value, e.size)


def rank_key(rho: Fraction, eid: int) -> tuple:
    """Sort key, larger = higher rank; equal densities rank the smaller id higher."""
    return (rho, -eid)


def profit(instance: Instance, A) -> Fraction | int:
    return instance.profit(A)


def classify(instance: Instance, e: Element | int) -> Kind:
    return instance.classify(e.id if isinstance(e, Element) else e)


def density_prefix(T: Iterable[Element], gamma: Fraction) -> tuple[frozenset[int], frozenset[int]]:
    """(P, Pbar): elements with density >= gamma, and P without the element at exactly gamma.

    If several elements sit exactly at gamma, the lowest-ranked one (largest
    id) is the one removed, matching the id tie-break of the total order.
    """
    T = list(T)
    P = [e for e in T if density(e) >= gamma]
    at = [e.id for e in P if density(e) == gamma]
    Pbar = set(e.id for e in P)
    if at:
        Pbar.discard(max(at))
    return frozenset(e.id for e in P), frozenset(Pbar)


# ------------------------------------------------------------------ lines


@dataclass
class Line:
    """A one-dimensional view used by the single-dimension algorithms.

    ``order`` lists element ids from highest to lowest rank.  Values may be
    rational (projections of multi-dimensional instances use rho_i * s_i).
    """

    order: tuple[int, ...]
    value: dict[int, Number]
    size: dict[int, int]
    rho: dict[int, Fraction]
    integral: frozenset[int]
    cost: CostFunction
    pos: dict[int, int] = field(init=False)

    def __post_init__(self):
        self.pos = {e: i for i, e in enumerate(self.order)}

    @classmethod
    def of(cls, inst: Instance) -> "Line":
        if inst.dims != 1:
            raise ConfigError("this operation needs a single-dimensional instance")

        def make():
            rho = {e.id: density(e) for e in inst.elements}
            order = tuple(sorted(rho, key=lambda i: rank_key(rho[i], i), reverse=True))
            return cls(order, {e.id: e.value for e in inst.elements}, {e.id: e.size for e in inst.elements},
                       rho, inst.integral_ids, inst.costs[0])

        return inst.memo("line", make)

    def profit(self, ids: Iterable[int]) -> Number:
        v: Number = 0
        s = 0
        for e in ids:
            v += self.value[e]
            s += self.size[e]
        return v - self.cost.total(s)

    def single(self, e: int) -> Number:
        return self.value[e] - self.cost.total(self.size[e])

    def sort(self, ids: Iterable[int]) -> list[int]:
        """ids in decreasing rank."""
        return sorted(ids, key=self.pos.__getitem__)

    def at_least(self, e: int, pivot: int | None) -> bool:
        """e ranks at or above the pivot; pivot None is the +infinity threshold."""
        return pivot is not None and self.pos[e] <= self.pos[pivot]


def as_line(obj) -> Line:
    return obj if isinstance(obj, Line) else Line.of(obj)


class Tracker:
    """Incremental profit of a growing integral set (any dimension)."""

    def __init__(self, inst: Instance):
        self.inst = inst
        self.value = 0
        self.sizes = [0] * inst.dims
        self.ids: list[int] = []

    def gain(self, eid: int) -> int:
        e = self.inst[eid]
        g = e.value
        for C, s, d in zip(self.inst.costs, self.sizes, e.sizes):
            if d:
                g -= C.total(s + d) - C.total(s)
        return g

    def add(self, eid: int) -> None:
        e = self.inst[eid]
        self.value += e.value
        self.sizes = [s + d for s, d in zip(self.sizes, e.sizes)]
        self.ids.append(eid)

    @property
    def profit(self) -> int:
        return self.value - sum(C.total(s) for C, s in zip(self.inst.costs, self.sizes))


class LineTracker:
    """Incremental profit on a :class:`Line` (values may be rational)."""

    def __init__(self, line: Line):
        self.line = line
        self.value: Number = 0
        self.size = 0
        self.ids: list[int] = []

    def gain(self, e: int) -> Number:
        C = self.line.cost
        return self.line.value[e] - (C.total(self.size + self.line.size[e]) - C.total(self.size))

    def add(self, e: int) -> None:
        self.value += self.line.value[e]
        self.size += self.line.size[e]
        self.ids.append(e)

    @property
    def profit(self) -> Number:
        return self.value - self.line.cost.total(self.size)
