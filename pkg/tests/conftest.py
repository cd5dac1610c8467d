from itertools import accumulate

import pytest
from hypothesis import strategies as st

from convex_secretary.core import CostFunction, Element, Instance, single_dim
from convex_secretary.matroid import Matroid

SQ = CostFunction.power(2)


def instance_a(feasibility=None):
    # e1 (10,1), e2 (9,2), e3 (4,1), e4 (6,4) under C = s^2
    return single_dim([(10, 1), (9, 2), (4, 1), (6, 4)], SQ, feasibility=feasibility)


@pytest.fixture
def inst_a():
    return instance_a()


def multi(rows, costs=None, feasibility=None):
    """Multi-dimensional instance from (value, sizes) rows, ids from 1."""
    dims = len(rows[0][1])
    costs = costs or [SQ] * dims
    els = tuple(Element(i + 1, v, tuple(s)) for i, (v, s) in enumerate(rows))
    return Instance(els, tuple(costs), feasibility)


costs = st.one_of(
    st.builds(CostFunction.power, st.integers(2, 3), st.integers(1, 2)),
    st.lists(st.integers(1, 4), min_size=1, max_size=5).map(
        lambda inc: CostFunction.table(list(accumulate(inc)))
    ),
)


@st.composite
def single_instances(draw, min_n=0, max_n=8, vmax=40, smax=4, cost=costs):
    n = draw(st.integers(min_n, max_n))
    C = draw(cost)
    pairs = [(draw(st.integers(0, vmax)), draw(st.integers(1, smax))) for _ in range(n)]
    return single_dim(pairs, C)


@st.composite
def matroids_for(draw, ids):
    ids = list(ids)
    kind = draw(st.sampled_from(["free", "uniform", "partition"]))
    if kind == "free" or not ids:
        return Matroid.free(ids)
    if kind == "uniform":
        return Matroid.uniform(ids, draw(st.integers(1, 4)))
    nb = draw(st.integers(1, 3))
    assign = [draw(st.integers(0, nb - 1)) for _ in ids]
    parts = [[e for e, b in zip(ids, assign) if b == j] for j in range(nb)]
    parts = [p for p in parts if p]
    return Matroid.partition(parts, [draw(st.integers(1, 2)) for _ in parts])


@st.composite
def multi_instances(draw, max_n=6, dims=(2, 3), vmax=30, smax=3):
    ell = draw(st.integers(*dims))
    n = draw(st.integers(1, max_n))
    rows = []
    for _ in range(n):
        sizes = [draw(st.integers(0, smax)) for _ in range(ell)]
        if not any(sizes):
            sizes[0] = 1
        rows.append([draw(st.integers(0, vmax)), sizes])
    C = [draw(costs) for _ in range(ell)] if draw(st.booleans()) else [SQ] * ell
    # a zero-value padding element keeps c_j(s_j(U)) above every value
    cap = max(v for v, _ in rows)
    rows.append([0, [cap + 6] * ell])
    return multi(rows, C)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.RESULTS:
            terminalreporter.write_line(line)
