import random

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oraclelab.errors import ParameterError
from oraclelab.oracle import FreshOracle, Oracle, answers_on, create_oracle


def test_answers_are_deterministic_per_seed():
    a, b = Oracle(1, 8, 16), Oracle(1, 8, 16)
    assert [a.answer(p) for p in range(20)] == [b.answer(p) for p in range(20)]
    # frozen from the SplitMix64 derivation
    assert [a.answer(p) for p in range(4)] == [54016, 57888, 17859, 35620]


def test_distinct_seeds_differ():
    a, b = Oracle(1, 12, 32), Oracle(2, 12, 32)
    assert sum(a.answer(p) == b.answer(p) for p in range(100)) == 0


def test_ledger_counts_distinct_points():
    o = create_oracle(3, 8, 8)
    for p in (1, 2, 1, 1, 5):
        o.query("A", p)
    assert o.ledger("A").count == 3
    assert o.ledger("A").points == [1, 2, 5]
    assert o.ledger("B").count == 0


def test_fix_answers_overrides_and_keeps_rest():
    o = Oracle(4, 8, 8)
    f = o.fix_answers({3: 7})
    assert f.answer(3) == 7
    assert f.answer(4) == o.answer(4)
    assert 3 not in o.programmed


def test_fork_independent():
    o = Oracle(4, 8, 8)
    f = o.fork_independent(5)
    assert f.answer(1) == Oracle(5, 8, 8).answer(1)


def test_table_matches_answers():
    o = Oracle(11, 6, 10).fix_answers({2: 1})
    t = o.table()
    assert t.dtype == np.uint64
    assert [int(x) for x in t] == [o.answer(p) for p in range(64)]


@pytest.mark.parametrize("point", [-1, 256])
def test_out_of_domain_point_rejected(point):
    with pytest.raises(ParameterError):
        Oracle(0, 8, 8).query("A", point)


def test_bad_widths_and_answers_rejected():
    with pytest.raises(ParameterError):
        Oracle(0, 0, 8)
    with pytest.raises(ParameterError):
        Oracle(0, 8, 65)
    with pytest.raises(ParameterError):
        Oracle(0, 8, 4).fix_answers({1: 16})


@given(st.dictionaries(st.integers(0, 255), st.integers(0, 255), max_size=10))
def test_fresh_oracle_respects_known(known):
    f = FreshOracle(known, random.Random(0), 8)
    for p, v in known.items():
        assert f.answer(p) == v
    x = f.answer(300)
    assert f.answer(300) == x


def test_answers_on():
    o = Oracle(5, 8, 8)
    assert answers_on(o, [1, 2]) == {1: o.answer(1), 2: o.answer(2)}
