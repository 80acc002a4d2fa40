import json
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from oraclelab import protocols
from oraclelab.core import (Message, NonAdaptive, ProtocolRun, ExecutionRecord, agreement,
                            communication_cost, concat, estimate_agreement, execute,
                            hoeffding_halfwidth, intersection_indices, party_seeds, replay,
                            run_trial, split)
from oraclelab.errors import BudgetExceeded, ParameterError, SpecError
from oraclelab.oracle import Oracle


@given(st.lists(st.integers(1, 20), min_size=1, max_size=6), st.data())
def test_concat_split_roundtrip(widths, data):
    vals = [data.draw(st.integers(0, (1 << w) - 1)) for w in widths]
    m = concat(*[Message(v, w) for v, w in zip(vals, widths)])
    assert m.length == sum(widths)
    assert split(m, widths) == vals


def test_message_width_checked():
    with pytest.raises(SpecError):
        Message(4, 2)
    assert Message.from_json(Message(255, 9).to_json()) == Message(255, 9)


def test_hoeffding_halfwidth_values():
    assert hoeffding_halfwidth(2000) == pytest.approx(math.sqrt(math.log(40) / 4000))
    assert hoeffding_halfwidth(10_000) == pytest.approx(0.013581, abs=1e-6)
    with pytest.raises(ParameterError):
        hoeffding_halfwidth(0)


def test_execute_replay_and_json_roundtrip():
    spec = protocols.merkle_puzzles(16, 256)
    rec, _ = run_trial(spec, 5, 3)
    again = replay(spec, rec)
    assert again.dumps() == rec.dumps()
    back = ExecutionRecord.from_json(json.loads(rec.dumps()))
    assert back.dumps() == rec.dumps()
    assert communication_cost(rec) == 16 * 16 + 4


def test_budget_is_enforced():
    spec = protocols.matrix_rowcol(4)
    small = spec.derive(budget={"A": 2, "B": 4})
    with pytest.raises(BudgetExceeded):
        execute(small, Oracle(0, spec.domain_bits, spec.range_bits), 1)


def test_fixed_answers_not_charged():
    spec = protocols.matrix_rowcol(4)
    rec = execute(spec, Oracle(0, spec.domain_bits, spec.range_bits), 1)
    pinned = spec.derive(fixed_answers={p: 0 for p in rec.X}, budget={"A": 0, "B": 4})
    rec2 = execute(pinned, Oracle(0, spec.domain_bits, spec.range_bits), 1)
    assert rec2.X == []
    assert rec2.calls["A"] == 4


def test_oracle_width_mismatch_rejected():
    spec = protocols.matrix_rowcol(4)
    with pytest.raises(ParameterError):
        execute(spec, Oracle(0, spec.domain_bits + 1, spec.range_bits), 0)


def test_forced_queries_and_stepwise_run():
    spec = protocols.merkle_puzzles(4, 16)
    oracle = Oracle(9, spec.domain_bits, spec.range_bits)
    forced = {"A": [0, 1, 2, 3], "B": [3, 4, 5, 6]}
    run = ProtocolRun(spec, oracle, party_seeds(0), forced)
    m1 = run.send()
    assert m1.length == spec.message_widths[0]
    run.send()
    a, b = run.output("A"), run.output("B")
    assert a == b == 3
    with pytest.raises(SpecError):
        run.send()


def test_agreement_abort_never_agrees():
    rec = ExecutionRecord("x", [], [], [], [], [], None, None, {})
    assert not agreement(rec)


def test_intersection_indices():
    rec = ExecutionRecord("x", [1, 2, 3], [5, 2, 2, 3], [], [], [], 0, 0, {})
    assert intersection_indices(rec) == {1, 2}
    assert intersection_indices(rec, excluded=[2]) == {2}


def test_estimate_agreement_workers_match():
    spec = protocols.merkle_puzzles(8, 64)
    assert estimate_agreement(spec, 60, 1) == estimate_agreement(spec, 60, 1, workers=2)


def test_nonadaptive_plan_sees_only_rng():
    spec = protocols.merkle_puzzles(8, 64)
    assert isinstance(spec.query_policy, NonAdaptive)
    r1, _ = run_trial(spec, 0, 0)
    r2 = execute(spec, Oracle(123, spec.domain_bits, spec.range_bits), r1.seeds["rng"])
    assert r1.X == r2.X and r1.Y == r2.Y
