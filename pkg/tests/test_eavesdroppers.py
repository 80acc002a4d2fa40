import math
import random

import pytest

from oraclelab import eavesdroppers as ev
from oraclelab import protocols
from oraclelab.core import run_trial
from oraclelab.errors import InsufficientSamples, ParameterError, SpecError


def test_default_delta():
    assert ev.default_delta(16, 256) == 0.25
    assert ev.default_delta(8, 32) == 1.0
    with pytest.raises(ParameterError):
        ev.default_delta(16, 63)


def test_eve_config_validation():
    with pytest.raises(ParameterError):
        ev.EveConfig(0.0, 10, 5)
    with pytest.raises(ParameterError):
        ev.EveConfig(0.5, 10, 5, min_accepted=11)
    assert ev.EveConfig(2.0, 10, 5).delta == 2.0


def _posterior_freqs(spec, m1, draws, seed):
    s = ev.ConditionalSampler(spec, [m1], {})
    rng = random.Random(seed)
    out = []
    for _ in range(draws):
        run = s.draw(rng)
        if run is not None:
            out.append(ev._run_points(run))
    return ev._frequencies(out, spec.domain_bits), len(out)


@pytest.mark.parametrize("spec", [
    protocols.merkle_puzzles(2, 4, range_bits=2),
    protocols.merkle_puzzles(2, 4, sampling_mode=protocols.IID, range_bits=2),
    protocols.hash_chain_adaptive(2),
    protocols.hash_chain_adaptive(4),
], ids=["merkle_subset", "merkle_iid", "chain2", "chain4"])
def test_proposal_matches_plain_rejection(spec):
    rec, _ = run_trial(spec, 1, 0)
    m1 = rec.transcript[0]
    hooked, na = _posterior_freqs(spec, m1, 20_000, 1)
    plain, nb = _posterior_freqs(spec.derive(posterior_proposal=None), m1, 20_000, 2)
    assert na > 0 and nb > 500
    tol = 2 / math.sqrt(nb) + 2 / math.sqrt(na)
    for p in set(hooked) | set(plain):
        assert abs(hooked.get(p, 0.0) - plain.get(p, 0.0)) <= tol


def test_sampler_respects_prefix_and_known():
    spec = protocols.merkle_puzzles(8, 64)
    rec, oracle = run_trial(spec, 3, 0)
    known = {p: oracle.answer(p) for p in range(10)}
    s = ev.ConditionalSampler(spec, rec.transcript, known)
    run, draws = s.first_accepted(random.Random(0), 2000)
    assert run is not None
    assert run.transcript == rec.transcript
    for p, v in run.views["A"].oracle_points.items():
        if p in known:
            assert v == known[p]


def test_prior_census_merkle_uniform():
    spec = protocols.merkle_puzzles(16, 256)
    freq = ev.prior_census(spec, 4000, 0)
    # each point lands in X or Y with prob 1 - (1 - 1/16)^2
    assert max(freq.values()) < 0.16
    assert all(isinstance(v, float) for v in freq.values())


def test_trivial_protocol_eve_queries_the_point():
    spec = protocols.trivial_point()
    cfg = ev.EveConfig(0.5, 20, 4)
    rep = ev.evaluate_attacker(spec, ev.HeavyQueryEve(spec, cfg, 0), 30, 0)
    assert rep.success == 1.0
    assert rep.max_queries == 1


def test_matrix_eve_recovers_key():
    spec = protocols.matrix_rowcol(8)
    cfg = ev.EveConfig(0.25, 3000, 128, min_accepted=10)
    rep = ev.evaluate_attacker(spec, ev.HeavyQueryEve(spec, cfg, 0), 30, 1)
    assert abs(rep.success - rep.agreement) <= 0.05
    assert rep.truncations == 0 and rep.insufficient == 0


def test_query_cap_truncation_is_flagged():
    spec = protocols.matrix_rowcol(8)
    cfg = ev.EveConfig(0.25, 2000, 1, min_accepted=10)
    rep = ev.evaluate_attacker(spec, ev.HeavyQueryEve(spec, cfg, 0), 10, 1)
    assert rep.truncations == 10
    assert rep.success == 0.0
    assert rep.max_queries <= 1


def test_insufficient_samples_reported():
    spec = protocols.matrix_rowcol(8)
    cfg = ev.EveConfig(0.25, 5, 128, min_accepted=5)
    with pytest.raises(InsufficientSamples):
        rec, oracle = run_trial(spec, 0, 0)
        ev.HeavyQueryEve(spec, cfg, 0).attack(rec.transcript, oracle, 0, rec.out_A)
    rep = ev.evaluate_attacker(spec, ev.HeavyQueryEve(spec, cfg, 0), 5, 0)
    assert rep.insufficient == 5


def test_eve_is_order_independent():
    spec = protocols.matrix_rowcol(8)
    cfg = ev.EveConfig(0.25, 1000, 128, min_accepted=5)
    a = ev.attack_trials(spec, ev.HeavyQueryEve(spec, cfg, 0), 12, 4)
    b = ev.attack_trials(spec, ev.HeavyQueryEve(spec, cfg, 0), 12, 4, workers=3)
    assert [o.guess for _, o in a] == [o.guess for _, o in b]


def test_brute_force_budget_zero_and_full():
    spec = protocols.merkle_puzzles(8, 64)
    zero = ev.evaluate_attacker(spec, ev.brute_force_attacker(0, 500), 40, 2)
    full = ev.evaluate_attacker(spec, ev.brute_force_attacker(64, 500), 40, 2)
    assert zero.max_queries == 0
    assert full.max_queries == 64
    assert full.success >= zero.success
    assert abs(full.success - full.agreement) <= 0.15


def test_simulate_receiver_on_chain():
    spec = protocols.hash_chain_adaptive(8)
    rep = ev.evaluate_attacker(spec, ev.simulate_receiver_attacker(), 300, 0)
    assert rep.max_queries <= spec.budget["B"]
    assert abs(rep.success - rep.agreement) <= 0.1


def test_consistent_view_on_trivial():
    spec = protocols.trivial_point()
    rec, _ = run_trial(spec, 0, 0)
    out = ev.consistent_view_attack(spec, rec.transcript, 0, 100, rec.out_A)
    assert out.queries_spent == 0
    assert out.guess in (0, 1)


def test_eve_rejects_long_protocols():
    spec = protocols.matrix_rowcol(4)
    longer = spec.derive(message_widths=spec.message_widths + (1,),
                         message_fns=spec.message_fns + (spec.message_fns[0],))
    with pytest.raises(SpecError):
        ev.HeavyQueryEve(longer, ev.EveConfig(0.5, 10, 4), 0)
