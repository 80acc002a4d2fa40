import pytest

from oraclelab import protocols
from oraclelab.core import Adaptive, agreement, communication_cost, run_trial
from oraclelab.eavesdroppers import prior_census
from oraclelab.errors import SpecError, UnsupportedPolicy
from oraclelab.transforms import eliminate_apriori_heavy, key_as_last_query


def _adaptive(spec):
    plans = spec.query_policy.plans

    def step(party):
        def run(view):
            for p in plans[party](view.rng, view.params):
                view.ask(p)
        return run

    return spec.derive(name=spec.name + "_adaptive",
                       query_policy=Adaptive({"A": step("A"), "B": step("B")}))


@pytest.mark.parametrize("make", [lambda: protocols.matrix_rowcol(8),
                                  lambda: _adaptive(protocols.matrix_rowcol(8))],
                         ids=["nonadaptive", "adaptive"])
def test_key_as_last_query_preserves_agreement(make):
    spec = make()
    ext = key_as_last_query(spec)
    assert ext.budget["B"] == spec.budget["B"] + 1
    assert ext.message_widths[1] == spec.message_widths[1] + 1
    for t in range(300):
        a, _ = run_trial(spec, 7, t)
        b, _ = run_trial(ext, 7, t)
        assert agreement(a) == agreement(b)
        assert b.transcript[0] == a.transcript[0]
        assert b.transcript[1].bits >> 1 == a.transcript[1].bits
        assert communication_cost(b) == communication_cost(a) + 1
        assert len(b.Y) <= len(a.Y) + 1


def test_key_as_last_query_key_is_msb_of_extra_point():
    spec = key_as_last_query(protocols.matrix_rowcol(8))
    rec, _ = run_trial(spec, 0, 0, keep_views=True)
    view = rec.views["B"]
    extra = view.queries[-1]
    assert rec.out_B == protocols.msb(extra, spec.domain_bits)


def test_key_as_last_query_rejects():
    with pytest.raises(SpecError):
        key_as_last_query(protocols.merkle_puzzles(8, 64))
    with pytest.raises(SpecError):
        key_as_last_query(protocols.hash_chain_adaptive(4))


def test_eliminate_fixes_mask_point():
    # at ell=16 every matrix cell has prior weight about 2/16, well below delta
    spec = protocols.xor_masked_rowcol(16)
    fixed, table = eliminate_apriori_heavy(spec, 0.25, 2000, 0)
    assert list(table) == [1]
    assert fixed.fixed_answers == table
    assert fixed.budget == spec.budget
    prov = fixed.provenance[-1]
    assert prov["transform"] == "eliminate_apriori_heavy" and prov["points"] == [1]
    assert len(prov["R_digest"]) == 16
    census = prior_census(fixed, 2000, 1)
    assert max(census.values()) < 0.25
    rec, _ = run_trial(fixed, 0, 0)
    assert 1 not in rec.X and 1 not in rec.Y
    assert fixed.posterior_proposal is None


def test_eliminate_is_seeded():
    spec = protocols.xor_masked_rowcol(8)
    _, t1 = eliminate_apriori_heavy(spec, 0.25, 500, 3)
    _, t2 = eliminate_apriori_heavy(spec, 0.25, 500, 3)
    assert t1 == t2


def test_eliminate_needs_nonadaptive():
    with pytest.raises(UnsupportedPolicy):
        eliminate_apriori_heavy(protocols.hash_chain_adaptive(4), 0.25, 10, 0)


def test_transforms_compose():
    fixed, _ = eliminate_apriori_heavy(protocols.xor_masked_rowcol(16), 0.25, 1000, 0)
    normal = key_as_last_query(fixed)
    assert [p["transform"] for p in normal.provenance] == ["eliminate_apriori_heavy",
                                                          "key_as_last_query"]
    hits = sum(agreement(run_trial(normal, 1, t)[0]) for t in range(200))
    assert hits >= 190
