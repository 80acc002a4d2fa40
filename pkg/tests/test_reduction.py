import json
import math
import random

import pytest

from oraclelab import protocols
from oraclelab import reduction as rd
from oraclelab.core import agreement
from oraclelab.errors import NoGapError, ParameterError, SpecError


def test_required_repetitions_frozen():
    assert rd.required_repetitions(0.1, 0.25) == 19
    assert rd.required_repetitions(math.exp(-2), math.sqrt(0.5)) == 2
    with pytest.raises(ParameterError):
        rd.required_repetitions(0.1, 0.0)


def test_pad_inputs_examples():
    xp, yp = rd.pad_inputs([1, 2], [3, 4], 8, 1)
    assert xp == [1, 2] + list(range(16, 22))
    assert yp == [3, 4] + list(range(24, 30))
    xp, yp = rd.pad_inputs([1, 2], [2, 4], 8, 2)
    assert len(xp) == len(yp) == 8
    assert set(xp) & set(yp) == {2, 9}
    with pytest.raises(ParameterError):
        rd.pad_inputs([1], [2, 3], 8, 1)


def test_hard_instance_distribution():
    insts = [rd.sample_hard_instance(16, s) for s in range(2000)]
    frac = sum(i.disjoint for i in insts) / len(insts)
    assert abs(frac - 0.75) < 0.04
    for i in insts[:50]:
        assert len(i.X) == len(i.Y) == 4
        assert len(set(i.X) & set(i.Y)) == (0 if i.disjoint else 1)


def test_sets_with_intersection_sizes():
    rng = random.Random(0)
    for size in range(5):
        X, Y = rd.sample_sets_with_intersection(64, 8, size, rng)
        assert len(set(X)) == len(set(Y)) == 8
        assert len(set(X) & set(Y)) == size


def test_emulations_on_disjoint_inputs_never_agree():
    ka = protocols.merkle_puzzles(16, 256)
    for mode in (rd.COM, rd.DIST):
        acc, _ = rd.emulation_agreement(rd.Emulation(ka, mode), 256, 0, 200, 0)
        assert acc == 0.0


def test_dist_emulation_loses_agreement_com_keeps_it():
    ka = protocols.merkle_puzzles(16, 256)
    com, _ = rd.emulation_agreement(rd.Emulation(ka, rd.COM), 256, 2, 300, 0)
    dist, _ = rd.emulation_agreement(rd.Emulation(ka, rd.DIST), 256, 2, 300, 0)
    assert com > 0.9 and dist < 0.05


def test_emulation_needs_nonadaptive():
    em = rd.Emulation(protocols.hash_chain_adaptive(4), rd.COM)
    with pytest.raises(SpecError):
        em.run([0], [1], 0)


def test_secrecy_gap_wrapper_negates():
    ka = protocols.matrix_rowcol(4)
    com, dist = rd.build_secrecy_gap_wrapper(ka, lambda tr, seed: 1)
    assert com.mode == rd.COM and dist.mode == rd.DIST and com.negations == 1
    again = rd.build_secrecy_gap_wrapper((com, dist), lambda tr, seed: 1)
    assert again[0].negations == 2
    with pytest.raises(SpecError):
        rd.build_secrecy_gap_wrapper(protocols.merkle_puzzles(8, 64), lambda tr, seed: 0)


def test_calibration_needs_a_gap():
    ka = protocols.merkle_puzzles(8, 64)
    with pytest.raises(NoGapError):
        rd.calibrate_acc_profile(ka, 8, 50, [0], 0)
    with pytest.raises(ParameterError):
        rd.calibrate_acc_profile(ka, 9, 50, [0, 1], 0)


def test_profile_roundtrip_and_small_end_to_end():
    ka = protocols.merkle_puzzles(32, 128)
    prof = rd.calibrate_acc_profile(ka, 32, 400, [0, 1, 2], 0)
    assert prof.suc[0] == 0.0 and prof.suc[1] > 0.5
    back = rd.AccProfile.from_json(json.loads(prof.dumps()))
    assert back == prof
    cfg = rd.SetSolverConfig.from_profile(prof, 0.1)
    errors = 0
    for s in range(20):
        inst = rd.sample_hard_instance(32, s)
        tr = rd.solve_disjointness_trace(inst, ka, prof, cfg, s)
        errors += tr.disjoint != inst.disjoint
        assert tr.k == cfg.k and len(tr.indicators) == cfg.k
        assert tr.communication <= cfg.k * (sum(ka.message_widths) + 1) + 1
    assert errors <= 3


def test_solver_universe_too_small():
    ka = protocols.merkle_puzzles(8, 16)
    prof = rd.AccProfile({0: (0.0, 0.1), 1: (0.9, 0.1)}, {0: (0.0, 0.1), 1: (0.0, 0.1)},
                         {0: 0.0, 1: 0.9}, 1, 1, 0.9, "tilde", 0.45, 0.3, True, 100, 0)
    cfg = rd.SetSolverConfig.from_profile(prof, 0.1)
    with pytest.raises(ParameterError):
        rd.solve_disjointness(rd.sample_hard_instance(8, 0), ka, prof, cfg, 0)
