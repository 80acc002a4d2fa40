"""Eavesdroppers: the heavy-query attacker, consistent-view and brute-force
baselines, and a Monte-Carlo success harness.

All conditional sampling goes through :class:`ConditionalSampler`, which
draws runs of a spec on a freshly sampled oracle that agrees with a set of
known answers, and keeps those whose transcript matches an observed prefix.
"""

from __future__ import annotations

import hashlib
import random
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Dict, FrozenSet, List, Mapping, NamedTuple, Optional, Sequence

import numpy as np

from . import kernels
from .core import (Adaptive, Message, NonAdaptive, ProtocolRun, ProtocolSpec, agreement,
                   hoeffding_halfwidth, run_trial)
from .errors import InsufficientSamples, ParameterError, SpecError, UnsupportedPolicy
from .oracle import FreshOracle, Oracle
from .parallel import parallel_map
from .seeding import derive_seed

EVE = "Eve"
_ARRAY_CENSUS_MAX_BITS = 20


@dataclass(frozen=True)
class EveConfig:
    """Parameters of the heavy-query eavesdropper.

    ``delta`` above 1 is accepted and makes every heavy set empty.
    """

    delta: float
    mc_samples: int
    query_cap: int
    min_accepted: int = 1

    def __post_init__(self):
        if not self.delta > 0:
            raise ParameterError("delta must be positive")
        if not self.mc_samples >= self.min_accepted >= 1:
            raise ParameterError("need mc_samples >= min_accepted >= 1")
        if self.query_cap < 0:
            raise ParameterError("query_cap must be nonnegative")


@dataclass(frozen=True)
class HeavySets:
    E0: FrozenSet[int]
    E1: FrozenSet[int]
    truncated: bool = False
    accepted: int = 0
    draws: int = 0


@dataclass
class AttackOutcome:
    guess: Optional[int]
    queries_spent: int
    success: bool
    truncated: bool = False
    insufficient: bool = False
    accepted: int = 0
    draws: int = 0


class AttackReport(NamedTuple):
    success: float
    ci_halfwidth: float
    mean_queries: float
    trials: int
    agreement: float
    truncations: int
    insufficient: int
    max_queries: int


def default_delta(ell: int, q: int) -> float:
    """Heaviness threshold ``4 ell / q``."""
    if ell < 1 or q < 4 * ell:
        raise ParameterError("need ell >= 1 and q >= 4 ell")
    return 4 * ell / q


# -- sampling machinery ------------------------------------------------------

def _fresh_seeds(rng) -> Dict[str, int]:
    return {"A": rng.getrandbits(64), "B": rng.getrandbits(64)}


class ConditionalSampler:
    """Draw runs of ``spec`` consistent with ``prefix`` and ``known`` answers.

    Unknown oracle points are resampled uniformly.  A's side is drawn from the
    spec's ``posterior_proposal`` when it has one, otherwise by running A and
    rejecting on a mismatched first message.  Later messages are checked
    bit-exactly as they are produced.

    With ``a_only`` set, B is never run: messages B sent are copied from the
    prefix, so only A's view is sampled (for specs whose oracles are private).
    """

    def __init__(self, spec: ProtocolSpec, prefix: Sequence[Message],
                 known: Mapping[int, int], a_only: bool = False):
        if len(prefix) > spec.rounds:
            raise SpecError("prefix is longer than the protocol")
        self.spec = spec
        self.prefix = list(prefix)
        self.known = dict(known)
        self.a_only = a_only
        if prefix and spec.posterior_proposal is not None:
            self._first = spec.posterior_proposal(spec, self.prefix, self.known)
        else:
            self._first = self._plain_first

    def _plain_first(self, rng):
        oracle = FreshOracle(self.known, rng, self.spec.range_bits)
        run = ProtocolRun(self.spec, oracle, _fresh_seeds(rng))
        if self.prefix and run.send() != self.prefix[0]:
            return None
        return run

    def draw(self, rng) -> Optional[ProtocolRun]:
        run = self._first(rng)
        if run is None:
            return None
        for k in range(1, len(self.prefix)):
            if self.a_only and self.spec.sender(k) == "B":
                run.inject(self.prefix[k])
            elif run.send() != self.prefix[k]:
                return None
        return run

    def first_accepted(self, rng, max_draws: int):
        """First accepted run within ``max_draws`` draws, and draws used."""
        for t in range(1, max_draws + 1):
            run = self.draw(rng)
            if run is not None:
                return run, t
        return None, max_draws


def _run_points(run: ProtocolRun) -> List[int]:
    run.prepare("A")
    run.prepare("B")
    return list(run.views["A"].oracle_points.keys() | run.views["B"].oracle_points.keys())


def _frequencies(samples: List[List[int]], domain_bits: int) -> Dict[int, float]:
    n = len(samples)
    if n == 0:
        return {}
    if domain_bits <= _ARRAY_CENSUS_MAX_BITS:
        counts = kernels.inclusion_counts(samples, 1 << domain_bits)
        idx = np.flatnonzero(counts)
        return {int(p): float(counts[p]) / n for p in idx}
    counts = Counter(p for s in samples for p in set(s))
    return {p: c / n for p, c in sorted(counts.items())}


def prior_census(spec: ProtocolSpec, samples: int, rng_seed: int) -> Dict[int, float]:
    """Estimated ``Pr[p in X u Y]`` for every point seen in ``samples`` draws.

    Only oracle calls count; points answered by ``spec.fixed_answers`` do not.
    Non-adaptive specs sample their plans directly; simulable adaptive specs
    are run on freshly sampled oracles.
    """
    rng = random.Random(rng_seed)
    fixed = spec.fixed_answers
    out = []
    policy = spec.query_policy
    if isinstance(policy, NonAdaptive):
        for _ in range(samples):
            pts = policy.plans["A"](rng, spec.params) + policy.plans["B"](rng, spec.params)
            out.append([p for p in pts if p not in fixed] if fixed else pts)
    elif isinstance(policy, Adaptive) and policy.simulable:
        for _ in range(samples):
            run = ProtocolRun(spec, FreshOracle({}, rng, spec.range_bits), _fresh_seeds(rng))
            run.run_all()
            out.append(_run_points(run))
    else:
        raise UnsupportedPolicy(f"{spec.name}: query behaviour cannot be sampled")
    return _frequencies(out, spec.domain_bits)


def conditional_census(spec: ProtocolSpec, m1: Message, known: Mapping[int, int],
                       samples: int, rng_seed: int):
    """Estimated ``Pr[p in X u Y | M1 = m1, F = known on its keys]``.

    Returns ``(frequencies, accepted)`` where frequencies are over the
    accepted draws among ``samples`` draws.
    """
    rng = random.Random(rng_seed)
    sampler = ConditionalSampler(spec, [m1], known)
    out = []
    for _ in range(samples):
        run = sampler.draw(rng)
        if run is not None:
            out.append(_run_points(run))
    return _frequencies(out, spec.domain_bits), len(out)


# -- heavy sets --------------------------------------------------------------

def compute_heavy_set_0(spec: ProtocolSpec, cfg: EveConfig, rng_seed: int) -> FrozenSet[int]:
    """Points whose prior probability of being queried is at least ``delta``."""
    freq = prior_census(spec, cfg.mc_samples, rng_seed)
    return frozenset(p for p, f in freq.items() if f >= cfg.delta)


def _cap(e0, freq, heavy, cap):
    """Keep E0, then the most frequent extra points, within ``cap``."""
    extra = sorted((p for p in heavy if p not in e0), key=lambda p: (-freq[p], p))
    keep = list(e0) + extra
    return frozenset(keep[:cap]), len(keep) > cap


def compute_heavy_set_1(spec: ProtocolSpec, cfg: EveConfig, m1: Message,
                        known_answers: Mapping[int, int], rng_seed: int) -> HeavySets:
    """E1: E0 plus points heavy given the first message and F on E0.

    ``known_answers`` must hold the answers on E0 exactly.
    """
    e0 = frozenset(known_answers)
    freq, accepted = conditional_census(spec, m1, known_answers, cfg.mc_samples, rng_seed)
    if accepted < cfg.min_accepted:
        raise InsufficientSamples(accepted, cfg.min_accepted, cfg.mc_samples)
    heavy = e0 | {p for p, f in freq.items() if f >= cfg.delta}
    e1, truncated = _cap(sorted(e0), freq, heavy, cfg.query_cap)
    return HeavySets(e0, e1, truncated, accepted, cfg.mc_samples)


def _digest(assignment: Mapping[int, int]) -> str:
    h = hashlib.blake2b(digest_size=8)
    for p, v in sorted(assignment.items()):
        h.update(f"{p}:{v};".encode())
    return h.hexdigest()


class HeavyQueryEve:
    """The heavy-query eavesdropper with cached heavy-set estimates.

    E0 depends only on the protocol and is computed once.  E1 depends on the first
    message and the answers on E0, so it is memoized under that key and
    estimated from a seed derived from the key.  Results therefore do not
    depend on which trials ran before, or in which process.
    """

    def __init__(self, spec: ProtocolSpec, cfg: EveConfig, rng_seed: int):
        if spec.rounds > 2:
            raise SpecError("the heavy-query eavesdropper handles at most two messages")
        self.spec = spec
        self.cfg = cfg
        self.rng_seed = rng_seed
        self._e0: Optional[FrozenSet[int]] = None
        self._e1: Dict[tuple, HeavySets] = {}

    @property
    def e0(self) -> FrozenSet[int]:
        if self._e0 is None:
            self._e0 = compute_heavy_set_0(self.spec, self.cfg, derive_seed(self.rng_seed, "E0"))
        return self._e0

    def heavy_sets(self, m1: Optional[Message], known0: Mapping[int, int]) -> HeavySets:
        if m1 is None:
            return HeavySets(frozenset(known0), frozenset(known0))
        digest = _digest(known0)
        key = (m1.bits, m1.length, digest)
        hs = self._e1.get(key)
        if hs is None:
            seed = derive_seed(self.rng_seed, "E1", m1.bits, m1.length, digest)
            hs = self._e1[key] = compute_heavy_set_1(self.spec, self.cfg, m1, known0, seed)
        return hs

    def attack(self, transcript: Sequence[Message], oracle: Oracle, rng_seed: int,
               target=None) -> AttackOutcome:
        cfg = self.cfg
        before = oracle.ledger(EVE).count
        spent = lambda: oracle.ledger(EVE).count - before  # noqa: E731
        e0 = sorted(self.e0)
        if len(e0) > cfg.query_cap:
            return AttackOutcome(None, 0, False, truncated=True)
        known = {p: oracle.query(EVE, p) for p in e0}
        m1 = transcript[0] if transcript else None
        hs = self.heavy_sets(m1, known)
        if hs.truncated:
            return AttackOutcome(None, spent(), False, truncated=True, accepted=hs.accepted)
        for p in sorted(hs.E1 - hs.E0):
            known[p] = oracle.query(EVE, p)
        sampler = ConditionalSampler(self.spec, transcript, known)
        run, draws = sampler.first_accepted(random.Random(rng_seed), cfg.mc_samples)
        if run is None:
            raise InsufficientSamples(0, 1, draws)
        guess = run.output("B")
        success = guess is not None and guess == target
        return AttackOutcome(guess, spent(), success, accepted=hs.accepted, draws=draws)

    def __call__(self, spec, record, oracle, rng_seed):
        return self.attack(record.transcript, oracle, rng_seed, target=record.out_A)


def heavy_query_eve_attack(spec: ProtocolSpec, cfg: EveConfig, transcript: Sequence[Message],
                           oracle: Oracle, rng_seed: int, target=None) -> AttackOutcome:
    """One-shot heavy-query attack; see :class:`HeavyQueryEve` for repeated use."""
    return HeavyQueryEve(spec, cfg, rng_seed).attack(
        transcript, oracle, derive_seed(rng_seed, "sample"), target)


# -- baselines ---------------------------------------------------------------

def consistent_view_attack(spec: ProtocolSpec, transcript: Sequence[Message], rng_seed: int,
                           mc_samples: int = 10_000, target=None) -> AttackOutcome:
    """Sample an A-view consistent with the transcript and output its key.

    The spec's oracle answers are treated as A's private randomness, so no
    oracle is queried.
    """
    sampler = ConditionalSampler(spec, transcript, {}, a_only=True)
    run, draws = sampler.first_accepted(random.Random(rng_seed), mc_samples)
    if run is None:
        raise InsufficientSamples(0, 1, draws)
    guess = run.output("A")
    return AttackOutcome(guess, 0, guess is not None and guess == target, draws=draws)


def brute_force_attack(spec: ProtocolSpec, transcript: Sequence[Message], oracle: Oracle,
                       budget: int, rng_seed: int, mc_samples: int = 10_000,
                       target=None) -> AttackOutcome:
    """Query points ``0 .. budget-1``, then sample B's output given all answers.

    When no consistent run turns up within ``mc_samples`` draws the guess is
    abort.
    """
    before = oracle.ledger(EVE).count
    top = min(budget, 1 << spec.domain_bits)
    known = {p: oracle.query(EVE, p) for p in range(top) if p not in spec.fixed_answers}
    sampler = ConditionalSampler(spec, transcript, known)
    run, draws = sampler.first_accepted(random.Random(rng_seed), mc_samples)
    guess = None if run is None else run.output("B")
    return AttackOutcome(guess, oracle.ledger(EVE).count - before,
                         guess is not None and guess == target,
                         insufficient=run is None, draws=draws)


def simulate_receiver_attack(spec: ProtocolSpec, transcript: Sequence[Message], oracle: Oracle,
                             rng_seed: int, target=None) -> AttackOutcome:
    """Run B's side with fresh coins on the real oracle and output B's key.

    Queries are charged to Eve and bounded by B's budget.
    """
    before = oracle.ledger(EVE).count
    run = ProtocolRun(spec, oracle, {"A": 0, "B": derive_seed(rng_seed, "B")},
                      principals={"A": EVE, "B": EVE})
    for m in transcript:
        run.inject(m)
    guess = run.output("B")
    return AttackOutcome(guess, oracle.ledger(EVE).count - before,
                         guess is not None and guess == target)


def brute_force_attacker(budget: int, mc_samples: int = 10_000):
    def attacker(spec, record, oracle, rng_seed):
        return brute_force_attack(spec, record.transcript, oracle, budget, rng_seed,
                                  mc_samples, target=record.out_A)
    return attacker


def simulate_receiver_attacker():
    def attacker(spec, record, oracle, rng_seed):
        return simulate_receiver_attack(spec, record.transcript, oracle, rng_seed,
                                        target=record.out_A)
    return attacker


def consistent_view_attacker(mc_samples: int = 10_000):
    def attacker(spec, record, oracle, rng_seed):
        return consistent_view_attack(spec, record.transcript, rng_seed, mc_samples,
                                      target=record.out_A)
    return attacker


# -- harness -----------------------------------------------------------------

def attack_trials(spec: ProtocolSpec, attacker: Callable, trials: int, rng_seed: int,
                  workers: int = 1) -> List[tuple]:
    """Per-trial ``(agreement, outcome)`` pairs on independent runs.

    Each trial runs the protocol on its own oracle and hands the attacker a
    handle with the same answers and empty ledgers.  An attacker that raises
    :class:`InsufficientSamples` scores a failed, flagged outcome.
    """
    if trials < 1:
        raise ParameterError("trials must be >= 1")

    def one(t):
        record, oracle = run_trial(spec, rng_seed, t)
        handle = oracle.fix_answers({})
        try:
            out = attacker(spec, record, handle, derive_seed(rng_seed, t, "attack"))
        except InsufficientSamples as exc:
            out = AttackOutcome(None, handle.ledger(EVE).count, False, insufficient=True,
                                draws=exc.draws)
        return agreement(record), out

    return parallel_map(one, trials, workers)


def summarize(pairs: Sequence[tuple]) -> AttackReport:
    n = len(pairs)
    outs = [o for _, o in pairs]
    return AttackReport(
        success=sum(o.success for o in outs) / n,
        ci_halfwidth=hoeffding_halfwidth(n),
        mean_queries=sum(o.queries_spent for o in outs) / n,
        trials=n,
        agreement=sum(a for a, _ in pairs) / n,
        truncations=sum(o.truncated for o in outs),
        insufficient=sum(o.insufficient for o in outs),
        max_queries=max(o.queries_spent for o in outs),
    )


def evaluate_attacker(spec: ProtocolSpec, attacker: Callable, trials: int, rng_seed: int,
                      workers: int = 1) -> AttackReport:
    """Monte-Carlo success of ``attacker`` with a 95% Hoeffding half-width.

    ``attacker(spec, record, oracle, seed) -> AttackOutcome``.  The report
    also carries the protocol's agreement on the same runs.
    """
    return summarize(attack_trials(spec, attacker, trials, rng_seed, workers))
