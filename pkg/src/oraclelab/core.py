"""Two-party oracle-aided protocols: specs, execution, accounting, agreement.

A protocol is described declaratively by a :class:`ProtocolSpec`.  Party A
sends the odd-numbered messages and party B the even ones.  Before a party
sends its first message (or computes its output) it performs its oracle
queries, either from a precomputed plan (:class:`NonAdaptive`) or through a
stepwise routine that may look at answers as they arrive (:class:`Adaptive`).
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

from .errors import BudgetExceeded, ParameterError, SpecError
from .oracle import Oracle
from .parallel import parallel_map
from .seeding import derive_seed

PARTIES = ("A", "B")


@dataclass(frozen=True)
class Message:
    bits: int
    length: int

    def __post_init__(self):
        if self.length < 0:
            raise SpecError("message length must be nonnegative")
        if not 0 <= self.bits < (1 << self.length) and not (self.bits == 0 and self.length == 0):
            raise SpecError(f"value {self.bits} does not fit in {self.length} bits")

    def to_json(self):
        return {"hex": format(self.bits, "x"), "length": self.length}

    @classmethod
    def from_json(cls, obj):
        return cls(int(obj["hex"], 16), obj["length"])


def concat(*messages: Message) -> Message:
    """Concatenate messages, first argument in the high bits."""
    bits, length = 0, 0
    for m in messages:
        bits = (bits << m.length) | m.bits
        length += m.length
    return Message(bits, length)


def split(message: Message, widths: Sequence[int]) -> List[int]:
    """Inverse of :func:`concat` for fields of the given widths."""
    if sum(widths) != message.length:
        raise SpecError("field widths do not cover the message")
    out, shift = [], message.length
    for w in widths:
        shift -= w
        out.append((message.bits >> shift) & ((1 << w) - 1))
    return out


@dataclass(frozen=True)
class NonAdaptive:
    """Each party's queries come from ``plans[party](rng, params)``, fixed before any answer."""

    plans: Mapping[str, Callable[[random.Random, Mapping], List[int]]]


@dataclass(frozen=True)
class Adaptive:
    """Each party runs ``steps[party](view)``, calling ``view.ask`` as it goes.

    ``simulable`` marks specs whose query behaviour may be estimated by running
    them against freshly sampled oracles.
    """

    steps: Mapping[str, Callable[["PartyView"], None]]
    simulable: bool = True


class PartyView:
    """Everything one party has seen: randomness, queries, answers, transcript."""

    __slots__ = ("party", "seed", "rng", "queries", "answers", "transcript", "params",
                 "state", "oracle_points", "calls", "_oracle", "_fixed", "_principal", "_budget")

    def __init__(self, party, seed, oracle, fixed, params, transcript, budget, principal=None):
        self.party = party
        self.seed = seed
        self.rng = random.Random(seed)
        self.queries: List[int] = []
        self.answers: List[int] = []
        self.transcript = transcript
        self.params = params
        self.state: Dict[str, Any] = {}
        self.oracle_points: Dict[int, int] = {}
        self.calls = 0
        self._oracle = oracle
        self._fixed = fixed
        self._principal = principal or party
        self._budget = budget

    def ask(self, point: int) -> int:
        self.calls += 1
        v = self._fixed.get(point)
        if v is None:
            v = self._oracle.query(self._principal, point)
            if point not in self.oracle_points:
                self.oracle_points[point] = v
                if len(self.oracle_points) > self._budget:
                    raise BudgetExceeded(self.party, len(self.oracle_points), self._budget)
        self.queries.append(point)
        self.answers.append(v)
        return v

    def substream(self, tag) -> random.Random:
        """Independent stream keyed by this party's seed and ``tag``."""
        return random.Random(derive_seed(self.seed, "substream", tag))

    def restricted(self, n: int) -> "PartyView":
        """Copy that only shows the first ``n`` queries (shares rng, state, transcript)."""
        v = PartyView.__new__(PartyView)
        for name in PartyView.__slots__:
            setattr(v, name, getattr(self, name))
        v.queries = self.queries[:n]
        v.answers = self.answers[:n]
        return v


@dataclass(frozen=True)
class ProtocolSpec:
    """Declarative two-party oracle protocol.

    ``message_widths[k]`` is the fixed width of message ``k``; messages are
    padded to it, so communication cost is worst-case by construction.
    ``posterior_proposal`` optionally supplies a sampler for A's side
    conditioned on the first message (see :mod:`oraclelab.eavesdroppers`).
    """

    name: str
    params: Mapping[str, Any]
    domain_bits: int
    range_bits: int
    key_bits: int
    budget: Mapping[str, int]
    message_widths: Tuple[int, ...]
    query_policy: Union[NonAdaptive, Adaptive]
    message_fns: Tuple[Callable[[PartyView], Message], ...]
    output_fns: Mapping[str, Callable[[PartyView], Optional[int]]]
    fixed_answers: Mapping[int, int] = field(default_factory=dict)
    universe_size: Optional[int] = None
    posterior_proposal: Optional[Callable] = None
    provenance: Tuple[Mapping[str, Any], ...] = ()

    def __post_init__(self):
        if len(self.message_fns) != len(self.message_widths):
            raise SpecError("one message function per round is required")
        for p in PARTIES:
            if p not in self.output_fns or p not in self.budget:
                raise SpecError(f"party {p} needs an output function and a budget")

    @property
    def rounds(self) -> int:
        return len(self.message_widths)

    @property
    def adaptive(self) -> bool:
        return isinstance(self.query_policy, Adaptive)

    @staticmethod
    def sender(k: int) -> str:
        return "A" if k % 2 == 0 else "B"

    def derive(self, **changes) -> "ProtocolSpec":
        return replace(self, **changes)


def _bind(oracles, spec) -> Dict[str, Any]:
    if isinstance(oracles, Mapping):
        bound = {p: oracles[p] for p in PARTIES}
    else:
        bound = {p: oracles for p in PARTIES}
    for o in bound.values():
        if isinstance(o, Oracle) and (o.domain_bits != spec.domain_bits or o.range_bits != spec.range_bits):
            raise ParameterError(
                f"oracle widths ({o.domain_bits},{o.range_bits}) do not match spec "
                f"({spec.domain_bits},{spec.range_bits})")
    return bound


class ProtocolRun:
    """Stepwise execution of a spec; :func:`execute` drives it to completion.

    Samplers drive it message by message so they can stop at the first
    mismatch with an observed transcript.
    """

    def __init__(self, spec: ProtocolSpec, oracles, seeds: Mapping[str, int],
                 forced_queries: Optional[Mapping[str, Sequence[int]]] = None,
                 principals: Optional[Mapping[str, str]] = None):
        self.spec = spec
        self.oracles = _bind(oracles, spec)
        self.transcript: List[Message] = []
        self.forced = forced_queries or {}
        if self.forced and spec.adaptive:
            raise SpecError("query sets can only be forced on non-adaptive specs")
        principals = principals or {}
        self.views = {
            p: PartyView(p, seeds[p], self.oracles[p], spec.fixed_answers, spec.params,
                         self.transcript, spec.budget[p], principals.get(p))
            for p in PARTIES
        }
        self._prepared = set()

    def prepare(self, party: str):
        if party in self._prepared:
            return
        self._prepared.add(party)
        view = self.views[party]
        policy = self.spec.query_policy
        if isinstance(policy, NonAdaptive):
            if party in self.forced:
                points = list(self.forced[party])
            else:
                points = policy.plans[party](view.rng, self.spec.params)
            for p in points:
                view.ask(p)
        else:
            policy.steps[party](view)

    def send(self) -> Message:
        k = len(self.transcript)
        if k >= self.spec.rounds:
            raise SpecError("all rounds already sent")
        party = self.spec.sender(k)
        self.prepare(party)
        msg = self.spec.message_fns[k](self.views[party])
        if not isinstance(msg, Message) or msg.length != self.spec.message_widths[k]:
            got = msg.length if isinstance(msg, Message) else type(msg).__name__
            raise SpecError(f"{self.spec.name}: message {k + 1} has width {got}, "
                            f"expected {self.spec.message_widths[k]}")
        self.transcript.append(msg)
        return msg

    def inject(self, message: Message):
        """Append an observed message without running its sender."""
        self.transcript.append(message)

    def output(self, party: str) -> Optional[int]:
        self.prepare(party)
        return self.spec.output_fns[party](self.views[party])

    def run_all(self):
        while len(self.transcript) < self.spec.rounds:
            self.send()
        return self.output("A"), self.output("B")


@dataclass
class ExecutionRecord:
    """One complete run.  ``X``/``Y`` list the distinct points sent to the oracle."""

    spec_name: str
    X: List[int]
    Y: List[int]
    FX: List[int]
    FY: List[int]
    transcript: List[Message]
    out_A: Optional[int]
    out_B: Optional[int]
    seeds: Dict[str, Any]
    calls: Dict[str, int] = field(default_factory=dict)
    views: Optional[Dict[str, PartyView]] = field(default=None, repr=False, compare=False)

    def to_json(self) -> Dict[str, Any]:
        def hx(v):
            return None if v is None else format(v, "x")
        return {
            "spec": self.spec_name,
            "X": [hx(p) for p in self.X], "Y": [hx(p) for p in self.Y],
            "FX": [hx(v) for v in self.FX], "FY": [hx(v) for v in self.FY],
            "transcript": [m.to_json() for m in self.transcript],
            "out_A": hx(self.out_A), "out_B": hx(self.out_B),
            "seeds": self.seeds, "calls": self.calls,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    @classmethod
    def from_json(cls, obj) -> "ExecutionRecord":
        def ix(v):
            return None if v is None else int(v, 16)
        return cls(obj["spec"], [ix(p) for p in obj["X"]], [ix(p) for p in obj["Y"]],
                   [ix(v) for v in obj["FX"]], [ix(v) for v in obj["FY"]],
                   [Message.from_json(m) for m in obj["transcript"]],
                   ix(obj["out_A"]), ix(obj["out_B"]), obj["seeds"], obj.get("calls", {}))


def party_seeds(rng_seed: int) -> Dict[str, int]:
    return {p: derive_seed(rng_seed, "party", p) for p in PARTIES}


def execute(spec: ProtocolSpec, oracle_binding, rng_seed: int,
            forced_queries: Optional[Mapping[str, Sequence[int]]] = None,
            keep_views: bool = False) -> ExecutionRecord:
    """Run ``spec`` to completion and return its record.

    ``oracle_binding`` is one oracle shared by both parties or a mapping
    ``{"A": oracle, "B": oracle}``.
    """
    seeds = party_seeds(rng_seed)
    run = ProtocolRun(spec, oracle_binding, seeds, forced_queries)
    out_a, out_b = run.run_all()
    va, vb = run.views["A"], run.views["B"]
    oracle_seeds = {p: getattr(run.oracles[p], "seed", None) for p in PARTIES}
    return ExecutionRecord(
        spec.name, list(va.oracle_points), list(vb.oracle_points),
        list(va.oracle_points.values()), list(vb.oracle_points.values()),
        list(run.transcript), out_a, out_b,
        {"rng": rng_seed, "A": seeds["A"], "B": seeds["B"], "oracle": oracle_seeds},
        {"A": va.calls, "B": vb.calls},
        run.views if keep_views else None,
    )


def replay(spec: ProtocolSpec, record: ExecutionRecord) -> ExecutionRecord:
    """Re-execute from the seeds stored in ``record`` (unprogrammed oracles)."""
    oseeds = record.seeds["oracle"]
    if oseeds["A"] == oseeds["B"]:
        binding = Oracle(oseeds["A"], spec.domain_bits, spec.range_bits)
    else:
        binding = {p: Oracle(oseeds[p], spec.domain_bits, spec.range_bits) for p in PARTIES}
    return execute(spec, binding, record.seeds["rng"])


def communication_cost(record: ExecutionRecord) -> int:
    return sum(m.length for m in record.transcript)


def agreement(record: ExecutionRecord) -> bool:
    """True iff both parties output the same non-abort key."""
    return record.out_A is not None and record.out_A == record.out_B


def intersection_indices(record: ExecutionRecord, excluded=()) -> set:
    """Indices ``i`` into B's distinct query list with ``Y[i]`` in ``X`` minus ``excluded``."""
    xs = set(record.X) - set(excluded)
    return {i for i, y in enumerate(dict.fromkeys(record.Y)) if y in xs}


def hoeffding_halfwidth(trials: int, alpha: float = 0.05) -> float:
    """Two-sided Hoeffding interval half-width for a mean of [0,1] variables."""
    if trials < 1:
        raise ParameterError("trials must be >= 1")
    return math.sqrt(math.log(2 / alpha) / (2 * trials))


def trial_oracle(spec: ProtocolSpec, rng_seed: int, t: int) -> Oracle:
    return Oracle(derive_seed(rng_seed, t, "oracle"), spec.domain_bits, spec.range_bits)


def run_trial(spec: ProtocolSpec, rng_seed: int, t: int, keep_views=False) -> Tuple[ExecutionRecord, Oracle]:
    """Trial ``t`` of an experiment keyed by ``rng_seed``: fresh oracle, fresh coins."""
    oracle = trial_oracle(spec, rng_seed, t)
    return execute(spec, oracle, derive_seed(rng_seed, t, "run"), keep_views=keep_views), oracle


def estimate_agreement(spec: ProtocolSpec, trials: int, rng_seed: int,
                       workers: int = 1) -> Tuple[float, float]:
    """Mean agreement over independent runs (oracle averaged), with 95% Hoeffding half-width."""
    if trials < 1:
        raise ParameterError("trials must be >= 1")
    hits = sum(parallel_map(lambda t: agreement(run_trial(spec, rng_seed, t)[0]), trials, workers))
    return hits / trials, hoeffding_halfwidth(trials)
