"""Concrete key-agreement protocols as :class:`ProtocolSpec` constructors.

Each constructor may attach a ``posterior_proposal``: a factory
``(spec, prefix, known) -> draw(rng)`` whose draws are runs with A's side
sampled exactly from its posterior given the first message and the answers in
``known``, or ``None`` on rejection.  Samplers fall back to plain rejection on
the first message when no proposal is attached.
"""

from __future__ import annotations

import math
from typing import Dict, List, Mapping, Optional, Sequence

from .core import Adaptive, Message, NonAdaptive, ProtocolRun, ProtocolSpec, split
from .errors import ParameterError, SpecError
from .oracle import FreshOracle

SUBSET = "subset"
IID = "iid"


def ceil_log2(n: int) -> int:
    return max(0, (n - 1).bit_length())


def msb(value: int, width: int) -> int:
    """Leading bit of ``value`` read as a ``width``-bit string."""
    return (value >> (width - 1)) & 1 if width > 0 else 0


# -- Merkle's puzzles --------------------------------------------------------

def merkle_puzzles(ell: int, universe_size: int, sampling_mode: str = SUBSET,
                   range_bits: Optional[int] = None) -> ProtocolSpec:
    """Merkle's puzzles over a universe of ``universe_size`` points.

    A samples ``x_1..x_ell`` and sends their answers; B samples ``y_1..y_ell``,
    finds the lexicographically first ``(i, j)`` with ``F(x_i) = F(y_j)`` and
    sends ``i`` (0 on abort).  A outputs ``x_i``, B outputs ``y_j`` or aborts.

    Parameters
    ----------
    sampling_mode : {"subset", "iid"}
        Query sets are uniform ``ell``-subsets, or ``ell`` independent uniform
        draws.
    range_bits : int, optional
        Defaults to ``2 * ceil(log2 universe_size)`` (at least 2).
    """
    if not 1 <= ell <= universe_size:
        raise ParameterError("need 1 <= ell <= universe_size")
    if sampling_mode not in (SUBSET, IID):
        raise ParameterError(f"unknown sampling mode {sampling_mode!r}")
    log_s = ceil_log2(universe_size)
    r = max(2, 2 * log_s) if range_bits is None else range_bits
    if r < max(1, log_s):
        raise SpecError(f"range of {r} bits cannot encode a universe of {universe_size}")
    d = max(1, (universe_size - 1).bit_length())
    w2 = ceil_log2(ell)

    def plan(rng, params):
        if sampling_mode == SUBSET:
            return rng.sample(range(universe_size), ell)
        return [rng.randrange(universe_size) for _ in range(ell)]

    def m1(view):
        bits = 0
        for a in view.answers:
            bits = (bits << r) | a
        return Message(bits, ell * r)

    def m2(view):
        a = split(view.transcript[0], [r] * ell)
        first = {}
        for j, b in enumerate(view.answers):
            first.setdefault(b, j)
        match = None
        for i, ai in enumerate(a):
            j = first.get(ai)
            if j is not None:
                match = (i, j)
                break
        view.state["match"] = match
        return Message(match[0] if match else 0, w2)

    def out_a(view):
        i = view.transcript[1].bits
        return view.queries[i] if i < len(view.queries) else None

    def out_b(view):
        match = view.state.get("match")
        return None if match is None else view.queries[match[1]]

    return ProtocolSpec(
        name="merkle_puzzles",
        params={"ell": ell, "universe_size": universe_size, "sampling_mode": sampling_mode},
        domain_bits=d, range_bits=r, key_bits=d,
        budget={"A": ell, "B": ell},
        message_widths=(ell * r, w2),
        query_policy=NonAdaptive({"A": plan, "B": plan}),
        message_fns=(m1, m2),
        output_fns={"A": out_a, "B": out_b},
        universe_size=universe_size,
        posterior_proposal=_merkle_proposal,
    )


def _merkle_proposal(spec: ProtocolSpec, prefix: Sequence[Message], known: Mapping[int, int]):
    """Exact sampler for A's query list given M1 and the answers in ``known``.

    Position ``i`` can hold a known point answering ``a_i`` (weight 1) or an
    unknown point (weight ``2^-r``, paid once per distinct unknown point).
    Positions are filled group by group (groups share an answer value) with
    history-dependent weights; a final accept step with probability
    ``prod z_t / prod zmax_t`` makes the output exact.
    """
    ell = spec.params["ell"]
    size = spec.universe_size
    iid = spec.params["sampling_mode"] == IID
    r = spec.range_bits
    q = 2.0 ** -r
    values = split(prefix[0], [r] * ell)
    known_in = {p: v for p, v in known.items() if 0 <= p < size}
    n_unknown = size - len(known_in)
    by_value: Dict[int, List[int]] = {}
    for p, v in sorted(known_in.items()):
        by_value.setdefault(v, []).append(p)
    groups: Dict[int, List[int]] = {}
    for i, v in enumerate(values):
        groups.setdefault(v, []).append(i)
    group_list = list(groups.items())

    def draw(rng):
        xs: List[Optional[int]] = [None] * ell
        programmed = {}
        owner = {}
        acc = 1.0
        for value, positions in group_list:
            kn = by_value.get(value, [])
            k = len(kn)
            fresh: List[int] = []
            fresh_set = set()
            used_known = set()
            for t, pos in enumerate(positions):
                u = len(fresh)
                if iid:
                    z = k + u + (n_unknown - u) * q
                    m = min(t, n_unknown)
                    zmax = k + m + (n_unknown - m) * q
                else:
                    z = (k - len(used_known)) + (n_unknown - u) * q
                    zmax = k + n_unknown * q
                if z <= 0:
                    return None
                acc *= z / zmax
                x = rng.random() * z
                if iid and x < k:
                    p = kn[rng.randrange(k)]
                elif iid and x < k + u:
                    p = fresh[rng.randrange(u)]
                elif not iid and x < k - len(used_known):
                    free = [p for p in kn if p not in used_known]
                    p = free[rng.randrange(len(free))]
                    used_known.add(p)
                else:
                    while True:
                        p = rng.randrange(size)
                        if p not in known_in and p not in fresh_set:
                            break
                    if owner.get(p, value) != value:
                        return None
                    owner[p] = value
                    fresh.append(p)
                    fresh_set.add(p)
                    programmed[p] = value
                xs[pos] = p
        if acc < 1.0 and rng.random() >= acc:
            return None
        oracle = FreshOracle({**known, **programmed}, rng, r)
        run = ProtocolRun(spec, oracle, {"A": rng.getrandbits(64), "B": rng.getrandbits(64)},
                          forced_queries={"A": xs})
        if run.send() != prefix[0]:
            raise AssertionError("posterior proposal produced an inconsistent first message")
        return run

    return draw


# -- row/column examples -----------------------------------------------------

def _cell(i: int, j: int, ell: int) -> int:
    return 2 + i * ell + j


def _rowcol(ell: int, range_bits: int, masked: bool) -> ProtocolSpec:
    if ell < 2:
        raise ParameterError("ell must be >= 2")
    if range_bits < 1:
        raise ParameterError("range_bits must be >= 1")
    d = (ell * ell + 1).bit_length()
    w1 = ceil_log2(ell)
    extra = [1] if masked else []

    def plan_a(rng, params):
        a = rng.randrange(ell)
        return extra + [_cell(a, j, ell) for j in range(ell)]

    def plan_b(rng, params):
        b = rng.randrange(ell)
        return extra + [_cell(i, b, ell) for i in range(ell)]

    def mask(view, width):
        if not masked:
            return 0
        f1 = view.answers[0]
        if width <= range_bits:
            return f1 >> (range_bits - width)
        reps = -(-width // range_bits)
        full = 0
        for _ in range(reps):
            full = (full << range_bits) | f1
        return full >> (reps * range_bits - width)

    off = 1 if masked else 0

    def m1(view):
        a = (view.queries[off] - 2) // ell
        return Message(a ^ mask(view, w1), w1)

    def m2(view):
        a = view.transcript[0].bits ^ mask(view, w1)
        b = (view.queries[off] - 2) % ell
        view.state["b"] = b
        return Message(view.answers[off + a] ^ mask(view, range_bits), range_bits)

    def out_a(view):
        target = view.transcript[1].bits ^ mask(view, range_bits)
        for j, v in enumerate(view.answers[off:]):
            if v == target:
                return msb(j, w1)
        return None

    def out_b(view):
        return msb(view.state["b"], w1)

    return ProtocolSpec(
        name="xor_masked_rowcol" if masked else "matrix_rowcol",
        params={"ell": ell, "range_bits": range_bits},
        domain_bits=d, range_bits=range_bits, key_bits=1,
        budget={"A": ell + off, "B": ell + off},
        message_widths=(w1, range_bits),
        query_policy=NonAdaptive({"A": plan_a, "B": plan_b}),
        message_fns=(m1, m2),
        output_fns={"A": out_a, "B": out_b},
    )


def matrix_rowcol(ell: int, range_bits: int = 16) -> ProtocolSpec:
    """A queries a random row ``a`` of an ``ell x ell`` grid and sends ``a``;
    B queries a random column ``b`` and replies ``F(a, b)``.  A locates ``b``
    in its row; the key is the leading bit of ``b``."""
    return _rowcol(ell, range_bits, masked=False)


def xor_masked_rowcol(ell: int, range_bits: int = 16) -> ProtocolSpec:
    """:func:`matrix_rowcol` where both parties also query point 1 and mask
    every message with ``F(1)`` (cut or repeated to the message width)."""
    return _rowcol(ell, range_bits, masked=True)


# -- adaptive hash chains ----------------------------------------------------

def hash_chain_adaptive(n: int) -> ProtocolSpec:
    """Two-chain protocol without heavy queries.

    ``f`` and ``g`` are the halves of one oracle on ``n + 1`` bits selected by
    the leading tag bit.  A walks ``ell = 2^(n/2)`` steps of ``f`` from a random
    ``x``, picks a random step ``i``, sends ``g(f^(i-1)(x))`` and outputs
    ``f^(i-1)(x)``.  B walks both chains from a random ``y`` and outputs the
    first chain value whose ``g`` answer equals the message, else aborts.
    """
    if n < 2 or n % 2:
        raise ParameterError("n must be a positive even integer")
    if n > 28:
        raise ParameterError("n must be at most 28")
    ell = 1 << (n // 2)
    g_tag = 1 << n

    def f_chain(view, start):
        chain = [start]
        for _ in range(ell):
            chain.append(view.ask(chain[-1]))
        return chain[:ell]

    def step_a(view):
        chain = f_chain(view, view.rng.getrandbits(n))
        i = view.rng.randrange(ell)
        view.state["key"] = chain[i]
        view.state["m1"] = view.ask(g_tag | chain[i])

    def step_b(view):
        chain = f_chain(view, view.rng.getrandbits(n))
        view.state["chain"] = chain
        view.state["g"] = [view.ask(g_tag | z) for z in chain]

    def m1(view):
        return Message(view.state["m1"], n)

    def out_a(view):
        return view.state["key"]

    def out_b(view):
        target = view.transcript[0].bits
        for z, gz in zip(view.state["chain"], view.state["g"]):
            if gz == target:
                return z
        return None

    return ProtocolSpec(
        name="hash_chain_adaptive",
        params={"n": n, "ell": ell},
        domain_bits=n + 1, range_bits=n, key_bits=n,
        budget={"A": ell + 1, "B": 2 * ell},
        message_widths=(n,),
        query_policy=Adaptive({"A": step_a, "B": step_b}, simulable=True),
        message_fns=(m1,),
        output_fns={"A": out_a, "B": out_b},
        posterior_proposal=_chain_proposal,
    )


class _Reject(Exception):
    pass


class _ProgramLastG:
    """Oracle wrapper for A's side: the single ``g`` query is forced to answer ``m1``."""

    def __init__(self, fresh, g_tag, m1, accept_fresh):
        self.fresh = fresh
        self.g_tag = g_tag
        self.m1 = m1
        self.accept_fresh = accept_fresh

    def query(self, principal, point):
        if point & self.g_tag:
            if self.fresh.determined(point):
                if self.fresh.answer(point) != self.m1:
                    raise _Reject
            else:
                if not self.accept_fresh():
                    raise _Reject
                self.fresh.program(point, self.m1)
        return self.fresh.answer(point)


def _chain_proposal(spec: ProtocolSpec, prefix: Sequence[Message], known: Mapping[int, int]):
    """Exact sampler for A's view given M1: program the final ``g`` answer.

    An undetermined ``g`` point has likelihood ``2^-r`` of answering ``m1``; a
    known one has likelihood 0 or 1.  When no known ``g`` point answers ``m1``
    every undetermined draw can be accepted outright; otherwise it is accepted
    with probability ``2^-r`` so both kinds keep their relative weight.
    """
    n = spec.params["n"]
    g_tag = 1 << n
    target = prefix[0].bits
    known_hit = any(p & g_tag and v == target for p, v in known.items())
    q = 2.0 ** -spec.range_bits

    def draw(rng):
        fresh = FreshOracle(known, rng, spec.range_bits)
        accept = (lambda: rng.random() < q) if known_hit else (lambda: True)
        wrapper = _ProgramLastG(fresh, g_tag, target, accept)
        run = ProtocolRun(spec, {"A": wrapper, "B": fresh},
                          {"A": rng.getrandbits(64), "B": rng.getrandbits(64)})
        try:
            msg = run.send()
        except _Reject:
            return None
        if msg != prefix[0]:
            raise AssertionError("posterior proposal produced an inconsistent first message")
        return run

    return draw


# -- trivial ----------------------------------------------------------------

def trivial_point() -> ProtocolSpec:
    """Both parties query point 1 and output its answer; no messages."""

    def plan(rng, params):
        return [1]

    def out(view):
        return view.answers[0]

    return ProtocolSpec(
        name="trivial_point", params={}, domain_bits=1, range_bits=1, key_bits=1,
        budget={"A": 1, "B": 1}, message_widths=(),
        query_policy=NonAdaptive({"A": plan, "B": plan}),
        message_fns=(), output_fns={"A": out, "B": out},
    )


REGISTRY = {
    "merkle_puzzles": merkle_puzzles,
    "matrix_rowcol": matrix_rowcol,
    "xor_masked_rowcol": xor_masked_rowcol,
    "hash_chain_adaptive": hash_chain_adaptive,
    "trivial_point": trivial_point,
}


def build(name: str, **params) -> ProtocolSpec:
    """Construct a registered protocol by name."""
    try:
        ctor = REGISTRY[name]
    except KeyError:
        raise ParameterError(f"unknown protocol {name!r}; choose from {sorted(REGISTRY)}") from None
    return ctor(**params)
