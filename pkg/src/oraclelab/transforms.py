"""Normal-form transformations of two-message protocols."""

from __future__ import annotations

import random
from typing import Dict, Tuple

from .core import Adaptive, Message, NonAdaptive, PartyView, ProtocolSpec, concat
from .eavesdroppers import _digest, prior_census
from .errors import SpecError, UnsupportedPolicy
from .protocols import msb
from .seeding import derive_seed


def eliminate_apriori_heavy(spec: ProtocolSpec, delta: float, mc_samples: int,
                            rng_seed: int) -> Tuple[ProtocolSpec, Dict[int, int]]:
    """Replace oracle calls on a-priori heavy points by a fixed answer table.

    Estimates E0 (points queried with probability at least ``delta``), draws
    one uniform answer table ``R`` on E0, and returns a spec whose parties read
    ``R`` instead of calling the oracle there.  Budgets are unchanged.
    """
    if not isinstance(spec.query_policy, NonAdaptive):
        raise UnsupportedPolicy("a-priori heavy elimination needs a non-adaptive spec")
    freq = prior_census(spec, mc_samples, derive_seed(rng_seed, "E0"))
    e0 = sorted(p for p, f in freq.items() if f >= delta)
    rng = random.Random(derive_seed(rng_seed, "R"))
    table = {p: rng.getrandbits(spec.range_bits) for p in e0}
    prov = {"parent": spec.name, "transform": "eliminate_apriori_heavy", "delta": delta,
            "mc_samples": mc_samples, "points": e0, "R_digest": _digest(table)}
    derived = spec.derive(
        name=spec.name + "+fixed_heavy",
        fixed_answers={**spec.fixed_answers, **table},
        posterior_proposal=None,
        provenance=spec.provenance + (prov,),
    )
    return derived, table


def _as_base(view: PartyView, n_queries: int, transcript) -> PartyView:
    v = view.restricted(n_queries)
    v.transcript = transcript
    return v


def key_as_last_query(spec: ProtocolSpec) -> ProtocolSpec:
    """Make B's key the leading bit of one extra uniform query.

    B asks one more uniformly drawn point ``y``, appends the bit
    ``out_B xor msb(y)`` to its message and outputs ``msb(y)``; A outputs
    ``out_A xor`` that bit.  An abort on either side stays an abort.  The base
    functions never see the extra point or the extra bit.

    The extra point is drawn from B's coins after its base plan (non-adaptive
    specs) or from a dedicated substream (adaptive specs), so coupled runs of
    the two specs share every base choice.
    """
    if spec.rounds != 2 or spec.sender(1) != "B":
        raise SpecError("key_as_last_query needs a two-message spec with B sending last")
    if spec.key_bits != 1:
        raise SpecError("key_as_last_query needs single-bit keys")
    d = spec.domain_bits
    base_m1, base_m2 = spec.message_fns
    base_out_a, base_out_b = spec.output_fns["A"], spec.output_fns["B"]
    policy = spec.query_policy

    if isinstance(policy, NonAdaptive):
        plan_b = policy.plans["B"]

        def plan_b_ext(rng, params):
            pts = list(plan_b(rng, params))
            return pts + [rng.getrandbits(d)]

        new_policy = NonAdaptive({"A": policy.plans["A"], "B": plan_b_ext})
    else:
        step_b = policy.steps["B"]

        def step_b_ext(view):
            step_b(view)
            view.ask(view.substream("last_query").getrandbits(d))

        new_policy = Adaptive({"A": policy.steps["A"], "B": step_b_ext}, policy.simulable)

    def m2(view):
        n = len(view.queries) - 1
        extra = view.queries[n]
        base = _as_base(view, n, view.transcript[:1])
        msg = base_m2(base)
        key = base_out_b(_as_base(view, n, [view.transcript[0], msg]))
        if key is None:
            view.state["key"], bit = None, 0
        else:
            view.state["key"] = msb(extra, d)
            bit = key ^ view.state["key"]
        return concat(msg, Message(bit, 1))

    def out_a(view):
        m2_full = view.transcript[1]
        base_msg = Message(m2_full.bits >> 1, m2_full.length - 1)
        key = base_out_a(_as_base(view, len(view.queries), [view.transcript[0], base_msg]))
        return None if key is None else key ^ (m2_full.bits & 1)

    def out_b(view):
        return view.state.get("key")

    w1, w2 = spec.message_widths
    return spec.derive(
        name=spec.name + "+key_last_query",
        budget={"A": spec.budget["A"], "B": spec.budget["B"] + 1},
        message_widths=(w1, w2 + 1),
        query_policy=new_policy,
        message_fns=(base_m1, m2),
        output_fns={"A": out_a, "B": out_b},
        provenance=spec.provenance + ({"parent": spec.name, "transform": "key_as_last_query"},),
    )
