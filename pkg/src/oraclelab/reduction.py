"""From uniform-query key agreement to set disjointness.

A uniform-query protocol is emulated without an oracle in two ways: with one
shared random function as public randomness (``com``), or with independent
private functions per party (``dist``).  The two agree exactly when the query
sets are disjoint and drift apart as they intersect.  Calibration measures that
drift per intersection size, and the solver uses it to decide whether two
small sets intersect.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .core import (ExecutionRecord, NonAdaptive, ProtocolSpec, agreement, communication_cost,
                   execute, hoeffding_halfwidth)
from .errors import NoGapError, ParameterError, SpecError
from .oracle import Oracle
from .parallel import parallel_map
from .seeding import derive_seed

DISJOINT = "disjoint"
INTERSECT_ONE = "intersect_one"
COM = "com"
DIST = "dist"


@dataclass(frozen=True)
class DisjointnessInstance:
    """Two ``floor(ell/4)``-subsets of ``{1..ell}`` meeting in 0 or 1 element."""

    X: Tuple[int, ...]
    Y: Tuple[int, ...]
    label: str
    ell: int

    def __post_init__(self):
        m = self.ell // 4
        if len(set(self.X)) != m or len(set(self.Y)) != m:
            raise ParameterError(f"both sets must have {m} distinct elements")
        if not all(1 <= e <= self.ell for e in self.X + self.Y):
            raise ParameterError("elements must lie in 1..ell")
        want = {DISJOINT: 0, INTERSECT_ONE: 1}.get(self.label)
        if want is None or len(set(self.X) & set(self.Y)) != want:
            raise ParameterError(f"label {self.label!r} does not match the sets")

    @property
    def disjoint(self) -> bool:
        return self.label == DISJOINT


def sample_hard_instance(ell: int, rng_seed: int) -> DisjointnessInstance:
    """Disjoint pair with probability 3/4, else a pair meeting in one element."""
    if ell < 8:
        raise ParameterError("ell must be >= 8")
    rng = random.Random(rng_seed)
    m = ell // 4
    if rng.random() < 0.75:
        pts = rng.sample(range(1, ell + 1), 2 * m)
        return DisjointnessInstance(tuple(sorted(pts[:m])), tuple(sorted(pts[m:])), DISJOINT, ell)
    pts = rng.sample(range(1, ell + 1), 2 * m - 1)
    common, xs, ys = pts[0], pts[1:m], pts[m:]
    return DisjointnessInstance(tuple(sorted([common] + xs)), tuple(sorted([common] + ys)),
                                INTERSECT_ONE, ell)


# -- emulations ------------------------------------------------------------------

def _check_uniform_query(ka: ProtocolSpec, X, Y):
    if not isinstance(ka.query_policy, NonAdaptive):
        raise SpecError("emulation needs a non-adaptive (uniform-query) protocol")
    if len(X) != ka.budget["A"] or len(Y) != ka.budget["B"]:
        raise ParameterError(f"input sizes {len(X)}, {len(Y)} do not match budgets "
                             f"{ka.budget['A']}, {ka.budget['B']}")


def _ordered(points, rng_seed, party):
    pts = list(points)
    random.Random(derive_seed(rng_seed, "order", party)).shuffle(pts)
    return pts


def run_lambda_com(ka: ProtocolSpec, X, Y, shared_seed: int, rng_seed: int) -> ExecutionRecord:
    """Run ``ka`` with queries forced to ``X`` and ``Y`` and one shared oracle.

    Each set is put in a uniformly random order, as a uniform-query party would
    draw it.
    """
    _check_uniform_query(ka, X, Y)
    oracle = Oracle(shared_seed, ka.domain_bits, ka.range_bits)
    forced = {"A": _ordered(X, rng_seed, "A"), "B": _ordered(Y, rng_seed, "B")}
    return execute(ka, oracle, rng_seed, forced_queries=forced)


def run_lambda_dist(ka: ProtocolSpec, X, Y, seed_A: int, seed_B: int, rng_seed: int) -> ExecutionRecord:
    """As :func:`run_lambda_com` but A and B answer from independent oracles."""
    _check_uniform_query(ka, X, Y)
    binding = {"A": Oracle(seed_A, ka.domain_bits, ka.range_bits),
               "B": Oracle(seed_B, ka.domain_bits, ka.range_bits)}
    forced = {"A": _ordered(X, rng_seed, "A"), "B": _ordered(Y, rng_seed, "B")}
    return execute(ka, binding, rng_seed, forced_queries=forced)


@dataclass(frozen=True)
class Emulation:
    """An oracle-free emulation of ``ka`` keyed by one seed per run.

    With ``attacker`` set, B's output is replaced by the attacker's guess on
    the transcript, negated ``negations`` times (single-bit keys only).
    """

    ka: ProtocolSpec
    mode: str
    attacker: Optional[Callable] = None
    negations: int = 0

    def __post_init__(self):
        if self.mode not in (COM, DIST):
            raise ParameterError(f"mode must be {COM!r} or {DIST!r}")
        if self.attacker is not None and self.ka.key_bits != 1:
            raise SpecError("B's output can only be negated for single-bit keys")

    def run(self, X, Y, seed: int) -> ExecutionRecord:
        shared = derive_seed(seed, "oracle")
        run_seed = derive_seed(seed, "run")
        if self.mode == COM:
            rec = run_lambda_com(self.ka, X, Y, shared, run_seed)
        else:
            rec = run_lambda_dist(self.ka, X, Y, shared, derive_seed(seed, "oracle_B"), run_seed)
        if self.attacker is None:
            return rec
        guess = self.attacker(rec.transcript, derive_seed(seed, "attacker"))
        if guess is not None and self.negations % 2:
            guess = 1 - guess
        return replace(rec, out_B=guess)


def build_secrecy_gap_wrapper(ka, attacker: Callable) -> Tuple[Emulation, Emulation]:
    """Com and dist emulations whose B outputs the negated attacker guess.

    ``attacker(transcript, seed)`` sees only the transcript.  Passing a pair
    returned by this function wraps it again (one more negation).  An attacker
    that does better on the dist emulation than on the com one turns into an
    agreement advantage for the com emulation.
    """
    if isinstance(ka, tuple):
        return tuple(replace(e, attacker=attacker, negations=e.negations + 1) for e in ka)
    return Emulation(ka, COM, attacker, 1), Emulation(ka, DIST, attacker, 1)


def sample_sets_with_intersection(universe_size: int, ell: int, size: int,
                                  rng: random.Random) -> Tuple[List[int], List[int]]:
    """Uniform pair of ``ell``-subsets of the universe meeting in exactly ``size`` points."""
    if not 0 <= size <= ell or 2 * ell - size > universe_size:
        raise ParameterError("no such pair of sets")
    X = rng.sample(range(universe_size), ell)
    common = rng.sample(X, size)
    xs = set(X)
    rest = []
    while len(rest) < ell - size:
        p = rng.randrange(universe_size)
        if p not in xs and p not in rest:
            rest.append(p)
    Y = common + rest
    rng.shuffle(Y)
    return X, Y


def emulation_agreement(em: Emulation, universe_size: int, size: int, trials: int,
                        rng_seed: int, workers: int = 1) -> Tuple[float, float]:
    """Agreement of ``em`` on uniform inputs meeting in ``size`` points."""
    ell = em.ka.budget["A"]

    def one(t):
        X, Y = sample_sets_with_intersection(universe_size, ell, size,
                                             random.Random(derive_seed(rng_seed, "inputs", size, t)))
        return agreement(em.run(X, Y, derive_seed(rng_seed, "run", size, t)))

    hits = parallel_map(one, trials, workers)
    return sum(hits) / trials, hoeffding_halfwidth(trials)


# -- calibration -------------------------------------------------------------------

@dataclass
class AccProfile:
    """Agreement of both emulations by intersection size, and the chosen gap.

    ``orientation`` is ``"tilde"`` when the com emulation carries the gap at
    ``chosen_c`` and ``"hat"`` when the dist one does; ``threshold`` and
    ``half_gap`` refer to that emulation.
    """

    acc_com: Dict[int, Tuple[float, float]]
    acc_dist: Dict[int, Tuple[float, float]]
    suc: Dict[int, float]
    chosen_c: int
    chosen_d: int
    gap: float
    orientation: str
    threshold: float
    half_gap: float
    increasing: bool
    trials_per_size: int
    seed: int
    protocol: Dict = field(default_factory=dict)

    @property
    def mode(self) -> str:
        return COM if self.orientation == "tilde" else DIST

    def to_json(self) -> dict:
        d = asdict(self)
        for k in ("acc_com", "acc_dist", "suc"):
            d[k] = {str(i): v for i, v in sorted(d[k].items())}
        return d

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=2)

    @classmethod
    def from_json(cls, obj) -> "AccProfile":
        obj = dict(obj)
        for k in ("acc_com", "acc_dist"):
            obj[k] = {int(i): tuple(v) for i, v in obj[k].items()}
        obj["suc"] = {int(i): v for i, v in obj["suc"].items()}
        return cls(**obj)


def calibrate_acc_profile(ka: ProtocolSpec, ell: int, trials_per_size: int, sizes: Sequence[int],
                          rng_seed: int, workers: int = 1) -> AccProfile:
    """Estimate com and dist agreement per intersection size and pick the gap.

    ``d`` is the smallest size whose success gap reaches half the largest one
    observed; ``c <= d`` maximizes ``Suc(c) - Suc(c-1)``.  The emulation whose
    agreement moves more between ``c-1`` and ``c`` carries the decision.

    Raises
    ------
    NoGapError
        When the best step in the success gap is within 3 combined
        confidence half-widths of zero.
    """
    sizes = sorted(set(sizes))
    if not sizes or sizes[0] < 0 or sizes[-1] > ell:
        raise ParameterError("sizes must lie in [0, ell]")
    if ka.universe_size is None:
        raise SpecError("calibration needs a protocol with a declared universe")
    if ka.budget["A"] != ell:
        raise ParameterError("ell must equal the protocol's query budget")
    com, dist = Emulation(ka, COM), Emulation(ka, DIST)
    acc_com, acc_dist, suc = {}, {}, {}
    for i in sizes:
        seed_i = derive_seed(rng_seed, "size", i)
        acc_com[i] = emulation_agreement(com, ka.universe_size, i, trials_per_size, seed_i, workers)
        acc_dist[i] = emulation_agreement(dist, ka.universe_size, i, trials_per_size, seed_i, workers)
        suc[i] = acc_com[i][0] - acc_dist[i][0]
    ci = hoeffding_halfwidth(trials_per_size)
    steps = {s: suc[s] - suc[s - 1] for s in sizes if s >= 1 and s - 1 in suc}
    if not steps or max(steps.values()) <= 3 * 2 * ci:
        raise NoGapError("no intersection size shows a success gap above 3 confidence widths")
    target = max(suc.values()) / 2
    reaching = [s for s in steps if suc[s] >= target]
    d = min(reaching) if reaching else max(steps)
    c = max((s for s in steps if s <= d), key=lambda s: (steps[s], -s))
    jump_com = acc_com[c][0] - acc_com[c - 1][0]
    jump_dist = acc_dist[c - 1][0] - acc_dist[c][0]
    if abs(jump_com) >= abs(jump_dist):
        orientation, hi, lo = "tilde", acc_com[c][0], acc_com[c - 1][0]
    else:
        orientation, hi, lo = "hat", acc_dist[c][0], acc_dist[c - 1][0]
    return AccProfile(
        acc_com=acc_com, acc_dist=acc_dist, suc=suc, chosen_c=c, chosen_d=d,
        gap=steps[c], orientation=orientation, threshold=(hi + lo) / 2,
        half_gap=abs(hi - lo) / 2 - ci, increasing=hi > lo,
        trials_per_size=trials_per_size, seed=rng_seed,
        protocol={"name": ka.name, **{k: v for k, v in ka.params.items()}},
    )


# -- the disjointness solver ---------------------------------------------------------

@dataclass(frozen=True)
class SetSolverConfig:
    k: int
    threshold: float
    c: int
    epsilon: float

    def __post_init__(self):
        if self.k < 1:
            raise ParameterError("k must be >= 1")
        if not 0 < self.threshold < 1:
            raise ParameterError("threshold must lie in (0, 1)")

    @classmethod
    def from_profile(cls, profile: AccProfile, epsilon: float) -> "SetSolverConfig":
        return cls(required_repetitions(epsilon, profile.half_gap), profile.threshold,
                   profile.chosen_c, epsilon)


def required_repetitions(epsilon: float, half_gap: float) -> int:
    """Repetitions ``k`` with ``exp(-2 k h^2) <= epsilon`` (natural log)."""
    if not 0 < epsilon < 1:
        raise ParameterError("epsilon must lie in (0, 1)")
    if not half_gap > 0:
        raise ParameterError("half_gap must be positive")
    return max(1, math.ceil(math.log(1 / epsilon) / (2 * half_gap * half_gap) - 1e-9))


def pad_inputs(X, Y, ell: int, c: int) -> Tuple[List[int], List[int]]:
    """Embed two ``floor(ell/4)``-subsets of ``1..ell`` into ``1..4 ell``.

    Both sets get the shared block ``ell+1 .. ell+c-1``; A gets a private block
    from ``2 ell`` and B one from ``3 ell``, each of length
    ``ell - floor(ell/4) - (c-1)`` so the padded sets have exactly ``ell``
    elements and meet in ``(c-1) + |X & Y|`` points.
    """
    m = ell // 4
    if len(set(X)) != m or len(set(Y)) != m:
        raise ParameterError(f"both sets must have {m} elements")
    if not 1 <= c <= (3 * ell) // 4:
        raise ParameterError("c must lie in [1, 3 ell / 4]")
    block = ell - m - (c - 1)
    shared = list(range(ell + 1, ell + c))
    xp = sorted(set(X)) + shared + list(range(2 * ell, 2 * ell + block))
    yp = sorted(set(Y)) + shared + list(range(3 * ell, 3 * ell + block))
    return xp, yp


@dataclass
class SolverTrace:
    disjoint: bool
    counter: int
    k: int
    indicators: List[bool]
    communication: int


def solve_disjointness_trace(instance: DisjointnessInstance, ka: ProtocolSpec, profile: AccProfile,
                             cfg: SetSolverConfig, rng_seed: int) -> SolverTrace:
    """:func:`solve_disjointness` with its counter, indicators and bit count.

    Each repetition maps ``1..4 ell`` into the protocol's universe by a fresh
    uniform injection and runs the emulation chosen by the profile.
    """
    ell = instance.ell
    if ka.universe_size is None or ka.universe_size < 4 * ell:
        raise ParameterError("the protocol's universe must hold 4 ell points")
    xp, yp = pad_inputs(instance.X, instance.Y, ell, cfg.c)
    em = Emulation(ka, profile.mode)
    indicators, bits = [], 0
    for j in range(cfg.k):
        rng = random.Random(derive_seed(rng_seed, "perm", j))
        sigma = rng.sample(range(ka.universe_size), 4 * ell)
        rec = em.run([sigma[e - 1] for e in xp], [sigma[e - 1] for e in yp],
                     derive_seed(rng_seed, "rep", j))
        indicators.append(agreement(rec))
        bits += communication_cost(rec) + 1
    counter = sum(indicators)
    high = counter / cfg.k > cfg.threshold
    meets_c = high == profile.increasing
    return SolverTrace(not meets_c, counter, cfg.k, indicators, bits + 1)


def solve_disjointness(instance: DisjointnessInstance, ka: ProtocolSpec, profile: AccProfile,
                       cfg: SetSolverConfig, rng_seed: int) -> bool:
    """True when the solver answers "disjoint".

    The padded sets meet in ``c-1`` points when the inputs are disjoint and
    in ``c`` when they share one element.  The agreement rate over ``k`` runs
    is compared with the midpoint of the calibrated rates at those two sizes.
    """
    return solve_disjointness_trace(instance, ka, profile, cfg, rng_seed).disjoint
