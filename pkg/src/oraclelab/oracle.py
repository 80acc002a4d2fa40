"""Reproducible lazy random oracle with per-principal query ledgers.

Answers are derived, not stored: the answer at point ``p`` under seed ``s`` is

    key    = mix64(s mod 2**64)
    answer = mix64(key XOR mix64(p)) >> (64 - range_bits)

where ``mix64`` is the SplitMix64 finalizer (see ``_kernels_py.mix64``).  Two
handles built from the same ``(seed, domain_bits, range_bits, programmed)``
therefore agree at every point without sharing state, on any platform.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, Mapping, Optional

import numpy as np

from . import kernels
from .errors import ParameterError

MAX_DOMAIN_BITS = 30
MAX_RANGE_BITS = 64


@dataclass
class QueryLedger:
    """Distinct points one principal has asked, in first-query order."""

    principal: str
    _points: Dict[int, None] = field(default_factory=dict)

    def record(self, point: int) -> bool:
        """Add ``point``; return True when it was new."""
        if point in self._points:
            return False
        self._points[point] = None
        return True

    @property
    def points(self) -> list:
        return list(self._points)

    @property
    def count(self) -> int:
        return len(self._points)

    def __contains__(self, point) -> bool:
        return point in self._points


def _check_widths(domain_bits, range_bits):
    if not 1 <= domain_bits <= MAX_DOMAIN_BITS:
        raise ParameterError(f"domain_bits must be in [1, {MAX_DOMAIN_BITS}], got {domain_bits}")
    if not 1 <= range_bits <= MAX_RANGE_BITS:
        raise ParameterError(f"range_bits must be in [1, {MAX_RANGE_BITS}], got {range_bits}")


class Oracle:
    """A random function ``{0,1}^d -> {0,1}^r`` shared by the principals querying it.

    Parameters
    ----------
    seed : int
        Any integer; reduced mod 2**64 for answer derivation.
    domain_bits, range_bits : int
        Widths ``d`` and ``r``.
    programmed : mapping, optional
        Fixed answers that take precedence over derived ones.
    """

    def __init__(self, seed: int, domain_bits: int, range_bits: int,
                 programmed: Optional[Mapping[int, int]] = None):
        _check_widths(domain_bits, range_bits)
        self.seed = int(seed)
        self.domain_bits = domain_bits
        self.range_bits = range_bits
        self._key = kernels.seed_key(self.seed)
        self.programmed: Dict[int, int] = {}
        if programmed:
            for p, v in programmed.items():
                self._check_point(p)
                self._check_answer(v)
                self.programmed[int(p)] = int(v)
        self.memo: Dict[int, int] = {}
        self.ledgers: Dict[str, QueryLedger] = {}

    # -- validation -------------------------------------------------------
    def _check_point(self, point):
        if not 0 <= point < (1 << self.domain_bits):
            raise ParameterError(f"point {point} is not a {self.domain_bits}-bit string")

    def _check_answer(self, value):
        if not 0 <= value < (1 << self.range_bits):
            raise ParameterError(f"answer {value} is not a {self.range_bits}-bit string")

    # -- answers ----------------------------------------------------------
    def answer(self, point: int) -> int:
        """Answer at ``point`` without touching any ledger."""
        v = self.programmed.get(point)
        if v is not None:
            return v
        v = self.memo.get(point)
        if v is None:
            self._check_point(point)
            v = int(kernels.answer(self._key, point, self.range_bits))
            self.memo[point] = v
        return v

    def query(self, principal: str, point: int) -> int:
        """Answer at ``point``, charged to ``principal``'s ledger."""
        if point not in self.memo and point not in self.programmed:
            self._check_point(point)
        self.ledger(principal).record(point)
        return self.answer(point)

    def ledger(self, principal: str) -> QueryLedger:
        led = self.ledgers.get(principal)
        if led is None:
            led = self.ledgers[principal] = QueryLedger(principal)
        return led

    def table(self) -> np.ndarray:
        """All ``2**d`` answers as a uint64 array (programmed points included)."""
        if self.domain_bits > 24:
            raise ParameterError("full table enumeration is limited to domain_bits <= 24")
        out = kernels.table(self._key, self.domain_bits, self.range_bits)
        for p, v in self.programmed.items():
            out[p] = v
        return out

    # -- derived handles --------------------------------------------------
    def fix_answers(self, assignment: Mapping[int, int]) -> "Oracle":
        """New handle whose programmed map is ours updated by ``assignment``."""
        merged = dict(self.programmed)
        for p, v in assignment.items():
            self._check_point(p)
            self._check_answer(v)
            merged[int(p)] = int(v)
        return Oracle(self.seed, self.domain_bits, self.range_bits, merged)

    def fork_independent(self, new_seed: int) -> "Oracle":
        return Oracle(new_seed, self.domain_bits, self.range_bits)

    def __repr__(self):
        return (f"Oracle(seed={self.seed}, d={self.domain_bits}, r={self.range_bits}, "
                f"programmed={len(self.programmed)})")


def create_oracle(seed: int, domain_bits: int, range_bits: int) -> Oracle:
    return Oracle(seed, domain_bits, range_bits)


def query(oracle: Oracle, principal: str, point: int) -> int:
    return oracle.query(principal, point)


def fix_answers(oracle: Oracle, assignment: Mapping[int, int]) -> Oracle:
    return oracle.fix_answers(assignment)


def fork_independent(oracle: Oracle, new_seed: int) -> Oracle:
    return oracle.fork_independent(new_seed)


class FreshOracle:
    """Lazily sampled oracle used inside samplers.

    Points in ``known`` answer as given; every other point gets an independent
    uniform answer drawn from ``rng`` on first use.  Principals are ignored.
    """

    __slots__ = ("known", "rng", "range_bits", "memo")

    def __init__(self, known: Mapping[int, int], rng, range_bits: int):
        self.known = known
        self.rng = rng
        self.range_bits = range_bits
        self.memo: Dict[int, int] = {}

    def determined(self, point: int) -> bool:
        return point in self.known or point in self.memo

    def program(self, point: int, value: int):
        self.memo[point] = value

    def answer(self, point: int) -> int:
        v = self.known.get(point)
        if v is not None:
            return v
        v = self.memo.get(point)
        if v is None:
            v = self.memo[point] = self.rng.getrandbits(self.range_bits)
        return v

    def query(self, principal, point):
        return self.answer(point)


def answers_on(oracle: Oracle, points: Iterable[int]) -> Dict[int, int]:
    """Map each point to its answer without charging any ledger."""
    return {p: oracle.answer(p) for p in points}
