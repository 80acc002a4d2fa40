"""Exact information measures on small finite joint distributions.

All logarithms are base 2.  ``0 log 0`` is 0.  Conditional quantities are
expectations over the conditioning variables, slices of probability zero
contributing nothing.
"""

from __future__ import annotations

import hashlib
import math
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Union

import numpy as np

from .errors import ParameterError
from .seeding import derive_seed

Names = Union[str, Sequence[str]]


def _names(x: Optional[Names]) -> List[str]:
    if x is None:
        return []
    return [x] if isinstance(x, str) else list(x)


class JointDistribution:
    """Probability table over named finite axes.

    Parameters
    ----------
    axes : sequence of (name, alphabet) pairs, or of names
        With bare names the alphabets are ``range(size)`` along each axis.
    probs : array_like
        Nonnegative entries summing to 1 within 1e-12.
    """

    def __init__(self, axes, probs):
        probs = np.asarray(probs, dtype=float)
        norm = []
        for k, ax in enumerate(axes):
            if isinstance(ax, str):
                norm.append((ax, tuple(range(probs.shape[k]))))
            else:
                name, alphabet = ax
                norm.append((name, tuple(alphabet)))
        if len(norm) != probs.ndim or any(len(a) != s for (_, a), s in zip(norm, probs.shape)):
            raise ParameterError("axes do not match table shape")
        if len({n for n, _ in norm}) != len(norm):
            raise ParameterError("axis names must be distinct")
        if probs.size and (probs.min() < 0 or abs(probs.sum() - 1.0) > 1e-12):
            raise ParameterError("table must be nonnegative and sum to 1")
        self.axes = norm
        self.probs = probs

    @classmethod
    def from_weights(cls, axes, weights) -> "JointDistribution":
        w = np.asarray(weights, dtype=float)
        return cls(axes, w / w.sum())

    @property
    def names(self) -> List[str]:
        return [n for n, _ in self.axes]

    def alphabet(self, name: str) -> tuple:
        return self.axes[self.names.index(name)][1]

    def _index(self, names: Sequence[str]) -> List[int]:
        all_names = self.names
        try:
            return [all_names.index(n) for n in names]
        except ValueError:
            raise ParameterError(f"unknown axis in {list(names)}; have {all_names}") from None

    def table(self, names: Names) -> np.ndarray:
        """Marginal table over ``names`` in the given order."""
        names = _names(names)
        idx = self._index(names)
        drop = tuple(k for k in range(self.probs.ndim) if k not in idx)
        t = self.probs.sum(axis=drop) if drop else self.probs
        kept = sorted(idx)
        return np.transpose(t, [kept.index(k) for k in idx]) if names else np.asarray(t)

    def grouped(self, *groups: Names) -> np.ndarray:
        """Marginal table with one flattened axis per group of names."""
        groups = [_names(g) for g in groups]
        t = self.table([n for g in groups for n in g])
        shape = [int(np.prod([len(self.alphabet(n)) for n in g])) for g in groups]
        return t.reshape(shape)

    def marginal(self, names: Names) -> "JointDistribution":
        names = _names(names)
        return JointDistribution([(n, self.alphabet(n)) for n in names], self.table(names))

    def condition(self, **values) -> "JointDistribution":
        """Distribution of the other axes given ``name=value`` assignments."""
        sl = [slice(None)] * self.probs.ndim
        for name, v in values.items():
            k = self._index([name])[0]
            sl[k] = self.axes[k][1].index(v)
        t = self.probs[tuple(sl)]
        mass = t.sum()
        if mass <= 0:
            raise ParameterError("conditioning event has probability zero")
        rest = [ax for ax in self.axes if ax[0] not in values]
        return JointDistribution(rest, t / mass)

    def derive(self, name: str, fn: Callable, inputs: Names,
               alphabet: Optional[Iterable] = None) -> "JointDistribution":
        """Add an axis holding ``fn(*inputs)``, a deterministic function."""
        inputs = _names(inputs)
        idx = self._index(inputs)
        sub_shape = [self.probs.shape[k] for k in idx]
        values = {}
        for combo in np.ndindex(*sub_shape):
            values[combo] = fn(*(self.axes[k][1][c] for k, c in zip(idx, combo)))
        if alphabet is None:
            alphabet = sorted(set(values.values()), key=repr)
        alphabet = tuple(alphabet)
        pos = {v: i for i, v in enumerate(alphabet)}
        onehot = np.zeros(sub_shape + [len(alphabet)])
        for combo, v in values.items():
            onehot[combo + (pos[v],)] = 1.0
        # place input axes where they sit in the table, size 1 elsewhere
        order = sorted(range(len(idx)), key=lambda i: idx[i])
        onehot = np.transpose(onehot, order + [len(idx)])
        shape = [1] * self.probs.ndim + [len(alphabet)]
        for k in idx:
            shape[k] = self.probs.shape[k]
        t = self.probs[..., None] * onehot.reshape(shape)
        return JointDistribution(self.axes + [(name, alphabet)], t)

    def digest(self) -> str:
        return hashlib.blake2b(np.ascontiguousarray(self.probs).tobytes(), digest_size=8).hexdigest()


def _prob_array(p) -> np.ndarray:
    return p.probs if isinstance(p, JointDistribution) else np.asarray(p, dtype=float)


def _pair(p, q):
    if isinstance(p, JointDistribution) and isinstance(q, JointDistribution) and p.axes != q.axes:
        raise ParameterError("distributions live on different alphabets")
    a, b = _prob_array(p), _prob_array(q)
    if a.shape != b.shape:
        raise ParameterError(f"alphabet mismatch: {a.shape} vs {b.shape}")
    return a.ravel(), b.ravel()


# -- divergences -------------------------------------------------------------

def statistical_distance(p, q) -> float:
    """Half the L1 distance between two distributions on one alphabet."""
    a, b = _pair(p, q)
    return float(0.5 * np.abs(a - b).sum())


def max_event_gap(p, q) -> float:
    """``max_S P(S) - Q(S)`` by enumerating every event; alphabets up to 16."""
    a, b = _pair(p, q)
    if a.size > 16:
        raise ParameterError("event enumeration is limited to 16 outcomes")
    best = 0.0
    d = a - b
    for mask in range(1 << a.size):
        s = sum(d[i] for i in range(a.size) if mask >> i & 1)
        best = max(best, s)
    return float(best)


def f_divergence(f: Callable[[float], float], p, q,
                 slope_at_infinity: Optional[float] = None) -> float:
    """``sum_b Q(b) f(P(b) / Q(b))``.

    Where ``Q(b) = 0 < P(b)`` the term is ``P(b) * slope_at_infinity``
    (``lim f(t)/t``); without a slope that is a support violation.
    """
    a, b = _pair(p, q)
    total = 0.0
    for pa, qb in zip(a, b):
        if qb > 0:
            total += qb * f(pa / qb)
        elif pa > 0:
            if slope_at_infinity is None:
                raise ParameterError("P is not absolutely continuous with respect to Q")
            total += pa * slope_at_infinity
    return float(total)


def sd_fn(t: float) -> float:
    return abs(t - 1) / 2


def kl_fn(t: float) -> float:
    return t * math.log2(t) if t > 0 else 0.0


def kl_divergence(p, q) -> float:
    """KL divergence in bits; infinite when P is not dominated by Q."""
    a, b = _pair(p, q)
    if np.any((b == 0) & (a > 0)):
        return math.inf
    m = a > 0
    return float(np.sum(a[m] * np.log2(a[m] / b[m])))


# -- entropy and information ---------------------------------------------------

def entropy(dist, names: Optional[Names] = None) -> float:
    """Shannon entropy in bits of a table, or of ``names`` of a joint."""
    t = dist.table(names) if (isinstance(dist, JointDistribution) and names is not None) else _prob_array(dist)
    p = t[t > 0]
    return float(-np.sum(p * np.log2(p)))


def conditional_entropy(joint: JointDistribution, target: Names, given: Optional[Names] = None) -> float:
    target, given = _names(target), _names(given)
    return entropy(joint, target + given) - (entropy(joint, given) if given else 0.0)


def mutual_information(joint: JointDistribution, axes1: Names, axes2: Names,
                       given: Optional[Names] = None) -> float:
    """``I(axes1; axes2 | given)`` in bits."""
    a, b, g = _names(axes1), _names(axes2), _names(given)
    h = entropy(joint, a + g) + entropy(joint, b + g) - entropy(joint, a + b + g)
    if g:
        h -= entropy(joint, g)
    return max(h, 0.0) if abs(h) < 1e-15 else h


def sd_information(joint: JointDistribution, axes1: Names, axes2: Names,
                   given: Optional[Names] = None) -> float:
    """Distance from the joint of two axis groups to the product of their
    marginals, averaged over ``given``."""
    g = _names(given)
    t = joint.grouped(axes1, axes2, g) if g else joint.grouped(axes1, axes2)[..., None]
    pg = t.sum(axis=(0, 1))
    pa = t.sum(axis=1)
    pb = t.sum(axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        prod = np.where(pg > 0, pa[:, None, :] * pb[None, :, :] / pg, 0.0)
    return float(0.5 * np.abs(t - prod).sum())


# -- random instances ------------------------------------------------------------

FLOOR = 1e-6


def random_table(rng: np.random.Generator, shape, floor: float = FLOOR) -> np.ndarray:
    """Dirichlet(1) table with every entry floored at ``floor``, renormalized."""
    w = rng.dirichlet(np.ones(int(np.prod(shape)))).reshape(shape)
    w = np.maximum(w, floor)
    return w / w.sum()


def corner_tables(shape) -> List[np.ndarray]:
    """Point mass, uniform, near-degenerate and diagonal tables of ``shape``."""
    n = int(np.prod(shape))
    point = np.zeros(n)
    point[0] = 1.0
    uniform = np.full(n, 1.0 / n)
    near = np.full(n, 1e-9)
    near[-1] = 1.0
    near /= near.sum()
    diag = np.zeros(shape)
    for i in range(min(shape)):
        diag[(i,) * len(shape)] = 1.0
    out = [point, uniform, near, (diag / diag.sum()).ravel()]
    return [t.reshape(shape) for t in out]


def _random_function(rng, size_in, size_out):
    return [int(v) for v in rng.integers(0, size_out, size=size_in)]


# -- inequality certification -------------------------------------------------------

class _Tally:
    def __init__(self):
        self.rows: Dict[str, dict] = {}

    def add(self, name: str, lhs: float, rhs: float, kind: str, digest: str):
        lhs, rhs = float(lhs), float(rhs)
        gap = lhs - rhs if kind == "le" else abs(lhs - rhs)
        slack = rhs - lhs if kind == "le" else -abs(lhs - rhs)
        row = self.rows.setdefault(name, {"kind": kind, "instances": 0, "max_violation": 0.0,
                                          "min_slack": math.inf, "worst_digest": None})
        row["instances"] += 1
        if gap > row["max_violation"] or row["worst_digest"] is None:
            row["max_violation"] = max(row["max_violation"], gap)
            row["worst_digest"] = digest
        row["min_slack"] = min(row["min_slack"], slack)

    def report(self, tol: float) -> dict:
        worst = max((r["max_violation"] for r in self.rows.values()), default=0.0)
        return {"tol": tol, "pass": bool(worst <= tol), "max_violation": worst,
                "inequalities": {k: dict(v) for k, v in sorted(self.rows.items())}}


def _check_four(j: JointDistribution, t: _Tally, rng):
    """Inequalities over a joint on axes A, B, C, D."""
    dg = j.digest()
    I, H, SDI = mutual_information, entropy, sd_information
    iab = I(j, "A", "B")
    t.add("pinsker", SDI(j, "A", "B"), 2 * math.sqrt(max(iab, 0.0)), "le", dg)
    t.add("info_nonneg", 0.0, iab, "le", dg)
    t.add("info_le_entropy", iab, H(j, "A"), "le", dg)
    t.add("entropy_le_log_alphabet", H(j, "A"), math.log2(len(j.alphabet("A"))), "le", dg)
    t.add("symmetry_info", iab, I(j, "B", "A"), "eq", dg)
    t.add("symmetry_sd_info", SDI(j, "A", "B"), SDI(j, "B", "A"), "eq", dg)
    t.add("marginal_consistency", iab, I(j.marginal(["A", "B"]), "A", "B"), "eq", dg)
    # chain rules
    chain_h = H(j, "A") + conditional_entropy(j, "B", "A") + conditional_entropy(j, "C", ["A", "B"])
    t.add("entropy_chain_rule", H(j, ["A", "B", "C"]), chain_h, "eq", dg)
    chain_i = I(j, "A", "D") + I(j, "B", "D", "A") + I(j, "C", "D", ["A", "B"])
    t.add("info_chain_rule", I(j, ["A", "B", "C"], "D"), chain_i, "eq", dg)
    # conditional information as an average of slices
    slices = 0.0
    pc = j.table("C")
    for ci, c in enumerate(j.alphabet("C")):
        if pc[ci] > 0:
            slices += pc[ci] * I(j.condition(C=c), "A", "B")
    t.add("conditional_info_slices", I(j, "A", "B", "C"), slices, "eq", dg)
    # data processing for a random function of A
    fa = _random_function(rng, len(j.alphabet("A")), max(1, len(j.alphabet("A")) - 1))
    jf = j.derive("fA", lambda a: fa[a], "A", range(max(fa) + 1))
    t.add("data_processing_info", I(jf, "fA", "B"), iab, "le", dg)
    t.add("data_processing_entropy", H(jf, "fA"), H(j, "A"), "le", dg)
    # adding a conditioning variable moves information by at most I(A;D|C,B)
    mid = I(j, "A", "B", ["C", "D"]) - I(j, "A", "B", "C")
    t.add("info_cond_add_lower", -I(j, "A", "D", "C"), mid, "le", dg)
    t.add("info_cond_add_upper", mid, I(j, "A", "D", ["C", "B"]), "le", dg)
    # statistical-distance lemmas
    e_c = SDI(j, "A", "B", "C")
    t.add("sd_chain_rule", e_c, 2 * SDI(j, ["A", "C"], "B"), "le", dg)
    # extra conditioning costs at most the dependence it removes
    t.add("sd_cond_add", SDI(j, "C", "A"), SDI(j, "C", "A", "B") + SDI(j, "A", "B"), "le", dg)
    # swapping which variable carries the dependence
    t.add("sd_var_rep", e_c, 2 * SDI(j, "A", "C", "B") + 2 * SDI(j, "A", "B"), "le", dg)


def _check_corollary(rng, max_alphabet, t: _Tally, tables=None):
    """Variable swap for the SD dependence when A and B are independent."""
    sa, sb, sm = (int(x) for x in rng.integers(2, max_alphabet + 1, size=3))
    pa = random_table(rng, (sa,))
    pb = random_table(rng, (sb,))
    pm = random_table(rng, (sa, sb, sm))
    pm = pm / pm.sum(axis=2, keepdims=True)
    probs = pa[:, None, None] * pb[None, :, None] * pm
    j = JointDistribution(["A", "B", "M"], probs / probs.sum())
    t.add("sd_var_rep_independent", sd_information(j, "A", "B", "M"),
          2 * sd_information(j, "A", "M", "B"), "le", j.digest())


def _check_indicator(p: float, t: _Tally):
    """Entropy of a Bernoulli(p), p <= 1/2, against p (log(1/p) + 4)."""
    h = entropy(np.array([p, 1 - p]))
    bound = p * (math.log2(1 / p) + 4) if p > 0 else 0.0
    t.add("rv_to_indicator", h, bound, "le", f"p={p!r}")


def _check_chain_indicator(rng, max_alphabet, t: _Tally):
    """Chain rule through the indicators of M = m, with M binary or ternary
    and one side variable E_m per value of M."""
    sa, sb = (int(x) for x in rng.integers(2, max_alphabet + 1, size=2))
    sm = int(rng.integers(2, 4))
    se = [int(x) for x in rng.integers(2, 4, size=sm)]
    names = ["A", "B", "M"] + [f"E{m}" for m in range(sm)]
    j = JointDistribution(names, random_table(rng, (sa, sb, sm, *se)))
    j = j.derive("EM", lambda m, *es: (m, es[m]), ["M"] + [f"E{m}" for m in range(sm)])
    lhs = mutual_information(j, "A", "B", ["M", "EM"])
    rhs = 0.0
    for m in range(sm):
        jm = j.derive(f"J{m}", lambda v, m=m: int(v == m), "M", (0, 1))
        rhs += mutual_information(jm, "A", "B", f"E{m}") + mutual_information(jm, f"J{m}", "B", [f"E{m}", "A"])
    t.add("info_chain_rule_indicator", lhs, rhs, "le", j.digest())


def _check_sd_facts(rng, max_alphabet, t: _Tally):
    n = int(rng.integers(2, max_alphabet * max_alphabet + 1))
    p, q = random_table(rng, (n,)), random_table(rng, (n,))
    dg = hashlib.blake2b(p.tobytes() + q.tobytes(), digest_size=8).hexdigest()
    sd = statistical_distance(p, q)
    if n <= 12:
        t.add("sd_max_event", sd, max_event_gap(p, q), "eq", dg)
    t.add("sd_unit_interval", sd, 1.0, "le", dg)
    t.add("f_divergence_sd", f_divergence(sd_fn, p, q), sd, "eq", dg)
    t.add("f_divergence_kl", f_divergence(kl_fn, p, q), kl_divergence(p, q), "eq", dg)
    t.add("kl_nonneg", 0.0, kl_divergence(p, q), "le", dg)
    # data processing under a random map
    m = int(rng.integers(1, n + 1))
    f = _random_function(rng, n, m)
    fp, fq = np.zeros(m), np.zeros(m)
    np.add.at(fp, f, p)
    np.add.at(fq, f, q)
    t.add("sd_data_processing", statistical_distance(fp, fq), sd, "le", dg)
    # expectation decomposition: SD((A,B),(A,C)) = E_a SD(B|a, C|a)
    sa, sb = (int(x) for x in rng.integers(2, max_alphabet + 1, size=2))
    pa = random_table(rng, (sa,))
    cb = random_table(rng, (sa, sb))
    cb /= cb.sum(axis=1, keepdims=True)
    cc = random_table(rng, (sa, sb))
    cc /= cc.sum(axis=1, keepdims=True)
    lhs = statistical_distance(pa[:, None] * cb, pa[:, None] * cc)
    rhs = float(sum(pa[i] * statistical_distance(cb[i], cc[i]) for i in range(sa)))
    t.add("sd_expectation", lhs, rhs, "eq", dg)
    # product removal: SD(A x B, A x C) = SD(B, C)
    t.add("sd_product_removal", statistical_distance(np.outer(pa, cb[0]), np.outer(pa, cc[0])),
          statistical_distance(cb[0], cc[0]), "eq", dg)


def check_inequalities(batch: int = 200, max_alphabet: int = 4, rng_seed: int = 0,
                       tol: float = 1e-9) -> dict:
    """Evaluate both sides of every listed inequality on random and corner tables.

    Returns a JSON-ready report with, per inequality, the instance count,
    maximum violation, minimum slack, and a digest of the worst table.
    """
    if not 2 <= max_alphabet <= 4:
        raise ParameterError("max_alphabet must be in [2, 4]")
    tally = _Tally()
    for b in range(batch):
        rng = np.random.default_rng(derive_seed(rng_seed, "ineq", b))
        shape = tuple(int(x) for x in rng.integers(2, max_alphabet + 1, size=4))
        j = JointDistribution(["A", "B", "C", "D"], random_table(rng, shape))
        _check_four(j, tally, rng)
        _check_corollary(rng, max_alphabet, tally)
        _check_chain_indicator(rng, max_alphabet, tally)
        _check_sd_facts(rng, max_alphabet, tally)
        _check_indicator(float(rng.uniform(0, 0.5)), tally)
    rng = np.random.default_rng(derive_seed(rng_seed, "corners"))
    for shape in [(2, 2, 2, 2), (max_alphabet,) * 4, (2, 3, 4, 2)[: 4]]:
        shape = tuple(min(s, max_alphabet) for s in shape)
        for table in corner_tables(shape):
            _check_four(JointDistribution(["A", "B", "C", "D"], table), tally, rng)
    for p in (0.0, 1e-12, 0.25, 0.5):
        _check_indicator(p, tally)
    rep = tally.report(tol)
    rep.update({"batch": batch, "max_alphabet": max_alphabet, "seed": rng_seed})
    return rep


# -- hybrid lemma --------------------------------------------------------------------

N_COORDS = 3
SUBSETS = list(range(1 << N_COORDS))   # bitmask over coordinates


def _hybrid_terms(j: JointDistribution, g: Sequence[int]):
    """Left side, epsilon and delta of the hybrid bound on a joint over A, T, B, Z.

    ``A`` is a 3-bit value (bit ``i`` is coordinate ``i``), ``T`` a bitmask
    subset, and ``g[z]`` the subset revealed given ``Z = z``.
    """
    j = j.derive("W", lambda a, t: (t, a & t), ["A", "T"])
    j = j.derive("G", lambda a, z: a & g[z], ["A", "Z"])
    lhs = sd_information(j, "W", "B", ["Z", "G"])
    delta = sd_information(j, ["A", "B"], "T", "Z")
    eps = 0.0
    pz = j.table("Z")
    for zi, z in enumerate(j.alphabet("Z")):
        if pz[zi] <= 0:
            continue
        jz = j.condition(Z=z)
        pt = jz.table("T")
        base = jz.marginal(["A", "B"]).derive("G", lambda a, z=z: a & g[z], "A")
        for ti, tmask in enumerate(jz.alphabet("T")):
            if pt[ti] <= 0:
                continue
            jt = base.derive("At", lambda a, tm=tmask: a & tm, "A")
            eps += pz[zi] * pt[ti] * mutual_information(jt, "At", "B", "G")
    return lhs, eps, delta


def _hybrid_joint(rng, family: str) -> JointDistribution:
    axes = [("A", range(8)), ("T", SUBSETS), ("B", (0, 1)), ("Z", (0, 1))]
    if family == "random":
        return JointDistribution(axes, random_table(rng, (8, 8, 2, 2)))
    if family == "t_independent":
        pabz = np.zeros((8, 2, 2))
        pz = random_table(rng, (2,))
        for z in range(2):
            pabz[:, :, z] = np.outer(random_table(rng, (8,)), random_table(rng, (2,))) * pz[z]
        pt = random_table(rng, (8,))
        probs = np.einsum("abz,t->atbz", pabz, pt)
        return JointDistribution(axes, probs / probs.sum())
    if family == "t_function_of_z":
        h = [int(x) for x in rng.integers(0, 8, size=2)]
        pabz = random_table(rng, (8, 2, 2))
        probs = np.zeros((8, 8, 2, 2))
        for z in range(2):
            probs[:, h[z], :, z] = pabz[:, :, z]
        return JointDistribution(axes, probs)
    raise ParameterError(f"unknown family {family!r}")


def check_hybrid_lemma(batch: int = 100, rng_seed: int = 0, tol: float = 1e-9,
                       family: str = "random") -> dict:
    """Check ``LHS <= 2 sqrt(eps) + 2 delta`` exactly on ``batch`` random joints.

    Families: ``random`` (Dirichlet tables), ``t_independent`` (T independent
    of the rest, A independent of B given Z) and ``t_function_of_z``.
    """
    worst = -math.inf
    rows = []
    for b in range(batch):
        rng = np.random.default_rng(derive_seed(rng_seed, "hybrid", family, b))
        j = _hybrid_joint(rng, family)
        g = [int(x) for x in rng.integers(0, 8, size=2)]
        lhs, eps, delta = _hybrid_terms(j, g)
        bound = 2 * math.sqrt(max(eps, 0.0)) + 2 * delta
        worst = max(worst, lhs - bound)
        rows.append({"lhs": lhs, "eps": eps, "delta": delta, "bound": bound, "digest": j.digest()})
    violations = sum(r["lhs"] > r["bound"] + tol for r in rows)
    return {"batch": batch, "seed": rng_seed, "tol": tol, "family": family,
            "violations": int(violations), "max_violation": float(max(worst, 0.0)),
            "pass": violations == 0,
            "max_lhs": max(r["lhs"] for r in rows), "max_delta": max(r["delta"] for r in rows),
            "min_slack": min(r["bound"] - r["lhs"] for r in rows)}
