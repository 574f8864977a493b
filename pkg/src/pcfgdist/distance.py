"""Certified enclosures of distances between two PCFG distributions.

Every quantity is a sum over all strings.  The part over strings of length at
most ``n`` is computed exactly (up to floating point); the rest is bounded
using the tail masses ``t1``, ``t2`` of the two grammars beyond ``n``:

* L1: ``|a - b| <= a + b``, so the tail adds at most ``t1 + t2``.
* variation: half of L1.
* L2 (squared sum): ``(a - b)^2 <= a^2 + b^2`` and ``sum a_i^2 <= (sum a_i)^2``,
  so at most ``t1^2 + t2^2``.
* Linf: any single string beyond ``n`` has probability at most its tail.
* Hellinger (``1/2 sum (sqrt a - sqrt b)^2``): ``(sqrt a - sqrt b)^2 <= a + b``,
  so at most ``(t1 + t2) / 2``.
* Jensen-Shannon (base 2): each log ratio is at most 1, so at most ``t1 + t2``.
* coemission: ``sum a_i b_i <= (sum a_i)(sum b_i) = t1 * t2``.

The truncated sums and the tails are rounded along different paths, so the
summed bounds get their upper end widened by the usual recursive-summation
error bound, ``(k + 8) * eps_machine * (1 + hi)`` for ``k`` summed terms.  Linf
involves no arithmetic beyond ``max`` and is left exact, so that it can
still certify with a zero-width interval.

KL and chi-squared terms are unbounded, so those are reported as uncertified
point values unless a support violation proves divergence.
"""

from __future__ import annotations

import enum
import math
import sys
from dataclasses import dataclass
from functools import lru_cache

from .errors import BudgetExhaustedError, InconsistentGrammarError, UncertifiableMetricError
from .grammar import BinarizedPcfg, Pcfg, ensure_binarized
from .inside import (is_consistent, multiplicity_layer, support_layer, tail_mass,
                     tree_auto_coemission)

DEFAULT_MAX_LENGTH = 20
DEFAULT_EPS = 1e-6
DIFFERENCE_THRESHOLD = 1e-10
SUPPORT_THRESHOLD = 1e-12
AMBIGUITY_SLACK = 1e-9


def _widen(hi: float, terms: int) -> float:
    return hi + (terms + 8) * sys.float_info.epsilon * (1.0 + hi)


class Metric(str, enum.Enum):
    L1 = "l1"
    L2 = "l2"
    LINF = "linf"
    VARIATION = "variation"
    HELLINGER = "hellinger"
    JENSEN_SHANNON = "jensen_shannon"
    CHI_SQUARED = "chi_squared"
    KULLBACK_LEIBLER = "kullback_leibler"
    COEMISSION = "coemission"

    @property
    def certifiable(self) -> bool:
        return self not in (Metric.CHI_SQUARED, Metric.KULLBACK_LEIBLER)


CERTIFIABLE_METRICS = tuple(m for m in Metric if m.certifiable)


@dataclass(frozen=True)
class ProbInterval:
    lo: float
    hi: float
    budget: int

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def midpoint(self) -> float:
        if math.isinf(self.hi):
            return self.lo
        return 0.5 * (self.lo + self.hi)

    def contains(self, x: float, slack: float = 0.0) -> bool:
        return self.lo - slack <= x <= self.hi + slack

    def within(self, other: "ProbInterval", slack: float = 0.0) -> bool:
        return other.lo - slack <= self.lo and self.hi <= other.hi + slack


@dataclass(frozen=True)
class DistanceResult:
    metric: Metric
    interval: ProbInterval
    certified: bool
    truncation_length: int
    witness: tuple[str, ...] | None = None
    divergence_detected: bool = False

    @property
    def estimate(self) -> float:
        return self.interval.midpoint


# ---------------------------------------------------------------------------
# per-length accumulation over the union of both supports


def _js_term(p: float, q: float) -> float:
    m = p + q
    t = 0.0
    if p > 0.0:
        t += p * math.log2(2.0 * p / m)
    if q > 0.0:
        t += q * math.log2(2.0 * q / m)
    return t


@dataclass
class _Totals:
    l1: float = 0.0
    l2sq: float = 0.0
    hellinger2: float = 0.0  # sum of (sqrt p - sqrt q)^2, halved on output
    js: float = 0.0
    coem: float = 0.0
    kl: float = 0.0
    chi2: float = 0.0
    linf: float = 0.0
    terms: int = 0
    linf_witness: tuple[str, ...] | None = None
    kl_violation: tuple[str, ...] | None = None
    chi2_violation: tuple[str, ...] | None = None


class _PairWalk:
    """Running sums for a grammar pair, one snapshot per completed length."""

    def __init__(self, bg1: BinarizedPcfg, bg2: BinarizedPcfg):
        self.bg1, self.bg2 = bg1, bg2
        self.snapshots: list[_Totals] = []
        self.first_difference: tuple[tuple[str, ...], float, float] | None = None

    def upto(self, n: int) -> _Totals:
        while len(self.snapshots) <= n:
            self._advance(len(self.snapshots))
        return self.snapshots[n]

    def _advance(self, n: int):
        prev = self.snapshots[-1] if self.snapshots else _Totals()
        t = _Totals(**vars(prev))
        s1, s2 = support_layer(self.bg1, n), support_layer(self.bg2, n)
        l1 = l2sq = h2 = js = coem = kl = chi2 = 0.0
        for w in sorted(s1.keys() | s2.keys()):
            p, q = s1.get(w, 0.0), s2.get(w, 0.0)
            d = abs(p - q)
            l1 += d
            l2sq += d * d
            h2 += (math.sqrt(p) - math.sqrt(q)) ** 2
            js += _js_term(p, q)
            coem += p * q
            if d > t.linf:
                t.linf, t.linf_witness = d, w
            if d > DIFFERENCE_THRESHOLD and self.first_difference is None:
                self.first_difference = (w, p, q)
            if q > 0.0:
                if p > 0.0:
                    kl += p * math.log2(p / q)
                chi2 += (p - q) ** 2 / q
            elif p > SUPPORT_THRESHOLD:
                if t.kl_violation is None:
                    t.kl_violation = w
                if t.chi2_violation is None:
                    t.chi2_violation = w
        t.terms += len(s1.keys() | s2.keys()) + 1
        t.l1 += l1
        t.l2sq += l2sq
        t.hellinger2 += h2
        t.js += js
        t.coem += coem
        t.kl += kl
        t.chi2 += chi2
        self.snapshots.append(t)


@lru_cache(maxsize=256)
def _walk(bg1: BinarizedPcfg, bg2: BinarizedPcfg) -> _PairWalk:
    return _PairWalk(bg1, bg2)


def _require_consistent(*grammars: Pcfg):
    for g in grammars:
        if not is_consistent(g):
            raise InconsistentGrammarError("distances need consistent grammars")


def _prepare(g1, g2):
    bg1, bg2 = ensure_binarized(g1), ensure_binarized(g2)
    _require_consistent(bg1.source, bg2.source)
    return bg1, bg2


def truncated_metric(g1: Pcfg, g2: Pcfg, metric: Metric | str, n: int) -> DistanceResult:
    """Enclosure of ``metric(g1, g2)`` from all strings of length at most ``n``."""
    metric = Metric(metric)
    if n < 0:
        raise ValueError("truncation length must be nonnegative")
    bg1, bg2 = _prepare(g1, g2)
    t = _walk(bg1, bg2).upto(n)
    t1, t2 = tail_mass(bg1, n), tail_mass(bg2, n)

    witness = None
    certified = True
    divergent = False
    if metric in (Metric.L1, Metric.VARIATION):
        lo, hi = t.l1, _widen(t.l1 + (t1 + t2), t.terms)
        if metric is Metric.VARIATION:
            lo, hi = lo * 0.5, hi * 0.5
    elif metric is Metric.L2:
        lo, hi = math.sqrt(t.l2sq), _widen(math.sqrt(t.l2sq + (t1 * t1 + t2 * t2)), t.terms)
    elif metric is Metric.LINF:
        lo, hi = t.linf, max(t.linf, t1, t2)
        witness = t.linf_witness
    elif metric is Metric.HELLINGER:
        lo = 0.5 * t.hellinger2
        hi = _widen(lo + 0.5 * (t1 + t2), t.terms)
    elif metric is Metric.JENSEN_SHANNON:
        lo, hi = t.js, _widen(t.js + (t1 + t2), t.terms)
    elif metric is Metric.COEMISSION:
        lo, hi = t.coem, _widen(t.coem + t1 * t2, t.terms)
    else:
        violation = t.kl_violation if metric is Metric.KULLBACK_LEIBLER else t.chi2_violation
        if violation is not None:
            lo = hi = math.inf
            witness, divergent = violation, True
        else:
            lo = t.kl if metric is Metric.KULLBACK_LEIBLER else t.chi2
            hi = math.inf
            certified = False
    return DistanceResult(metric, ProbInterval(lo, hi, n), certified, n, witness, divergent)


def distance_interval(g1: Pcfg, g2: Pcfg, metric: Metric | str, eps: float = DEFAULT_EPS,
                      max_length: int = DEFAULT_MAX_LENGTH) -> DistanceResult:
    """Grow the truncation until the enclosure is at most ``2 * eps`` wide.

    The midpoint (``result.estimate``) is then within ``eps`` of the true value.
    """
    metric = Metric(metric)
    if not metric.certifiable:
        raise UncertifiableMetricError(f"{metric.value} admits no certified tail bound")
    if eps <= 0:
        raise ValueError("eps must be positive")
    result = None
    for n in range(max_length + 1):
        result = truncated_metric(g1, g2, metric, n)
        if result.interval.width <= 2 * eps:
            return result
    raise BudgetExhaustedError(
        f"{metric.value} interval still wider than {2 * eps:g} at length {max_length}", result)


def chebyshev_interval(g1: Pcfg, g2: Pcfg, eps: float = 0.0,
                       max_length: int = DEFAULT_MAX_LENGTH) -> DistanceResult:
    """Enclose the largest per-string difference, ``[best, max(best, t1, t2)]``.

    With ``eps = 0`` this halts exactly when the best difference found
    dominates both tails, which never happens for equivalent grammars with
    infinite support.
    """
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    result = None
    for n in range(max_length + 1):
        result = truncated_metric(g1, g2, Metric.LINF, n)
        if result.interval.width <= eps:
            return result
    raise BudgetExhaustedError(f"Linf interval not certified within length {max_length}", result)


class Verdict(str, enum.Enum):
    YES = "yes"
    NO = "no"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class Decision:
    verdict: Verdict
    result: DistanceResult


def decide_leq(g1: Pcfg, g2: Pcfg, metric: Metric | str, k: float,
               max_length: int = DEFAULT_MAX_LENGTH) -> Decision:
    """Answer ``metric(g1, g2) <= k`` from growing enclosures.

    ``yes`` once the upper end is at most ``k``, ``no`` once the lower end
    exceeds it, ``unknown`` if the budget runs out first.  When the distance
    equals ``k`` exactly the lower end never exceeds ``k`` and the upper end
    may never reach it, so the answer can stay ``unknown`` at every budget.
    """
    metric = Metric(metric)
    if not metric.certifiable:
        raise UncertifiableMetricError(f"{metric.value} admits no certified tail bound")
    result = None
    for n in range(max_length + 1):
        result = truncated_metric(g1, g2, metric, n)
        if result.interval.hi <= k:
            return Decision(Verdict.YES, result)
        if result.interval.lo > k:
            return Decision(Verdict.NO, result)
    return Decision(Verdict.UNKNOWN, result)


# ---------------------------------------------------------------------------
# semi-decision procedures


@dataclass(frozen=True)
class Distinct:
    witness: tuple[str, ...]
    p1: float
    p2: float


@dataclass(frozen=True)
class Indistinguishable:
    up_to: int


def equivalence_test(g1: Pcfg, g2: Pcfg,
                     max_length: int = DEFAULT_MAX_LENGTH) -> Distinct | Indistinguishable:
    """First string (shortest, then lexicographic) whose probabilities differ by > 1e-10.

    Agreement up to the budget proves nothing about longer strings.
    """
    bg1, bg2 = _prepare(g1, g2)
    walk = _walk(bg1, bg2)
    for n in range(max_length + 1):
        walk.upto(n)
        if walk.first_difference is not None:
            w, p, q = walk.first_difference
            return Distinct(w, p, q)
    return Indistinguishable(max_length)


@dataclass(frozen=True)
class Ambiguous:
    witness: tuple[str, ...] | None
    length: int
    detector: str


@dataclass(frozen=True)
class AmbiguityUnknown:
    budget: int


def ambiguity_certificate(g: Pcfg,
                          max_length: int = DEFAULT_MAX_LENGTH) -> Ambiguous | AmbiguityUnknown:
    """Look for proof of ambiguity up to ``max_length``.

    Two detectors: a string with two or more left-most derivations, or a
    truncated auto-coemission (sum of squared string probabilities) already
    exceeding the tree-auto-coemission, which only an ambiguous grammar can
    do.  Unambiguity is never certified.
    """
    bg = ensure_binarized(g)
    _require_consistent(bg.source)
    tac = tree_auto_coemission(bg.source)
    ac = 0.0
    for n in range(max_length + 1):
        for w, count in multiplicity_layer(bg, n).items():
            if count >= 2:
                return Ambiguous(w, n, "multiplicity")
        ac += math.fsum(p * p for p in support_layer(bg, n).values())
        if ac > tac + AMBIGUITY_SLACK:
            return Ambiguous(None, n, "auto-coemission")
    return AmbiguityUnknown(max_length)
