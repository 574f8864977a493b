import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import string_table
from pcfgdist.consensus import consensus_string
from pcfgdist.corpus import random_pcfg
from pcfgdist.distance import (CERTIFIABLE_METRICS, Ambiguous, AmbiguityUnknown, Distinct,
                               Indistinguishable, Metric, ProbInterval, Verdict,
                               ambiguity_certificate, chebyshev_interval, decide_leq,
                               distance_interval, equivalence_test, truncated_metric)
from pcfgdist.errors import (BudgetExhaustedError, InconsistentGrammarError,
                             UncertifiableMetricError)
from pcfgdist.grammar import disjoint_copy, parse_grammar, single_string_grammar
from pcfgdist.inside import tail_mass
from pcfgdist.pcp import PcpInstance, construct_g0, construct_pair

seeds = st.integers(min_value=0, max_value=10**9)
metrics = st.sampled_from(sorted(CERTIFIABLE_METRICS, key=lambda m: m.value))

# slack for float rounding when comparing enclosures computed at different lengths
SLACK = 1e-12


def corpus_grammar(seed):
    return random_pcfg(random.Random(seed))


def exact_metric(metric, p, q):
    """Metric value from two finite string tables (the support oracle)."""
    keys = set(p) | set(q)
    a = [p.get(w, 0.0) for w in keys]
    b = [q.get(w, 0.0) for w in keys]
    if metric is Metric.L1:
        return math.fsum(abs(x - y) for x, y in zip(a, b))
    if metric is Metric.VARIATION:
        return 0.5 * math.fsum(abs(x - y) for x, y in zip(a, b))
    if metric is Metric.L2:
        return math.sqrt(math.fsum((x - y) ** 2 for x, y in zip(a, b)))
    if metric is Metric.LINF:
        return max((abs(x - y) for x, y in zip(a, b)), default=0.0)
    if metric is Metric.HELLINGER:
        return 0.5 * math.fsum((math.sqrt(x) - math.sqrt(y)) ** 2 for x, y in zip(a, b))
    if metric is Metric.COEMISSION:
        return math.fsum(x * y for x, y in zip(a, b))
    if metric is Metric.JENSEN_SHANNON:
        total = []
        for x, y in zip(a, b):
            m = (x + y) / 2
            if x > 0:
                total.append(x * math.log2(x / m))
            if y > 0:
                total.append(y * math.log2(y / m))
        return math.fsum(total)
    raise ValueError(metric)


class TestExamples:
    def test_disjoint_pair(self, geometric):
        other = disjoint_copy(geometric)
        n = 20
        expected = {Metric.L1: 2.0, Metric.VARIATION: 1.0, Metric.HELLINGER: 1.0,
                    Metric.JENSEN_SHANNON: 2.0, Metric.COEMISSION: 0.0}
        for metric, value in expected.items():
            res = truncated_metric(geometric, other, metric, n)
            assert res.certified
            assert res.interval.contains(value, slack=SLACK), (metric, res.interval)

    def test_self_distance(self, geometric):
        for metric in set(CERTIFIABLE_METRICS) - {Metric.COEMISSION}:
            res = truncated_metric(geometric, geometric, metric, 10)
            assert res.interval.lo == 0.0
            res = distance_interval(geometric, geometric, metric, eps=1e-6)
            assert 0.0 <= res.interval.lo <= res.interval.hi <= 2e-6

    def test_geometric_pair_width(self, geometric, geometric_half):
        res = truncated_metric(geometric, geometric_half, Metric.L1, 12)
        assert res.interval.width <= 0.4 ** 12 + 0.5 ** 12 + 1e-13
        # exact L1 of the two geometric laws
        exact = math.fsum(abs(0.6 * 0.4 ** k - 0.5 * 0.5 ** k) for k in range(200))
        assert res.interval.contains(exact, slack=SLACK)

    def test_disjoint_interval_midpoint(self, geometric):
        res = distance_interval(geometric, disjoint_copy(geometric), Metric.L1, eps=1e-4)
        assert abs(res.estimate - 2.0) <= 1e-4

    def test_coemission_with_dummy(self, geometric):
        dummy = single_string_grammar(("x", "y"))
        res = truncated_metric(geometric, dummy, Metric.COEMISSION, 2)
        assert res.interval.lo == 0.0
        assert res.interval.hi <= 1e-12
        assert distance_interval(geometric, dummy, Metric.COEMISSION, eps=1e-9).interval.contains(0)

    def test_uncertifiable(self, geometric, geometric_half):
        for metric in (Metric.KULLBACK_LEIBLER, Metric.CHI_SQUARED):
            with pytest.raises(UncertifiableMetricError):
                distance_interval(geometric, geometric_half, metric)
            res = truncated_metric(geometric, geometric_half, metric, 8)
            assert not res.certified and res.interval.hi == math.inf
            assert not res.divergence_detected

    def test_kl_divergence_signal(self, geometric):
        other = parse_grammar("S -> a a S [0.4]\nS -> b [0.6]\n")
        res = truncated_metric(geometric, other, Metric.KULLBACK_LEIBLER, 4)
        assert res.divergence_detected and res.certified
        assert res.interval.lo == res.interval.hi == math.inf
        assert res.witness == ("a", "b")
        # the other direction has a support inclusion, so no signal
        back = truncated_metric(other, geometric, Metric.KULLBACK_LEIBLER, 6)
        assert not back.divergence_detected

    def test_kl_value(self, geometric, geometric_half):
        res = truncated_metric(geometric, geometric_half, Metric.KULLBACK_LEIBLER, 60)
        exact = math.fsum(0.6 * 0.4 ** k * math.log2(0.6 * 0.4 ** k / (0.5 * 0.5 ** k))
                          for k in range(200))
        assert res.interval.lo == pytest.approx(exact, abs=1e-9)

    def test_inconsistent_rejected(self, geometric, supercritical):
        with pytest.raises(InconsistentGrammarError):
            truncated_metric(geometric, supercritical, Metric.L1, 3)

    def test_budget_exhausted(self, geometric, geometric_half):
        with pytest.raises(BudgetExhaustedError) as info:
            distance_interval(geometric, geometric_half, Metric.L1, eps=1e-9, max_length=5)
        assert info.value.result.truncation_length == 5

    def test_interval_helpers(self):
        a = ProbInterval(0.1, 0.3, 4)
        assert a.width == pytest.approx(0.2)
        assert a.midpoint == pytest.approx(0.2)
        assert a.contains(0.3) and not a.contains(0.31)
        assert ProbInterval(0.15, 0.2, 5).within(a)
        with pytest.raises(ValueError):
            ProbInterval(0.3, 0.1, 0)


class TestChebyshev:
    def test_geometric_pair(self, geometric, geometric_half):
        res = chebyshev_interval(geometric, geometric_half)
        assert res.interval.lo == pytest.approx(0.1, abs=1e-15)
        assert res.interval.hi == res.interval.lo
        assert res.witness == ("b",)
        assert res.truncation_length == 4

    def test_consensus_link(self, hand_grammars):
        for g in hand_grammars:
            res = chebyshev_interval(g, disjoint_copy(g), eps=1e-6)
            cs = consensus_string(g)
            assert abs(res.interval.midpoint - cs.probability) <= res.interval.width + SLACK

    def test_equal_grammars_never_certify(self, geometric):
        with pytest.raises(BudgetExhaustedError) as info:
            chebyshev_interval(geometric, geometric, max_length=12)
        res = info.value.result
        assert res.interval.lo == 0.0
        assert res.interval.hi == pytest.approx(0.4 ** 12, rel=1e-9)


class TestDecide:
    def test_geometric_pair(self, geometric, geometric_half):
        assert decide_leq(geometric, geometric_half, Metric.LINF, 0.5).verdict is Verdict.YES
        no = decide_leq(geometric, geometric_half, Metric.LINF, 0.05)
        assert no.verdict is Verdict.NO
        assert no.result.truncation_length == 1

    def test_boundary_unknown(self, geometric):
        for budget in (3, 10):
            d = decide_leq(geometric, geometric, Metric.LINF, 0.0, max_length=budget)
            assert d.verdict is Verdict.UNKNOWN

    def test_uncertifiable(self, geometric):
        with pytest.raises(UncertifiableMetricError):
            decide_leq(geometric, geometric, Metric.KULLBACK_LEIBLER, 1.0)


class TestEquivalence:
    def test_geometric_pair(self, geometric, geometric_half):
        res = equivalence_test(geometric, geometric_half)
        assert isinstance(res, Distinct)
        assert res.witness == ("b",)
        assert (res.p1, res.p2) == pytest.approx((0.6, 0.5))

    def test_self(self, geometric):
        assert equivalence_test(geometric, geometric, max_length=9) == Indistinguishable(9)

    def test_pcp_halves(self):
        g1, g2 = construct_pair(PcpInstance((("ab", "a"), ("b", "bb"))))
        res = equivalence_test(g1, g2)
        assert isinstance(res, Distinct)
        # length 3: "ab#1" is only in G1, "a#1" (length 2) only in G2
        assert res.witness == ("a", "#1")
        assert (res.p1, res.p2) == (0.0, 0.25)


class TestAmbiguity:
    def test_binary_tree(self):
        g = parse_grammar("S -> S S [0.4]\nS -> a [0.6]\n")
        res = ambiguity_certificate(g)
        assert res == Ambiguous(("a", "a", "a"), 3, "multiplicity")

    def test_unambiguous(self, geometric):
        assert ambiguity_certificate(geometric, max_length=15) == AmbiguityUnknown(15)

    def test_solvable_pcp(self):
        g0 = construct_g0(PcpInstance((("a", "ab"), ("bc", "c"))))
        res = ambiguity_certificate(g0)
        assert isinstance(res, Ambiguous)
        assert res.witness == ("a", "b", "c", "#2", "#1")


class TestProperties:
    @given(seeds, seeds, metrics)
    @settings(max_examples=40, deadline=None)
    def test_nested_and_sound(self, s1, s2, metric):
        g1, g2 = corpus_grammar(s1), corpus_grammar(s2)
        previous = None
        for n in range(0, 10):
            res = truncated_metric(g1, g2, metric, n)
            assert res.interval.lo <= res.interval.hi
            if previous is not None:
                assert res.interval.within(previous, slack=SLACK)
            previous = res.interval
        # exact value over a finite superset of the strings up to length 6
        p, q = string_table(g1, 6), string_table(g2, 6)
        value = exact_metric(metric, p, q)
        res = truncated_metric(g1, g2, metric, 6)
        assert res.interval.lo == pytest.approx(value, rel=1e-9, abs=1e-12)

    @given(seeds, seeds, metrics, st.integers(0, 12))
    @settings(max_examples=40, deadline=None)
    def test_symmetric(self, s1, s2, metric, n):
        g1, g2 = corpus_grammar(s1), corpus_grammar(s2)
        a = truncated_metric(g1, g2, metric, n)
        b = truncated_metric(g2, g1, metric, n)
        assert (a.interval.lo, a.interval.hi) == (b.interval.lo, b.interval.hi)

    @given(seeds, st.integers(0, 12))
    @settings(max_examples=30, deadline=None)
    def test_variation_is_half_l1(self, seed, n):
        g1, g2 = corpus_grammar(seed), corpus_grammar(seed + 1)
        l1 = truncated_metric(g1, g2, Metric.L1, n).interval
        v = truncated_metric(g1, g2, Metric.VARIATION, n).interval
        assert (v.lo, v.hi) == (l1.lo / 2, l1.hi / 2)

    @given(seeds, st.integers(0, 12))
    @settings(max_examples=30, deadline=None)
    def test_l2_coemission_identity(self, seed, n):
        g1, g2 = corpus_grammar(seed), corpus_grammar(seed + 1)
        l2 = truncated_metric(g1, g2, Metric.L2, n).interval.lo
        ac1 = truncated_metric(g1, g1, Metric.COEMISSION, n).interval.lo
        ac2 = truncated_metric(g2, g2, Metric.COEMISSION, n).interval.lo
        coem = truncated_metric(g1, g2, Metric.COEMISSION, n).interval.lo
        assert l2 * l2 == pytest.approx(ac1 - 2 * coem + ac2, abs=1e-12)

    @given(seeds)
    @settings(max_examples=20, deadline=None)
    def test_self_distance_zero(self, seed):
        g = corpus_grammar(seed)
        for metric in set(CERTIFIABLE_METRICS) - {Metric.COEMISSION}:
            res = truncated_metric(g, g, metric, 8)
            assert res.interval.lo == 0.0
            t = tail_mass(g, 8)
            assert res.interval.hi <= 2 * t + 1e-11

    @given(seeds)
    @settings(max_examples=20, deadline=None)
    def test_chebyshev_matches_consensus(self, seed):
        g = corpus_grammar(seed)
        res = chebyshev_interval(g, disjoint_copy(g), eps=1e-6)
        cs = consensus_string(g)
        assert res.interval.contains(cs.probability, slack=SLACK)
        assert res.witness == cs.witness

    @given(seeds, seeds)
    @settings(max_examples=20, deadline=None)
    def test_divergence_signal_iff_support_violation(self, s1, s2):
        g1, g2 = corpus_grammar(s1), corpus_grammar(s2)
        n = 6
        p, q = string_table(g1, n), string_table(g2, n)
        violated = any(v > 1e-12 and w not in q for w, v in p.items())
        res = truncated_metric(g1, g2, Metric.KULLBACK_LEIBLER, n)
        assert res.divergence_detected == violated
