"""Random small consistent PCFGs for property tests and experiments."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from .grammar import Pcfg, Rule, validate_proper
from .inside import derivation_counts, is_consistent, partition_function, spectral_radius

NONTERMINAL_NAMES = ("S", "A", "B", "C")
TERMINAL_NAMES = ("a", "b", "c")


@dataclass(frozen=True)
class CorpusConfig:
    max_nonterminals: int = 4
    max_terminals: int = 3
    max_rules_per_nonterminal: int = 3
    max_rhs_length: int = 3
    nonterminal_prob: float = 0.3
    # recursive, hence infinite support
    min_spectral_radius: float = 0.1
    # finite E[x ** len] at this x gives tail(n) <= E[x ** len] * x ** -(n + 1)
    length_moment_point: float = 1.8
    max_length_moment: float = 100.0
    # bound on derivations with yield length <= support_horizon, so that the
    # supports stay small enough to enumerate
    support_horizon: int = 23
    max_derivations: int = 20000
    max_attempts: int = 10000


def _random_rhs(rng: random.Random, nts, ts, cfg: CorpusConfig, terminal_only: bool):
    length = rng.randint(1, cfg.max_rhs_length)
    rhs = []
    for _ in range(length):
        if not terminal_only and rng.random() < cfg.nonterminal_prob:
            rhs.append(rng.choice(nts))
        else:
            rhs.append(rng.choice(ts))
    return tuple(rhs)


def _candidate(rng: random.Random, cfg: CorpusConfig) -> Pcfg | None:
    nts = list(NONTERMINAL_NAMES[: rng.randint(1, cfg.max_nonterminals)])
    ts = list(TERMINAL_NAMES[: rng.randint(1, cfg.max_terminals)])
    rules = []
    for a in nts:
        k = rng.randint(2, cfg.max_rules_per_nonterminal)
        rhss = {_random_rhs(rng, nts, ts, cfg, terminal_only=True)}
        while len(rhss) < k:
            rhss.add(_random_rhs(rng, nts, ts, cfg, terminal_only=False))
        raw = [rng.uniform(0.05, 1.0) for _ in rhss]
        total = sum(raw)
        for rhs, w in zip(sorted(rhss), raw):
            rules.append(Rule(a, rhs, w / total))
    try:
        g = Pcfg.from_rules(rules, start="S")
    except ValueError:
        return None
    if not validate_proper(g).is_proper:
        return None
    return g


def length_moment(g: Pcfg, x: float) -> float:
    """``E[x ** len(w)]`` under ``g``; ``inf`` when the tilted system diverges."""
    tilted = g.with_weights(
        [r.weight * x ** sum(s in g.terminals for s in r.rhs) for r in g.rules])
    pv = partition_function(tilted, 1e-12, max_iterations=20000)
    if not pv.converged:
        return math.inf
    return pv[g.start]


def random_pcfg(rng: random.Random, cfg: CorpusConfig = CorpusConfig()) -> Pcfg:
    """Proper, consistent, sub-critical grammar with an enumerable support."""
    for _ in range(cfg.max_attempts):
        g = _candidate(rng, cfg)
        if g is None:
            continue
        if spectral_radius(g) < cfg.min_spectral_radius:
            continue
        if length_moment(g, cfg.length_moment_point) > cfg.max_length_moment:
            continue
        if sum(derivation_counts(g, cfg.support_horizon)) > cfg.max_derivations:
            continue
        if not is_consistent(g):
            continue
        return g
    raise RuntimeError("could not draw a grammar satisfying the corpus constraints")


def random_corpus(size: int, seed: int = 0, cfg: CorpusConfig = CorpusConfig()) -> list[Pcfg]:
    rng = random.Random(seed)
    return [random_pcfg(rng, cfg) for _ in range(size)]
