import os
import random

import pytest
from hypothesis import settings

from pcfgdist.corpus import random_corpus
from pcfgdist.grammar import parse_grammar

# fixed examples by default; HYPOTHESIS_PROFILE=random draws fresh ones
settings.register_profile("repro", derandomize=True)
settings.register_profile("random", derandomize=False, max_examples=200)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "repro"))

GEOMETRIC = "start: S\nS -> a S [0.4]\nS -> b [0.6]\n"
GEOMETRIC_HALF = "start: S\nS -> a S [0.5]\nS -> b [0.5]\n"
SUPERCRITICAL = "start: S\nS -> S S [0.6]\nS -> a [0.4]\n"
CLASSIC_PCP = (("a", "baa"), ("ab", "aa"), ("bba", "bb"))

# small hand-written grammars exercising unit rules, long right-hand sides,
# the start epsilon rule and ambiguity
HAND_GRAMMARS = [
    GEOMETRIC,
    "S -> S S [0.3]\nS -> a [0.5]\nS -> b [0.2]\n",
    "S -> A [0.3]\nA -> a [1]\nS -> b [0.7]\n",
    "S -> a S b [0.5]\nS -> a b [0.5]\n",
    "start: S\nS -> [0.2]\nS -> A B [0.8]\nA -> a A [0.3]\nA -> a [0.7]\nB -> b [0.6]\nB -> A c B [0.4]\n",
    "S -> A [0.5]\nS -> B [0.5]\nA -> a A [0.4]\nA -> a [0.6]\nB -> a [0.5]\nB -> a a B [0.5]\n",
    "S -> a B c [0.25]\nS -> C [0.75]\nB -> b [0.9]\nB -> S [0.1]\nC -> c [0.6]\nC -> b b [0.4]\n",
]


@pytest.fixture
def geometric():
    return parse_grammar(GEOMETRIC)


@pytest.fixture
def geometric_half():
    return parse_grammar(GEOMETRIC_HALF)


@pytest.fixture
def supercritical():
    return parse_grammar(SUPERCRITICAL)


@pytest.fixture(scope="session")
def hand_grammars():
    return [parse_grammar(t) for t in HAND_GRAMMARS]


@pytest.fixture(scope="session")
def corpus():
    return random_corpus(24, seed=20141)


@pytest.fixture
def rng():
    return random.Random(12345)
