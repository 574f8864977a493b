"""Most probable string of a consistent PCFG by exhaustive, tail-certified enumeration."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .errors import BudgetExhaustedError, InconsistentGrammarError
from .grammar import Pcfg, ensure_binarized
from .inside import is_consistent, string_probability, support_layer, tail_mass

DEFAULT_MAX_LENGTH = 20


@dataclass(frozen=True)
class ConsensusResult:
    """Outcome of the search.

    ``certified_at_length`` is the length ``n`` at which the halting test
    succeeded: every string shorter than ``n`` was examined and the mass of
    all longer strings, ``remaining``, is below ``probability``.
    """

    witness: tuple[str, ...]
    probability: float
    certified_at_length: int
    strings_examined: int
    remaining: float
    certified: bool = True


def consensus_string(g: Pcfg, max_length: int = DEFAULT_MAX_LENGTH,
                     mode: str = "fast") -> ConsensusResult:
    """Enumerate lengths 0, 1, 2, ... until the best string beats the remaining mass.

    ``mode="reference"`` walks every string of each length over the
    grammar's alphabet and subtracts each probability from the remaining
    mass.  ``mode="fast"`` walks only the support (zero-probability strings
    change neither the best string nor the remaining mass) and reads the
    remaining mass off the length spectrum.  Ties keep the first string
    found, i.e. the shortest and then lexicographically least.

    Raises :class:`BudgetExhaustedError` (with an uncertified result) if
    lengths up to ``max_length`` do not suffice.
    """
    if mode not in ("fast", "reference"):
        raise ValueError(f"unknown mode {mode!r}")
    if max_length < 0:
        raise ValueError("max_length must be nonnegative")
    if not is_consistent(g):
        raise InconsistentGrammarError("consensus search needs a consistent grammar")
    bg = ensure_binarized(g)
    alphabet = bg.alphabet

    current_prob = 0.0
    current_best: tuple[str, ...] = ()
    remaining = 1.0
    examined = 0
    n = 0
    while True:
        if remaining < current_prob:
            return ConsensusResult(current_best, current_prob, n, examined, remaining)
        if n > max_length:
            result = ConsensusResult(current_best, current_prob, n, examined, remaining,
                                     certified=False)
            raise BudgetExhaustedError(
                f"no certified consensus string within length {max_length}", result)
        if mode == "reference":
            for w in itertools.product(alphabet, repeat=n):
                p = string_probability(bg, w)
                examined += 1
                remaining -= p
                if p > current_prob:
                    current_prob, current_best = p, w
        else:
            for w, p in support_layer(bg, n).items():
                examined += 1
                if p > current_prob:
                    current_prob, current_best = p, w
            remaining = tail_mass(bg, n)
        n += 1
