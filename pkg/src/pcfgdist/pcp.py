"""Post Correspondence Problem instances encoded as PCFGs, for building test fixtures.

For pairs ``(u_i, v_i)``, ``i = 1..n``, two grammars are built over the
pair alphabet plus fresh index symbols ``#1..#n``:

    S1 -> u_i S1 #i | u_i #i        S2 -> v_i S2 #i | v_i #i

with every rule weighted ``1/(2n)``.  Their union under ``S0 -> S1 | S2``
(weights 1/2) is ambiguous exactly when the instance has a solution.
"""

from __future__ import annotations

import warnings
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

from .grammar import Pcfg, Rule, tokenize

INDEX_PREFIXES = ("#", "$", "%", "&", "@", "!")


@dataclass(frozen=True)
class PcpInstance:
    """Pairs of non-empty strings; every character is one alphabet symbol."""

    pairs: tuple[tuple[str, str], ...]

    def __post_init__(self):
        pairs = tuple((str(u), str(v)) for u, v in self.pairs)
        object.__setattr__(self, "pairs", pairs)
        if not pairs:
            raise ValueError("a PCP instance needs at least one pair")
        for u, v in pairs:
            if not u or not v:
                raise ValueError("empty pair components are not supported")
            if any(c.isspace() or c == "'" for c in u + v):
                raise ValueError("pair strings must not contain whitespace or quotes")

    @property
    def n(self) -> int:
        return len(self.pairs)

    @property
    def alphabet(self) -> frozenset[str]:
        return frozenset("".join(u + v for u, v in self.pairs))

    @classmethod
    def parse(cls, text: str) -> "PcpInstance":
        """One ``u v`` pair per line; blank lines and ``#`` comment lines are skipped."""
        pairs = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValueError(f"line {lineno}: expected two strings, got {len(parts)}")
            pairs.append((parts[0], parts[1]))
        return cls(tuple(pairs))


@dataclass(frozen=True)
class IndexAlphabet:
    symbols: tuple[str, ...]
    renamed: bool = False

    @classmethod
    def for_instance(cls, instance: PcpInstance) -> "IndexAlphabet":
        """``#1..#n``, or another prefix if ``#`` already occurs in the pairs."""
        for k, prefix in enumerate(INDEX_PREFIXES):
            if prefix not in instance.alphabet:
                symbols = tuple(f"{prefix}{i}" for i in range(1, instance.n + 1))
                if k:
                    warnings.warn(f"'#' occurs in the PCP alphabet; index symbols use "
                                  f"{prefix!r} instead", stacklevel=3)
                return cls(symbols, renamed=k > 0)
        raise ValueError("no free prefix for index symbols")

    def __contains__(self, symbol: str) -> bool:
        return symbol in self.symbols


def _half(instance: PcpInstance, index: IndexAlphabet, start: str, side: int) -> list[Rule]:
    w = 1.0 / (2 * instance.n)
    rules = []
    for pair, mark in zip(instance.pairs, index.symbols):
        body = tuple(pair[side])
        rules.append(Rule(start, body + (start, mark), w))
        rules.append(Rule(start, body + (mark,), w))
    return rules


def construct_pair(instance: PcpInstance) -> tuple[Pcfg, Pcfg]:
    """The two one-sided grammars (over ``u`` and over ``v``)."""
    index = IndexAlphabet.for_instance(instance)
    g1 = Pcfg.from_rules(_half(instance, index, "S1", 0), start="S1")
    g2 = Pcfg.from_rules(_half(instance, index, "S2", 1), start="S2")
    return g1, g2


def construct_g0(instance: PcpInstance) -> Pcfg:
    index = IndexAlphabet.for_instance(instance)
    rules = [Rule("S0", ("S1",), 0.5), Rule("S0", ("S2",), 0.5)]
    rules += _half(instance, index, "S1", 0) + _half(instance, index, "S2", 1)
    return Pcfg.from_rules(rules, start="S0")


def tac_closed_form(n: int) -> float:
    """``1 / (16 n - 4)`` for an instance with ``n`` pairs.

    This is the squared-probability sum over the derivations of ``G0`` that
    go through one fixed side (``S1`` or ``S2``); summed over both sides the
    tree-auto-coemission of ``G0`` is twice this, ``1 / (8 n - 2)``.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    return 1.0 / (16 * n - 4)


def derivation_length(x: Sequence[str] | str, index: IndexAlphabet | Iterable[str]) -> int:
    """Number of index symbols in ``x = y z`` (``y`` plain, ``z`` all index symbols).

    Each derivation step of the encoded grammars emits exactly one index
    symbol, so this is the number of steps.
    """
    symbols = index.symbols if isinstance(index, IndexAlphabet) else tuple(index)
    marks = set(symbols)
    if isinstance(x, str):
        x = tokenize(x, marks)
    x = tuple(x)
    k = len(x)
    while k > 0 and x[k - 1] in marks:
        k -= 1
    if any(s in marks for s in x[:k]):
        raise ValueError("index symbol before a plain symbol")
    if k == len(x):
        raise ValueError("string has no index-symbol suffix")
    return len(x) - k


def solve_pcp_bounded(instance: PcpInstance, max_steps: int) -> tuple[int, ...] | None:
    """Shortest, then lexicographically least, solution with at most ``max_steps`` pairs.

    Breadth-first over index sequences (1-based), pruning any partial
    sequence whose two concatenations stop being prefix-compatible.
    """
    if max_steps < 1:
        raise ValueError("max_steps must be at least 1")
    frontier = deque([((), "", "")])
    for _ in range(max_steps):
        nxt = deque()
        for seq, top, bottom in frontier:
            for i, (u, v) in enumerate(instance.pairs, start=1):
                a, b = top + u, bottom + v
                if not (a.startswith(b) or b.startswith(a)):
                    continue
                s = seq + (i,)
                if a == b:
                    return s
                nxt.append((s, a, b))
        frontier = nxt
        if not frontier:
            return None
    return None


def encode_solution(instance: PcpInstance, solution: Sequence[int]) -> tuple[str, ...]:
    """The string both encoded grammars emit for ``solution`` (top side, then marks)."""
    index = IndexAlphabet.for_instance(instance)
    plain = "".join(instance.pairs[i - 1][0] for i in solution)
    return tuple(plain) + tuple(index.symbols[i - 1] for i in reversed(solution))
