"""Grammar data model, text format, properness checks and binarization.

Strings handled throughout the package are tuples of terminal names, so that
multi-character terminals such as ``#1`` are unambiguous.  Plain ``str``
arguments are accepted where convenient and tokenized against an alphabet.
"""

from __future__ import annotations

import math
import re
from collections import defaultdict
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, Mapping, Sequence

from .errors import GrammarSyntaxError, ImproperGrammarError

ARROW = "->"

_SAFE_NAME = re.compile(r"^[^\s'\[\]#]+$")
_RULE_LINE = re.compile(r"^(?P<lhs>\S+)\s*->(?P<rhs>.*?)\[(?P<weight>[^\]]*)\]\s*$")
_START_LINE = re.compile(r"^start\s*:\s*(?P<start>\S+)\s*$")
_TOKEN = re.compile(r"'(?P<quoted>[^']*)'|(?P<plain>[^\s']+)|(?P<bad>')")


@dataclass(frozen=True)
class Rule:
    lhs: str
    rhs: tuple[str, ...]
    weight: float

    def __post_init__(self):
        object.__setattr__(self, "rhs", tuple(self.rhs))
        if not self.lhs:
            raise ValueError("rule lhs must be a non-empty name")
        if not (math.isfinite(self.weight) and self.weight > 0):
            raise ValueError(f"rule weight must be positive and finite, got {self.weight!r}")

    def __str__(self):
        rhs = " ".join(self.rhs)
        return f"{self.lhs} -> {rhs} [{self.weight!r}]".replace("  ", " ")


@dataclass(frozen=True)
class Pcfg:
    """Weighted context-free grammar.

    Weights only need to be positive; whether they define a probability
    distribution over strings is a separate question (see
    :func:`pcfgdist.inside.is_consistent`).
    """

    terminals: frozenset[str]
    nonterminals: frozenset[str]
    rules: tuple[Rule, ...]
    start: str

    def __post_init__(self):
        object.__setattr__(self, "terminals", frozenset(self.terminals))
        object.__setattr__(self, "nonterminals", frozenset(self.nonterminals))
        object.__setattr__(self, "rules", tuple(self.rules))
        if self.start not in self.nonterminals:
            raise ValueError(f"start symbol {self.start!r} is not a nonterminal")
        if self.terminals & self.nonterminals:
            clash = sorted(self.terminals & self.nonterminals)
            raise ValueError(f"symbols declared both terminal and nonterminal: {clash}")
        seen = set()
        for r in self.rules:
            if r.lhs not in self.nonterminals:
                raise ValueError(f"rule lhs {r.lhs!r} is not a declared nonterminal")
            for s in r.rhs:
                if s not in self.nonterminals and s not in self.terminals:
                    raise ValueError(f"undeclared symbol {s!r} in rule {r}")
            if (r.lhs, r.rhs) in seen:
                raise ValueError(f"duplicate rule {r.lhs} -> {' '.join(r.rhs)}")
            seen.add((r.lhs, r.rhs))
        if not any(r.lhs == self.start for r in self.rules):
            raise ValueError(f"no rule has the start symbol {self.start!r} on its left")

    @classmethod
    def from_rules(cls, rules: Iterable[Rule | tuple], start: str | None = None,
                   terminals: Iterable[str] = ()) -> "Pcfg":
        """Build a grammar, inferring nonterminals from left-hand sides.

        ``rules`` may hold :class:`Rule` objects or ``(lhs, rhs, weight)``
        tuples, where ``rhs`` is a sequence of names or a space-separated str.
        """
        built = []
        for r in rules:
            if not isinstance(r, Rule):
                lhs, rhs, weight = r
                if isinstance(rhs, str):
                    rhs = tuple(rhs.split())
                r = Rule(lhs, tuple(rhs), float(weight))
            built.append(r)
        if not built:
            raise ValueError("a grammar needs at least one rule")
        nts = {r.lhs for r in built}
        ts = {s for r in built for s in r.rhs if s not in nts} | set(terminals)
        return cls(frozenset(ts), frozenset(nts), tuple(built), start or built[0].lhs)

    def rules_for(self, lhs: str) -> tuple[Rule, ...]:
        return tuple(r for r in self.rules if r.lhs == lhs)

    def with_weights(self, weights: Sequence[float]) -> "Pcfg":
        if len(weights) != len(self.rules):
            raise ValueError("one weight per rule is required")
        rules = tuple(Rule(r.lhs, r.rhs, float(w)) for r, w in zip(self.rules, weights))
        return Pcfg(self.terminals, self.nonterminals, rules, self.start)

    @property
    def alphabet(self) -> tuple[str, ...]:
        """Terminals in the canonical (lexicographic) enumeration order."""
        return tuple(sorted(self.terminals))

    def __str__(self):
        return serialize(self)


# ---------------------------------------------------------------------------
# text format


def _tokenize_rhs(text: str, lineno: int) -> list[tuple[str, bool]]:
    out = []
    for m in _TOKEN.finditer(text):
        if m.group("bad") is not None:
            raise GrammarSyntaxError("unbalanced quote", lineno)
        if m.group("quoted") is not None:
            if not m.group("quoted"):
                raise GrammarSyntaxError("empty quoted symbol", lineno)
            out.append((m.group("quoted"), True))
        else:
            out.append((m.group("plain"), False))
    return out


def parse_grammar(text: str) -> Pcfg:
    """Parse the line-oriented grammar format.

    ::

        # comment
        start: S
        S -> a S [0.4]
        S -> b [0.6]
        S -> 'S' [0.1]

    A symbol is a nonterminal iff it occurs on some left-hand side; quoted
    symbols are always terminals.  Comments take whole lines.  When the
    ``start:`` header is missing, the left-hand side of the first rule is used.
    """
    start = None
    raw_rules = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        m = _START_LINE.match(stripped)
        if m:
            if start is not None:
                raise GrammarSyntaxError("duplicate start header", lineno)
            start = m.group("start")
            continue
        m = _RULE_LINE.match(stripped)
        if not m:
            raise GrammarSyntaxError(f"cannot parse line {stripped!r}", lineno)
        lhs = m.group("lhs")
        if not _SAFE_NAME.match(lhs) or lhs == ARROW:
            raise GrammarSyntaxError(f"invalid nonterminal name {lhs!r}", lineno)
        try:
            weight = float(m.group("weight"))
        except ValueError:
            raise GrammarSyntaxError(f"invalid weight {m.group('weight')!r}", lineno) from None
        if not (math.isfinite(weight) and weight > 0):
            raise GrammarSyntaxError(f"nonpositive or non-finite weight {weight!r}", lineno)
        rhs = _tokenize_rhs(m.group("rhs"), lineno)
        raw_rules.append((lineno, lhs, rhs, weight))

    if not raw_rules:
        raise GrammarSyntaxError("grammar has no rules")
    nonterminals = {lhs for _, lhs, _, _ in raw_rules}
    if start is None:
        start = raw_rules[0][1]
    if start not in nonterminals:
        raise GrammarSyntaxError(f"undeclared start symbol {start!r} (no rule rewrites it)")

    terminals = set()
    rules = []
    seen = {}
    for lineno, lhs, rhs, weight in raw_rules:
        symbols = []
        for name, quoted in rhs:
            if quoted and name in nonterminals:
                raise GrammarSyntaxError(f"quoted terminal {name!r} is also a nonterminal", lineno)
            if quoted or name not in nonterminals:
                terminals.add(name)
            symbols.append(name)
        key = (lhs, tuple(symbols))
        if key in seen:
            raise GrammarSyntaxError(f"duplicate rule (first on line {seen[key]})", lineno)
        seen[key] = lineno
        rules.append(Rule(lhs, tuple(symbols), weight))
    return Pcfg(frozenset(terminals), frozenset(nonterminals), tuple(rules), start)


def _render_symbol(name: str, is_terminal: bool) -> str:
    if is_terminal and (not _SAFE_NAME.match(name) or name == ARROW or name.startswith("#")):
        return f"'{name}'"
    return name


def serialize(g: Pcfg) -> str:
    """Render ``g`` in the text format; :func:`parse_grammar` inverts it exactly."""
    for name in g.nonterminals:
        if not _SAFE_NAME.match(name):
            raise ValueError(f"nonterminal {name!r} cannot be written in the text format")
    for name in g.terminals:
        if "'" in name or any(c.isspace() for c in name):
            raise ValueError(f"terminal {name!r} cannot be written in the text format")
    lines = [f"start: {g.start}"]
    for r in g.rules:
        rhs = " ".join(_render_symbol(s, s in g.terminals) for s in r.rhs)
        sep = " " if rhs else ""
        lines.append(f"{r.lhs} ->{sep}{rhs} [{r.weight!r}]")
    return "\n".join(lines) + "\n"


def tokenize(text: str | Sequence[str], alphabet: Iterable[str]) -> tuple[str, ...]:
    """Split ``text`` into terminal names.

    Sequences are returned as tuples unchanged.  Strings containing whitespace
    are split on it; otherwise the longest alphabet symbol is matched greedily
    at each position.
    """
    if not isinstance(text, str):
        return tuple(text)
    if any(c.isspace() for c in text):
        return tuple(text.split())
    symbols = sorted(set(alphabet), key=len, reverse=True)
    out = []
    i = 0
    while i < len(text):
        for s in symbols:
            if s and text.startswith(s, i):
                out.append(s)
                i += len(s)
                break
        else:
            # unknown characters become single-character symbols
            out.append(text[i])
            i += 1
    return tuple(out)


def format_string(w: Sequence[str]) -> str:
    if all(len(s) == 1 for s in w):
        return "".join(w)
    return " ".join(w)


# ---------------------------------------------------------------------------
# properness


@dataclass(frozen=True)
class PropernessReport:
    cycle: tuple[str, ...] | None = None
    epsilon_violation: Rule | None = None
    useless_symbols: frozenset[str] = frozenset()

    @property
    def cycle_free(self) -> bool:
        return self.cycle is None

    @property
    def epsilon_ok(self) -> bool:
        return self.epsilon_violation is None

    @property
    def is_proper(self) -> bool:
        return self.cycle_free and self.epsilon_ok and not self.useless_symbols

    def describe(self) -> str:
        if self.is_proper:
            return "proper"
        parts = []
        if self.cycle:
            parts.append("unit cycle " + " -> ".join(self.cycle))
        if self.epsilon_violation is not None:
            parts.append(f"disallowed empty rule {self.epsilon_violation}")
        if self.useless_symbols:
            parts.append("useless symbols " + ", ".join(sorted(self.useless_symbols)))
        return "; ".join(parts)


def _nullable(g: Pcfg) -> set[str]:
    nullable: set[str] = set()
    changed = True
    while changed:
        changed = False
        for r in g.rules:
            if r.lhs not in nullable and all(s in nullable for s in r.rhs):
                nullable.add(r.lhs)
                changed = True
    return nullable


def _unit_edges(g: Pcfg) -> dict[str, list[str]]:
    nullable = _nullable(g)
    edges: dict[str, list[str]] = defaultdict(list)
    for r in g.rules:
        for i, s in enumerate(r.rhs):
            if s in g.nonterminals and all(
                t in nullable for j, t in enumerate(r.rhs) if j != i
            ):
                if s not in edges[r.lhs]:
                    edges[r.lhs].append(s)
    return edges


def _find_cycle(nodes: Iterable[str], edges: Mapping[str, list[str]]) -> tuple[str, ...] | None:
    WHITE, GREY, BLACK = 0, 1, 2
    color = defaultdict(int)
    stack: list[str] = []

    def visit(a):
        color[a] = GREY
        stack.append(a)
        for b in edges.get(a, ()):
            if color[b] == GREY:
                return tuple(stack[stack.index(b):]) + (b,)
            if color[b] == WHITE:
                found = visit(b)
                if found:
                    return found
        stack.pop()
        color[a] = BLACK
        return None

    for a in nodes:
        if color[a] == WHITE:
            found = visit(a)
            if found:
                return found
    return None


def validate_proper(g: Pcfg) -> PropernessReport:
    """Check the three properness clauses: cycle-free, epsilon-free, no useless symbols.

    Cycles are searched in the unit graph, where ``A -> B`` whenever some rule
    for ``A`` is ``B`` surrounded by nullable symbols only.
    """
    cycle = _find_cycle([g.start] + sorted(g.nonterminals - {g.start}), _unit_edges(g))

    violation = None
    start_on_rhs = any(g.start in r.rhs for r in g.rules)
    for r in g.rules:
        if not r.rhs and (r.lhs != g.start or start_on_rhs):
            violation = r
            break

    productive: set[str] = set()
    changed = True
    while changed:
        changed = False
        for r in g.rules:
            if r.lhs not in productive and all(
                s in g.terminals or s in productive for s in r.rhs
            ):
                productive.add(r.lhs)
                changed = True
    reached: set[str] = set()
    if g.start in productive:
        reached.add(g.start)
        frontier = [g.start]
        while frontier:
            a = frontier.pop()
            for r in g.rules_for(a):
                if all(s in g.terminals or s in productive for s in r.rhs):
                    for s in r.rhs:
                        if s not in reached:
                            reached.add(s)
                            if s in g.nonterminals:
                                frontier.append(s)
    useless = frozenset((g.terminals | g.nonterminals) - reached)
    return PropernessReport(cycle, violation, useless)


# ---------------------------------------------------------------------------
# binarization


@dataclass(frozen=True)
class BinaryRule:
    lhs: int
    left: int
    right: int
    weight: float
    origins: tuple[tuple[int, ...], ...]

    @property
    def count(self) -> int:
        return len(self.origins)


@dataclass(frozen=True)
class LexicalRule:
    lhs: int
    terminal: str
    weight: float
    origins: tuple[tuple[int, ...], ...]

    @property
    def count(self) -> int:
        return len(self.origins)


@dataclass(frozen=True, eq=False)
class BinarizedPcfg:
    """Internal form with rules ``A -> B C``, ``A -> a`` and optionally ``S -> ε``.

    Nonterminals are integers indexing ``names``.  Each internal rule keeps the
    original-rule index paths it stands for (unit chain followed by the rule
    itself; helper rules carry one empty path), so derivation counts are
    preserved: ``rule.count`` is the number of source fragments it merges.
    """

    source: Pcfg
    names: tuple[str, ...]
    start: int
    binary: tuple[BinaryRule, ...]
    lexical: tuple[LexicalRule, ...]
    epsilon_weight: float = 0.0
    epsilon_count: int = 0
    binary_by_left: Mapping[int, tuple[BinaryRule, ...]] = field(default=None, repr=False)
    lexical_by_terminal: Mapping[str, tuple[LexicalRule, ...]] = field(default=None, repr=False)

    def __post_init__(self):
        by_left = defaultdict(list)
        for r in self.binary:
            by_left[r.left].append(r)
        by_term = defaultdict(list)
        for r in self.lexical:
            by_term[r.terminal].append(r)
        object.__setattr__(self, "binary_by_left", {k: tuple(v) for k, v in by_left.items()})
        object.__setattr__(self, "lexical_by_terminal", {k: tuple(v) for k, v in by_term.items()})

    @property
    def terminals(self) -> frozenset[str]:
        return self.source.terminals

    @property
    def alphabet(self) -> tuple[str, ...]:
        return self.source.alphabet

    def rule_count(self) -> int:
        return len(self.binary) + len(self.lexical) + (1 if self.epsilon_count else 0)


def binarize(g: Pcfg) -> BinarizedPcfg:
    """Weight-preserving conversion to the internal binary form.

    Terminals inside long right-hand sides move to fresh preterminals
    (weight 1), long right-hand sides become right-branching chains with the
    original weight on the head, and unit rules are folded away by summing
    over every (finite, since the grammar is cycle-free) unit chain.
    """
    report = validate_proper(g)
    if not report.is_proper:
        raise ImproperGrammarError(report)
    return _binarize_cached(g)


@lru_cache(maxsize=256)
def _binarize_cached(g: Pcfg) -> BinarizedPcfg:
    names = sorted(g.nonterminals)
    names.remove(g.start)
    names.insert(0, g.start)
    index = {n: i for i, n in enumerate(names)}

    def fresh(name):
        index[name] = len(names)
        names.append(name)
        return index[name]

    preterminal: dict[str, int] = {}
    # (lhs, rhs) with rhs a terminal str, an int (unit) or an int pair
    pending: list[tuple[int, object, float, tuple[tuple[int, ...], ...]]] = []
    eps_weight, eps_count = 0.0, 0

    def sym(s):
        if s in g.nonterminals:
            return index[s]
        if s not in preterminal:
            preterminal[s] = fresh(f"@T:{s}")
            pending.append((preterminal[s], s, 1.0, ((),)))
        return preterminal[s]

    for ri, r in enumerate(g.rules):
        a = index[r.lhs]
        k = len(r.rhs)
        if k == 0:
            eps_weight, eps_count = r.weight, 1
        elif k == 1:
            s = r.rhs[0]
            rhs = index[s] if s in g.nonterminals else s
            pending.append((a, rhs, r.weight, ((ri,),)))
        else:
            syms = [sym(s) for s in r.rhs]
            lhs, weight, origins = a, r.weight, ((ri,),)
            for j in range(k - 2):
                nxt = fresh(f"@R{ri}.{j + 1}")
                pending.append((lhs, (syms[j], nxt), weight, origins))
                lhs, weight, origins = nxt, 1.0, ((),)
            pending.append((lhs, (syms[-2], syms[-1]), weight, origins))

    units: dict[int, list[tuple[int, float, int]]] = defaultdict(list)
    proper_rules: dict[int, list[tuple[object, float, tuple]]] = defaultdict(list)
    for lhs, rhs, w, origins in pending:
        if isinstance(rhs, int):
            units[lhs].append((rhs, w, origins[0][0]))
        else:
            proper_rules[lhs].append((rhs, w, origins))

    merged: dict[tuple[int, object], list] = {}
    order: list[tuple[int, object]] = []

    def emit(a, rhs, w, origins):
        key = (a, rhs)
        if key not in merged:
            merged[key] = [0.0, ()]
            order.append(key)
        merged[key][0] += w
        merged[key][1] += origins

    def walk(a, b, w_chain, path):
        for rhs, w, origins in proper_rules.get(b, ()):
            emit(a, rhs, w_chain * w, tuple(path + o for o in origins))
        for c, w, ri in units.get(b, ()):
            walk(a, c, w_chain * w, path + (ri,))

    for a in range(len(names)):
        walk(a, a, 1.0, ())

    binary, lexical = [], []
    for a, rhs in order:
        w, origins = merged[(a, rhs)]
        if isinstance(rhs, tuple):
            binary.append(BinaryRule(a, rhs[0], rhs[1], w, origins))
        else:
            lexical.append(LexicalRule(a, rhs, w, origins))
    return BinarizedPcfg(g, tuple(names), 0, tuple(binary), tuple(lexical), eps_weight, eps_count)


def ensure_binarized(g: Pcfg | BinarizedPcfg) -> BinarizedPcfg:
    return g if isinstance(g, BinarizedPcfg) else binarize(g)


# ---------------------------------------------------------------------------
# small constructors used by tests, the CLI and the reductions


def rename_terminals(g: Pcfg, mapping: Mapping[str, str] | Callable[[str], str]) -> Pcfg:
    """Copy ``g`` with terminals renamed (rules and weights unchanged)."""
    fn = mapping if callable(mapping) else mapping.__getitem__
    new_names = {t: fn(t) for t in g.terminals}
    if len(set(new_names.values())) != len(new_names):
        raise ValueError("terminal renaming must be injective")
    if set(new_names.values()) & g.nonterminals:
        raise ValueError("renamed terminals collide with nonterminals")
    rules = tuple(
        Rule(r.lhs, tuple(new_names.get(s, s) for s in r.rhs), r.weight) for r in g.rules
    )
    return Pcfg(frozenset(new_names.values()), g.nonterminals, rules, g.start)


def disjoint_copy(g: Pcfg, suffix: str = "~") -> Pcfg:
    """Same rules over a fresh alphabet (each terminal gets ``suffix`` appended)."""
    return rename_terminals(g, lambda t: t + suffix)


def single_string_grammar(symbols: Sequence[str], start: str = "D") -> Pcfg:
    """Grammar generating exactly ``symbols`` with probability 1."""
    return Pcfg.from_rules([(start, tuple(symbols), 1.0)], start=start)
