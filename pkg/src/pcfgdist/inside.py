"""Single-grammar quantities: inside probabilities, length spectra, partition functions."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping, Sequence

import numpy as np

from .errors import ImproperGrammarError, InconsistentGrammarWarning, NotConvergedError
from .grammar import BinarizedPcfg, Pcfg, ensure_binarized, tokenize, validate_proper

DEFAULT_TOL = 1e-9
MAX_ITERATIONS = 10**6
DIVERGENCE_BOUND = 1e100


def _as_string(g: Pcfg | BinarizedPcfg, w) -> tuple[str, ...]:
    return tokenize(w, g.terminals)


# ---------------------------------------------------------------------------
# inside DP over one string


def _inside(bg: BinarizedPcfg, w: tuple[str, ...], counting: bool):
    n = len(w)
    if n == 0:
        return bg.epsilon_count if counting else bg.epsilon_weight
    zero = 0 if counting else 0.0
    # chart[i][j]: nonterminal -> value for span w[i:j]
    chart = [[None] * (n + 1) for _ in range(n + 1)]
    for i, a in enumerate(w):
        cell: dict[int, float] = {}
        for r in bg.lexical_by_terminal.get(a, ()):
            cell[r.lhs] = cell.get(r.lhs, zero) + (r.count if counting else r.weight)
        chart[i][i + 1] = cell
    for span in range(2, n + 1):
        for i in range(n - span + 1):
            j = i + span
            cell = {}
            for k in range(i + 1, j):
                left, right = chart[i][k], chart[k][j]
                if not left or not right:
                    continue
                for b, vb in left.items():
                    for r in bg.binary_by_left.get(b, ()):
                        vc = right.get(r.right)
                        if vc is None:
                            continue
                        rv = r.count if counting else r.weight
                        cell[r.lhs] = cell.get(r.lhs, zero) + rv * vb * vc
            chart[i][j] = cell
    return chart[0][n].get(bg.start, zero)


def string_probability(g: Pcfg | BinarizedPcfg, w: str | Sequence[str]) -> float:
    """Sum of the weights of all left-most derivations of ``w`` (CKY inside pass)."""
    bg = ensure_binarized(g)
    return _inside(bg, _as_string(bg, w), counting=False)


def multiplicity(g: Pcfg | BinarizedPcfg, w: str | Sequence[str]) -> int:
    """Number of distinct left-most derivations of ``w`` in the source grammar."""
    bg = ensure_binarized(g)
    return _inside(bg, _as_string(bg, w), counting=True)


# ---------------------------------------------------------------------------
# length spectrum


@dataclass(frozen=True)
class LengthSpectrum:
    """``masses[n]`` is the probability of emitting a string of length ``n``."""

    masses: tuple[float, ...]

    @property
    def max_length(self) -> int:
        return len(self.masses) - 1

    def cumulative(self, n: int) -> float:
        return math.fsum(self.masses[: n + 1]) if n >= 0 else 0.0

    def tail(self, n: int) -> float:
        """Mass of strings strictly longer than ``n``, assuming total mass 1."""
        if n < 0:
            return 1.0
        return max(0.0, 1.0 - self.cumulative(n))


class _SpectrumTable:
    """Lazily extended per-nonterminal length masses (or derivation counts)."""

    def __init__(self, bg: BinarizedPcfg, counting: bool):
        self.bg = bg
        self.counting = counting
        k = len(bg.names)
        zero = 0 if counting else 0.0
        lex = [zero] * k
        for r in bg.lexical:
            lex[r.lhs] += r.count if counting else r.weight
        # rows[n][A]
        self.rows = [[zero] * k, lex]

    def extend(self, n: int):
        bg, rows = self.bg, self.rows
        zero = 0 if self.counting else 0.0
        while len(rows) <= n:
            m = len(rows)
            row = [zero] * len(bg.names)
            for r in bg.binary:
                rv = r.count if self.counting else r.weight
                acc = zero
                for j in range(1, m):
                    acc += rows[j][r.left] * rows[m - j][r.right]
                if acc:
                    row[r.lhs] += rv * acc
            rows.append(row)

    def at_start(self, n: int):
        self.extend(n)
        if n == 0:
            return self.bg.epsilon_count if self.counting else self.bg.epsilon_weight
        return self.rows[n][self.bg.start]


@lru_cache(maxsize=256)
def _spectrum_table(bg: BinarizedPcfg, counting: bool) -> _SpectrumTable:
    return _SpectrumTable(bg, counting)


def length_mass(g: Pcfg | BinarizedPcfg, n: int) -> float:
    """Probability mass of all strings of length exactly ``n``."""
    if n < 0:
        return 0.0
    return _spectrum_table(ensure_binarized(g), False).at_start(n)


def length_spectrum(g: Pcfg | BinarizedPcfg, max_length: int) -> LengthSpectrum:
    table = _spectrum_table(ensure_binarized(g), False)
    return LengthSpectrum(tuple(table.at_start(n) for n in range(max_length + 1)))


def derivation_counts(g: Pcfg | BinarizedPcfg, max_length: int) -> tuple[int, ...]:
    """Number of derivations yielding strings of each length ``0..max_length``."""
    table = _spectrum_table(ensure_binarized(g), True)
    return tuple(table.at_start(n) for n in range(max_length + 1))


def tail_mass(g: Pcfg | BinarizedPcfg, n: int) -> float:
    """Upper bound on the mass of strings longer than ``n``: ``1 - P(len <= n)``.

    Only meaningful for consistent grammars; a warning is issued otherwise.
    """
    bg = ensure_binarized(g)
    if not _consistent_cached(bg.source, DEFAULT_TOL):
        warnings.warn("tail mass of an inconsistent grammar is not a bound",
                      InconsistentGrammarWarning, stacklevel=2)
    if n < 0:
        return 1.0
    return length_spectrum(bg, n).tail(n)


# ---------------------------------------------------------------------------
# support enumeration by length


class _LanguageTable:
    """For each nonterminal and length, the strings it derives with their values.

    Only strings with nonzero inside value are stored, so the cost follows the
    size of the support rather than ``|alphabet| ** n``.
    """

    def __init__(self, bg: BinarizedPcfg, counting: bool):
        self.bg = bg
        self.counting = counting
        k = len(bg.names)
        zero = 0 if counting else 0.0
        first: list[dict] = [dict() for _ in range(k)]
        for r in bg.lexical:
            d = first[r.lhs]
            d[(r.terminal,)] = d.get((r.terminal,), zero) + (r.count if counting else r.weight)
        self.layers = [[dict() for _ in range(k)], first]

    def extend(self, n: int):
        bg, layers = self.bg, self.layers
        zero = 0 if self.counting else 0.0
        while len(layers) <= n:
            m = len(layers)
            layer: list[dict] = [dict() for _ in bg.names]
            for r in bg.binary:
                rv = r.count if self.counting else r.weight
                out = layer[r.lhs]
                for j in range(1, m):
                    left, right = layers[j][r.left], layers[m - j][r.right]
                    if not left or not right:
                        continue
                    for x, px in left.items():
                        for y, py in right.items():
                            key = x + y
                            out[key] = out.get(key, zero) + rv * px * py
            layers.append(layer)

    def at_start(self, n: int) -> Mapping[tuple[str, ...], float]:
        if n == 0:
            v = self.bg.epsilon_count if self.counting else self.bg.epsilon_weight
            return {(): v} if v else {}
        self.extend(n)
        return self.layers[n][self.bg.start]


@lru_cache(maxsize=256)
def _language_table(bg: BinarizedPcfg, counting: bool) -> _LanguageTable:
    return _LanguageTable(bg, counting)


def support_layer(g: Pcfg | BinarizedPcfg, n: int) -> dict[tuple[str, ...], float]:
    """All strings of length ``n`` with positive probability, in lexicographic order."""
    layer = _language_table(ensure_binarized(g), False).at_start(n)
    return {w: layer[w] for w in sorted(layer)}


def multiplicity_layer(g: Pcfg | BinarizedPcfg, n: int) -> dict[tuple[str, ...], int]:
    layer = _language_table(ensure_binarized(g), True).at_start(n)
    return {w: layer[w] for w in sorted(layer)}


# ---------------------------------------------------------------------------
# partition function and consistency


@dataclass(frozen=True)
class PartitionVector:
    """Least fixed point of ``Z_A = sum_rules w * prod Z_B`` (or the last iterate)."""

    values: Mapping[str, float]
    iterations: int
    residual: float
    converged: bool
    diverged: bool = False

    def __getitem__(self, nonterminal: str) -> float:
        return self.values[nonterminal]


def _compile(g: Pcfg):
    names = sorted(g.nonterminals)
    index = {a: i for i, a in enumerate(names)}
    rules = [
        (index[r.lhs], r.weight, tuple(index[s] for s in r.rhs if s in g.nonterminals))
        for r in g.rules
    ]
    return names, index, rules


def partition_function(g: Pcfg, tol: float = DEFAULT_TOL,
                       max_iterations: int = MAX_ITERATIONS) -> PartitionVector:
    """Kleene iteration from zero, stopped once the remaining error is below ``tol``.

    The step size alone understates the error of a slowly contracting
    iteration, so the stop also requires ``step * q / (1 - q) < tol`` where
    ``q`` is the observed ratio of successive steps.  Iterates increase
    monotonically towards the least fixed point, so an unconverged result is
    still a valid lower bound.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    names, _, rules = _compile(g)
    z = [0.0] * len(names)
    residual = math.inf
    it = 0
    diverged = converged = False
    while it < max_iterations:
        it += 1
        new = [0.0] * len(names)
        for a, w, children in rules:
            p = w
            for b in children:
                p *= z[b]
            new[a] += p
        previous = residual
        residual = max(abs(x - y) for x, y in zip(new, z))
        z = new
        if residual == 0.0:
            converged = True
            break
        if residual < tol and it > 1:
            q = residual / previous
            if q < 1.0 and residual * q / (1.0 - q) < tol:
                converged = True
                break
        if max(z) > DIVERGENCE_BOUND:
            diverged = True
            break
    return PartitionVector(dict(zip(names, z)), it, residual, converged, diverged)


def is_consistent(g: Pcfg, tol: float = DEFAULT_TOL) -> bool:
    """True iff the total string mass from the start symbol is 1 within ``tol``.

    Critical grammars (expected offspring exactly 1) converge too slowly for
    plain iteration to resolve 1e-9 and will usually be reported inconsistent;
    they raise :class:`NotConvergedError` if the iteration cap is hit first.
    """
    return _consistent_cached(g, tol)


@lru_cache(maxsize=512)
def _consistent_cached(g: Pcfg, tol: float) -> bool:
    pv = partition_function(g, tol * 1e-2)
    if not pv.converged:
        if pv.diverged:
            return False
        raise NotConvergedError(pv)
    return abs(pv[g.start] - 1.0) <= tol


def expectation_matrix(g: Pcfg, z: Mapping[str, float] | None = None) -> np.ndarray:
    """Jacobian of the fixed-point map at ``z`` (all ones by default).

    At ``z = 1`` this is the mean-offspring matrix: entry ``[A, B]`` is the
    expected number of ``B`` produced by one rewrite of ``A``.
    """
    names, index, rules = _compile(g)
    zv = [1.0 if z is None else z[a] for a in names]
    jac = np.zeros((len(names), len(names)))
    for a, w, children in rules:
        for i, b in enumerate(children):
            p = w
            for j, c in enumerate(children):
                if j != i:
                    p *= zv[c]
            jac[a, b] += p
    return jac


def spectral_radius(g: Pcfg, z: Mapping[str, float] | None = None) -> float:
    jac = expectation_matrix(g, z)
    if jac.size == 0:
        return 0.0
    return float(max(abs(np.linalg.eigvals(jac))))


def make_probabilistic(g: Pcfg, initial_weights: Sequence[float] | None = None,
                       tol: float = DEFAULT_TOL, damping: bool = True,
                       max_attempts: int = 30) -> Pcfg:
    """Consistent PCFG with the same support as the CFG underlying ``g``.

    Starts from uniform weights per nonterminal (or ``initial_weights``),
    computes the partition function ``Z`` and rescales every rule by
    ``prod Z_B / Z_A``.  If the start weighting is critical or divergent and
    ``damping`` is on, weights of rules that contain nonterminals are halved
    and the attempt repeated; a critical output could not be certified
    consistent in floating point.
    """
    report = validate_proper(g)
    if not report.is_proper:
        raise ImproperGrammarError(report)
    if initial_weights is None:
        per_lhs: dict[str, int] = {}
        for r in g.rules:
            per_lhs[r.lhs] = per_lhs.get(r.lhs, 0) + 1
        weights = [1.0 / per_lhs[r.lhs] for r in g.rules]
    else:
        weights = [float(w) for w in initial_weights]
    recursive = [any(s in g.nonterminals for s in r.rhs) for r in g.rules]

    last = None
    for _ in range(max_attempts):
        h = g.with_weights(weights)
        pv = partition_function(h, tol * 1e-3)
        last = pv
        if pv.converged and all(0.0 < v < math.inf for v in pv.values.values()):
            z = pv.values
            rescaled = []
            for r in h.rules:
                p = r.weight
                for s in r.rhs:
                    if s in g.nonterminals:
                        p *= z[s]
                rescaled.append(p / z[r.lhs])
            out = g.with_weights(rescaled)
            if spectral_radius(out) < 1.0 - 1e-6:
                return out
        if not damping:
            break
        weights = [w * 0.5 if rec else w for w, rec in zip(weights, recursive)]
    raise NotConvergedError(last)


def tree_auto_coemission(g: Pcfg, tol: float = DEFAULT_TOL) -> float:
    """Probability that two independent runs produce the same derivation tree.

    Equals the sum of squared derivation weights, i.e. the start value of the
    partition function of ``g`` with every weight squared.
    """
    squared = g.with_weights([r.weight ** 2 for r in g.rules])
    pv = partition_function(squared, tol * 1e-3)
    if not pv.converged:
        raise NotConvergedError(pv)
    return pv[g.start]
