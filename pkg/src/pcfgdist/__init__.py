"""Probabilistic context-free grammars: string probabilities, consensus strings
and certified enclosures of distances between grammar distributions."""

from .consensus import ConsensusResult, consensus_string
from .distance import (Ambiguous, AmbiguityUnknown, Decision, Distinct, DistanceResult,
                       Indistinguishable, Metric, ProbInterval, Verdict, ambiguity_certificate,
                       chebyshev_interval, decide_leq, distance_interval, equivalence_test,
                       truncated_metric)
from .errors import (BudgetExhaustedError, GrammarSyntaxError, ImproperGrammarError,
                     InconsistentGrammarError, InconsistentGrammarWarning, NotConvergedError,
                     UncertifiableMetricError)
from .grammar import (BinarizedPcfg, Pcfg, PropernessReport, Rule, binarize, disjoint_copy,
                      format_string, parse_grammar, rename_terminals, serialize,
                      single_string_grammar, tokenize, validate_proper)
from .inside import (LengthSpectrum, PartitionVector, is_consistent, length_mass,
                     length_spectrum, make_probabilistic, multiplicity, partition_function,
                     string_probability, tail_mass, tree_auto_coemission)
from .pcp import (IndexAlphabet, PcpInstance, construct_g0, construct_pair, derivation_length,
                  solve_pcp_bounded, tac_closed_form)

__version__ = "0.1.0"
