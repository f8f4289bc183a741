"""Multi-version forward transformation and synchronization with triple graph grammars."""

from .errors import (
    BenchmarkIntegrityError,
    ConfigurationError,
    ContractViolation,
    InputError,
    MvtggError,
    NotApplicableError,
)
from .graph import EdgeType, Element, Graph, TypeGraph
from .history import ElementCreate, ElementDelete, ElementSpec, History, Merge, VersionCreate
from .iso import isomorphic_with_bookkeeping
from .match import find_matches
from .mvm import MultiVersionModel, comb
from .mvsync import sync_f_mv
from .mvtransform import adapt_rules, init_mv_marking, trans_f_mv
from .rewrite import Rule, apply_rule, bookkeeping_set
from .tgg import Tgg, TggRule, TripleTypeGraph, derive_forward_rules, trans_f, validate_tgg
from .versions import VersionDag, VersionSet, dematerialize, materialize

__version__ = "0.1.0"

__all__ = [
    "BenchmarkIntegrityError", "ConfigurationError", "ContractViolation", "InputError", "MvtggError",
    "NotApplicableError", "EdgeType", "Element", "Graph", "TypeGraph", "ElementCreate", "ElementDelete",
    "ElementSpec", "History", "Merge", "VersionCreate", "isomorphic_with_bookkeeping", "find_matches",
    "MultiVersionModel", "comb", "sync_f_mv", "adapt_rules", "init_mv_marking", "trans_f_mv", "Rule",
    "apply_rule", "bookkeeping_set", "Tgg", "TggRule", "TripleTypeGraph", "derive_forward_rules", "trans_f",
    "validate_tgg", "VersionDag", "VersionSet", "dematerialize", "materialize", "__version__",
]
