"""Feature-weighted reordering of CNF formulae and ground ASP programs."""

from .asp import (
    AspWeights,
    ScoringConstants,
    aggregate_score,
    literal_score,
    remap_ids_by_score,
    reorder_program,
    rule_score,
)
from .formats import parse_dimacs, parse_smodels, write_dimacs, write_smodels
from .model import (
    AggregateDef,
    AspProgram,
    ChoiceRule,
    CnfFormula,
    DisjunctiveRule,
    NormalRule,
    OpaqueStatement,
    enumerate_models,
    enumerate_stable_models,
    satisfies,
)
from .sat import SatWeights, compute_stats, reorder_cnf
from .synth import SynthParams, generate

__version__ = "0.1.0"

__all__ = [
    "AggregateDef", "AspProgram", "AspWeights", "ChoiceRule", "CnfFormula", "DisjunctiveRule",
    "NormalRule", "OpaqueStatement", "SatWeights", "ScoringConstants", "SynthParams",
    "aggregate_score", "compute_stats", "enumerate_models", "enumerate_stable_models", "generate",
    "literal_score", "parse_dimacs", "parse_smodels", "remap_ids_by_score", "reorder_cnf",
    "reorder_program", "rule_score", "satisfies", "write_dimacs", "write_smodels",
]
