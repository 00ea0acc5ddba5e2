"""Feature scores, statement reordering and id remapping for ground ASP programs.

Three scores are combined with a weight vector over 23 features:

* ``literal_score(a)`` counts the rules (and aggregates) an atom occurs in,
  per occurrence feature, times the feature weights;
* ``rule_score(r)`` rewards the rule's shape and adds the mean literal score
  of its head and body literals;
* ``aggregate_score(p)`` rewards aggregates (scaled by ``t2``), their size and
  bound/size ratio, plus the mean literal score of their elements.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import asdict, dataclass, fields

from .formats import remap_opaque
from .model import (
    AggregateDef,
    AspProgram,
    ChoiceRule,
    DisjunctiveRule,
    NormalRule,
    OpaqueStatement,
    Statement,
    recursive_atoms,
)
from .weights import format_weights, parse_weight_text

OCCURRENCE_FEATURES = (
    "head_occ", "body_occ", "pos_body_occ", "neg_body_occ",
    "short_body_occ", "short_pos_body_occ", "short_neg_body_occ", "aggregate_occ",
)
RULE_FEATURES = (
    "constraints", "normal", "disjunctive", "choice", "body", "p_body", "n_body",
    "ratio_pos_neg", "horn", "rec_head", "rec_body", "short",
)
AGGREGATE_FEATURES = ("aggregate", "aggregate_size", "aggregate_ratio_bound_size")
ASP_FEATURES = OCCURRENCE_FEATURES + RULE_FEATURES + AGGREGATE_FEATURES
SHORT_BODY = 2


@dataclass(frozen=True)
class AspWeights:
    head_occ: float = 0.0
    body_occ: float = 0.0
    pos_body_occ: float = 0.0
    neg_body_occ: float = 0.0
    short_body_occ: float = 0.0
    short_pos_body_occ: float = 0.0
    short_neg_body_occ: float = 0.0
    aggregate_occ: float = 0.0
    constraints: float = 0.0
    normal: float = 0.0
    disjunctive: float = 0.0
    choice: float = 0.0
    body: float = 0.0
    p_body: float = 0.0
    n_body: float = 0.0
    ratio_pos_neg: float = 0.0
    horn: float = 0.0
    rec_head: float = 0.0
    rec_body: float = 0.0
    short: float = 0.0
    aggregate: float = 0.0
    aggregate_size: float = 0.0
    aggregate_ratio_bound_size: float = 0.0

    def __post_init__(self):
        for name in ASP_FEATURES:
            v = getattr(self, name)
            if not -10.0 <= v <= 10.0:
                raise ValueError(f"weight {name}={v} outside [-10, 10]")

    def as_dict(self) -> dict[str, float]:
        return asdict(self)

    @classmethod
    def from_dict(cls, d) -> AspWeights:
        return cls(**{f.name: float(d[f.name]) for f in fields(cls) if f.name in d})


@dataclass(frozen=True)
class ScoringConstants:
    """Multipliers for the choice-rule (``t1``) and aggregate (``t2``) bonuses."""

    t1: float = 1e4
    t2: float = 1e4

    def __post_init__(self):
        if self.t1 <= 0 or self.t2 <= 0:
            raise ValueError("t1 and t2 must be positive")


ASP_PARAMETERS: dict[str, type] = {n: float for n in ASP_FEATURES + ("t1", "t2")}


def parse_asp_weights(text: str) -> tuple[AspWeights, ScoringConstants]:
    d = parse_weight_text(text, ASP_PARAMETERS)
    consts = ScoringConstants(**{k: d.pop(k) for k in ("t1", "t2") if k in d})
    return AspWeights.from_dict(d), consts


def format_asp_weights(w: AspWeights, consts: ScoringConstants = ScoringConstants()) -> str:
    return format_weights({**w.as_dict(), "t1": consts.t1, "t2": consts.t2})


# --------------------------------------------------------------------------- program index


def _rule_parts(r) -> tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...]]:
    return r.heads, r.pos, r.neg


class ProgramIndex:
    """Occurrence counts and recursive atoms of a program, computed once."""

    def __init__(self, program: AspProgram):
        self.program = program
        self.occ: dict[str, dict[int, int]] = {f: defaultdict(int) for f in OCCURRENCE_FEATURES}
        for s in program.statements:
            if isinstance(s, (NormalRule, DisjunctiveRule, ChoiceRule)):
                heads, pos, neg = _rule_parts(s)
                short = len(pos) + len(neg) <= SHORT_BODY
                for a in set(heads):
                    self.occ["head_occ"][a] += 1
                for a in set(pos) | set(neg):
                    self.occ["body_occ"][a] += 1
                    if short:
                        self.occ["short_body_occ"][a] += 1
                for a in set(pos):
                    self.occ["pos_body_occ"][a] += 1
                    if short:
                        self.occ["short_pos_body_occ"][a] += 1
                for a in set(neg):
                    self.occ["neg_body_occ"][a] += 1
                    if short:
                        self.occ["short_neg_body_occ"][a] += 1
            elif isinstance(s, AggregateDef):
                for a in {abs(l) for l in s.literals}:
                    self.occ["aggregate_occ"][a] += 1
        self.recursive = recursive_atoms(program)
        self._weights: AspWeights | None = None
        self._lit_cache: dict[int, float] = {}

    def occurrence_vector(self, atom: int) -> list[int]:
        return [self.occ[f].get(atom, 0) for f in OCCURRENCE_FEATURES]

    def literal_score(self, atom: int, w: AspWeights) -> float:
        if w is not self._weights:
            self._weights, self._lit_cache = w, {}
        v = self._lit_cache.get(atom)
        if v is None:
            v = 0.0
            for f, c in zip(OCCURRENCE_FEATURES, self.occurrence_vector(atom)):
                v += c * getattr(w, f)
            self._lit_cache[atom] = v
        return v


def _index(program: AspProgram, index: ProgramIndex | None) -> ProgramIndex:
    return index if index is not None else ProgramIndex(program)


# --------------------------------------------------------------------------- scores


def literal_score(atom: int, program: AspProgram, w: AspWeights, index: ProgramIndex | None = None) -> float:
    """Score of an atom; the sign of a literal is irrelevant (``abs`` is taken)."""
    return _index(program, index).literal_score(abs(atom), w)


def rule_features(r, index: ProgramIndex) -> dict[str, float]:
    """Raw values of the rule-level features (before weighting)."""
    heads, pos, neg = _rule_parts(r)
    nh, nb = len(heads), len(pos) + len(neg)
    rec = index.recursive
    return {
        "constraints": float(nh == 0),
        "normal": float(nh == 1),
        "disjunctive": float(nh > 1),
        "choice": float(isinstance(r, ChoiceRule)),
        "body": float(nb),
        "p_body": float(len(pos)),
        "n_body": float(len(neg)),
        "ratio_pos_neg": len(pos) / len(neg) if neg else 0.0,
        "horn": float(len(pos) == 1),
        "rec_head": float(sum(1 for a in heads if a in rec)),
        "rec_body": float(sum(1 for a in pos + neg if a in rec)),
        "short": float(2 <= nh + nb <= 3),
    }


def aggregate_features(p: AggregateDef) -> dict[str, float]:
    if not p.elements:
        raise ValueError(f"aggregate {p.head} has no elements")
    return {
        "aggregate": 1.0,
        "aggregate_size": float(len(p.elements)),
        "aggregate_ratio_bound_size": p.bound / p.total_weight,
    }


def rule_score(r: Statement, program: AspProgram, w: AspWeights,
               consts: ScoringConstants = ScoringConstants(), index: ProgramIndex | None = None) -> float:
    if not isinstance(r, (NormalRule, DisjunctiveRule, ChoiceRule)):
        raise TypeError(f"rule_score expects a rule, got {type(r).__name__}")
    idx = _index(program, index)
    s = 0.0
    for f, v in rule_features(r, idx).items():
        if v:
            s += v * getattr(w, f) * (consts.t1 if f == "choice" else 1.0)
    heads, pos, neg = _rule_parts(r)
    lits = heads + pos + neg
    if lits:
        s += sum(idx.literal_score(a, w) for a in lits) / len(lits)
    return s


def aggregate_score(p: AggregateDef, program: AspProgram, w: AspWeights,
                    consts: ScoringConstants = ScoringConstants(), index: ProgramIndex | None = None) -> float:
    idx = _index(program, index)
    feats = aggregate_features(p)
    s = consts.t2 * w.aggregate
    s += feats["aggregate_size"] * w.aggregate_size
    s += feats["aggregate_ratio_bound_size"] * w.aggregate_ratio_bound_size
    s += sum(idx.literal_score(abs(l), w) for l in p.literals) / len(p.literals)
    return s


def statement_score(st: Statement, program: AspProgram, w: AspWeights,
                    consts: ScoringConstants = ScoringConstants(), index: ProgramIndex | None = None) -> float:
    if isinstance(st, AggregateDef):
        return aggregate_score(st, program, w, consts, index)
    if isinstance(st, OpaqueStatement):
        return 0.0
    return rule_score(st, program, w, consts, index)


def reorder_program(program: AspProgram, w: AspWeights, consts: ScoringConstants = ScoringConstants(),
                    *, pin_opaque: bool = False) -> AspProgram:
    """Sort statements by descending score (stable).

    With ``pin_opaque`` opaque statements keep their positions and only the
    remaining slots are reordered.
    """
    idx = ProgramIndex(program)
    sts = program.statements
    movable = [i for i, s in enumerate(sts) if not (pin_opaque and isinstance(s, OpaqueStatement))]
    scores = {i: statement_score(sts[i], program, w, consts, idx) for i in movable}
    ordered = sorted(movable, key=lambda i: -scores[i])
    out = list(sts)
    for slot, i in zip(movable, ordered):
        out[slot] = sts[i]
    return program.replace(statements=tuple(out))


# --------------------------------------------------------------------------- id remapping


def score_id_map(program: AspProgram, w: AspWeights) -> dict[int, int]:
    """Bijection old id -> new id: descending literal score, ties by ascending id.

    The i-th atom in that order receives id i, so ids end up contiguous from 1
    (the mapping is the identity under all-zero weights only when they already were).
    """
    idx = ProgramIndex(program)
    atoms = sorted(program.atoms(), key=lambda a: (-idx.literal_score(a, w), a))
    return {a: i for i, a in enumerate(atoms, 1)}


def rename_atoms(program: AspProgram, mapping: dict[int, int]) -> AspProgram:
    m = mapping

    def tup(xs):
        return tuple(m[x] for x in xs)

    out: list[Statement] = []
    for s in program.statements:
        if isinstance(s, NormalRule):
            out.append(NormalRule(None if s.head is None else m[s.head], tup(s.pos), tup(s.neg)))
        elif isinstance(s, (DisjunctiveRule, ChoiceRule)):
            out.append(type(s)(tup(s.heads), tup(s.pos), tup(s.neg)))
        elif isinstance(s, AggregateDef):
            els = tuple((wt, m[l] if l > 0 else -m[-l]) for wt, l in s.elements)
            out.append(AggregateDef(m[s.head], s.kind, s.bound, els))
        else:
            out.append(remap_opaque(s, m))
    return program.replace(
        statements=tuple(out),
        symbols=tuple((m[i], name) for i, name in program.symbols),
        compute_pos=tup(program.compute_pos),
        compute_neg=tup(program.compute_neg),
        false_atom=None if program.false_atom is None else m[program.false_atom],
    )


def remap_ids_by_score(program: AspProgram, w: AspWeights) -> AspProgram:
    """Renumber atoms so that higher-scoring atoms get lower ids; statement order is kept."""
    return rename_atoms(program, score_id_map(program, w))
