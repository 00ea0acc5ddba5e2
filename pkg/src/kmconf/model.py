"""Domain types for CNF formulae and ground ASP programs, plus brute-force semantics.

Literals are signed integers throughout, as in DIMACS: ``3`` is the atom with
id 3 and ``-3`` its negation.  Clauses and rule bodies are ordered tuples;
the semantic functions in this module ignore order and duplicates.
"""
from __future__ import annotations

import itertools
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass
from typing import Union

import numpy as np

MAX_ID = 2**63 - 1


def complement(lit: int) -> int:
    return -lit


# --------------------------------------------------------------------------- CNF


@dataclass(frozen=True)
class CnfFormula:
    num_vars: int
    num_clauses: int
    clauses: tuple[tuple[int, ...], ...] = ()

    @classmethod
    def from_clauses(cls, clauses: Iterable[Iterable[int]], num_vars: int | None = None) -> CnfFormula:
        cls_t = tuple(tuple(int(l) for l in c) for c in clauses)
        if num_vars is None:
            num_vars = max((abs(l) for c in cls_t for l in c), default=0)
        return cls(num_vars, len(cls_t), cls_t)

    def atoms(self) -> set[int]:
        return {abs(l) for c in self.clauses for l in c}


# --------------------------------------------------------------------------- ASP


@dataclass(frozen=True)
class NormalRule:
    """``head <- not neg..., pos...``; ``head is None`` makes it a constraint."""

    head: int | None
    pos: tuple[int, ...] = ()
    neg: tuple[int, ...] = ()

    @property
    def heads(self) -> tuple[int, ...]:
        return () if self.head is None else (self.head,)


@dataclass(frozen=True)
class DisjunctiveRule:
    heads: tuple[int, ...]
    pos: tuple[int, ...] = ()
    neg: tuple[int, ...] = ()


@dataclass(frozen=True)
class ChoiceRule:
    heads: tuple[int, ...]
    pos: tuple[int, ...] = ()
    neg: tuple[int, ...] = ()


@dataclass(frozen=True)
class AggregateDef:
    """``head`` is true iff the weights of the satisfied element literals reach ``bound``.

    ``elements`` holds ``(weight, literal)`` pairs.  They are normalised so that
    negative literals come first (stable), which is the order the smodels
    layout stores them in.
    """

    head: int
    kind: str  # "count" | "sum"
    bound: int
    elements: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if self.kind not in ("count", "sum"):
            raise ValueError(f"unknown aggregate kind {self.kind!r}")
        els = tuple((int(w), int(l)) for w, l in self.elements)
        if self.kind == "count" and any(w != 1 for w, _ in els):
            raise ValueError("count aggregates carry unit weights only")
        els = tuple(e for e in els if e[1] < 0) + tuple(e for e in els if e[1] > 0)
        object.__setattr__(self, "elements", els)

    def problems(self) -> list[str]:
        """Violations of the well-formedness conditions.  Construction tolerates
        them so that lenient parsing can round-trip malformed files."""
        out = []
        if not self.elements:
            out.append("aggregate has no elements")
        if self.bound < 1:
            out.append(f"aggregate bound {self.bound} is not positive")
        if any(w < 1 for w, _ in self.elements):
            out.append("aggregate weight is not positive")
        if len(set(self.literals)) != len(self.elements):
            out.append("aggregate literals are not distinct")
        return out

    @property
    def literals(self) -> tuple[int, ...]:
        return tuple(l for _, l in self.elements)

    @property
    def total_weight(self) -> int:
        return sum(w for w, _ in self.elements)


@dataclass(frozen=True)
class OpaqueStatement:
    """A statement carried through untouched (e.g. minimize, type 6)."""

    tokens: tuple[int, ...]

    @property
    def rule_type(self) -> int:
        return self.tokens[0]


Rule = Union[NormalRule, DisjunctiveRule, ChoiceRule]
Statement = Union[NormalRule, DisjunctiveRule, ChoiceRule, AggregateDef, OpaqueStatement]
RULE_TYPES = (NormalRule, DisjunctiveRule, ChoiceRule)


def body_literals(rule: Rule) -> tuple[int, ...]:
    return tuple(-a for a in rule.neg) + tuple(rule.pos)


@dataclass(frozen=True)
class AspProgram:
    """A ground program in smodels layout.

    ``symbols`` is the symbol table as ``(id, name)`` pairs in file order,
    ``compute_pos``/``compute_neg`` the ``B+``/``B-`` sections and ``models``
    the trailing model count.  ``false_atom`` is the id that constraint heads
    are written with (lparse reserves atom 1 and lists it under ``B-``).
    ``complete`` is False for rule-section-only texts.
    """

    statements: tuple[Statement, ...] = ()
    symbols: tuple[tuple[int, str], ...] = ()
    compute_pos: tuple[int, ...] = ()
    compute_neg: tuple[int, ...] = ()
    models: int = 1
    false_atom: int | None = None
    complete: bool = True

    def rules(self) -> list[Rule]:
        return [s for s in self.statements if isinstance(s, RULE_TYPES)]

    def aggregates(self) -> dict[int, AggregateDef]:
        return {s.head: s for s in self.statements if isinstance(s, AggregateDef)}

    def atoms(self) -> set[int]:
        """Every id mentioned anywhere, aggregate ids and the false atom included."""
        out: set[int] = set()
        for s in self.statements:
            out.update(statement_atoms(s))
        out.update(i for i, _ in self.symbols)
        out.update(self.compute_pos)
        out.update(self.compute_neg)
        if self.false_atom is not None:
            out.add(self.false_atom)
        return out

    def replace(self, **kw) -> AspProgram:
        from dataclasses import replace

        return replace(self, **kw)


def statement_atoms(s: Statement) -> set[int]:
    if isinstance(s, NormalRule):
        return set(s.heads) | set(s.pos) | set(s.neg)
    if isinstance(s, (DisjunctiveRule, ChoiceRule)):
        return set(s.heads) | set(s.pos) | set(s.neg)
    if isinstance(s, AggregateDef):
        return {s.head} | {abs(l) for l in s.literals}
    if isinstance(s, OpaqueStatement):
        from .formats import opaque_atoms

        return set(opaque_atoms(s))
    raise TypeError(type(s))


# --------------------------------------------------------------------------- transformations


def count_to_sum(agg: AggregateDef) -> AggregateDef:
    if agg.kind == "sum":
        return agg
    return AggregateDef(agg.head, "sum", agg.bound, tuple((1, l) for _, l in agg.elements))


def fresh_ids(start: int) -> Iterator[int]:
    """Allocator of unused atom ids; raises OverflowError past the 64-bit id space."""
    i = start
    while True:
        if i > MAX_ID:
            raise OverflowError("atom id space exhausted")
        yield i
        i += 1


def expand_choice(rule: ChoiceRule, ids: Iterator[int]) -> list[DisjunctiveRule]:
    """``{p1..pm} <- B`` becomes ``pi v pi' <- B`` for each head, with ``pi'`` fresh."""
    return [DisjunctiveRule((p, next(ids)), rule.pos, rule.neg) for p in rule.heads]


def normalize_program(program: AspProgram) -> tuple[AspProgram, set[int]]:
    """Expand choice rules and rewrite counts as sums.  Returns the fresh atoms too."""
    start = max(program.atoms(), default=0) + 1
    ids = fresh_ids(start)
    out: list[Statement] = []
    fresh: set[int] = set()
    for s in program.statements:
        if isinstance(s, ChoiceRule):
            exp = expand_choice(s, ids)
            fresh.update(r.heads[1] for r in exp)
            out.extend(exp)
        elif isinstance(s, AggregateDef):
            out.append(count_to_sum(s))
        else:
            out.append(s)
    return program.replace(statements=tuple(out)), fresh


# --------------------------------------------------------------------------- satisfaction

Target = Union[int, AggregateDef, tuple, Statement, CnfFormula, AspProgram]


def _agg_value(interp, agg: AggregateDef, aggregates) -> int:
    return sum(w for w, l in agg.elements if _lit(interp, l, aggregates))


def _lit(interp, lit: int, aggregates) -> bool:
    a = abs(lit)
    if aggregates and a in aggregates:
        agg = aggregates[a]
        truth = _agg_value(interp, agg, aggregates) >= agg.bound
    else:
        truth = a in interp
    return truth if lit > 0 else not truth


def satisfies(interp: Iterable[int], target: Target,
              aggregates: Mapping[int, AggregateDef] | None = None) -> bool:
    """``interp |= target``.

    ``target`` may be a literal (signed int), an aggregate definition, a clause
    (tuple of literals), a rule, a CNF formula or a program.  Literals over
    aggregate ids are evaluated through ``aggregates``; membership of an
    aggregate id in ``interp`` is ignored.
    """
    I = interp if isinstance(interp, (set, frozenset)) else set(interp)
    if isinstance(target, AspProgram):
        aggs = target.aggregates()
        return all(satisfies(I, r, aggs) for r in target.rules())
    if isinstance(target, CnfFormula):
        return all(satisfies(I, c) for c in target.clauses)
    if isinstance(target, bool):
        raise TypeError("bool is not a literal")
    if isinstance(target, int):
        return _lit(I, target, aggregates)
    if isinstance(target, AggregateDef):
        return _agg_value(I, target, aggregates) >= target.bound
    if isinstance(target, tuple):
        return any(_lit(I, l, aggregates) for l in target)
    if isinstance(target, ChoiceRule):
        return True
    if isinstance(target, (NormalRule, DisjunctiveRule)):
        if not all(_lit(I, l, aggregates) for l in body_literals(target)):
            return True
        return any(h in I for h in target.heads)
    if isinstance(target, OpaqueStatement):
        return True
    raise TypeError(f"cannot evaluate {type(target).__name__}")


def body_satisfied(interp, rule: Rule, aggregates=None) -> bool:
    I = interp if isinstance(interp, (set, frozenset)) else set(interp)
    return all(_lit(I, l, aggregates) for l in body_literals(rule))


def reduct(program: AspProgram, interp: Iterable[int]) -> AspProgram:
    """FLP reduct: the rules whose body ``interp`` satisfies.  Aggregate definitions are kept."""
    I = set(interp)
    aggs = program.aggregates()
    out: list[Statement] = []
    for s in program.statements:
        if isinstance(s, ChoiceRule):
            raise ValueError("expand choice rules before taking the reduct")
        if isinstance(s, AggregateDef):
            if s.kind != "sum":
                raise ValueError("normalise count aggregates before taking the reduct")
            out.append(s)
        elif isinstance(s, (NormalRule, DisjunctiveRule)):
            if body_satisfied(I, s, aggs):
                out.append(s)
    return program.replace(statements=tuple(out))


# --------------------------------------------------------------------------- dependency graph


def dependency_graph(program: AspProgram) -> dict[int, set[int]]:
    """Adjacency ``head -> body atoms``; aggregate ids point at their element atoms."""
    g: dict[int, set[int]] = {a: set() for a in program.atoms()}
    for s in program.statements:
        if isinstance(s, RULE_TYPES):
            body = set(s.pos) | set(s.neg)
            for h in s.heads:
                g[h].update(body)
        elif isinstance(s, AggregateDef):
            g[s.head].update(abs(l) for l in s.literals)
    return g


def recursive_atoms(program: AspProgram) -> set[int]:
    """Atoms on a cycle of the dependency graph (non-trivial SCC or self-loop)."""
    from scipy.sparse import coo_matrix
    from scipy.sparse.csgraph import connected_components

    g = dependency_graph(program)
    if not g:
        return set()
    nodes = sorted(g)
    idx = {a: i for i, a in enumerate(nodes)}
    rows, cols = [], []
    rec: set[int] = set()
    for x, ys in g.items():
        for y in ys:
            if x == y:
                rec.add(x)
            rows.append(idx[x])
            cols.append(idx[y])
    n = len(nodes)
    m = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n)).tocsr()
    _, labels = connected_components(m, directed=True, connection="strong")
    sizes = np.bincount(labels)
    rec.update(nodes[i] for i in np.flatnonzero(sizes[labels] >= 2))
    return rec


# --------------------------------------------------------------------------- oracles


class OracleScaleError(ValueError):
    pass


def _bits(masks: np.ndarray, bit: int) -> np.ndarray:
    return ((masks >> np.uint64(bit)) & np.uint64(1)).astype(bool)


def enumerate_models(cnf: CnfFormula, atom_cap: int = 20) -> set[frozenset[int]]:
    """All models of ``cnf`` over its declared atoms (and any atom it mentions)."""
    atoms = sorted(set(range(1, cnf.num_vars + 1)) | cnf.atoms())
    n = len(atoms)
    if n > atom_cap:
        raise OracleScaleError(f"{n} atoms exceeds oracle cap {atom_cap}")
    bit = {a: i for i, a in enumerate(atoms)}
    masks = np.arange(2**n, dtype=np.uint64)
    ok = np.ones(len(masks), dtype=bool)
    for c in cnf.clauses:
        sat = np.zeros(len(masks), dtype=bool)
        for l in set(c):
            b = _bits(masks, bit[abs(l)])
            sat |= b if l > 0 else ~b
        ok &= sat
    return {frozenset(a for a in atoms if (int(m) >> bit[a]) & 1) for m in masks[ok]}


class _Compiled:
    """Vectorised evaluator of a normalised program over arrays of bitmask interpretations."""

    def __init__(self, program: AspProgram, universe: list[int]):
        self.bit = {a: i for i, a in enumerate(universe)}
        self.aggs = program.aggregates()
        order: list[int] = []
        state: dict[int, int] = {}

        def visit(a):
            if state.get(a) == 2:
                return
            if state.get(a) == 1:
                raise ValueError("recursive aggregates are not supported")
            state[a] = 1
            for l in self.aggs[a].literals:
                if abs(l) in self.aggs:
                    visit(abs(l))
            state[a] = 2
            order.append(a)

        for a in self.aggs:
            visit(a)
        self.agg_order = order
        self.rules = [r for r in program.rules()]

    def truth(self, masks: np.ndarray) -> dict[int, np.ndarray]:
        t: dict[int, np.ndarray] = {}
        for a in self.agg_order:
            agg = self.aggs[a]
            total = np.zeros(len(masks), dtype=np.int64)
            for w, l in agg.elements:
                v = self.lit(masks, l, t)
                total += w * v
            t[a] = total >= agg.bound
        return t

    def lit(self, masks, lit, t) -> np.ndarray:
        a = abs(lit)
        if a in self.aggs:
            v = t[a]
        elif a in self.bit:
            v = _bits(masks, self.bit[a])
        else:
            v = np.zeros(len(masks), dtype=bool)
        return v if lit > 0 else ~v

    def body(self, masks, rule, t) -> np.ndarray:
        ok = np.ones(len(masks), dtype=bool)
        for l in body_literals(rule):
            ok &= self.lit(masks, l, t)
        return ok

    def head(self, masks, rule, t) -> np.ndarray:
        ok = np.zeros(len(masks), dtype=bool)
        for h in rule.heads:
            ok |= self.lit(masks, h, t)
        return ok

    def models(self, masks, rules=None) -> np.ndarray:
        t = self.truth(masks)
        ok = np.ones(len(masks), dtype=bool)
        for r in self.rules if rules is None else rules:
            ok &= ~self.body(masks, r, t) | self.head(masks, r, t)
        return ok


def _submasks(mask: int, n: int) -> np.ndarray:
    bits = [i for i in range(n) if (mask >> i) & 1]
    k = len(bits)
    t = np.arange(2**k, dtype=np.uint64)
    out = np.zeros(2**k, dtype=np.uint64)
    for j, b in enumerate(bits):
        out |= ((t >> np.uint64(j)) & np.uint64(1)) << np.uint64(b)
    return out


def enumerate_stable_models(program: AspProgram, atom_cap: int = 16) -> set[frozenset[int]]:
    """All stable models under the FLP reduct, by exhaustive enumeration.

    Choice rules are expanded into disjunctions over fresh atoms and those atoms
    are projected away afterwards.  True aggregate ids are included in each
    returned interpretation.  ``B+``/``B-`` compute sections filter the result.
    """
    norm, fresh = normalize_program(program)
    aggs = norm.aggregates()
    for r in norm.rules():
        if set(r.heads) & set(aggs):
            raise ValueError("aggregate ids cannot appear in rule heads")
    universe: set[int] = set()
    for s in norm.statements:
        if isinstance(s, RULE_TYPES + (AggregateDef,)):
            universe |= statement_atoms(s)
    universe -= set(aggs)
    atoms = sorted(universe)
    n = len(atoms)
    if n > atom_cap:
        raise OracleScaleError(f"{n} atoms exceeds oracle cap {atom_cap}")
    if any(a not in universe and a not in aggs for a in program.compute_pos):
        return set()

    comp = _Compiled(norm, atoms)
    masks = np.arange(2**n, dtype=np.uint64)
    t = comp.truth(masks)
    ok = comp.models(masks)
    for a in program.compute_pos:
        ok &= comp.lit(masks, a, t)
    for a in program.compute_neg:
        ok &= comp.lit(masks, -a, t)

    result: set[frozenset[int]] = set()
    rules = comp.rules
    for m, row in zip(masks[ok].tolist(), np.flatnonzero(ok)):
        single = np.array([m], dtype=np.uint64)
        tm = comp.truth(single)
        red = [r for r in rules if comp.body(single, r, tm)[0]]
        subs = _submasks(m, n)
        subs = subs[subs != np.uint64(m)]
        if len(subs) and comp.models(subs, red).any():
            continue
        true_atoms = {a for a in atoms if (m >> comp.bit[a]) & 1}
        true_atoms |= {a for a in aggs if t[a][row]}
        result.add(frozenset(true_atoms - fresh))
    return result


def stable_models_bruteforce(program: AspProgram) -> set[frozenset[int]]:
    """Slow definitional enumerator built only on ``satisfies`` and ``reduct``.

    Used to cross-check the vectorised oracle on tiny programs.
    """
    norm, fresh = normalize_program(program)
    aggs = norm.aggregates()
    universe: set[int] = set()
    for s in norm.statements:
        if isinstance(s, RULE_TYPES + (AggregateDef,)):
            universe |= statement_atoms(s)
    atoms = sorted(universe - set(aggs))
    out = set()
    for bits in itertools.product((0, 1), repeat=len(atoms)):
        I = frozenset(a for a, b in zip(atoms, bits) if b)
        if not satisfies(I, norm):
            continue
        if any(a not in I and a not in aggs or (a in aggs and not satisfies(I, a, aggs))
               for a in program.compute_pos):
            continue
        if any((a in I and a not in aggs) or (a in aggs and satisfies(I, a, aggs))
               for a in program.compute_neg):
            continue
        red = reduct(norm, I)
        smaller = False
        for k in range(len(I)):
            for J in itertools.combinations(sorted(I), k):
                if satisfies(set(J), red):
                    smaller = True
                    break
            if smaller:
                break
        if not smaller:
            out.add(frozenset((I | {a for a in aggs if satisfies(I, a, aggs)}) - fresh))
    return out
