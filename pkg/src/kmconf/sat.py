"""Weighted clause and literal ordering for CNF formulae.

Clause criteria (size, bin, ter, positive, negative, bin_neg, only_one_neg) and
atom criteria (occ ... occ_all_neg) are combined linearly with user weights in
[-10, 10].  Clauses are sorted by descending score and, when ``ord_lit`` is on,
literals inside each clause by descending atom score.  All sorts are stable.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, fields

import numpy as np

from .model import CnfFormula
from .weights import format_weights, parse_weight_text

CLAUSE_CRITERIA = ("size", "bin", "ter", "positive", "negative", "bin_neg", "only_one_neg")
ATOM_CRITERIA = ("occ", "occ_avg", "occ_bin", "occ_ter", "occ_pos", "occ_neg", "occ_all_pos", "occ_all_neg")
SELECTORS = {"ord_lit": (0, 1), "ord_cl": (0, 1, 2)}
WEIGHT_RANGE = (-10.0, 10.0)


@dataclass(frozen=True)
class SatWeights:
    size: float = 0.0
    bin: float = 0.0
    ter: float = 0.0
    positive: float = 0.0
    negative: float = 0.0
    bin_neg: float = 0.0
    only_one_neg: float = 0.0
    occ: float = 0.0
    occ_avg: float = 0.0
    occ_bin: float = 0.0
    occ_ter: float = 0.0
    occ_pos: float = 0.0
    occ_neg: float = 0.0
    occ_all_pos: float = 0.0
    occ_all_neg: float = 0.0
    ord_lit: int = 0
    ord_cl: int = 0

    def __post_init__(self):
        lo, hi = WEIGHT_RANGE
        for name in CLAUSE_CRITERIA + ATOM_CRITERIA:
            v = getattr(self, name)
            if not lo <= v <= hi:
                raise ValueError(f"weight {name}={v} outside [{lo}, {hi}]")
        for name, allowed in SELECTORS.items():
            if getattr(self, name) not in allowed:
                raise ValueError(f"{name} must be one of {allowed}")

    @property
    def clause_vector(self) -> np.ndarray:
        return np.array([getattr(self, n) for n in CLAUSE_CRITERIA], dtype=float)

    @property
    def atom_vector(self) -> np.ndarray:
        return np.array([getattr(self, n) for n in ATOM_CRITERIA], dtype=float)

    def as_dict(self) -> dict[str, float | int]:
        return asdict(self)

    @classmethod
    def from_dict(cls, d) -> SatWeights:
        kw = {}
        for f in fields(cls):
            if f.name in d:
                kw[f.name] = int(d[f.name]) if f.name in SELECTORS else float(d[f.name])
        return cls(**kw)

    @classmethod
    def parse(cls, text: str) -> SatWeights:
        return cls.from_dict(parse_weight_text(text, SAT_PARAMETERS))

    def dumps(self) -> str:
        return format_weights(self.as_dict())


SAT_PARAMETERS: dict[str, type] = {n: float for n in CLAUSE_CRITERIA + ATOM_CRITERIA}
SAT_PARAMETERS.update({n: int for n in SELECTORS})


@dataclass
class ClauseStats:
    """Per-clause criteria; column ``j`` of ``table`` is ``CLAUSE_CRITERIA[j]``."""

    table: np.ndarray  # (num_clauses, 7)

    def __getitem__(self, name: str) -> np.ndarray:
        return self.table[:, CLAUSE_CRITERIA.index(name)]


@dataclass
class AtomStats:
    """Per-atom criteria indexed by atom id (row 0 unused)."""

    table: np.ndarray  # (max_atom + 1, 8)

    def __getitem__(self, name: str) -> np.ndarray:
        return self.table[:, ATOM_CRITERIA.index(name)]


@dataclass
class _Flat:
    lits: np.ndarray
    clause_of: np.ndarray
    sizes: np.ndarray


def _flatten(cnf: CnfFormula) -> _Flat:
    sizes = np.fromiter((len(c) for c in cnf.clauses), dtype=np.int64, count=len(cnf.clauses))
    total = int(sizes.sum())
    lits = np.fromiter((l for c in cnf.clauses for l in c), dtype=np.int64, count=total)
    clause_of = np.repeat(np.arange(len(sizes)), sizes)
    return _Flat(lits, clause_of, sizes)


def compute_stats(cnf: CnfFormula, flat: _Flat | None = None) -> tuple[AtomStats, ClauseStats]:
    """One vectorised pass.  Duplicate literals count once per occurrence."""
    f = flat or _flatten(cnf)
    nc = len(f.sizes)
    neg_lit = f.lits < 0
    negative = np.bincount(f.clause_of, weights=neg_lit, minlength=nc)
    positive = f.sizes - negative
    size = f.sizes.astype(float)
    binary = (f.sizes == 2).astype(float)
    ternary = (f.sizes == 3).astype(float)
    ctab = np.column_stack([
        size, binary, ternary, positive, negative,
        binary * (negative == 2), (negative == 1).astype(float),
    ]) if nc else np.zeros((0, 7))

    atoms = np.abs(f.lits)
    na = max(cnf.num_vars, int(atoms.max()) if len(atoms) else 0) + 1

    def per_atom(w):
        return np.bincount(atoms, weights=w, minlength=na)

    occ = per_atom(np.ones(len(atoms)))
    with np.errstate(invalid="ignore", divide="ignore"):
        occ_avg = np.where(occ > 0, per_atom(size[f.clause_of]) / np.where(occ > 0, occ, 1), 0.0)
    all_pos = (negative == 0)[f.clause_of]
    all_neg = (positive == 0)[f.clause_of]
    atab = np.column_stack([
        occ, occ_avg,
        per_atom(binary[f.clause_of]), per_atom(ternary[f.clause_of]),
        per_atom(~neg_lit), per_atom(neg_lit),
        per_atom(all_pos), per_atom(all_neg),
    ]) if len(atoms) else np.zeros((na, 8))
    return AtomStats(atab), ClauseStats(ctab)


def _weighted(table: np.ndarray, w: np.ndarray) -> np.ndarray:
    # fixed accumulation order keeps each row's score a function of that row alone
    out = np.zeros(table.shape[0])
    for j in range(table.shape[1]):
        out += table[:, j] * w[j]
    return out


def atom_scores(cnf: CnfFormula, w: SatWeights, stats: AtomStats | None = None) -> np.ndarray:
    """Scores for every atom id (index 0 unused)."""
    if stats is None:
        stats, _ = compute_stats(cnf)
    return _weighted(stats.table, w.atom_vector)


def atom_score(p: int, cnf: CnfFormula, w: SatWeights) -> float:
    return float(atom_scores(cnf, w)[p])


def _segment_sums(values: np.ndarray, clause_of: np.ndarray, nc: int) -> np.ndarray:
    # sum each clause's values in sorted order so the result ignores literal order
    order = np.lexsort((values, clause_of))
    v = values[order]
    out = np.zeros(nc)
    if len(v):
        sizes = np.bincount(clause_of, minlength=nc)
        starts = np.concatenate([[0], np.cumsum(sizes)[:-1]])
        nz = sizes > 0
        out[nz] = np.add.reduceat(v, starts[nz])
    return out


def clause_scores(cnf: CnfFormula, w: SatWeights, *, weighted_mixed: bool = True,
                  flat: _Flat | None = None, stats=None) -> np.ndarray:
    """Clause scores under ``w.ord_cl``.

    ``ord_cl=2`` adds the literal-based and clause-based parts.  By default the
    clause part is weighted as in ``ord_cl=1``; ``weighted_mixed=False`` sums the
    raw clause criteria instead.
    """
    f = flat or _flatten(cnf)
    astats, cstats = stats or compute_stats(cnf, f)
    nc = len(f.sizes)
    lit_part = clause_part = np.zeros(nc)
    if w.ord_cl in (0, 2):
        at = _weighted(astats.table, w.atom_vector)
        lit_part = _segment_sums(at[np.abs(f.lits)], f.clause_of, nc)
    if w.ord_cl == 1 or (w.ord_cl == 2 and weighted_mixed):
        clause_part = _weighted(cstats.table, w.clause_vector)
    elif w.ord_cl == 2:
        clause_part = _weighted(cstats.table, np.ones(len(CLAUSE_CRITERIA)))
    return lit_part + clause_part


def clause_score(index: int, cnf: CnfFormula, w: SatWeights, **kw) -> float:
    """Score of clause number ``index`` of ``cnf``."""
    return float(clause_scores(cnf, w, **kw)[index])


def reorder_cnf(cnf: CnfFormula, w: SatWeights, *, weighted_mixed: bool = True) -> CnfFormula:
    """Sort clauses (and optionally literals) by descending score; header unchanged."""
    if not cnf.clauses:
        return cnf
    f = _flatten(cnf)
    stats = compute_stats(cnf, f)
    cs = clause_scores(cnf, w, weighted_mixed=weighted_mixed, flat=f, stats=stats)
    order = np.argsort(-cs, kind="stable")

    lits = f.lits
    if w.ord_lit:
        at = _weighted(stats[0].table, w.atom_vector)
        # primary key clause, then descending score; lexsort is stable
        perm = np.lexsort((-at[np.abs(lits)], f.clause_of))
        lits = lits[perm]
    bounds = np.cumsum(f.sizes)[:-1]
    per_clause = np.split(lits, bounds)
    clauses = tuple(tuple(per_clause[i].tolist()) for i in order)
    return CnfFormula(cnf.num_vars, cnf.num_clauses, clauses)
