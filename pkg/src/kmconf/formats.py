"""DIMACS CNF and smodels (lparse) readers and writers.

Both writers are byte-deterministic: single spaces, ``\\n`` line endings, no
comments.  Parsers never reorder clauses, statements or literals.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .model import (
    MAX_ID,
    AggregateDef,
    AspProgram,
    ChoiceRule,
    CnfFormula,
    DisjunctiveRule,
    NormalRule,
    OpaqueStatement,
    Statement,
)

log = logging.getLogger(__name__)


class FormatError(ValueError):
    def __init__(self, line: int | None, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass
class ParseDiagnostics:
    strict: bool = False
    warnings: list[tuple[int, str]] = field(default_factory=list)

    def warn(self, line: int, message: str) -> None:
        if self.strict:
            raise FormatError(line, message)
        log.debug("line %d: %s", line, message)
        self.warnings.append((line, message))


def _int(tok: str, lineno: int) -> int:
    try:
        v = int(tok)
    except ValueError:
        raise FormatError(lineno, f"non-integer token {tok!r}") from None
    if not -MAX_ID <= v <= MAX_ID:
        raise FormatError(lineno, f"integer {tok} overflows 64 bits")
    return v


# --------------------------------------------------------------------------- DIMACS


def parse_dimacs(text: str, strict: bool = False) -> tuple[CnfFormula, ParseDiagnostics]:
    diag = ParseDiagnostics(strict=strict)
    header: tuple[int, int] | None = None
    clauses: list[tuple[int, ...]] = []
    cur: list[int] = []
    cur_line = 0
    lineno = 0
    for lineno, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        if not s or s[0] == "c":
            continue
        if s[0] == "%":
            diag.warn(lineno, "'%' end marker; ignoring the rest of the file")
            break
        if s[0] == "p":
            f = s.split()
            if header is not None:
                raise FormatError(lineno, "duplicate header")
            if len(f) != 4 or f[1] != "cnf":
                raise FormatError(lineno, f"bad header {s!r}")
            v, c = _int(f[2], lineno), _int(f[3], lineno)
            if v < 0 or c < 0:
                raise FormatError(lineno, "negative header count")
            header = (v, c)
            continue
        if header is None:
            raise FormatError(lineno, "clause before 'p cnf' header")
        for tok in s.split():
            lit = _int(tok, lineno)
            if not cur:
                cur_line = lineno
            if lit == 0:
                if not cur:
                    diag.warn(lineno, "empty clause")
                clauses.append(tuple(cur))
                cur = []
            else:
                if abs(lit) > header[0]:
                    diag.warn(lineno, f"literal {lit} exceeds declared atom count {header[0]}")
                cur.append(lit)
    if header is None:
        raise FormatError(None, "missing 'p cnf' header")
    if cur:
        raise FormatError(cur_line, "clause not terminated by 0 at end of file")
    if len(clauses) != header[1]:
        diag.warn(lineno, f"header declares {header[1]} clauses, found {len(clauses)}")
    return CnfFormula(header[0], header[1], tuple(clauses)), diag


def write_dimacs(cnf: CnfFormula) -> str:
    out = [f"p cnf {cnf.num_vars} {cnf.num_clauses}\n"]
    for c in cnf.clauses:
        out.append(" ".join(map(str, c + (0,))) + "\n")
    return "".join(out)


# --------------------------------------------------------------------------- smodels


class _Cursor:
    def __init__(self, toks: list[int], lineno: int):
        self.toks, self.i, self.lineno = toks, 0, lineno

    def take(self, n: int = 1) -> list[int]:
        if n < 0:
            raise FormatError(self.lineno, "negative count")
        if self.i + n > len(self.toks):
            raise FormatError(self.lineno, "truncated statement")
        out = self.toks[self.i:self.i + n]
        self.i += n
        return out

    def one(self) -> int:
        return self.take(1)[0]

    def count(self) -> int:
        v = self.one()
        if v < 0:
            raise FormatError(self.lineno, "negative count")
        return v

    def body(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        n, nneg = self.count(), self.count()
        if nneg > n:
            raise FormatError(self.lineno, "more negative literals than literals")
        neg = tuple(self.take(nneg))
        pos = tuple(self.take(n - nneg))
        return pos, neg


def _decode(toks: list[int], lineno: int, false_atom: int | None, diag: ParseDiagnostics) -> Statement:
    cur = _Cursor(toks, lineno)
    t = cur.one()
    if t == 1:
        head = cur.one()
        pos, neg = cur.body()
        st: Statement = NormalRule(None if head == false_atom else head, pos, neg)
    elif t == 2:
        head = cur.one()
        n, nneg = cur.count(), cur.count()
        if nneg > n:
            raise FormatError(lineno, "more negative literals than literals")
        bound = cur.one()
        neg, pos = cur.take(nneg), cur.take(n - nneg)
        st = AggregateDef(head, "count", bound, tuple((1, -a) for a in neg) + tuple((1, a) for a in pos))
    elif t == 3:
        heads = tuple(cur.take(cur.count()))
        pos, neg = cur.body()
        st = ChoiceRule(heads, pos, neg)
    elif t == 5:
        head, bound = cur.one(), cur.one()
        n, nneg = cur.count(), cur.count()
        if nneg > n:
            raise FormatError(lineno, "more negative literals than literals")
        neg, pos = cur.take(nneg), cur.take(n - nneg)
        weights = cur.take(n)
        lits = [-a for a in neg] + list(pos)
        st = AggregateDef(head, "sum", bound, tuple(zip(weights, lits)))
    elif t == 8:
        heads = tuple(cur.take(cur.count()))
        if len(heads) < 2:
            diag.warn(lineno, "disjunctive rule with fewer than two heads")
        pos, neg = cur.body()
        st = DisjunctiveRule(heads, pos, neg)
    else:
        if t != 6:
            diag.warn(lineno, f"unknown rule type {t}; carried opaquely")
        return OpaqueStatement(tuple(toks))
    if cur.i != len(toks):
        diag.warn(lineno, "trailing tokens after statement dropped")
    if isinstance(st, AggregateDef):
        for msg in st.problems():
            diag.warn(lineno, msg)
    return st


def _scan_false_atom(lines: list[str]) -> int | None:
    """lparse convention: atom 1 listed under ``B-`` and absent from the symbol table."""
    try:
        bneg = next(i for i, l in enumerate(lines) if l.strip() == "B-")
    except StopIteration:
        return None
    listed = set()
    for l in lines[bneg + 1:]:
        s = l.strip()
        if s == "0" or not s:
            break
        try:
            listed.add(int(s))
        except ValueError:
            break
    if 1 not in listed:
        return None
    try:
        end = next(i for i, l in enumerate(lines) if l.strip() == "0")
    except StopIteration:
        return None
    for l in lines[end + 1:bneg]:
        f = l.split(maxsplit=1)
        if f and f[0] == "1" and len(f) == 2:
            return None
    return 1


def parse_smodels(text: str, strict: bool = False) -> tuple[AspProgram, ParseDiagnostics]:
    diag = ParseDiagnostics(strict=strict)
    lines = text.splitlines()
    false_atom = _scan_false_atom(lines)
    statements: list[Statement] = []
    i = 0
    terminated = False
    while i < len(lines):
        lineno = i + 1
        s = lines[i].strip()
        i += 1
        if not s:
            continue
        toks = [_int(t, lineno) for t in s.split()]
        if toks == [0]:
            terminated = True
            break
        statements.append(_decode(toks, lineno, false_atom, diag))
    if not terminated:
        diag.warn(len(lines), "rule section not terminated; no symbol table or compute sections")
        return AspProgram(tuple(statements), false_atom=false_atom, complete=False), diag

    if not any(l.strip() for l in lines[i:]):
        diag.warn(len(lines), "no symbol table or compute sections; assuming empty ones")
        return AspProgram(tuple(statements), (), (), (false_atom,) if false_atom else (), 1,
                          false_atom, True), diag

    symbols: list[tuple[int, str]] = []
    while True:
        if i >= len(lines):
            raise FormatError(len(lines), "symbol table not terminated")
        lineno, s = i + 1, lines[i].strip()
        i += 1
        if s == "0":
            break
        f = lines[i - 1].rstrip("\r\n").lstrip().split(" ", 1)
        if len(f) != 2:
            raise FormatError(lineno, f"bad symbol table entry {s!r}")
        symbols.append((_int(f[0], lineno), f[1]))

    def section(tag: str) -> list[int]:
        nonlocal i
        if i >= len(lines) or lines[i].strip() != tag:
            raise FormatError(i + 1, f"expected {tag!r}")
        i += 1
        out = []
        while True:
            if i >= len(lines):
                raise FormatError(len(lines), f"{tag} section not terminated")
            s = lines[i].strip()
            i += 1
            v = _int(s, i)
            if v == 0:
                return out
            out.append(v)

    bpos = section("B+")
    bneg = section("B-")
    if i >= len(lines):
        raise FormatError(len(lines), "missing model count")
    models = _int(lines[i].strip(), i + 1)
    i += 1
    if any(l.strip() for l in lines[i:]):
        diag.warn(i + 1, "text after model count ignored")
    return AspProgram(tuple(statements), tuple(symbols), tuple(bpos), tuple(bneg), models,
                      false_atom, True), diag


def statement_tokens(st: Statement, false_atom: int | None = None) -> list[int]:
    if isinstance(st, NormalRule):
        if st.head is None:
            if false_atom is None:
                raise ValueError("program has constraints but no false atom")
            head = false_atom
        else:
            head = st.head
        return [1, head, len(st.pos) + len(st.neg), len(st.neg), *st.neg, *st.pos]
    if isinstance(st, (DisjunctiveRule, ChoiceRule)):
        t = 8 if isinstance(st, DisjunctiveRule) else 3
        return [t, len(st.heads), *st.heads, len(st.pos) + len(st.neg), len(st.neg), *st.neg, *st.pos]
    if isinstance(st, AggregateDef):
        neg = [-l for _, l in st.elements if l < 0]
        pos = [l for _, l in st.elements if l > 0]
        n = len(st.elements)
        if st.kind == "count":
            return [2, st.head, n, len(neg), st.bound, *neg, *pos]
        return [5, st.head, st.bound, n, len(neg), *neg, *pos, *(w for w, _ in st.elements)]
    if isinstance(st, OpaqueStatement):
        return list(st.tokens)
    raise TypeError(type(st))


def write_smodels(program: AspProgram) -> str:
    out = [" ".join(map(str, statement_tokens(s, program.false_atom))) + "\n" for s in program.statements]
    if not program.complete:
        return "".join(out)
    out.append("0\n")
    out.extend(f"{i} {name}\n" for i, name in program.symbols)
    out.append("0\nB+\n")
    out.extend(f"{a}\n" for a in program.compute_pos)
    out.append("0\nB-\n")
    out.extend(f"{a}\n" for a in program.compute_neg)
    out.append(f"0\n{program.models}\n")
    return "".join(out)


# --------------------------------------------------------------------------- opaque statements


def opaque_atoms(st: OpaqueStatement) -> list[int]:
    """Atom ids referenced by an opaque statement whose layout is known (type 6)."""
    if st.rule_type == 6 and len(st.tokens) >= 4:
        n = st.tokens[2]
        return list(st.tokens[4:4 + n])
    return []


def remap_opaque(st: OpaqueStatement, mapping: dict[int, int]) -> OpaqueStatement:
    if st.rule_type != 6:
        raise ValueError(f"cannot rename atoms inside opaque statement of type {st.rule_type}")
    t = list(st.tokens)
    n = t[2]
    t[4:4 + n] = [mapping[a] for a in t[4:4 + n]]
    return OpaqueStatement(tuple(t))
