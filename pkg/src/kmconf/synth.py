"""Ground generator for the combined pigeonhole / complete-graph colouring family.

Per pigeon ``i``: a choice over ``in(i,1..h)``; "exactly one hole" as two count
aggregates (``>= 2`` forbidden, ``>= 1`` required through a constraint on its
negation).  Per hole, every pair of pigeons is excluded.  Per node a disjunction
over ``col(i,1..k)``; per directed edge and colour a constraint; edge facts for
the complete graph on ``n`` nodes.  Atom 1 is the false atom; the rest are
numbered in generation order.
"""
from __future__ import annotations

from dataclasses import dataclass

from .model import MAX_ID, AggregateDef, AspProgram, ChoiceRule, DisjunctiveRule, NormalRule


@dataclass(frozen=True)
class SynthParams:
    pigeons: int
    holes: int
    colors: int
    nodes: int

    def __post_init__(self):
        for k in ("pigeons", "holes", "colors", "nodes"):
            if getattr(self, k) < 1:
                raise ValueError(f"{k} must be >= 1")

    def atom_count(self) -> int:
        p, h, k, n = self.pigeons, self.holes, self.colors, self.nodes
        return 1 + p * h + 2 * p + n * k + n * (n - 1)


def generate(params: SynthParams, seed: int = 0) -> AspProgram:
    """Build the ground program.  ``seed`` is accepted for interface stability and unused."""
    del seed
    if params.atom_count() > MAX_ID:
        raise OverflowError("parameters overflow the atom id space")
    p, h, k, n = params.pigeons, params.holes, params.colors, params.nodes
    next_id = iter(range(2, MAX_ID))
    symbols: list[tuple[int, str]] = []

    def named(name: str) -> int:
        a = next(next_id)
        symbols.append((a, name))
        return a

    inn = {(i, j): named(f"in({i},{j})") for i in range(1, p + 1) for j in range(1, h + 1)}
    col = {(i, c): named(f"col({i},c{c})") for i in range(1, n + 1) for c in range(1, k + 1)}
    edge = {(i, j): named(f"edge({i},{j})")
            for i in range(1, n + 1) for j in range(1, n + 1) if i != j}

    sts = []
    for i in range(1, p + 1):
        holes = tuple(inn[i, j] for j in range(1, h + 1))
        sts.append(ChoiceRule(holes))
        two, one = next(next_id), next(next_id)
        elems = tuple((1, a) for a in holes)
        sts.append(AggregateDef(two, "count", 2, elems))
        sts.append(NormalRule(None, pos=(two,)))
        sts.append(AggregateDef(one, "count", 1, elems))
        sts.append(NormalRule(None, neg=(one,)))
    for j in range(1, h + 1):
        for i1 in range(1, p + 1):
            for i2 in range(i1 + 1, p + 1):
                sts.append(NormalRule(None, pos=(inn[i1, j], inn[i2, j])))
    for i in range(1, n + 1):
        heads = tuple(col[i, c] for c in range(1, k + 1))
        sts.append(DisjunctiveRule(heads) if k > 1 else NormalRule(heads[0]))
    for (i1, i2), e in edge.items():
        for c in range(1, k + 1):
            sts.append(NormalRule(None, pos=(e, col[i1, c], col[i2, c])))
    for e in edge.values():
        sts.append(NormalRule(e))
    return AspProgram(tuple(sts), tuple(symbols), (), (1,), 1, false_atom=1)
