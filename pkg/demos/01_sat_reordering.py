"""
Reordering a CNF file by feature weights
========================================

A tiny formula, the per-atom and per-clause statistics behind the scores, and
the configured file that comes out.
"""
import numpy as np

from kmconf.formats import parse_dimacs, write_dimacs
from kmconf.sat import ATOM_CRITERIA, SatWeights, atom_scores, clause_scores, compute_stats, reorder_cnf

text = """c three clauses over five atoms
p cnf 5 3
1 -3 0
2 3 -1 -4 0
-5 -4 0
"""
cnf, diag = parse_dimacs(text)
print(cnf.clauses)

# raw statistics, one row per atom (row 0 is padding)
atoms, clauses = compute_stats(cnf)
print(ATOM_CRITERIA)
print(atoms.table[1:])
print(clauses.table)

# weights live in a flat "name value" file; anything left out is 0
w = SatWeights.parse("size 10\nnegative 10\nocc 10\nord_lit 1\nord_cl 1\n")
print(atom_scores(cnf, w)[1:])   # occ only: 10 per occurrence
print(clause_scores(cnf, w))     # ord_cl 1 means clause criteria only

out = reorder_cnf(cnf, w)
print(write_dimacs(out))

# switching the selector to the mixed score (literal sum plus clause part)
mixed = SatWeights.from_dict({**w.as_dict(), "ord_cl": 2})
print(clause_scores(cnf, mixed))

# all-zero weights leave the file as it was
assert reorder_cnf(cnf, SatWeights()) == cnf

# scaling every weight by a positive factor gives the same order
half = SatWeights.from_dict({k: (v / 2 if k not in ("ord_lit", "ord_cl") else v) for k, v in w.as_dict().items()})
assert write_dimacs(reorder_cnf(cnf, half)) == write_dimacs(out)
print(np.argsort(-clause_scores(cnf, w), kind="stable"))
