"""
Ordering a ground ASP program
=============================

The smodels file below holds two disjunctive rules, a weighted sum aggregate
and one normal rule.  We score every statement, sort, and check that the
stable models do not move.
"""
from kmconf.asp import (
    aggregate_score,
    literal_score,
    parse_asp_weights,
    remap_ids_by_score,
    reorder_program,
    rule_score,
    score_id_map,
)
from kmconf.formats import parse_smodels, write_smodels
from kmconf.model import AggregateDef, enumerate_stable_models

text = """8 2 2 3 0 0
8 2 4 5 2 1 2 3
5 6 7 3 0 3 5 2 1 2 4
1 7 1 0 6
0
3 p1
4 p2
5 p3
2 p4
7 p5
0
B+
0
B-
0
1
"""
prog, diag = parse_smodels(text)
names = dict(prog.symbols)

w, consts = parse_asp_weights("aggregate 10\nneg_body_occ 10\n")

# literal scores: only p4 (atom 2) occurs negatively in a body
for a in sorted(prog.atoms()):
    print(a, names.get(a, "-"), literal_score(a, prog, w))

for st in prog.statements:
    if isinstance(st, AggregateDef):
        print("aggregate", round(aggregate_score(st, prog, w, consts), 2))
    else:
        print(type(st).__name__, rule_score(st, prog, w, consts))

conf = reorder_program(prog, w, consts)
print(write_smodels(conf))

# same stable models, printed by name
models = enumerate_stable_models(prog)
assert enumerate_stable_models(conf) == models
print([sorted(names[a] for a in m if a in names) for m in models])

# optional: renumber atoms so high scorers get the small ids
m = score_id_map(prog, w)
print(m)
remapped = write_smodels(remap_ids_by_score(conf, w))
print(remapped[:remapped.index("\n0\n") + 1])
