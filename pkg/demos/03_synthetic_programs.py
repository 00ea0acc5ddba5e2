"""
Pigeonhole plus graph colouring
===============================

The generator glues a pigeonhole problem to a colouring problem on a complete
graph.  Small cases are easy to check by brute force.
"""
from kmconf.formats import write_smodels
from kmconf.model import enumerate_stable_models
from kmconf.synth import SynthParams, generate

for p, h, k, n in [(1, 1, 1, 1), (2, 2, 2, 2), (2, 1, 1, 1), (1, 1, 2, 3), (1, 3, 1, 1)]:
    prog = generate(SynthParams(p, h, k, n))
    models = enumerate_stable_models(prog, atom_cap=22)
    print(f"pigeons={p} holes={h} colours={k} nodes={n}: {len(models)} stable models,"
          f" {len(prog.statements)} statements")

# the smallest one in full
print(write_smodels(generate(SynthParams(1, 1, 1, 1))))
