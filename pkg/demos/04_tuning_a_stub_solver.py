"""
Tuning weights against a fake solver
====================================

``tests/stubs/quartile_solver.py`` burns CPU in proportion to the clause count,
and less so when the binary clauses sit in the first quarter of the file.  The
instances below list their binaries last, so a good weight vector has to learn
to pull them forward.  Takes about a minute.
"""
import sys
import tempfile
from pathlib import Path

import numpy as np

from kmconf import bench
from kmconf.cli import SolverObjective
from kmconf.formats import write_dimacs
from kmconf.model import CnfFormula
from kmconf.sat import SatWeights
from kmconf.tuner import random_search, sat_space, smbo_search

STUB = Path(__file__).resolve().parent.parent / "tests" / "stubs" / "quartile_solver.py"
rng = np.random.default_rng(0)


def instance(n_clauses=24, n_atoms=10):
    n_bin = n_clauses // 4
    sizes = [int(rng.integers(3, 6)) for _ in range(n_clauses - n_bin)] + [2] * n_bin
    clauses = []
    for k in sizes:
        atoms = rng.choice(np.arange(1, n_atoms + 1), size=k, replace=False)
        clauses.append(tuple(int(a * s) for a, s in zip(atoms, rng.choice((-1, 1), size=k))))
    return CnfFormula(n_atoms, n_clauses, tuple(clauses))


work = Path(tempfile.mkdtemp(prefix="kmconf-demo-"))
paths = []
for i in range(12):
    p = work / f"f{i}.cnf"
    p.write_text(write_dimacs(instance()))
    paths.append(str(p))
parts = bench.split(paths, 0.5, seed=0)

manifest = bench.SolverManifest("quartile", f"{sys.executable} {STUB} {{instance}}")
cutoff = 5.0
objective = SolverObjective(manifest, "sat", cutoff, bench.parse_memory("2G"))

res = smbo_search(sat_space(), objective, parts.train, 150, seed=0, jobs=4)
print("smbo picked:", {k: round(v, 2) for k, v in res.best.items() if v})
print("incumbent mean cost on", res.incumbent.n, "training instances:", round(res.incumbent.mean, 3))

baseline = random_search(sat_space(), objective, parts.train, 150, seed=0, jobs=4)

# held-out comparison
for label, cfg in [("zeros", sat_space().default()), ("random", baseline.best), ("smbo", res.best)]:
    recs = [objective.run(cfg, p, label) for p in parts.test]
    print(f"{label:7s} test PAR10 {bench.par10(recs, cutoff):.3f}s")

objective.close()
print(SatWeights.from_dict(res.best).dumps())
