import dataclasses
import subprocess
import sys

import numpy as np
import pytest

from _gen import binaries_last_cnf, random_cnf
from conftest import CONF_RULES, SAT_W_TEXT, ASP_W_TEXT, SMALL_CNF, SMALL_CNF_CONF, RUN_SM
from kmconf.bench import read_run_log
from kmconf.cli import main
from kmconf.formats import write_dimacs
from kmconf.sat import SatWeights


@pytest.fixture
def files(tmp_path):
    (tmp_path / "small.cnf").write_text(SMALL_CNF)
    (tmp_path / "sat.w").write_text(SAT_W_TEXT)
    (tmp_path / "run.sm").write_text(RUN_SM)
    (tmp_path / "asp.w").write_text(ASP_W_TEXT)
    return tmp_path


def test_reorder_sat_small_example(files):
    out = files / "out.cnf"
    assert main(["reorder-sat", str(files / "small.cnf"), "--weights", str(files / "sat.w"), "-o", str(out)]) == 0
    assert out.read_text() == SMALL_CNF_CONF
    # refuses to clobber without --force
    assert main(["reorder-sat", str(files / "small.cnf"), "--weights", str(files / "sat.w"), "-o", str(out)]) == 1
    assert main(["reorder-sat", str(files / "small.cnf"), "--weights", str(files / "sat.w"), "-o", str(out),
                 "--force"]) == 0


def test_zero_weights_canonical_output(tmp_path):
    rng = np.random.default_rng(3)
    (tmp_path / "zero.w").write_text("")
    for k in range(10):
        cnf = random_cnf(rng)
        src = tmp_path / f"{k}.cnf"
        src.write_text("c header\n" + write_dimacs(cnf).replace(" 0\n", "  0\n"))
        out = tmp_path / f"{k}.out"
        assert main(["reorder-sat", str(src), "--weights", str(tmp_path / "zero.w"), "-o", str(out)]) == 0
        assert out.read_text() == write_dimacs(cnf)


def test_reorder_asp(files, capsys):
    assert main(["reorder-asp", str(files / "run.sm"), "--weights", str(files / "asp.w"), "-o", "-"]) == 0
    assert capsys.readouterr().out.startswith(CONF_RULES + "0\n")
    out = files / "remap.sm"
    assert main(["reorder-asp", str(files / "run.sm"), "--weights", str(files / "asp.w"), "--remap-ids",
                 "-o", str(out)]) == 0
    assert out.read_text().startswith("5 5 7 3 0 2 4 1 1 2 4\n")


def test_exit_codes(files, capsys):
    assert main(["frobnicate"]) == 1
    assert main([]) == 1
    assert main(["reorder-sat", str(files / "missing.cnf"), "--weights", str(files / "sat.w"), "-o", "-"]) == 2
    (files / "bad.w").write_text("sise 1\n")
    assert main(["reorder-sat", str(files / "small.cnf"), "--weights", str(files / "bad.w"), "-o", "-"]) == 2
    (files / "bad.cnf").write_text("1 2 0\n")
    assert main(["reorder-sat", str(files / "bad.cnf"), "--weights", str(files / "sat.w"), "-o", "-"]) == 2
    assert main(["--help"]) == 0
    capsys.readouterr()


def test_module_entry_point(files):
    r = subprocess.run([sys.executable, "-m", "kmconf", "reorder-sat", str(files / "small.cnf"),
                        "--weights", str(files / "sat.w"), "-o", "-"], capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout == SMALL_CNF_CONF


def test_features_sat(files, capsys):
    assert main(["features", str(files / "small.cnf"), "--kind", "sat", "-o", "-"]) == 0
    atoms, clauses = capsys.readouterr().out.split("\n\n")
    rows = atoms.splitlines()
    assert rows[0].startswith("atom,occ,occ_avg") and len(rows) == 6
    assert rows[1] == "1,2,3,1,0,1,1,0,0"
    assert clauses.splitlines()[3] == "2,2,1,0,0,2,1,0"


def test_features_permutation_invariant(tmp_path, capsys):
    rng = np.random.default_rng(6)
    cnf = random_cnf(rng, max_atoms=8, max_clauses=15)
    perm = dataclasses.replace(cnf, clauses=tuple(cnf.clauses[i] for i in rng.permutation(len(cnf.clauses))))
    tables = []
    for name, f in (("a", cnf), ("b", perm)):
        (tmp_path / name).write_text(write_dimacs(f))
        assert main(["features", str(tmp_path / name), "--kind", "sat", "-o", "-"]) == 0
        tables.append(capsys.readouterr().out.split("\n\n")[0])
    assert tables[0] == tables[1]


def test_features_asp(files, capsys):
    assert main(["features", str(files / "run.sm"), "--kind", "asp", "-o", "-"]) == 0
    atoms, stmts = capsys.readouterr().out.split("\n\n")
    assert atoms.splitlines()[0].startswith("atom,head_occ,body_occ")
    assert [l.split(",")[1] for l in stmts.splitlines()[1:]] == ["disjunctive", "disjunctive", "aggregate", "normal"]


def test_gen_synth(tmp_path, capsys):
    assert main(["gen-synth", "--pigeons", "2", "--holes", "2", "--colors", "2", "--nodes", "2", "-o", "-"]) == 0
    text = capsys.readouterr().out
    assert "\nB-\n1\n0\n1\n" in text and "in(1,1)" in text
    assert main(["gen-synth", "--pigeons", "0", "--holes", "2", "--colors", "2", "--nodes", "2", "-o", "-"]) == 2


def test_score(tmp_path, capsys):
    log = tmp_path / "runs.csv"
    log.write_text("instance,config,cpu_seconds,outcome\nb/1,s,10,solved\nb/2,s,20,solved\nb/3,s,300,timeout\n")
    assert main(["score", "--runs", str(log), "--cutoff", "300"]) == 0
    assert capsys.readouterr().out.splitlines()[1] == "s,b,3,2,1010.0,2.0"
    assert main(["score", "--runs", str(log), "--format", "markdown"]) == 0
    assert capsys.readouterr().out.startswith("| solver |")
    log.write_text("nonsense\n")
    assert main(["score", "--runs", str(log)]) == 2


# --------------------------------------------------------------------------- run / tune with stub solvers


@pytest.fixture
def bench_dir(tmp_path, stubs):
    rng = np.random.default_rng(0)
    inst = tmp_path / "inst"
    inst.mkdir()
    for k in range(3):
        (inst / f"{k}.cnf").write_text(write_dimacs(binaries_last_cnf(rng, 12)))
    (inst / ".hidden").write_text("ignored")
    manifest = tmp_path / "quartile.solver"
    manifest.write_text(f"name quartile\ncommand {sys.executable} {stubs}/quartile_solver.py {{instance}}\n")
    return tmp_path


def test_run_and_score(bench_dir, capsys):
    log = bench_dir / "runs.csv"
    assert main(["run", "--solver", str(bench_dir / "quartile.solver"), "--instances", str(bench_dir / "inst"),
                 "--cutoff", "5", "--jobs", "2", "-o", str(log)]) == 0
    recs = read_run_log(log.read_text())
    assert len(recs) == 3 and all(r.solved and r.config == "quartile" for r in recs)
    (bench_dir / "bin.w").write_text("bin 10\nord_cl 1\n")
    log2 = bench_dir / "tuned.csv"
    assert main(["run", "--solver", str(bench_dir / "quartile.solver"), "--instances", str(bench_dir / "inst"),
                 "--weights", str(bench_dir / "bin.w"), "--kind", "sat", "--cutoff", "5", "-o", str(log2)]) == 0
    tuned = read_run_log(log2.read_text())
    assert {r.config for r in tuned} == {"quartile:bin"}
    assert sum(r.cpu_seconds for r in tuned) < sum(r.cpu_seconds for r in recs)
    assert main(["run", "--solver", str(bench_dir / "quartile.solver"), "--instances", str(bench_dir / "inst"),
                 "--weights", str(bench_dir / "bin.w"), "-o", "-"]) == 1
    assert main(["score", "--runs", str(log), str(log2), "--cutoff", "5"]) == 0
    assert len(capsys.readouterr().out.splitlines()) == 3


def test_tune_writes_weight_file_and_log(bench_dir):
    out, ck = bench_dir / "best.w", bench_dir / "tune.jsonl"
    assert main(["tune", "--solver", str(bench_dir / "quartile.solver"), "--train", str(bench_dir / "inst"),
                 "--kind", "sat", "--budget", "6", "--cutoff", "5", "--log", str(ck), "-o", str(out)]) == 0
    SatWeights.parse(out.read_text())
    assert len(ck.read_text().splitlines()) == 6
    # resuming a finished session replays it without new runs
    assert main(["tune", "--solver", str(bench_dir / "quartile.solver"), "--train", str(bench_dir / "inst"),
                 "--kind", "sat", "--budget", "6", "--cutoff", "5", "--resume", str(ck), "--log", str(ck),
                 "-o", str(out), "--force"]) == 0
    assert len(ck.read_text().splitlines()) == 6


def test_bad_manifest(bench_dir):
    (bench_dir / "bad.solver").write_text("name x\n")
    assert main(["run", "--solver", str(bench_dir / "bad.solver"), "--instances", str(bench_dir / "inst"),
                 "-o", "-"]) == 2
    assert main(["run", "--solver", str(bench_dir / "quartile.solver"), "--instances",
                 str(bench_dir / "nowhere"), "-o", "-"]) == 2
