from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _gen import cnfs, random_cnf, random_sat_weights, sat_weights
from conftest import SAT_W_TEXT, SMALL_CNF, SMALL_CNF_CONF
from kmconf.formats import parse_dimacs, write_dimacs
from kmconf.model import CnfFormula, enumerate_models
from kmconf.sat import (
    ATOM_CRITERIA,
    CLAUSE_CRITERIA,
    SatWeights,
    atom_score,
    atom_scores,
    clause_score,
    clause_scores,
    compute_stats,
    reorder_cnf,
)
from kmconf.weights import WeightFileError

PHI_RUN = parse_dimacs(SMALL_CNF)[0]
W_SMALL = SatWeights.parse(SAT_W_TEXT)


# independent, deliberately naive re-scan of a formula

def rescan_clause(c):
    neg = sum(1 for l in c if l < 0)
    n = len(c)
    return {"size": n, "bin": int(n == 2), "ter": int(n == 3), "positive": n - neg, "negative": neg,
            "bin_neg": int(n == 2 and neg == 2), "only_one_neg": int(neg == 1)}


def rescan_atom(a, cnf):
    occ = [(c, l) for c in cnf.clauses for l in c if abs(l) == a]
    return {
        "occ": len(occ),
        "occ_avg": sum(len(c) for c, _ in occ) / len(occ) if occ else 0.0,
        "occ_bin": sum(len(c) == 2 for c, _ in occ),
        "occ_ter": sum(len(c) == 3 for c, _ in occ),
        "occ_pos": sum(l > 0 for _, l in occ),
        "occ_neg": sum(l < 0 for _, l in occ),
        "occ_all_pos": sum(all(x > 0 for x in c) for c, _ in occ),
        "occ_all_neg": sum(all(x < 0 for x in c) for c, _ in occ),
    }


def naive_clause_score(c, cnf, w, weighted_mixed=True):
    at = {a: sum(rescan_atom(a, cnf)[k] * getattr(w, k) for k in ATOM_CRITERIA) for a in cnf.atoms()}
    lit = sum(at[abs(l)] for l in c)
    cl = rescan_clause(c)
    cw = sum(cl[k] * getattr(w, k) for k in CLAUSE_CRITERIA)
    return {0: lit, 1: cw, 2: lit + (cw if weighted_mixed else sum(cl.values()))}[w.ord_cl]


# --------------------------------------------------------------------------- stats


def test_stats_running_example():
    atoms, clauses = compute_stats(PHI_RUN)
    row = dict(zip(ATOM_CRITERIA, atoms.table[1]))
    assert row == {"occ": 2, "occ_avg": 3.0, "occ_bin": 1, "occ_ter": 0, "occ_pos": 1, "occ_neg": 1,
                   "occ_all_pos": 0, "occ_all_neg": 0}
    assert dict(zip(CLAUSE_CRITERIA, clauses.table[2])) == {
        "size": 2, "bin": 1, "ter": 0, "positive": 0, "negative": 2, "bin_neg": 1, "only_one_neg": 0}


def test_stats_empty():
    atoms, clauses = compute_stats(CnfFormula(0, 0, ()))
    assert clauses.table.shape == (0, 7)
    assert atoms.table[1:].size == 0


@settings(max_examples=150)
@given(cnfs(max_atoms=10, max_clauses=15, max_len=5))
def test_stats_match_rescan(cnf):
    atoms, clauses = compute_stats(cnf)
    for i, c in enumerate(cnf.clauses):
        assert dict(zip(CLAUSE_CRITERIA, clauses.table[i])) == rescan_clause(c)
    for a in range(1, cnf.num_vars + 1):
        got = dict(zip(ATOM_CRITERIA, atoms.table[a]))
        want = rescan_atom(a, cnf)
        assert got == pytest.approx(want)
        assert got["occ"] == got["occ_pos"] + got["occ_neg"]
        assert got["occ_bin"] + got["occ_ter"] <= got["occ"]
    for row in clauses.table:
        r = dict(zip(CLAUSE_CRITERIA, row))
        assert r["size"] == r["positive"] + r["negative"]


# --------------------------------------------------------------------------- scores


def test_atom_score_examples():
    w = SatWeights(occ=10.0)
    assert atom_score(3, PHI_RUN, w) == 20.0
    assert all(atom_score(a, PHI_RUN, SatWeights()) == 0.0 for a in range(1, 6))


@given(cnfs(), sat_weights)
def test_atom_score_homogeneous(cnf, w):
    d = w.as_dict()
    half = SatWeights.from_dict({k: v / 2 if k not in ("ord_lit", "ord_cl") else v for k, v in d.items()})
    np.testing.assert_array_equal(atom_scores(cnf, w), 2 * atom_scores(cnf, half))


def test_clause_score_small_example():
    w = SatWeights(size=10.0, negative=10.0, ord_cl=1)
    assert clause_score(1, PHI_RUN, w) == 60.0
    assert clause_score(0, PHI_RUN, w) == 30.0
    assert clause_scores(PHI_RUN, W_SMALL).tolist() == [30.0, 60.0, 40.0]
    assert clause_scores(PHI_RUN, SatWeights()).tolist() == [0.0, 0.0, 0.0]


@settings(max_examples=150)
@given(cnfs(max_atoms=6, max_clauses=8), sat_weights, st.booleans())
def test_clause_scores_match_naive(cnf, w, weighted_mixed):
    got = clause_scores(cnf, w, weighted_mixed=weighted_mixed)
    want = [naive_clause_score(c, cnf, w, weighted_mixed) for c in cnf.clauses]
    np.testing.assert_allclose(got, want, rtol=1e-9, atol=1e-9)


def test_mixed_selector_variants():
    w = SatWeights(size=10.0, occ=1.0, ord_cl=2)
    # clause "1 -3": atoms 1 and 3 occur twice each; size 2
    assert clause_score(0, PHI_RUN, w) == 2 + 2 + 20
    assert clause_score(0, PHI_RUN, w, weighted_mixed=False) == 2 + 2 + (2 + 1 + 0 + 1 + 1 + 0 + 1)


# --------------------------------------------------------------------------- reorder


def test_reorder_small_cnf():
    assert write_dimacs(reorder_cnf(PHI_RUN, W_SMALL)) == SMALL_CNF_CONF


def test_zero_weights_identity():
    rng = np.random.default_rng(0)
    for _ in range(20):
        cnf = random_cnf(rng)
        assert reorder_cnf(cnf, SatWeights()) == cnf


def test_ties_keep_file_order():
    cnf = CnfFormula(4, 3, ((1, 2), (3, 4), (-1, -2, -3)))
    out = reorder_cnf(cnf, SatWeights(bin=1.0, ord_cl=1))
    assert out.clauses == ((1, 2), (3, 4), (-1, -2, -3))
    out = reorder_cnf(cnf, SatWeights(bin=-1.0, ord_cl=1))
    assert out.clauses == ((-1, -2, -3), (1, 2), (3, 4))


def _multiset(cnf):
    return Counter(tuple(sorted(c)) for c in cnf.clauses)


@settings(max_examples=200)
@given(cnfs(max_atoms=10, max_clauses=20, max_len=5), sat_weights)
def test_reorder_properties(cnf, w):
    out = reorder_cnf(cnf, w)
    assert (out.num_vars, out.num_clauses) == (cnf.num_vars, cnf.num_clauses)
    assert _multiset(out) == _multiset(cnf)
    if not w.ord_lit:
        assert Counter(out.clauses) == Counter(cnf.clauses)
    assert reorder_cnf(out, w) == out
    assert write_dimacs(reorder_cnf(cnf, w)) == write_dimacs(out)


@settings(max_examples=200)
@given(cnfs(max_atoms=10, max_clauses=20, max_len=5), sat_weights)
def test_reorder_sorted_descending(cnf, w):
    out = reorder_cnf(cnf, w)
    s = clause_scores(out, w)
    assert all(s[i] >= s[i + 1] for i in range(len(s) - 1))
    if w.ord_lit:
        at = atom_scores(cnf, w)
        for c in out.clauses:
            v = [at[abs(l)] for l in c]
            assert v == sorted(v, reverse=True)


@settings(max_examples=150)
@given(cnfs(max_atoms=8, max_clauses=20), sat_weights,
       st.sampled_from([0.125, 0.5, 2.0, 4.0, 1024.0]))
def test_scale_invariance_exact(cnf, w, alpha):
    d = {k: (v * alpha if k not in ("ord_lit", "ord_cl") else v) for k, v in w.as_dict().items()}
    if any(abs(v) > 10 for k, v in d.items() if k not in ("ord_lit", "ord_cl")):
        d = {k: (v / 1024 if k not in ("ord_lit", "ord_cl") else v) for k, v in d.items()}
    scaled = SatWeights.from_dict(d)
    assert write_dimacs(reorder_cnf(cnf, scaled)) == write_dimacs(reorder_cnf(cnf, w))


def test_scale_invariance_random_alpha():
    rng = np.random.default_rng(9)
    for _ in range(200):
        cnf = random_cnf(rng, max_atoms=12, max_clauses=40)
        w = random_sat_weights(rng)
        alpha = float(rng.uniform(0.05, 1.0))
        d = {k: (v * alpha if k not in ("ord_lit", "ord_cl") else v) for k, v in w.as_dict().items()}
        assert write_dimacs(reorder_cnf(cnf, SatWeights.from_dict(d))) == write_dimacs(reorder_cnf(cnf, w))


def test_models_preserved_sample():
    rng = np.random.default_rng(21)
    for _ in range(100):
        cnf = random_cnf(rng)
        w = random_sat_weights(rng, sparse=bool(rng.integers(2)))
        assert enumerate_models(reorder_cnf(cnf, w)) == enumerate_models(cnf)


def test_parallel_scoring_matches_sequential():
    from concurrent.futures import ThreadPoolExecutor

    rng = np.random.default_rng(2)
    cnf = random_cnf(rng, max_atoms=50, max_clauses=200)
    w = random_sat_weights(rng)
    want = write_dimacs(reorder_cnf(cnf, w))
    with ThreadPoolExecutor(4) as ex:
        assert set(ex.map(lambda _: write_dimacs(reorder_cnf(cnf, w)), range(16))) == {want}


# --------------------------------------------------------------------------- weight files


def test_weight_file_round_trip_and_defaults():
    w = SatWeights.parse("# sparse\nsize 10\n\nord_cl 2\n")
    assert w.size == 10.0 and w.ord_cl == 2 and w.occ == 0.0
    assert SatWeights.parse(w.dumps()) == w


@pytest.mark.parametrize("text", ["sise 1\n", "size 1\nsize 2\n", "size x\n", "ord_lit 0.5\n", "size\n"])
def test_weight_file_errors(text):
    with pytest.raises(WeightFileError):
        SatWeights.parse(text)


@pytest.mark.parametrize("text", ["size 10.5\n", "ord_cl 3\n", "ord_lit 2\n"])
def test_weight_range_errors(text):
    with pytest.raises(ValueError):
        SatWeights.parse(text)
