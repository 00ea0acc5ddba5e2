"""``kmconf`` command line.  Exit codes: 0 ok, 1 usage error, 2 data error."""
from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import bench
from .asp import (
    AGGREGATE_FEATURES,
    OCCURRENCE_FEATURES,
    RULE_FEATURES,
    AspWeights,
    ProgramIndex,
    ScoringConstants,
    aggregate_features,
    format_asp_weights,
    parse_asp_weights,
    remap_ids_by_score,
    reorder_program,
    rule_features,
)
from .formats import FormatError, parse_dimacs, parse_smodels, write_dimacs, write_smodels
from .model import AggregateDef, ChoiceRule, DisjunctiveRule, NormalRule, OpaqueStatement
from .sat import ATOM_CRITERIA, CLAUSE_CRITERIA, SatWeights, compute_stats, reorder_cnf
from .synth import SynthParams, generate
from .tuner import TuneHistory, asp_space, random_search, sat_space, smbo_search
from .weights import WeightFileError

log = logging.getLogger("kmconf")


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# --------------------------------------------------------------------------- shared helpers


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except (OSError, UnicodeDecodeError) as e:
        raise DataError(f"cannot read {path}: {e}") from None


def _write(path: str | None, text: str, force: bool) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    p = Path(path)
    if p.exists() and not force:
        raise UsageError(f"{path} exists; pass --force to overwrite")
    try:
        p.write_text(text)
    except OSError as e:
        raise DataError(f"cannot write {path}: {e}") from None


def sat_weights_from(cfg: dict) -> SatWeights:
    return SatWeights.from_dict(cfg)


def asp_weights_from(cfg: dict) -> AspWeights:
    return AspWeights.from_dict(cfg)


def reorder_text(text: str, kind: str, cfg: dict, *, remap_ids: bool = False,
                 consts: ScoringConstants = ScoringConstants()) -> str:
    """Reorder one instance given as text under a tuner configuration (a plain dict)."""
    if kind == "sat":
        cnf, _ = parse_dimacs(text)
        return write_dimacs(reorder_cnf(cnf, sat_weights_from(cfg)))
    prog, _ = parse_smodels(text)
    w = asp_weights_from(cfg)
    out = reorder_program(prog, w, consts)
    if remap_ids:
        out = remap_ids_by_score(out, w)
    return write_smodels(out)


def list_instances(directory: str) -> list[str]:
    d = Path(directory)
    if not d.is_dir():
        raise DataError(f"{directory} is not a directory")
    files = sorted(str(p) for p in d.rglob("*") if p.is_file() and not p.name.startswith("."))
    if not files:
        raise DataError(f"no instances under {directory}")
    return files


class SolverObjective:
    """Per-instance tuner objective: reorder, run the solver, return the PAR10 cost.

    Reordered files go to a private temporary directory; parsed instances are
    cached so each file is read once.
    """

    def __init__(self, manifest: bench.SolverManifest, kind: str, cutoff: float, mem_limit: int | None,
                 consts: ScoringConstants = ScoringConstants(), remap_ids: bool = False):
        self.manifest, self.kind, self.cutoff, self.mem = manifest, kind, cutoff, mem_limit
        self.consts, self.remap_ids = consts, remap_ids
        self._dir = tempfile.TemporaryDirectory(prefix="kmconf-")
        self._texts: dict[str, str] = {}
        self._n = 0
        self.records: list[bench.RunRecord] = []

    def close(self):
        self._dir.cleanup()

    def run(self, cfg: dict, instance: str, config_id: str = "tuning") -> bench.RunRecord:
        if instance not in self._texts:
            self._texts[instance] = _read(instance)
        t0 = time.process_time()
        text = reorder_text(self._texts[instance], self.kind, cfg, remap_ids=self.remap_ids, consts=self.consts)
        reorder_s = time.process_time() - t0
        self._n += 1
        path = Path(self._dir.name) / f"{self._n}{Path(instance).suffix}"
        path.write_text(text)
        try:
            return bench.run_solver(self.manifest, path, self.cutoff, self.mem, config=config_id,
                                    instance_id=instance, reorder_seconds=reorder_s)
        finally:
            path.unlink(missing_ok=True)

    def __call__(self, cfg: dict, instance: str) -> float:
        r = self.run(cfg, instance)
        self.records.append(r)
        return bench.par10_cost(r, self.cutoff)


# --------------------------------------------------------------------------- subcommands


def _load_sat_weights(path: str) -> SatWeights:
    return SatWeights.parse(_read(path))


def cmd_reorder_sat(a) -> None:
    cnf, _ = parse_dimacs(_read(a.input), strict=a.strict)
    w = _load_sat_weights(a.weights)
    _write(a.output, write_dimacs(reorder_cnf(cnf, w, weighted_mixed=not a.unweighted_mixed)), a.force)


def cmd_reorder_asp(a) -> None:
    prog, _ = parse_smodels(_read(a.input), strict=a.strict)
    w, consts = parse_asp_weights(_read(a.weights))
    out = reorder_program(prog, w, consts, pin_opaque=a.pin_opaque)
    if a.remap_ids:
        out = remap_ids_by_score(out, w)
    _write(a.output, write_smodels(out), a.force)


def _csv(rows, header) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(header)
    wr.writerows(rows)
    return buf.getvalue()


def _num(x: float):
    return int(x) if float(x).is_integer() else repr(float(x))


def sat_feature_tables(text: str, strict: bool = False) -> tuple[str, str]:
    cnf, _ = parse_dimacs(text, strict=strict)
    atoms, clauses = compute_stats(cnf)
    arows = [[i] + [_num(v) for v in atoms.table[i]] for i in range(1, atoms.table.shape[0])]
    crows = [[i] + [_num(v) for v in clauses.table[i]] for i in range(clauses.table.shape[0])]
    return _csv(arows, ("atom",) + ATOM_CRITERIA), _csv(crows, ("clause",) + CLAUSE_CRITERIA)


_KIND_NAMES = {NormalRule: "normal", DisjunctiveRule: "disjunctive", ChoiceRule: "choice",
               AggregateDef: "aggregate", OpaqueStatement: "opaque"}


def asp_feature_tables(text: str, strict: bool = False) -> tuple[str, str]:
    prog, _ = parse_smodels(text, strict=strict)
    idx = ProgramIndex(prog)
    arows = [[a] + idx.occurrence_vector(a) for a in sorted(prog.atoms())]
    srows = []
    cols = RULE_FEATURES + AGGREGATE_FEATURES
    for i, st in enumerate(prog.statements):
        feats: dict = {}
        if isinstance(st, AggregateDef):
            feats = aggregate_features(st) if st.elements else {}
        elif not isinstance(st, OpaqueStatement):
            feats = rule_features(st, idx)
        srows.append([i, _KIND_NAMES[type(st)]] + [_num(feats.get(c, 0.0)) for c in cols])
    return _csv(arows, ("atom",) + OCCURRENCE_FEATURES), _csv(srows, ("statement", "type") + cols)


def cmd_features(a) -> None:
    fn = sat_feature_tables if a.kind == "sat" else asp_feature_tables
    first, second = fn(_read(a.input), a.strict)
    _write(a.output, first + "\n" + second, a.force)


def cmd_gen_synth(a) -> None:
    prog = generate(SynthParams(a.pigeons, a.holes, a.colors, a.nodes), seed=a.seed)
    _write(a.output, write_smodels(prog), a.force)


def _manifest(path: str) -> bench.SolverManifest:
    try:
        return bench.SolverManifest.parse(_read(path))
    except bench.ManifestError as e:
        raise DataError(f"{path}: {e}") from None


def cmd_run(a) -> None:
    manifest = _manifest(a.solver)
    instances = list_instances(a.instances)
    mem = bench.parse_memory(a.memlimit) if a.memlimit else None
    if a.weights:
        if not a.kind:
            raise UsageError("--weights needs --kind sat|asp")
        if a.kind == "sat":
            cfg, consts = _load_sat_weights(a.weights).as_dict(), ScoringConstants()
        else:
            w, consts = parse_asp_weights(_read(a.weights))
            cfg = w.as_dict()
        config_id = a.config_id or f"{manifest.name}:{Path(a.weights).stem}"
        obj = SolverObjective(manifest, a.kind, a.cutoff, mem, consts, a.remap_ids)
        try:
            with ThreadPoolExecutor(max(1, a.jobs)) as ex:
                records = list(ex.map(lambda p: obj.run(cfg, p, config_id), instances))
        finally:
            obj.close()
    else:
        records = bench.run_many(manifest, instances, a.cutoff, mem, jobs=a.jobs,
                                 config=a.config_id or manifest.name)
    _write(a.output, bench.write_run_log(records), a.force)


def cmd_tune(a) -> None:
    manifest = _manifest(a.solver)
    instances = list_instances(a.train)
    mem = bench.parse_memory(a.memlimit) if a.memlimit else None
    space = sat_space() if a.kind == "sat" else asp_space()
    resume = None
    if a.resume:
        try:
            resume = TuneHistory.loads(_read(a.resume))
        except (ValueError, KeyError) as e:
            raise DataError(f"{a.resume}: bad tuning log ({e})") from None
    if a.log and Path(a.log).exists() and not a.force and a.log != a.resume:
        raise UsageError(f"{a.log} exists; pass --force to overwrite")
    obj = SolverObjective(manifest, a.kind, a.cutoff, mem, ScoringConstants(a.t1, a.t2), a.remap_ids)
    try:
        if a.method == "smbo":
            res = smbo_search(space, obj, instances, a.budget, a.seed, resume=resume, checkpoint=a.log,
                              jobs=a.jobs)
        else:
            res = random_search(space, obj, instances, a.budget, a.seed, jobs=a.jobs)
    finally:
        obj.close()
    if a.kind == "sat":
        text = SatWeights.from_dict(res.best).dumps()
    else:
        text = format_asp_weights(AspWeights.from_dict(res.best), ScoringConstants(a.t1, a.t2))
    _write(a.output, text, a.force)


def cmd_score(a) -> None:
    records = []
    for path in a.runs:
        try:
            records += bench.read_run_log(_read(path))
        except (ValueError, KeyError) as e:
            raise DataError(f"{path}: {e}") from None
    csv_text, md = bench.emit_report(records, a.cutoff)
    _write(a.output, csv_text if a.format == "csv" else md, a.force)


# --------------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="kmconf", description="Feature-weighted reordering of CNF and ground ASP instances.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def out(sp, required=True):
        sp.add_argument("-o", "--output", required=required, help="output path ('-' for stdout)")
        sp.add_argument("--force", action="store_true", help="overwrite an existing output")

    s = sub.add_parser("reorder-sat", help="reorder a DIMACS CNF file")
    s.add_argument("input")
    s.add_argument("--weights", required=True)
    s.add_argument("--strict", action="store_true")
    s.add_argument("--unweighted-mixed", action="store_true",
                   help="with ord_cl=2, add the raw clause criteria instead of weighting them")
    out(s)
    s.set_defaults(fn=cmd_reorder_sat)

    s = sub.add_parser("reorder-asp", help="reorder a smodels ground program")
    s.add_argument("input")
    s.add_argument("--weights", required=True)
    s.add_argument("--remap-ids", action="store_true")
    s.add_argument("--pin-opaque", action="store_true", help="keep unscored statements in place")
    s.add_argument("--strict", action="store_true")
    out(s)
    s.set_defaults(fn=cmd_reorder_asp)

    s = sub.add_parser("features", help="per-atom and per-clause/statement feature tables as CSV")
    s.add_argument("input")
    s.add_argument("--kind", choices=("sat", "asp"), required=True)
    s.add_argument("--strict", action="store_true")
    out(s, required=False)
    s.set_defaults(fn=cmd_features)

    s = sub.add_parser("gen-synth", help="pigeonhole plus graph-colouring ground program")
    for k in ("pigeons", "holes", "colors", "nodes"):
        s.add_argument(f"--{k}", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    out(s)
    s.set_defaults(fn=cmd_gen_synth)

    def solver_args(sp):
        sp.add_argument("--solver", required=True, help="solver manifest file")
        sp.add_argument("--cutoff", type=float, default=300.0, help="CPU seconds per run")
        sp.add_argument("--memlimit", default="8G")
        sp.add_argument("--jobs", type=int, default=1)
        sp.add_argument("--remap-ids", action="store_true", help="ASP only: also renumber atoms")

    s = sub.add_parser("run", help="run a solver on every file under a directory; emits a run log")
    solver_args(s)
    s.add_argument("--instances", required=True)
    s.add_argument("--weights", help="reorder each instance with this weight file first")
    s.add_argument("--kind", choices=("sat", "asp"))
    s.add_argument("--config-id", help="configuration label in the run log")
    out(s, required=False)
    s.set_defaults(fn=cmd_run)

    s = sub.add_parser("tune", help="search for weights minimising mean PAR10 on training instances")
    solver_args(s)
    s.add_argument("--train", required=True)
    s.add_argument("--kind", choices=("sat", "asp"), required=True)
    s.add_argument("--budget", type=int, default=100, help="solver runs")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--method", choices=("smbo", "random"), default="smbo")
    s.add_argument("--log", help="checkpoint file, one evaluation per line")
    s.add_argument("--resume", help="replay a checkpoint file from an interrupted session")
    s.add_argument("--t1", type=float, default=ScoringConstants.t1)
    s.add_argument("--t2", type=float, default=ScoringConstants.t2)
    out(s, required=False)
    s.set_defaults(fn=cmd_tune)

    s = sub.add_parser("score", help="solved / PAR10 / IPC report from run logs")
    s.add_argument("--runs", nargs="+", required=True)
    s.add_argument("--cutoff", type=float, default=300.0)
    s.add_argument("--format", choices=("csv", "markdown"), default="csv")
    out(s, required=False)
    s.set_defaults(fn=cmd_score)
    return p


def main(argv: list[str] | None = None) -> int:
    try:
        a = build_parser().parse_args(argv)
    except UsageError as e:
        print(e, file=sys.stderr)
        return 1
    except SystemExit as e:  # --help
        return 0 if not e.code else 1
    logging.basicConfig(level=logging.INFO if a.verbose else logging.WARNING, format="%(message)s")
    try:
        a.fn(a)
    except UsageError as e:
        print(f"kmconf: {e}", file=sys.stderr)
        return 1
    except (DataError, FormatError, WeightFileError, bench.ManifestError, ValueError, OverflowError) as e:
        print(f"kmconf: {e}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
