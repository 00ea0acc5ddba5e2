"""Solver runs under OS resource limits, and PAR10 / IPC metrics over run records."""
from __future__ import annotations

import csv
import io
import math
import os
import random
import re
import resource
import shlex
import signal
import subprocess
import tempfile
import threading
import time
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

OUTCOMES = ("solved", "timeout", "memout", "crash", "unknown")
MIN_TIME = 0.01
DEFAULT_MEMOUT = r"bad_alloc|MemoryError|[Oo]ut of memory|Cannot allocate memory"
# competition-style answer lines ("s SATISFIABLE") and clasp-style bare answers
DEFAULT_SOLVED = (r"^s (UN)?SATISFIABLE\b", r"^(UN)?SATISFIABLE\b", r"^OPTIMUM FOUND\b")


class ManifestError(ValueError):
    pass


@dataclass(frozen=True)
class SolverManifest:
    """How to invoke a solver and how to read its outcome.

    ``command`` is a template with an ``{instance}`` placeholder (file mode) and
    an optional ``{flags}`` placeholder.  ``exit_codes`` maps return codes to
    outcome classes; ``solved_patterns`` are regexes searched in stdout.
    """

    name: str
    command: str
    input_mode: str = "file"
    solved_patterns: tuple[str, ...] = DEFAULT_SOLVED
    exit_codes: dict[int, str] = field(default_factory=dict)
    memout_pattern: str = DEFAULT_MEMOUT

    def __post_init__(self):
        if self.input_mode not in ("file", "stdin"):
            raise ManifestError(f"input mode must be 'file' or 'stdin', not {self.input_mode!r}")
        n = self.command.count("{instance}")
        if self.input_mode == "file" and n != 1:
            raise ManifestError("command template must contain {instance} exactly once")
        if self.input_mode == "stdin" and n:
            raise ManifestError("stdin mode takes no {instance} placeholder")
        for code, outcome in self.exit_codes.items():
            if outcome not in OUTCOMES:
                raise ManifestError(f"exit code {code}: unknown outcome {outcome!r}")

    def argv(self, instance: str | Path, flags: str = "") -> list[str]:
        # substitute after splitting so paths with spaces stay one argument
        out = []
        for tok in shlex.split(self.command):
            if tok == "{flags}":
                out.extend(shlex.split(flags))
            else:
                out.append(tok.replace("{instance}", str(instance)).replace("{flags}", flags))
        return out

    @classmethod
    def parse(cls, text: str) -> SolverManifest:
        """Read ``key value`` lines: name, command, input_mode, solved_pattern (repeatable),
        unsat_pattern (alias), exit_code ``<int> <outcome>`` (repeatable), memout_pattern."""
        kw: dict = {"solved_patterns": [], "exit_codes": {}}
        for n, line in enumerate(text.splitlines(), 1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            key, _, val = s.partition(" ")
            val = val.strip()
            if key in ("solved_pattern", "unsat_pattern", "sat_pattern"):
                kw["solved_patterns"].append(val)
            elif key == "exit_code":
                code, _, outcome = val.partition(" ")
                try:
                    kw["exit_codes"][int(code)] = outcome.strip()
                except ValueError:
                    raise ManifestError(f"line {n}: bad exit_code entry {val!r}") from None
            elif key in ("name", "command", "input_mode", "memout_pattern"):
                kw[key] = val
            else:
                raise ManifestError(f"line {n}: unknown key {key!r}")
        for req in ("name", "command"):
            if req not in kw:
                raise ManifestError(f"manifest lacks {req!r}")
        kw["solved_patterns"] = tuple(kw["solved_patterns"]) or DEFAULT_SOLVED
        return cls(**kw)

    @classmethod
    def load(cls, path: str | Path) -> SolverManifest:
        return cls.parse(Path(path).read_text())


@dataclass(frozen=True)
class RunRecord:
    instance: str
    config: str
    cpu_seconds: float
    outcome: str
    reorder_seconds: float = 0.0

    @property
    def solved(self) -> bool:
        return self.outcome == "solved"


# --------------------------------------------------------------------------- running


def _limits(cpu_seconds: float, mem_bytes: int | None):
    def apply():
        os.setsid()
        soft = max(1, math.ceil(cpu_seconds))
        resource.setrlimit(resource.RLIMIT_CPU, (soft, soft + 1))
        if mem_bytes:
            resource.setrlimit(resource.RLIMIT_AS, (mem_bytes, mem_bytes))
    return apply


def _kill_group(pid: int) -> None:
    try:
        os.killpg(pid, signal.SIGKILL)
    except (ProcessLookupError, PermissionError):
        pass


def run_solver(manifest: SolverManifest, instance_path: str | Path, cutoff_seconds: float,
               mem_limit_bytes: int | None = None, *, config: str = "default", flags: str = "",
               instance_id: str | None = None, wall_limit: float | None = None,
               reorder_seconds: float = 0.0) -> RunRecord:
    """Run one solver process and classify the outcome.

    CPU time comes from ``wait4`` (child plus the descendants it reaped).  The
    CPU limit is an ``RLIMIT_CPU``; a wall-clock guard (``1.25 * cutoff + 0.5``
    by default) catches processes that block without burning CPU.  Timeouts
    are recorded at no less than the cutoff.
    """
    iid = instance_id if instance_id is not None else str(instance_path)
    wall = wall_limit if wall_limit is not None else 1.25 * cutoff_seconds + 0.5

    def rec(cpu, outcome):
        if outcome == "timeout":
            cpu = max(cpu, cutoff_seconds)
        return RunRecord(iid, config, float(cpu), outcome, reorder_seconds)

    if manifest.input_mode == "file":
        argv, stdin = manifest.argv(instance_path, flags), subprocess.DEVNULL
    else:
        argv = shlex.split(manifest.command.replace("{flags}", flags))
        try:
            stdin = open(instance_path, "rb")
        except OSError:
            return rec(0.0, "crash")

    out_f = tempfile.TemporaryFile()
    err_f = tempfile.TemporaryFile()
    try:
        try:
            proc = subprocess.Popen(argv, stdin=stdin, stdout=out_f, stderr=err_f,
                                    preexec_fn=_limits(cutoff_seconds, mem_limit_bytes))
        except (OSError, subprocess.SubprocessError):
            return rec(0.0, "crash")
        fired = threading.Event()

        def on_wall():
            fired.set()
            _kill_group(proc.pid)

        timer = threading.Timer(wall, on_wall)
        timer.start()
        try:
            _, status, ru = os.wait4(proc.pid, 0)
        finally:
            timer.cancel()
        proc.returncode = os.waitstatus_to_exitcode(status)
        wall_killed = fired.is_set()
        _kill_group(proc.pid)
        cpu = ru.ru_utime + ru.ru_stime
        out_f.seek(0)
        err_f.seek(0)
        stdout = out_f.read().decode(errors="replace")
        stderr = err_f.read().decode(errors="replace")
    finally:
        out_f.close()
        err_f.close()
        if manifest.input_mode == "stdin":
            stdin.close()

    rc = proc.returncode
    # SIGXCPU only comes from our CPU limit; SIGKILL from its hard ceiling or the wall guard
    if rc == -signal.SIGXCPU or wall_killed or (rc == -signal.SIGKILL and cpu >= cutoff_seconds - 0.05):
        return rec(cpu, "timeout")
    if cpu > cutoff_seconds:
        return rec(cpu, "timeout")
    if manifest.memout_pattern and re.search(manifest.memout_pattern, stdout + stderr):
        return rec(cpu, "memout")
    if any(re.search(p, stdout, re.MULTILINE) for p in manifest.solved_patterns):
        return rec(cpu, "solved")
    if rc in manifest.exit_codes:
        return rec(cpu, manifest.exit_codes[rc])
    return rec(cpu, "unknown" if rc == 0 else "crash")


def run_many(manifest: SolverManifest, instances, cutoff_seconds: float, mem_limit_bytes=None,
             jobs: int = 1, **kw) -> list[RunRecord]:
    """Run every instance, up to ``jobs`` at a time; records come back in input order."""
    instances = list(instances)
    with ThreadPoolExecutor(max_workers=max(1, jobs)) as ex:
        futs = [ex.submit(run_solver, manifest, p, cutoff_seconds, mem_limit_bytes, **kw) for p in instances]
        return [f.result() for f in futs]


# --------------------------------------------------------------------------- metrics


def par10_cost(record: RunRecord, cutoff: float) -> float:
    return record.cpu_seconds if record.solved else 10.0 * cutoff


def par10(records, cutoff: float) -> float:
    records = list(records)
    if not records:
        raise ValueError("PAR10 of an empty record set")
    return sum(par10_cost(r, cutoff) for r in records) / len(records)


def ipc_scores(records) -> dict[str, float]:
    """Total IPC score per configuration.  Each configuration needs one record per instance."""
    by_inst: dict[str, dict[str, RunRecord]] = defaultdict(dict)
    systems: set[str] = set()
    for r in records:
        if r.config in by_inst[r.instance]:
            raise ValueError(f"duplicate record for {r.config} on {r.instance}")
        by_inst[r.instance][r.config] = r
        systems.add(r.config)
    totals = {s: 0.0 for s in sorted(systems)}
    for inst, runs in by_inst.items():
        if set(runs) != systems:
            raise ValueError(f"instance {inst} lacks records for {sorted(systems - set(runs))}")
        solved = [max(r.cpu_seconds, MIN_TIME) for r in runs.values() if r.solved]
        if not solved:
            continue
        best = min(solved)
        for s, r in runs.items():
            if r.solved:
                totals[s] += 1.0 / (1.0 + math.log10(max(r.cpu_seconds, MIN_TIME) / best))
    return totals


@dataclass(frozen=True)
class BenchmarkSplit:
    train: list
    test: list
    seed: int


def split(instances, test_fraction: float, seed: int) -> BenchmarkSplit:
    items = list(instances)
    if len(items) < 2:
        raise ValueError("need at least two instances to split")
    if not 0 < test_fraction < 1:
        raise ValueError("test_fraction must lie strictly between 0 and 1")
    random.Random(seed).shuffle(items)
    n_test = min(max(1, round(len(items) * test_fraction)), len(items) - 1)
    return BenchmarkSplit(items[n_test:], items[:n_test], seed)


# --------------------------------------------------------------------------- run logs and reports

RUN_LOG_COLUMNS = ("instance", "config", "cpu_seconds", "outcome", "reorder_seconds")


def write_run_log(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RUN_LOG_COLUMNS)
    for r in records:
        w.writerow([r.instance, r.config, repr(r.cpu_seconds), r.outcome, repr(r.reorder_seconds)])
    return buf.getvalue()


def read_run_log(text: str) -> list[RunRecord]:
    rows = csv.DictReader(io.StringIO(text))
    missing = set(RUN_LOG_COLUMNS[:4]) - set(rows.fieldnames or ())
    if missing:
        raise ValueError(f"run log lacks columns {sorted(missing)}")
    out = []
    for row in rows:
        if row["outcome"] not in OUTCOMES:
            raise ValueError(f"unknown outcome {row['outcome']!r}")
        out.append(RunRecord(row["instance"], row["config"], float(row["cpu_seconds"]), row["outcome"],
                             float(row.get("reorder_seconds") or 0.0)))
    return out


def benchmark_of(instance: str) -> str:
    parent = Path(instance).parent.name
    return parent or "-"


REPORT_COLUMNS = ("solver", "benchmark", "instances", "solved", "par10", "ipc")


def report_rows(records, cutoff: float) -> list[tuple]:
    groups: dict[str, list[RunRecord]] = defaultdict(list)
    for r in records:
        groups[benchmark_of(r.instance)].append(r)
    rows = []
    for bench in sorted(groups):
        recs = groups[bench]
        ipc = ipc_scores(recs)
        for cfg in sorted(ipc):
            mine = [r for r in recs if r.config == cfg]
            rows.append((cfg, bench, len(mine), sum(r.solved for r in mine),
                         round(par10(mine, cutoff), 2), round(ipc[cfg], 2)))
    return rows


def emit_report(records, cutoff: float) -> tuple[str, str]:
    """Per (configuration, benchmark): instances, solved count, PAR10 and IPC.

    The benchmark of an instance is the name of its parent directory.
    Returns ``(csv_text, markdown_text)``.
    """
    rows = report_rows(list(records), cutoff)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(REPORT_COLUMNS)
    w.writerows(rows)
    md = ["| " + " | ".join(REPORT_COLUMNS) + " |", "|" + "---|" * len(REPORT_COLUMNS)]
    md += ["| " + " | ".join(str(x) for x in row) + " |" for row in rows]
    return buf.getvalue(), "\n".join(md) + "\n"


def parse_memory(text: str) -> int:
    """``'8G'``, ``'512M'``, ``'1024K'`` or a plain byte count."""
    m = re.fullmatch(r"\s*(\d+(?:\.\d+)?)\s*([KMGT]?)B?\s*", text, re.IGNORECASE)
    if not m:
        raise ValueError(f"bad memory size {text!r}")
    scale = {"": 1, "K": 2**10, "M": 2**20, "G": 2**30, "T": 2**40}[m.group(2).upper()]
    return int(float(m.group(1)) * scale)


def timed(fn, *args, **kw):
    t0 = time.process_time()
    out = fn(*args, **kw)
    return out, time.process_time() - t0
