"""Model-based configuration search over weight vectors.

``smbo_search`` alternates between fitting a random-forest surrogate on the
observed (configuration, cost) runs, picking a challenger that minimises
``mean - kappa * spread`` over a candidate pool, and racing it against the
incumbent with a doubling schedule over a fixed instance stream.
``random_search`` is the model-free baseline.
"""
from __future__ import annotations

import json
import logging
import math
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
from sklearn.ensemble import RandomForestRegressor

log = logging.getLogger(__name__)

Configuration = dict[str, Any]
Objective = Callable[[Configuration, str], float]


@dataclass(frozen=True)
class Continuous:
    name: str
    low: float
    high: float

    def __post_init__(self):
        if not self.low < self.high:
            raise ValueError(f"{self.name}: low must be < high")


@dataclass(frozen=True)
class Categorical:
    name: str
    values: tuple

    def __post_init__(self):
        if not self.values:
            raise ValueError(f"{self.name}: empty value set")


@dataclass(frozen=True)
class ParameterSpace:
    continuous: tuple[Continuous, ...] = ()
    categorical: tuple[Categorical, ...] = ()

    @property
    def names(self) -> list[str]:
        return [d.name for d in self.continuous] + [d.name for d in self.categorical]

    def default(self) -> Configuration:
        """All-zeros for continuous dims (clipped into range), first value for categoricals."""
        cfg: Configuration = {d.name: float(min(max(0.0, d.low), d.high)) for d in self.continuous}
        cfg.update({d.name: d.values[0] for d in self.categorical})
        return cfg

    def sample(self, rng: np.random.Generator) -> Configuration:
        cfg: Configuration = {d.name: float(rng.uniform(d.low, d.high)) for d in self.continuous}
        cfg.update({d.name: d.values[int(rng.integers(len(d.values)))] for d in self.categorical})
        return cfg

    def perturb(self, cfg: Configuration, rng: np.random.Generator, scale: float = 0.1,
                p_flip: float = 0.2) -> Configuration:
        out = dict(cfg)
        for d in self.continuous:
            v = cfg[d.name] + rng.normal(0.0, scale * (d.high - d.low))
            out[d.name] = float(np.clip(v, d.low, d.high))
        for d in self.categorical:
            if rng.random() < p_flip:
                out[d.name] = d.values[int(rng.integers(len(d.values)))]
        return out

    def encode(self, cfg: Configuration) -> np.ndarray:
        # continuous scaled to [0, 1]; categoricals as value index (trees split natively)
        x = [(cfg[d.name] - d.low) / (d.high - d.low) for d in self.continuous]
        x += [d.values.index(cfg[d.name]) for d in self.categorical]
        return np.array(x, dtype=float)

    def contains(self, cfg: Configuration) -> bool:
        return (set(cfg) == set(self.names)
                and all(d.low <= cfg[d.name] <= d.high for d in self.continuous)
                and all(cfg[d.name] in d.values for d in self.categorical))


def sat_space() -> ParameterSpace:
    from .sat import ATOM_CRITERIA, CLAUSE_CRITERIA, SELECTORS

    return ParameterSpace(
        tuple(Continuous(n, -10.0, 10.0) for n in CLAUSE_CRITERIA + ATOM_CRITERIA),
        tuple(Categorical(n, v) for n, v in SELECTORS.items()),
    )


def asp_space() -> ParameterSpace:
    from .asp import ASP_FEATURES

    return ParameterSpace(tuple(Continuous(n, -10.0, 10.0) for n in ASP_FEATURES))


def config_key(cfg: Configuration) -> str:
    return json.dumps(cfg, sort_keys=True)


# --------------------------------------------------------------------------- history and evaluation


@dataclass(frozen=True)
class Observation:
    config: Configuration
    instance: str
    cost: float


@dataclass
class TuneHistory:
    """Append-only log of evaluations, one JSON object per line when saved."""

    observations: list[Observation] = field(default_factory=list)

    def append(self, obs: Observation) -> None:
        self.observations.append(obs)

    def __len__(self) -> int:
        return len(self.observations)

    def dumps(self) -> str:
        return "".join(json.dumps({"config": o.config, "instance": o.instance, "cost": o.cost},
                                  sort_keys=True) + "\n" for o in self.observations)

    @classmethod
    def loads(cls, text: str) -> TuneHistory:
        h = cls()
        for line in text.splitlines():
            if line.strip():
                d = json.loads(line)
                h.append(Observation(d["config"], d["instance"], float(d["cost"])))
        return h


class BudgetExhausted(Exception):
    pass


class Evaluator:
    """Runs the objective with caching, budget accounting and an optional checkpoint file.

    Results already present in ``resume`` are replayed without calling the
    objective, so an interrupted session rerun with the same seed continues
    where it stopped.
    """

    def __init__(self, objective: Objective, budget: int, resume: TuneHistory | None = None,
                 checkpoint: str | Path | None = None, jobs: int = 1):
        self.objective = objective
        self.jobs = max(1, jobs)
        self.budget = budget
        self.used = 0
        self.history = TuneHistory()
        self.cache: dict[tuple[str, str], float] = {}
        self.replay = {(config_key(o.config), o.instance): o.cost for o in (resume.observations if resume else [])}
        self.checkpoint = Path(checkpoint) if checkpoint else None
        if self.checkpoint is not None:
            self.checkpoint.write_text(resume.dumps() if resume else "")

    def known(self, cfg: Configuration, instance: str) -> float | None:
        return self.cache.get((config_key(cfg), instance))

    def _measure(self, cfg: Configuration, instance: str) -> float:
        try:
            return float(self.objective(cfg, instance))
        except Exception as e:  # objective failures become infinite cost
            log.warning("objective failed on %s: %s", instance, e)
            return math.inf

    def __call__(self, cfg: Configuration, instance: str) -> float:
        return self.many(cfg, [instance])[0]

    def many(self, cfg: Configuration, instances: Sequence[str]) -> list[float]:
        """Costs on ``instances`` in order.  New runs may execute concurrently
        (``jobs``) but are charged and logged in instance order; if the budget
        runs out part-way the affordable prefix is recorded, then
        ``BudgetExhausted`` is raised."""
        ck = config_key(cfg)
        todo = [i for i in dict.fromkeys(instances) if (ck, i) not in self.cache]
        short = len(todo) > self.budget - self.used
        todo = todo[:max(0, self.budget - self.used)]
        fresh = [i for i in todo if (ck, i) not in self.replay]
        if self.jobs > 1 and len(fresh) > 1:
            with ThreadPoolExecutor(self.jobs) as ex:
                measured = dict(zip(fresh, ex.map(lambda i: self._measure(cfg, i), fresh)))
        else:
            measured = {i: self._measure(cfg, i) for i in fresh}
        for i in todo:
            self.used += 1
            self._record(cfg, i, measured[i] if i in measured else self.replay[(ck, i)], i in measured)
        if short:
            raise BudgetExhausted
        return [self.cache[(ck, i)] for i in instances]

    def _record(self, cfg: Configuration, instance: str, cost: float, fresh: bool) -> None:
        self.cache[(config_key(cfg), instance)] = cost
        obs = Observation(dict(cfg), instance, cost)
        self.history.append(obs)
        if fresh and self.checkpoint is not None:
            with self.checkpoint.open("a") as f:
                f.write(json.dumps({"config": obs.config, "instance": instance, "cost": cost},
                                   sort_keys=True) + "\n")


# --------------------------------------------------------------------------- intensification


@dataclass
class Incumbent:
    config: Configuration
    costs: list[float] = field(default_factory=list)  # aligned with the instance stream prefix

    @property
    def n(self) -> int:
        return len(self.costs)

    @property
    def mean(self) -> float:
        return float(np.mean(self.costs)) if self.costs else math.inf


def _mean(xs):
    return sum(xs) / len(xs)


def intensify(challenger: Configuration, incumbent: Incumbent, stream: Sequence[str],
              run: Callable[[Configuration, str], float], extend_incumbent: bool = True) -> Incumbent:
    """Race ``challenger`` against ``incumbent`` on a prefix of ``stream``.

    If the incumbent has not seen every instance it is first run on the next
    one.  The challenger is then run on 1, 2, 4, ... instances; it is dropped as
    soon as its mean on the shared prefix is not strictly better, and it
    replaces the incumbent once it has matched the incumbent's run count and
    still wins.  Ties keep the incumbent.
    """
    if extend_incumbent and incumbent.n < len(stream):
        incumbent = Incumbent(incumbent.config, incumbent.costs + [run(incumbent.config, stream[incumbent.n])])
    if config_key(challenger) == config_key(incumbent.config):
        return incumbent
    many = getattr(run, "many", None)
    n_inc = incumbent.n
    k = 1
    costs: list[float] = []
    while True:
        k_eff = min(k, n_inc)
        batch = stream[len(costs):k_eff]
        if many is not None:
            costs.extend(many(challenger, batch))
        else:
            costs.extend(run(challenger, inst) for inst in batch)
        if not _mean(costs) < _mean(incumbent.costs[:k_eff]):
            return incumbent
        if k_eff == n_inc:
            return Incumbent(dict(challenger), costs)
        k *= 2


# --------------------------------------------------------------------------- surrogate


@dataclass
class ForestModel:
    forest: RandomForestRegressor | None
    space: ParameterSpace
    constant: float | None = None

    def predict_many(self, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        if self.forest is None:
            return np.full(len(X), self.constant), np.zeros(len(X))
        per_tree = np.stack([t.predict(X) for t in self.forest.estimators_])
        return per_tree.mean(axis=0), per_tree.std(axis=0)


def _finite_costs(y: np.ndarray) -> np.ndarray:
    finite = np.isfinite(y)
    if finite.all():
        return y
    cap = 10.0 * np.abs(y[finite]).max() if finite.any() else 1.0
    return np.where(finite, y, max(cap, 1.0))


def fit_forest(history: TuneHistory, space: ParameterSpace, n_trees: int = 32, min_leaf: int = 2,
               seed: int = 0) -> ForestModel:
    """Bootstrap regression forest over encoded configurations, one row per run."""
    if not len(history):
        raise ValueError("cannot fit a surrogate on an empty history")
    X = np.stack([space.encode(o.config) for o in history.observations])
    y = _finite_costs(np.array([o.cost for o in history.observations], dtype=float))
    if np.all(y == y[0]):
        return ForestModel(None, space, float(y[0]))
    rf = RandomForestRegressor(n_estimators=n_trees, min_samples_leaf=min_leaf, bootstrap=True,
                               max_features=1.0, random_state=seed)
    rf.fit(X, y)
    return ForestModel(rf, space)


def predict(model: ForestModel, cfg: Configuration) -> tuple[float, float]:
    m, s = model.predict_many(model.space.encode(cfg)[None, :])
    return float(m[0]), float(s[0])


# --------------------------------------------------------------------------- searches


@dataclass
class TuneResult:
    best: Configuration
    history: TuneHistory
    incumbent: Incumbent | None = None
    trajectory: list[Incumbent] = field(default_factory=list)


def random_search(space: ParameterSpace, objective: Objective, instances: Sequence[str],
                  eval_budget: int, seed: int = 0, *, jobs: int = 1) -> TuneResult:
    """Uniform samples, each run on the training instances in a seeded order; best by mean cost."""
    if eval_budget < 1:
        raise ValueError("budget must be >= 1")
    if not instances:
        raise ValueError("need at least one training instance")
    rng = np.random.default_rng(seed)
    stream = [instances[i] for i in rng.permutation(len(instances))]
    ev = Evaluator(objective, eval_budget, jobs=jobs)
    best: tuple[tuple[int, float], Configuration] | None = None
    while ev.used < ev.budget:
        cfg = space.sample(rng)
        try:
            costs = ev.many(cfg, stream)
        except BudgetExhausted:
            costs = [c for c in (ev.known(cfg, i) for i in stream) if c is not None]
        if not costs:
            break
        # a truncated final sample only wins on at least as many instances
        key = (-len(costs), _mean(costs))
        if best is None or key < best[0]:
            best = (key, cfg)
    return TuneResult(best[1], ev.history)


def smbo_search(space: ParameterSpace, objective: Objective, instances: Sequence[str],
                eval_budget: int, seed: int = 0, *, n_trees: int = 32, min_leaf: int = 2,
                kappa: float = 1.0, n_random: int = 100, n_local: int = 20, local_scale: float = 0.1,
                resume: TuneHistory | None = None, checkpoint: str | Path | None = None, jobs: int = 1,
                should_stop: Callable[[], bool] | None = None, max_stall: int = 50) -> TuneResult:
    """Sequential model-based search.  Anytime: ``should_stop`` or Ctrl-C returns the incumbent.

    On a small finite space every challenger is eventually a cache hit; after
    ``max_stall`` iterations without a new run the search stops early.
    """
    if not instances:
        raise ValueError("need at least one training instance")
    rng = np.random.default_rng(seed)
    stream = [instances[i] for i in rng.permutation(len(instances))]
    ev = Evaluator(objective, max(0, eval_budget), resume, checkpoint, jobs)
    default = space.default()
    if eval_budget < 1:
        return TuneResult(default, ev.history)
    inc = Incumbent(default, [ev(default, stream[0])])
    trajectory = [inc]
    stall = 0
    try:
        while ev.used < ev.budget and not (should_stop and should_stop()):
            used_before = ev.used
            model = fit_forest(ev.history, space, n_trees, min_leaf, seed=int(rng.integers(2**31)))
            pool = [space.sample(rng) for _ in range(n_random)]
            pool += [space.perturb(inc.config, rng, local_scale) for _ in range(n_local)]
            mean, spread = model.predict_many(np.stack([space.encode(c) for c in pool]))
            acq = mean - kappa * spread
            challenger = pool[int(np.argmin(acq))]
            try:
                new = intensify(challenger, inc, stream, ev)
            except BudgetExhausted:
                break
            if config_key(new.config) != config_key(inc.config):
                trajectory.append(new)
            inc = new
            stall = stall + 1 if ev.used == used_before else 0
            if stall >= max_stall:
                log.info("no unseen challenger in %d iterations; stopping", stall)
                break
    except KeyboardInterrupt:
        log.info("interrupted; returning current incumbent")
    return TuneResult(inc.config, ev.history, inc, trajectory)
