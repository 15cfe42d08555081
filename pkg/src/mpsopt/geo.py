"""Generative-enhanced optimization loop: population management, softmax
weighting, selection strategies, train/sample/augment iterations, and the
V / R summary metrics."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dmrg import TrainConfig, WeightedDataset, nll_loss, sweep
from .errors import (DegenerateStateError, EmptySelectionError, ShapeError,
                     SupportError)
from .knapsack import (KnapsackInstance, PenaltyConfig, cost_binary,
                       cost_integer, default_penalty, is_feasible, total_value)
from .mps import random_mps
from .sampling import sample_batch
from .symmetric import build_assignment_mps

SELECTION_STRATEGIES = ("all", "best", "symmetric", "best_symmetric")


@dataclass
class Population:
    """Deduplicated candidate solutions with cached costs, insertion-ordered."""
    encoding: str                                  # "binary" | "integer"
    configs: list[tuple[int, ...]] = field(default_factory=list)
    costs: list[float] = field(default_factory=list)
    _index: set = field(default_factory=set, repr=False)

    def __post_init__(self):
        self._index = set(self.configs)
        if len(self._index) != len(self.configs):
            raise ShapeError("population configurations must be unique")

    def __len__(self):
        return len(self.configs)

    def add(self, config, cost) -> bool:
        key = tuple(int(v) for v in config)
        if key in self._index:
            return False
        self._index.add(key)
        self.configs.append(key)
        self.costs.append(float(cost))
        return True


@dataclass
class GeoConfig:
    beta: float
    train: TrainConfig
    n_samples: int
    selection: str = "all"
    max_iterations: int = 50
    encoding: str = "integer"
    penalty: PenaltyConfig | None = None
    seed: int = 0

    def __post_init__(self):
        if self.selection not in SELECTION_STRATEGIES:
            raise ShapeError(f"unknown selection strategy {self.selection!r}")
        if self.encoding not in ("binary", "integer"):
            raise ShapeError(f"unknown encoding {self.encoding!r}")
        if self.n_samples < 1 or self.max_iterations < 0 or self.beta < 0:
            raise ShapeError("n_samples >= 1, max_iterations >= 0, beta >= 0")

    def to_json_dict(self) -> dict:
        return {
            "beta": self.beta,
            "alpha": self.train.learning_rate,
            "chi": self.train.max_bond,
            "n_epochs": self.train.epochs,
            "n_samples": self.n_samples,
            "selection": self.selection,
            "max_iterations": self.max_iterations,
            "encoding": self.encoding,
            "penalty": None if self.penalty is None else self.penalty.coefficient,
            "seed": self.seed,
        }


@dataclass
class RunResult:
    method: str
    best_cost: float
    best_config: tuple[int, ...] | None
    best_assignment: list | None       # 1-based integer assignment when available
    valid_found: bool
    n_evaluations: int
    trajectory: list[float]            # best-so-far cost after each iteration
    iterations: list[dict]
    seed: int
    config: dict
    status: str = "ok"
    final_population_size: int = 0

    def to_json_dict(self) -> dict:
        return {
            "method": self.method,
            "best_cost": self.best_cost,
            "best_config": None if self.best_config is None else list(self.best_config),
            "best_assignment": self.best_assignment,
            "valid": self.valid_found,
            "n_f": self.n_evaluations,
            "trajectory": self.trajectory,
            "iterations": self.iterations,
            "seed": self.seed,
            "config": self.config,
            "status": self.status,
            "final_population_size": self.final_population_size,
        }


def softmax_weights(costs, beta) -> np.ndarray:
    """Boltzmann weights exp(-beta c) / sum, stabilized by shifting the minimum."""
    costs = np.asarray(costs, dtype=np.float64)
    if costs.size == 0:
        raise ShapeError("softmax_weights needs at least one cost")
    if beta < 0:
        raise ShapeError("beta must be >= 0")
    w = np.exp(-beta * (costs - costs.min()))
    return w / w.sum()


def _equality_feasible(config, encoding, n_knapsacks) -> bool:
    if encoding == "integer":
        return True
    x = np.asarray(config, dtype=np.int64).reshape(-1, n_knapsacks)
    return bool(np.array_equal(x.sum(axis=1), np.ones(x.shape[0], dtype=np.int64)))


def select(population: Population, strategy, capacity,
           instance: KnapsackInstance) -> Population:
    """Apply one of the four selection strategies; ties at the cost cutoff are
    broken by lexicographic configuration order."""
    if strategy not in SELECTION_STRATEGIES:
        raise ShapeError(f"unknown selection strategy {strategy!r}")
    pairs = list(zip(population.configs, population.costs))
    if strategy in ("symmetric", "best_symmetric"):
        pairs = [(c, v) for c, v in pairs
                 if _equality_feasible(c, population.encoding, instance.n_knapsacks)]
        if not pairs:
            raise EmptySelectionError(
                "symmetric selection removed every candidate")
    if strategy in ("best", "best_symmetric"):
        pairs = sorted(pairs, key=lambda p: (p[1], p[0]))[:capacity]
    out = Population(encoding=population.encoding)
    for c, v in pairs:
        out.add(c, v)
    return out


class _CostOracle:
    """Cost cache; n_f counts unique configurations evaluated."""

    def __init__(self, instance, encoding, pen):
        self.instance = instance
        self.encoding = encoding
        self.pen = pen
        self.cache: dict[tuple[int, ...], float] = {}
        self.best_cost = np.inf
        self.best_config: tuple[int, ...] | None = None

    def cost(self, config) -> float:
        key = tuple(int(v) for v in config)
        if key not in self.cache:
            if self.encoding == "binary":
                x = np.asarray(key, dtype=np.int64).reshape(
                    self.instance.n_objects, self.instance.n_knapsacks)
                c = cost_binary(self.instance, x, self.pen)
            else:
                c = cost_integer(self.instance, np.asarray(key) + 1, self.pen)
            self.cache[key] = c
            if c < self.best_cost or (c == self.best_cost and
                                      (self.best_config is None or key < self.best_config)):
                self.best_cost = c
                self.best_config = key
        return self.cache[key]

    @property
    def n_evaluations(self) -> int:
        return len(self.cache)


def _config_to_assignment(config, encoding, n_knapsacks):
    if config is None:
        return None
    if encoding == "integer":
        return [int(v) + 1 for v in config]
    x = np.asarray(config, dtype=np.int64).reshape(-1, n_knapsacks)
    if np.array_equal(x.sum(axis=1), np.ones(x.shape[0], dtype=np.int64)):
        return (np.argmax(x, axis=1) + 1).tolist()
    return None


def _assignment_for_feasibility(config, encoding, instance):
    if encoding == "integer":
        return np.asarray(config, dtype=np.int64) + 1
    return np.asarray(config, dtype=np.int64).reshape(
        instance.n_objects, instance.n_knapsacks)


def geo_run(instance: KnapsackInstance, cfg: GeoConfig,
            return_model=False):
    """Run the full optimization loop on one instance.

    Returns a RunResult (and, with return_model=True, the initial and final
    models for inspection). Support and selection failures end the loop early
    and are recorded in the result status.
    """
    pen = cfg.penalty or default_penalty(instance)
    oracle = _CostOracle(instance, cfg.encoding, pen)
    ss = np.random.SeedSequence(cfg.seed)
    streams = ss.spawn(cfg.max_iterations + 2)

    if cfg.encoding == "binary":
        model = build_assignment_mps(instance.n_objects, instance.n_knapsacks)
    else:
        init_rng = np.random.default_rng(streams[0])
        model = random_mps([instance.n_knapsacks] * instance.n_objects,
                           cfg.train.max_bond, init_rng)
        model = model.right_canonicalize(max_bond=cfg.train.max_bond)
    initial_model = model

    population = Population(encoding=cfg.encoding)
    batch = sample_batch(model, cfg.n_samples, streams[1])
    for row in batch.configs:
        population.add(row, oracle.cost(row))
    capacity = len(population)

    trajectory = [oracle.best_cost]
    iterations: list[dict] = []
    status = "ok"
    for it in range(1, cfg.max_iterations + 1):
        try:
            population = select(population, cfg.selection, capacity, instance)
            weights = softmax_weights(population.costs, cfg.beta)
            data = WeightedDataset(np.asarray(population.configs), weights)
            for _ in range(cfg.train.epochs):
                model = sweep(model, cfg.train, data)
            loss = nll_loss(model, data)
            batch = sample_batch(model, cfg.n_samples, streams[it + 1])
        except (SupportError, EmptySelectionError, DegenerateStateError) as exc:
            status = f"{type(exc).__name__}: {exc}"
            break
        n_valid = 0
        for row in batch.configs:
            cost = oracle.cost(row)
            population.add(row, cost)
            eq, ineq = is_feasible(
                instance, _assignment_for_feasibility(row, cfg.encoding, instance))
            n_valid += int(eq and ineq)
        trajectory.append(oracle.best_cost)
        iterations.append({
            "iteration": it,
            "best_cost": oracle.best_cost,
            "n_valid_sampled": n_valid,
            "loss": loss,
        })

    best_config = oracle.best_config
    valid = False
    if best_config is not None:
        eq, ineq = is_feasible(
            instance, _assignment_for_feasibility(best_config, cfg.encoding, instance))
        valid = eq and ineq
    result = RunResult(
        method=f"geo-{cfg.encoding}",
        best_cost=float(oracle.best_cost),
        best_config=best_config,
        best_assignment=_config_to_assignment(best_config, cfg.encoding,
                                              instance.n_knapsacks),
        valid_found=valid,
        n_evaluations=oracle.n_evaluations,
        trajectory=trajectory,
        iterations=iterations,
        seed=cfg.seed,
        config=cfg.to_json_dict(),
        status=status,
        final_population_size=len(population),
    )
    if return_model:
        return result, initial_model, model
    return result


def metrics(results, instance: KnapsackInstance):
    """(V, R) over repeated runs: V is the fraction whose best assignment is
    fully feasible; R the mean value ratio to the known optimum over those."""
    if instance.known_optimal_cost is None:
        raise ShapeError("metrics needs an instance with known_optimal_cost")
    optimal_value = -instance.known_optimal_cost
    if optimal_value <= 0:
        raise ShapeError("known optimum must correspond to a positive value")
    valid_ratios = []
    for res in results:
        if res.valid_found and res.best_assignment is not None:
            valid_ratios.append(
                total_value(instance, res.best_assignment) / optimal_value)
    v = len(valid_ratios) / len(results)
    r = float(np.mean(valid_ratios)) if valid_ratios else None
    return v, r
