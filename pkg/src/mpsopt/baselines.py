"""Matched-budget reference solvers: uniform random search over the reduced
assignment space and ensemble simulated annealing with exponential cooling."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeError
from .geo import RunResult
from .knapsack import (KnapsackInstance, PenaltyConfig, cost_integer_batch,
                       default_penalty, is_feasible)

T_FINAL_DEFAULT = 1.0
_CHUNK = 1 << 14


@dataclass
class SAConfig:
    ensemble_size: int
    n_iterations: int | None = None   # derived from the budget when None
    budget: int | None = None         # total cost evaluations (n_f parity)
    t_final: float = T_FINAL_DEFAULT
    seed: int = 0

    def __post_init__(self):
        if self.ensemble_size < 1:
            raise ShapeError("ensemble_size must be >= 1")
        if self.n_iterations is None and self.budget is None:
            raise ShapeError("need n_iterations or a budget")
        if self.t_final <= 0:
            raise ShapeError("t_final must be positive")


def default_ensemble_size(instance: KnapsackInstance) -> int:
    return 10 * instance.n_knapsacks * instance.n_objects


def _result(method, best_cost, best_y, n_evals, trajectory, seed, config, instance):
    eq, ineq = is_feasible(instance, best_y)
    return RunResult(
        method=method,
        best_cost=float(best_cost),
        best_config=tuple(int(v) - 1 for v in best_y),
        best_assignment=[int(v) for v in best_y],
        valid_found=bool(eq and ineq),
        n_evaluations=int(n_evals),
        trajectory=trajectory,
        iterations=[],
        seed=seed,
        config=config,
    )


def random_search(instance: KnapsackInstance, n_f: int, seed: int,
                  pen: PenaltyConfig | None = None) -> RunResult:
    """Best of n_f uniform assignments y_i ~ U{1..M}."""
    if n_f < 1:
        raise ShapeError("n_f must be >= 1")
    pen = pen or default_penalty(instance)
    rng = np.random.default_rng(seed)
    best_cost = np.inf
    best_y = None
    trajectory = []
    done = 0
    while done < n_f:
        k = min(_CHUNK, n_f - done)
        ys = rng.integers(1, instance.n_knapsacks + 1,
                          size=(k, instance.n_objects))
        costs = cost_integer_batch(instance, ys, pen)
        i = int(np.argmin(costs))
        if costs[i] < best_cost:
            best_cost = float(costs[i])
            best_y = ys[i].copy()
        done += k
        trajectory.append(best_cost)
    return _result("random", best_cost, best_y, n_f, trajectory, seed,
                   {"n_f": n_f, "seed": seed}, instance)


def simulated_annealing(instance: KnapsackInstance, cfg: SAConfig,
                        pen: PenaltyConfig | None = None) -> RunResult:
    """Ensemble SA: single-object neighborhood moves, Metropolis acceptance,
    exponential cooling from half the initial cost standard deviation down to
    t_final. Total cost evaluations match the budget exactly; any remainder is
    spent in a final partial iteration."""
    pen = pen or default_penalty(instance)
    rng = np.random.default_rng(cfg.seed)
    m = instance.n_knapsacks
    n_ens = cfg.ensemble_size
    if cfg.budget is not None:
        if cfg.budget < 1:
            raise ShapeError("budget must be >= 1")
        # Leave at least half the budget for annealing moves; a budget spent
        # entirely on random initialization would degrade SA to random search.
        n_ens = min(n_ens, max(1, cfg.budget // 2))

    ys = rng.integers(1, m + 1, size=(n_ens, instance.n_objects))
    costs = cost_integer_batch(instance, ys, pen)
    n_evals = n_ens

    if cfg.n_iterations is not None:
        schedule = [n_ens] * cfg.n_iterations
        n_iter = cfg.n_iterations
    else:
        moves = max(0, cfg.budget - n_ens)
        schedule = [n_ens] * (moves // n_ens)
        if moves % n_ens:
            schedule.append(moves % n_ens)
        n_iter = max(1, moves // n_ens)

    t_initial = float(np.std(costs)) / 2.0
    if t_initial <= 0.0:
        t_initial = cfg.t_final  # zero-variance ensemble: greedy descent
    rate = float(np.exp(np.log(cfg.t_final / t_initial) / n_iter))

    best_idx = int(np.argmin(costs))
    best_cost = float(costs[best_idx])
    best_y = ys[best_idx].copy()
    trajectory = [best_cost]

    temperature = t_initial
    for active in schedule:
        proposals = ys[:active].copy()
        objs = rng.integers(0, instance.n_objects, size=active)
        shifts = rng.integers(1, m, size=active)  # uniform over the other M-1
        proposals[np.arange(active), objs] = \
            (proposals[np.arange(active), objs] - 1 + shifts) % m + 1
        new_costs = cost_integer_batch(instance, proposals, pen)
        n_evals += active
        delta = new_costs - costs[:active]
        accept = delta < 0
        worse = ~accept
        if np.any(worse):
            p = np.exp(-delta[worse] / temperature)
            accept[worse] = rng.random(worse.sum()) < p
        ys[:active][accept] = proposals[accept]
        costs[:active][accept] = new_costs[accept]
        i = int(np.argmin(new_costs))
        if new_costs[i] < best_cost:
            best_cost = float(new_costs[i])
            best_y = proposals[i].copy()
        trajectory.append(best_cost)
        temperature *= rate
    config = {"ensemble_size": n_ens, "n_iterations": n_iter,
              "t_initial": t_initial, "t_final": cfg.t_final,
              "cooling_rate": rate, "seed": cfg.seed}
    return _result("sa", best_cost, best_y, n_evals, trajectory, cfg.seed,
                   config, instance)
