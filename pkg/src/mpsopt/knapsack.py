"""Generalized multi-knapsack model: instances, encodings, costs, generator,
and an exhaustive oracle.

Every object must be assigned to exactly one knapsack. The integer encoding
uses y_i in {1..M}; the binary encoding uses an N x M 0/1 matrix, flattened
object-major when mapped to MPS sites. Capacity overloads enter the cost as a
penalty c_p * sum_j max(0, load_j - m_j).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import EncodingError, OracleBudgetError, ShapeError

DEFAULT_VALUE_RANGE = (1, 100)
DEFAULT_WEIGHT_RANGE = (1, 50)
DEFAULT_SLACK_RANGE = (1.0, 1.3)
DEFAULT_ORACLE_BUDGET = 10**7
_CHUNK = 1 << 14


@dataclass
class KnapsackInstance:
    n_objects: int
    n_knapsacks: int
    values: np.ndarray        # (N, M) value of object i in knapsack j
    weights: np.ndarray       # (N,)
    capacities: np.ndarray    # (M,)
    known_optimal_cost: float | None = None
    seed: int | None = None
    witness: np.ndarray | None = field(default=None, repr=False)  # not serialized

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.int64)
        self.weights = np.asarray(self.weights, dtype=np.int64)
        self.capacities = np.asarray(self.capacities, dtype=np.int64)
        if self.values.shape != (self.n_objects, self.n_knapsacks):
            raise ShapeError("values must be N x M")
        if self.weights.shape != (self.n_objects,):
            raise ShapeError("weights must have length N")
        if self.capacities.shape != (self.n_knapsacks,):
            raise ShapeError("capacities must have length M")
        if np.any(self.weights < 1):
            raise ShapeError("weights must be >= 1")

    @property
    def search_space_size(self) -> int:
        return self.n_knapsacks ** self.n_objects

    def to_json_dict(self) -> dict:
        return {
            "n_objects": self.n_objects,
            "n_knapsacks": self.n_knapsacks,
            "values": self.values.tolist(),
            "weights": self.weights.tolist(),
            "capacities": self.capacities.tolist(),
            "known_optimal_cost": self.known_optimal_cost,
            "seed": self.seed,
        }

    @classmethod
    def from_json_dict(cls, doc) -> "KnapsackInstance":
        return cls(
            n_objects=int(doc["n_objects"]),
            n_knapsacks=int(doc["n_knapsacks"]),
            values=np.asarray(doc["values"], dtype=np.int64),
            weights=np.asarray(doc["weights"], dtype=np.int64),
            capacities=np.asarray(doc["capacities"], dtype=np.int64),
            known_optimal_cost=doc.get("known_optimal_cost"),
            seed=doc.get("seed"),
        )

    def save_json(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json_dict(), fh, sort_keys=True, indent=1)
            fh.write("\n")

    @classmethod
    def load_json(cls, path) -> "KnapsackInstance":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json_dict(json.load(fh))


@dataclass
class PenaltyConfig:
    coefficient: float

    def __post_init__(self):
        if self.coefficient <= 0:
            raise ShapeError("penalty coefficient must be positive")


def default_penalty(inst: KnapsackInstance) -> PenaltyConfig:
    """c_p exceeding the best attainable total value, so any overload dominates."""
    return PenaltyConfig(float(1 + inst.values.max(axis=1).sum()))


# -- encodings -------------------------------------------------------------

def to_binary(y, n_knapsacks) -> np.ndarray:
    """Integer assignment (1-based) to one-hot N x M matrix."""
    y = np.asarray(y, dtype=np.int64)
    if np.any((y < 1) | (y > n_knapsacks)):
        raise ShapeError("assignment entries must lie in 1..M")
    x = np.zeros((y.size, n_knapsacks), dtype=np.int64)
    x[np.arange(y.size), y - 1] = 1
    return x


def to_integer(x) -> np.ndarray:
    """One-hot N x M matrix to 1-based integer assignment."""
    x = np.asarray(x, dtype=np.int64)
    if x.ndim != 2:
        raise ShapeError("binary assignment must be a matrix")
    if not np.array_equal(x.sum(axis=1), np.ones(x.shape[0], dtype=np.int64)):
        raise EncodingError("every row must be one-hot to convert to integers")
    return np.argmax(x, axis=1) + 1


# -- costs -----------------------------------------------------------------

def cost_binary(inst: KnapsackInstance, x, pen: PenaltyConfig) -> float:
    x = np.asarray(x, dtype=np.int64)
    if x.shape != (inst.n_objects, inst.n_knapsacks):
        raise ShapeError("binary assignment must be N x M")
    loads = inst.weights @ x
    overload = np.maximum(0, loads - inst.capacities).sum()
    value = float((inst.values * x).sum())
    return pen.coefficient * float(overload) - value


def cost_integer(inst: KnapsackInstance, y, pen: PenaltyConfig) -> float:
    y = np.asarray(y, dtype=np.int64)
    if y.shape != (inst.n_objects,):
        raise ShapeError("integer assignment must have length N")
    if np.any((y < 1) | (y > inst.n_knapsacks)):
        raise ShapeError("assignment entries must lie in 1..M")
    return float(cost_integer_batch(inst, y[None, :], pen)[0])


def cost_integer_batch(inst: KnapsackInstance, ys, pen: PenaltyConfig) -> np.ndarray:
    """Vectorized cost_integer over an (n, N) batch of 1-based assignments."""
    ys = np.asarray(ys, dtype=np.int64)
    n = ys.shape[0]
    loads = np.zeros((n, inst.n_knapsacks), dtype=np.int64)
    rows = np.repeat(np.arange(n), inst.n_objects)
    np.add.at(loads, (rows, (ys - 1).ravel()), np.tile(inst.weights, n))
    overload = np.maximum(0, loads - inst.capacities).sum(axis=1)
    value = inst.values[np.arange(inst.n_objects), ys - 1].sum(axis=1)
    return pen.coefficient * overload.astype(np.float64) - value.astype(np.float64)


def is_feasible(inst: KnapsackInstance, assignment) -> tuple[bool, bool]:
    """(equality_ok, inequality_ok) for an integer vector or binary matrix."""
    a = np.asarray(assignment, dtype=np.int64)
    if a.ndim == 1:
        equality_ok = True
        y = a
    else:
        if a.shape != (inst.n_objects, inst.n_knapsacks):
            raise ShapeError("binary assignment must be N x M")
        equality_ok = bool(np.array_equal(a.sum(axis=1),
                                          np.ones(inst.n_objects, dtype=np.int64)))
        if not equality_ok:
            loads = inst.weights @ a
            return False, bool(np.all(loads <= inst.capacities))
        y = np.argmax(a, axis=1) + 1
    loads = np.zeros(inst.n_knapsacks, dtype=np.int64)
    np.add.at(loads, y - 1, inst.weights)
    return equality_ok, bool(np.all(loads <= inst.capacities))


def total_value(inst: KnapsackInstance, y) -> int:
    y = np.asarray(y, dtype=np.int64)
    return int(inst.values[np.arange(inst.n_objects), y - 1].sum())


# -- generation and oracle -------------------------------------------------

def generate_instance(n_objects, n_knapsacks, rng=None, seed=None,
                      value_range=DEFAULT_VALUE_RANGE,
                      weight_range=DEFAULT_WEIGHT_RANGE,
                      slack_range=DEFAULT_SLACK_RANGE,
                      oracle_budget=DEFAULT_ORACLE_BUDGET) -> KnapsackInstance:
    """Random instance with a hidden witness assignment guaranteeing feasibility.

    Capacities are the witness loads scaled by a slack factor drawn from
    `slack_range` and rounded up. When the search space fits in the oracle
    budget, known_optimal_cost is filled by exhaustive enumeration.
    """
    if rng is None:
        rng = np.random.default_rng(seed)
    values = rng.integers(value_range[0], value_range[1] + 1,
                          size=(n_objects, n_knapsacks))
    weights = rng.integers(weight_range[0], weight_range[1] + 1, size=n_objects)
    witness = rng.integers(1, n_knapsacks + 1, size=n_objects)
    loads = np.zeros(n_knapsacks, dtype=np.int64)
    np.add.at(loads, witness - 1, weights)
    slack = rng.uniform(slack_range[0], slack_range[1], size=n_knapsacks)
    capacities = np.maximum(1, np.ceil(loads * slack).astype(np.int64))
    inst = KnapsackInstance(n_objects, n_knapsacks, values, weights, capacities,
                            seed=seed, witness=witness)
    if inst.search_space_size <= oracle_budget:
        _, best_cost = brute_force_solve(inst, default_penalty(inst),
                                         budget=oracle_budget)
        inst.known_optimal_cost = best_cost
    return inst


def _assignments_chunk(start, stop, n_objects, n_knapsacks) -> np.ndarray:
    """Lexicographically ordered 1-based assignments for indices [start, stop)."""
    idx = np.arange(start, stop, dtype=np.int64)
    out = np.empty((idx.size, n_objects), dtype=np.int64)
    for i in range(n_objects - 1, -1, -1):
        out[:, i] = idx % n_knapsacks
        idx //= n_knapsacks
    return out + 1


def brute_force_solve(inst: KnapsackInstance, pen: PenaltyConfig,
                      budget=DEFAULT_ORACLE_BUDGET):
    """Exhaustive minimum of cost_integer; ties go to the lexicographically
    smallest assignment. Raises OracleBudgetError beyond `budget` evaluations."""
    total = inst.search_space_size
    if total > budget:
        raise OracleBudgetError(
            f"M^N = {total} exceeds the oracle budget {budget}; "
            "use the simulated-annealing reference instead")
    best_cost = np.inf
    best_y = None
    for start in range(0, total, _CHUNK):
        ys = _assignments_chunk(start, min(start + _CHUNK, total),
                                inst.n_objects, inst.n_knapsacks)
        costs = cost_integer_batch(inst, ys, pen)
        k = int(np.argmin(costs))
        if costs[k] < best_cost:  # strict: first (lex-smallest) minimum wins
            best_cost = float(costs[k])
            best_y = ys[k].copy()
    return best_y, best_cost


def sort_heuristic(inst: KnapsackInstance):
    """Reorder objects by non-increasing weight and knapsacks by non-increasing
    capacity. Returns (sorted instance, object permutation, knapsack permutation)
    with permutations mapping sorted positions to original indices."""
    obj_perm = np.argsort(-inst.weights, kind="stable")
    knap_perm = np.argsort(-inst.capacities, kind="stable")
    sorted_inst = KnapsackInstance(
        n_objects=inst.n_objects,
        n_knapsacks=inst.n_knapsacks,
        values=inst.values[np.ix_(obj_perm, knap_perm)],
        weights=inst.weights[obj_perm],
        capacities=inst.capacities[knap_perm],
        known_optimal_cost=inst.known_optimal_cost,
        seed=inst.seed,
    )
    return sorted_inst, obj_perm, knap_perm


def unsort_assignment(y_sorted, obj_perm, knap_perm) -> np.ndarray:
    """Map a 1-based assignment on the sorted instance back to the original."""
    y_sorted = np.asarray(y_sorted, dtype=np.int64)
    y = np.empty_like(y_sorted)
    y[obj_perm] = knap_perm[y_sorted - 1] + 1
    return y
