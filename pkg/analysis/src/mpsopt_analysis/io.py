"""Readers for the benchmark harness's documented file formats.

This package deliberately has no in-process dependency on the solver: it
consumes only the summary CSV, the instance JSON schema, and the MPS
checkpoint JSON, re-implementing the handful of formulas (chain-product
probabilities, assignment cost) it needs for plotting.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np

SUMMARY_REQUIRED = ("instance", "method", "selection", "chi", "n_epochs",
                    "alpha", "beta", "repetition", "best_cost", "valid", "n_f")

ENUMERATION_GUARD = 4096        # max reduced search-space size M^N
SITE_ENUMERATION_CAP = 1 << 20  # hard cap on raw configuration count


class ParseError(ValueError):
    pass


class GuardError(RuntimeError):
    pass


def read_summary(path) -> list[dict]:
    """Summary CSV rows; raises ParseError naming the first malformed row."""
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in SUMMARY_REQUIRED
                   if c not in (reader.fieldnames or [])]
        if missing:
            raise ParseError(f"{path}: missing columns {missing}")
        rows = []
        for i, row in enumerate(reader, start=2):
            try:
                if row["best_cost"] != "":
                    float(row["best_cost"])
                    int(row["n_f"])
            except (TypeError, ValueError) as exc:
                raise ParseError(f"{path}: row {i}: {exc}") from exc
            rows.append(row)
    return rows


@dataclass
class Instance:
    n_objects: int
    n_knapsacks: int
    values: np.ndarray
    weights: np.ndarray
    capacities: np.ndarray
    known_optimal_cost: float | None

    @property
    def search_space_size(self) -> int:
        return self.n_knapsacks ** self.n_objects

    @property
    def penalty(self) -> float:
        return float(1 + self.values.max(axis=1).sum())


def load_instance(path) -> Instance:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    try:
        return Instance(
            n_objects=int(doc["n_objects"]),
            n_knapsacks=int(doc["n_knapsacks"]),
            values=np.asarray(doc["values"], dtype=np.int64),
            weights=np.asarray(doc["weights"], dtype=np.int64),
            capacities=np.asarray(doc["capacities"], dtype=np.int64),
            known_optimal_cost=doc.get("known_optimal_cost"),
        )
    except KeyError as exc:
        raise ParseError(f"{path}: missing instance field {exc}") from exc


@dataclass
class Checkpoint:
    physical_dims: list[int]
    tensors: list[np.ndarray]

    @property
    def n_configs(self) -> int:
        return int(np.prod(self.physical_dims, dtype=np.float64))


def load_checkpoint(path) -> Checkpoint:
    """MPS checkpoint: {physical_dims, bond_dims, tensors: [flat row-major]}."""
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    try:
        dims = [int(d) for d in doc["physical_dims"]]
        bonds = [int(b) for b in doc["bond_dims"]]
        tensors = [np.asarray(flat, dtype=np.float64)
                   .reshape(bonds[j], dims[j], bonds[j + 1])
                   for j, flat in enumerate(doc["tensors"])]
    except (KeyError, ValueError) as exc:
        raise ParseError(f"{path}: bad checkpoint: {exc}") from exc
    return Checkpoint(physical_dims=dims, tensors=tensors)


def enumerate_probabilities(ckpt: Checkpoint):
    """(configs, probabilities) over every configuration, by chain product."""
    total = ckpt.n_configs
    if total > SITE_ENUMERATION_CAP:
        raise GuardError(
            f"{total} configurations exceed the enumeration cap; "
            "use a smaller instance")
    dims = ckpt.physical_dims
    idx = np.arange(total, dtype=np.int64)
    configs = np.empty((total, len(dims)), dtype=np.int64)
    for j in range(len(dims) - 1, -1, -1):
        configs[:, j] = idx % dims[j]
        idx //= dims[j]
    v = ckpt.tensors[0][:, configs[:, 0], :].transpose(1, 0, 2)[:, 0, :]
    for j in range(1, len(dims)):
        t = ckpt.tensors[j][:, configs[:, j], :].transpose(1, 0, 2)
        v = np.einsum("nl,nlr->nr", v, t)
    amps = v[:, 0]
    p = amps ** 2
    z = p.sum()
    if z <= 0:
        raise ParseError("checkpoint has zero norm")
    return configs, p / z


def assignment_costs(inst: Instance, configs: np.ndarray, binary: bool):
    """Cost, equality-feasibility, and full feasibility per configuration.

    Binary configurations are object-major flattened N x M one-hot matrices;
    integer configurations are 0-based knapsack indices per object.
    """
    n, m = inst.n_objects, inst.n_knapsacks
    if binary:
        x = configs.reshape(configs.shape[0], n, m)
        equality = np.all(x.sum(axis=2) == 1, axis=1)
        loads = np.einsum("i,kij->kj", inst.weights, x)
        value = np.einsum("ij,kij->k", inst.values, x)
    else:
        equality = np.ones(configs.shape[0], dtype=bool)
        loads = np.zeros((configs.shape[0], m), dtype=np.int64)
        rows = np.repeat(np.arange(configs.shape[0]), n)
        np.add.at(loads, (rows, configs.ravel()), np.tile(inst.weights, configs.shape[0]))
        value = inst.values[np.arange(n), configs].sum(axis=1)
    overload = np.maximum(0, loads - inst.capacities).sum(axis=1)
    cost = inst.penalty * overload.astype(np.float64) - value.astype(np.float64)
    feasible = equality & (overload == 0)
    return cost, equality, feasible
