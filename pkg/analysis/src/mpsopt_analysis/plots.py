"""The three figure kinds: method comparison, hyperparameter heatmaps, and
before/after model distributions. All output is deterministic SVG so that
regenerating a figure from the same inputs is byte-identical."""
from __future__ import annotations

import os
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "mpsopt-analysis"

import matplotlib.pyplot as plt
import numpy as np

from .io import (ENUMERATION_GUARD, GuardError, Instance, ParseError,
                 assignment_costs, enumerate_probabilities, load_checkpoint,
                 load_instance)

METHOD_STYLE = {
    "geo-integer": ("tab:blue", "o"),
    "geo-binary": ("tab:orange", "s"),
    "sa": ("tab:green", "^"),
    "random": ("tab:red", "x"),
}


def _save(fig, out_path):
    os.makedirs(os.path.dirname(os.path.abspath(out_path)), exist_ok=True)
    fig.savefig(out_path, format="svg", metadata={"Date": None})
    plt.close(fig)


def _float(row, key):
    return float(row[key]) if row.get(key, "") != "" else None


def _is_valid(row):
    return row.get("valid") in (1, True, "1", "True", "true")


def _instance_cache(rows):
    cache = {}
    for row in rows:
        path = row["instance"]
        if path not in cache:
            try:
                cache[path] = load_instance(path)
            except (OSError, ParseError):
                cache[path] = None
    return cache


def _ratio(row, inst):
    """Best-cost to known-optimum ratio for a valid run, else None."""
    if inst is None or inst.known_optimal_cost in (None, 0):
        return None
    if not _is_valid(row):
        return None
    cost = _float(row, "best_cost")
    if cost is None:
        return None
    return cost / float(inst.known_optimal_cost)


def plot_comparison(rows, out_path, hard_only=False):
    """Three stacked panels vs search-space size M^N (log x): mean valid-run
    cost ratio with error bars, valid fraction, and exploration ratio
    (largest n_f over all configurations, divided by M^N). With hard_only,
    keep only instances where random search never found a valid solution."""
    cache = _instance_cache(rows)
    # instance -> method -> rows
    by_inst = defaultdict(lambda: defaultdict(list))
    for row in rows:
        by_inst[row["instance"]][row["method"]].append(row)

    if hard_only:
        by_inst = {p: methods for p, methods in by_inst.items()
                   if not any(_is_valid(r)
                              for r in methods.get("random", []))}

    fig, axes = plt.subplots(3, 1, figsize=(7, 9), sharex=True)
    methods = sorted({m for methods in by_inst.values() for m in methods},
                     key=lambda m: list(METHOD_STYLE).index(m)
                     if m in METHOD_STYLE else len(METHOD_STYLE))
    for method in methods:
        xs, r_mean, r_err, v_frac, explore = [], [], [], [], []
        for path in sorted(by_inst):
            inst = cache.get(path)
            if inst is None:
                continue
            mrows = by_inst[path].get(method, [])
            if not mrows:
                continue  # explicit gap: nothing drawn for this instance
            size = inst.search_space_size
            ratios = [r for r in (_ratio(row, inst) for row in mrows)
                      if r is not None]
            xs.append(size)
            r_mean.append(np.mean(ratios) if ratios else np.nan)
            r_err.append(np.std(ratios) if len(ratios) > 1 else 0.0)
            v_frac.append(np.mean([
                1.0 if _is_valid(row) else 0.0 for row in mrows]))
            explore.append(max(int(row["n_f"]) for row in mrows
                               if row.get("n_f", "") != "") / size)
        color, marker = METHOD_STYLE.get(method, ("gray", "."))
        axes[0].errorbar(xs, r_mean, yerr=r_err, label=method, color=color,
                         marker=marker, linestyle="none", capsize=3)
        axes[1].plot(xs, v_frac, label=method, color=color, marker=marker,
                     linestyle="none")
        axes[2].plot(xs, explore, label=method, color=color, marker=marker,
                     linestyle="none")
    axes[0].set_ylabel("mean cost ratio R")
    axes[1].set_ylabel("valid fraction V")
    axes[2].set_ylabel("max n_f / M^N")
    axes[2].set_xlabel("search-space size M^N")
    for ax in axes:
        ax.set_xscale("log")
        ax.grid(True, alpha=0.3)
    axes[0].legend(loc="lower left", fontsize=8)
    fig.suptitle("Method comparison" + (" (hard instances)" if hard_only
                                        else ""))
    _save(fig, out_path)


def plot_heatmap(rows, out_path):
    """2x2 grid: rows = encoding (binary, integer), columns = {valid
    fraction, mean cost ratio}, cells over (chi, n_epochs). Cells with no
    data are drawn in a distinct hatch color."""
    cache = _instance_cache(rows)
    chis = sorted({int(r["chi"]) for r in rows
                   if r["method"].startswith("geo-") and r["chi"] != ""})
    epochs = sorted({int(r["n_epochs"]) for r in rows
                     if r["method"].startswith("geo-") and r["n_epochs"] != ""})
    if not chis or not epochs:
        raise ParseError("no solver rows with chi/n_epochs to aggregate")

    fig, axes = plt.subplots(2, 2, figsize=(9, 7))
    for row_i, encoding in enumerate(("binary", "integer")):
        method = f"geo-{encoding}"
        valid = np.full((len(chis), len(epochs)), np.nan)
        ratio = np.full((len(chis), len(epochs)), np.nan)
        for i, chi in enumerate(chis):
            for j, ne in enumerate(epochs):
                cell = [r for r in rows if r["method"] == method
                        and r["chi"] != "" and int(r["chi"]) == chi
                        and int(r["n_epochs"]) == ne]
                if not cell:
                    continue
                valid[i, j] = np.mean([1.0 if _is_valid(r) else 0.0
                                       for r in cell])
                ratios = [x for x in (_ratio(r, cache.get(r["instance"]))
                                      for r in cell) if x is not None]
                if ratios:
                    ratio[i, j] = np.mean(ratios)
        for col_j, (grid, label) in enumerate(
                ((valid, "valid fraction"), (ratio, "mean cost ratio"))):
            ax = axes[row_i][col_j]
            cmap = plt.get_cmap("viridis").copy()
            cmap.set_bad("lightgray")
            im = ax.imshow(np.ma.masked_invalid(grid), cmap=cmap,
                           vmin=0.0, vmax=1.0, aspect="auto",
                           origin="lower")
            ax.set_xticks(range(len(epochs)), [str(e) for e in epochs])
            ax.set_yticks(range(len(chis)), [str(c) for c in chis])
            ax.set_xlabel("training epochs per iteration")
            ax.set_ylabel("max bond dimension")
            ax.set_title(f"{encoding}: {label}")
            for i in range(len(chis)):
                for j in range(len(epochs)):
                    if not np.isnan(grid[i, j]):
                        ax.text(j, i, f"{grid[i, j]:.2f}", ha="center",
                                va="center", color="white", fontsize=8)
            fig.colorbar(im, ax=ax, shrink=0.8)
    fig.tight_layout()
    _save(fig, out_path)


def _detect_encoding(ckpt, inst: Instance):
    n, m = inst.n_objects, inst.n_knapsacks
    dims = ckpt.physical_dims
    if len(dims) == n and all(d == m for d in dims):
        return "integer"
    if len(dims) == n * m and all(d == 2 for d in dims):
        return "binary"
    raise ParseError(
        f"checkpoint with {len(dims)} sites of dims {sorted(set(dims))} "
        f"matches neither encoding of a {n}x{m} instance")


def plot_distribution(initial_path, trained_path, instance_path, out_path):
    """Initial vs trained model probability over every configuration, sorted
    by decreasing negative cost (best assignments first), with the uniform
    1/M^N reference line, the feasibility boundary, and an inset zoom on the
    feasible region. Probability masses are asserted to sum to 1. Returns a
    summary of the rendered data for verification."""
    inst = load_instance(instance_path)
    if inst.search_space_size > ENUMERATION_GUARD:
        raise GuardError(
            f"search space M^N = {inst.search_space_size} exceeds "
            f"{ENUMERATION_GUARD}; use a smaller instance")
    initial = load_checkpoint(initial_path)
    trained = load_checkpoint(trained_path)
    encoding = _detect_encoding(trained, inst)
    if _detect_encoding(initial, inst) != encoding:
        raise ParseError("initial and trained checkpoints use different "
                         "encodings")
    configs, p_init = enumerate_probabilities(initial)
    configs2, p_trained = enumerate_probabilities(trained)
    if configs.shape != configs2.shape or not np.array_equal(configs, configs2):
        raise ParseError("checkpoints enumerate different configuration sets")
    for name, p in (("initial", p_init), ("trained", p_trained)):
        if abs(p.sum() - 1.0) > 1e-6:
            raise ParseError(f"{name} probabilities sum to {p.sum()!r}")

    cost, _, feasible = assignment_costs(inst, configs,
                                         binary=(encoding == "binary"))
    order = np.lexsort((~feasible, cost))  # best (lowest cost) first
    p_init, p_trained, feasible = p_init[order], p_trained[order], feasible[order]
    x = np.arange(len(order))
    n_feasible = int(feasible.sum())
    uniform = 1.0 / inst.search_space_size

    fig, ax = plt.subplots(figsize=(8, 5))
    ax.plot(x, p_init, color="tab:gray", lw=1.0, label="initial model")
    ax.plot(x, p_trained, color="tab:blue", lw=1.0, label="trained model")
    ax.axhline(uniform, color="k", ls="--", lw=0.8,
               label=f"uniform 1/M^N = {uniform:.2e}")
    if 0 < n_feasible < len(x):
        ax.axvline(n_feasible - 0.5, color="tab:red", ls=":",
                   label="feasibility boundary")
    ax.set_xlabel("configurations, sorted by decreasing negative cost")
    ax.set_ylabel("model probability")
    ax.set_yscale("log")
    ax.legend(loc="upper right", fontsize=8)

    if n_feasible > 1:
        inset = ax.inset_axes([0.08, 0.55, 0.35, 0.4])
        zoom = slice(0, n_feasible)
        inset.plot(x[zoom], p_init[zoom], color="tab:gray", lw=1.0)
        inset.plot(x[zoom], p_trained[zoom], color="tab:blue", lw=1.0)
        inset.axhline(uniform, color="k", ls="--", lw=0.8)
        inset.set_title("feasible region", fontsize=8)
        inset.tick_params(labelsize=6)
    _save(fig, out_path)
    return {
        "encoding": encoding,
        "n_feasible": n_feasible,
        "uniform": uniform,
        "initial_sum": float(p_init.sum()),
        "trained_sum": float(p_trained.sum()),
        "initial_probabilities": p_init,
        "trained_probabilities": p_trained,
        "costs": cost[order],
        "feasible": feasible,
        "trained_peak_config": tuple(int(v) for v in
                                     configs[order[int(np.argmax(p_trained))]]),
    }
