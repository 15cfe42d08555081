"""Benchmark harness CLI.

Subcommands:
  bench generate --sizes 7x2,8x5 --seed S --out DIR
  bench run --suite FILE --out DIR [--workers K] [--dry-run] [--save-models]
  bench report --results DIR --out DIR

Environment overrides: BENCH_WORKERS (worker pool size), BENCH_ORACLE_BUDGET
(exhaustive-oracle budget for instance generation). All outputs are UTF-8;
CSV files follow RFC 4180 (CRLF line endings).
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .baselines import SAConfig, random_search, simulated_annealing
from .dmrg import TrainConfig
from .geo import SELECTION_STRATEGIES, GeoConfig, geo_run
from .knapsack import DEFAULT_ORACLE_BUDGET, KnapsackInstance, generate_instance

METHODS = ("geo-binary", "geo-integer", "sa", "random")
SUMMARY_COLUMNS = ["instance", "method", "selection", "chi", "n_epochs",
                   "alpha", "beta", "repetition", "seed", "best_cost", "valid",
                   "n_f", "wall_time_ms", "status"]

# documented hyperparameter ranges; values outside them warn but still run
KNOWN_BETA = (0.1, 0.01, 0.001)
KNOWN_ALPHA = (0.001, 0.0001)
KNOWN_EPOCHS = (1, 3, 5, 10)
KNOWN_CHI = (4, 8, 16, 32)


# -- suite configuration -----------------------------------------------------

@dataclass
class BenchmarkSuite:
    instances: list[str]
    grid: dict                      # beta / alpha / n_epochs / chi value lists
    repetitions: int = 10
    methods: tuple[str, ...] = METHODS
    selection: str = "all"
    max_iterations: int = 50
    n_samples: int | None = None    # default 10 * M * N per instance
    seed: int = 0

    def cells(self) -> list[dict]:
        return [{"beta": b, "alpha": a, "n_epochs": e, "chi": c}
                for b in self.grid["beta"] for a in self.grid["alpha"]
                for e in self.grid["n_epochs"] for c in self.grid["chi"]]


def load_suite(path) -> BenchmarkSuite:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    allowed = {"instances", "grid", "repetitions", "methods", "selection",
               "max_iterations", "n_samples", "seed"}
    unknown = set(doc) - allowed
    if unknown:
        raise ValueError(f"unknown suite keys: {sorted(unknown)}")
    for key in ("instances", "grid"):
        if key not in doc:
            raise ValueError(f"suite is missing required key {key!r}")
    grid = doc["grid"]
    for key in ("beta", "alpha", "n_epochs", "chi"):
        if key not in grid or not isinstance(grid[key], list) or not grid[key]:
            raise ValueError(f"grid.{key} must be a non-empty list")
    for key, known in (("beta", KNOWN_BETA), ("alpha", KNOWN_ALPHA),
                       ("n_epochs", KNOWN_EPOCHS), ("chi", KNOWN_CHI)):
        for v in grid[key]:
            if v not in known:
                print(f"warning: grid.{key} value {v} is outside the "
                      f"documented range {known}", file=sys.stderr)
    methods = tuple(doc.get("methods", list(METHODS)))
    for m in methods:
        if m not in METHODS:
            raise ValueError(f"unknown method {m!r}; choose from {METHODS}")
    suite = BenchmarkSuite(
        instances=list(doc["instances"]),
        grid={k: list(grid[k]) for k in ("beta", "alpha", "n_epochs", "chi")},
        repetitions=int(doc.get("repetitions", 10)),
        methods=methods,
        selection=doc.get("selection", "all"),
        max_iterations=int(doc.get("max_iterations", 50)),
        n_samples=doc.get("n_samples"),
        seed=int(doc.get("seed", 0)),
    )
    if suite.repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    if suite.selection not in SELECTION_STRATEGIES:
        raise ValueError(f"unknown selection {suite.selection!r}")
    if not suite.instances:
        raise ValueError("suite needs at least one instance")
    return suite


# -- generate ----------------------------------------------------------------

def parse_sizes(text) -> list[tuple[int, int]]:
    """Parse '7x2,8x5' into [(7, 2), (8, 5)] (objects x knapsacks)."""
    sizes = []
    if not text.strip():
        return sizes
    for token in text.split(","):
        parts = token.lower().strip().split("x")
        if len(parts) != 2:
            raise ValueError(f"bad size {token!r}; expected NxM like 7x2")
        n, m = int(parts[0]), int(parts[1])
        if n < 1 or m < 1:
            raise ValueError(f"bad size {token!r}; N and M must be >= 1")
        sizes.append((n, m))
    return sizes


def cmd_generate(args) -> int:
    sizes = parse_sizes(args.sizes)
    os.makedirs(args.out, exist_ok=True)
    budget = int(os.environ.get("BENCH_ORACLE_BUDGET", DEFAULT_ORACLE_BUDGET))
    ss = np.random.SeedSequence(args.seed)
    for child, (n, m) in zip(ss.spawn(len(sizes)), sizes):
        seed = int(child.generate_state(1)[0])
        inst = generate_instance(n, m, seed=seed, oracle_budget=budget)
        path = os.path.join(args.out, f"instance_{n}x{m}.json")
        inst.save_json(path)
        print(f"wrote {path} (search space {inst.search_space_size}, "
              f"optimum {inst.known_optimal_cost})")
    return 0


# -- run ---------------------------------------------------------------------

def _run_one(job: dict) -> dict:
    """Execute one benchmark run; returns its summary row. Worker-safe."""
    inst = KnapsackInstance.load_json(job["instance"])
    started = time.perf_counter()
    row = {col: "" for col in SUMMARY_COLUMNS}
    row.update({"instance": job["instance"], "method": job["method"],
                "selection": job["selection"], "chi": job["chi"],
                "n_epochs": job["n_epochs"], "alpha": job["alpha"],
                "beta": job["beta"], "repetition": job["repetition"],
                "seed": job["seed"]})
    try:
        if job["method"].startswith("geo-"):
            cfg = GeoConfig(
                beta=job["beta"],
                train=TrainConfig(learning_rate=job["alpha"],
                                  max_bond=job["chi"],
                                  epochs=job["n_epochs"]),
                n_samples=job["n_samples"],
                selection=job["selection"],
                max_iterations=job["max_iterations"],
                encoding=job["method"].split("-", 1)[1],
                seed=job["seed"],
            )
            if job.get("save_models"):
                result, initial, final = geo_run(inst, cfg, return_model=True)
                initial.save_json(job["save_models"] + "_initial.json")
                final.save_json(job["save_models"] + "_final.json")
            else:
                result = geo_run(inst, cfg)
        elif job["method"] == "random":
            result = random_search(inst, n_f=job["budget"], seed=job["seed"])
        else:
            result = simulated_annealing(
                inst, SAConfig(ensemble_size=10 * inst.n_knapsacks * inst.n_objects,
                               budget=job["budget"], seed=job["seed"]))
        row.update({"best_cost": result.best_cost,
                    "valid": int(result.valid_found),
                    "n_f": result.n_evaluations,
                    "status": result.status})
        with open(job["result_path"], "w", encoding="utf-8") as fh:
            json.dump(result.to_json_dict(), fh, sort_keys=True, indent=1)
            fh.write("\n")
    except Exception as exc:  # a failed run becomes a status row, never an abort
        row["status"] = f"{type(exc).__name__}: {exc}"
    row["wall_time_ms"] = round((time.perf_counter() - started) * 1000.0, 3)
    return row


def _plan_jobs(suite: BenchmarkSuite, out_dir, save_models) -> list[dict]:
    cells = suite.cells()
    jobs = []
    ss = np.random.SeedSequence(suite.seed)
    n_runs = len(suite.instances) * len(cells) * len(suite.methods) * suite.repetitions
    seeds = iter(ss.spawn(n_runs))
    for inst_path in suite.instances:
        inst = KnapsackInstance.load_json(inst_path)
        n_samples = suite.n_samples or 10 * inst.n_knapsacks * inst.n_objects
        stem = os.path.splitext(os.path.basename(inst_path))[0]
        for ci, cell in enumerate(cells):
            for method in suite.methods:
                for rep in range(suite.repetitions):
                    seed = int(next(seeds).generate_state(1)[0])
                    name = f"{stem}_{method}_c{ci}_r{rep}"
                    job = {
                        "instance": inst_path,
                        "method": method,
                        "selection": suite.selection,
                        "repetition": rep,
                        "seed": seed,
                        "n_samples": n_samples,
                        "max_iterations": suite.max_iterations,
                        "result_path": os.path.join(out_dir, name + ".json"),
                        "budget": None,  # baselines: filled after the GEO pass
                        "save_models": (os.path.join(out_dir, "model_" + name)
                                        if save_models and method.startswith("geo-")
                                        and rep == 0 else None),
                        **cell,
                    }
                    jobs.append(job)
    return jobs


def _execute(jobs, workers) -> list[dict]:
    if workers <= 1 or not jobs:
        return [_run_one(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_one, jobs))


def cmd_run(args) -> int:
    suite = load_suite(args.suite)
    workers = int(os.environ.get("BENCH_WORKERS", args.workers))
    os.makedirs(args.out, exist_ok=True)
    jobs = _plan_jobs(suite, args.out, args.save_models)
    if args.dry_run:
        print(f"planned runs: {len(jobs)} "
              f"({len(suite.instances)} instances x {len(suite.cells())} cells "
              f"x {len(suite.methods)} methods x {suite.repetitions} reps)")
        for job in jobs:
            print(f"  {job['instance']} {job['method']} chi={job['chi']} "
                  f"n_epochs={job['n_epochs']} alpha={job['alpha']} "
                  f"beta={job['beta']} rep={job['repetition']} seed={job['seed']}")
        return 0

    geo_jobs = [j for j in jobs if j["method"].startswith("geo-")]
    base_jobs = [j for j in jobs if not j["method"].startswith("geo-")]
    rows = {id(j): r for j, r in zip(geo_jobs, _execute(geo_jobs, workers))}

    # baseline budget = per-instance max n_f over all GEO cells and reps
    budgets: dict[str, int] = {}
    for job in geo_jobs:
        n_f = rows[id(job)]["n_f"]
        if n_f != "":
            budgets[job["instance"]] = max(budgets.get(job["instance"], 0), int(n_f))
    for job in base_jobs:
        job["budget"] = budgets.get(job["instance"], 0) or \
            10 * 50  # no successful GEO run to pair with: token budget
    rows.update({id(j): r for j, r in zip(base_jobs, _execute(base_jobs, workers))})

    summary_path = os.path.join(args.out, "summary.csv")
    with open(summary_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=SUMMARY_COLUMNS)
        writer.writeheader()
        for job in jobs:
            writer.writerow(rows[id(job)])
    print(f"wrote {summary_path} ({len(jobs)} rows)")
    _write_best_configs(list(rows[id(j)] for j in jobs),
                        os.path.join(args.out, "best_configs.csv"))
    return 0


# -- report ------------------------------------------------------------------

def _read_summary(path) -> list[dict]:
    with open(path, encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


def _config_key(row):
    return (row["selection"], row["chi"], row["n_epochs"], row["alpha"],
            row["beta"])


def _group_stats(rows):
    """V (valid fraction) and R (mean cost ratio over valid runs with a known
    optimum) for one group of repetition rows."""
    n = len(rows)
    valid = [r for r in rows if r["valid"] == "1" or r["valid"] == 1]
    v = len(valid) / n if n else 0.0
    ratios = []
    for r in valid:
        opt = _known_optimum(r["instance"])
        if opt is not None and opt != 0:
            ratios.append(float(r["best_cost"]) / opt)
    return v, (sum(ratios) / len(ratios) if ratios else None)


_OPT_CACHE: dict[str, float | None] = {}


def _known_optimum(instance_path):
    if instance_path not in _OPT_CACHE:
        try:
            _OPT_CACHE[instance_path] = \
                KnapsackInstance.load_json(instance_path).known_optimal_cost
        except OSError:
            _OPT_CACHE[instance_path] = None
    return _OPT_CACHE[instance_path]


def _write_best_configs(rows, out_path):
    """Per (instance, method): the configuration with the highest V, ties
    broken by the highest R, then by configuration order."""
    groups: dict[tuple, list[dict]] = {}
    for row in rows:
        groups.setdefault((row["instance"], row["method"], _config_key(row)),
                          []).append(row)
    best: dict[tuple, tuple] = {}
    for (inst, method, cfg), g in sorted(groups.items(),
                                         key=lambda kv: str(kv[0])):
        v, r = _group_stats(g)
        rank = (v, -1.0 if r is None else r)
        cur = best.get((inst, method))
        if cur is None or rank > cur[0]:
            best[(inst, method)] = (rank, cfg, v, r)
    with open(out_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["instance", "method", "selection", "chi", "n_epochs",
                         "alpha", "beta", "V", "R"])
        for (inst, method), (_, cfg, v, r) in sorted(best.items()):
            writer.writerow([inst, method, *cfg, f"{v:.3f}",
                             "" if r is None else f"{r:.3f}"])
    print(f"wrote {out_path}")


def _write_heatmaps(rows, out_dir):
    """(chi x n_epochs) grids of mean valid fraction and mean R per encoding."""
    for encoding in ("binary", "integer"):
        sub = [r for r in rows if r["method"] == f"geo-{encoding}"]
        chis = sorted({int(r["chi"]) for r in sub}) if sub else []
        epochs = sorted({int(r["n_epochs"]) for r in sub}) if sub else []
        for metric in ("valid", "ratio"):
            path = os.path.join(out_dir, f"heatmap_{encoding}_{metric}.csv")
            with open(path, "w", encoding="utf-8", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["chi"] + [f"n_epochs={e}" for e in epochs])
                for chi in chis:
                    out_row = [chi]
                    for e in epochs:
                        g = [r for r in sub if int(r["chi"]) == chi
                             and int(r["n_epochs"]) == e]
                        if not g:
                            out_row.append("")  # gap marker: no runs in cell
                            continue
                        v, r = _group_stats(g)
                        out_row.append(f"{v:.4f}" if metric == "valid"
                                       else ("" if r is None else f"{r:.4f}"))
                    writer.writerow(out_row)
            print(f"wrote {path}")


def cmd_report(args) -> int:
    summary_path = os.path.join(args.results, "summary.csv")
    os.makedirs(args.out, exist_ok=True)
    rows = _read_summary(summary_path) if os.path.exists(summary_path) else []
    _write_best_configs(rows, os.path.join(args.out, "best_configs.csv"))
    _write_heatmaps(rows, args.out)
    if not rows:
        print("no summary rows found", file=sys.stderr)
        return 1
    return 0


# -- entry point -------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bench",
        description="Benchmark harness for tensor-network knapsack optimization")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="generate instance files")
    gen.add_argument("--sizes", required=True,
                     help="comma-separated NxM sizes, e.g. 7x2,8x5")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True)
    gen.set_defaults(func=cmd_generate)

    run = sub.add_parser("run", help="run a benchmark suite")
    run.add_argument("--suite", required=True, help="suite JSON file")
    run.add_argument("--out", required=True)
    run.add_argument("--workers", type=int, default=1)
    run.add_argument("--dry-run", action="store_true")
    run.add_argument("--save-models", action="store_true",
                     help="checkpoint initial/final models for rep 0 of each "
                          "GEO run")
    run.set_defaults(func=cmd_run)

    rep = sub.add_parser("report", help="aggregate results into V/R tables")
    rep.add_argument("--results", required=True)
    rep.add_argument("--out", required=True)
    rep.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
