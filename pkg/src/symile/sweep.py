"""The headline benchmark sweep: train both objectives across a grid of
mixture weights, evaluate zero-shot retrieval with bootstrapped accuracy,
and emit one CSV of accuracies plus one CSV of the oracle's exact
information quantities (the two panels of the synthetic benchmark figure).

Cells are independent and resumable: each (config, p_hat, objective,
seed) cell owns a directory keyed by the config hash, and cells with an
existing result file are skipped.  Failed cells are reported at the end
without discarding completed ones.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any

from . import fileio
from .data import apply_missingness, split
from .data import gen_synth
from .evaluation import bootstrap_accuracy, classify_target
from .oracle import (
    InfoReport,
    build_synth_table,
    conditional_mi,
    mutual_information,
    synth_var_names,
    total_correlation,
)
from .rng import derive_seed
from .train import TrainConfig, save_checkpoint, train

ACCURACY_HEADER = (
    "p_hat",
    "objective",
    "strategy",
    "seed",
    "mean_acc",
    "se",
    "n_test",
    "checkpoint_path",
)
INFORMATION_HEADER = ("p_hat", "quantity", "group_spec", "value_nats")

DEFAULT_GRID = tuple(round(0.1 * k, 10) for k in range(11))


@dataclass
class SweepSpec:
    """The experiment matrix: mixture-weight grid x objectives x seeds."""

    p_hat_grid: tuple[float, ...] = DEFAULT_GRID
    objectives: tuple[str, ...] = ("symile", "pairwise_clip")
    seeds: tuple[int, ...] = (0,)
    base_config: TrainConfig = field(default_factory=TrainConfig)
    i_mode: str = "shared"
    dims: int = 5
    bootstrap_resamples: int = 10

    def __post_init__(self) -> None:
        if not self.p_hat_grid or not self.objectives or not self.seeds:
            raise ValueError("grid, objectives and seeds must be nonempty")

    def to_dict(self) -> dict[str, Any]:
        return {
            "p_hat_grid": list(self.p_hat_grid),
            "objectives": list(self.objectives),
            "seeds": list(self.seeds),
            "base_config": self.base_config.to_dict(),
            "i_mode": self.i_mode,
            "dims": self.dims,
            "bootstrap_resamples": self.bootstrap_resamples,
        }

    def hash(self) -> str:
        return fileio.config_hash(self.to_dict())


def _cell_dir(root: str, spec: SweepSpec, p_hat: float, objective: str, seed: int) -> str:
    return os.path.join(root, "cells", f"{spec.hash()}_p{p_hat!r}_{objective}_s{seed}")


def run_cell(
    spec: SweepSpec, p_hat: float, objective: str, seed: int, out_dir: str
) -> dict[str, Any]:
    """Train, evaluate and persist one sweep cell; returns its result row."""
    cell = _cell_dir(out_dir, spec, p_hat, objective, seed)
    result_path = os.path.join(cell, "result.json")
    if os.path.exists(result_path):
        with open(result_path) as f:
            f.readline()  # provenance
            return json.loads(f.readline())

    cfg = replace(spec.base_config, objective=objective, seed=seed)
    data_seed = derive_seed(seed, "sweep-data")
    dataset = gen_synth(cfg.split.total, p_hat, data_seed, spec.i_mode, spec.dims)
    train_ds, val_ds, test_ds = split(dataset, cfg.split)
    if cfg.p_missing > 0.0:
        train_ds = apply_missingness(train_ds, cfg.p_missing, derive_seed(seed, "mask-train"))
        val_ds = apply_missingness(val_ds, cfg.p_missing, derive_seed(seed, "mask-val"))

    result = train(cfg, train_ds, val_ds)
    scorer = "symile" if objective == "symile" else "clip"
    retrieval = classify_target(result.checkpoint.params, scorer, test_ds, target="b")
    report = bootstrap_accuracy(
        retrieval, spec.bootstrap_resamples, derive_seed(seed, "sweep-boot")
    )

    os.makedirs(cell, exist_ok=True)
    ckpt_path = os.path.join(cell, "checkpoint.json")
    save_checkpoint(ckpt_path, result.checkpoint)
    row = {
        "p_hat": p_hat,
        "objective": objective,
        "strategy": cfg.strategy,
        "seed": seed,
        "mean_acc": report.mean_accuracy,
        "se": report.std_error,
        "n_test": test_ds.n,
        # relative to out_dir so aggregate CSVs are byte-stable across runs
        "checkpoint_path": os.path.relpath(ckpt_path, out_dir),
    }
    with open(result_path, "w", newline="\n") as f:
        f.write(fileio.provenance_line(seed, spec.hash()) + "\n")
        f.write(fileio.canonical_json(row) + "\n")
    return row


def information_rows(
    p_hat_grid: tuple[float, ...], i_mode: str, dims_list: tuple[int, ...] = (1, 5)
) -> list[tuple]:
    """Exact oracle quantities per grid point, labeled by dimensionality.

    Emits the two always-zero pairwise terms, the nonzero pairwise term,
    all three conditional terms, and the total correlation, for each of
    the requested dimensionalities (whole-vector groups).
    """
    rows: list[tuple] = []
    for p_hat in p_hat_grid:
        for dims in dims_list:
            table = build_synth_table(p_hat, dims, i_mode)
            a, b, c = synth_var_names(dims)
            label = f"dims={dims}"
            reports = [
                (InfoReport("mi", (a, b), mutual_information(table, a, b)), "a;b"),
                (InfoReport("mi", (b, c), mutual_information(table, b, c)), "b;c"),
                (InfoReport("mi", (a, c), mutual_information(table, a, c)), "a;c"),
                (InfoReport("cmi", (a, b, c), conditional_mi(table, a, b, c)), "a;b|c"),
                (InfoReport("cmi", (b, c, a), conditional_mi(table, b, c, a)), "b;c|a"),
                (InfoReport("cmi", (a, c, b), conditional_mi(table, a, c, b)), "a;c|b"),
                (InfoReport("tc", (a, b, c), total_correlation(table, (a, b, c))), "a;b;c"),
            ]
            for rep, group_spec in reports:
                rows.append((p_hat, rep.kind, f"{group_spec}@{label}", rep.value_nats))
    return rows


@dataclass
class SweepOutcome:
    accuracy_csv: str
    information_csv: str
    rows: list[dict[str, Any]]
    failures: list[tuple[float, str, int, str]]


def run_sweep(spec: SweepSpec, out_dir: str, jobs: int = 1) -> SweepOutcome:
    """Run (or resume) every cell, then write the two aggregate CSVs."""
    os.makedirs(out_dir, exist_ok=True)
    cells = [
        (p, obj, seed)
        for p in spec.p_hat_grid
        for obj in spec.objectives
        for seed in spec.seeds
    ]
    results: dict[tuple, dict[str, Any]] = {}
    failures: list[tuple[float, str, int, str]] = []

    def run_one(cell: tuple) -> None:
        p, obj, seed = cell
        try:
            results[cell] = run_cell(spec, p, obj, seed, out_dir)
        except Exception as exc:  # noqa: BLE001 - cell isolation is the contract
            failures.append((p, obj, seed, f"{type(exc).__name__}: {exc}"))

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            list(pool.map(run_one, cells))
    else:
        for cell in cells:
            run_one(cell)

    sweep_hash = spec.hash()
    seed0 = spec.seeds[0]
    accuracy_csv = os.path.join(out_dir, "accuracy.csv")
    rows = [results[c] for c in cells if c in results]
    fileio.write_csv(
        accuracy_csv,
        ACCURACY_HEADER,
        [[r[k] for k in ACCURACY_HEADER] for r in rows],
        seed0,
        sweep_hash,
    )
    information_csv = os.path.join(out_dir, "information.csv")
    dims_list = (1,) if spec.dims == 1 else (1, spec.dims)
    fileio.write_csv(
        information_csv,
        INFORMATION_HEADER,
        information_rows(spec.p_hat_grid, spec.i_mode, dims_list=dims_list),
        seed0,
        sweep_hash,
    )
    return SweepOutcome(accuracy_csv, information_csv, rows, failures)
