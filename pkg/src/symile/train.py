"""Training loop with per-epoch validation-loss checkpointing.

A run is fully determined by its config: data order, parameter init,
in-batch permutations and the optimizer trajectory all come from named
substreams of ``config.seed``.  Checkpoints are taken at the end of every
epoch and the one with the lowest validation loss is returned.
"""

from __future__ import annotations

import copy
import json
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np

from . import fileio
from .data import Dataset, SplitSpec, encoder_inputs
from .errors import DivergenceError, NonFiniteError, SchemaError
from .model import (
    ModelParams,
    OBJECTIVES,
    flatten_params,
    init_params,
    loss_and_grads,
    unflatten_params,
)
from .nn import AffineEncoder, OptimizerState, adamw_step, init_optimizer
from .objectives import STRATEGIES
from .rng import derive_seed, substream


@dataclass
class TrainConfig:
    """Hyperparameters of one training run (defaults: the 5-dim benchmark)."""

    objective: str = "symile"
    strategy: str = "on"
    epochs: int = 100
    batch_size: int = 1000
    lr: float = 0.1
    weight_decay: float = 0.01
    t_init: float = -0.3
    d_out: int = 16
    normalize: bool = True
    seed: int = 0
    split: SplitSpec = field(default_factory=SplitSpec)
    p_missing: float = 0.0
    per_pair_temperature: bool = False
    dtype: str = "float32"

    def __post_init__(self) -> None:
        if isinstance(self.split, dict):
            self.split = SplitSpec(**self.split)
        if self.objective not in OBJECTIVES:
            raise SchemaError(f"unknown objective {self.objective!r}")
        if self.strategy not in STRATEGIES:
            raise SchemaError(f"unknown strategy {self.strategy!r}")
        if self.epochs < 1:
            raise SchemaError("epochs must be >= 1")
        if self.batch_size < 2:
            raise SchemaError("batch_size must be >= 2 for contrastive losses")
        if self.lr <= 0.0:
            raise SchemaError("lr must be positive")
        if not 0.0 <= self.p_missing < 1.0:
            raise SchemaError("p_missing must lie in [0, 1)")
        if self.dtype not in ("float32", "float64"):
            raise SchemaError(f"unsupported dtype {self.dtype!r}")

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    def hash(self) -> str:
        return fileio.config_hash(self.to_dict())


@dataclass
class Checkpoint:
    """Model snapshot selected by lowest validation loss."""

    params: ModelParams
    epoch: int
    val_loss: float
    config_hash: str
    seed: int
    optimizer: OptimizerState | None = None


@dataclass
class TrainResult:
    checkpoint: Checkpoint
    history: list[dict[str, float]]  # per-epoch train/val losses
    final_params: ModelParams


def _batched_loss(
    params: ModelParams,
    inputs: dict[str, np.ndarray],
    cfg: TrainConfig,
    seed: int,
) -> float:
    """Mean loss over consecutive full batches (trailing batch < 2 dropped)."""
    n = next(iter(inputs.values())).shape[0]
    losses = []
    for bi, start in enumerate(range(0, n, cfg.batch_size)):
        stop = min(start + cfg.batch_size, n)
        if stop - start < 2:
            break
        batch = {m: x[start:stop] for m, x in inputs.items()}
        loss, _, _ = loss_and_grads(
            params,
            batch,
            cfg.objective,
            cfg.strategy,
            seed=derive_seed(seed, "batch", bi),
        )
        losses.append(loss)
    if not losses:
        raise ValueError("no evaluable batch of size >= 2")
    return float(np.mean(losses))


def train(cfg: TrainConfig, train_ds: Dataset, val_ds: Dataset) -> TrainResult:
    """Run the epoch loop and return the lowest-validation-loss checkpoint.

    Each epoch visits seeded-shuffled minibatches in order (a trailing
    batch smaller than 2 is dropped), applies decoupled-weight-decay Adam
    updates, then scores the validation split.
    """
    dtype = np.dtype(cfg.dtype)
    train_inputs = {
        m: x.astype(dtype) for m, x in encoder_inputs(train_ds).items()
    }
    val_inputs = {m: x.astype(dtype) for m, x in encoder_inputs(val_ds).items()}
    dims = {m: x.shape[1] for m, x in train_inputs.items()}

    params = init_params(
        dims,
        cfg.d_out,
        cfg.seed,
        normalize=cfg.normalize,
        t_init=cfg.t_init,
        per_pair_temperature=cfg.per_pair_temperature and cfg.objective == "pairwise_clip",
        dtype=dtype,
    )
    arrays, decay, _ = flatten_params(params)
    opt = init_optimizer(arrays, cfg.lr, cfg.weight_decay, decay)

    cfg_hash = cfg.hash()
    n = train_ds.n
    if n < 2:
        raise ValueError("training requires at least 2 samples per batch")
    best: Checkpoint | None = None
    history: list[dict[str, float]] = []
    for epoch in range(cfg.epochs):
        order = substream(cfg.seed, "shuffle", epoch).permutation(n)
        epoch_losses = []
        for bi, start in enumerate(range(0, n, cfg.batch_size)):
            idx = order[start : start + cfg.batch_size]
            if idx.size < 2:
                break
            batch = {m: x[idx] for m, x in train_inputs.items()}
            try:
                loss, _, grads = loss_and_grads(
                    params,
                    batch,
                    cfg.objective,
                    cfg.strategy,
                    seed=derive_seed(cfg.seed, "negatives", epoch, bi),
                )
            except NonFiniteError as exc:
                raise DivergenceError(
                    f"diverged at epoch {epoch}, batch {bi}: {exc}"
                ) from exc
            if not np.isfinite(loss):
                raise DivergenceError(
                    f"non-finite loss {loss!r} at epoch {epoch}, batch {bi}"
                )
            arrays, opt = adamw_step(opt, arrays, grads)
            params = unflatten_params(params, arrays)
            epoch_losses.append(loss)

        try:
            val_loss = _batched_loss(
                params, val_inputs, cfg, derive_seed(cfg.seed, "val", epoch)
            )
        except NonFiniteError as exc:
            raise DivergenceError(f"diverged at epoch {epoch} validation: {exc}") from exc
        if not np.isfinite(val_loss):
            raise DivergenceError(f"non-finite validation loss at epoch {epoch}")
        history.append(
            {
                "epoch": float(epoch),
                "train_loss": float(np.mean(epoch_losses)),
                "val_loss": val_loss,
            }
        )
        if best is None or val_loss < best.val_loss:
            best = Checkpoint(
                params=copy.deepcopy(params),
                epoch=epoch,
                val_loss=val_loss,
                config_hash=cfg_hash,
                seed=cfg.seed,
                optimizer=copy.deepcopy(opt),
            )
    assert best is not None
    return TrainResult(checkpoint=best, history=history, final_params=params)


# ---------------------------------------------------------------------------
# Checkpoint files (JSON; arrays as decimal lists, exact round-trip)
# ---------------------------------------------------------------------------


def save_checkpoint(path: str, ckpt: Checkpoint) -> None:
    doc: dict[str, Any] = {
        "kind": "checkpoint",
        "schema_version": fileio.SCHEMA_VERSION,
        "config_hash": ckpt.config_hash,
        "seed": ckpt.seed,
        "epoch": ckpt.epoch,
        "val_loss": ckpt.val_loss,
        "log_scale": fileio.array_to_json(ckpt.params.log_scale),
        "encoders": {
            name: {
                "W": fileio.array_to_json(enc.W),
                "b": fileio.array_to_json(enc.b),
                "normalize": enc.normalize,
            }
            for name, enc in ckpt.params.encoders.items()
        },
    }
    if ckpt.optimizer is not None:
        opt = ckpt.optimizer
        doc["optimizer"] = {
            "lr": opt.lr,
            "weight_decay": opt.weight_decay,
            "beta1": opt.beta1,
            "beta2": opt.beta2,
            "eps": opt.eps,
            "step": opt.step,
            "m": [fileio.array_to_json(a) for a in opt.m],
            "v": [fileio.array_to_json(a) for a in opt.v],
            "decay": opt.decay,
        }
    with open(path, "w", newline="\n") as f:
        f.write(fileio.provenance_line(ckpt.seed, ckpt.config_hash) + "\n")
        f.write(fileio.canonical_json(doc) + "\n")


def load_checkpoint(path: str) -> Checkpoint:
    with open(path) as f:
        f.readline()  # provenance
        doc = json.loads(f.readline())
    if doc.get("kind") != "checkpoint":
        raise SchemaError(f"{path} is not a checkpoint file")
    encoders = {
        name: AffineEncoder(
            fileio.array_from_json(spec["W"]),
            fileio.array_from_json(spec["b"]),
            spec["normalize"],
        )
        for name, spec in doc["encoders"].items()
    }
    params = ModelParams(encoders, fileio.array_from_json(doc["log_scale"]))
    optimizer = None
    if "optimizer" in doc:
        o = doc["optimizer"]
        optimizer = OptimizerState(
            lr=o["lr"],
            weight_decay=o["weight_decay"],
            beta1=o["beta1"],
            beta2=o["beta2"],
            eps=o["eps"],
            step=o["step"],
            m=[fileio.array_from_json(a) for a in o["m"]],
            v=[fileio.array_from_json(a) for a in o["v"]],
            decay=list(o["decay"]),
        )
    return Checkpoint(
        params=params,
        epoch=doc["epoch"],
        val_loss=doc["val_loss"],
        config_hash=doc["config_hash"],
        seed=doc["seed"],
        optimizer=optimizer,
    )
