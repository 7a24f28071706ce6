"""Full-model forward/backward: per-modality affine encoders feeding a
contrastive objective, with hand-derived gradients for every parameter.

The parameter layout is fixed so the optimizer and the finite-difference
checker can treat the model as a flat list of arrays:
``[W_m1, b_m1, W_m2, b_m2, ..., log_scale]`` in modality order, with the
log-scale (temperature) vector last and exempt from weight decay.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .nn import AffineEncoder, normalize_rows, normalize_rows_backward
from .objectives import (
    modality_pairs,
    pairwise_clip_loss_grads,
    symile_loss_grads,
)
from .rng import substream

OBJECTIVES = ("symile", "pairwise_clip")


@dataclass
class ModelParams:
    """One affine encoder per modality plus trainable log-scale(s).

    The score multiplier is ``exp(log_scale)``, guaranteeing positivity.
    ``log_scale`` has one entry when shared, or one per modality pair for
    the pairwise objective with per-pair temperatures.
    """

    encoders: dict[str, AffineEncoder]
    log_scale: np.ndarray

    def __post_init__(self) -> None:
        self.log_scale = np.atleast_1d(np.asarray(self.log_scale, dtype=np.float64))
        d_outs = {e.d_out for e in self.encoders.values()}
        if len(d_outs) != 1:
            raise ValueError(f"encoders disagree on output dim: {d_outs}")
        n_pairs = len(modality_pairs(list(self.encoders)))
        if self.log_scale.size not in (1, n_pairs):
            raise ValueError(
                f"log_scale must have 1 or {n_pairs} entries, got {self.log_scale.size}"
            )

    @property
    def names(self) -> list[str]:
        return list(self.encoders)

    def scales(self) -> np.ndarray:
        return np.exp(self.log_scale)


def init_params(
    input_dims: Mapping[str, int],
    d_out: int,
    seed: int,
    normalize: bool = True,
    t_init: float = -0.3,
    per_pair_temperature: bool = False,
    dtype: np.dtype = np.float64,
) -> ModelParams:
    """Seeded initialization: W and b entries iid uniform on +-1/sqrt(d_in).

    The bias is drawn (not zeroed) so that the all-zeros input, a valid
    binary data point, never lands exactly on the origin where the
    unit-norm projection is undefined.
    """
    encoders: dict[str, AffineEncoder] = {}
    for name, d_in in input_dims.items():
        rng = substream(seed, "init", name)
        bound = 1.0 / np.sqrt(d_in)
        w = rng.uniform(-bound, bound, size=(d_out, d_in)).astype(dtype)
        b = rng.uniform(-bound, bound, size=d_out).astype(dtype)
        encoders[name] = AffineEncoder(w, b, normalize)
    n_scales = len(modality_pairs(list(input_dims))) if per_pair_temperature else 1
    return ModelParams(encoders, np.full(n_scales, t_init, dtype=np.float64))


def flatten_params(params: ModelParams) -> tuple[list[np.ndarray], list[bool], list[str]]:
    """(arrays, weight-decay flags, labels) in the fixed layout."""
    arrays: list[np.ndarray] = []
    decay: list[bool] = []
    labels: list[str] = []
    for name, enc in params.encoders.items():
        arrays.extend([enc.W, enc.b])
        decay.extend([True, True])
        labels.extend([f"W[{name}]", f"b[{name}]"])
    arrays.append(params.log_scale)
    decay.append(False)
    labels.append("log_scale")
    return arrays, decay, labels


def unflatten_params(template: ModelParams, arrays: Sequence[np.ndarray]) -> ModelParams:
    encoders: dict[str, AffineEncoder] = {}
    it = iter(arrays)
    for name, enc in template.encoders.items():
        encoders[name] = AffineEncoder(next(it), next(it), enc.normalize)
    return ModelParams(encoders, next(it))


def encode_batch(
    params: ModelParams, inputs: Mapping[str, np.ndarray]
) -> dict[str, np.ndarray]:
    """Representations for a batch of per-modality input rows."""
    reps: dict[str, np.ndarray] = {}
    for name, enc in params.encoders.items():
        x = inputs[name]
        z = x @ enc.W.T + enc.b
        if enc.normalize:
            z, _ = normalize_rows(z)
        reps[name] = z
    return reps


def loss_and_grads(
    params: ModelParams,
    inputs: Mapping[str, np.ndarray],
    objective: str,
    strategy: str = "on",
    seed: int | None = None,
    perms: Mapping[str, Sequence[np.ndarray]] | None = None,
) -> tuple[float, dict[str, float], list[np.ndarray]]:
    """(loss, per-term breakdown, gradients in ``flatten_params`` order)."""
    if objective not in OBJECTIVES:
        raise ValueError(f"unknown objective {objective!r}")
    names = params.names
    if set(inputs) != set(names):
        raise ValueError(f"inputs {sorted(inputs)} do not match modalities {names}")

    pre: dict[str, np.ndarray] = {}
    norms: dict[str, np.ndarray] = {}
    reps: dict[str, np.ndarray] = {}
    for name in names:
        enc = params.encoders[name]
        x = inputs[name]
        if x.shape[1] != enc.d_in:
            raise ValueError(
                f"modality {name!r}: input dim {x.shape[1]} != encoder d_in {enc.d_in}"
            )
        z = x @ enc.W.T + enc.b
        if enc.normalize:
            r, nrm = normalize_rows(z)
            pre[name], norms[name], reps[name] = z, nrm, r
        else:
            reps[name] = z

    scales = params.scales()
    if objective == "symile":
        if scales.size != 1:
            raise ValueError("the anchor-averaged objective uses a single scale")
        loss, breakdown, d_reps, d_scale = symile_loss_grads(
            reps, float(scales[0]), strategy, seed=seed, perms=perms
        )
        d_scales = np.array([d_scale])
    else:
        loss, d_reps, d_scales = pairwise_clip_loss_grads(
            reps, scales if scales.size > 1 else float(scales[0])
        )
        breakdown = {"pairwise_clip": loss}

    grads: list[np.ndarray] = []
    for name in names:
        enc = params.encoders[name]
        d_r = d_reps[name]
        d_z = (
            normalize_rows_backward(reps[name], norms[name], d_r)
            if enc.normalize
            else d_r
        )
        grads.extend([d_z.T @ inputs[name], d_z.sum(axis=0)])
    if scales.size == d_scales.size:
        grads.append(d_scales * scales)  # d loss / d log_scale
    else:
        raise AssertionError("scale gradient shape mismatch")
    return loss, breakdown, grads
