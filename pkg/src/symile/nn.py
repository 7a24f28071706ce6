"""Minimal numeric core: affine encoders, stable softmax cross-entropy,
decoupled-weight-decay Adam, and a central-difference gradient checker.

Gradients elsewhere in the library are hand-derived for the fixed
architecture (affine -> optional row normalization -> multilinear scoring
-> softmax cross-entropy); this module supplies the reusable pieces and
the finite-difference oracle used to validate them.  Everything is pure:
update functions return fresh arrays.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .errors import DegenerateInputError, NonFiniteError


@dataclass
class AffineEncoder:
    """r = W x + b, optionally projected to the unit sphere."""

    W: np.ndarray  # (d_out, d_in)
    b: np.ndarray  # (d_out,)
    normalize: bool = True

    def __post_init__(self) -> None:
        if self.W.ndim != 2 or self.b.shape != (self.W.shape[0],):
            raise ValueError(f"inconsistent shapes W{self.W.shape}, b{self.b.shape}")
        if not (np.all(np.isfinite(self.W)) and np.all(np.isfinite(self.b))):
            raise ValueError("encoder parameters must be finite")

    @property
    def d_in(self) -> int:
        return self.W.shape[1]

    @property
    def d_out(self) -> int:
        return self.W.shape[0]


def normalize_rows(z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Project rows onto the unit sphere; returns (r, norms)."""
    norms = np.linalg.norm(z, axis=-1, keepdims=True)
    if np.any(norms == 0.0):
        raise DegenerateInputError("cannot normalize a zero vector")
    return z / norms, norms


def normalize_rows_backward(
    r: np.ndarray, norms: np.ndarray, grad_r: np.ndarray
) -> np.ndarray:
    """Exact Jacobian of z -> z/||z||: (I - r r^T)/||z|| applied row-wise."""
    inner = (r * grad_r).sum(axis=-1, keepdims=True)
    return (grad_r - r * inner) / norms


def affine_forward(encoder: AffineEncoder, x: np.ndarray) -> np.ndarray:
    """Encode one vector or a batch of row vectors."""
    x = np.asarray(x)
    if x.shape[-1] != encoder.d_in:
        raise ValueError(f"input dim {x.shape[-1]} != encoder d_in {encoder.d_in}")
    z = x @ encoder.W.T + encoder.b
    if encoder.normalize:
        z, _ = normalize_rows(z)
    return z


# ---------------------------------------------------------------------------
# Softmax cross-entropy
# ---------------------------------------------------------------------------


def softmax_cross_entropy(logits: np.ndarray, target: int) -> tuple[float, np.ndarray]:
    """(-log softmax(logits)[target], softmax(logits) - onehot(target)).

    Max-subtraction makes the computation immune to large logits; the loss
    is invariant to adding a constant to all logits.
    """
    logits = np.asarray(logits, dtype=np.float64).reshape(-1)
    if not np.all(np.isfinite(logits)):
        raise NonFiniteError("logits must be finite")
    if not 0 <= target < logits.size:
        raise ValueError(f"target {target} out of range for {logits.size} logits")
    shifted = logits - logits.max()
    e = np.exp(shifted)
    p = e / e.sum()
    loss = float(np.log(e.sum()) - shifted[target])
    grad = p.copy()
    grad[target] -= 1.0
    return loss, grad


def row_softmax_cross_entropy(
    logits: np.ndarray, targets: np.ndarray, overwrite: bool = False
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized per-row CE and gradient for a (N, K) logit matrix.

    With ``overwrite`` the input buffer is consumed for the gradient,
    avoiding a temporary the size of the logits.
    """
    if not np.all(np.isfinite(logits)):
        raise NonFiniteError("logits must be finite")
    rows = np.arange(logits.shape[0])
    maxes = logits.max(axis=1, keepdims=True)
    target_shifted = logits[rows, targets] - maxes[:, 0]
    p = np.subtract(logits, maxes, out=logits if overwrite else None)
    np.exp(p, out=p)
    sums = p.sum(axis=1, keepdims=True)
    losses = np.log(sums[:, 0]) - target_shifted
    p /= sums
    p[rows, targets] -= 1.0
    return losses, p


# ---------------------------------------------------------------------------
# AdamW
# ---------------------------------------------------------------------------


@dataclass
class OptimizerState:
    """Adam moments plus hyperparameters, one slot per parameter array.

    ``decay`` flags which parameters receive the decoupled weight-decay
    term; the loss-scale (temperature) parameter is conventionally exempt.
    """

    lr: float
    weight_decay: float = 0.0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: list[np.ndarray] = field(default_factory=list)
    v: list[np.ndarray] = field(default_factory=list)
    decay: list[bool] = field(default_factory=list)


def init_optimizer(
    params: Sequence[np.ndarray],
    lr: float,
    weight_decay: float = 0.0,
    decay: Sequence[bool] | None = None,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> OptimizerState:
    if lr <= 0.0:
        raise ValueError(f"lr must be positive, got {lr}")
    flags = list(decay) if decay is not None else [True] * len(params)
    if len(flags) != len(params):
        raise ValueError("decay flags must match parameter count")
    return OptimizerState(
        lr=lr,
        weight_decay=weight_decay,
        beta1=beta1,
        beta2=beta2,
        eps=eps,
        m=[np.zeros_like(p) for p in params],
        v=[np.zeros_like(p) for p in params],
        decay=flags,
    )


def adamw_step(
    state: OptimizerState,
    params: Sequence[np.ndarray],
    grads: Sequence[np.ndarray],
) -> tuple[list[np.ndarray], OptimizerState]:
    """One bias-corrected Adam update with decoupled weight decay.

    Weight decay is applied as theta <- theta - lr * wd * theta,
    independent of the adaptive term, only where ``state.decay`` is set.
    """
    if len(params) != len(state.m) or len(grads) != len(params):
        raise ValueError("parameter/gradient/state lengths disagree")
    for p, g in zip(params, grads):
        if p.shape != g.shape:
            raise ValueError(f"shape mismatch: param {p.shape} vs grad {g.shape}")
    step = state.step + 1
    bias1 = 1.0 - state.beta1**step
    bias2 = 1.0 - state.beta2**step
    new_params: list[np.ndarray] = []
    new_m: list[np.ndarray] = []
    new_v: list[np.ndarray] = []
    for p, g, m, v, decayed in zip(params, grads, state.m, state.v, state.decay):
        m = state.beta1 * m + (1.0 - state.beta1) * g
        v = state.beta2 * v + (1.0 - state.beta2) * (g * g)
        update = (m / bias1) / (np.sqrt(v / bias2) + state.eps)
        if decayed and state.weight_decay != 0.0:
            update = update + state.weight_decay * p
        new_params.append(p - state.lr * update)
        new_m.append(m)
        new_v.append(v)
    return new_params, replace(state, step=step, m=new_m, v=new_v)


# ---------------------------------------------------------------------------
# Finite differences and gradient checking
# ---------------------------------------------------------------------------


def finite_diff_grad(
    loss_fn: Callable[[Sequence[np.ndarray]], float],
    params: Sequence[np.ndarray],
    eps: float = 1e-5,
) -> list[np.ndarray]:
    """Central-difference gradient estimate, one coordinate at a time."""
    if eps <= 0.0:
        raise ValueError(f"eps must be positive, got {eps}")
    grads = []
    work = [p.astype(np.float64).copy() for p in params]
    for k, p in enumerate(work):
        g = np.zeros_like(p)
        flat_p = p.reshape(-1)
        flat_g = g.reshape(-1)
        for i in range(flat_p.size):
            orig = flat_p[i]
            flat_p[i] = orig + eps
            hi = loss_fn(work)
            flat_p[i] = orig - eps
            lo = loss_fn(work)
            flat_p[i] = orig
            if not (np.isfinite(hi) and np.isfinite(lo)):
                raise NonFiniteError("loss is not finite at a probe point")
            flat_g[i] = (hi - lo) / (2.0 * eps)
        grads.append(g)
    return grads


@dataclass(frozen=True)
class GradCheckReport:
    """Max relative error per parameter; passes iff all are below tol."""

    labels: tuple[str, ...]
    max_rel_errors: tuple[float, ...]
    tolerance: float

    @property
    def max_rel_error(self) -> float:
        return max(self.max_rel_errors, default=0.0)

    @property
    def passed(self) -> bool:
        return self.max_rel_error < self.tolerance


def compare_gradients(
    analytic: Sequence[np.ndarray],
    numeric: Sequence[np.ndarray],
    labels: Sequence[str] | None = None,
    tolerance: float = 1e-4,
) -> GradCheckReport:
    """Relative error with denominator max(|analytic|, |numeric|, 1e-8)."""
    if labels is None:
        labels = [f"param{i}" for i in range(len(analytic))]
    errors = []
    for a, n in zip(analytic, numeric, strict=True):
        denom = np.maximum(np.maximum(np.abs(a), np.abs(n)), 1e-8)
        errors.append(float(np.max(np.abs(a - n) / denom)) if a.size else 0.0)
    return GradCheckReport(tuple(labels), tuple(errors), tolerance)
