"""Contrastive objectives built on the multilinear inner product (MIP).

The MIP of M equal-length vectors is the coordinate-wise sum of their
element-wise product, sum_d prod_m v[m][d] -- the natural generalization
of the dot product used to score tuples of modality representations.

Two families of losses are provided, with analytic gradients:

* the classic two-modality contrastive loss (and its pairwise sum over
  all modality pairs), whose logits are temperature-scaled dot products
  with full in-batch denominators;
* the any-M loss, where each modality in turn anchors a batch of one
  positive tuple and in-batch negatives formed either by randomly
  permuting the non-anchor modalities (K = N candidates per row, "on")
  or, for M = 3, by taking all combinations of the two non-anchor
  modalities (K = N^2 candidates per row, "on2").

The "on" construction follows the reference recipe exactly: negatives are
anchor @ (prod of permuted non-anchors).T with the diagonal overwritten by
the positive-tuple MIPs, and permutations are *not* fixed-point-excluded,
so a "negative" can collide with its positive.  The two-modality
directional loss is computed through the same code path, which makes the
M = 2 reduction of the any-M loss bitwise exact.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .nn import row_softmax_cross_entropy
from .rng import substream

STRATEGIES = ("on", "on2")


def mip(vectors: Sequence[np.ndarray]) -> float:
    """Multilinear inner product: sum_d prod_m vectors[m][d]."""
    if len(vectors) < 2:
        raise ValueError("the multilinear inner product needs at least 2 vectors")
    arrs = [np.asarray(v).reshape(-1) for v in vectors]
    size = arrs[0].size
    if any(a.size != size for a in arrs):
        raise ValueError(f"vector lengths disagree: {[a.size for a in arrs]}")
    prod = arrs[0].copy()
    for a in arrs[1:]:
        prod *= a
    return float(prod.sum())


@dataclass(frozen=True)
class LogitsMatrix:
    """Per-anchor score matrix; row i's target column holds sample i's
    positive-tuple MIP (column i for "on", column i*N+i for "on2")."""

    values: np.ndarray  # (N, K)
    targets: np.ndarray  # (N,)
    anchor: str


def _validate_perm(perm: np.ndarray, n: int) -> np.ndarray:
    perm = np.asarray(perm)
    if perm.shape != (n,) or not np.array_equal(np.sort(perm), np.arange(n)):
        raise ValueError("perm is not a permutation of 0..N-1")
    return perm


def _rows_product(mats: Sequence[np.ndarray]) -> np.ndarray:
    prod = mats[0].copy()
    for m in mats[1:]:
        prod *= m
    return prod


def _on_raw(
    anchor: np.ndarray, others: Sequence[np.ndarray], perms: Sequence[np.ndarray]
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Raw (unscaled) O(N) logits plus the cached row products.

    Returns (raw, permuted_product, matched_product) where
    raw[i, j] = <anchor_i, permuted non-anchors at j> off the diagonal and
    raw[i, i] = <anchor_i, matched non-anchors at i>.
    """
    permuted = _rows_product([o[p] for o, p in zip(others, perms)])
    matched = _rows_product(list(others))
    raw = anchor @ permuted.T
    np.fill_diagonal(raw, (anchor * matched).sum(axis=1))
    return raw, permuted, matched


def build_logits_on(
    anchor_idx: int,
    reps: Mapping[str, np.ndarray],
    perms: Sequence[np.ndarray],
    scale: float,
) -> LogitsMatrix:
    """O(N) logits for one anchor: permuted-tuple negatives, matched diagonal.

    ``perms`` holds one permutation per non-anchor modality, in modality
    order.  Identity permutations replicate the collision behaviour of the
    in-batch construction: column j of row i holds the *matched* tuple j.
    """
    names = list(reps)
    anchor_name = names[anchor_idx]
    anchor = reps[anchor_name]
    n = anchor.shape[0]
    others = [reps[m] for m in names if m != anchor_name]
    perms = [_validate_perm(p, n) for p in perms]
    if len(perms) != len(others):
        raise ValueError(f"expected {len(others)} permutations, got {len(perms)}")
    raw, _, _ = _on_raw(anchor, others, perms)
    return LogitsMatrix(scale * raw, np.arange(n), anchor_name)


def build_logits_on2(
    anchor_idx: int, reps: Mapping[str, np.ndarray], scale: float
) -> LogitsMatrix:
    """O(N^2) logits for one anchor (M = 3 only).

    Row i scores every combination of the two non-anchor modalities:
    column j*N + k holds scale * <anchor_i, first_j, second_k>, so the
    positive sits at column i*N + i and each row has N^2 - 1 negatives.
    """
    names = list(reps)
    if len(names) != 3:
        raise ValueError("the exhaustive-negatives strategy is defined for M = 3")
    anchor_name = names[anchor_idx]
    anchor = reps[anchor_name]
    n = anchor.shape[0]
    first, second = (reps[m] for m in names if m != anchor_name)
    raw = anchor @ _pair_grid(first, second).T
    return LogitsMatrix(scale * raw, np.arange(n) * (n + 1), anchor_name)


def _pair_grid(first: np.ndarray, second: np.ndarray) -> np.ndarray:
    """(N^2, D) rows of first_j * second_k, row index j*N + k."""
    n, d = first.shape
    return (first[:, None, :] * second[None, :, :]).reshape(n * n, d)


# ---------------------------------------------------------------------------
# Losses with gradients
# ---------------------------------------------------------------------------


def _anchored_on_loss(
    anchor: np.ndarray,
    others: Sequence[np.ndarray],
    perms: Sequence[np.ndarray],
    scale: float,
) -> tuple[float, np.ndarray, list[np.ndarray], float]:
    """Mean-over-rows CE of the O(N) logits, with gradients.

    Returns (loss, d_anchor, d_others, d_scale).
    """
    n = anchor.shape[0]
    raw, permuted, matched = _on_raw(anchor, others, perms)
    raw *= scale
    losses, g = row_softmax_cross_entropy(raw, np.arange(n), overwrite=True)
    loss = float(losses.mean())
    g /= n

    # d loss / d raw = scale * g; fold the factor into g once.
    g *= scale
    scaled_diag = np.diag(g).copy()
    np.fill_diagonal(g, 0.0)

    d_anchor = g @ permuted + scaled_diag[:, None] * matched
    d_permuted = g.T @ anchor
    d_matched = scaled_diag[:, None] * anchor
    d_others: list[np.ndarray] = []
    for m in range(len(others)):
        perm_rest = [others[j][perms[j]] for j in range(len(others)) if j != m]
        match_rest = [others[j] for j in range(len(others)) if j != m]
        d_o = np.empty_like(others[m])
        d_o[perms[m]] = d_permuted * _rows_product(perm_rest) if perm_rest else d_permuted
        d_o += d_matched * _rows_product(match_rest) if match_rest else d_matched
        d_others.append(d_o)

    # Every logit is linear in its anchor row, so sum(dL/draw * raw) equals
    # sum(d_anchor * anchor) / scale; this avoids keeping an unscaled copy.
    d_scale = float((d_anchor * anchor).sum()) / scale
    return loss, d_anchor, d_others, d_scale


def _anchored_on2_loss(
    anchor: np.ndarray,
    first: np.ndarray,
    second: np.ndarray,
    scale: float,
) -> tuple[float, np.ndarray, np.ndarray, np.ndarray, float]:
    """Mean-over-rows CE of the O(N^2) logits, with gradients."""
    n, d = anchor.shape
    grid = _pair_grid(first, second)
    raw = anchor @ grid.T
    losses, g = row_softmax_cross_entropy(scale * raw, np.arange(n) * (n + 1))
    loss = float(losses.mean())
    g /= n
    d_scale = float((g * raw).sum())
    g *= scale

    d_anchor = g @ grid
    d_grid = (g.T @ anchor).reshape(n, n, d)
    d_first = np.einsum("jkd,kd->jd", d_grid, second)
    d_second = np.einsum("jkd,jd->kd", d_grid, first)
    return loss, d_anchor, d_first, d_second, d_scale


def clip_directional_loss(rx: np.ndarray, ry: np.ndarray, scale: float) -> float:
    """One direction of the two-modality loss: CE of classifying each
    matched pair (x_i, y_i) against all in-batch candidates y_j."""
    identity = np.arange(rx.shape[0])
    loss, _, _, _ = _anchored_on_loss(rx, [ry], [identity], scale)
    return loss


def clip_pair_loss(rx: np.ndarray, ry: np.ndarray, scale: float) -> float:
    """Two-modality contrastive loss: mean of the two directional CE terms,
    each classifying the matched pair against full in-batch candidates."""
    loss, _, _, _ = clip_pair_loss_grads(rx, ry, scale)
    return loss


def clip_pair_loss_grads(
    rx: np.ndarray, ry: np.ndarray, scale: float
) -> tuple[float, np.ndarray, np.ndarray, float]:
    """(loss, d_rx, d_ry, d_scale) for the two-modality loss.

    The two directional terms share one score matrix: the y-anchored
    logits are the transpose of the x-anchored ones.
    """
    if rx.shape != ry.shape or rx.ndim != 2 or rx.shape[0] < 1:
        raise ValueError(f"bad representation shapes {rx.shape}, {ry.shape}")
    n = rx.shape[0]
    raw = rx @ ry.T
    np.fill_diagonal(raw, (rx * ry).sum(axis=1))
    raw_t = np.ascontiguousarray(raw.T)
    raw *= scale
    raw_t *= scale
    targets = np.arange(n)
    losses_xy, g1 = row_softmax_cross_entropy(raw, targets, overwrite=True)
    losses_yx, g2 = row_softmax_cross_entropy(raw_t, targets, overwrite=True)
    loss = 0.5 * float(losses_xy.mean() + losses_yx.mean())

    g1 += g2.T
    g1 *= scale / (2.0 * n)
    d_rx = g1 @ ry
    d_ry = g1.T @ rx
    d_scale = float((d_rx * rx).sum()) / scale
    return loss, d_rx, d_ry, d_scale


def modality_pairs(names: Sequence[str]) -> list[tuple[str, str]]:
    """Unordered modality pairs, in a fixed canonical order."""
    return list(itertools.combinations(names, 2))


def pairwise_clip_loss(
    reps: Mapping[str, np.ndarray], scale: float | Sequence[float]
) -> float:
    """Sum of the two-modality loss over all unordered modality pairs."""
    loss, _, _ = pairwise_clip_loss_grads(reps, scale)
    return loss


def pairwise_clip_loss_grads(
    reps: Mapping[str, np.ndarray], scale: float | Sequence[float]
) -> tuple[float, dict[str, np.ndarray], np.ndarray]:
    """(loss, d_reps, d_scales) for the pairwise sum.

    ``scale`` is either one shared value or one value per pair (pairs in
    ``modality_pairs`` order); ``d_scales`` matches that shape.
    """
    names = list(reps)
    if len(names) < 2:
        raise ValueError("need at least two modalities")
    pairs = modality_pairs(names)
    scales = np.asarray(scale, dtype=np.float64).reshape(-1)
    if scales.size == 1:
        pair_scale = {p: (0, float(scales[0])) for p in pairs}
    elif scales.size == len(pairs):
        pair_scale = {p: (i, float(scales[i])) for i, p in enumerate(pairs)}
    else:
        raise ValueError(f"expected 1 or {len(pairs)} scales, got {scales.size}")

    total = 0.0
    d_reps = {m: np.zeros_like(reps[m]) for m in names}
    d_scales = np.zeros_like(scales)
    for pair in pairs:
        x, y = pair
        idx, s = pair_scale[pair]
        loss, dx, dy, ds = clip_pair_loss_grads(reps[x], reps[y], s)
        total += loss
        d_reps[x] += dx
        d_reps[y] += dy
        d_scales[idx] += ds
    return total, d_reps, d_scales


def draw_anchor_perms(
    seed: int, names: Sequence[str], anchor: str, n: int
) -> list[np.ndarray]:
    """One fresh permutation per non-anchor modality, keyed by the
    (anchor, other) name pair so relabeling modalities relabels draws."""
    return [
        substream(seed, "perm", anchor, other).permutation(n)
        for other in names
        if other != anchor
    ]


def symile_loss(
    reps: Mapping[str, np.ndarray],
    scale: float,
    strategy: str = "on",
    seed: int | None = None,
    perms: Mapping[str, Sequence[np.ndarray]] | None = None,
) -> tuple[float, dict[str, float]]:
    """Anchor-averaged contrastive loss over all modalities.

    Each modality anchors one CE term against its own candidate set; the
    loss is the mean over anchors, and the per-anchor breakdown is also
    returned.  With the "on" strategy, permutations are drawn fresh per
    anchor from name-keyed substreams of ``seed`` unless ``perms``
    supplies them explicitly ({anchor: [perm per non-anchor, in order]}).
    """
    loss, breakdown, _, _ = symile_loss_grads(
        reps, scale, strategy, seed=seed, perms=perms
    )
    return loss, breakdown


def symile_loss_grads(
    reps: Mapping[str, np.ndarray],
    scale: float,
    strategy: str = "on",
    seed: int | None = None,
    perms: Mapping[str, Sequence[np.ndarray]] | None = None,
) -> tuple[float, dict[str, float], dict[str, np.ndarray], float]:
    """(loss, per-anchor breakdown, d_reps, d_scale)."""
    names = list(reps)
    if len(names) < 2:
        raise ValueError("need at least two modalities")
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}")
    if strategy == "on2" and len(names) != 3:
        raise ValueError("strategy 'on2' is only defined for M = 3")
    n = next(iter(reps.values())).shape[0]
    shapes = {m: reps[m].shape for m in names}
    if len(set(shapes.values())) != 1:
        raise ValueError(f"representations disagree on shape: {shapes}")

    breakdown: dict[str, float] = {}
    d_reps = {m: np.zeros_like(reps[m]) for m in names}
    d_scale = 0.0
    for anchor in names:
        others = [m for m in names if m != anchor]
        if strategy == "on":
            if perms is not None:
                anchor_perms = [_validate_perm(p, n) for p in perms[anchor]]
            elif seed is not None:
                anchor_perms = draw_anchor_perms(seed, names, anchor, n)
            else:
                raise ValueError("strategy 'on' needs either a seed or perms")
            loss, d_anchor, d_others, ds = _anchored_on_loss(
                reps[anchor], [reps[m] for m in others], anchor_perms, scale
            )
        else:
            loss, d_anchor, d_first, d_second, ds = _anchored_on2_loss(
                reps[anchor], reps[others[0]], reps[others[1]], scale
            )
            d_others = [d_first, d_second]
        breakdown[anchor] = loss
        d_reps[anchor] += d_anchor
        for m, d_o in zip(others, d_others):
            d_reps[m] += d_o
        d_scale += ds

    m_count = len(names)
    loss = sum(breakdown.values()) / m_count
    for m in names:
        d_reps[m] /= m_count
    return loss, breakdown, d_reps, d_scale / m_count
