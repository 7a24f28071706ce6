"""Exact information quantities on enumerable discrete joint distributions.

This module is the ground-truth side of the library: joint distributions
over a handful of named finite variables are stored as explicit
probability tables, so entropies, mutual information, conditional mutual
information and total correlation are computed by exact summation rather
than estimation.  It also provides the optimal scoring function for a
table (the log density ratio of the joint to the product of group
marginals) and a Monte-Carlo evaluator of the multi-sample contrastive
lower bound on total correlation that the training objective optimizes.

Conventions
-----------
* All information quantities are in nats.
* States are flat indices in mixed-radix *little-endian* order: the first
  variable varies fastest.  This fixes the layout of every dump.
* ``0 * log 0 == 0``; states with zero joint mass get a ``-inf`` score
  from the optimal scorer and contribute nothing to bound estimates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import CapacityError
from .rng import substream

MAX_TABLE_VARS = 15  # 2**15 states; enough for three 5-dim binary blocks

_PROB_SUM_TOL = 1e-12


def _as_tuple(names: Iterable[str]) -> tuple[str, ...]:
    out = tuple(names)
    if len(out) != len(set(out)):
        raise ValueError(f"duplicate variable names: {out}")
    return out


@dataclass(frozen=True)
class JointTable:
    """Exact finite-support joint distribution over named variables.

    ``probs[s]`` is the probability of the state with flat index
    ``s = sum_v value_v * stride_v`` where ``stride_0 = 1`` and
    ``stride_v = stride_{v-1} * arity_{v-1}`` (first variable fastest).
    """

    var_names: tuple[str, ...]
    arities: tuple[int, ...]
    probs: np.ndarray

    def __post_init__(self) -> None:
        names = _as_tuple(self.var_names)
        object.__setattr__(self, "var_names", names)
        arities = tuple(int(a) for a in self.arities)
        if len(arities) != len(names) or any(a < 1 for a in arities):
            raise ValueError("arities must be positive and match var_names")
        object.__setattr__(self, "arities", arities)
        probs = np.asarray(self.probs, dtype=np.float64).reshape(-1).copy()
        if probs.size != math.prod(arities):
            raise ValueError(
                f"expected {math.prod(arities)} probabilities, got {probs.size}"
            )
        if np.any(probs < 0.0) or not np.all(np.isfinite(probs)):
            raise ValueError("probabilities must be finite and non-negative")
        if abs(probs.sum() - 1.0) > _PROB_SUM_TOL:
            raise ValueError(f"probabilities sum to {probs.sum()!r}, not 1")
        probs.flags.writeable = False
        object.__setattr__(self, "probs", probs)
        strides = []
        acc = 1
        for a in arities:
            strides.append(acc)
            acc *= a
        object.__setattr__(self, "_strides", tuple(strides))
        object.__setattr__(self, "_entropy_cache", {})

    @property
    def n_states(self) -> int:
        return self.probs.size

    def stride(self, name: str) -> int:
        return self._strides[self._index(name)]

    def _index(self, name: str) -> int:
        try:
            return self.var_names.index(name)
        except ValueError:
            raise KeyError(f"unknown variable {name!r}") from None

    def values(self, name: str, states: np.ndarray | None = None) -> np.ndarray:
        """Values taken by ``name`` at the given (default: all) states."""
        if states is None:
            states = np.arange(self.n_states)
        i = self._index(name)
        stride, arity = self._strides[i], self.arities[i]
        if stride & (stride - 1) == 0 and arity & (arity - 1) == 0:
            return (states >> (stride.bit_length() - 1)) & (arity - 1)
        return (states // stride) % arity

    def state_index(self, assignment: dict[str, int]) -> int:
        """Flat index of a full assignment ``{name: value}``."""
        if set(assignment) != set(self.var_names):
            raise ValueError("assignment must cover every variable exactly once")
        s = 0
        for name, value in assignment.items():
            i = self._index(name)
            if not 0 <= value < self.arities[i]:
                raise ValueError(f"value {value} out of range for {name!r}")
            s += value * self.stride(name)
        return s


def _check_subset(table: JointTable, names: Sequence[str], label: str) -> tuple[str, ...]:
    names = _as_tuple(names)
    if not names:
        raise ValueError(f"{label} must be a nonempty variable subset")
    for n in names:
        table._index(n)
    return names


def _subset_states(table: JointTable, names: Sequence[str]) -> np.ndarray:
    """Map every full state to its sub-state index over ``names`` (given order)."""
    states = np.arange(table.n_states)
    out = np.zeros(table.n_states, dtype=np.int64)
    stride = 1
    for name in names:
        out += table.values(name, states) * stride
        stride *= table.arities[table._index(name)]
    return out


def marginal(table: JointTable, names: Sequence[str]) -> JointTable:
    """Marginal distribution over ``names``, encoded in the order given."""
    names = _check_subset(table, names, "names")
    arities = tuple(table.arities[table._index(n)] for n in names)
    size = math.prod(arities)
    probs = np.bincount(_subset_states(table, names), weights=table.probs, minlength=size)
    return JointTable(names, arities, probs)


# ---------------------------------------------------------------------------
# Information quantities (exact, in nats)
# ---------------------------------------------------------------------------


def _entropy_of_probs(probs: np.ndarray) -> float:
    p = probs[probs > 0.0]
    return float(-(p * np.log(p)).sum())


def entropy(table: JointTable, names: Sequence[str]) -> float:
    """Shannon entropy of the marginal over ``names``, in nats."""
    names = _check_subset(table, names, "names")
    key = frozenset(names)  # order-independent; tables are immutable
    cache = table._entropy_cache
    if key not in cache:
        cache[key] = _entropy_of_probs(marginal(table, names).probs)
    return cache[key]


def _check_disjoint(groups: Sequence[Sequence[str]]) -> None:
    seen: set[str] = set()
    for g in groups:
        overlap = seen.intersection(g)
        if overlap:
            raise ValueError(f"variable groups overlap on {sorted(overlap)}")
        seen.update(g)


def mutual_information(table: JointTable, x: Sequence[str], y: Sequence[str]) -> float:
    """I(X;Y) = H(X) + H(Y) - H(X,Y), exact."""
    x = _check_subset(table, x, "x")
    y = _check_subset(table, y, "y")
    _check_disjoint([x, y])
    return entropy(table, x) + entropy(table, y) - entropy(table, tuple(x) + tuple(y))


def conditional_mi(
    table: JointTable,
    x: Sequence[str],
    y: Sequence[str],
    z: Sequence[str] = (),
) -> float:
    """I(X;Y|Z) = H(X,Z) + H(Y,Z) - H(X,Y,Z) - H(Z); empty Z gives I(X;Y)."""
    x = _check_subset(table, x, "x")
    y = _check_subset(table, y, "y")
    z = _as_tuple(z)
    _check_disjoint([x, y, z])
    if not z:
        return mutual_information(table, x, y)
    hz = entropy(table, z)
    return (
        entropy(table, tuple(x) + z)
        + entropy(table, tuple(y) + z)
        - entropy(table, tuple(x) + tuple(y) + z)
        - hz
    )


def total_correlation(table: JointTable, groups: Sequence[Sequence[str]]) -> float:
    """TC(G_1,...,G_M) = sum_m H(G_m) - H(G_1,...,G_M), exact.

    Equals the KL divergence from the joint over all listed variables to
    the product of the group marginals.
    """
    groups = [_check_subset(table, g, "group") for g in groups]
    if len(groups) < 2:
        raise ValueError("total correlation needs at least two groups")
    _check_disjoint(groups)
    union: tuple[str, ...] = ()
    for g in groups:
        union += tuple(g)
    return sum(entropy(table, g) for g in groups) - entropy(table, union)


@dataclass(frozen=True)
class InfoReport:
    """One computed information quantity, for tabulation."""

    kind: str  # entropy | mi | cmi | tc
    groups: tuple[tuple[str, ...], ...]
    value_nats: float


# ---------------------------------------------------------------------------
# Table constructors
# ---------------------------------------------------------------------------


def build_xor1d_table() -> JointTable:
    """Joint over (a, b, c): a, b fair bits, c = a XOR b.

    Mass 1/4 on each of the four states with c == a ^ b, zero elsewhere.
    """
    states = np.arange(8)
    a, b, c = states & 1, (states >> 1) & 1, (states >> 2) & 1
    probs = np.where(c == (a ^ b), 0.25, 0.0)
    return JointTable(("a", "b", "c"), (2, 2, 2), probs)


def synth_var_names(dims: int) -> tuple[tuple[str, ...], tuple[str, ...], tuple[str, ...]]:
    """Variable names of the mixture table's three blocks, per dimension."""
    if dims == 1:
        return ("a",), ("b",), ("c",)
    return (
        tuple(f"a{j + 1}" for j in range(dims)),
        tuple(f"b{j + 1}" for j in range(dims)),
        tuple(f"c{j + 1}" for j in range(dims)),
    )


def build_synth_table(p_hat: float, dims: int = 1, i_mode: str = "shared") -> JointTable:
    """Exact joint of the XOR/copy mixture over three d-dim binary blocks.

    Per coordinate j: a_j, b_j are fair bits and c_j = a_j XOR b_j when the
    hidden switch i is 1, else c_j = a_j, with i ~ Bernoulli(p_hat).  In
    ``shared`` mode a single switch covers all coordinates of a sample; in
    ``per_coordinate`` mode each coordinate draws its own.
    """
    if not 0.0 <= p_hat <= 1.0:
        raise ValueError(f"p_hat must lie in [0, 1], got {p_hat}")
    if dims < 1:
        raise ValueError(f"dims must be >= 1, got {dims}")
    if 3 * dims > MAX_TABLE_VARS:
        raise CapacityError(
            f"{3 * dims} variables exceed the {MAX_TABLE_VARS}-variable table limit"
        )
    if i_mode not in ("shared", "per_coordinate"):
        raise ValueError(f"unknown i_mode {i_mode!r}")

    a_names, b_names, c_names = synth_var_names(dims)
    names = a_names + b_names + c_names
    states = np.arange(2 ** (3 * dims))
    # Little-endian blocks: a occupies bits [0, d), b bits [d, 2d), c bits [2d, 3d).
    a = (states[:, None] >> np.arange(dims)) & 1
    b = (states[:, None] >> (dims + np.arange(dims))) & 1
    c = (states[:, None] >> (2 * dims + np.arange(dims))) & 1

    xor_match = c == (a ^ b)
    copy_match = c == a
    base = 0.25**dims
    if i_mode == "shared":
        probs = base * (
            p_hat * xor_match.all(axis=1) + (1.0 - p_hat) * copy_match.all(axis=1)
        )
    else:
        probs = base * np.prod(
            p_hat * xor_match + (1.0 - p_hat) * copy_match, axis=1
        )
    return JointTable(names, (2,) * (3 * dims), probs)


# ---------------------------------------------------------------------------
# Scoring functions and the contrastive lower bound
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TabularScorer:
    """A score g(state) per joint state, aligned with a table's indexing.

    ``-inf`` marks states with zero joint mass; such states are never drawn
    as positives and contribute zero weight to softmax denominators.
    """

    scores: np.ndarray
    groups: tuple[tuple[str, ...], ...] | None = None

    def __post_init__(self) -> None:
        scores = np.asarray(self.scores, dtype=np.float64).reshape(-1).copy()
        if np.any(np.isnan(scores)) or np.any(scores == np.inf):
            raise ValueError("scores must be finite or -inf")
        scores.flags.writeable = False
        object.__setattr__(self, "scores", scores)
        if self.groups is not None:
            object.__setattr__(
                self, "groups", tuple(tuple(g) for g in self.groups)
            )


def optimal_scorer(table: JointTable, groups: Sequence[Sequence[str]]) -> TabularScorer:
    """The bound-maximizing scorer: log p(state) / prod_m p_m(group state).

    The additive constant is fixed to zero; downstream checks compare
    scorers only up to an additive constant.
    """
    groups = [_check_subset(table, g, "group") for g in groups]
    _check_disjoint(groups)
    covered = {n for g in groups for n in g}
    if covered != set(table.var_names):
        raise ValueError("groups must cover every variable of the table")

    with np.errstate(divide="ignore"):
        scores = np.where(table.probs > 0.0, np.log(table.probs), -np.inf)
        for g in groups:
            marg = marginal(table, g)
            scores = scores - np.log(marg.probs)[_subset_states(table, g)]
    scores[table.probs == 0.0] = -np.inf
    return TabularScorer(scores, tuple(groups))


def _group_contribution(table: JointTable, names: Sequence[str]) -> np.ndarray:
    """Flat-index contribution of each sub-state of ``names`` (given order)."""
    arities = [table.arities[table._index(n)] for n in names]
    size = math.prod(arities)
    gs = np.arange(size)
    out = np.zeros(size, dtype=np.int64)
    gstride = 1
    for name, arity in zip(names, arities):
        out += ((gs // gstride) % arity) * table.stride(name)
        gstride *= arity
    return out


def _sample_from(cumulative: np.ndarray, rng: np.random.Generator, size) -> np.ndarray:
    u = rng.random(size)
    return np.minimum(
        np.searchsorted(cumulative, u, side="right"), len(cumulative) - 1
    )


def bound_value(
    table: JointTable,
    scorer: TabularScorer,
    n: int,
    mc_samples: int,
    seed: int,
    anchor: int = 0,
    groups: Sequence[Sequence[str]] | None = None,
) -> tuple[float, float]:
    """Monte-Carlo estimate of the multi-sample contrastive lower bound.

    Each sample draws one positive tuple from the joint and ``n - 1``
    negative tuples that reuse the positive's anchor group but draw every
    non-anchor group independently from its marginal.  The estimate is
    ``log n`` plus the mean log-probability that the scorer's softmax
    assigns to the positive; the second return value is the standard error
    of the mean.
    """
    if n < 1:
        raise ValueError(f"batch size must be >= 1, got {n}")
    if mc_samples < 1:
        raise ValueError(f"mc_samples must be >= 1, got {mc_samples}")
    if groups is None:
        groups = scorer.groups
    if groups is None:
        raise ValueError("scorer carries no groups; pass groups explicitly")
    groups = [_check_subset(table, g, "group") for g in groups]
    if not 0 <= anchor < len(groups):
        raise ValueError(f"anchor index {anchor} out of range")

    rng = substream(seed, "bound", anchor, n)
    joint_cum = np.cumsum(table.probs)
    sub_state = {i: _subset_states(table, g) for i, g in enumerate(groups)}
    contribution = {i: _group_contribution(table, g) for i, g in enumerate(groups)}
    marg_cums = {
        i: np.cumsum(marginal(table, g).probs)
        for i, g in enumerate(groups)
        if i != anchor
    }

    total = 0.0
    total_sq = 0.0
    done = 0
    chunk = max(1, (1 << 20) // n)
    while done < mc_samples:
        k = min(chunk, mc_samples - done)
        pos = _sample_from(joint_cum, rng, k)
        pos_scores = scorer.scores[pos]
        neg_idx = np.repeat(
            contribution[anchor][sub_state[anchor][pos]][:, None], n - 1, axis=1
        )
        for i in range(len(groups)):
            if i == anchor:
                continue
            draws = _sample_from(marg_cums[i], rng, (k, n - 1))
            neg_idx += contribution[i][draws]
        neg_scores = scorer.scores[neg_idx] if n > 1 else np.empty((k, 0))

        # log softmax of the positive among the n tuples; the positive's
        # score is finite, so the row max is finite even when negatives
        # land on zero-mass states.
        row_max = np.maximum(pos_scores, neg_scores.max(axis=1, initial=-np.inf))
        denom = np.exp(pos_scores - row_max) + np.exp(
            neg_scores - row_max[:, None]
        ).sum(axis=1)
        vals = pos_scores - (row_max + np.log(denom))
        total += vals.sum()
        total_sq += (vals * vals).sum()
        done += k

    mean = total / mc_samples
    if mc_samples > 1:
        var = max(0.0, (total_sq - mc_samples * mean * mean) / (mc_samples - 1))
        std_err = math.sqrt(var / mc_samples)
    else:
        std_err = 0.0
    return math.log(n) + mean, std_err
