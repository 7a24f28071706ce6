"""The contrastive lower bound on total correlation, and recovering the
optimal scorer from samples.

A batch of one positive tuple plus N-1 negatives drawn from the product
of marginals yields the multi-sample bound log N + E[log softmax].  With
the optimal scorer (the log density ratio) the bound tightens toward the
true total correlation as N grows.  Training a free score per state on
the same batches recovers that ratio up to an additive constant.
"""

from symile.diagnostics import bound_tightness_report, recover_optimal_scorer
from symile.oracle import build_xor1d_table, optimal_scorer


def main():
    table = build_xor1d_table()
    groups = (("a",), ("b",), ("c",))

    print("Bound estimates with the optimal scorer (100k Monte-Carlo batches):")
    rows = bound_tightness_report(table, [1, 2, 8, 32, 128], 100_000, seed=0)
    print(f"{'N':>5}  {'bound':>8}  {'SE':>8}  {'TC':>8}")
    for row in rows:
        print(
            f"{row.n:5d}  {row.bound:8.4f}  {row.std_error:8.4f}  "
            f"{row.total_correlation:8.4f}"
        )
    print("The bound is 0 at N = 1 by construction and approaches TC = ln 2;")
    print("a larger batch buys a tighter bound at more compute.")

    print("\nRecovering the scorer from samples (free score per state):")
    learned, report = recover_optimal_scorer(table, n=16, steps=3000, lr=0.02, seed=0)
    reference = optimal_scorer(table, groups)
    print(f"  converged: {report.converged}")
    print(f"  stdev of (learned - exact log ratio) on support: {report.offset_std:.4f}")
    print("  per-state offsets (a shared additive constant is expected):")
    support = [s for s in range(8) if table.probs[s] > 0]
    for s, offset in zip(support, report.offsets):
        a, b, c = s & 1, (s >> 1) & 1, (s >> 2) & 1
        print(
            f"    state (a={a}, b={b}, c={c}): learned {learned.scores[s]:+.3f}, "
            f"exact {reference.scores[s]:+.3f}, offset {offset:+.3f}"
        )


if __name__ == "__main__":
    main()
