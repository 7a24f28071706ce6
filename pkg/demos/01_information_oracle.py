"""Walk through the exact information oracle.

The XOR triple (a, b fair bits, c = a XOR b) is the canonical example of
variables that are pairwise independent yet jointly determined: every
pairwise mutual information is zero while the conditional mutual
information I(a;b|c) is a full bit.  Pairwise contrastive objectives
target only the former, which is why they cannot solve this task.
"""

import math

import numpy as np

from symile.oracle import (
    build_synth_table,
    build_xor1d_table,
    conditional_mi,
    entropy,
    mutual_information,
    total_correlation,
)

LN2 = math.log(2.0)


def main():
    t = build_xor1d_table()
    print("XOR joint table (state order: a fastest, then b, then c):")
    print("  probs:", t.probs)

    print("\nPairwise terms vanish although c = a XOR b:")
    for x, y in (("a", "b"), ("b", "c"), ("a", "c")):
        print(f"  I({x};{y}) = {mutual_information(t, (x,), (y,)):+.3e} nats")
    print(f"  I(a;b|c) = {conditional_mi(t, ('a',), ('b',), ('c',)):.6f} nats (= ln 2)")
    tc = total_correlation(t, (("a",), ("b",), ("c",)))
    print(f"  TC(a,b,c) = {tc:.6f} nats = {tc / LN2:.3f} bits")

    print("\nThe XOR/copy mixture interpolates between no shared information")
    print("about b (weight 0: c just copies a) and pure higher-order")
    print("information (weight 1: the XOR above).")
    print(f"{'weight':>7}  {'I(a;b)':>9}  {'I(a;c)':>9}  {'I(a;b|c)':>9}  {'TC':>9}")
    for p_hat in np.linspace(0.0, 1.0, 6):
        t = build_synth_table(float(p_hat), dims=1)
        row = (
            mutual_information(t, ("a",), ("b",)),
            mutual_information(t, ("a",), ("c",)),
            conditional_mi(t, ("a",), ("b",), ("c",)),
            total_correlation(t, (("a",), ("b",), ("c",))),
        )
        print(f"{p_hat:7.1f}  " + "  ".join(f"{v:9.5f}" for v in row))

    print("\nTriple-wise total correlation splits into pairwise and")
    print("higher-order parts: 3 TC = 2 (pairwise sum) + (conditional sum).")
    t = build_synth_table(0.6, dims=1)
    pair = sum(
        mutual_information(t, (x,), (y,)) for x, y in (("a", "b"), ("b", "c"), ("a", "c"))
    )
    cond = (
        conditional_mi(t, ("a",), ("b",), ("c",))
        + conditional_mi(t, ("b",), ("c",), ("a",))
        + conditional_mi(t, ("a",), ("c",), ("b",))
    )
    tc = total_correlation(t, (("a",), ("b",), ("c",)))
    print(f"  at weight 0.6: 3*TC = {3 * tc:.12f}")
    print(f"  2*pairwise + conditional = {2 * pair + cond:.12f}")

    print("\nFive-dimensional blocks work the same way (32768-state table):")
    t5 = build_synth_table(1.0, dims=5)
    a = tuple(f"a{j}" for j in range(1, 6))
    b = tuple(f"b{j}" for j in range(1, 6))
    c = tuple(f"c{j}" for j in range(1, 6))
    print(f"  I(a;b)   = {mutual_information(t5, a, b):+.3e} nats")
    print(f"  I(a;b|c) = {conditional_mi(t5, a, b, c):.6f} nats (= 5 ln 2)")
    print(f"  H(a)     = {entropy(t5, a):.6f} nats")


if __name__ == "__main__":
    main()
