"""Scan L(7,i) + 0.34375 L(7,j) for zeros in [0,1] x [31,32.5] and report their orders.

A double zero shows up as a certified record of order 2.  Each line lists the
zeros found and |f'| there, so near-collisions are visible too.
"""

import itertools

import numpy as np

from dirichlet_atlas import combination_preset, evaluate_grid
from dirichlet_atlas.zeros import locate_zeros


def main():
    for i, j in itertools.permutations(range(6), 2):
        spec = combination_preset(7, i, j, 0.34375)
        recs = locate_zeros(spec, "f", (0.0, 1.0, 31.0, 32.5))
        if not recs:
            print(f"({i},{j}): no zero")
            continue
        v, _ = evaluate_grid(spec, np.array([r.location for r in recs]))
        rows = ", ".join(f"{r.location:.4f} order {r.order} |f'| {abs(d):.2f}" for r, d in zip(recs, v[1]))
        print(f"({i},{j}): {rows}")


if __name__ == "__main__":
    main()
