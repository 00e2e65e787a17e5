"""The involution swapping an off-line zero pair of a Hurwitz combination.

The Davenport-Heilbronn type preset has zeros at sigma + it and 1 - sigma + it
near t = 85.7.  phi sends the pre-image of a small disc around one zero onto
the pre-image around the other while preserving f.
"""

import numpy as np

from dirichlet_atlas import make_preset
from dirichlet_atlas.involution import argument_terms, build_involution, verify_involution
from dirichlet_atlas.zeros import locate_zeros


def main():
    dh = make_preset("davenport-heilbronn")
    zs = locate_zeros(dh, "f", (0.0, 1.0, 85, 86.5), 1e-12)
    for z in zs:
        print(f"zero {z.location:.12f} order {z.order}")
    s1 = next(z.location for z in zs if z.location.real > 0.6)
    s2 = next(z.location for z in zs if z.location.real < 0.4)
    m = build_involution(dh, s1, s2)
    print(f"disc radius {m.radius:.4g}, {len(m.branch_points)} branch points nearby")
    print(verify_involution(dh, m, 1000).line())

    zeta = make_preset("zeta")
    for delta in (0.5, 0.6, 0.9):
        a = argument_terms(zeta, 10.0, delta, 10**4)
        print(f"delta {delta}: max term {np.abs(a.terms).max():.3g}, sum {a.partial_sums[-1]:.4f}, "
              f"envelope violations {a.envelope_violations().size}")


if __name__ == "__main__":
    main()
