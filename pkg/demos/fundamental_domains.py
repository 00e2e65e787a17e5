"""Split the zeta strips of [-4, 6] x [0, 40] into fundamental domains and check them.

A strip with m zeros is cut by m - 1 eta arcs into m domains, each mapped by
f one-to-one onto the plane minus slits.
"""

from pathlib import Path

from dirichlet_atlas import make_preset
from dirichlet_atlas.document import Cache
from dirichlet_atlas.cli import partition_document
from dirichlet_atlas.render import render_svg
from dirichlet_atlas.window import GridWindow

OUT = Path(__file__).parent / "out"


def main():
    spec = make_preset("zeta")
    window = GridWindow(-4, 6, 0, 40)
    doc = partition_document(spec, window, None, 1e-10, Cache(None), samples=500)
    for tree in doc.merge_trees:
        print(f"strip {tree.strip}: leaves {tree.leaves}, fusion radii {[round(n.radius, 4) for n in tree.nodes]}")
    for d in doc.domains:
        kinds = sorted({b["type"] for b in d.boundary})
        print(f"  domain {d.strip}.{d.index}: zero {d.contains_zero}, boundary {kinds}, slit {d.image_slit}")
    for r in doc.reports:
        print(r.line())
    OUT.mkdir(exist_ok=True)
    render_svg(doc, ["domains", "real", "eta", "zeros", "branch"], OUT / "domains.svg")
    print(f"wrote {OUT / 'domains.svg'}")


if __name__ == "__main__":
    main()
