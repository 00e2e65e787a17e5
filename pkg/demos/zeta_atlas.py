"""Trace the real-axis pre-images of zeta, list the strips and render an SVG.

Run with ``python3 demos/zeta_atlas.py``; output goes to ``demos/out``.
"""

from pathlib import Path

from dirichlet_atlas import make_preset
from dirichlet_atlas.document import AtlasDocument
from dirichlet_atlas.render import render_svg
from dirichlet_atlas.tracing import LevelSet, color_segments, trace_level_set
from dirichlet_atlas.verify import run_suite, summary_text
from dirichlet_atlas.window import GridWindow

OUT = Path(__file__).parent / "out"


def main():
    spec = make_preset("zeta")
    window = GridWindow(-4, 4, 0, 30)
    res = run_suite(spec, window)
    print(summary_text(res.reports))

    # the strips: each is bounded by two Gamma' curves and holds m_k zeros
    for st in res.strips:
        print(f"strip {st.k}: {st.zero_count} zero(s), complete={st.complete}, J_k={st.J_k}")

    circles = trace_level_set(spec, "f", LevelSet("AbsEq", 1.0), window)
    for c in circles:
        color_segments(c, spec)
    doc = AtlasDocument(spec.descriptor(), window.to_dict(), res.curves_f + res.curves_fp + circles,
                        res.zeros_f + res.zeros_fp, res.strips, reports=res.reports)
    OUT.mkdir(exist_ok=True)
    doc.save(OUT / "zeta_atlas.json")
    render_svg(doc, path=OUT / "zeta_atlas.svg")
    print(f"wrote {OUT / 'zeta_atlas.svg'}")


if __name__ == "__main__":
    main()
