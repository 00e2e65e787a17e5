import numpy as np
import pytest

import oracles
from dirichlet_atlas import errors
from dirichlet_atlas.tracing import (
    LevelSet,
    TracedCurve,
    alternation_violations,
    color_segments,
    find_horizontal_tangents,
    gamma_r_fusion_scan,
    inverse_derivative_defect,
    trace_level_set,
)
from dirichlet_atlas.window import GridWindow


def _by_kind(curves, kind):
    return [c for c in curves if c.classification.kind == kind]


# -- level sets --------------------------------------------------------------

def test_levelset_parse():
    assert LevelSet.parse("ImZero") == LevelSet("ImZero")
    assert LevelSet.parse("AbsEq(0.5)") == LevelSet("AbsEq", 0.5)
    assert LevelSet.parse(("AbsEq", 2)) == LevelSet("AbsEq", 2.0)
    assert LevelSet.parse("abs:0.25") == LevelSet("AbsEq", 0.25)
    assert LevelSet.parse(LevelSet("AbsEq", 3).label) == LevelSet("AbsEq", 3)
    with pytest.raises(ValueError):
        LevelSet("AbsEq", -1)
    with pytest.raises(ValueError):
        LevelSet.parse("banana")


def test_gamma_prime_through_two(zeta):
    curves = trace_level_set(zeta, "f", "ImZero", GridWindow(-2, 8, -2, 2))
    hits = [c for c in curves if np.min(np.abs(c.points - 2)) < 1e-2]
    assert len(hits) == 1
    c = hits[0]
    i = int(np.argmin(np.abs(c.points - 2)))
    assert c.values[i].real > 1
    assert c.max_defect() < 1e-9


def test_small_circle_around_first_zero(zeta):
    w = GridWindow(0, 1, 13.6, 14.6, 128, 128)
    curves = trace_level_set(zeta, "f", LevelSet("AbsEq", 0.1), w)
    assert len(curves) == 1
    c = curves[0]
    assert c.closed and not c.truncated
    # winding of the closed polyline about the zero is one
    z0 = complex(0.5, oracles.ZETA_ZERO_ORDINATES[0])
    ang = np.unwrap(np.angle(np.append(c.points, c.points[:1]) - z0))
    assert round((ang[-1] - ang[0]) / (2 * np.pi)) in (1, -1)
    assert np.allclose(np.abs(c.values), 0.1, atol=1e-9)


def test_large_radius_stays_left(zeta):
    curves = trace_level_set(zeta, "f", LevelSet("AbsEq", 1e3), GridWindow(-4, 6, 5, 40))
    for c in curves:
        assert c.points.real.max() < 0


def test_step_too_large(zeta):
    with pytest.raises(errors.ResolutionInsufficient):
        trace_level_set(zeta, "f", "ImZero", GridWindow(0, 1, 0, 1, 64, 64), step=0.1)


def test_unknown_source(zeta):
    with pytest.raises(ValueError):
        trace_level_set(zeta, "g", "ImZero", GridWindow(0, 1, 0, 1, 64, 64))


def test_curve_round_trip(zeta_analysis):
    cf = zeta_analysis[0]
    c = cf[0]
    back = TracedCurve.from_dict(c.to_dict())
    assert back.id == c.id and np.array_equal(back.points, c.points)
    assert back.classification == c.classification
    assert back.color_runs == c.color_runs


# -- classification ----------------------------------------------------------

def test_classification_kinds(zeta_analysis):
    cf, cp, zf, zp, strips = zeta_analysis
    kinds = {c.classification.kind for c in cf}
    assert {"GammaPrime", "GammaZero", "GammaJ"} <= kinds
    assert "Unknown" not in {c.classification.kind for c in cf if not c.truncated}
    # every zero of f lies on a real-axis pre-image labelled Gamma_{k,0} or Gamma_{k,j}
    for z in zf:
        assert z.on_curves


def test_gamma_prime_image_right_of_one(zeta_analysis):
    cf = zeta_analysis[0]
    for c in _by_kind(cf, "GammaPrime"):
        assert np.all(c.values.real > 1 - 1e-9)
        assert [col for _, col in c.color_runs] == [1]


def test_upsilon_colours(zeta_analysis):
    cp = zeta_analysis[1]
    for c in cp:
        cols = {col for _, col in c.color_runs}
        assert cols <= {3, 4}
    neg = [c for c in cp if np.all(c.values.real < 0)]
    for c in neg:
        assert [col for _, col in c.color_runs] == [4]


def test_strips_ordered_and_counted(zeta_analysis):
    cf, cp, zf, zp, strips = zeta_analysis
    ks = [s.k for s in strips]
    assert ks == sorted(ks)
    for s in strips:
        assert s.zero_count == len(s.zero_ids)
    assert sum(s.zero_count for s in strips if s.k != 0) == 3


# -- marked points -----------------------------------------------------------

def test_horizontal_tangents(zeta_analysis, zeta):
    cf = zeta_analysis[0]
    found = [p for c in cf for p in find_horizontal_tangents(c, zeta)]
    assert found
    for p in found:
        assert p.defect < 1e-8


def test_monotone_curve_has_no_horizontal_tangent(zeta):
    s = 2 + 1j * np.linspace(0.5, 1.5, 50)
    c = TracedCurve("straight", s, "f", LevelSet("ImZero"))
    assert find_horizontal_tangents(c, zeta) == []


def test_horizontal_tangents_conjugation_symmetric(zeta):
    curves = trace_level_set(zeta, "f", "ImZero", GridWindow(-3, 3, -25, 25, 256, 512))
    pts = [p.location for c in curves for p in find_horizontal_tangents(c, zeta)]
    assert pts
    arr = np.array(pts)
    for p in pts:
        assert np.min(np.abs(arr - p.conjugate())) < 1e-8


def test_circle_colours_alternate(zeta):
    curves = trace_level_set(zeta, "f", LevelSet("AbsEq", 0.5), GridWindow(-4, 4, 0, 30))
    assert curves
    for c in curves:
        color_segments(c, zeta)
        assert alternation_violations(c) == []


def test_closed_circle_one_pair(zeta):
    c = trace_level_set(zeta, "f", LevelSet("AbsEq", 0.1), GridWindow(0, 1, 13.6, 14.6, 128, 128))[0]
    color_segments(c, zeta)
    assert sorted(col for _, col in c.color_runs) == [1, 2]


def test_inverse_derivative(zeta_analysis, zeta):
    cf, _, _, zp, _ = zeta_analysis
    c = _by_kind(cf, "GammaPrime")[0]
    worst, _ = inverse_derivative_defect(zeta, c, exclude=[z.location for z in zp], exclude_radius=0.1)
    assert worst < 1e-3


# -- fusion ------------------------------------------------------------------

def test_fusion_transition(zeta):
    from dirichlet_atlas.verify import analyse_window

    w = GridWindow(-4, 14, 5, 40)
    cf, cp, zf, zp, strips = analyse_window(zeta, w)
    primes = [(c.classification.k, c) for c in cf
              if c.classification.kind == "GammaPrime" and c.classification.k != 0]
    assert len(primes) >= 3
    below, above = gamma_r_fusion_scan(zeta, w, [0.999, 1.001], primes)
    assert not below.fused
    assert below.component_count == len(primes) - 1
    for ids in below.crossings.values():
        assert ids == []
    assert above.fused and above.component_count == 1


def test_fusion_radii_must_increase(zeta):
    with pytest.raises(ValueError):
        gamma_r_fusion_scan(zeta, GridWindow(-4, 14, 5, 40), [1.1, 0.9], [])
