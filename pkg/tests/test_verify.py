import math
from dataclasses import replace

import numpy as np
import pytest

from dirichlet_atlas import make_preset, uniform_limit_threshold
from dirichlet_atlas.tracing import CurveClass, LevelSet, StripRecord, TracedCurve
from dirichlet_atlas.verify import (
    CheckReport,
    Intersection,
    SuiteConfig,
    check_color_rules,
    check_double_zero_geometry,
    check_inverse_derivative,
    check_intertwining,
    check_no_fprime_zero_on_gamma_j,
    check_no_zero_on_gamma_prime,
    check_speiser_bound,
    check_strip_extends_left,
    run_suite,
    summary_text,
)
from dirichlet_atlas.window import GridWindow
from dirichlet_atlas.zeros import ZeroRecord


def _zero(loc, target="f", order=1, strip=1, zid=None):
    return ZeroRecord(complex(loc), target, order, 0.0, ((0, 1, 0, 1), order), strip, [], zid or f"{target}:{loc}")


def _synthetic_curve(points, kind, ends=("left", "right"), k=1, j=None):
    c = TracedCurve("synthetic", np.asarray(points, dtype=complex), "f", LevelSet("ImZero"),
                    CurveClass(kind, k=k, j=j), ends=ends, truncated=True)
    return c


def _intersection(gclass, uclass, gcol, ucol):
    return Intersection(0j, "g", "u", gclass, uclass, 0.0, gcol, ucol, 0.0)


@pytest.fixture(scope="module")
def suite(zeta, zeta_window):
    return run_suite(zeta, zeta_window)


# -- full suite --------------------------------------------------------------

def test_suite_passes_on_zeta(suite):
    assert [r.verdict for r in suite.reports] == ["pass"] * 7
    names = [r.name for r in suite.reports]
    assert names == ["no_zero_on_gamma_prime", "no_fprime_zero_on_gamma_j", "speiser_bound",
                     "double_zero_geometry", "intertwining", "color_rules", "strip_extends_left"]
    text = summary_text(suite.reports)
    assert text.count("PASS") == 7


def test_reports_round_trip(suite):
    for r in suite.reports:
        back = CheckReport.from_dict(r.to_dict())
        assert back.name == r.name and back.verdict == r.verdict
        assert back.margin == pytest.approx(r.margin) or (math.isinf(r.margin) and math.isinf(back.margin))


def test_bad_verdict():
    with pytest.raises(ValueError):
        CheckReport("x", "maybe", 0.0)


def test_suite_right_of_sigma_eps(zeta):
    s = uniform_limit_threshold(zeta, 0.5)
    res = run_suite(zeta, GridWindow(s + 0.1, s + 4, 0, 10, 64, 64), SuiteConfig(radii=(0.5,)))
    assert all(r.verdict in ("pass", "inconclusive") for r in res.reports)
    assert res.zeros_f == [] and res.zeros_fp == []


def test_suite_on_l_function_near_tangency():
    spec = make_preset("dirichlet-L", q=5, index=1)
    res = run_suite(spec, GridWindow(-1, 3, 168, 171), SuiteConfig(radii=(1.0,)))
    assert all(r.verdict != "fail" for r in res.reports)


# -- zeros on Gamma' -----------------------------------------------------------

def test_fake_zero_on_gamma_prime_fails(zeta, suite):
    prime = next(c for c in suite.curves_f if c.classification.kind == "GammaPrime")
    fake = _zero(prime.points[prime.points.size // 2])
    r = check_no_zero_on_gamma_prime(zeta, suite.curves_f, [fake], [])
    assert r.verdict == "fail"
    assert r.witnesses and r.witnesses[0]["curve"] == prime.id


def test_without_gamma_prime_inconclusive(zeta, suite):
    others = [c for c in suite.curves_f if c.classification.kind != "GammaPrime"]
    assert check_no_zero_on_gamma_prime(zeta, others, suite.zeros_f, []).verdict == "inconclusive"


def test_fprime_zero_on_gamma_j_fails(zeta, suite):
    gj = next(c for c in suite.curves_f if c.classification.kind == "GammaJ")
    fake = _zero(gj.points[gj.points.size // 2], target="f-prime")
    r = check_no_fprime_zero_on_gamma_j(zeta, suite.curves_f, suite.zeros_f, [fake])
    assert r.verdict == "fail"


def test_fprime_zero_margin_positive(zeta, suite):
    r = check_no_fprime_zero_on_gamma_j(zeta, suite.curves_f, suite.zeros_f, suite.zeros_fp)
    assert r.verdict == "pass" and r.margin > 1e-3


# -- Speiser bound ------------------------------------------------------------

def test_speiser_reversed_data_fails():
    zf = [_zero(0.5 + 10j, zid="f:0"), _zero(0.5 + 12j, zid="f:1")]
    zp = [_zero(0.2 + 11j, target="f-prime", zid="p:0")]
    st = StripRecord(1, "a", "b", 2, [], False, True, ["f:0", "f:1"], ["p:0"])
    r = check_speiser_bound(zf, zp, [st])
    assert r.verdict == "fail" and r.witnesses[0]["strip"] == 1


def test_speiser_vacuous_for_single_zero():
    zf = [_zero(0.5 + 10j, zid="f:0")]
    st = StripRecord(1, "a", "b", 1, [], False, True, ["f:0"], [])
    r = check_speiser_bound(zf, [], [st])
    assert r.verdict == "pass" and "vacuous" in r.reason


def test_speiser_critical_line(suite):
    r = check_speiser_bound(suite.zeros_f, suite.zeros_fp, suite.strips, critical_line=0.5)
    assert r.verdict == "pass"


# -- double zeros -------------------------------------------------------------

def test_two_double_zeros_in_one_strip_fail(zeta):
    zf = [_zero(0.5 + 10j, order=2), _zero(0.5 + 12j, order=2)]
    r = check_double_zero_geometry(zeta, zf, [])
    assert r.verdict == "fail"
    assert any(w.get("problem") == "more than one" for w in r.witnesses)


def test_no_double_zero_vacuous(zeta, suite):
    r = check_double_zero_geometry(zeta, suite.zeros_f, suite.curves_f)
    assert r.verdict == "pass" and "vacuous" in r.reason


# -- intertwining and colours ---------------------------------------------------

def test_intertwining_points_have_small_angle_defect(zeta, suite):
    r = check_intertwining(zeta, suite.curves_f, suite.curves_fp)
    assert r.verdict == "pass" and r.margin > 0


def test_intertwining_wrong_pairing_fails(zeta):
    p = _intersection("GammaJ(1,1)", "UpsilonJ(1,2)", 1, 4)
    assert check_intertwining(zeta, [], [], points=[p]).verdict == "fail"


def test_colour_two_meets_four_on_gamma_zero(zeta):
    p = _intersection("GammaZero(1)", "UpsilonZero(1)", 2, 4)
    assert check_color_rules(zeta, [], points=[p]).verdict == "pass"


def test_colour_matching_violation(zeta):
    p = _intersection("GammaJ(1,1)", "UpsilonJ(1,1)", 1, 3)
    r = check_color_rules(zeta, [], points=[p])
    assert r.verdict == "fail" and r.witnesses[0]["rule"] == "matching"


def test_colour_alternation_violation(zeta):
    c = TracedCurve("circle", np.exp(1j * np.linspace(0, 6, 20)), "f", LevelSet("AbsEq", 1.0),
                    color_runs=[(2, 1), (9, 1)])
    r = check_color_rules(zeta, [c])
    assert r.verdict == "fail" and r.witnesses[0]["rule"] == "alternating"


# -- strips extending left and the inverse derivative ------------------------------------

def test_strip_extends_left_tiny_window_inconclusive(zeta):
    w = GridWindow(4.9, 5.1, 10, 10.2, 64, 64)
    assert check_strip_extends_left(zeta, [], w).verdict == "inconclusive"


def test_strip_extends_left_synthetic_fail(zeta):
    c = _synthetic_curve([1 + 5j, 2 + 5j, 3 + 5j], "GammaPrime", ends=("right", "right"))
    r = check_strip_extends_left(zeta, [c], GridWindow(-4, 4, 0, 30))
    assert r.verdict == "fail"


def test_strip_extends_left_zeta(zeta, suite, zeta_window):
    assert check_strip_extends_left(zeta, suite.curves_f, zeta_window).verdict == "pass"


def test_inverse_derivative_check(zeta, suite):
    r = check_inverse_derivative(zeta, suite.curves_f, suite.zeros_fp)
    assert r.verdict == "pass"


def test_suite_reports_carry_window(suite, zeta_window):
    for r in suite.reports:
        assert r.window == zeta_window.box
        assert replace(r).spec_id
