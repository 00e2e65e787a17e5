import numpy as np
import pytest

import oracles
from dirichlet_atlas import CallableSpec, make_preset, uniform_limit_threshold
from dirichlet_atlas import errors
from dirichlet_atlas.zeros import (
    ZeroRecord,
    build_merge_tree,
    count_zeros,
    count_zeros_certified,
    locate_zeros,
    newton,
    zero_order,
)


def _poly_spec(name, roots):
    """Harness-only CallableSpec with the given roots (repeated roots give multiplicity)."""
    roots = np.asarray(roots, dtype=complex)
    p = np.poly(roots)
    d1, d2 = np.polyder(p), np.polyder(p, 2)
    return CallableSpec(name, lambda s: np.polyval(p, s), lambda s: np.polyval(d1, s), lambda s: np.polyval(d2, s))


# -- counting ----------------------------------------------------------------

def test_count_first_zero(zeta):
    assert count_zeros(zeta, "f", (0.4, 0.6, 14, 14.3)) == 1


def test_count_euler_region_is_zero_free(zeta):
    assert count_zeros(zeta, "f", (2, 3, 0, 1)) == 0


def test_count_right_of_sigma_eps(zeta):
    s = uniform_limit_threshold(zeta, 0.5)
    assert count_zeros(zeta, "f", (s + 0.01, s + 3, 0, 100)) == 0
    assert locate_zeros(zeta, "f", (s + 0.01, s + 3, 0, 100)) == []


def test_count_box_containing_the_pole(zeta):
    # the pole at 1 is regularised, so it does not count against the zeros
    assert count_zeros(zeta, "f", (0.5, 1.5, -0.5, 0.5)) == 0


def test_count_matches_oracle_ordinates(zeta):
    expected = sum(1 for t in oracles.ZETA_ZERO_ORDINATES if t < 50)
    assert count_zeros(zeta, "f", (0, 1, 1, 50)) == expected


def test_certificate_box_contains_original(zeta):
    wind, box = count_zeros_certified(zeta, "f", (0, 1, 10, 30))
    assert wind == 3
    assert box[0] <= 0 and box[1] >= 1 and box[2] <= 10 and box[3] >= 30


def test_unknown_target(zeta):
    with pytest.raises(ValueError):
        count_zeros(zeta, "f-triple-prime", (0, 1, 0, 1))


# -- location ----------------------------------------------------------------

def test_locate_first_three_zeros(zeta):
    recs = locate_zeros(zeta, "f", (0, 1, 0, 30))
    assert len(recs) == 3
    for r, t in zip(recs, oracles.ZETA_ZERO_ORDINATES):
        assert abs(r.location - complex(0.5, t)) < 1e-9
        assert r.order == 1
        assert r.target == "f"
    assert [r.id for r in recs] == ["f:0", "f:1", "f:2"]


def test_locate_derivative_zeros(zeta):
    recs = locate_zeros(zeta, "f-prime", (0, 4, 20, 35))
    locs = [r.location for r in recs]
    for ref in (oracles.ZETA_PRIME_ZERO_1, oracles.ZETA_PRIME_ZERO_2):
        assert min(abs(np.array(locs) - ref)) < 1e-8


def test_locate_rejects_bad_tol(zeta):
    with pytest.raises(ValueError):
        locate_zeros(zeta, "f", (0, 1, 0, 30), tol=0)


def test_records_serialise(zeta):
    r = locate_zeros(zeta, "f", (0, 1, 14, 15))[0]
    back = ZeroRecord.from_dict(r.to_dict())
    assert back == r


def test_newton_refines_to_oracle(zeta):
    s, res, bound = newton(zeta, 0, 0.5 + 14.1j)
    assert abs(s - complex(0.5, oracles.ZETA_ZERO_ORDINATES[0])) < 1e-12
    assert res <= 1e3 * bound + 1e-14


def test_davenport_heilbronn_off_line_zero():
    dh = make_preset("davenport-heilbronn")
    recs = locate_zeros(dh, "f", (0, 1, 85, 86.5), 1e-12)
    locs = np.array([r.location for r in recs])
    assert min(abs(locs - oracles.DH_ZERO)) < 1e-9
    assert min(abs(locs - oracles.DH_PARTNER)) < 1e-9


# -- orders ------------------------------------------------------------------

def test_simple_zero_order(zeta):
    assert zero_order(zeta, complex(0.5, oracles.ZETA_ZERO_ORDINATES[0])) == 1


def test_double_zero_synthetic():
    spec = _poly_spec("double", [0.5 + 1j, 0.5 + 1j, 0.2])
    recs = locate_zeros(spec, "f", (0, 1, 0.5, 2))
    assert [(round(r.location.real, 6), round(r.location.imag, 6), r.order) for r in recs] == [(0.5, 1.0, 2)]
    assert zero_order(spec, 0.5 + 1j) == 2


def test_triple_zero_raises():
    spec = _poly_spec("triple", [0.5 + 1j] * 3 + [-2])
    with pytest.raises(errors.OrderExceedsTwo):
        zero_order(spec, 0.5 + 1j)


# -- merge trees -------------------------------------------------------------

def test_merge_tree_single_leaf(zeta, zeta_analysis):
    _, _, zf, zp, strips = zeta_analysis
    st = next(s for s in strips if s.complete and s.zero_count == 1)
    tree = build_merge_tree(zeta, st.k, [z for z in zf if z.id in st.zero_ids], [])
    assert tree.leaves == st.zero_ids
    assert tree.internal_count == 0
    assert tree.is_full_binary()


def test_merge_tree_counts(zeta_wide):
    spec, _, (_, _, zf, zp, strips) = zeta_wide
    multi = [s for s in strips if s.complete and s.k != 0 and s.zero_count >= 2]
    assert multi
    for st in multi:
        fz = [z for z in zf if z.id in st.zero_ids]
        bp = [z for z in zp if z.id in st.branch_ids]
        assert len(bp) == st.zero_count - 1
        tree = build_merge_tree(spec, st.k, fz, bp)
        assert tree.is_full_binary()
        assert tree.radii_increase()
        assert len(tree.leaves) == st.zero_count
        # every internal node sits at a certified zero of f'
        assert {n.branch_id for n in tree.nodes} == set(st.branch_ids)


def test_merge_tree_incomplete_raises(zeta_wide):
    spec, _, (_, _, zf, zp, strips) = zeta_wide
    st = next(s for s in strips if s.complete and s.zero_count >= 2)
    fz = [z for z in zf if z.id in st.zero_ids]
    with pytest.raises(errors.ComponentTrackingLoss):
        build_merge_tree(spec, st.k, fz, [])
    tree = build_merge_tree(spec, st.k, fz, [], partial=True)
    assert tree.partial and tree.root == ""


def test_random_boxes_match_records(zeta):
    recs = locate_zeros(zeta, "f", (0, 1, 0, 50))
    rng = np.random.default_rng(7)
    for _ in range(5):
        a, b = np.sort(rng.uniform(0, 1, 2))
        c, d = np.sort(rng.uniform(0, 50, 2))
        wind, box = count_zeros_certified(zeta, "f", (a, b, c, d))
        inside = sum(r.order for r in recs
                     if box[0] <= r.location.real <= box[1] and box[2] <= r.location.imag <= box[3])
        assert wind == inside
