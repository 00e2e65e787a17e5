import math

import numpy as np
import pytest

import oracles
from dirichlet_atlas import (
    CallableSpec,
    SeriesSpec,
    combination_preset,
    estimate_abscissae,
    euler_product_eval,
    eval_derivative,
    evaluate,
    evaluate_grid,
    make_preset,
    parse_spec_ref,
    uniform_limit_threshold,
)
from dirichlet_atlas import errors
from dirichlet_atlas.series import (
    DH_XI,
    cauchy_derivative,
    character_is_primitive,
    character_parity,
    dirichlet_character,
    primes_up_to,
    primitive_root,
    totient,
)


# -- construction ------------------------------------------------------------

def test_zeta_preset_shape(zeta):
    a, lam = zeta.prefix(10)
    assert np.all(a == 1)
    assert np.allclose(lam, np.log(np.arange(1, 11)))
    assert zeta.pole == 1
    assert zeta.multiplicative


def test_dirichlet_l_preset_is_the_legendre_symbol():
    spec = make_preset("dirichlet-L", q=5, index=2)
    assert np.allclose(spec.prefix(10)[0], [1, -1, -1, 1, 0, 1, -1, -1, 1, 0])
    assert spec.pole is None


def test_principal_character_keeps_the_pole():
    assert make_preset("dirichlet-L", q=5, index=0).pole == 1


def test_linear_combination_normalised_and_named():
    spec = combination_preset(7, 2, 4, 0.34375)
    assert spec.coefficient(1) == pytest.approx(1)
    assert spec.name == "L(7,2)+0.34375*L(7,4)"
    l2, l4 = (make_preset("dirichlet-L", q=7, index=i) for i in (2, 4))
    s = np.array([0.5 + 31.6j, 2 + 3j])
    v = evaluate_grid(spec, s)[0][0]
    ref = (evaluate_grid(l2, s)[0][0] + 0.34375 * evaluate_grid(l4, s)[0][0]) / 1.34375
    assert np.allclose(v, ref, atol=1e-12)


def test_parse_spec_ref():
    assert parse_spec_ref("zeta").name == "zeta"
    assert parse_spec_ref("L:5:2").coefficient(2) == pytest.approx(-1)
    assert parse_spec_ref("combo:7").name.startswith("L(7,2)+")
    assert parse_spec_ref("dh").coefficient(2) == pytest.approx(DH_XI)


@pytest.mark.parametrize("kwargs", [
    {"coefficients": [2, 1], "exponents": [0, 1]},
    {"coefficients": [1, 1], "exponents": [0.5, 1]},
    {"coefficients": [1, 1, 1], "exponents": [0, 2, 1]},
])
def test_custom_normalisation_rejected(kwargs):
    with pytest.raises(errors.InvalidSpec):
        make_preset("custom", **kwargs)


def test_invalid_presets():
    with pytest.raises(errors.UnknownFamily):
        make_preset("no-such-family")
    with pytest.raises(errors.InvalidSpec):
        make_preset("dirichlet-L", q=2, index=0)
    with pytest.raises(errors.InvalidSpec):
        make_preset("dirichlet-L", q=5, index=4)


def test_spec_hash_is_stable_and_distinguishes():
    assert make_preset("zeta").spec_hash == make_preset("zeta").spec_hash
    assert make_preset("zeta").spec_hash != make_preset("dirichlet-L", q=5, index=0).spec_hash


# -- arithmetic helpers --------------------------------------------------------

def test_arithmetic_helpers():
    assert list(primes_up_to(30)) == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]
    assert totient(7) == 6 and totient(12) == 4
    assert primitive_root(5) == 2 and primitive_root(7) == 3
    with pytest.raises(errors.InvalidSpec):
        primitive_root(8)


def test_characters_mod_7():
    chis = [dirichlet_character(7, j) for j in range(6)]
    # orthogonality over the residues
    M = np.array([c[:6] for c in chis])
    assert np.allclose(M @ M.conj().T, 6 * np.eye(6))
    assert [character_is_primitive(7, j) for j in range(6)] == [False] + [True] * 5
    assert character_parity(7, 3) == 1  # the quadratic character mod 7 is odd
    assert character_parity(7, 2) == 0


# -- evaluation ----------------------------------------------------------------

def test_zeta_at_two(zeta):
    r = evaluate(zeta, 2, 1e-12)
    assert abs(r.value - oracles.ZETA_2) <= r.error_bound <= 1e-12


def test_zeta_far_right_tends_to_one(zeta):
    r = evaluate(zeta, 30 + 7j, 1e-12)
    assert abs(r.value - 1) <= 2 * 2.0**-30


@pytest.mark.parametrize("s, ref, tol", [
    (-4 + 30j, oracles.ZETA_M4_30I, 1e-6),
    (3 + 1j, oracles.ZETA_3_I, 1e-12),
    (4 - 2j, oracles.ZETA_4_M2I, 1e-12),
])
def test_zeta_values(zeta, s, ref, tol):
    r = evaluate(zeta, s, tol)
    assert abs(r.value - ref) <= max(r.error_bound, 1e-14) * 1.01


def test_bound_covers_error_off_the_half_plane():
    spec = make_preset("dirichlet-L", q=5, index=2)
    for s, ref in ((0.5 + 10j, oracles.L5_2_HALF_10I), (2, oracles.L5_2_AT_2)):
        r = evaluate(spec, s)
        assert abs(r.value - ref) <= r.error_bound + 1e-15
    r = evaluate(make_preset("dirichlet-L", q=5, index=1), 0.5 + 10j)
    assert abs(r.value - oracles.L5_1_HALF_10I) <= r.error_bound + 1e-15


def test_davenport_heilbronn_values():
    dh = make_preset("davenport-heilbronn")
    assert DH_XI == pytest.approx(oracles.DH_XI, abs=1e-15)
    assert evaluate(dh, 2).value == pytest.approx(oracles.DH_AT_2, abs=1e-12)
    assert abs(evaluate(dh, oracles.DH_ZERO).value) < 1e-9


def test_pole_and_unreachable_tolerance(zeta):
    with pytest.raises(errors.EvaluationAtPole):
        evaluate(zeta, 1)
    # the excluded disc only applies to grid scans; point evaluation still works near the pole
    s = 1 + 5e-4j
    assert abs(evaluate(zeta, s).value * (s - 1) - 1) < 1e-3
    with pytest.raises(errors.ToleranceUnreachable):
        evaluate(zeta, -4 + 30j, 1e-12)


def test_custom_series_only_in_its_half_plane():
    n = np.arange(1, 2001)
    spec = make_preset("custom", coefficients=(-1.0) ** (n + 1), exponents=np.log(n))
    r = evaluate(spec, 3)
    # alternating zeta at 3 is (3/4) zeta(3); the stored prefix is 2000 terms long
    assert r.value == pytest.approx(oracles.ETA_3, abs=1e-9)
    with pytest.raises(errors.ContinuationUnavailable):
        evaluate(spec, -1)


def test_determinism(zeta):
    a = evaluate(zeta, 0.3 + 17j)
    b = evaluate(zeta, 0.3 + 17j)
    assert a == b


def test_high_precision_mode(zeta):
    r = evaluate(zeta, 0.5 + 14.134725141734693j, precision="high")
    assert abs(r.value) < 1e-14
    assert r.method.startswith("mpmath")


# -- derivatives ---------------------------------------------------------------

def test_zeta_derivative_at_two(zeta):
    r = eval_derivative(zeta, 2, 1, 1e-12)
    assert abs(r.value - oracles.ZETA_PRIME_2) <= max(r.error_bound, 1e-14)


def test_derivative_values(zeta):
    assert eval_derivative(zeta, 0.5 + 20j, 1).value == pytest.approx(oracles.ZETA_PRIME_HALF_20I, abs=1e-10)
    assert eval_derivative(zeta, 3 + 4j, 2).value == pytest.approx(oracles.ZETA_SECOND_3_4I, abs=1e-10)


def test_cauchy_matches_series_derivative(zeta):
    for s in (0.5 + 20j, -2 + 5j):
        c = cauchy_derivative(zeta, s, 1, 1e-8)
        d = eval_derivative(zeta, s, 1, 1e-8)
        assert abs(c.value - d.value) <= c.error_bound + d.error_bound


def test_derivative_matches_central_difference(zeta):
    s = 0.7 + 11j
    d = eval_derivative(zeta, s, 1).value
    for h in (1e-4, 1e-5):
        fd = (evaluate(zeta, s + h).value - evaluate(zeta, s - h).value) / (2 * h)
        assert abs(d - fd) <= 10 * h**2 + 1e-9


def test_derivative_at_simple_zero_is_nonzero(zeta):
    assert abs(eval_derivative(zeta, 0.5 + 14.134725141734693j, 1).value) > 0.5


def test_derivative_decays_far_right(zeta):
    s = 40 + 3j
    d = eval_derivative(zeta, s, 1).value
    lead = -math.log(2) * 2.0 ** (-s)
    assert abs(d - lead) < 1e-3 * abs(lead)


def test_cauchy_circle_hits_pole(zeta):
    with pytest.raises(errors.CircleHitsPole):
        cauchy_derivative(zeta, 1 + 1e-12j, 1, 1e-10)


# -- abscissae and sigma_eps ---------------------------------------------------

def test_abscissae_estimates():
    z = estimate_abscissae(make_preset("zeta"), 10**4)
    assert z.D == pytest.approx(1.0)
    assert z.sigma_c == pytest.approx(1.0, abs=0.02)
    assert z.sigma_u_upper == z.sigma_c + z.D
    l5 = estimate_abscissae(make_preset("dirichlet-L", q=5, index=2), 10**4)
    assert abs(l5.sigma_c) < 0.05


def test_abscissa_of_trivial_series():
    spec = make_preset("custom", coefficients=[1] + [0] * 63, exponents=np.log(np.arange(1, 65)))
    assert estimate_abscissae(spec, 64).sigma_c == 0.0
    with pytest.raises(errors.PrefixTooShort):
        estimate_abscissae(spec, 128)


def test_sigma_eps(zeta):
    s05 = uniform_limit_threshold(zeta, 0.5)
    assert s05 <= 3
    tail = sum(n**-s05 for n in range(2, 200000)) + 200000 ** (1 - s05) / (s05 - 1)
    assert tail <= 0.5 + 1e-9
    vals = [uniform_limit_threshold(zeta, e) for e in (0.1, 0.25, 0.5, 0.75, 0.9)]
    assert all(a >= b for a, b in zip(vals, vals[1:]))
    est = estimate_abscissae(zeta, 1000)
    by_eps = [est.sigma_eps[e] for e in sorted(est.sigma_eps)]
    assert by_eps == sorted(by_eps, reverse=True)


def test_uniform_limit_holds(zeta):
    s05 = uniform_limit_threshold(zeta, 0.5)
    t = np.linspace(-200, 200, 801)
    v = evaluate_grid(zeta, s05 + 1e-6 + 1j * t)[0][0]
    assert np.all(np.abs(v - 1) < 0.5)


# -- Euler products -------------------------------------------------------------

def test_euler_product_matches_series():
    z = make_preset("zeta")
    r = euler_product_eval(z, 2, 10**5)
    assert abs(r.value - oracles.ZETA_2) <= 1e-5
    assert abs(r.value - oracles.ZETA_2) <= r.error_bound
    l5 = make_preset("dirichlet-L", q=5, index=2)
    r = euler_product_eval(l5, 3, 10**4)
    e = evaluate(l5, 3)
    assert abs(r.value - e.value) <= r.error_bound + e.error_bound


def test_euler_product_tends_to_one():
    r = euler_product_eval(make_preset("zeta"), 60, 100)
    assert abs(r.value - 1) < 1e-17


def test_euler_product_errors():
    with pytest.raises(errors.NotMultiplicative):
        euler_product_eval(make_preset("davenport-heilbronn"), 3, 100)
    with pytest.raises(errors.ContinuationUnavailable):
        euler_product_eval(make_preset("zeta"), 0.9, 100)


# -- callable specs --------------------------------------------------------------

def test_callable_spec_in_grid_evaluation():
    spec = CallableSpec("cubic", lambda s: (s - 1j) ** 3, lambda s: 3 * (s - 1j) ** 2, lambda s: 6 * (s - 1j))
    v, b = evaluate_grid(spec, np.array([2 + 1j]))
    assert v[:, 0] == pytest.approx([8, 12, 12])
    assert np.all(b < 1e-12)


def test_series_spec_is_a_dataclass():
    assert isinstance(make_preset("zeta"), SeriesSpec)
