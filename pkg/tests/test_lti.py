import numpy as np
import pytest
from conftest import random_rational, siso

from hardsrg.errors import ImproperSystemError, NonsquareSystemError, PoleOnGridError, RankDeficientError
from hardsrg.lti import (
    StateSpace,
    TransferMatrix,
    classify,
    determinant,
    freq_response,
    invert,
    normal_rank,
    poles,
    realize,
    shift_by_alpha,
    ss_to_tf,
    transmission_zeros,
)
from hardsrg.polynomials import Polynomial, RationalFunction

W = np.logspace(-2, 2, 100)


def _close_sets(a, b, tol=1e-6):
    a = np.sort_complex(np.asarray(a, dtype=complex))
    b = np.sort_complex(np.asarray(b, dtype=complex))
    assert a.shape == b.shape, (a, b)
    np.testing.assert_allclose(a, b, atol=tol)


@pytest.mark.parametrize("name, expected", [
    ("G1", [-0.5 - 0.8660254037844386j, -0.5 + 0.8660254037844386j]),
    ("G2", [-1.0, 0.0]),
    ("G3", [-10.0, 2.0]),
])
def test_poles_of_fixtures(systems, name, expected):
    _close_sets(poles(systems[name]), expected, 1e-9)


@pytest.mark.parametrize("G, zeros", [
    (siso([-1.0, 1.0], [1.0, 1.0]), [1.0]),
    (TransferMatrix([[RationalFunction.from_coeffs([1.0], [1.0, 1.0]), RationalFunction.constant(0.0)],
                     [RationalFunction.constant(0.0), RationalFunction.from_coeffs([-2.0, 1.0], [3.0, 1.0])]]), [2.0]),
])
def test_transmission_zeros_simple(G, zeros):
    _close_sets(transmission_zeros(G), zeros)


def test_g4_zero_and_determinant(systems):
    G4 = systems["G4"]
    _close_sets(transmission_zeros(G4), [-2.5])
    d = determinant(G4)
    expected_den = Polynomial.from_roots([-1.0, -2.0, -3.0, -4.0])
    np.testing.assert_allclose(d.num.array, [5.0, 2.0], rtol=1e-10)
    np.testing.assert_allclose(d.den.array, expected_den.array, rtol=1e-10)


def test_normal_rank(systems):
    assert normal_rank(systems["G4"]) == 2
    assert normal_rank(systems["G1"]) == 1
    a = RationalFunction.from_coeffs([1.0], [1.0, 1.0])
    b = RationalFunction.from_coeffs([2.0], [1.0, 1.0])
    prop = TransferMatrix([[a, a], [b, b]])
    assert normal_rank(prop) == 1
    with pytest.raises(RankDeficientError):
        transmission_zeros(prop)


def test_classify_fixtures(systems):
    c1 = classify(systems["G1"])
    assert c1.stable and c1.n_p == 0 and c1.minimum_phase
    c2 = classify(systems["G2"])
    assert not c2.stable and c2.has_axis_pole and c2.n_p == 0
    c5 = classify(systems["G5"])
    assert not c5.stable and c5.n_p == 1
    c6 = classify(systems["G6"])
    assert c6.has_axis_pole and c6.n_p == 1


def test_shift_by_alpha(systems):
    G1 = systems["G1"]
    assert shift_by_alpha(G1, 0.0) == G1
    g = shift_by_alpha(G1, -1.0)[0, 0]
    np.testing.assert_allclose(g.num.array, [2.0, 1.0, 1.0])
    np.testing.assert_allclose(g.den.array, [1.0, 1.0, 1.0])
    G4 = systems["G4"]
    s = shift_by_alpha(G4, 0.7)
    assert s[0, 1] == G4[0, 1] and s[1, 0] == G4[1, 0]
    pts = np.array([0.5j, 2.0 + 1j])
    np.testing.assert_allclose(s[1, 1](pts), G4[1, 1](pts) - 0.7)


@pytest.mark.parametrize("alpha", [-3.0, -0.4, 0.0, 0.9, 5.0])
def test_shift_keeps_poles(systems, alpha):
    for name in ("G1", "G4", "G5"):
        G = systems[name]
        _close_sets(classify(shift_by_alpha(G, alpha)).poles, classify(G).poles, 1e-6)


def test_invert_siso():
    g = invert(siso([1.0], [1.0, 1.0]))[0, 0]
    np.testing.assert_allclose(g.num.array, [1.0, 1.0])
    assert g.den.degree() == 0
    h = invert(siso([-1.0, 1.0], [1.0, 1.0]))[0, 0]
    np.testing.assert_allclose(h.num.array, [1.0, 1.0])
    np.testing.assert_allclose(h.den.array, [-1.0, 1.0])


@pytest.mark.parametrize("name", ["G4", "G5"])
def test_invert_mimo_product_is_identity(systems, name):
    G = systems[name]
    Gi = invert(G)
    s = 1j * W
    prod = G(s) @ Gi(s)
    np.testing.assert_allclose(prod, np.broadcast_to(np.eye(G.p), prod.shape), atol=1e-8)


def test_freq_response(systems):
    np.testing.assert_allclose(freq_response(systems["G1"], 0.0), [[1.0]])
    np.testing.assert_allclose(freq_response(systems["G1"], 1.0), [[-1j]], atol=1e-15)
    with pytest.raises(PoleOnGridError):
        freq_response(systems["G2"], 0.0)


def test_realize_static_and_improper(systems):
    ss = realize(TransferMatrix.static(3.5))
    assert ss.n == 0
    np.testing.assert_allclose(ss.D, [[3.5]])
    with pytest.raises(ImproperSystemError):
        realize(siso([1.0, 1.0], [1.0]))
    ss1 = realize(systems["G1"])
    assert ss1.n == 2 and ss1.is_minimal()
    _close_sets(np.linalg.eigvals(ss1.A), poles(systems["G1"]), 1e-10)


@pytest.mark.parametrize("name", ["G1", "G3", "G4", "G5", "G6"])
def test_realization_fidelity(systems, name):
    G = systems[name]
    ss = realize(G)
    a, b = G(1j * W), ss(1j * W)
    assert np.all(np.abs(a - b) <= 1e-8 * (1 + np.abs(a)))


def test_ss_to_tf_integrator():
    G = ss_to_tf(StateSpace(np.zeros((1, 1)), np.ones((1, 1)), np.ones((1, 1)), np.zeros((1, 1))))
    np.testing.assert_allclose(G[0, 0].num.array, [1.0])
    np.testing.assert_allclose(G[0, 0].den.array, [0.0, 1.0])


def test_nonsquare_rejected():
    a = RationalFunction.constant(1.0)
    with pytest.raises(NonsquareSystemError):
        TransferMatrix([[a, a, a], [a, a, a]])


def test_conjugate_closure(systems):
    for G in systems.values():
        for z in (poles(G), classify(G).transmission_zeros):
            z = np.asarray(z)
            np.testing.assert_allclose(np.sort_complex(z), np.sort_complex(np.conj(z)), atol=1e-9)


@pytest.mark.parametrize("seed", range(12))
def test_pole_zero_duality(seed):
    rng = np.random.default_rng(seed)
    p = int(rng.integers(1, 4))
    n = int(rng.integers(1, 5))
    A = rng.standard_normal((n, n))
    B = rng.standard_normal((n, p))
    C = rng.standard_normal((p, n))
    D = rng.standard_normal((p, p)) + 2 * np.eye(p)
    G = ss_to_tf(StateSpace(A, B, C, D))
    Gi = invert(G)
    scale = 1 + max(np.abs(poles(G)).max(), np.abs(transmission_zeros(G)).max())
    _close_sets(poles(Gi), transmission_zeros(G), 1e-6 * scale)
    _close_sets(transmission_zeros(Gi), poles(G), 1e-6 * scale)


def test_normal_rank_matches_test_points(systems):
    rng = np.random.default_rng(3)
    for G in systems.values():
        pts = rng.standard_normal(5) + 1j * rng.standard_normal(5)
        ranks = [np.linalg.matrix_rank(G(s)) for s in pts]
        assert normal_rank(G) == max(ranks)
