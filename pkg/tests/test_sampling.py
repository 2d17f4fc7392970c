import math

import numpy as np
import pytest
from conftest import siso

from hardsrg.errors import DegeneratePairError, HorizonOverflowError
from hardsrg.lti import TransferMatrix, realize
from hardsrg.region import build_region, hard_radius_R
from hardsrg.sampling import SignalSpec, simulate, srg_sample, validate_inclusion, write_samples_csv


def test_static_gain_response():
    t, y = simulate(realize(TransferMatrix.static(2.0)), SignalSpec("sinusoid", 5.0, omega=1.3))
    u = SignalSpec("sinusoid", 5.0, omega=1.3).values(t, 1)
    np.testing.assert_allclose(y, 2 * u, atol=1e-14)


def test_first_order_step_like_response():
    # 1/(s+1) driven by sin t has the closed-form zero-state response
    t, y = simulate(realize(siso([1.0], [1.0, 1.0])), SignalSpec("sinusoid", 10.0, step_h=0.01))
    exact = 0.5 * (np.sin(t) - np.cos(t) + np.exp(-t))
    np.testing.assert_allclose(y[:, 0], exact, atol=1e-5)


def test_static_gain_sample_is_the_gain():
    s = srg_sample(TransferMatrix.static(-3.0), SignalSpec("sinusoid", 10.0),
                   SignalSpec("multisine", 10.0, components=((0.5, 1.0, 0.0), (2.0, 0.3, 1.0))), 10.0)
    assert s.gain == pytest.approx(3.0)
    assert s.angle == pytest.approx(math.pi)


def test_g1_long_sinusoid(systems):
    G1 = systems["G1"]
    w = 0.5
    s = srg_sample(G1, SignalSpec("sinusoid", 400.0, omega=w), SignalSpec("zero", 400.0), 400.0)
    g = complex(G1(1j * w)[0, 0])
    assert s.gain == pytest.approx(abs(g), rel=5e-3)
    assert s.angle == pytest.approx(abs(np.angle(g)), abs=5e-3)


def test_g2_gain_grows_with_horizon(systems):
    u = SignalSpec("sinusoid", 40.0, omega=0.05, phase=math.pi / 2)
    zero = SignalSpec("zero", 40.0)
    gains = [srg_sample(systems["G2"], u, zero, T).gain for T in (5.0, 10.0, 20.0, 40.0)]
    assert np.all(np.diff(gains) > 0)


@pytest.mark.parametrize("name, T", [("G1", 20.0), ("G3", 10.0), ("G4", 20.0), ("G5", 10.0), ("G6", 10.0)])
def test_quadrature_convergence(systems, name, T):
    G = systems[name]
    p = G.p
    d = tuple(np.exp(1j * np.arange(p)) * (1 + np.arange(p)))
    u1 = SignalSpec("multisine", T, components=((0.3, 1.0, 0.2), (1.7, 0.5, 1.0)), direction=d)
    u2 = SignalSpec("sinusoid", T, omega=0.9, direction=tuple(np.ones(p)))
    a = srg_sample(G, u1, u2, T, step_h=T / 4000)
    b = srg_sample(G, u1, u2, T, step_h=T / 8000)
    assert b.gain == pytest.approx(a.gain, rel=1e-3)
    assert b.angle == pytest.approx(a.angle, rel=1e-3, abs=1e-6)


def test_g1_sinusoid_nearly_reaches_peak(systems):
    G1 = systems["G1"]
    w = 1 / math.sqrt(2)     # peak of |G1(jw)|
    s = srg_sample(G1, SignalSpec("sinusoid", 600.0, omega=w), SignalSpec("zero", 600.0), 600.0)
    assert s.gain >= 0.98 * hard_radius_R(G1, 0.0)


def test_g4_aligned_sinusoid_nearly_reaches_peak(systems):
    G4 = systems["G4"]
    ws = np.logspace(-3, 1, 400)
    sv = np.linalg.svd(G4(1j * ws), compute_uv=False)[:, 0]
    w = float(ws[np.argmax(sv)])
    _, _, Vh = np.linalg.svd(G4(1j * w))
    d = tuple(np.conj(Vh[0]))
    T = 300.0
    s = srg_sample(G4, SignalSpec("sinusoid", T, omega=max(w, 1e-2), direction=d), SignalSpec("zero", T), T)
    assert s.gain >= 0.98 * hard_radius_R(G4, 0.0)


def test_degenerate_pair(systems):
    u = SignalSpec("sinusoid", 5.0)
    with pytest.raises(DegeneratePairError):
        srg_sample(systems["G1"], u, u, 5.0)


def test_horizon_overflow(systems):
    with pytest.raises(HorizonOverflowError):
        srg_sample(systems["G3"], SignalSpec("sinusoid", 30.0), SignalSpec("zero", 30.0), 30.0)


def test_signal_spec_validation():
    with pytest.raises(ValueError):
        SignalSpec("square", 1.0)
    with pytest.raises(ValueError):
        SignalSpec("sinusoid", 1.0, step_h=0.5)
    with pytest.raises(ValueError):
        SignalSpec("multisine", 1.0, components=((1.0, 1.0, 0.0), (1.0, 2.0, 0.0)))


def test_noise_is_seeded():
    t = np.linspace(0, 10, 1001)
    a = SignalSpec("filtered_noise", 10.0, seed=3).values(t, 2)
    b = SignalSpec("filtered_noise", 10.0, seed=3).values(t, 2)
    np.testing.assert_array_equal(a, b)


def test_static_gain_inclusion():
    G = TransferMatrix.static(1.5)
    rep = validate_inclusion(G, build_region(G), 20, [5.0, 10.0], seed=1)
    assert rep.n_violations == 0
    assert all(abs(s.gain - 1.5) < 1e-9 and s.angle < 1e-6 for s in rep.samples)


def test_inclusion_is_deterministic_and_exported(systems, tmp_path):
    G = systems["G1"]
    reg = build_region(G)
    a = validate_inclusion(G, reg, 30, [5.0, 20.0], seed=4)
    b = validate_inclusion(G, reg, 30, [5.0, 20.0], seed=4)
    assert a.as_dict() == b.as_dict()
    assert a.n_samples == 60 and a.n_violations == 0
    path = tmp_path / "s.csv"
    write_samples_csv(a, path)
    assert path.read_text().splitlines()[0] == "T,gain,angle,inside"
