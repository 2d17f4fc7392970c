import numpy as np
import pytest
from conftest import random_rational, siso

from hardsrg.errors import OnCurveError, SchemaError
from hardsrg.lti import TransferMatrix
from hardsrg.nyquist import (
    ARC,
    AXIS,
    INDENT,
    ContourSpec,
    WindingResult,
    closed_loop_rhp_count,
    closed_loop_stable_oracle,
    extended_srg_membership,
    nyquist_trace,
    winding_number,
    winding_numbers,
    write_trace_csv,
)
from hardsrg.region import build_region, membership_codes


@pytest.mark.parametrize("name, N, n_p, n_z", [
    ("G1", 0, 0, 0),
    ("G3", -1, 1, 0),
])
def test_winding_at_minus_one(systems, name, N, n_p, n_z):
    w = winding_number(systems[name], -1.0)
    assert (w.N, w.n_p, w.n_z) == (N, n_p, n_z)
    assert w.residual < 0.1


def test_integrator_trace_uses_indentation():
    G = siso([1.0], [0.0, 1.0, 1.0])  # coefficients ascending: 1/(s(s+1))
    tr = nyquist_trace(G)
    assert set(np.unique(tr.pieces)) == {AXIS, INDENT, ARC}
    assert np.all(np.isfinite(tr.samples))
    ind = tr.contour_points[tr.pieces == INDENT]
    assert np.all(ind.real >= -1e-15)
    w = winding_number(G, -1.0)
    assert w.n_z == 0


def test_unstable_first_order():
    # 2/(s-1): closed loop pole at -1, one open loop RHP pole
    G = siso([2.0], [-1.0, 1.0])
    w = winding_number(G, -1.0)
    assert (w.N, w.n_p, w.n_z) == (-1, 1, 0)
    assert closed_loop_stable_oracle(G, 1.0)


def test_on_curve_raises():
    with pytest.raises(OnCurveError):
        winding_number(siso([-1.0], [1.0, 1.0]), -1.0)  # -1/(s+1) passes through -1 at s=0


def test_mimo_trace_rejected(systems):
    with pytest.raises(SchemaError):
        nyquist_trace(systems["G4"])


def test_winding_result_consistency():
    with pytest.raises(ValueError):
        WindingResult(N=1, n_p=1, n_z=1)


def test_contour_spec_validation():
    with pytest.raises(ValueError):
        ContourSpec(big_radius=1.0, indent_radius=2.0).resolve(siso([1.0], [1.0, 1.0]))


def test_closed_loop_oracle_examples(systems):
    assert closed_loop_stable_oracle(systems["G1"])
    assert not closed_loop_stable_oracle(siso([3.0], [1.0, 1.0]), -1.0)
    for name in ("G1", "G2", "G3", "G4", "G5", "G6"):
        assert closed_loop_stable_oracle(systems[name])


def test_extended_membership_examples(systems):
    G1 = systems["G1"]
    assert extended_srg_membership(G1, complex(G1(0.3j)[0, 0]))
    assert not extended_srg_membership(G1, -1.0)
    assert extended_srg_membership(systems["G2"], 1.0)


def _cases(n_sys=50, n_gain=5, seed=7):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n_sys):
        g = random_rational(rng, 4)
        ks = rng.uniform(-5, 5, n_gain)
        out.append((TransferMatrix(((g,),)), ks))
    return out


def test_encirclements_match_closed_loop_eigenvalues():
    checked = 0
    for G, ks in _cases():
        for k in ks:
            kG = G.scale(float(k))
            try:
                w = winding_number(kG, -1.0)
                count = closed_loop_rhp_count(G, float(k))
            except Exception as exc:  # on-curve or ill-posed draws carry no information
                assert type(exc).__name__ in ("OnCurveError", "IllPosedError")
                continue
            assert w.residual < 0.1
            assert w.n_z == count, (G.fingerprint(), k)
            checked += 1
    assert checked >= 200


@pytest.mark.parametrize("name", ["G1", "G2", "G3"])
def test_winding_constant_on_complement_components(systems, name):
    G = systems[name]
    reg = build_region(G)
    xs = np.linspace(-3, 3, 41)
    Z = xs[None, :] + 1j * xs[:, None]
    outside = membership_codes(reg, Z.ravel()).reshape(Z.shape) == 2
    N, _, near = winding_numbers(G, Z.ravel(), on_curve="mask")
    N = N.reshape(Z.shape)
    near = near.reshape(Z.shape)
    # label 4-connected components of the sampled complement by flood fill
    label = -np.ones(Z.shape, dtype=int)
    n_lab = 0
    for i, j in zip(*np.nonzero(outside)):
        if label[i, j] >= 0:
            continue
        stack = [(i, j)]
        label[i, j] = n_lab
        while stack:
            a, b = stack.pop()
            for c, d in ((a + 1, b), (a - 1, b), (a, b + 1), (a, b - 1)):
                if 0 <= c < Z.shape[0] and 0 <= d < Z.shape[1] and outside[c, d] and label[c, d] < 0:
                    label[c, d] = n_lab
                    stack.append((c, d))
        n_lab += 1
    for k in range(n_lab):
        sel = (label == k) & ~near
        assert len(np.unique(N[sel])) <= 1


def test_trace_csv(tmp_path, systems):
    path = tmp_path / "trace.csv"
    write_trace_csv(nyquist_trace(systems["G1"]), path)
    rows = path.read_text().splitlines()
    assert rows[0] == "piece,parameter,re,im"
    assert len(rows) > 100
