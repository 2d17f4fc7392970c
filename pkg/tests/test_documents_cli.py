import json
import subprocess
import sys
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from hardsrg.cli import main
from hardsrg.documents import as_transfer_matrix, parse_region, parse_system, serialize_region, serialize_system
from hardsrg.errors import NonsquareSystemError, SchemaError
from hardsrg.lti import StateSpace, TransferMatrix
from hardsrg.nyquist import nyquist_trace
from hardsrg.plotting import PlotConfig, emit_svg, raster
from hardsrg.region import AlphaGrid, build_region, membership_codes


def test_parse_tf_example(systems):
    G = as_transfer_matrix(parse_system('{"kind":"tf","num":[[[1]]],"den":[[[1,1,1]]]}'))
    s = np.array([0.3j, 1.0 + 2j])
    np.testing.assert_allclose(G(s), systems["G1"](s))


def test_parse_ss_integrator():
    G = as_transfer_matrix(parse_system('{"kind":"ss","A":[[0]],"B":[[1]],"C":[[1]],"D":[[0]]}'))
    np.testing.assert_allclose(G(np.array([2j]))[0, 0, 0], 1 / 2j)


@pytest.mark.parametrize("name", ["G1", "G4", "G6"])
def test_system_round_trip(systems, name):
    G = systems[name]
    back = parse_system(serialize_system(G, name))
    s = np.array([0.1 + 0.5j, 2j])
    np.testing.assert_allclose(back(s), G(s), rtol=1e-14)


def test_state_space_round_trip():
    ss = StateSpace(np.array([[-1.0, 2.0], [0.0, -3.0]]), np.eye(2), np.eye(2), np.zeros((2, 2)))
    assert parse_system(serialize_system(ss)) == ss


@pytest.mark.parametrize("text", [
    "not json",
    '{"kind":"zpk"}',
    '{"kind":"tf","num":[[[1]]]}',
    '{"kind":"tf","num":[[[1]]],"den":[[[0]]]}',
    '{"kind":"tf","num":[[["a"]]],"den":[[[1]]]}',
    '{"kind":"ss","A":[[0,1]],"B":[[1]],"C":[[1]],"D":[[0]]}',
])
def test_schema_errors(text):
    with pytest.raises(SchemaError):
        parse_system(text)


def test_nonsquare_rejected():
    with pytest.raises(NonsquareSystemError):
        parse_system('{"kind":"ss","A":[[-1]],"B":[[1, 1]],"C":[[1]],"D":[[0, 0]]}')


@pytest.mark.parametrize("name", ["G1", "G2", "G5"])
def test_region_round_trip(systems, name):
    reg = build_region(systems[name])
    text = serialize_region(reg)
    assert ('"inf"' in text) == bool(np.isinf(reg.R).any())
    assert parse_region(text).same_as(reg)


def test_region_document_rejects_bad_radius(systems):
    doc = json.loads(serialize_region(build_region(systems["G1"], agrid=AlphaGrid(count=11))))
    doc["R"][0] = "infinity"
    with pytest.raises(SchemaError):
        parse_region(json.dumps(doc))


def _rects_cover(svg: str, color: str) -> set[tuple[int, int]]:
    root = ET.fromstring(svg)
    ns = "{http://www.w3.org/2000/svg}"
    cells = set()
    for g in root.iter(f"{ns}g"):
        if g.get("fill") != color:
            continue
        for r in g.iter(f"{ns}rect"):
            x, y, w = int(r.get("x")), int(r.get("y")), int(r.get("width"))
            cells.update((y, x + k) for k in range(w))
    return cells


def test_svg_matches_membership(systems):
    reg = build_region(systems["G1"])
    cfg = PlotConfig((-2, 2, -2, 2), 120, ("hard",))
    svg = emit_svg({"hard": reg}, [], cfg)
    cells = _rects_cover(svg, "#c8c8c8")
    n = cfg.resolution
    xs = -2 + (np.arange(n) + 0.5) * 4 / n
    ys = 2 - (np.arange(n) + 0.5) * 4 / n
    Z = xs[None, :] + 1j * ys[:, None]
    codes = membership_codes(reg, Z.ravel()).reshape(n, n)
    expected = {(i, j) for i, j in zip(*np.nonzero(codes < 2))}
    # pixel centres lying exactly in the tolerance band may go either way
    band = {(i, j) for i, j in zip(*np.nonzero(codes == 1))}
    assert cells - band == expected - band


def test_svg_is_deterministic_and_symmetric(systems):
    G = systems["G3"]
    regs = {"hard": build_region(G), "soft": build_region(G, "soft", require_stable=False)}
    cfg = PlotConfig((-3, 3, -3, 3), 200)
    a = emit_svg(regs, [nyquist_trace(G)], cfg)
    b = emit_svg(regs, [nyquist_trace(G)], cfg)
    assert a == b
    ET.fromstring(a)
    img = raster(regs["hard"], cfg)
    np.testing.assert_array_equal(img, img[::-1])


def test_plot_config_validation():
    with pytest.raises(ValueError):
        PlotConfig((1, 0, 0, 1))
    with pytest.raises(ValueError):
        PlotConfig(resolution=10)
    with pytest.raises(ValueError):
        PlotConfig(layers=("grid",))


def test_cli_nyquist_g3(capsys):
    assert main(["nyquist", "G3", "--z", "-1,0"]) == 0
    assert "N=-1 n_p=1 n_z=0" in capsys.readouterr().out


def test_cli_on_curve_exit(tmp_path, capsys):
    path = tmp_path / "neg.json"
    path.write_text('{"kind":"tf","num":[[[-1]]],"den":[[[1,1]]]}')
    assert main(["nyquist", str(path), "--z", "-1,0"]) == 3
    assert "on_curve" in capsys.readouterr().err


def test_cli_stability(tmp_path, capsys):
    out = tmp_path / "rep.json"
    assert main(["stability", "G1", "--json", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["stable_certified"] is True
    assert rep["sensitivity_bound"] == pytest.approx(1.32511469, rel=1e-6)
    assert main(["stability", "G5", "--k1", "0", "--k2", "0.2"]) == 0
    # too little gain to stabilize the unstable pole of G3
    assert main(["stability", "G3", "--k", "0.1"]) == 1


def test_cli_schema_errors(tmp_path, capsys):
    assert main(["region", str(tmp_path / "missing.json")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert main(["region", str(bad)]) == 2
    assert main(["stability", "G1", "--k", "abc"]) == 2
    assert main(["plot", "G1", "--out", str(tmp_path / "x.svg"), "--window", "1,0,0,1"]) == 2


def test_cli_region_and_plot(tmp_path, capsys):
    rj, svg = tmp_path / "r.json", tmp_path / "p.svg"
    assert main(["region", "G2", "--out", str(rj)]) == 0
    assert parse_region(rj.read_text()).kind == "hard"
    assert main(["plot", "G1", "--out", str(svg), "--resolution", "150"]) == 0
    ET.fromstring(svg.read_text())


def test_cli_validate(capsys):
    assert main(["validate", "G1", "--pairs", "20", "--horizons", "5,20"]) == 0
    assert "violations: 0" in capsys.readouterr().out


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "hardsrg.cli", "nyquist", "G1", "--z", "-1,0"],
                         capture_output=True, text=True, timeout=120)
    assert res.returncode == 0
    assert "N=0 n_p=0 n_z=0" in res.stdout
