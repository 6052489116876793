import json
import math

import numpy as np
import pytest
import yaml
from hypothesis import given, settings
from hypothesis import strategies as st

from qhjwave.cli import main
from qhjwave.config import RunConfig, load_config
from qhjwave.errors import ConfigError
from qhjwave.io import read_csv, read_json, sha256, write_csv, write_json


# --- config -------------------------------------------------------------------

def test_defaults_are_valid():
    cfg = RunConfig(n=2)
    assert cfg.problems() == []
    assert cfg.phi == pytest.approx(math.pi / 4)


def test_all_problems_reported_at_once():
    cfg = RunConfig(mode="bogus", hbar=-1.0, n_mesh=1, boundary="nowhere", potential="nofile.csv")
    probs = cfg.problems()
    text = " | ".join(probs)
    for key in ("mode", "hbar", "n_mesh", "boundary", "nofile.csv"):
        assert key in text
    with pytest.raises(ConfigError) as info:
        cfg.validate()
    assert len(info.value.problems) == len(probs)


def test_mode_specific_requirements():
    assert any("--n or --energy" in p for p in RunConfig(mode="solve").problems())
    assert any("range" in p for p in RunConfig(mode="scan-energy").problems())
    assert any("two gauge" in p for p in RunConfig(mode="family-check", n=2).problems())
    assert any("n > l" in p for p in RunConfig(potential="coulomb", n=1, l=1).problems())
    assert any("sin" in p for p in RunConfig(n=1, phi=0.0).problems())


def test_yaml_and_json_loading(tmp_path):
    data = {"mode": "solve", "potential": "harmonic", "n": 3, "tol": "1e-08", "range": "0:2"}
    y = tmp_path / "c.yaml"
    y.write_text(yaml.safe_dump(data))
    j = tmp_path / "c.json"
    j.write_text(json.dumps(data))
    for path in (y, j):
        cfg = load_config(path)
        assert cfg.n == 3 and cfg.tol == 1e-8 and cfg.e_range == [0.0, 2.0]


def test_flags_override_file(tmp_path):
    y = tmp_path / "c.yaml"
    y.write_text("n: 3\nphi: 0.5\n")
    cfg = load_config(y, {"n": 5})
    assert cfg.n == 5 and cfg.phi == 0.5


def test_unknown_and_bad_keys(tmp_path):
    y = tmp_path / "c.yaml"
    y.write_text("n: 3\nfoo: 1\nhbar: abc\n")
    with pytest.raises(ConfigError) as info:
        load_config(y)
    text = " ".join(info.value.problems)
    assert "foo" in text and "hbar" in text


# --- io -------------------------------------------------------------------------

def test_csv_roundtrip(tmp_path):
    x = np.linspace(0, 1, 7) / 3
    path = write_csv(tmp_path / "a.csv", ["x", "y"], [x, x**2])
    header, data = read_csv(path)
    assert header == ["x", "y"]
    assert np.array_equal(data[:, 0], x) and np.array_equal(data[:, 1], x**2)
    assert b"\r" not in path.read_bytes()


@settings(max_examples=50)
@given(st.lists(st.floats(allow_nan=False, allow_infinity=False, width=64), min_size=1, max_size=20))
def test_csv_floats_roundtrip_exactly(tmp_path_factory, values):
    path = write_csv(tmp_path_factory.mktemp("csv") / "v.csv", ["v"], [values])
    _, data = read_csv(path)
    assert data[:, 0].tolist() == [float(v) for v in values]


def test_csv_rejects_ragged(tmp_path):
    with pytest.raises(ValueError):
        write_csv(tmp_path / "a.csv", ["x", "y"], [[1, 2], [1]])


def test_json_sorted_and_nan_null(tmp_path):
    path = write_json(tmp_path / "a.json", {"b": float("nan"), "a": np.float64(1.5), "c": np.arange(2)})
    assert read_json(path) == {"a": 1.5, "b": None, "c": [0, 1]}
    assert path.read_text().index('"a"') < path.read_text().index('"b"')


# --- command line -----------------------------------------------------------------

def test_solve(tmp_path, capsys):
    out = tmp_path / "solve"
    assert main(["solve", "--n", "8", "--out", str(out), "--check"]) == 0
    summary = read_json(out / "summary.json")
    assert summary["node_count"] == 8 and summary["peaks"] == 9
    assert summary["max_abs_error"] < 1e-7
    header, data = read_csv(out / "action.csv")
    assert header == ["x", "X", "Xp", "Xpp", "Y", "W0", "p"]
    manifest = read_json(out / "manifest.json")
    assert all(manifest["checks"].values())
    for name, digest in manifest["files"].items():
        assert sha256(out / name) == digest
    assert "PASS" in capsys.readouterr().out


def test_solve_is_deterministic_and_reproducible_from_manifest(tmp_path):
    a, b, c = tmp_path / "a", tmp_path / "b", tmp_path / "c"
    args = ["solve", "--n", "2", "--x0", "0.3", "--xp0", "1.5"]
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert main(["solve", "--config", str(a / "manifest.json"), "--out", str(c)]) == 0
    for name in ("x_psi.csv", "action.csv", "summary.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes() == (c / name).read_bytes()


def test_solve_coulomb(tmp_path):
    out = tmp_path / "h"
    assert main(["solve", "--potential", "coulomb", "--n", "3", "--l", "1", "--phi", "0.01",
                 "--error-tol", "1e-6", "--out", str(out), "--check"]) == 0
    assert read_json(out / "summary.json")["node_count"] == 1


def test_scan_energy(tmp_path):
    out = tmp_path / "scan"
    assert main(["scan-energy", "--range", "0:3", "--out", str(out), "--check"]) == 0
    ev = read_json(out / "eigenvalues.json")
    np.testing.assert_allclose(ev["eigenvalues"], [0.5, 1.5, 2.5], atol=1e-8)
    header, _ = read_csv(out / "residual_scan.csv")
    assert header[0] == "E"


def test_family_check(tmp_path):
    out = tmp_path / "fam"
    assert main(["family-check", "--n", "4", "--x0", "0,0.5,1.5", "--xp0", "0.7,2",
                 "--out", str(out), "--check"]) == 0
    header, data = read_csv(out / "family.csv")
    assert len(header) == 7


def test_compare(tmp_path):
    out = tmp_path / "cmp"
    assert main(["compare", "--n", "8", "--out", str(out)]) == 0
    rep = read_json(out / "compare.json")
    assert isinstance(rep, dict) and rep
    header, _ = read_csv(out / "wkb.csv")
    assert header == ["x", "psi_wkb", "valid", "psi_qhje", "psi_reference"]


def test_emit_figures(tmp_path):
    out = tmp_path / "fig"
    assert main(["emit-figures", "--out", str(out)]) == 0
    for name in ("fig1_action.csv", "fig2_momentum.csv", "fig3_envelope.csv", "fig4_regions.csv",
                 "figures.json", "manifest.json"):
        assert (out / name).exists()
    _, regions = read_csv(out / "fig4_regions.csv")
    assert set(np.unique(regions[:, 1]).astype(int)) == {1, 2, 3}


def test_exit_codes(tmp_path, capsys):
    assert main(["solve", "--out", str(tmp_path / "x")]) == 2
    assert "--n or --energy" in capsys.readouterr().err
    assert main(["solve", "--energy", "-1", "--out", str(tmp_path / "y")]) == 3
    assert main(["solve", "--energy", "8.3", "--boundary", "riccati", "--check",
                 "--out", str(tmp_path / "v")]) == 1
    assert main(["solve", "--n", "1", "--error-tol", "1e-30", "--check",
                 "--out", str(tmp_path / "z")]) == 1
    assert main(["solve", "--n", "1", "--error-tol", "1e-30", "--out", str(tmp_path / "w")]) == 0


def test_mutually_exclusive_flags():
    with pytest.raises(SystemExit):
        main(["solve", "--n", "1", "--energy", "1.5"])
