import json
import math

import numpy as np
import pytest

from trimodal import io
from trimodal.cli import (EXIT_DEGENERATE, EXIT_DIVERGED, EXIT_NOT_TRANSVERSAL, EXIT_OK,
                          EXIT_USAGE, main)
from trimodal.grid import Grid
from trimodal.operators import WaveField

SMALL = ["--grid-modes", "20", "--grid-s", "16"]


def test_dumps_format():
    text = io.dumps({"x": 0.1, "n": 3, "ok": True, "v": [1.0, float("nan")], "s": "a"})
    assert '"x": 0.10000000000000001' in text
    assert '"v": [1, null]' in text
    assert json.loads(text)["ok"] is True
    with pytest.raises(TypeError):
        io.dumps(object())


def test_field_round_trips():
    rng = np.random.default_rng(0)
    g = Grid(6, 8)
    w = WaveField(rng.standard_normal(6), rng.standard_normal(g.shape))
    back = io.field_from(json.loads(io.dumps(io.field_dict(w))))
    np.testing.assert_array_equal(back.eta, w.eta)
    np.testing.assert_array_equal(back.phi, w.phi)
    back = io.field_from_csv(io.field_csv(w))
    np.testing.assert_array_equal(back.phi, w.phi)


def test_spec_round_trip(spec_6_10_15):
    doc = json.loads(io.dumps(io.spec_dict(spec_6_10_15)))
    spec = io.spec_from(doc)
    assert spec.params == spec_6_10_15.params
    assert spec.wavenumbers == (6, 10, 15)


def test_find_kernel(tmp_path, capsys):
    assert main(["find-kernel", "6", "10", "15", "--out-dir", str(tmp_path)]) == EXIT_OK
    doc = json.loads(capsys.readouterr().out)
    assert 0.568 <= doc["xi"] <= 0.574
    assert doc["transversality"]["certified"] is True
    first = (tmp_path / "spec_6_10_15.json").read_bytes()
    main(["find-kernel", "6", "10", "15", "--out-dir", str(tmp_path)])
    assert (tmp_path / "spec_6_10_15.json").read_bytes() == first


def test_find_kernel_uncertified(monkeypatch, capsys):
    import trimodal.cli as cli
    from trimodal.kernel_finder import transversality

    def broken(spec):
        rep = transversality(spec)
        rep.ordering = False
        return rep

    monkeypatch.setattr(cli, "transversality", broken)
    assert main(["find-kernel", "6", "10", "15"]) == EXIT_NOT_TRANSVERSAL


def test_classify(capsys):
    assert main(["classify", "12", "20", "30"]) == EXIT_OK
    out = capsys.readouterr().out
    assert " I " in out and "6 10 15" in out
    assert main(["classify", "5", "5", "7"]) == EXIT_DEGENERATE


def test_usage_errors(capsys):
    assert main(["nonsense"]) == EXIT_USAGE
    assert main(["classify", "1", "2"]) == EXIT_USAGE
    assert main(["--tol", "-1", "classify", "1", "2", "3"]) == EXIT_USAGE
    assert main(["--grid-s", "2", "classify", "1", "2", "3"]) == EXIT_USAGE
    assert main(["solve", "missing.json", "--t", "0", "0", "0"]) == EXIT_USAGE


@pytest.fixture()
def spec_file(tmp_path, spec_6_10_15):
    path = tmp_path / "spec.json"
    path.write_text(io.dumps(io.spec_dict(spec_6_10_15)))
    return path


def test_solve_and_render(tmp_path, spec_file, capsys):
    out = tmp_path / "out"
    args = ["solve", str(spec_file), "--t", "1e-5", "1e-5", "0", "--out-dir", str(out)] + SMALL
    assert main(args) == EXIT_OK
    summary = json.loads(capsys.readouterr().out)
    assert summary["residual"] < 1e-8
    (point,) = out.glob("*.json")
    (profile,) = out.glob("*.csv")
    rows = profile.read_text().splitlines()
    assert rows[0] == "q,height" and len(rows) == 2049
    assert main(["render", str(point), "--out-dir", str(tmp_path / "r")]) == EXIT_OK
    rendered = (tmp_path / "r" / (point.stem + "_profile.csv")).read_text()
    heights = np.array([float(r.split(",")[1]) for r in rendered.splitlines()[1:]])
    # t3 = 0 leaves only even modes: period pi
    np.testing.assert_allclose(heights[:1024], heights[1024:2048], atol=1e-12)


def test_solve_trivial(spec_file, capsys):
    assert main(["solve", str(spec_file), "--t", "0", "0", "0"] + SMALL) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["iterations"] == 0


def test_solve_diverges(spec_file):
    args = ["--tol", "1e-12", "solve", str(spec_file), "--t", "5e-3", "5e-3", "5e-3"] + SMALL
    assert main(args) == EXIT_DIVERGED


def test_sweep(tmp_path, spec_file, capsys):
    args = ["sweep", str(spec_file), "--direction", "1", "1", "1", "--h-max",
            str(math.sqrt(3) * 2e-5), "--steps", "2"] + SMALL
    assert main(args) == EXIT_OK
    doc = json.loads(capsys.readouterr().out)
    assert len(doc["points"]) == 2 and doc["truncated"] is False


def test_solve_artifacts_are_deterministic(tmp_path, spec_file, capsys):
    outs = []
    for name in ("a", "b"):
        args = ["solve", str(spec_file), "--t", "1e-5", "0", "0", "--out-dir",
                str(tmp_path / name)] + SMALL
        assert main(args) == EXIT_OK
        outs.append(sorted((p.name, p.read_bytes()) for p in (tmp_path / name).iterdir()))
    assert outs[0] == outs[1]
