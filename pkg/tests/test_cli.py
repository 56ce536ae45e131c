import io
import json
from fractions import Fraction

import pytest

from nsbox import cli


def run(capsys, monkeypatch, argv, stdin=None):
    if stdin is not None:
        monkeypatch.setattr("sys.stdin", io.StringIO(stdin))
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def catalog(capsys, monkeypatch, name, *extra):
    code, out, _ = run(capsys, monkeypatch, ["catalog", name, *extra])
    assert code == 0
    return out


def test_pr_pipeline(capsys, monkeypatch):
    pr = catalog(capsys, monkeypatch, "pr:2")
    code, out, _ = run(capsys, monkeypatch, ["is-local", "-"], pr)
    doc = json.loads(out)
    assert code == 0 and doc["local"] is False
    code, out, _ = run(capsys, monkeypatch, ["is-local", "--normalize", "chsh", "-"], pr)
    assert json.loads(out)["violation"] == "2"
    code, out, _ = run(capsys, monkeypatch, ["measure", "chsh", "-"], pr)
    assert json.loads(out)["value"] == "2"
    code, out, _ = run(capsys, monkeypatch, ["measure", "robustness", "-"], pr)
    assert json.loads(out)["value"] == "1/3"


def test_uniform_measures(capsys, monkeypatch):
    u = catalog(capsys, monkeypatch, "uniform", "--setting", "2,2,2,2")
    code, out, _ = run(capsys, monkeypatch, ["measure", "epr2", "-"], u)
    assert code == 0 and json.loads(out)["value"] == "0"
    code, out, _ = run(capsys, monkeypatch, ["is-local", "-"], u)
    assert json.loads(out)["local"] is True


def test_round_trip_is_byte_identical(capsys, monkeypatch):
    for name in ("pr:2", "isotropic:3/4", "uniform"):
        text = catalog(capsys, monkeypatch, name)
        code, out, _ = run(capsys, monkeypatch, ["validate", "--canonical", "-"], text)
        assert code == 0 and out == text


def test_invalid_behaviour_reported(capsys, monkeypatch):
    bad = json.dumps({"mA": 1, "mB": 1, "dA": 2, "dB": 2, "p": ["1/2", "1/2", "1/2", "0"]})
    code, out, _ = run(capsys, monkeypatch, ["validate", "-"], bad)
    assert code == 0 and json.loads(out)["valid"] is False


def test_exit_codes(capsys, monkeypatch, tmp_path):
    code, _, err = run(capsys, monkeypatch, ["measure", "chsh", str(tmp_path / "missing.json")])
    assert code == 1 and "error" in err
    code, _, err = run(capsys, monkeypatch, ["measure", "chsh", "-"], "not json")
    assert code == 1
    with pytest.raises(SystemExit) as exc:
        cli.main(["measure", "no-such-measure", "-"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        cli.main(["transform", "-", "--eta", "abc"])
    assert exc.value.code == 2


def test_transform_and_compare(capsys, monkeypatch, tmp_path):
    pr = catalog(capsys, monkeypatch, "pr:2")
    (tmp_path / "pr.json").write_text(pr)
    code, out, _ = run(capsys, monkeypatch, ["transform", "-", "--eta", "1/2"], pr)
    doc = json.loads(out)
    assert code == 0 and (doc["dA"], doc["dB"]) == (3, 3)
    code, out, _ = run(capsys, monkeypatch, ["transform", "-", "--coarse-grain", "A:1,2>1"], pr)
    (tmp_path / "cg.json").write_text(out)
    code, out, _ = run(capsys, monkeypatch, ["compare", str(tmp_path / "pr.json"), str(tmp_path / "cg.json")])
    assert json.loads(out)["holds"] is True
    code, out, _ = run(capsys, monkeypatch, ["compare", str(tmp_path / "cg.json"), str(tmp_path / "pr.json")])
    assert json.loads(out)["holds"] is False
    wiring = json.dumps({"gA": [2, 1], "hA": [[1, 2], [1, 2]], "gB": [1, 2], "hB": [[1, 2], [1, 2]]})
    (tmp_path / "w.json").write_text(wiring)
    code, out, _ = run(capsys, monkeypatch, ["transform", "-", "--wiring", str(tmp_path / "w.json")], pr)
    assert code == 0


def test_precision_syntax(capsys, monkeypatch):
    pr = catalog(capsys, monkeypatch, "pr:2")
    code, out, _ = run(capsys, monkeypatch, ["measure", "neff", "--precision", "2^-8", "-"], pr)
    lo, hi = (Fraction(v) for v in json.loads(out)["bracket"])
    assert code == 0 and 0 < hi - lo <= Fraction(1, 2**8)


def test_suite_with_figure(capsys, monkeypatch, tmp_path):
    fig = tmp_path / "suite.png"
    code, out, _ = run(capsys, monkeypatch, ["suite", "epr2", "--trials", "8", "--seed", "2", "--figure", str(fig)])
    assert code == 0
    doc = json.loads(out)
    assert doc["trials"] == 8 and "pairs" not in doc
    assert fig.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_malformed_entries(capsys, monkeypatch):
    bad = json.dumps({"mA": 1, "mB": 1, "dA": 2, "dB": 2, "p": [["1/2"], "1/2", "0", "0"]})
    code, out, _ = run(capsys, monkeypatch, ["validate", "-"], bad)
    assert code == 0 and json.loads(out)["valid"] is False
