import json

import numpy as np
import pytest

from archk.cli import main
from archk.io import read_matrix

SPACE = {
    "dimensions": [
        {"id": "opt", "type": "categorical", "values": ["sgd", "adam"]},
        {"id": "lr", "type": "real", "lower": -5, "upper": 0},
        {"id": "momentum", "type": "real", "lower": 0, "upper": 1},
    ],
    "conditions": [{"target": "momentum", "governor": "opt", "allowed": ["sgd"]}],
}
SPEC = {"combination": "product",
        "default": {"gamma": 0.9, "rho": 0.6, "kernel": {"type": "eq", "sigma": 1, "lengthscale": 0.7}}}


@pytest.fixture
def files(tmp_path):
    space, spec = tmp_path / "space.json", tmp_path / "spec.json"
    space.write_text(json.dumps(SPACE))
    spec.write_text(json.dumps(SPEC))
    return tmp_path, str(space), str(spec)


def test_validate(files, capsys):
    _, space, _ = files
    assert main(["validate", "--space", space]) == 0
    assert capsys.readouterr().out.strip() == "D=3 roots=opt,lr depth=2"


def test_validate_errors(tmp_path, capsys):
    cyclic = tmp_path / "cyclic.json"
    cyclic.write_text(json.dumps({
        "dimensions": [{"id": "a", "type": "categorical", "values": ["p", "q"]},
                       {"id": "b", "type": "categorical", "values": ["r", "s"]}],
        "conditions": [{"target": "a", "governor": "b", "allowed": ["r"]},
                       {"target": "b", "governor": "a", "allowed": ["p"]}],
    }))
    assert main(["validate", "--space", str(cyclic)]) == 2
    assert "CycleDetected" in capsys.readouterr().err
    assert main(["validate", "--space", str(tmp_path / "missing.json")]) == 1
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["validate", "--space", str(bad)]) == 2


def test_gram_identical_rows(files):
    tmp, space, spec = files
    data = tmp / "data.csv"
    data.write_text("opt,lr,momentum\nsgd,-1.5,0.3\nsgd,-1.5,0.3\n")
    out = tmp / "K.csv"
    assert main(["gram", "--space", space, "--spec", spec, "--data", str(data), "--out", str(out)]) == 0
    assert np.array_equal(read_matrix(out), np.ones((2, 2)))
    data.write_text("opt,lr,momentum\nadam,-2.0,\n")
    assert main(["gram", "--space", space, "--spec", spec, "--data", str(data), "--out", str(out)]) == 0
    assert read_matrix(out).shape == (1, 1)


def test_pipeline_and_tampering(files, capsys):
    tmp, space, spec = files
    data, K = tmp / "data.csv", tmp / "K.csv"
    assert main(["sample", "--space", space, "--n", "30", "--seed", "3", "--out", str(data)]) == 0
    assert main(["gram", "--space", space, "--spec", spec, "--data", str(data), "--out", str(K)]) == 0
    assert main(["psd", str(K)]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["passed"] and report["manifest"]["subcommand"] == "psd"
    # a hand-edited indefinite matrix fails
    bad = tmp / "bad.csv"
    bad.write_text("1,2\n2,1\n")
    assert main(["psd", str(bad)]) == 2
    assert "not PSD" in capsys.readouterr().err


def test_fixed_seed_is_byte_identical(files):
    tmp, space, spec = files
    data, K = tmp / "data.csv", tmp / "K.csv"
    outputs = []
    for _ in range(2):
        main(["sample", "--space", space, "--n", "12", "--seed", "5", "--out", str(data)])
        main(["gram", "--space", space, "--spec", spec, "--data", str(data), "--out", str(K)])
        outputs.append((data.read_bytes(), K.read_bytes()))
    assert outputs[0] == outputs[1]


def test_sample_is_stable(files, capsys):
    _, space, _ = files
    main(["sample", "--space", space, "--n", "5", "--seed", "7"])
    first = capsys.readouterr().out
    main(["sample", "--space", space, "--n", "5", "--seed", "7"])
    assert capsys.readouterr().out == first
    lines = [ln for ln in first.splitlines() if not ln.startswith("#")]
    assert lines[0] == "opt,lr,momentum" and len(lines) == 6
    main(["sample", "--space", space, "--n", "5", "--seed", "8"])
    assert capsys.readouterr().out != first


def test_rho_star(capsys):
    assert main(["rho-star", "--m", "2"]) == 0
    out = capsys.readouterr().out
    assert "0.7509616236" in out and "0.7320508076" in out
    assert main(["rho-star", "--m", "1"]) == 2


def test_fit_predict_interpolates(files, capsys):
    tmp, space, spec = files
    train = tmp / "train.csv"
    train.write_text("opt,lr,momentum,y\nsgd,-1.0,0.2,0.5\nadam,-3.0,,1.5\nsgd,-4.0,0.9,-0.25\n")
    model = tmp / "model.json"
    args = ["fit", "--space", space, "--spec", spec, "--data", str(train), "--noise", "0", "--out", str(model)]
    assert main(args) == 0
    summary = json.loads(model.read_text())
    assert summary["jitter"] == 0.0 and summary["n"] == 3
    query = tmp / "query.csv"
    query.write_text("opt,lr,momentum\nsgd,-1.0,0.2\nadam,-3.0,\nsgd,-4.0,0.9\n")
    assert main(["predict", "--model", str(model), "--data", str(query)]) == 0
    pred = json.loads(capsys.readouterr().out)
    np.testing.assert_allclose(pred["mean"], [0.5, 1.5, -0.25], atol=1e-6)


def test_fit_needs_noise(files, capsys):
    tmp, space, spec = files
    train = tmp / "train.csv"
    train.write_text("opt,lr,momentum,y\nsgd,-1.0,0.2,0.5\n")
    assert main(["fit", "--space", space, "--spec", spec, "--data", str(train)]) == 2


def test_invalid_rows_reported_by_line(files, capsys):
    tmp, space, spec = files
    data = tmp / "data.csv"
    data.write_text("opt,lr,momentum\nsgd,-1.0,0.5\nsgd,-1.0,\nrmsprop,-1.0,\nadam,3.0,\n")
    assert main(["gram", "--space", space, "--spec", spec, "--data", str(data)]) == 2
    err = capsys.readouterr().err
    assert "line 3: MissingActiveValue" in err
    assert "line 4: UnknownCategory" in err
    assert "line 5: ValueOutOfBounds" in err
    assert "line 2" not in err


def test_check_and_tune(files, capsys):
    tmp, space, spec = files
    assert main(["check", "--space", space, "--spec", spec, "--pairs", "200"]) == 0
    reports = [json.loads(ln) for ln in capsys.readouterr().out.splitlines()]
    assert len(reports) == 6 and all(r["passed"] for r in reports)
    data = tmp / "data.csv"
    data.write_text("opt,lr,momentum,y\nsgd,-1.0,0.2,0.5\nadam,-3.0,,1.5\nsgd,-4.0,0.9,-0.25\nadam,-0.5,,0.1\n")
    tuned = tmp / "tuned.json"
    assert main(["tune", "--space", space, "--data", str(data), "--budget", "10", "--out", str(tuned)]) == 0
    # the tuned spec feeds straight back into fit
    assert main(["fit", "--space", space, "--spec", str(tuned), "--data", str(data)]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["log_marginal_likelihood"] == pytest.approx(json.loads(tuned.read_text())["lml"], abs=1e-12)


def test_embed(files, capsys):
    tmp, space, spec = files
    data = tmp / "data.csv"
    data.write_text("opt,lr,momentum\nadam,-2.0,\n")
    assert main(["embed", "--space", space, "--spec", spec, "--data", str(data)]) == 0
    rows = json.loads(capsys.readouterr().out)["embeddings"]
    assert rows[0]["momentum"] == [0.0, 0.0]
    assert len(rows[0]["opt"]) == 2
