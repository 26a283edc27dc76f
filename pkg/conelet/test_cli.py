import json
import os

import numpy as np
import pandas as pd
import pytest

from conelet import convert
from conelet.cli import init_cli, main, run_config


def load(path):
    with open(path) as file:
        return json.load(file)


def test_design_haar(tmp_path):
    assert main(["design", "--K", "1", "--L", "1", "--out", str(tmp_path), "--quiet"]) == 0
    record = load(tmp_path / "filter_K1_L1.json")
    assert record["taps"] == pytest.approx([0.5, 0.5], abs=1e-12)
    assert record["envelope"] is None
    assert record["config"]["subcommand"] == "design"


def test_design_envelope(tmp_path):
    code = main([
        "design", "--K", "39", "--L", "18", "--Kprime", "27", "--cascade-levels", "3",
        "--envelope-points", "65", "--out", str(tmp_path), "--quiet",
    ])
    assert code == 0
    envelope = load(tmp_path / "envelope_K39_L18_Kp27.json")
    assert envelope["alpha"] == 12
    assert load(tmp_path / "filter_K39_L18.json")["envelope"]["alpha"] == 12
    phi = convert.read_csv(tmp_path / "phi_K39_L18_Kp27.csv")
    assert list(phi.columns) == ["x", "phi"]
    assert len(phi) == 56 * 8 + 1
    samples = convert.read_csv(tmp_path / "envelope_samples_K39_L18_Kp27.csv")
    assert len(samples) == 65
    assert np.all(samples["phi_hat_sq"] <= samples["upper"] * (1 + 1e-12))


def test_design_gate(tmp_path, capsys):
    assert main(["design", "--K", "3", "--L", "18", "--out", str(tmp_path), "--quiet"]) == 2
    assert "3L/2 <= K" in capsys.readouterr().err
    assert not os.listdir(tmp_path)


def test_design_gate_envelope(tmp_path, capsys):
    assert main(["design", "--K", "39", "--L", "18", "--Kprime", "38", "--out", str(tmp_path), "--quiet"]) == 2
    assert "(K-K')/(K'+L-1) >= 1/4" in capsys.readouterr().err


def test_certify_explicit_pair(tmp_path):
    code = main([
        "certify", "--K", "39", "--L", "18", "--c1", "1.0", "--c2", "0.15", "--kprime-pair", "27,15",
        "--gamma-points", "16", "--out", str(tmp_path), "--quiet",
    ])
    assert code == 0
    record = load(tmp_path / "certificate_K39_L18_c1_0.15.json")
    assert record["valid"]
    assert record["kprime_pair"] == [27, 15]
    assert record["ratio"] == pytest.approx(31.9019, rel=0.05)


def test_certify_csv(tmp_path):
    code = main([
        "certify", "--K", "39", "--L", "18", "--c1", "1.0", "--c2", "0.15", "--kprime-pair", "27,15",
        "--gamma-points", "16", "--csv", "--out", str(tmp_path), "--quiet",
    ])
    assert code == 0
    df = convert.read_csv(tmp_path / "certificate_K39_L18_c1_0.15.csv")
    assert len(df) == 1
    assert (df["kprime_L"].iloc[0], df["kprime_R"].iloc[0]) == (27, 15)


def test_certify_not_certifiable(tmp_path):
    code = main([
        "certify", "--K", "39", "--L", "18", "--c1", "1000", "--c2", "0.15", "--kprime-pair", "27,15",
        "--gamma-points", "16", "--out", str(tmp_path), "--quiet",
    ])
    assert code == 3
    record = load(tmp_path / "certificate_K39_L18_c1000_0.15.json")
    assert not record["valid"]
    assert record["ratio"] is None


def test_certify_needs_a_mode(tmp_path):
    with pytest.raises(SystemExit) as info:
        main(["certify", "--K", "39", "--L", "18", "--out", str(tmp_path)])
    assert info.value.code == 2


def test_certify_output_ignores_threads(tmp_path):
    outputs = []
    for threads in ("1", "2"):
        out = tmp_path / threads
        main([
            "certify", "--K", "39", "--L", "18", "--c1", "1.0", "--c2", "0.25", "--kprime-pair", "27,15",
            "--gamma-points", "16", "--threads", threads, "--out", str(out), "--quiet",
        ])
        outputs.append((out / "certificate_K39_L18_c1_0.25.json").read_bytes())
    assert outputs[0] == outputs[1]


def test_threads_env(monkeypatch):
    monkeypatch.delenv("CONELET_THREADS", raising=False)
    args = init_cli().parse_args(["roundtrip", "--threads", "3"])
    assert run_config(args).threads == 3
    monkeypatch.setenv("CONELET_THREADS", "5")
    assert run_config(args).threads == 5
    assert "threads" not in run_config(args).flags


def test_bad_threads_env(tmp_path, monkeypatch):
    monkeypatch.setenv("CONELET_THREADS", "many")
    assert main(["design", "--K", "1", "--L", "1", "--out", str(tmp_path), "--quiet"]) == 2


def test_roundtrip(tmp_path, capsys):
    code = main([
        "roundtrip", "--size", "64", "--ntrials", "2", "--c1", "0.5", "--c2", "0.1",
        "--out", str(tmp_path), "--quiet",
    ])
    assert code == 0
    summary = load(tmp_path / "roundtrip.json")["summary"]
    assert len(summary["trials"]) == 2
    assert summary["max_relative_error"] <= 1e-6
    captured = capsys.readouterr()
    assert "trial" not in captured.out + captured.err


def test_transform_and_back(tmp_path):
    image = np.random.default_rng(1).standard_normal((64, 64))
    np.save(tmp_path / "image.npy", image)
    forward, inverse = tmp_path / "forward", tmp_path / "inverse"
    common = ["--c1", "0.5", "--c2", "0.1", "--quiet"]
    assert main(["transform", "--image", str(tmp_path / "image.npy"), "--out", str(forward)] + common) == 0
    manifest = load(forward / "image_transform.json")
    assert manifest["outputs"] == ["image.cnlt"]
    assert main(["transform", "--coefficients", str(forward / "image.cnlt"), "--out", str(inverse)] + common) == 0
    result = np.load(inverse / "image.npy")
    assert np.linalg.norm(result - image) <= 1e-6 * np.linalg.norm(image)
    manifest = load(inverse / "image_transform.json")
    assert manifest["outputs"] == ["image.npy"]
    assert manifest["config"]["subcommand"] == "transform"


def test_transform_coefficients_carry_config(tmp_path):
    np.save(tmp_path / "image.npy", np.ones((64, 64)))
    args = ["transform", "--image", str(tmp_path / "image.npy"), "--out", str(tmp_path), "--seed", "7", "--quiet"]
    assert main(args) == 0
    data = (tmp_path / "image.cnlt").read_bytes()
    length = int.from_bytes(data[8:16], "little")
    header = json.loads(data[16:16 + length])
    assert header["config"]["subcommand"] == "transform"
    assert header["config"]["seed"] == 7
    assert "conelet_version" in header


def test_transform_missing_image(tmp_path):
    assert main(["transform", "--image", str(tmp_path / "missing.pgm"), "--out", str(tmp_path), "--quiet"]) == 4


def test_transform_rejects_odd_size(tmp_path):
    np.save(tmp_path / "image.npy", np.zeros((48, 48)))
    assert main(["transform", "--image", str(tmp_path / "image.npy"), "--out", str(tmp_path), "--quiet"]) == 2


def test_bench(tmp_path):
    code = main([
        "bench", "--K", "15", "--L", "10", "--size", "64", "--ntrials", "1", "--smooth-only",
        "--n-list", "64,128,256,512", "--n-range", "64,512", "--svg", "--out", str(tmp_path), "--quiet",
    ])
    assert code == 0
    curves = convert.read_csv(tmp_path / "decay.csv")
    assert list(curves.columns) == ["seed", "system", "N", "err", "err_deflated"]
    assert len(curves) == 8
    slopes = convert.read_csv(tmp_path / "slopes.csv")
    assert "deflated_slope" in slopes
    assert (tmp_path / "decay.svg").read_text().lstrip().startswith("<?xml")
    manifest = load(tmp_path / "bench.json")
    assert manifest["outputs"] == ["decay.csv", "slopes.csv", "decay.svg"]
    assert {row["system"] for row in manifest["summary"]["slopes"]} == {"shearlet", "wavelet"}


def test_validate_artifacts(tmp_path):
    main(["design", "--K", "2", "--L", "2", "--out", str(tmp_path), "--quiet"])
    path = str(tmp_path / "filter_K2_L2.json")
    assert main(["validate", "--schema", "filter", path, "--quiet"]) == 0
    assert main(["validate", "--schema", "certificate", path, "--quiet"]) == 4


def test_validate_csv_records(tmp_path, capsys):
    df = pd.DataFrame({"kprime_L": [27, 27], "kprime_R": [15, 16], "ratio": [31.9, 0.2]})
    convert.write_csv(tmp_path / "scanned.csv", df, {})
    assert main(["validate", "--schema", "scanned_pairs", str(tmp_path / "scanned.csv"), "--quiet"]) == 4
    assert "row: 3" in capsys.readouterr().out
