import json
import math

import numpy as np
import pandas as pd
import pytest

from conelet import __version__, convert
from conelet.errors import ArtifactError, ArtifactSchemaError
from conelet.filter_design import FilterParams, filter_to_dict, halfband_power
from conelet.shearlet_transform import adjoint, analyze


@pytest.fixture
def gradient():
    return np.add.outer(np.arange(8), np.arange(16)) / 22.0


def test_read_plain_pgm(tmp_path):
    path = tmp_path / "plain.pgm"
    path.write_text("P2\n# two by three\n3 2\n4\n0 1 2\n3 4 0\n")
    image = convert.read_pgm(path)
    assert image.shape == (2, 3)
    assert np.array_equal(image, np.array([[0, 1, 2], [3, 4, 0]]) / 4.0)


@pytest.mark.parametrize("maxval", [255, 65535])
def test_raw_pgm(tmp_path, gradient, maxval):
    path = tmp_path / "raw.pgm"
    convert.write_pgm(path, gradient, maxval=maxval)
    image = convert.read_pgm(path)
    assert image.shape == gradient.shape
    assert np.max(np.abs(image - gradient)) <= 0.5 / maxval + 1e-15


def test_pgm_clips(tmp_path):
    path = tmp_path / "clip.pgm"
    convert.write_pgm(path, np.array([[-1.0, 2.0]]))
    assert np.array_equal(convert.read_pgm(path), np.array([[0.0, 1.0]]))


def test_bad_pgm(tmp_path):
    colour = tmp_path / "colour.ppm"
    colour.write_bytes(b"P6\n1 1\n255\n\x00\x00\x00")
    with pytest.raises(ArtifactError):
        convert.read_pgm(colour)
    truncated = tmp_path / "truncated.pgm"
    truncated.write_bytes(b"P5\n4 4\n255\n\x00\x01")
    with pytest.raises(ArtifactError):
        convert.read_pgm(truncated)
    overflow = tmp_path / "overflow.pgm"
    overflow.write_text("P2\n2 1\n10\n3 11\n")
    with pytest.raises(ArtifactError):
        convert.read_pgm(overflow)


def test_read_image_npy(tmp_path, gradient):
    path = tmp_path / "image.npy"
    np.save(path, gradient)
    assert np.array_equal(convert.read_image(str(path)), gradient)
    np.save(path, np.zeros(4))
    with pytest.raises(ArtifactError):
        convert.read_image(str(path))


def test_coefficient_container(tmp_path, system_64_decimated):
    rng = np.random.default_rng(5)
    coeffs = analyze(system_64_decimated, rng.standard_normal((64, 64)))
    path = tmp_path / "coeffs.cnlt"
    convert.write_coefficients(path, system_64_decimated, coeffs)
    loaded = convert.read_coefficients(path)
    assert loaded.header == system_64_decimated.header
    assert loaded.index == system_64_decimated.index
    assert np.array_equal(loaded.flatten(), coeffs.flatten())
    # the loaded set is accepted by the system it came from
    assert np.array_equal(adjoint(system_64_decimated, loaded), adjoint(system_64_decimated, coeffs))


def test_coefficient_container_layout(tmp_path, system_64):
    coeffs = analyze(system_64, np.ones((64, 64)))
    path = tmp_path / "coeffs.cnlt"
    convert.write_coefficients(path, system_64, coeffs)
    data = path.read_bytes()
    assert data[:8] == convert.COEFFICIENT_MAGIC
    length = int.from_bytes(data[8:16], "little")
    header = json.loads(data[16:16 + length])
    assert header["kind"] == "shearlet"
    assert len(header["subbands"]) == len(system_64)
    assert len(data) == 16 + length + 8 * coeffs.count


def test_bad_coefficient_container(tmp_path, system_64):
    path = tmp_path / "coeffs.cnlt"
    path.write_bytes(b"NOTCONELET")
    with pytest.raises(ArtifactError):
        convert.read_coefficients(path)
    convert.write_coefficients(path, system_64, analyze(system_64, np.zeros((64, 64))))
    path.write_bytes(path.read_bytes()[:-8])
    with pytest.raises(ArtifactError):
        convert.read_coefficients(path)


def test_to_jsonable():
    record = convert.to_jsonable({"a": (np.float64(1.5), math.inf), "b": np.int64(3), "c": np.bool_(True)})
    assert record == {"a": [1.5, None], "b": 3, "c": True}
    assert type(record["b"]) is int


def test_write_json(tmp_path, haar):
    path = tmp_path / "filter.json"
    record = filter_to_dict(haar, halfband_power(FilterParams(1, 1)))
    written = convert.write_json(path, record, "filter", {"seed": 0})
    text = path.read_text()
    assert json.loads(text) == written
    assert written["conelet_version"] == __version__
    assert written["config"] == {"seed": 0}
    keys = list(json.loads(text))
    assert keys == sorted(keys)


def test_write_json_validates_first(tmp_path):
    path = tmp_path / "filter.json"
    with pytest.raises(ArtifactSchemaError):
        convert.write_json(path, {"K": 1, "L": 1}, "filter", {})
    assert not path.exists()


def test_csv_round_trip(tmp_path):
    df = pd.DataFrame({"N": [64, 128], "err": [1 / 3, 2e-17], "err_deflated": [0.1, 0.2]})
    path = tmp_path / "decay.csv"
    convert.write_csv(path, df, {"subcommand": "bench"})
    first = path.read_text().splitlines()[0]
    assert first == f'# conelet {__version__} {{"subcommand":"bench"}}'
    pd.testing.assert_frame_equal(convert.read_csv(path), df)


def test_coefficient_container_provenance(tmp_path, system_64):
    coeffs = analyze(system_64, np.ones((64, 64)))
    path = tmp_path / "coeffs.cnlt"
    convert.write_coefficients(path, system_64, coeffs, {"subcommand": "transform", "seed": 3})
    data = path.read_bytes()
    length = int.from_bytes(data[8:16], "little")
    header = json.loads(data[16:16 + length])
    assert header["conelet_version"] == __version__
    assert header["config"] == {"subcommand": "transform", "seed": 3}
    # provenance stays out of the header the system is rebuilt from
    loaded = convert.read_coefficients(path)
    assert loaded.header == system_64.header
    assert np.array_equal(loaded.flatten(), coeffs.flatten())
