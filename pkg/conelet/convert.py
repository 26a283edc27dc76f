""" Functions to convert images, coefficients and tables to and from files

Coefficient container layout::

    b"CONELET1"                      magic
    uint64 little endian             length of the JSON header in bytes
    JSON header (UTF-8, sorted keys) system.describe(), plus conelet_version
                                     and config when a configuration is given
    float64 little endian            every subband grid, row major, in order
"""

import json
import math
import struct

import numpy as np
import pandas as pd

from conelet import __version__
from conelet.errors import ArtifactError, DimensionMismatchError
from conelet.shearlet_transform import CoefficientSet
from conelet.validate import load_schema, validate_record


COEFFICIENT_MAGIC = b"CONELET1"
PGM_MAXVAL = 65535
CSV_FLOAT_FORMAT = "%.17g"
PROVENANCE_KEYS = ("conelet_version", "config")


def read_pgm(path):
    """Read a greyscale PGM image

    Both the plain (P2) and the raw (P5) variants are accepted, with maxval
    up to 65535. Comments start with '#' and run to the end of the line.

    Args:
        path (str): image file

    Returns:
        image (numpy.ndarray): float64 values scaled to [0, 1]

    Raises:
        ArtifactError: on a malformed file
    """
    with open(path, "rb") as file:
        data = file.read()
    tokens, offset = _pgm_header(data, path)
    magic, width, height, maxval = tokens
    count = width * height
    if magic == b"P2":
        try:
            values = np.array(data[offset:].split(), dtype=np.int64)
        except ValueError:
            raise ArtifactError(f"{path}: non numeric pixel in plain PGM")
        if values.size != count:
            raise ArtifactError(f"{path}: expected {count} pixels, found {values.size}")
    else:
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        body = data[offset:offset + count * dtype.itemsize]
        if len(body) != count * dtype.itemsize:
            raise ArtifactError(f"{path}: truncated raw PGM")
        values = np.frombuffer(body, dtype=dtype).astype(np.int64)
    if values.min(initial=0) < 0 or values.max(initial=0) > maxval:
        raise ArtifactError(f"{path}: pixel outside [0, {maxval}]")
    return values.reshape(height, width) / float(maxval)


def write_pgm(path, image, maxval=PGM_MAXVAL):
    """Write an image as a raw (P5) PGM

    Values are clipped to [0, 1] and rounded to the maxval grid.

    Args:
        path (str): output file
        image (numpy.ndarray): 2D array
        maxval (int): 255 or 65535
    """
    image = np.asarray(image, dtype=float)
    if image.ndim != 2:
        raise DimensionMismatchError(f"dimension mismatch: PGM images are 2D, got shape {image.shape}")
    if maxval not in (255, 65535):
        raise ArtifactError(f"unsupported PGM maxval {maxval}")
    levels = np.rint(np.clip(image, 0.0, 1.0) * maxval)
    dtype = ">u2" if maxval > 255 else "u1"
    height, width = image.shape
    with open(path, "wb") as file:
        file.write(f"P5\n{width} {height}\n{maxval}\n".encode("ascii"))
        file.write(levels.astype(dtype).tobytes())


def read_image(path):
    """Read a PGM image or a .npy array."""
    if str(path).endswith(".npy"):
        try:
            image = np.load(path, allow_pickle=False)
        except ValueError as e:
            raise ArtifactError(f"{path}: {e}")
        if image.ndim != 2:
            raise ArtifactError(f"{path}: expected a 2D array, got shape {image.shape}")
        return image.astype(float)
    return read_pgm(path)


def write_coefficients(path, system, coeffs, config=None):
    """Store a coefficient set with the description of its system

    Args:
        path (str): output file
        system (SubbandSystem): the system the coefficients belong to
        coeffs (CoefficientSet): analysis output of ``system``
        config (dict): run configuration echo, stored in the header
    """
    if tuple(coeffs.index) != system.index or coeffs.shapes != system.shapes:
        raise DimensionMismatchError("dimension mismatch: coefficients belong to another system")
    description = system.describe()
    if config is not None:
        description.update(provenance(config))
    header = json.dumps(to_jsonable(description), sort_keys=True).encode("utf-8")
    with open(path, "wb") as file:
        file.write(COEFFICIENT_MAGIC)
        file.write(struct.pack("<Q", len(header)))
        file.write(header)
        for values in coeffs.arrays:
            file.write(np.ascontiguousarray(values, dtype="<f8").tobytes())


def read_coefficients(path):
    """Load a coefficient container

    Args:
        path (str): container written by write_coefficients

    Returns:
        coeffs (CoefficientSet): header and index as stored, without the
            provenance keys; they match a system rebuilt from the same
            parameters

    Raises:
        ArtifactError: on a bad magic, header or payload length
    """
    with open(path, "rb") as file:
        data = file.read()
    if not data.startswith(COEFFICIENT_MAGIC):
        raise ArtifactError(f"{path}: not a conelet coefficient file")
    start = len(COEFFICIENT_MAGIC) + 8
    if len(data) < start:
        raise ArtifactError(f"{path}: truncated header")
    (length,) = struct.unpack("<Q", data[len(COEFFICIENT_MAGIC):start])
    try:
        description = json.loads(data[start:start + length].decode("utf-8"))
        subbands = description.pop("subbands")
        for key in PROVENANCE_KEYS:
            description.pop(key, None)
        index = tuple((b["cone"], b["j"], b["k"]) for b in subbands)
        shapes = [tuple(b["shape"]) for b in subbands]
    except (UnicodeDecodeError, ValueError, KeyError, TypeError) as e:
        raise ArtifactError(f"{path}: bad coefficient header ({e})")

    payload = np.frombuffer(data[start + length:], dtype="<f8")
    sizes = [rows * cols for rows, cols in shapes]
    if payload.size != sum(sizes) or len(data) - start - length != 8 * sum(sizes):
        raise ArtifactError(f"{path}: expected {sum(sizes)} coefficients, found {payload.size}")
    bounds = np.cumsum([0] + sizes)
    arrays = tuple(
        payload[a:b].astype(float).reshape(shape) for a, b, shape in zip(bounds[:-1], bounds[1:], shapes)
    )
    return CoefficientSet(description, index, arrays)


def to_jsonable(value):
    """Plain python copy of a record: numpy scalars unwrapped, tuples as
    lists, non finite floats as None"""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def provenance(config):
    """Version and configuration echo embedded in every artifact."""
    return {"conelet_version": __version__, "config": to_jsonable(config)}


def write_json(path, record, schema_name, config):
    """Validate and write a JSON artifact

    Args:
        path (str): output file
        record (dict): artifact body
        schema_name (str): schema under conelet/schema
        config (dict): run configuration echo

    Returns:
        record (dict): the record as written

    Raises:
        ArtifactSchemaError: if the record fails its schema
    """
    record = dict(to_jsonable(record), **provenance(config))
    validate_record(record, load_schema(schema_name))
    with open(path, "w") as file:
        json.dump(record, file, sort_keys=True, indent=2, allow_nan=False)
        file.write("\n")
    return record


def write_csv(path, df, config):
    """Write a table after a '# conelet <version> <config>' comment line

    Args:
        path (str): output file
        df (pandas.DataFrame): table, columns already ordered by set_type
        config (dict): run configuration echo
    """
    comment = json.dumps(to_jsonable(config), sort_keys=True, separators=(",", ":"))
    with open(path, "w", newline="") as file:
        file.write(f"# conelet {__version__} {comment}\n")
        df.to_csv(file, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")


def read_csv(path):
    """Read a table written by write_csv, skipping comment lines."""
    return pd.read_csv(path, comment="#")


def _pgm_header(data, path):
    tokens = []
    position = 0
    while len(tokens) < 4:
        while position < len(data) and data[position:position + 1].isspace():
            position += 1
        if data[position:position + 1] == b"#":
            end = data.find(b"\n", position)
            position = len(data) if end < 0 else end + 1
            continue
        start = position
        while position < len(data) and not data[position:position + 1].isspace():
            position += 1
        if start == position:
            raise ArtifactError(f"{path}: truncated PGM header")
        tokens.append(data[start:position])
    magic = tokens[0]
    if magic not in (b"P2", b"P5"):
        raise ArtifactError(f"{path}: not a greyscale PGM (magic {magic!r})")
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError:
        raise ArtifactError(f"{path}: bad PGM header")
    if width < 1 or height < 1 or not 0 < maxval <= PGM_MAXVAL:
        raise ArtifactError(f"{path}: bad PGM size or maxval")
    # a single whitespace byte separates the header from raw pixels
    return (magic, width, height, maxval), position + 1
