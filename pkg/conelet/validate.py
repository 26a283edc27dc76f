""" Validate JSON artifacts and CSV records against the bundled JSON Schemas
"""

import json
import os
from functools import partial
from pprint import pformat

import jsonschema
import pandas as pd
from jsonschema import validate

from conelet.errors import ArtifactError, ArtifactSchemaError
from conelet.workers import pool_map


SCHEMA_DIR = os.path.join(os.path.dirname(__file__), "schema")

"""
A map from jsonschema data types to python data types.
"""
dtype_map = {
    "string": str,
    "number": float,
    "integer": int,
    "boolean": bool,
}


def schema_names():
    """Names of the bundled schemas, without the .json suffix"""
    return sorted(name[:-5] for name in os.listdir(SCHEMA_DIR) if name.endswith(".json"))


def load_schema(name):
    """
    Loads a bundled jsonschema by name, or from a file path.

    :param      name:  schema name (e.g. "certificate") or path to a
                       .json file
    :type       name:  str
    """
    path = name if name.endswith(".json") else os.path.join(SCHEMA_DIR, f"{name}.json")
    try:
        with open(path) as file:
            return json.load(file)
    except FileNotFoundError:
        raise ArtifactError(f"unknown schema {name!r}, available: {', '.join(schema_names())}")


def validate_record(record, schema, row=None):
    """
    Validates one JSON record.

    :param      record:  The JSON object
    :type       record:  dict
    :param      schema:  The schema to validate against
    :type       schema:  dict
    :param      row:     CSV file relative row, for the report
    :type       row:     int

    :raises     ArtifactSchemaError:  with the validation error report
    """
    try:
        validate(instance=record, schema=schema)
    except jsonschema.exceptions.ValidationError as e:
        raise ArtifactSchemaError(validation_error_report(e, row))


def validate_json_file(path, schema):
    """
    Validates a JSON artifact file.

    :param      path:    The path to the .json file
    :type       path:    str
    :param      schema:  The schema to validate against
    :type       schema:  dict

    :returns:   The loaded record
    :rtype:     dict
    """
    try:
        with open(path) as file:
            record = json.load(file)
    except json.JSONDecodeError as e:
        raise ArtifactError(f"{path} is not valid JSON: {e}")
    validate_record(record, schema)
    return record


def validate_csv_file(path, schema, chunk_size=1000, processes=1, max_fails=1, progress=False):
    """
    Validates the records of a CSV artifact.

    Records are chunked and every chunk is validated by a pool worker
    through workers.pool_map.
    Chunks are validated in file order, so the reports are in row order.

    :param      path:        The path to the .csv file
    :type       path:        str
    :param      schema:      The schema every record must satisfy
    :type       schema:      dict
    :param      chunk_size:  The number of rows within a chunk
    :type       chunk_size:  int
    :param      processes:   Number of worker processes
    :type       processes:   int
    :param      max_fails:   Maximum number of reports returned
    :type       max_fails:   int
    :param      progress:    Show a progress bar over chunks
    :type       progress:    bool

    :returns:   The validation error reports, at most max_fails of them
    :rtype:     list[str]
    """
    chunks = list(records_chunk_loader(path, schema, chunk_size))
    results = pool_map(partial(worker, schema=schema), chunks, threads=processes, progress=progress, desc="chunks")
    reports = [report for result in results for report in result]
    return reports[:max_fails]


def records_chunk_loader(csv_path, schema, chunk_size=None):
    """
    Loads the records from a CSV file path.

    Each row in the CSV file is converted into an individual JSON record
    that can be validated against the schema. The jsonschema is used by
    this function to set the data types of the loaded in records. Lines
    starting with '#' are provenance comments and are skipped.

    :param      csv_path:    The path to the CSV file
    :type       csv_path:    str
    :param      schema:      The jsonschema used to validate the CSV
                             file.
    :type       schema:      json object
    :param      chunk_size:  The number of rows within a chunk.
    :type       chunk_size:  int

    :returns:   (records, first row) per chunk, rows 1-indexed with the
                header as row 1
    :rtype:     generator of (list of json object, int)
    """
    columns = pd.read_csv(csv_path, comment="#", nrows=0).columns
    dtypes = {k: v for k, v in get_column_dtypes_from_schema(schema).items() if k in columns}
    df_chunks = pd.read_csv(
        csv_path,
        dtype=dtypes,
        comment="#",
        iterator=True,
        chunksize=chunk_size or 1000,
    )
    start_row = 2
    for df in df_chunks:
        records = json.loads(df.to_json(orient="records", double_precision=15))
        yield records, start_row
        start_row += len(records)


def get_column_dtypes_from_schema(schema):
    """
    Gets the column data types from the jsonschema.

    :param      schema:  The json schema
    :type       schema:  json object

    :returns:   A map from column name to python data type. Ready to be
                given to pandas.read_csv.
    :rtype:     dictionary
    """
    column_dtypes = dict()
    for col_name, col_details in schema["properties"].items():
        col_type = col_details["type"]
        if isinstance(col_type, list):
            col_type = next(t for t in col_type if t != "null")
        # integer columns may hold missing values, which pandas reads as float
        column_dtypes[col_name] = float if col_type == "integer" else dtype_map[col_type]
    return column_dtypes


def worker(args, schema):
    """
    Validates a chunk of records.

    :param      args:    records and the row of the first record
    :type       args:    (list[json object], int)
    :param      schema:  The json schema to validate against.
    :type       schema:  jsonschema

    :returns:   Reports on the validation errors encountered.
    :rtype:     list[str]
    """
    records, start_row = args
    reports = list()
    for relative_row, record in enumerate(records):
        record = {k: _restore_integer(v, schema, k) for k, v in record.items() if v is not None}
        try:
            validate(instance=record, schema=schema)
        except jsonschema.exceptions.ValidationError as e:
            reports.append(validation_error_report(e, start_row + relative_row))
    return reports


def validation_error_report(e, row=None):
    """
    The function responsible for generating the validation error report.

    :param      e:    The validation error.
    :type       e:    jsonschema.exceptions.ValidationError
    :param      row:  The CSV file relative row at which the validation
                      error occurred, None for JSON artifacts.
    :type       row:  int

    :returns:   The validation error report
    :rtype:     str
    """
    lines = [] if row is None else [f"row: {row}"]
    return "\n".join(
        lines
        + [
            f"{e.validator} validator failed because: {e.message}",
            "offending json element:",
            pformat(e.instance),
            f"json path: {e.json_path}",
            "applicable schema:",
            pformat(e.schema),
        ]
    )


def _restore_integer(value, schema, key):
    col_type = schema["properties"].get(key, {}).get("type")
    types = col_type if isinstance(col_type, list) else [col_type]
    if "integer" in types and isinstance(value, float) and value.is_integer():
        return int(value)
    return value
