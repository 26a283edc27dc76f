""" Functions to standardize the column order and types of emitted tables
"""

import numpy as np
import pandas as pd


def table1(df):
    """Standardize a frame bound ratio table

    Args:
        df (pandas.DataFrame): rows from frame_certification.table1, with
            kprime_L and kprime_R columns

    Returns:
        df (pandas.DataFrame): K, L, c1, c2, Kprime_pair ("a,b"), ratio,
            printed_ratio and relative_deviation

    Example:
        >>> df = set_type.table1(frame_certification.table1())
    """
    df = df.copy()
    df["Kprime_pair"] = df["kprime_L"].astype(int).astype(str) + "," + df["kprime_R"].astype(int).astype(str)
    int_cols = ["K", "L"]
    float_cols = ["c1", "c2", "ratio", "printed_ratio", "relative_deviation"]
    for col in float_cols:
        if col not in df:
            df[col] = np.nan
    df[int_cols] = df[int_cols].astype(int)
    df[float_cols] = df[float_cols].astype(float)
    return df[["K", "L", "c1", "c2", "Kprime_pair", "ratio", "printed_ratio", "relative_deviation"]]


def decay_curve(df):
    """Standardize N-term decay curves

    Long format curves keep their seed and system columns in front.
    """
    leading = [col for col in ("seed", "system") if col in df]
    df = df[leading + ["N", "err", "err_deflated"]].copy()
    df["N"] = df["N"].astype(int)
    df[["err", "err_deflated"]] = df[["err", "err_deflated"]].astype(float)
    if "seed" in df:
        df["seed"] = df["seed"].astype(int)
    if "system" in df:
        df["system"] = df["system"].astype(str)
    return df


def slopes(df):
    df = df[["seed", "system", "slope", "deflated_slope"]].copy()
    df["seed"] = df["seed"].astype(int)
    df["system"] = df["system"].astype(str)
    df[["slope", "deflated_slope"]] = df[["slope", "deflated_slope"]].astype(float)
    return df


def phi_samples(df):
    return df[["x", "phi"]].astype(float)


def envelope_samples(df):
    return df[["xi", "phi_hat_sq", "lower", "upper"]].astype(float)


def scanned_pairs(df):
    """Standardize the K' pairs scanned by kprime_search."""
    df = df[["kprime_L", "kprime_R", "ratio"]].copy()
    df[["kprime_L", "kprime_R"]] = df[["kprime_L", "kprime_R"]].astype(int)
    df["ratio"] = df["ratio"].astype(float)
    return df.sort_values(["kprime_L", "kprime_R"], kind="stable").reset_index(drop=True)


def certificates(records):
    """One row per certificate, list fields split into scalar columns

    Args:
        records (list of dict): certificate_to_dict outputs

    Returns:
        df (pandas.DataFrame)
    """
    rows = []
    for record in records:
        row = dict(record)
        row["kprime_L"], row["kprime_R"] = row.pop("kprime_pair")
        row["c1"], row["c2"] = row.pop("c")
        rows.append(row)
    df = pd.DataFrame(rows)
    leading = ["K", "L", "c1", "c2", "kprime_L", "kprime_R", "plane", "ratio", "valid"]
    return df[leading + [col for col in df.columns if col not in leading]]
