"""
Ingest module for the crude oil correlation toolkit

This module loads raw price files, aligns and repairs them, turns prices into
log-returns with abnormal moves removed, and standardizes the returns.
"""

import logging
import os
import warnings

import numpy as np
import pandas as pd
from scipy import stats

from models import InputError, NumericalError, PricePanel, ReturnPanel
from utils import read_json, write_csv, write_json


logger = logging.getLogger(__name__)

DEFAULT_DELTA_T = 1
WEEKLY_DELTA_T = 7
DEFAULT_CLIP_THRESHOLD = 0.40
LONG_COLUMNS = ("date", "label", "price")
ISO_DATE_FORMAT = "%Y-%m-%d"


# ----------------------------- Loading ----------------------------------

def _read_table(source):
    try:
        return pd.read_csv(source, dtype=str, skipinitialspace=True)
    except FileNotFoundError as e:
        raise InputError(f"Price file not found: {source}") from e
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError, ValueError) as e:
        raise InputError(f"Cannot parse price file {source}: {e}") from e


def _parse_dates(values):
    """ISO dates first; anything else goes through the dateutil parser quietly."""
    text = pd.Series(values).reset_index(drop=True).astype(str).str.strip()
    parsed = pd.to_datetime(text, format=ISO_DATE_FORMAT, errors="coerce")
    if parsed.isna().any():
        rest = parsed.isna()
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", UserWarning)
            parsed[rest] = pd.to_datetime(text[rest], errors="coerce")
    if parsed.isna().any():
        bad = text[parsed.isna()].iloc[0]
        raise InputError(f"Unparseable date '{bad}'")
    return parsed.dt.date.tolist()


def _numeric_prices(raw):
    """Convert a string frame to floats; blanks become NaN, garbage is an error."""
    numeric = raw.apply(pd.to_numeric, errors="coerce")
    text = raw.fillna("").astype(str).apply(lambda col: col.str.strip())
    blank = text.apply(lambda col: col.str.lower().isin(["", "nan", "na", "n/a", "null"]))
    garbage = numeric.isna() & ~blank
    if garbage.to_numpy().any():
        col = garbage.any(axis=0).idxmax()
        raise InputError(f"Non-numeric price in series '{col}'")
    return numeric.astype(float)


def _wide_frame(table):
    if table.shape[1] < 3:
        raise InputError("Wide layout needs a date column and at least 2 series")
    date_col = table.columns[0]
    dates = _parse_dates(table[date_col])
    prices = _numeric_prices(table.drop(columns=[date_col]))
    prices.index = dates
    if prices.index.has_duplicates:
        raise InputError("Duplicate dates in price file")
    return prices


def _long_frame(table):
    columns = {c.strip().lower(): c for c in table.columns}
    missing = [c for c in LONG_COLUMNS if c not in columns]
    if missing:
        raise InputError(f"Long layout needs columns {LONG_COLUMNS}, missing {missing}")
    frame = pd.DataFrame({
        "date": _parse_dates(table[columns["date"]]),
        "label": table[columns["label"]].astype(str).str.strip(),
        "price": _numeric_prices(table[[columns["price"]]]).iloc[:, 0].to_numpy(),
    })
    if frame.duplicated(subset=["date", "label"]).any():
        raise InputError("Duplicate (date, label) rows in price file")
    labels = list(dict.fromkeys(frame["label"]))
    prices = frame.pivot(index="date", columns="label", values="price")
    return prices[labels]


def load_panel(source, layout="wide", align="intersection"):
    """
    Load a delimited price file into an aligned, repaired PricePanel.

    Non-positive prices are treated as missing. Missing cells are forward
    filled from the previous available day; gaps before a series' first
    observation (only possible with align='union') are backward filled.

    Args:
        source (str): Path or buffer of the delimited file
        layout (str): 'wide' (date + one column per series) or 'long' (date, label, price)
        align (str): 'intersection' keeps dates every series covers, 'union' keeps all rows

    Returns:
        PricePanel: Aligned panel with its fill log

    Raises:
        InputError: Unparseable file, missing series, unrepairable prices
    """
    if layout not in ("wide", "long"):
        raise InputError(f"Unknown layout '{layout}'")
    if align not in ("intersection", "union"):
        raise InputError(f"Unknown align mode '{align}'")

    table = _read_table(source)
    prices = _wide_frame(table) if layout == "wide" else _long_frame(table)
    prices = prices.sort_index()
    prices.columns = [str(c).strip() for c in prices.columns]
    if len(set(prices.columns)) != len(prices.columns):
        raise InputError("Duplicate series labels in price file")

    non_positive = prices <= 0
    if non_positive.to_numpy().any():
        logger.warning("Treating %d non-positive prices as missing", int(non_positive.to_numpy().sum()))
        prices = prices.mask(non_positive)

    empty = [c for c in prices.columns if prices[c].isna().all()]
    if empty:
        raise InputError(f"Series entirely missing: {', '.join(empty)}")

    if align == "intersection":
        start = max(prices[c].first_valid_index() for c in prices.columns)
        end = min(prices[c].last_valid_index() for c in prices.columns)
        if start > end:
            raise InputError("Series do not share a common date range")
        prices = prices.loc[start:end]

    if prices.shape[0] < 2 or prices.shape[1] < 2:
        raise InputError("At least 2 dates and 2 series are required")

    missing = prices.isna()
    forward = prices.ffill()
    leading = forward.isna()
    repaired = forward.bfill()
    if repaired.isna().to_numpy().any():
        raise InputError("Price panel cannot be repaired")

    fill_log = []
    dates = list(prices.index)
    for j, label in enumerate(prices.columns):
        for i in np.flatnonzero(missing.iloc[:, j].to_numpy()):
            method = "bfill" if leading.iat[i, j] else "ffill"
            fill_log.append((label, dates[i], method))
    n_back = sum(1 for entry in fill_log if entry[2] == "bfill")
    if n_back:
        logger.warning("Backward filled %d leading cells", n_back)

    panel = PricePanel(dates, list(prices.columns), repaired.to_numpy(dtype=float), fill_log)
    is_valid, error = panel.validate()
    if not is_valid:
        raise InputError(error)
    logger.info("Loaded %d dates x %d series (%d cells repaired)", panel.shape[0], panel.shape[1], len(fill_log))
    return panel


# ----------------------------- Returns ----------------------------------

def compute_returns(panel, delta_t=DEFAULT_DELTA_T, clip_threshold=DEFAULT_CLIP_THRESHOLD):
    """
    Log-returns over delta_t rows with abnormal moves removed.

    r_i(t) = ln P_i(t) - ln P_i(t - delta_t), differences overlap when
    delta_t > 1. Returns with |r| above clip_threshold are set to 0.

    Args:
        panel (PricePanel): Repaired price panel
        delta_t (int): Horizon in rows
        clip_threshold (float): Largest admissible |r|

    Returns:
        ReturnPanel: Returns, population moments and the clip log

    Raises:
        InputError: Bad horizon or threshold
        NumericalError: A series has zero variance after clipping
    """
    t = panel.prices.shape[0]
    if int(delta_t) != delta_t or delta_t < 1 or delta_t >= t:
        raise InputError(f"delta_t must be an integer in [1, {t - 1}]")
    if clip_threshold <= 0:
        raise InputError("clip_threshold must be positive")
    delta_t = int(delta_t)

    log_prices = np.log(panel.prices)
    returns = log_prices[delta_t:] - log_prices[:-delta_t]
    dates = panel.dates[delta_t:]

    mask = np.abs(returns) > clip_threshold
    clipped = []
    for j in range(returns.shape[1]):
        for i in np.flatnonzero(mask[:, j]):
            clipped.append((panel.labels[j], dates[i]))
    returns[mask] = 0.0
    if clipped:
        logger.info("Removed %d returns above %.2f", len(clipped), clip_threshold)

    means = returns.mean(axis=0)
    stddevs = returns.std(axis=0)
    flat = [panel.labels[j] for j in np.flatnonzero(stddevs <= 0)]
    if flat:
        raise NumericalError(f"Zero variance after clipping: {', '.join(flat)}")

    return ReturnPanel(returns, delta_t, means, stddevs, clipped, labels=panel.labels, dates=dates)


def standardize(panel):
    """
    Standardized returns g_i(t) = (r_i(t) - <r_i>) / sigma_i.

    Args:
        panel (ReturnPanel): Panel with positive stddevs

    Returns:
        np.ndarray: Matrix with column mean 0 and population variance 1
    """
    if np.any(panel.stddevs <= 0):
        raise NumericalError("Cannot standardize a series with zero variance")
    return (panel.returns - panel.means) / panel.stddevs


def summary_statistics(panel, clusters=None):
    """
    Per-series descriptive statistics of the returns.

    Kurtosis is reported in the non-excess convention (normal = 3).

    Args:
        panel (ReturnPanel): Return panel
        clusters (sequence, optional): Cluster id per series

    Returns:
        pd.DataFrame: One row per series
    """
    r = panel.returns
    table = pd.DataFrame({
        "label": panel.labels,
        "length": np.full(r.shape[1], r.shape[0]),
        "max": r.max(axis=0),
        "min": r.min(axis=0),
        "mean": panel.means,
        "std": panel.stddevs,
        "skewness": stats.skew(r, axis=0, bias=True),
        "kurtosis": stats.kurtosis(r, axis=0, fisher=False, bias=True),
    })
    if clusters is not None:
        table["cluster"] = np.asarray(clusters, dtype=int)
    return table


def market_averages(prices, returns):
    """
    Average price <P(t)> and average log-return <r(t)> on the price dates.

    The first delta_t rows have no return and carry NaN.

    Args:
        prices (PricePanel): Price panel
        returns (ReturnPanel): Returns computed from it

    Returns:
        pd.DataFrame: date, average_price, average_return
    """
    average_return = np.full(len(prices.dates), np.nan)
    average_return[returns.delta_t:] = returns.returns.mean(axis=1)
    return pd.DataFrame({
        "date": [d.isoformat() for d in prices.dates],
        "average_price": prices.average_price(),
        "average_return": average_return,
    })


# ------------------------------ Files -----------------------------------

def sidecar_path(path):
    return os.path.splitext(path)[0] + ".json"


def write_panel(panel, path):
    """Write a PricePanel in the wide layout load_panel reads."""
    frame = pd.DataFrame(panel.prices, columns=panel.labels)
    frame.insert(0, "date", [d.isoformat() for d in panel.dates])
    return write_csv(frame, path)


def write_returns(panel, path, extra=None):
    """
    Write returns as delimited text plus a JSON sidecar.

    Args:
        panel (ReturnPanel): Panel to write
        path (str): CSV path; the sidecar shares its stem
        extra (dict, optional): Additional sidecar fields (config echo)

    Returns:
        tuple: (csv_path, json_path)
    """
    frame = pd.DataFrame(panel.returns, columns=panel.labels)
    if panel.dates is not None:
        frame.insert(0, "date", [d.isoformat() for d in panel.dates])
    write_csv(frame, path)
    sidecar = panel.to_dict()
    if extra:
        sidecar.update(extra)
    return path, write_json(sidecar, sidecar_path(path))


def read_returns(path):
    """
    Read a return file written by write_returns.

    Moments are recomputed from the matrix as read; the sidecar copies are
    rounded and would leave standardized columns off by ~1e-9.

    Returns:
        ReturnPanel: Panel with recomputed moments and the sidecar clip log
    """
    try:
        frame = pd.read_csv(path)
        meta = read_json(sidecar_path(path))
    except FileNotFoundError as e:
        raise InputError(f"Return file or sidecar not found: {e.filename}") from e
    except (pd.errors.ParserError, pd.errors.EmptyDataError, ValueError) as e:
        raise InputError(f"Cannot parse return file {path}: {e}") from e

    dates = None
    if "date" in frame.columns:
        dates = _parse_dates(frame.pop("date"))
    labels = [str(c) for c in frame.columns]
    if labels != [str(label) for label in meta.get("labels", labels)]:
        raise InputError("Return file columns do not match its sidecar")
    clipped = [(label, d) for label, d in meta.get("clipped", [])]
    returns = frame.to_numpy(dtype=float)
    panel = ReturnPanel(returns, meta.get("delta_t", 1), returns.mean(axis=0), returns.std(axis=0),
                        clipped, labels=labels, dates=dates)
    is_valid, error = panel.validate()
    if not is_valid:
        raise InputError(error)
    return panel
