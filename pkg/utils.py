import json
import logging
import os

import numpy as np
import pandas as pd


LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
JSON_DECIMALS = 10


def print_header(title):

    print("\n" + "=" * 60)
    print(f"  {title.upper()}")
    print("=" * 60 + "\n")


def print_success(message):

    print(f"\n SUCCESS: {message}\n")


def print_error(message):

    print(f"\n ERROR: {message}\n")


def print_info(message):

    print(f"\n INFO: {message}\n")


def print_warning(message):

    print(f"\n WARNING: {message}\n")


def configure_logging(verbosity=0, log_file=None):
    """
    Configure the root logger for one CLI invocation.

    Args:
        verbosity (int): 0 = WARNING, 1 = INFO, 2+ = DEBUG
        log_file (str, optional): Also write records to this file

    Returns:
        logging.Logger: The root logger
    """
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity >= 2:
        level = logging.DEBUG

    root = logging.getLogger()
    for handler in list(root.handlers):
        root.removeHandler(handler)
        handler.close()
    root.setLevel(level)

    console = logging.StreamHandler()
    console.setFormatter(logging.Formatter(LOG_FORMAT))
    root.addHandler(console)

    if log_file:
        attach_log_file(log_file)
    return root


def attach_log_file(log_file, level=logging.DEBUG):
    """Add a file handler to the root logger (used for error.log)."""
    ensure_dir(os.path.dirname(log_file) or ".")
    handler = logging.FileHandler(log_file, mode="w", encoding="utf-8")
    handler.setLevel(level)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    logging.getLogger().addHandler(handler)
    return handler


def ensure_dir(path):
    if path and not os.path.exists(path):
        os.makedirs(path)
    return path


def round_floats(value, decimals=JSON_DECIMALS):
    """
    Recursively round floats so reruns serialize to identical bytes.

    numpy scalars and arrays are converted to plain Python types.

    Args:
        value: Any JSON-like structure
        decimals (int): Decimal places kept

    Returns:
        The same structure with rounded floats
    """
    if isinstance(value, dict):
        return {str(k): round_floats(v, decimals) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [round_floats(v, decimals) for v in value]
    if isinstance(value, np.ndarray):
        return round_floats(value.tolist(), decimals)
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if not np.isfinite(value):
            return None
        rounded = round(value, decimals)
        return 0.0 if rounded == 0 else rounded
    return value


def write_json(data, path):
    """Write data as sorted, rounded JSON."""
    ensure_dir(os.path.dirname(path))
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(round_floats(data), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def read_json(path):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def write_csv(frame, path, index=False):
    """Write a DataFrame with a one-line header and fixed float format."""
    ensure_dir(os.path.dirname(path))
    frame.to_csv(path, index=index, float_format="%.12g", lineterminator="\n")
    return path


def matrix_frame(matrix, labels, row_labels=None):
    """Square matrix as a DataFrame with a label column and labels header."""
    frame = pd.DataFrame(np.asarray(matrix), columns=list(labels))
    frame.insert(0, "label", list(row_labels if row_labels is not None else labels))
    return frame
