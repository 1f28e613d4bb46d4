"""
Correlation module for the crude oil correlation toolkit

Cross-correlation matrix of standardized returns and the distribution of its
off-diagonal coefficients.
"""

import logging

import numpy as np
import pandas as pd
from scipy.signal import find_peaks

from ingest import sidecar_path
from models import CoefficientHistogram, CorrelationMatrix, InputError
from utils import matrix_frame, read_json, write_csv, write_json


logger = logging.getLogger(__name__)

DEFAULT_BINS = 50
DEFAULT_PROMINENCE = 0.05


def correlation_matrix(g, labels=None):
    """
    c_ij = <g_i(t) g_j(t)>, the time average of products of standardized returns.

    Each entry is summed over time on its own (numpy pairwise summation), so
    the result does not depend on BLAS threading. The matrix is filled
    symmetrically, the diagonal is set to exactly 1 and entries are clipped
    to [-1, 1].

    Args:
        g (np.ndarray): T x N standardized returns
        labels (list, optional): Series identifiers

    Returns:
        CorrelationMatrix: The coefficient matrix

    Raises:
        InputError: Fewer than 2 time samples
    """
    g = np.asarray(g, dtype=float)
    if g.ndim != 2 or g.shape[0] < 2:
        raise InputError("At least 2 time samples are required")
    t, n = g.shape
    if labels is None:
        labels = [f"S{i + 1}" for i in range(n)]

    c = np.empty((n, n))
    for i in range(n):
        row = (g[:, i:i + 1] * g[:, i:]).sum(axis=0) / t
        c[i, i:] = row
        c[i:, i] = row
    np.clip(c, -1.0, 1.0, out=c)
    np.fill_diagonal(c, 1.0)
    return CorrelationMatrix(labels, c, t)


def mean_offdiagonal(c):
    """Mean of the N(N-1)/2 coefficients above the diagonal."""
    if c.n < 2:
        raise InputError("Need at least 2 series")
    return float(np.mean(c.upper_triangle()))


def count_peaks(densities, prominence=DEFAULT_PROMINENCE):
    """
    Local maxima of a density with prominence >= prominence * max density.

    The density is padded with zeros so peaks in the outer bins count.

    Returns:
        np.ndarray: Bin indices of the peaks
    """
    densities = np.asarray(densities, dtype=float)
    if densities.size == 0 or densities.max() <= 0:
        return np.array([], dtype=int)
    padded = np.concatenate([[0.0], densities, [0.0]])
    peaks, _ = find_peaks(padded, prominence=prominence * densities.max())
    return peaks - 1


def coefficient_histogram(c, n_bins=DEFAULT_BINS, prominence=DEFAULT_PROMINENCE):
    """
    Density-normalized histogram of the off-diagonal coefficients.

    Args:
        c (CorrelationMatrix): Coefficient matrix
        n_bins (int): Number of bins over the observed range
        prominence (float): Relative prominence a local maximum needs to count as a peak

    Returns:
        CoefficientHistogram: Edges, densities, pair count and peaks
    """
    if c.n < 2:
        raise InputError("Need at least 2 series")
    if n_bins < 1:
        raise InputError("n_bins must be positive")
    values = c.upper_triangle()
    densities, edges = np.histogram(values, bins=n_bins, density=True)
    peaks = count_peaks(densities, prominence)
    centers = 0.5 * (edges[:-1] + edges[1:])
    logger.info("Coefficient distribution has %d peak(s)", len(peaks))
    return CoefficientHistogram(edges, densities, values.size, len(peaks), centers[peaks].tolist())


# ------------------------------ Files -----------------------------------

def write_correlation(c, path, extra=None):
    """Write the matrix as CSV (labels header) and JSON sidecar."""
    write_csv(matrix_frame(c.c, c.labels), path)
    meta = {"labels": c.labels, "t_effective": c.t_effective}
    if extra:
        meta.update(extra)
    return path, write_json(meta, sidecar_path(path))


def read_correlation(path):
    """
    Read a matrix written by write_correlation.

    Returns:
        CorrelationMatrix: Matrix with labels and t_effective
    """
    try:
        frame = pd.read_csv(path)
        meta = read_json(sidecar_path(path))
    except FileNotFoundError as e:
        raise InputError(f"Correlation file or sidecar not found: {e.filename}") from e
    except (pd.errors.ParserError, pd.errors.EmptyDataError, ValueError) as e:
        raise InputError(f"Cannot parse correlation file {path}: {e}") from e
    if "label" in frame.columns:
        frame = frame.drop(columns=["label"])
    labels = [str(col) for col in frame.columns]
    matrix = CorrelationMatrix(labels, frame.to_numpy(dtype=float), meta.get("t_effective", 0))
    matrix.c = 0.5 * (matrix.c + matrix.c.T)
    is_valid, error = matrix.validate()
    if not is_valid:
        raise InputError(error)
    return matrix


def write_histogram(hist, path):
    """Two-column plot-ready CSV: bin_center, density."""
    frame = pd.DataFrame({"bin_center": hist.bin_centers, "density": hist.densities})
    return write_csv(frame, path)
