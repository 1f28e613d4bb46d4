"""
Spectral analysis module for the crude oil correlation toolkit

Eigendecomposition of the correlation matrix, the random-matrix (Marchenko-
Pastur) bulk it is compared against, and the pairs that the smallest
eigenvectors point at.
"""

import logging
from itertools import combinations

import numpy as np
import pandas as pd
from scipy import integrate

from models import (EIGEN_CLASSES, InputError, MPBounds, NumericalError,
                    PairLocalization, SpectralDecomposition, validate_square_symmetric)


logger = logging.getLogger(__name__)

DEFAULT_SIGMA2 = 1.0
DEFAULT_DOMINANCE = 0.5
DEFAULT_K_SMALLEST = 4


# ------------------------ Random matrix bulk -----------------------------

def mp_bounds(t, n, sigma2=DEFAULT_SIGMA2):
    """
    Bulk edges sigma^2 (1 + 1/Q -/+ 2 sqrt(1/Q)) with Q = t / n.

    Args:
        t (int): Number of time samples
        n (int): Number of series
        sigma2 (float): Variance of the matrix entries (1 for standardized data)

    Returns:
        MPBounds: Q, sigma^2 and the two edges

    Raises:
        InputError: n < 2 or sigma2 <= 0
        NumericalError: Q < 1
    """
    if n < 2:
        raise InputError("Need at least 2 series")
    if sigma2 <= 0:
        raise InputError("sigma2 must be positive")
    if t < n:
        raise NumericalError(f"Q = T/N = {t}/{n} is below 1")
    q = t / n
    root = 2.0 * np.sqrt(1.0 / q)
    base = 1.0 + 1.0 / q
    return MPBounds(q, sigma2, sigma2 * max(base - root, 0.0), sigma2 * (base + root))


def mp_density(lam, bounds):
    """
    Marchenko-Pastur eigenvalue density.

    f(lambda) = Q / (2 pi sigma^2) * sqrt((l_max - lambda)(lambda - l_min)) / lambda
    inside the bulk, 0 outside and at both edges.

    Args:
        lam (float or array): Eigenvalue(s)
        bounds (MPBounds): Bulk parameters

    Returns:
        float or np.ndarray: Density value(s)
    """
    lam_arr = np.asarray(lam, dtype=float)
    inside = (lam_arr > bounds.lambda_min) & (lam_arr < bounds.lambda_max) & (lam_arr > 0)
    safe = np.where(inside, lam_arr, 1.0)
    radicand = np.clip((bounds.lambda_max - safe) * (safe - bounds.lambda_min), 0.0, None)
    density = np.where(inside, bounds.q / (2.0 * np.pi * bounds.sigma2) * np.sqrt(radicand) / safe, 0.0)
    return float(density) if density.ndim == 0 else density


def mp_cdf(lam, bounds):
    """Integral of mp_density from the lower edge to lam."""
    def cdf_one(x):
        if x <= bounds.lambda_min:
            return 0.0
        if x >= bounds.lambda_max:
            return 1.0
        value, _ = integrate.quad(mp_density, bounds.lambda_min, x, args=(bounds,), limit=200)
        return min(max(value, 0.0), 1.0)

    lam_arr = np.asarray(lam, dtype=float)
    if lam_arr.ndim == 0:
        return cdf_one(float(lam_arr))
    return np.array([cdf_one(x) for x in lam_arr])


def mp_fit(eigenvalues, bounds):
    """
    Compare an empirical spectrum with the bulk density.

    Args:
        eigenvalues (array): Eigenvalues of a correlation matrix
        bounds (MPBounds): Bulk parameters

    Returns:
        tuple: (Kolmogorov distance, fraction of eigenvalues outside the bulk)
    """
    values = np.sort(np.asarray(eigenvalues, dtype=float))
    n = values.size
    theoretical = mp_cdf(values, bounds)
    upper = np.arange(1, n + 1) / n
    lower = np.arange(0, n) / n
    distance = float(max(np.max(np.abs(upper - theoretical)), np.max(np.abs(theoretical - lower))))
    outside = float(np.mean((values < bounds.lambda_min) | (values > bounds.lambda_max)))
    return distance, outside


# ------------------------- Decomposition --------------------------------

def classify(eigenvalue, bounds):
    if bounds.contains(eigenvalue):
        return "bulk"
    return "above" if eigenvalue > bounds.lambda_max else "below"


def eigendecompose(c, bounds):
    """
    C = U Lambda U^T with eigenvalues sorted descending.

    Each eigenvector's largest-magnitude component (lowest index on ties) is
    made positive. Equal eigenvalues keep the solver's stable index order.

    Args:
        c (CorrelationMatrix): Symmetric PSD matrix
        bounds (MPBounds): Bulk used for classification

    Returns:
        SpectralDecomposition: Sorted spectrum with classes

    Raises:
        NumericalError: Non-symmetric input or solver failure
    """
    matrix = np.asarray(c.c, dtype=float)
    if not validate_square_symmetric(matrix, atol=1e-12):
        raise NumericalError("Eigendecomposition needs a symmetric matrix")
    try:
        values, vectors = np.linalg.eigh(matrix)
    except np.linalg.LinAlgError as e:
        raise NumericalError(f"Eigensolver failed: {e}") from e

    order = np.argsort(-values, kind="stable")
    values = values[order]
    vectors = vectors[:, order]
    pivots = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[pivots, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    vectors = vectors * signs

    classes = [classify(v, bounds) for v in values]
    logger.info("Spectrum: lambda_1 = %.4f, %d above / %d below the bulk",
                values[0], classes.count("above"), classes.count("below"))
    return SpectralDecomposition(values, vectors, bounds, classes, labels=c.labels)


def bulk_deviation_report(d):
    """
    Counts of eigenvalues above, inside and below the bulk, and lambda_1 / N.

    Returns:
        dict: above, bulk, below, explained_variance
    """
    counts = {name: d.classes.count(name) for name in EIGEN_CLASSES}
    counts["explained_variance"] = float(d.eigenvalues[0] / d.n)
    return counts


def localize_pairs(d, c, k_smallest=DEFAULT_K_SMALLEST, dominance=DEFAULT_DOMINANCE):
    """
    Highly correlated pairs read off the smallest eigenvectors.

    For each of the k smallest eigenvalues, components with |u| >= dominance
    are dominant; every two dominant components of opposite sign form a
    candidate pair, reported with its coefficient and the coefficient's rank
    among all off-diagonal entries (1 = largest). Pairs are listed by
    decreasing coefficient.

    Args:
        d (SpectralDecomposition): Spectrum of c
        c (CorrelationMatrix): The decomposed matrix
        k_smallest (int): How many of the smallest eigenvalues to inspect
        dominance (float): Component magnitude threshold

    Returns:
        list: PairLocalization per eigenvalue, smallest first
    """
    if k_smallest > d.n:
        raise InputError(f"k_smallest = {k_smallest} exceeds N = {d.n}")

    upper = np.sort(c.upper_triangle())[::-1]
    results = []
    for offset in range(k_smallest):
        column = d.n - 1 - offset
        u = d.eigenvectors[:, column]
        dominant = [(int(i), float(u[i])) for i in np.flatnonzero(np.abs(u) >= dominance)]
        pairs = []
        for (i, ui), (j, uj) in combinations(dominant, 2):
            if ui * uj < 0:
                cij = float(c.c[i, j])
                rank = int(np.searchsorted(-upper, -cij, side="left")) + 1
                pairs.append({"pair": (i, j), "c": cij, "rank": rank})
        pairs.sort(key=lambda p: (-p["c"], p["pair"]))
        results.append(PairLocalization(column + 1, d.eigenvalues[column], dominant, pairs))
    return results


# ------------------------------ Output ----------------------------------

def spectrum_curves(d, n_bins=50, n_grid=400):
    """
    Plot-ready eigenvalue histogram and theoretical density.

    Returns:
        tuple: (histogram DataFrame: bin_center, density;
                curve DataFrame: lambda, mp_density)
    """
    densities, edges = np.histogram(d.eigenvalues, bins=n_bins, density=True)
    histogram = pd.DataFrame({"bin_center": 0.5 * (edges[:-1] + edges[1:]), "density": densities})
    grid = np.linspace(d.bounds.lambda_min, d.bounds.lambda_max, n_grid)
    curve = pd.DataFrame({"lambda": grid, "mp_density": mp_density(grid, d.bounds)})
    return histogram, curve


def spectrum_report(d, pairs=None):
    """JSON-ready spectrum report with per-eigenvector components."""
    report = d.to_dict()
    report.update(bulk_deviation_report(d))
    report["labels"] = d.labels
    report["eigenvectors"] = {str(k + 1): d.eigenvectors[:, k].tolist() for k in range(d.n)}
    if pairs is not None:
        report["pairs"] = [p.to_dict(d.labels) for p in pairs]
    return report
