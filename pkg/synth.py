"""
Synthetic data module for the crude oil correlation toolkit

Generators with known ground truth: pure noise, planted block correlation,
near-duplicate pairs and a one-factor market. Every panel can be exported in
the price file format the ingest stage reads.
"""

import logging

import numpy as np
import pandas as pd

from ingest import sidecar_path, write_panel
from models import BlockModelSpec, FactorModelSpec, InputError, PricePanel
from utils import write_json


logger = logging.getLogger(__name__)

CRUDE71_SIZES = (8, 7, 13, 5, 31, 7)
CRUDE71_T = 5272
CRUDE71_INTRA = 0.9
DEFAULT_PAIR_BACKGROUND = 0.3
DEFAULT_TARGET_CORR = 0.57
DEFAULT_FACTOR_SCALE = 0.02
EXPORT_SCALE = 0.01
SCENARIOS = ("noise", "crude71", "pairs", "factor", "bubble")
SCENARIO_ALIASES = {"paper71": "crude71"}


def _rng(seed, *stream):
    return np.random.default_rng([int(seed), *stream])


def _standardize_columns(x):
    return (x - x.mean(axis=0)) / x.std(axis=0)


def symmetric_root(target):
    """Symmetric square root of a PSD matrix; tiny negative eigenvalues are clipped."""
    values, vectors = np.linalg.eigh(target)
    if values.min() < -1e-10:
        raise InputError("Target correlation matrix is not positive semidefinite")
    return (vectors * np.sqrt(np.clip(values, 0.0, None))) @ vectors.T


def _sample_correlated(target, t, rng):
    return rng.standard_normal((t, target.shape[0])) @ symmetric_root(target)


# ----------------------------- Generators -------------------------------

def generate_noise_panel(t, n, seed):
    """
    i.i.d. standard normal T x N matrix, columnwise standardized.

    Raises:
        InputError: unless t >= n >= 2
    """
    if n < 2 or t < n:
        raise InputError("Noise panel needs t >= n >= 2")
    return _standardize_columns(_rng(seed).standard_normal((t, n)))


def generate_block_panel(spec):
    """
    Sample returns whose correlation matrix is the block target.

    Args:
        spec (BlockModelSpec): Block sizes, levels, sample count and seed

    Returns:
        tuple: (T x N return matrix, 1-based ground-truth labels)
    """
    is_valid, error = spec.validate()
    if not is_valid:
        raise InputError(error)
    returns = _sample_correlated(spec.target_matrix(), spec.t, _rng(spec.seed))
    logger.debug("Sampled %r", spec)
    return returns, spec.labels()


def generate_duplicate_pair_panel(n, t, pair_corr, seed, background=DEFAULT_PAIR_BACKGROUND):
    """
    Panel with planted near-duplicate pairs on a mild common background.

    Args:
        n (int): Number of series
        t (int): Number of samples
        pair_corr (float or sequence): Target correlation of each planted pair, in (0.9, 1)
        seed (int): Random seed; also places the pairs
        background (float): Correlation of every other pair

    Returns:
        tuple: (T x N return matrix, list of planted (i, j) pairs with i < j)
    """
    levels = np.atleast_1d(np.asarray(pair_corr, dtype=float))
    if np.any(levels <= 0.9) or np.any(levels >= 1.0):
        raise InputError("pair_corr must lie in (0.9, 1)")
    if 2 * levels.size > n:
        raise InputError("Not enough series for the planted pairs")
    if not 0 <= background < levels.min():
        raise InputError("background must lie in [0, pair_corr)")

    placement = _rng(seed, 1).permutation(n)
    pairs = []
    target = np.full((n, n), background)
    for m, level in enumerate(levels):
        i, j = sorted((int(placement[2 * m]), int(placement[2 * m + 1])))
        target[i, j] = target[j, i] = level
        pairs.append((i, j))
    np.fill_diagonal(target, 1.0)
    return _sample_correlated(target, t, _rng(seed)), pairs


def bubble_drift(t, amplitude, start=0.4, end=0.8):
    """
    Per-step drift that lifts the log level by amplitude and brings it back.

    The rise covers the first half of [start, end) of the sample and the fall
    the second half.
    """
    drift = np.zeros(t)
    lo, hi = int(start * t), int(end * t)
    mid = (lo + hi) // 2
    if amplitude and mid > lo and hi > mid:
        drift[lo:mid] = amplitude / (mid - lo)
        drift[mid:hi] = -amplitude / (hi - mid)
    return drift


def generate_factor_panel(spec):
    """
    One-factor returns r_i(t) = scale * (beta_i f(t) + idio_sigma e_i(t)) + beta_i b(t).

    f and e are standard normal; b is the optional bubble drift.

    Args:
        spec (FactorModelSpec): Loadings, noise level, sample count and seed

    Returns:
        np.ndarray: T x N return matrix
    """
    is_valid, error = spec.validate()
    if not is_valid:
        raise InputError(error)
    rng = _rng(spec.seed)
    factor = rng.standard_normal(spec.t)
    idio = rng.standard_normal((spec.t, spec.n))
    returns = spec.scale * (np.outer(factor, spec.betas) + spec.idio_sigma * idio)
    if spec.bubble_amplitude:
        returns += np.outer(bubble_drift(spec.t, spec.bubble_amplitude), spec.betas)
    return returns


def random_correlation_matrix(n, seed):
    """Sample correlation matrix of a short Gaussian panel (no structure)."""
    x = _rng(seed).standard_normal((3 * n, n))
    c = np.corrcoef(x, rowvar=False)
    c = 0.5 * (c + c.T)
    np.fill_diagonal(c, 1.0)
    return c


# ----------------------------- Scenarios --------------------------------

def crude71_spec(seed, t=CRUDE71_T):
    """
    Six planted clusters of 71 series.

    Four coefficient levels: 0.9 inside clusters, 0.30 among clusters 3, 4
    and 5, 0.10 between the other clusters and 0.0 between cluster 1 and the
    rest.
    """
    k = len(CRUDE71_SIZES)
    inter = np.full((k, k), 0.10)
    for a in (2, 3, 4):
        for b in (2, 3, 4):
            inter[a, b] = 0.30
    inter[0, :] = inter[:, 0] = 0.0
    return BlockModelSpec(CRUDE71_SIZES, CRUDE71_INTRA, inter, t, seed)


def calibrate_idio_sigma(target_corr, betas):
    """
    Idiosyncratic volatility giving mean pairwise correlation ~ target_corr.

    From c = beta^2 / (beta^2 + sigma^2) averaged over the loadings.
    """
    if not 0 < target_corr < 1:
        raise InputError("target_corr must lie in (0, 1)")
    betas = np.asarray(betas, dtype=float)
    return float(np.sqrt(np.mean(betas ** 2) * (1.0 / target_corr - 1.0)))


def default_factor_spec(seed, n=71, t=CRUDE71_T, target_corr=DEFAULT_TARGET_CORR,
                        bubble_amplitude=0.0, scale=DEFAULT_FACTOR_SCALE):
    """Factor model with betas uniform in [0.8, 1.2] and calibrated idio_sigma."""
    betas = _rng(seed, 2).uniform(0.8, 1.2, size=n)
    return FactorModelSpec(n, t, betas, calibrate_idio_sigma(target_corr, betas), seed,
                           bubble_amplitude=bubble_amplitude, scale=scale)


def scenario(name, seed, t=None, n=None):
    """
    Named synthetic scenario.

    Returns:
        tuple: (return matrix, ground-truth labels or None, description dict)
    """
    name = SCENARIO_ALIASES.get(name, name)
    if name == "noise":
        n = n or 70
        t = t or 5000
        return generate_noise_panel(t, n, seed) * EXPORT_SCALE, None, {"scenario": name, "t": t, "n": n, "seed": seed}
    if name == "crude71":
        spec = crude71_spec(seed, t or CRUDE71_T)
        returns, labels = generate_block_panel(spec)
        return returns * EXPORT_SCALE, labels, {"scenario": name, **spec.to_dict()}
    if name == "pairs":
        n = n or 30
        t = t or 5000
        returns, pairs = generate_duplicate_pair_panel(n, t, (0.999, 0.99), seed)
        return returns * EXPORT_SCALE, None, {"scenario": name, "t": t, "n": n, "seed": seed,
                                             "pairs": [list(p) for p in pairs]}
    if name in ("factor", "bubble"):
        amplitude = 1.0 if name == "bubble" else 0.0
        spec = default_factor_spec(seed, n=n or 71, t=t or CRUDE71_T, bubble_amplitude=amplitude)
        return generate_factor_panel(spec), None, {"scenario": name, **spec.to_dict()}
    raise InputError(f"Unknown scenario '{name}', choose from {', '.join(SCENARIOS)}")


# ------------------------------ Export ----------------------------------

def returns_to_prices(returns, labels=None, base=100.0, start="2000-01-03"):
    """
    Compound returns into a price panel on business days.

    Args:
        returns (np.ndarray): T x N log-returns
        labels (list, optional): Series identifiers
        base (float): Price of every series on the first date
        start (str): First date

    Returns:
        PricePanel: T + 1 dates of prices
    """
    returns = np.asarray(returns, dtype=float)
    t, n = returns.shape
    if labels is None:
        labels = [f"S{i + 1:02d}" for i in range(n)]
    levels = np.vstack([np.zeros(n), np.cumsum(returns, axis=0)])
    dates = [d.date() for d in pd.bdate_range(start, periods=t + 1)]
    return PricePanel(dates, list(labels), base * np.exp(levels))


def write_scenario(panel, path, truth=None, meta=None):
    """
    Write a price panel and a JSON sidecar with its ground truth.

    Args:
        panel (PricePanel): Panel to export
        path (str): CSV path
        truth (array, optional): Ground-truth cluster per series
        meta (dict, optional): Scenario description

    Returns:
        tuple: (csv_path, json_path)
    """
    write_panel(panel, path)
    sidecar = {"labels": panel.labels, "scenario": meta or {}}
    if truth is not None:
        sidecar["ground_truth"] = {label: int(cid) for label, cid in zip(panel.labels, truth)}
    return path, write_json(sidecar, sidecar_path(path))
