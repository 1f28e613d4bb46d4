"""
Portfolio module for the crude oil correlation toolkit

Eigenportfolios built from the eigenvectors of the correlation matrix, their
regression against the cross-sectional mean return, and the market index
compounded from the leading one.
"""

import logging

import numpy as np
import pandas as pd
from scipy import stats

from ingest import standardize
from models import (Eigenportfolio, IllDefinedPortfolioError, IndexSeries, InputError)


logger = logging.getLogger(__name__)

DEFAULT_INDEX_BASE = 19.4704
MIN_WEIGHT_SUM = 1e-8


def _r_squared(x, y):
    # OLS with intercept; a constant regressor explains nothing
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        return 0.0
    return float(stats.linregress(x, y).rvalue ** 2)


def _return_matrix(returns, standardized):
    return standardize(returns) if standardized else returns.returns


def eigenportfolio(d, returns, k=1, standardized=False):
    """
    Portfolio weighted by the k-th eigenvector, normalized to sum to 1.

    R_k(t) = sum_i u_ik r_i(t) / sum_i u_ik on raw returns (standardized
    returns when standardized=True). R^2 comes from the OLS regression of
    the cross-sectional mean return on R_k.

    Args:
        d (SpectralDecomposition): Spectrum of the correlation matrix
        returns (ReturnPanel): Returns of the same series
        k (int): 1-based eigenvalue index
        standardized (bool): Use standardized instead of raw returns

    Returns:
        Eigenportfolio: Weights, return series and R^2

    Raises:
        InputError: k out of range or panel/spectrum mismatch
        IllDefinedPortfolioError: Eigenvector components sum to ~0
    """
    if not 1 <= k <= d.n:
        raise InputError(f"k must lie in [1, {d.n}]")
    if returns.returns.shape[1] != d.n:
        raise InputError("Return panel and spectrum cover different series")

    u = d.vector(k)
    total = u.sum()
    if abs(total) < MIN_WEIGHT_SUM:
        raise IllDefinedPortfolioError(f"Eigenvector {k} components sum to {total:.2e}")
    weights = u / total

    matrix = _return_matrix(returns, standardized)
    series = matrix @ weights
    r_squared = _r_squared(series, matrix.mean(axis=1))
    return Eigenportfolio(k, weights, series, r_squared)


def uniform_portfolio(returns, standardized=False):
    """The 1/N benchmark as an eigenportfolio with k = 0."""
    matrix = _return_matrix(returns, standardized)
    n = matrix.shape[1]
    weights = np.full(n, 1.0 / n)
    series = matrix.mean(axis=1)
    return Eigenportfolio(0, weights, series, 1.0)


def eigenportfolio_table(d, returns, ks=None, standardized=False):
    """
    R^2 of several eigenportfolios; ill-defined ones are flagged, not raised.

    Returns:
        pd.DataFrame: k, eigenvalue, r_squared, ill_defined
    """
    if ks is None:
        ks = range(1, min(5, d.n) + 1)
    rows = []
    for k in ks:
        try:
            p = eigenportfolio(d, returns, k, standardized)
            rows.append({"k": k, "eigenvalue": d.eigenvalues[k - 1], "r_squared": p.r_squared, "ill_defined": False})
        except IllDefinedPortfolioError as e:
            logger.warning("%s", e)
            rows.append({"k": k, "eigenvalue": d.eigenvalues[k - 1], "r_squared": np.nan, "ill_defined": True})
    return pd.DataFrame(rows, columns=["k", "eigenvalue", "r_squared", "ill_defined"])


def build_index(p, base=DEFAULT_INDEX_BASE):
    """
    I(t) = base * exp(sum_{s <= t} R_k(s)), with I(0) = base.

    Args:
        p (Eigenportfolio): Source portfolio
        base (float): Starting level, usually the initial average price

    Returns:
        IndexSeries: T + 1 values
    """
    if base <= 0:
        raise InputError("Index base must be positive")
    growth = np.exp(np.concatenate([[0.0], np.cumsum(p.returns)]))
    values = base * growth
    values[0] = base
    return IndexSeries(base, values, p.k)


def aligned_average_price(prices, delta_t=1):
    """Average price on the dates an index built from delta_t returns covers."""
    return prices.average_price()[delta_t - 1:], prices.dates[delta_t - 1:]


def buy_and_hold_report(index, prices, benchmark=None, delta_t=1):
    """
    Compare holding the index with holding the average price.

    Args:
        index (IndexSeries): Eigenportfolio index
        prices (PricePanel): Price panel the returns came from
        benchmark (IndexSeries, optional): 1/N index from the same base
        delta_t (int): Return horizon, aligns the index with the price dates

    Returns:
        tuple: (per-date DataFrame: date, index, average_price[, uniform_index];
                summary dict: terminal_ratio, dominance_fraction, ln_correlation, ...)

    Raises:
        InputError: Index and prices cover different numbers of dates
    """
    average, dates = aligned_average_price(prices, delta_t)
    if average.size != index.values.size:
        raise InputError(f"Index has {index.values.size} values but prices cover {average.size} dates")
    if benchmark is not None and benchmark.values.size != index.values.size:
        raise InputError("Benchmark and index lengths differ")

    frame = pd.DataFrame({
        "date": [d.isoformat() for d in dates],
        "index": index.values,
        "average_price": average,
    })

    log_index = np.log(index.values)
    log_average = np.log(average)
    ln_correlation = None
    if np.std(log_index) > 0 and np.std(log_average) > 0:
        ln_correlation = float(np.corrcoef(log_index, log_average)[0, 1])

    summary = {
        "portfolio_k": index.portfolio_k,
        "base": index.base,
        "terminal_index": float(index.values[-1]),
        "terminal_average_price": float(average[-1]),
        "terminal_ratio": float(index.values[-1] / average[-1]),
        "dominance_fraction": float(np.mean(index.values >= average)),
        "ln_correlation": ln_correlation,
    }
    if benchmark is not None:
        frame["uniform_index"] = benchmark.values
        summary["terminal_ratio_vs_uniform"] = float(index.values[-1] / benchmark.values[-1])
        summary["dominance_fraction_vs_uniform"] = float(np.mean(index.values >= benchmark.values))

    logger.info("Index ends at %.4f vs average price %.4f", summary["terminal_index"], summary["terminal_average_price"])
    return frame, summary


def portfolio_frame(portfolios, dates=None):
    """Plot-ready return series: date, R_k columns."""
    frame = pd.DataFrame({f"R_{p.k}": p.returns for p in portfolios})
    if dates is not None:
        frame.insert(0, "date", [d.isoformat() for d in dates])
    return frame
