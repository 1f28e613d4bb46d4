"""
Data models and validation module for the crude oil correlation toolkit

This module provides the domain types shared by every analysis stage,
the validation helpers they rely on and the error hierarchy the CLI maps
to exit codes.
"""

import numpy as np


# ----------------------------- Errors -----------------------------------

class PipelineError(Exception):
    """
    Base error of every analysis stage.

    Attributes:
        stage (str): Name of the stage that failed (set by the CLI if absent)
        exit_code (int): Process exit code the CLI reports
    """

    exit_code = 3

    def __init__(self, message, stage=None):
        super().__init__(message)
        self.stage = stage


class InputError(PipelineError):
    """Bad or unusable input: files, parameters, permutations."""

    exit_code = 2


class NumericalError(PipelineError):
    """A computation cannot proceed on the given numbers."""

    exit_code = 3


class IllDefinedPortfolioError(NumericalError):
    """Eigenvector components sum to (almost) zero."""


# --------------------------- Validation ---------------------------------

def validate_labels(labels):
    """
    Validate a list of series identifiers.

    Labels must be non-empty strings and unique.

    Args:
        labels (list): Series identifiers

    Returns:
        bool: True if valid, False otherwise
    """
    if labels is None or len(labels) == 0:
        return False
    cleaned = [str(label).strip() for label in labels]
    if any(len(label) == 0 for label in cleaned):
        return False
    return len(set(cleaned)) == len(cleaned)


def validate_permutation(perm, n=None):
    """
    Check that perm is a bijection of 0..n-1.

    Args:
        perm (sequence): Candidate permutation
        n (int, optional): Expected length

    Returns:
        bool: True if valid, False otherwise
    """
    if perm is None:
        return False
    arr = np.asarray(perm)
    if arr.ndim != 1 or arr.size == 0:
        return False
    if n is not None and arr.size != n:
        return False
    if not np.issubdtype(arr.dtype, np.integer):
        return False
    return bool(np.array_equal(np.sort(arr), np.arange(arr.size)))


def validate_square_symmetric(matrix, atol=1e-10):
    """Return True if matrix is square and symmetric within atol."""
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    return bool(np.allclose(m, m.T, atol=atol, rtol=0.0))


# ----------------------------- ingest -----------------------------------

class PricePanel:
    """
    Aligned matrix of prices per series.

    Rows follow the date axis, columns follow labels.
    """

    def __init__(self, dates, labels, prices, fill_log=None):
        """
        Initialize PricePanel instance.

        Args:
            dates (list): Ordered calendar dates (datetime.date)
            labels (list): N series identifiers
            prices (np.ndarray): T x N matrix of positive prices
            fill_log (list, optional): (label, date, method) repaired cells
        """
        self.dates = list(dates)
        self.labels = [str(label) for label in labels]
        self.prices = np.asarray(prices, dtype=float)
        self.fill_log = list(fill_log or [])

    @property
    def shape(self):
        return self.prices.shape

    def validate(self):
        """
        Validate panel data.

        Returns:
            tuple: (is_valid, error_message)
        """
        if self.prices.ndim != 2:
            return False, "Prices must be a 2-D matrix"
        t, n = self.prices.shape
        if t != len(self.dates) or n != len(self.labels):
            return False, "Price matrix does not match dates and labels"
        if t < 2 or n < 2:
            return False, "At least 2 dates and 2 series are required"
        if not validate_labels(self.labels):
            return False, "Series labels must be unique and non-empty"
        if any(b <= a for a, b in zip(self.dates, self.dates[1:])):
            return False, "Dates must be strictly increasing"
        if not np.all(np.isfinite(self.prices)) or np.any(self.prices <= 0):
            return False, "All prices must be finite and strictly positive"
        return True, None

    def average_price(self):
        """Cross-sectional average price <P(t)>."""
        return self.prices.mean(axis=1)

    def to_dict(self):
        return {
            'labels': self.labels,
            'first_date': self.dates[0].isoformat() if self.dates else None,
            'last_date': self.dates[-1].isoformat() if self.dates else None,
            'n_dates': len(self.dates),
            'fill_log': [[label, d.isoformat(), method] for label, d, method in self.fill_log],
        }

    def __repr__(self):
        return f"PricePanel(t={len(self.dates)}, n={len(self.labels)}, filled={len(self.fill_log)})"


class ReturnPanel:
    """
    Log-return matrix with its per-series moments.

    Moments use the population convention (divide by T).
    """

    def __init__(self, returns, delta_t, means, stddevs, clipped=None, labels=None, dates=None):
        """
        Initialize ReturnPanel instance.

        Args:
            returns (np.ndarray): (T - delta_t) x N log-returns
            delta_t (int): Return horizon in rows
            means (np.ndarray): Per-series mean return
            stddevs (np.ndarray): Per-series population standard deviation
            clipped (list, optional): (label, date) cells set to zero
            labels (list, optional): Series identifiers
            dates (list, optional): Dates the returns are stamped with
        """
        self.returns = np.asarray(returns, dtype=float)
        self.delta_t = int(delta_t)
        self.means = np.asarray(means, dtype=float)
        self.stddevs = np.asarray(stddevs, dtype=float)
        self.clipped = list(clipped or [])
        n = self.returns.shape[1] if self.returns.ndim == 2 else 0
        self.labels = [str(label) for label in labels] if labels is not None else [f"S{i + 1}" for i in range(n)]
        self.dates = list(dates) if dates is not None else None

    @classmethod
    def from_matrix(cls, returns, labels=None, dates=None, delta_t=1):
        """
        Build a panel from a bare return matrix.

        Args:
            returns (np.ndarray): T x N returns
            labels (list, optional): Series identifiers
            dates (list, optional): Row dates
            delta_t (int): Horizon recorded on the panel

        Returns:
            ReturnPanel: Panel with population moments and no clip log
        """
        r = np.asarray(returns, dtype=float)
        return cls(r, delta_t, r.mean(axis=0), r.std(axis=0), labels=labels, dates=dates)

    @property
    def shape(self):
        return self.returns.shape

    def validate(self):
        """
        Validate return panel data.

        Returns:
            tuple: (is_valid, error_message)
        """
        if self.returns.ndim != 2:
            return False, "Returns must be a 2-D matrix"
        n = self.returns.shape[1]
        if self.means.shape != (n,) or self.stddevs.shape != (n,):
            return False, "Moments must have one entry per series"
        if len(self.labels) != n or not validate_labels(self.labels):
            return False, "Series labels must be unique and match the columns"
        if self.delta_t < 1:
            return False, "delta_t must be a positive integer"
        if not np.all(self.stddevs > 0):
            return False, "Standard deviations must be strictly positive"
        return True, None

    def to_dict(self):
        return {
            'labels': self.labels,
            'delta_t': self.delta_t,
            'means': self.means.tolist(),
            'stddevs': self.stddevs.tolist(),
            'clipped': [[label, d.isoformat() if hasattr(d, 'isoformat') else str(d)]
                        for label, d in self.clipped],
        }

    def __repr__(self):
        return f"ReturnPanel(t={self.returns.shape[0]}, n={self.returns.shape[1]}, delta_t={self.delta_t})"


# --------------------------- correlation --------------------------------

class CorrelationMatrix:
    """Symmetric N x N matrix of coefficients with unit diagonal."""

    def __init__(self, labels, c, t_effective):
        self.labels = [str(label) for label in labels]
        self.c = np.asarray(c, dtype=float)
        self.t_effective = int(t_effective)

    @property
    def n(self):
        return self.c.shape[0]

    def validate(self):
        """
        Validate the matrix invariants.

        Returns:
            tuple: (is_valid, error_message)
        """
        if not validate_square_symmetric(self.c, atol=0.0):
            return False, "Matrix must be square and exactly symmetric"
        if len(self.labels) != self.c.shape[0]:
            return False, "Labels do not match matrix size"
        if not np.allclose(np.diag(self.c), 1.0, atol=1e-12, rtol=0.0):
            return False, "Diagonal must be 1"
        if np.any(np.abs(self.c) > 1.0 + 1e-12):
            return False, "Entries must lie in [-1, 1]"
        return True, None

    def upper_triangle(self):
        """Off-diagonal coefficients c_ij with i < j."""
        iu = np.triu_indices(self.n, k=1)
        return self.c[iu]

    def permuted(self, perm):
        """Return a copy with rows, columns and labels permuted."""
        perm = np.asarray(perm)
        return CorrelationMatrix([self.labels[i] for i in perm], self.c[np.ix_(perm, perm)], self.t_effective)

    def to_dict(self):
        return {'labels': self.labels, 't_effective': self.t_effective, 'c': self.c.tolist()}

    def __repr__(self):
        return f"CorrelationMatrix(n={self.n}, t_effective={self.t_effective})"


class CoefficientHistogram:
    """Density-normalized histogram of the off-diagonal coefficients."""

    def __init__(self, bin_edges, densities, n_pairs, n_peaks=0, peak_centers=None):
        self.bin_edges = np.asarray(bin_edges, dtype=float)
        self.densities = np.asarray(densities, dtype=float)
        self.n_pairs = int(n_pairs)
        self.n_peaks = int(n_peaks)
        self.peak_centers = list(peak_centers or [])

    @property
    def bin_centers(self):
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])

    def integral(self):
        return float(np.sum(self.densities * np.diff(self.bin_edges)))

    def to_dict(self):
        return {
            'bin_edges': self.bin_edges.tolist(),
            'densities': self.densities.tolist(),
            'n_pairs': self.n_pairs,
            'n_peaks': self.n_peaks,
            'peak_centers': self.peak_centers,
        }

    def __repr__(self):
        return f"CoefficientHistogram(bins={self.densities.size}, n_pairs={self.n_pairs}, peaks={self.n_peaks})"


# ----------------------------- spectra ----------------------------------

class MPBounds:
    """Bulk edges of the random-matrix eigenvalue density."""

    def __init__(self, q, sigma2, lambda_min, lambda_max):
        self.q = float(q)
        self.sigma2 = float(sigma2)
        self.lambda_min = float(lambda_min)
        self.lambda_max = float(lambda_max)

    def contains(self, value):
        return self.lambda_min <= value <= self.lambda_max

    def to_dict(self):
        return {'q': self.q, 'sigma2': self.sigma2,
                'lambda_min': self.lambda_min, 'lambda_max': self.lambda_max}

    def __repr__(self):
        return f"MPBounds(q={self.q:.4f}, lambda_min={self.lambda_min:.4f}, lambda_max={self.lambda_max:.4f})"


EIGEN_CLASSES = ('above', 'bulk', 'below')


class SpectralDecomposition:
    """
    Sorted spectrum of a correlation matrix.

    eigenvalues are descending; column k of eigenvectors belongs to
    eigenvalues[k]; classes tag each eigenvalue against the bulk.
    """

    def __init__(self, eigenvalues, eigenvectors, bounds, classes, labels=None):
        self.eigenvalues = np.asarray(eigenvalues, dtype=float)
        self.eigenvectors = np.asarray(eigenvectors, dtype=float)
        self.bounds = bounds
        self.classes = list(classes)
        self.labels = list(labels) if labels is not None else None

    @property
    def n(self):
        return self.eigenvalues.size

    def vector(self, k):
        """Eigenvector of the k-th largest eigenvalue (1-based)."""
        return self.eigenvectors[:, k - 1]

    def to_dict(self):
        return {
            'eigenvalues': self.eigenvalues.tolist(),
            'classes': self.classes,
            'bounds': self.bounds.to_dict(),
            'explained_variance': float(self.eigenvalues[0] / self.n),
        }

    def __repr__(self):
        return f"SpectralDecomposition(n={self.n}, lambda_1={self.eigenvalues[0]:.4f})"


class PairLocalization:
    """Dominant components of one small eigenvector and the pairs they imply."""

    def __init__(self, eigen_index, eigenvalue, dominant_components, implied_pairs):
        """
        Args:
            eigen_index (int): 1-based index k of the eigenvalue (descending order)
            eigenvalue (float): lambda_k
            dominant_components (list): (series index, component value)
            implied_pairs (list): dicts with keys pair, c, rank
        """
        self.eigen_index = int(eigen_index)
        self.eigenvalue = float(eigenvalue)
        self.dominant_components = list(dominant_components)
        self.implied_pairs = list(implied_pairs)

    def top_pair(self):
        return self.implied_pairs[0]['pair'] if self.implied_pairs else None

    def to_dict(self, labels=None):
        def name(i):
            return labels[i] if labels is not None else i
        return {
            'eigen_index': self.eigen_index,
            'eigenvalue': self.eigenvalue,
            'dominant_components': [[name(i), v] for i, v in self.dominant_components],
            'implied_pairs': [{'pair': [name(i), name(j)], 'c': p['c'], 'rank': p['rank']}
                              for p in self.implied_pairs for i, j in [p['pair']]],
        }

    def __repr__(self):
        return f"PairLocalization(k={self.eigen_index}, pairs={len(self.implied_pairs)})"


# ---------------------------- seriation ---------------------------------

class AnnealingConfig:
    """
    Simulated annealing schedule.

    The initial temperature is calibrated so that initial_acceptance of the
    uphill moves of a random sample would be accepted. Cooling stops after
    max_idle_temperatures without an accepted move, once the temperature
    falls below min_temperature_ratio times the initial one, or after
    max_temperatures steps, whichever comes first.
    """

    def __init__(self, initial_acceptance=0.8, cooling=0.95, moves_per_series=25,
                 swap_fraction=0.5, max_idle_temperatures=5, calibration_moves=500,
                 max_temperatures=1000, min_temperature_ratio=1e-4):
        self.initial_acceptance = float(initial_acceptance)
        self.cooling = float(cooling)
        self.moves_per_series = int(moves_per_series)
        self.swap_fraction = float(swap_fraction)
        self.max_idle_temperatures = int(max_idle_temperatures)
        self.calibration_moves = int(calibration_moves)
        self.max_temperatures = int(max_temperatures)
        self.min_temperature_ratio = float(min_temperature_ratio)

    def validate(self):
        if not 0.0 < self.initial_acceptance < 1.0:
            return False, "initial_acceptance must lie in (0, 1)"
        if not 0.0 < self.cooling < 1.0:
            return False, "cooling must lie in (0, 1)"
        if self.moves_per_series < 1:
            return False, "moves_per_series must be positive"
        if not 0.0 <= self.swap_fraction <= 1.0:
            return False, "swap_fraction must lie in [0, 1]"
        if self.max_idle_temperatures < 1 or self.calibration_moves < 1 or self.max_temperatures < 1:
            return False, "Counts must be positive"
        if not 0.0 <= self.min_temperature_ratio < 1.0:
            return False, "min_temperature_ratio must lie in [0, 1)"
        return True, None

    def to_dict(self):
        return {
            'initial_acceptance': self.initial_acceptance,
            'cooling': self.cooling,
            'moves_per_series': self.moves_per_series,
            'swap_fraction': self.swap_fraction,
            'max_idle_temperatures': self.max_idle_temperatures,
            'calibration_moves': self.calibration_moves,
            'max_temperatures': self.max_temperatures,
            'min_temperature_ratio': self.min_temperature_ratio,
        }

    def __repr__(self):
        return f"AnnealingConfig(cooling={self.cooling}, moves_per_series={self.moves_per_series})"


class Ordering:
    """A permutation of the series and its seriation cost."""

    def __init__(self, perm, cost, temperatures=0):
        self.perm = np.asarray(perm, dtype=np.int64)
        self.cost = float(cost)
        # temperature steps the annealing took, 0 when it did not run
        self.temperatures = int(temperatures)

    def validate(self):
        if not validate_permutation(self.perm):
            return False, "perm must be a permutation of 0..N-1"
        return True, None

    def to_dict(self):
        return {'perm': self.perm.tolist(), 'cost': self.cost}

    def __repr__(self):
        return f"Ordering(n={self.perm.size}, cost={self.cost:.6f})"


class Partition:
    """
    Assignment of series to contiguous clusters of an ordering.

    assignment[i] is the 1-based cluster id of series i.
    """

    def __init__(self, assignment, ordering, score, converged=True):
        self.assignment = np.asarray(assignment, dtype=np.int64)
        self.ordering = ordering
        self.score = float(score)
        self.converged = bool(converged)

    @property
    def k(self):
        return int(self.assignment.max()) if self.assignment.size else 0

    def clusters(self):
        """Series indices per cluster, in ordering order."""
        members = {cid: [] for cid in range(1, self.k + 1)}
        for i in self.ordering.perm:
            members[int(self.assignment[i])].append(int(i))
        return [members[cid] for cid in range(1, self.k + 1)]

    def boundaries(self):
        """Positions in the ordering where a new cluster starts (excluding 0)."""
        ids = self.assignment[self.ordering.perm]
        return [int(i) for i in np.flatnonzero(np.diff(ids)) + 1]

    def validate(self):
        is_valid, error = self.ordering.validate()
        if not is_valid:
            return is_valid, error
        if self.assignment.size != self.ordering.perm.size:
            return False, "Every series must be assigned"
        if self.assignment.size and set(np.unique(self.assignment)) != set(range(1, self.k + 1)):
            return False, "Cluster ids must be consecutive from 1"
        ids = self.assignment[self.ordering.perm]
        if np.any(np.diff(ids) < 0) or np.any(np.diff(ids) > 1):
            return False, "Clusters must be contiguous runs numbered along the ordering"
        return True, None

    def to_dict(self, labels=None):
        if labels is None:
            labels = [str(i) for i in range(self.assignment.size)]
        return {
            'assignment': {labels[i]: int(cid) for i, cid in enumerate(self.assignment)},
            'ordering': [labels[i] for i in self.ordering.perm],
            'k': self.k,
            'score': self.score,
            'cost': self.ordering.cost,
            'converged': self.converged,
        }

    def __repr__(self):
        return f"Partition(k={self.k}, score={self.score:.6f}, converged={self.converged})"


class AffinityMatrix:
    """Co-assignment frequencies over n_runs partitions."""

    def __init__(self, counts, n_runs):
        self.counts = np.asarray(counts, dtype=np.int64)
        self.n_runs = int(n_runs)

    @property
    def a(self):
        return self.counts / float(self.n_runs)

    def is_binary(self):
        return bool(np.all((self.counts == 0) | (self.counts == self.n_runs)))

    def __eq__(self, other):
        if not isinstance(other, AffinityMatrix):
            return NotImplemented
        return self.n_runs == other.n_runs and np.array_equal(self.counts, other.counts)

    def __repr__(self):
        return f"AffinityMatrix(n={self.counts.shape[0]}, n_runs={self.n_runs})"


# ---------------------------- portfolio ---------------------------------

class Eigenportfolio:
    """Sum-normalized eigenvector weights and the portfolio return series."""

    def __init__(self, k, weights, returns, r_squared):
        self.k = int(k)
        self.weights = np.asarray(weights, dtype=float)
        self.returns = np.asarray(returns, dtype=float)
        self.r_squared = float(r_squared)

    def validate(self):
        if not np.isclose(self.weights.sum(), 1.0, atol=1e-10, rtol=0.0):
            return False, "Weights must sum to 1"
        return True, None

    def to_dict(self):
        return {'k': self.k, 'weights': self.weights.tolist(), 'r_squared': self.r_squared}

    def __repr__(self):
        return f"Eigenportfolio(k={self.k}, r_squared={self.r_squared:.4f})"


class IndexSeries:
    """Price index compounded from an eigenportfolio's returns."""

    def __init__(self, base, values, portfolio_k=1):
        self.base = float(base)
        self.values = np.asarray(values, dtype=float)
        self.portfolio_k = int(portfolio_k)

    def log_returns(self):
        return np.diff(np.log(self.values))

    def validate(self):
        if self.values.size == 0 or self.values[0] != self.base:
            return False, "Index must start at its base"
        if np.any(self.values <= 0):
            return False, "Index values must be strictly positive"
        return True, None

    def __repr__(self):
        return f"IndexSeries(base={self.base}, length={self.values.size}, k={self.portfolio_k})"


# ------------------------------ synth -----------------------------------

class BlockModelSpec:
    """Planted block correlation structure with known labels."""

    def __init__(self, block_sizes, intra, inter, t, seed):
        """
        Args:
            block_sizes (list): K positive sizes summing to N
            intra (float or list): Per-block intra correlation in (0, 1)
            inter (float or array): K x K between-block correlations
            t (int): Sample count
            seed (int): Random seed
        """
        self.block_sizes = [int(s) for s in block_sizes]
        k = len(self.block_sizes)
        self.intra = np.broadcast_to(np.asarray(intra, dtype=float), (k,)).copy()
        self.inter = np.broadcast_to(np.asarray(inter, dtype=float), (k, k)).copy()
        self.t = int(t)
        self.seed = int(seed)

    @property
    def n(self):
        return sum(self.block_sizes)

    def labels(self):
        """Ground-truth cluster id (1-based) per series."""
        return np.repeat(np.arange(1, len(self.block_sizes) + 1), self.block_sizes)

    def target_matrix(self):
        """Implied target correlation matrix."""
        labels = self.labels() - 1
        target = self.inter[np.ix_(labels, labels)].copy()
        same = labels[:, None] == labels[None, :]
        target[same] = self.intra[labels][np.nonzero(same)[0]]
        np.fill_diagonal(target, 1.0)
        return target

    def validate(self):
        if not self.block_sizes or any(s < 1 for s in self.block_sizes):
            return False, "Block sizes must be positive"
        if np.any(self.intra <= 0) or np.any(self.intra >= 1):
            return False, "Intra-block correlations must lie in (0, 1)"
        if not np.allclose(self.inter, self.inter.T):
            return False, "Inter-block correlations must be symmetric"
        if self.t < 2:
            return False, "At least 2 samples are required"
        if np.linalg.eigvalsh(self.target_matrix()).min() < -1e-10:
            return False, "Target correlation matrix is not positive semidefinite"
        return True, None

    def to_dict(self):
        return {'block_sizes': self.block_sizes, 'intra': self.intra.tolist(),
                'inter': self.inter.tolist(), 't': self.t, 'seed': self.seed}

    def __repr__(self):
        return f"BlockModelSpec(sizes={self.block_sizes}, t={self.t}, seed={self.seed})"


class FactorModelSpec:
    """One-factor return model r_i(t) = beta_i f(t) + idio_sigma e_i(t)."""

    def __init__(self, n, t, betas, idio_sigma, seed, bubble_amplitude=0.0, scale=1.0):
        self.n = int(n)
        self.t = int(t)
        self.betas = np.asarray(betas, dtype=float)
        self.idio_sigma = float(idio_sigma)
        self.seed = int(seed)
        self.bubble_amplitude = float(bubble_amplitude)
        self.scale = float(scale)

    def validate(self):
        if self.betas.shape != (self.n,):
            return False, "One beta per series is required"
        if not np.all(np.isfinite(self.betas)):
            return False, "Betas must be finite"
        if self.idio_sigma <= 0:
            return False, "idio_sigma must be positive"
        if self.scale <= 0:
            return False, "scale must be positive"
        return True, None

    def to_dict(self):
        return {'n': self.n, 't': self.t, 'betas': self.betas.tolist(), 'idio_sigma': self.idio_sigma,
                'seed': self.seed, 'bubble_amplitude': self.bubble_amplitude, 'scale': self.scale}

    def __repr__(self):
        return f"FactorModelSpec(n={self.n}, t={self.t}, idio_sigma={self.idio_sigma:.4f})"


# ------------------------------- cli ------------------------------------

class RunConfig:
    """Every parameter of a CLI run; echoed into each JSON output."""

    def __init__(self, input_path=None, layout='wide', delta_t=1, clip_threshold=0.40,
                 n_runs=200, annealing=None, gamma=1.0, dominance=0.5, seed=None,
                 output_dir='results', bins=50, prominence=0.05, k_smallest=4,
                 index_base=None, jobs=1, align='intersection', strict=False, bulk_guard=True):
        self.input_path = input_path
        self.layout = layout
        self.delta_t = int(delta_t)
        self.clip_threshold = float(clip_threshold)
        self.n_runs = int(n_runs)
        self.annealing = annealing or AnnealingConfig()
        self.gamma = float(gamma)
        self.dominance = float(dominance)
        self.seed = seed
        self.output_dir = output_dir
        self.bins = int(bins)
        self.prominence = float(prominence)
        self.k_smallest = int(k_smallest)
        self.index_base = index_base
        self.jobs = int(jobs)
        self.align = align
        self.strict = bool(strict)
        self.bulk_guard = bool(bulk_guard)

    def validate(self, stochastic=False):
        """
        Validate run parameters.

        Args:
            stochastic (bool): The command anneals or samples, so a seed is mandatory

        Returns:
            tuple: (is_valid, error_message)
        """
        if self.layout not in ('wide', 'long'):
            return False, "layout must be 'wide' or 'long'"
        if self.align not in ('intersection', 'union'):
            return False, "align must be 'intersection' or 'union'"
        if self.delta_t < 1:
            return False, "delta_t must be a positive integer"
        if self.clip_threshold <= 0:
            return False, "clip_threshold must be positive"
        if self.n_runs < 1:
            return False, "n_runs must be at least 1"
        if self.gamma <= 0:
            return False, "gamma must be positive"
        if not 0 < self.dominance <= 1:
            return False, "dominance must lie in (0, 1]"
        if self.bins < 1:
            return False, "bins must be positive"
        if self.prominence < 0:
            return False, "prominence must be non-negative"
        if self.k_smallest < 0:
            return False, "k_smallest must be non-negative"
        if self.index_base is not None and self.index_base <= 0:
            return False, "index base must be positive"
        if self.jobs == 0:
            return False, "jobs must be non-zero"
        if stochastic and self.seed is None:
            return False, "A seed is required for stochastic commands"
        return self.annealing.validate()

    def to_dict(self):
        # jobs and output_dir are left out: they must not change the results
        return {
            'input_path': str(self.input_path) if self.input_path is not None else None,
            'layout': self.layout,
            'align': self.align,
            'delta_t': self.delta_t,
            'clip_threshold': self.clip_threshold,
            'n_runs': self.n_runs,
            'annealing': self.annealing.to_dict(),
            'gamma': self.gamma,
            'bulk_guard': self.bulk_guard,
            'dominance': self.dominance,
            'seed': self.seed,
            'bins': self.bins,
            'prominence': self.prominence,
            'k_smallest': self.k_smallest,
            'index_base': self.index_base,
        }

    def __repr__(self):
        return f"RunConfig(input='{self.input_path}', seed={self.seed}, n_runs={self.n_runs})"
