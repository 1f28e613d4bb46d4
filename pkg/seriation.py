#!/usr/bin/env python3
"""
Seriation module for the crude oil correlation toolkit

Orders a correlation matrix by simulated annealing on the linear arrangement
cost sum_ij C_ij |i - j|, cuts the ordered matrix into contiguous blocks by
dynamic programming, and stabilizes the blocks by consensus over repeated
stochastic runs.
"""

from __future__ import annotations

import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from numba import njit
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components
from sklearn.metrics import adjusted_rand_score
from tabulate import tabulate

from models import (AffinityMatrix, AnnealingConfig, CorrelationMatrix, InputError,
                    Ordering, Partition, validate_permutation)
from spectra import mp_bounds
from utils import write_csv, write_json


logger = logging.getLogger(__name__)

DEFAULT_N_RUNS = 200
DEFAULT_GAMMA = 1.0
MAX_CONSENSUS_ITERATIONS = 50
# moves changing the cost by less than this share of the arrangement scale are no-ops
NEUTRAL_TOLERANCE = 1e-9

# ----------------------------- Utilities --------------------------------

def _as_matrix(c) -> np.ndarray:
    matrix = c.c if isinstance(c, CorrelationMatrix) else c
    matrix = np.ascontiguousarray(matrix, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise InputError("Seriation needs a square matrix")
    return matrix


def derive_seed(master: int, *path: int) -> int:
    """Deterministic 32-bit seed for (master, level, run, ...)."""
    if master < 0:
        raise InputError("Seeds must be non-negative")
    return int(np.random.SeedSequence([int(master), *[int(p) for p in path]]).generate_state(1)[0])


def seriation_cost(c, perm: Sequence[int]) -> float:
    """
    Linear arrangement cost sum_{i,j} C[perm(i)][perm(j)] |i - j|.

    Args:
        c (CorrelationMatrix or np.ndarray): Square matrix
        perm (sequence): Series placed at each position

    Returns:
        float: The cost

    Raises:
        InputError: perm is not a permutation of 0..N-1
    """
    matrix = _as_matrix(c)
    n = matrix.shape[0]
    if not validate_permutation(perm, n):
        raise InputError("perm must be a permutation of 0..N-1")
    perm = np.asarray(perm)
    positions = np.arange(n)
    distance = np.abs(positions[:, None] - positions[None, :])
    return float(np.sum(matrix[np.ix_(perm, perm)] * distance))


# --------------------------- Annealing kernel ----------------------------

@njit(cache=False)
def _swap_delta(c, perm, p, q):
    a = perm[p]
    b = perm[q]
    total = 0.0
    for r in range(perm.size):
        if r == p or r == q:
            continue
        y = perm[r]
        total += (c[a, y] - c[b, y]) * (abs(q - r) - abs(p - r))
    return 2.0 * total


@njit(cache=False)
def _reverse_delta(c, perm, p, q):
    n = perm.size
    total = 0.0
    for i in range(p, q + 1):
        x = perm[i]
        left = 0.0
        for r in range(p):
            left += c[x, perm[r]]
        right = 0.0
        for r in range(q + 1, n):
            right += c[x, perm[r]]
        total += (p + q - 2 * i) * (left - right)
    return 2.0 * total


@njit(cache=False)
def _draw_move(n, swap_fraction):
    p = np.random.randint(0, n)
    q = np.random.randint(0, n - 1)
    if q >= p:
        q += 1
    lo = min(p, q)
    hi = max(p, q)
    return lo, hi, np.random.random() < swap_fraction


@njit(cache=False)
def _calibrate_kernel(c, n_samples, swap_fraction, eps, seed):
    # mean uphill step from the identity ordering; falls back to mean |delta|
    np.random.seed(seed)
    n = c.shape[0]
    perm = np.arange(n)
    uphill = 0.0
    n_uphill = 0
    moving = 0.0
    n_moving = 0
    for _ in range(n_samples):
        lo, hi, swap = _draw_move(n, swap_fraction)
        delta = _swap_delta(c, perm, lo, hi) if swap else _reverse_delta(c, perm, lo, hi)
        if delta > eps:
            uphill += delta
            n_uphill += 1
        if abs(delta) > eps:
            moving += abs(delta)
            n_moving += 1
    if n_uphill > 0:
        return uphill / n_uphill
    if n_moving > 0:
        return moving / n_moving
    return 0.0


@njit(cache=False)
def _anneal_kernel(c, t0, t_min, cooling, n_moves, max_idle, max_temperatures, swap_fraction, eps, seed):
    np.random.seed(seed)
    n = c.shape[0]
    perm = np.arange(n)
    best = perm.copy()
    cost = 0.0
    best_cost = 0.0
    temperature = t0
    idle = 0
    steps = 0
    for _ in range(max_temperatures):
        steps += 1
        accepted = 0
        for _ in range(n_moves):
            lo, hi, swap = _draw_move(n, swap_fraction)
            delta = _swap_delta(c, perm, lo, hi) if swap else _reverse_delta(c, perm, lo, hi)
            if delta > eps:
                if np.random.random() >= np.exp(-delta / temperature):
                    continue
            elif delta >= -eps:
                continue
            if swap:
                tmp = perm[lo]
                perm[lo] = perm[hi]
                perm[hi] = tmp
            else:
                i = lo
                j = hi
                while i < j:
                    tmp = perm[i]
                    perm[i] = perm[j]
                    perm[j] = tmp
                    i += 1
                    j -= 1
            cost += delta
            accepted += 1
            if cost < best_cost - eps:
                best_cost = cost
                best[:] = perm
        if accepted == 0:
            idle += 1
            if idle >= max_idle:
                break
        else:
            idle = 0
        temperature *= cooling
        if temperature < t_min:
            break
    return best, steps


def schedule_length(schedule: AnnealingConfig) -> int:
    """Most temperatures a schedule can visit before the floor or the cap stops it."""
    if schedule.min_temperature_ratio <= 0:
        return schedule.max_temperatures
    floor = int(np.floor(np.log(schedule.min_temperature_ratio) / np.log(schedule.cooling))) + 1
    return min(schedule.max_temperatures, floor)


def anneal_ordering(c, schedule: Optional[AnnealingConfig] = None, seed: int = 0) -> Ordering:
    """
    Minimize the seriation cost by simulated annealing.

    Moves are pairwise swaps and segment reversals; the start is the identity
    ordering and the best ordering seen is returned, never one costlier than
    the identity.

    Args:
        c (CorrelationMatrix or np.ndarray): Square similarity matrix
        schedule (AnnealingConfig, optional): Cooling schedule
        seed (int): Seed; equal seeds give equal orderings

    Returns:
        Ordering: Best permutation and its cost
    """
    matrix = _as_matrix(c)
    n = matrix.shape[0]
    if n < 2:
        raise InputError("Need at least 2 series to order")
    schedule = schedule or AnnealingConfig()
    is_valid, error = schedule.validate()
    if not is_valid:
        raise InputError(error)

    identity = np.arange(n, dtype=np.int64)
    identity_cost = seriation_cost(matrix, identity)
    if n == 2:
        return Ordering(identity, identity_cost)

    eps = NEUTRAL_TOLERANCE * max(1.0, seriation_cost(np.abs(matrix), identity))
    calibration_seed = derive_seed(seed, 0)
    anneal_seed = derive_seed(seed, 1)
    step = _calibrate_kernel(matrix, schedule.calibration_moves, schedule.swap_fraction, eps, calibration_seed)
    if step <= 0:
        logger.debug("No move changes the cost; keeping the identity ordering")
        return Ordering(identity, identity_cost)

    t0 = -step / np.log(schedule.initial_acceptance)
    perm, steps = _anneal_kernel(matrix, t0, t0 * schedule.min_temperature_ratio, schedule.cooling,
                                 schedule.moves_per_series * n, schedule.max_idle_temperatures,
                                 schedule.max_temperatures, schedule.swap_fraction, eps, anneal_seed)
    logger.debug("Annealed over %d temperatures", steps)
    cost = seriation_cost(matrix, perm)
    if cost >= identity_cost:
        return Ordering(identity, identity_cost, steps)
    return Ordering(perm, cost, steps)


# ---------------------------- Segmentation -------------------------------

def _mean_offdiagonal(matrix: np.ndarray) -> float:
    n = matrix.shape[0]
    return float((matrix.sum() - np.trace(matrix)) / (n * (n - 1)))


def _better(candidate: Tuple[float, float, int], incumbent: Tuple[float, float, int], tol: float) -> bool:
    # score first, then intra-block mass, then more blocks
    if candidate[0] > incumbent[0] + tol:
        return True
    if candidate[0] < incumbent[0] - tol:
        return False
    if candidate[1] > incumbent[1] + tol:
        return True
    if candidate[1] < incumbent[1] - tol:
        return False
    return candidate[2] > incumbent[2]


def partition_score(c, assignment: Sequence[int], gamma: float = DEFAULT_GAMMA) -> float:
    """
    Segmentation objective of an assignment.

    sum over blocks of (sum_{i != j in block} C_ij - gamma <c> m (m - 1)).
    """
    matrix = _as_matrix(c)
    assignment = np.asarray(assignment)
    null = gamma * _mean_offdiagonal(matrix)
    score = 0.0
    for cid in np.unique(assignment):
        members = np.flatnonzero(assignment == cid)
        m = members.size
        block = matrix[np.ix_(members, members)]
        score += block.sum() - np.trace(block) - null * m * (m - 1)
    return float(score)


def segment_blocks(c, ordering: Ordering, gamma: float = DEFAULT_GAMMA) -> Partition:
    """
    Optimal cut of an ordering into contiguous blocks.

    Maximizes sum over blocks of (sum_{i != j in block} C_ij - gamma <c> m (m - 1))
    exactly by dynamic programming over block boundaries. Ties are broken by
    larger intra-block mass, then by more blocks.

    Args:
        c (CorrelationMatrix or np.ndarray): Square similarity matrix
        ordering (Ordering): Ordering to cut
        gamma (float): Resolution; larger values give smaller blocks

    Returns:
        Partition: Clusters numbered 1..K along the ordering
    """
    matrix = _as_matrix(c)
    n = matrix.shape[0]
    if n < 2:
        raise InputError("Need at least 2 series to segment")
    if gamma <= 0:
        raise InputError("gamma must be positive")
    perm = ordering.perm
    if not validate_permutation(perm, n):
        raise InputError("Ordering is not a permutation of the matrix indices")

    ordered = matrix[np.ix_(perm, perm)]
    null = gamma * _mean_offdiagonal(matrix)
    prefix = np.zeros((n + 1, n + 1))
    prefix[1:, 1:] = ordered.cumsum(axis=0).cumsum(axis=1)
    diag = np.concatenate([[0.0], np.cumsum(np.diag(ordered))])
    tol = 1e-10 * (1.0 + float(np.abs(ordered).sum()))

    best: List[Tuple[float, float, int]] = [(0.0, 0.0, 0)]
    back = [0] * (n + 1)
    for e in range(1, n + 1):
        incumbent = None
        for s in range(e):
            m = e - s
            mass = prefix[e, e] - prefix[s, e] - prefix[e, s] + prefix[s, s] - (diag[e] - diag[s])
            prev = best[s]
            candidate = (prev[0] + mass - null * m * (m - 1), prev[1] + mass, prev[2] + 1)
            if incumbent is None or _better(candidate, incumbent, tol):
                incumbent = candidate
                back[e] = s
        best.append(incumbent)

    cuts = []
    e = n
    while e > 0:
        cuts.append((back[e], e))
        e = back[e]
    cuts.reverse()

    assignment = np.empty(n, dtype=np.int64)
    for cid, (s, e) in enumerate(cuts, 1):
        assignment[perm[s:e]] = cid
    return Partition(assignment, ordering, best[n][0])


# ----------------------------- Consensus ---------------------------------

def _single_run(matrix: np.ndarray, schedule: AnnealingConfig, seed: int, gamma: float) -> Partition:
    return segment_blocks(matrix, anneal_ordering(matrix, schedule, seed), gamma)


def _run_level(matrix, n_runs, schedule, seed, level, gamma, jobs) -> List[Partition]:
    seeds = [derive_seed(seed, level, run) for run in range(n_runs)]
    if jobs == 1:
        return [_single_run(matrix, schedule, s, gamma) for s in seeds]
    return Parallel(n_jobs=jobs)(delayed(_single_run)(matrix, schedule, s, gamma) for s in seeds)


def affinity_matrix(partitions: Sequence[Partition]) -> AffinityMatrix:
    """Co-assignment counts over the given partitions."""
    n = partitions[0].assignment.size
    counts = np.zeros((n, n), dtype=np.int64)
    for p in partitions:
        counts += p.assignment[:, None] == p.assignment[None, :]
    return AffinityMatrix(counts, len(partitions))


def _clique_labels(affinity: AffinityMatrix) -> Optional[np.ndarray]:
    # labels if the always-together pairs form disjoint cliques covering every pair
    if not affinity.is_binary():
        return None
    together = affinity.counts == affinity.n_runs
    _, labels = connected_components(csr_matrix(together), directed=False)
    if not np.array_equal(together, labels[:, None] == labels[None, :]):
        return None
    return labels


def _signal_eigenvalues(c) -> Optional[int]:
    # eigenvalues above the bulk edge, None when the sample length is unknown
    if not isinstance(c, CorrelationMatrix) or c.t_effective < c.n or c.n < 2:
        return None
    edge = mp_bounds(c.t_effective, c.n).lambda_max
    return int(np.sum(np.linalg.eigvalsh(c.c) > edge))


def _best_partition(partitions: Sequence[Partition]) -> Partition:
    best = partitions[0]
    for p in partitions[1:]:
        if p.score > best.score:
            best = p
    return best


def _consensus_ordering(matrix, labels, reference: Ordering) -> np.ndarray:
    # clusters laid out by mean position in the reference ordering
    position = np.empty(reference.perm.size, dtype=np.int64)
    position[reference.perm] = np.arange(reference.perm.size)
    groups = {}
    for i in reference.perm:
        groups.setdefault(int(labels[i]), []).append(int(i))
    order = sorted(groups.values(), key=lambda members: (np.mean(position[members]), members[0]))
    return np.array([i for members in order for i in members], dtype=np.int64)


def consensus_cluster(c, n_runs: int = DEFAULT_N_RUNS, schedule: Optional[AnnealingConfig] = None,
                      seed: int = 0, gamma: float = DEFAULT_GAMMA, jobs: int = 1,
                      max_iterations: int = MAX_CONSENSUS_ITERATIONS,
                      bulk_guard: bool = True) -> Tuple[Partition, AffinityMatrix]:
    """
    Consensus partition over repeated anneal + segment runs.

    n_runs runs on C give the first affinity matrix. The same machinery is
    then applied to the affinity matrix, n_runs times per iteration, until two
    consecutive affinity matrices are identical. The returned partition is
    laid out contiguously along the best first-level ordering.

    With bulk_guard, a CorrelationMatrix whose spectrum has at most one
    eigenvalue above the random-matrix bulk (noise, or a market mode alone)
    is kept as a single cluster after the first level.

    Args:
        c (CorrelationMatrix or np.ndarray): Correlation matrix
        n_runs (int): Runs per level
        schedule (AnnealingConfig, optional): Cooling schedule
        seed (int): Master seed; per-run seeds derive from (seed, level, run)
        gamma (float): Segmentation resolution
        jobs (int): Parallel workers (joblib n_jobs); results do not depend on it
        max_iterations (int): Cap on consensus iterations
        bulk_guard (bool): Skip splitting when the spectrum shows no group structure

    Returns:
        tuple: (final Partition, first-level AffinityMatrix)
    """
    matrix = _as_matrix(c)
    if n_runs < 1:
        raise InputError("n_runs must be at least 1")
    schedule = schedule or AnnealingConfig()

    first_runs = _run_level(matrix, n_runs, schedule, seed, 0, gamma, jobs)
    first = affinity_matrix(first_runs)
    current = first
    last_runs = first_runs
    labels = None
    converged = False
    iterations = 0

    n_signal = _signal_eigenvalues(c) if bulk_guard else None
    if n_signal is not None and n_signal <= 1:
        logger.info("%d eigenvalue(s) above the bulk; keeping a single cluster", n_signal)
        labels = np.zeros(matrix.shape[0], dtype=np.int64)
        converged = True
        max_iterations = 0

    for iteration in range(1, max_iterations + 1):
        iterations = iteration
        labels = _clique_labels(current)
        if labels is not None:
            converged = True
            break
        last_runs = _run_level(current.a, n_runs, schedule, seed, iteration, gamma, jobs)
        following = affinity_matrix(last_runs)
        if following == current:
            converged = True
            break
        current = following

    if labels is None:
        labels = _best_partition(last_runs).assignment
        if not converged:
            logger.warning("Consensus did not converge after %d iterations", max_iterations)
    logger.info("Consensus after %d iteration(s): %d cluster(s)", iterations, len(np.unique(labels)))

    reference = min(first_runs, key=lambda p: p.ordering.cost).ordering
    perm = _consensus_ordering(matrix, labels, reference)
    assignment = np.empty_like(perm)
    cid = 0
    previous = None
    for i in perm:
        if labels[i] != previous:
            cid += 1
            previous = labels[i]
        assignment[i] = cid
    ordering = Ordering(perm, seriation_cost(matrix, perm))
    return Partition(assignment, ordering, partition_score(matrix, assignment, gamma), converged), first


# --------------------------- Partition views ------------------------------

def reorder_eigenvectors(d, p: Partition, ks: Optional[Sequence[int]] = None) -> dict:
    """
    Eigenvector components permuted into cluster-contiguous order.

    Args:
        d (SpectralDecomposition): Spectrum
        p (Partition): Partition covering every series
        ks (sequence, optional): 1-based eigenvector indices (default 2..5)

    Returns:
        dict: order, assignment along the order, cluster boundaries and components per k
    """
    if p.assignment.size != d.n:
        raise InputError("Partition does not cover every series")
    if ks is None:
        ks = range(2, min(5, d.n) + 1)
    order = p.ordering.perm
    return {
        "order": order.tolist(),
        "clusters": p.assignment[order].tolist(),
        "boundaries": p.boundaries(),
        "components": {int(k): d.eigenvectors[order, k - 1] for k in ks},
    }


def blockwise_variance(values, assignment) -> Tuple[float, float]:
    """(within-cluster, between-cluster) variance of a vector's components."""
    values = np.asarray(values, dtype=float)
    assignment = np.asarray(assignment)
    grand = values.mean()
    within = 0.0
    between = 0.0
    for cid in np.unique(assignment):
        part = values[assignment == cid]
        within += np.sum((part - part.mean()) ** 2)
        between += part.size * (part.mean() - grand) ** 2
    return float(within / values.size), float(between / values.size)


def cluster_correlation_summary(c, p: Partition) -> pd.DataFrame:
    """
    Mean coefficient within and between clusters.

    Diagonal entries of the result average the intra-cluster pairs (NaN for
    singletons), off-diagonal entries the inter-cluster pairs.
    """
    matrix = _as_matrix(c)
    k = p.k
    summary = np.full((k, k), np.nan)
    for a in range(1, k + 1):
        rows = np.flatnonzero(p.assignment == a)
        for b in range(a, k + 1):
            cols = np.flatnonzero(p.assignment == b)
            block = matrix[np.ix_(rows, cols)]
            if a == b:
                if rows.size > 1:
                    summary[a - 1, a - 1] = (block.sum() - np.trace(block)) / (rows.size * (rows.size - 1))
            else:
                summary[a - 1, b - 1] = summary[b - 1, a - 1] = block.mean()
    names = [f"cluster_{i}" for i in range(1, k + 1)]
    return pd.DataFrame(summary, index=names, columns=names)


def partition_agreement(p, labels) -> float:
    """Adjusted Rand index between a partition (or assignment) and reference labels."""
    assignment = p.assignment if isinstance(p, Partition) else np.asarray(p)
    return float(adjusted_rand_score(np.asarray(labels), assignment))


def back_diagonal_view(c, p: Partition) -> np.ndarray:
    """Matrix reordered by the partition, columns flipped so blocks sit on the back diagonal."""
    matrix = _as_matrix(c)
    perm = p.ordering.perm
    return matrix[np.ix_(perm, perm)][:, ::-1]


# ------------------------ Display and files ------------------------------

def display_partition(p: Partition, labels: Sequence[str]):
    """Print the clusters in a formatted table."""
    rows = []
    for cid, members in enumerate(p.clusters(), 1):
        names = ", ".join(labels[i] for i in members)
        rows.append([cid, len(members), names if len(names) <= 60 else names[:57] + "..."])
    print("\n" + "=" * 80)
    print(f"Partition: {p.k} cluster(s), score {p.score:.4f}, converged: {p.converged}")
    print("=" * 80 + "\n")
    print(tabulate(rows, headers=["Cluster", "Size", "Members"], tablefmt="grid"))
    print()


def write_partition(p: Partition, labels: Sequence[str], json_path: str, csv_path: str, extra=None):
    """Partition as JSON (label -> cluster, ordering, score, config echo) and label,cluster CSV."""
    report = p.to_dict(list(labels))
    if extra:
        report.update(extra)
    write_json(report, json_path)
    frame = pd.DataFrame({"label": list(labels), "cluster": p.assignment})
    write_csv(frame, csv_path)
    return json_path, csv_path
