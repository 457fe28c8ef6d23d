"""Posterior summaries: similarity matrices, point-estimate partitions,
prior cluster-count simulation, and repulsion-scale elicitation.

Partition summaries are label-invariant: they depend only on which
observations share a component, never on the component indices themselves.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ensemble import GeParams, sample_ge
from .selberg import SdirParams, sample_sdir

__all__ = [
    "PosteriorTrace",
    "count_allocated",
    "posterior_similarity",
    "binder_estimate",
    "prior_ma_simulation",
    "kmeans",
    "center_gap_by_dimension",
    "elicit_zeta",
]


@dataclass
class PosteriorTrace:
    """Retained MCMC samples, one row per draw.

    ``alloc`` is (T, n) with 0-based component labels; ``m_allocated`` is
    the number of distinct labels per draw; ``weights`` is an optional list
    of per-draw weight vectors (ragged across draws when m changes).
    """

    m: np.ndarray
    m_allocated: np.ndarray
    alloc: np.ndarray
    gamma: np.ndarray
    zeta: np.ndarray
    weights: list | None = None

    @property
    def n_samples(self):
        return self.m.shape[0]

    @property
    def n_obs(self):
        return self.alloc.shape[1]


def count_allocated(alloc):
    """Number of distinct labels in one allocation vector."""
    alloc = np.asarray(alloc)
    if alloc.size == 0:
        raise ValueError("allocation vector must be non-empty")
    return int(np.unique(alloc).size)


def posterior_similarity(trace):
    """Pairwise co-allocation frequencies across the trace, shape (n, n).

    Entry (i, j) is the fraction of samples in which observations i and j
    share a component; the diagonal is exactly 1.
    """
    if trace.n_samples < 1:
        raise ValueError("trace must contain at least one sample")
    n = trace.n_obs
    sim = np.zeros((n, n))
    for row in trace.alloc:
        sim += row[:, None] == row[None, :]
    sim /= trace.n_samples
    return sim


def canonical_labels(alloc):
    """Relabel a partition by order of first appearance (label-invariant form)."""
    alloc = np.asarray(alloc)
    _, canon = np.unique(alloc, return_inverse=True)
    # np.unique sorts by label value; remap to first-appearance order
    order = {}
    out = np.empty(alloc.size, dtype=np.int64)
    nxt = 0
    for i, lab in enumerate(canon):
        if lab not in order:
            order[lab] = nxt
            nxt += 1
        out[i] = order[lab]
    return out


def binder_loss(alloc, sim):
    """Sum over pairs i < j of (co-allocation indicator - similarity)^2."""
    alloc = np.asarray(alloc)
    eq = (alloc[:, None] == alloc[None, :]).astype(float)
    diff = eq - sim
    iu = np.triu_indices(alloc.size, 1)
    return float((diff[iu] ** 2).sum())


def binder_estimate(trace, sim):
    """Sampled partition minimizing the pairwise squared loss against ``sim``.

    Ties break toward the earliest sample.  Returns the allocation vector
    exactly as sampled (labels included), though the choice itself depends
    only on the induced partition.
    """
    if trace.n_samples < 1:
        raise ValueError("trace must contain at least one sample")
    seen = {}
    for idx in range(trace.n_samples):
        key = canonical_labels(trace.alloc[idx]).tobytes()
        if key not in seen:
            seen[key] = idx
    best_idx = None
    best_loss = np.inf
    for idx in sorted(seen.values()):
        loss = binder_loss(trace.alloc[idx], sim)
        if loss < best_loss:
            best_loss = loss
            best_idx = idx
    return trace.alloc[best_idx].copy()


def prior_ma_simulation(alpha0, gamma, m, n, reps, rng, burn_in=1000, thin=5):
    """Distribution of the allocated-component count under the prior.

    Repeatedly draws a weight vector from the Selberg Dirichlet, assigns
    ``n`` observations categorically, and counts the distinct components
    hit.  Returns a probability vector of length m + 1 indexed by the
    count (entry 0 is always zero).
    """
    if n < 1 or reps < 1:
        raise ValueError("n and reps must be >= 1")
    weights = sample_sdir(SdirParams(alpha0, gamma, m), reps, rng, burn_in=burn_in, thin=thin)
    counts = rng.multinomial(n, weights)
    hit = (counts > 0).sum(axis=1)
    probs = np.bincount(hit, minlength=m + 1).astype(float) / reps
    return probs


def kmeans(y, k, rng, n_restarts=10, tol=1e-8, max_iter=300):
    """Lloyd's algorithm with k-means++ seeding and multiple restarts.

    Returns (centers, labels, inertia) for the best restart by within-
    cluster sum of squares.
    """
    y = np.asarray(y, dtype=float)
    n = y.shape[0]
    if k < 1 or k > n:
        raise ValueError("k must lie in 1..n")
    best = None
    for _ in range(n_restarts):
        centers = _kmeans_pp_init(y, k, rng)
        for _ in range(max_iter):
            dists = ((y[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
            labels = dists.argmin(axis=1)
            new_centers = centers.copy()
            for j in range(k):
                mask = labels == j
                if mask.any():
                    new_centers[j] = y[mask].mean(axis=0)
                else:
                    new_centers[j] = y[rng.integers(n)]
            shift = np.abs(new_centers - centers).max()
            centers = new_centers
            if shift < tol:
                break
        dists = ((y[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        labels = dists.argmin(axis=1)
        inertia = float(dists[np.arange(n), labels].sum())
        if best is None or inertia < best[2]:
            best = (centers, labels, inertia)
    return best


def _kmeans_pp_init(y, k, rng):
    n = y.shape[0]
    centers = np.empty((k, y.shape[1]))
    centers[0] = y[rng.integers(n)]
    closest = ((y - centers[0]) ** 2).sum(axis=1)
    for j in range(1, k):
        total = closest.sum()
        if total <= 0.0:
            centers[j] = y[rng.integers(n)]
        else:
            centers[j] = y[rng.choice(n, p=closest / total)]
        closest = np.minimum(closest, ((y - centers[j]) ** 2).sum(axis=1))
    return centers


def center_gap_by_dimension(centers):
    """Mean absolute pairwise center distance, one entry per dimension."""
    centers = np.asarray(centers, dtype=float)
    k = centers.shape[0]
    if k < 2:
        raise ValueError("need at least two centers")
    iu = np.triu_indices(k, 1)
    gaps = np.abs(centers[:, None, :] - centers[None, :, :])
    return gaps[iu].mean(axis=0)


def elicit_zeta(y, k, zeta_grid, rng, reps=200):
    """Pick the grid zeta whose ensemble matches the data's cluster spread.

    Runs k-means on the data, computes the mean absolute pairwise center
    distance averaged over dimensions, simulates the same gap statistic
    under the location ensemble for each candidate zeta, and returns the
    candidate with the smallest absolute discrepancy.  The ensemble gap
    shrinks as zeta grows, so degenerate single-cluster data selects the
    largest grid value.
    """
    zeta_grid = [float(z) for z in zeta_grid]
    if not zeta_grid or any(z <= 0.0 for z in zeta_grid):
        raise ValueError("zeta grid must hold positive values")
    centers, _, _ = kmeans(np.asarray(y, dtype=float), k, rng)
    target = float(center_gap_by_dimension(centers).mean())
    iu = np.triu_indices(k, 1)
    best_z, best_gap = None, np.inf
    for z in zeta_grid:
        draws = sample_ge(GeParams(z, k), reps, rng)
        gaps = np.abs(draws[:, :, None] - draws[:, None, :])[:, iu[0], iu[1]]
        stat = float(gaps.mean())
        if abs(stat - target) < best_gap:
            best_gap = abs(stat - target)
            best_z = z
    return best_z
