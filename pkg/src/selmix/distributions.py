"""Shared density and sampling helpers built on scipy primitives.

Everything here is standard-distribution plumbing used by the model,
sampler and analysis modules.  Log densities are hand-rolled on top of
``gammaln`` so that ratios needed inside tight Metropolis loops stay cheap
and so that degenerate one-component edge cases behave predictably.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import gammaln, multigammaln, xlogy

LOG_2PI = np.log(2.0 * np.pi)


def pairwise_log_gap_sum(values):
    """Sum of log |v_i - v_j| over all pairs i < j.

    Returns 0.0 for inputs with fewer than two entries (empty product) and
    -inf whenever two entries tie exactly.
    """
    vals = np.asarray(values, dtype=float)
    k = vals.shape[0]
    if k < 2:
        return 0.0
    gaps = np.abs(vals[:, None] - vals[None, :])[np.triu_indices(k, 1)]
    if np.any(gaps == 0.0):
        return -np.inf
    return float(np.log(gaps).sum())


def dirichlet_log_pdf(w, alpha):
    """Dirichlet log density; valid for any dimension >= 1."""
    w = np.asarray(w, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    if w.shape != alpha.shape:
        raise ValueError("weight and concentration vectors must match in length")
    return float(gammaln(alpha.sum()) - gammaln(alpha).sum() + xlogy(alpha - 1.0, w).sum())


def gamma_log_pdf(x, shape, rate):
    """Gamma log density under the shape/rate parameterization."""
    if x <= 0.0:
        return -np.inf
    return float(shape * np.log(rate) - gammaln(shape) + (shape - 1.0) * np.log(x) - rate * x)


def gaussian_log_pdf(y, mean, cov):
    """Multivariate normal log density for every row of ``y``.

    Parameters
    ----------
    y : array of shape (n, d)
    mean : array of shape (d,)
    cov : SPD array of shape (d, d)

    Returns
    -------
    array of shape (n,)
    """
    y = np.atleast_2d(np.asarray(y, dtype=float))
    d = y.shape[1]
    chol = np.linalg.cholesky(np.asarray(cov, dtype=float))
    resid = y - np.asarray(mean, dtype=float)
    z = solve_triangular(chol, resid.T, lower=True)
    return -0.5 * (z * z).sum(axis=0) - np.log(np.diag(chol)).sum() - 0.5 * d * LOG_2PI


def invwishart_log_pdf(sigma, scale, df):
    """Inverse-Wishart log density with scale matrix ``scale`` and ``df`` dof."""
    scale = np.asarray(scale, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    d = scale.shape[0]
    if df <= d - 1:
        raise ValueError("degrees of freedom must exceed dim - 1")
    chol_scale = np.linalg.cholesky(scale)
    chol_sigma = np.linalg.cholesky(sigma)
    logdet_scale = 2.0 * np.log(np.diag(chol_scale)).sum()
    logdet_sigma = 2.0 * np.log(np.diag(chol_sigma)).sum()
    # tr(scale @ sigma^{-1}) through triangular solves against the Cholesky factor
    half = solve_triangular(chol_sigma, chol_scale, lower=True)
    trace = (half * half).sum()
    return float(
        0.5 * df * logdet_scale
        - 0.5 * df * d * np.log(2.0)
        - multigammaln(0.5 * df, d)
        - 0.5 * (df + d + 1.0) * logdet_sigma
        - 0.5 * trace
    )


def sample_invwishart(rng, scale, df):
    """Draw one inverse-Wishart matrix by the Bartlett decomposition.

    Requires df > d - 1; fractional degrees of freedom are fine because the
    Bartlett diagonal uses chi-square variates with real-valued dof.
    """
    scale = np.asarray(scale, dtype=float)
    d = scale.shape[0]
    if df <= d - 1:
        raise ValueError("degrees of freedom must exceed dim - 1")
    chol_prec = np.linalg.cholesky(np.linalg.inv(scale))
    bart = np.zeros((d, d))
    diag_df = df - np.arange(d)
    bart[np.diag_indices(d)] = np.sqrt(rng.chisquare(diag_df))
    if d > 1:
        bart[np.tril_indices(d, -1)] = rng.standard_normal(d * (d - 1) // 2)
    root = chol_prec @ bart
    wishart = root @ root.T
    sigma = np.linalg.inv(wishart)
    return 0.5 * (sigma + sigma.T)
