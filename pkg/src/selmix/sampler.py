"""Trans-dimensional Gibbs/Metropolis sampler for the repulsive mixture.

One sweep visits, in order: allocations, component means, component
covariances, mixture weights, the repulsion hyperparameters, and a
birth-death move on non-allocated components.  Every Metropolis step has
its log acceptance ratio factored into a pure function of (state, proposal)
so that each ratio can be verified against the complete joint density; the
sweep drivers only draw proposals and apply the accept/reject coin.

Birth inserts the new component at a uniformly chosen slot; death removes a
uniformly chosen non-allocated component and shifts higher labels down, so
allocated components never change identity.  Every death path is the exact
reverse of a birth path (and vice versa), which keeps the move reversible
even though the weight prior is not exchangeable; an append-only birth
would leave middle-slot deaths without a reverse path and visibly distorts
the prior on the component count.

The append-only variant remains available as ``birth_death = "append"``.
It is the bookkeeping written out by the usual derivation of the birth and
death acceptance ratios, it satisfies the same pairwise reciprocity
identity, and its conservative upward mobility yields markedly sparser
posteriors on the number of clusters; but because it is not reversible on
labeled states it does not leave the prior on M invariant (with no data the
sampled M distribution is visibly tilted toward small counts).  The
reversible bookkeeping is the default because exact prior recovery is the
stronger correctness property.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .analysis import PosteriorTrace
from .distributions import LOG_2PI, gamma_log_pdf, pairwise_log_gap_sum, sample_invwishart
from .ensemble import GeParams, ge_log_density, ge_log_norm_const, sample_ge
from .model import Hyperparams, MixtureState, component_log_pdfs, weight_prior_log_density
from .selberg import SdirParams, sdir_log_norm_const

__all__ = [
    "SamplerConfig",
    "StepDiagnostics",
    "SamplerError",
    "update_allocations",
    "update_means",
    "update_covariances",
    "update_weights",
    "update_gamma",
    "update_zeta_full_conditional",
    "update_gamma_ratio_tied",
    "birth_death_step",
    "initial_state",
    "run_sampler",
]

RATE_KEYS = ("means", "weights", "gamma", "zeta", "birth", "death")


class SamplerError(RuntimeError):
    """Raised when a sweep fails; the message carries the sweep index."""


@dataclass
class SamplerConfig:
    hyper: Hyperparams
    seed: int = 0
    record_weights: bool = False


@dataclass
class StepDiagnostics:
    """Acceptance bookkeeping plus the final (possibly adapted) step sizes."""

    accepts: dict
    attempts: dict
    step_mu_final: float
    step_gamma_final: float

    def acceptance_rates(self):
        out = {}
        for key in RATE_KEYS:
            att = self.attempts.get(key, 0)
            out[key] = self.accepts.get(key, 0) / att if att else 0.0
        return out


# ---------------------------------------------------------------------------
# log acceptance ratios (pure functions, unit-tested against the joint)
# ---------------------------------------------------------------------------

def repulsion_log_ratio(gamma, w_num, w_den):
    """2*gamma*(exclude-last log gap sum difference) between two weight vectors."""
    if gamma == 0.0:
        return 0.0
    num = pairwise_log_gap_sum(np.asarray(w_num, dtype=float)[:-1])
    if num == -np.inf:
        return -np.inf
    den = pairwise_log_gap_sum(np.asarray(w_den, dtype=float)[:-1])
    if den == -np.inf:
        return np.inf
    return 2.0 * gamma * (num - den)


def _coord_ge_log_ratio(column, j, new, zeta):
    """Change in the (unnormalized) ensemble log density when one coordinate moves."""
    old = column[j]
    others = np.delete(column, j)
    term = 0.0
    if others.size:
        new_gaps = np.abs(others - new)
        if np.any(new_gaps == 0.0):
            return -np.inf
        with np.errstate(divide="ignore"):
            term = float(np.log(new_gaps).sum() - np.log(np.abs(others - old)).sum())
    return zeta * term - 0.5 * zeta * (new * new - old * old)


def mean_rw_log_accept(state, j, d, mu_new, points):
    """Random-walk move on one coordinate of an allocated component's mean.

    The ratio is the ensemble prior change in dimension ``d`` times the
    Gaussian likelihood change of the ``points`` currently assigned to
    component ``j``; the quadratic form is updated incrementally.
    """
    la = _coord_ge_log_ratio(state.mus[:, d], j, mu_new, state.zeta)
    if la == -np.inf or points is None or len(points) == 0:
        return la
    n = points.shape[0]
    h = mu_new - state.mus[j, d]
    resid_sum = points.sum(axis=0) - n * state.mus[j]
    sigma = state.sigmas[j]
    rhs = np.zeros((state.dim, 2))
    rhs[:, 0] = resid_sum
    rhs[d, 1] = 1.0
    solved = np.linalg.solve(sigma, rhs)
    la += h * solved[d, 0] - 0.5 * n * h * h * solved[d, 1]
    return float(la)


def mean_refresh_log_accept(state, j, d, mu_new, proposal_sd):
    """Independence refresh of a non-allocated mean coordinate from N(0, sd^2)."""
    la = _coord_ge_log_ratio(state.mus[:, d], j, mu_new, state.zeta)
    if la == -np.inf:
        return la
    old = state.mus[j, d]
    return float(la + 0.5 * (mu_new * mu_new - old * old) / proposal_sd**2)


def weights_log_accept(state, w_new):
    """Dirichlet full-conditional proposal leaves only the repulsion ratio."""
    return repulsion_log_ratio(state.gamma, w_new, state.weights)


def gamma_log_accept(state, hyper, gamma_new):
    """Log-normal random walk on gamma against weight prior and hyperprior."""
    if gamma_new <= 0.0:
        return -np.inf
    a0 = hyper.alpha0
    la = weight_prior_log_density(state.weights, a0, gamma_new, state.m)
    la -= weight_prior_log_density(state.weights, a0, state.gamma, state.m)
    la += gamma_log_pdf(gamma_new, hyper.gamma_shape, hyper.gamma_rate)
    la -= gamma_log_pdf(state.gamma, hyper.gamma_shape, hyper.gamma_rate)
    return float(la + np.log(gamma_new) - np.log(state.gamma))


def zeta_log_accept(state, hyper, zeta_new):
    """Log-normal random walk on zeta against the per-dimension ensemble priors."""
    if zeta_new <= 0.0:
        return -np.inf
    la = 0.0
    new_params = GeParams(zeta_new, state.m)
    old_params = GeParams(state.zeta, state.m)
    for d in range(state.dim):
        column = state.mus[:, d]
        la += ge_log_density(column, new_params) - ge_log_density(column, old_params)
    la += gamma_log_pdf(zeta_new, hyper.zeta_shape, hyper.zeta_rate)
    la -= gamma_log_pdf(state.zeta, hyper.zeta_shape, hyper.zeta_rate)
    return float(la + np.log(zeta_new) - np.log(state.zeta))


def tied_gamma_log_accept(state, hyper, gamma_new):
    """Joint move for the ratio mode: gamma walks, zeta follows rho * gamma."""
    if gamma_new <= 0.0:
        return -np.inf
    zeta_new = hyper.rho * gamma_new
    la = 0.0
    new_params = GeParams(zeta_new, state.m)
    old_params = GeParams(state.zeta, state.m)
    for d in range(state.dim):
        column = state.mus[:, d]
        la += ge_log_density(column, new_params) - ge_log_density(column, old_params)
    a0 = hyper.alpha0
    la += weight_prior_log_density(state.weights, a0, gamma_new, state.m)
    la -= weight_prior_log_density(state.weights, a0, state.gamma, state.m)
    la += gamma_log_pdf(gamma_new, hyper.gamma_shape, hyper.gamma_rate)
    la -= gamma_log_pdf(state.gamma, hyper.gamma_shape, hyper.gamma_rate)
    return float(la + np.log(gamma_new) - np.log(state.gamma))


def birth_log_accept(state, hyper, w_new, mu_new, forced):
    """Log acceptance of inserting a non-allocated component.

    ``w_new`` is the proposed (m+1)-weight vector with the newborn's entry
    already in its slot, ``mu_new`` the proposed location (one coordinate
    per dimension); the proposed covariance draws from its prior and
    cancels exactly.  ``forced`` marks the move taken with probability one
    because no non-allocated component existed.  Under the default
    reversible bookkeeping the (m+1)/(m_na+1) factor pairs the uniform
    insertion-slot choice with the reverse move's uniform victim choice;
    the append variant keeps only 1/(m_na+1).
    """
    m, dim = state.m, state.dim
    counts = state.counts()
    m_na = m - int((counts > 0).sum())
    g, z, a0 = state.gamma, state.zeta, hyper.alpha0

    la = np.log(hyper.lam) - np.log(m)
    la += sdir_log_norm_const(SdirParams(a0, g, m)) - sdir_log_norm_const(SdirParams(a0, g, m + 1))
    rep = repulsion_log_ratio(g, w_new, state.weights)
    if rep == -np.inf:
        return -np.inf
    la += rep
    la += dim * (ge_log_norm_const(GeParams(z, m)) - ge_log_norm_const(GeParams(z, m + 1)))
    cross = np.abs(state.mus - mu_new[None, :])
    if np.any(cross == 0.0):
        return -np.inf
    la += z * float(np.log(cross).sum())
    la += np.log1p(-hyper.q_birth)
    if not forced:
        la -= np.log(hyper.q_birth)
    la -= np.log(m_na + 1.0)
    if hyper.birth_death == "reversible":
        la += np.log(m + 1.0)
    conc_total = m * a0 + counts.sum()
    la += gammaln(a0) + gammaln(conc_total) - gammaln(conc_total + a0)
    la += 0.5 * dim * (LOG_2PI - np.log(z))
    return float(la)


def death_log_accept(state, hyper, j, w_hat):
    """Log acceptance of deleting non-allocated component ``j``.

    Exact reciprocal of ``birth_log_accept`` on matched proposals; death
    from a single-component state is impossible because the component count
    prior has no mass below one.
    """
    m, dim = state.m, state.dim
    if m == 1:
        return -np.inf
    counts = state.counts()
    if counts[j]:
        raise ValueError("death move targets a non-allocated component")
    m_na = m - int((counts > 0).sum())
    g, z, a0 = state.gamma, state.zeta, hyper.alpha0

    la = np.log(m - 1.0) - np.log(hyper.lam)
    la += sdir_log_norm_const(SdirParams(a0, g, m)) - sdir_log_norm_const(SdirParams(a0, g, m - 1))
    rep = repulsion_log_ratio(g, w_hat, state.weights)
    if rep == -np.inf:
        return -np.inf
    la += rep
    la += dim * (ge_log_norm_const(GeParams(z, m)) - ge_log_norm_const(GeParams(z, m - 1)))
    cross = np.abs(np.delete(state.mus, j, axis=0) - state.mus[j][None, :])
    with np.errstate(divide="ignore"):
        la -= z * float(np.log(cross).sum())
    if m_na > 1:
        la += np.log(hyper.q_birth)
    la -= np.log1p(-hyper.q_birth)
    la += np.log(m_na)
    if hyper.birth_death == "reversible":
        la -= np.log(m)
    conc_total = m * a0 + counts.sum()
    la += gammaln(conc_total) - gammaln(a0) - gammaln(conc_total - a0)
    la -= 0.5 * dim * (LOG_2PI - np.log(z))
    return float(la)


# ---------------------------------------------------------------------------
# sweep steps
# ---------------------------------------------------------------------------

def allocation_log_probs(y, state):
    """Unnormalized per-observation allocation log probabilities, shape (n, m)."""
    with np.errstate(divide="ignore"):
        return component_log_pdfs(y, state) + np.log(state.weights)[None, :]


def update_allocations(y, state, rng):
    """Resample every allocation from its categorical full conditional."""
    out = state.copy()
    if state.n_obs == 0:
        return out
    log_p = allocation_log_probs(y, state)
    gumbel = rng.gumbel(size=log_p.shape)
    out.alloc = np.argmax(log_p + gumbel, axis=1).astype(np.int64)
    return out


def update_means(y, state, hyper, rng, step_mu=None):
    """Coordinate-wise Metropolis pass over all component means.

    Allocated components take Gaussian random-walk proposals with variance
    ``step_mu``; non-allocated components are refreshed by independence
    proposals from N(0, 2*m + 1/zeta), wide enough to cover the ensemble
    bulk and dominate its tails.  Returns the new state and the tuple
    (rw_accepts, rw_attempts, refresh_accepts, refresh_attempts).
    """
    out = state.copy()
    var = hyper.step_mu if step_mu is None else step_mu
    rw_sd = np.sqrt(var)
    refresh_sd = np.sqrt(2.0 * out.m + 1.0 / out.zeta)
    counts = out.counts()
    rw_acc = rw_att = ref_acc = ref_att = 0
    for j in range(out.m):
        if counts[j]:
            points = y[out.alloc == j]
            for d in range(out.dim):
                prop = out.mus[j, d] + rw_sd * rng.standard_normal()
                la = mean_rw_log_accept(out, j, d, prop, points)
                rw_att += 1
                if np.log(rng.random()) < la:
                    out.mus[j, d] = prop
                    rw_acc += 1
        else:
            for d in range(out.dim):
                prop = refresh_sd * rng.standard_normal()
                la = mean_refresh_log_accept(out, j, d, prop, refresh_sd)
                ref_att += 1
                if np.log(rng.random()) < la:
                    out.mus[j, d] = prop
                    ref_acc += 1
    return out, (rw_acc, rw_att, ref_acc, ref_att)


def update_covariances(y, state, hyper, rng):
    """Gibbs draw of every covariance from its inverse-Wishart conditional.

    Allocated components use the posterior scale (centered residual scatter
    plus v0 by default; the literal variant skips the centering) with
    nu0 + n_j degrees of freedom; non-allocated components draw from the
    prior.  A failed Cholesky retries once with a tiny diagonal ridge.
    """
    out = state.copy()
    counts = out.counts()
    dim = out.dim
    for j in range(out.m):
        if counts[j]:
            points = y[out.alloc == j]
            resid = points - out.mus[j] if hyper.covariance_update == "centered" else points
            scale = resid.T @ resid + hyper.v0
            scale = 0.5 * (scale + scale.T)
            df = hyper.nu0 + counts[j]
        else:
            scale = hyper.v0
            df = hyper.nu0
        try:
            out.sigmas[j] = sample_invwishart(rng, scale, df)
        except np.linalg.LinAlgError:
            out.sigmas[j] = sample_invwishart(rng, scale + 1e-10 * np.eye(dim), df)
    return out


def update_weights(state, hyper, rng):
    """Independence proposal from Dirichlet(alpha0 + counts); repulsion decides."""
    out = state.copy()
    alpha_post = hyper.alpha0 + out.counts()
    w_new = rng.dirichlet(alpha_post)
    accepted = np.log(rng.random()) < weights_log_accept(out, w_new)
    if accepted:
        out.weights = w_new
    return out, bool(accepted)


def update_gamma(state, hyper, rng, step_gamma=None):
    """Log-normal random-walk update of the weight repulsion parameter."""
    if state.gamma <= 0.0:
        raise SamplerError("gamma updates require a positive current value")
    out = state.copy()
    var = hyper.step_gamma if step_gamma is None else step_gamma
    prop = out.gamma * np.exp(np.sqrt(var) * rng.standard_normal())
    accepted = np.log(rng.random()) < gamma_log_accept(out, hyper, prop)
    if accepted:
        out.gamma = prop
    return out, bool(accepted)


def update_zeta_full_conditional(state, hyper, rng, step_gamma=None):
    """Log-normal random-walk update of the location repulsion parameter."""
    out = state.copy()
    var = hyper.step_gamma if step_gamma is None else step_gamma
    prop = out.zeta * np.exp(np.sqrt(var) * rng.standard_normal())
    accepted = np.log(rng.random()) < zeta_log_accept(out, hyper, prop)
    if accepted:
        out.zeta = prop
    return out, bool(accepted)


def update_gamma_ratio_tied(state, hyper, rng, step_gamma=None):
    """Ratio mode: one log-normal move drives gamma and zeta = rho * gamma."""
    if state.gamma <= 0.0:
        raise SamplerError("gamma updates require a positive current value")
    out = state.copy()
    var = hyper.step_gamma if step_gamma is None else step_gamma
    prop = out.gamma * np.exp(np.sqrt(var) * rng.standard_normal())
    accepted = np.log(rng.random()) < tied_gamma_log_accept(out, hyper, prop)
    if accepted:
        out.gamma = prop
        out.zeta = hyper.rho * prop
    return out, bool(accepted)


def birth_death_step(y, state, hyper, rng):
    """One birth or death proposal on the non-allocated components.

    Birth is chosen with probability q (with probability one when every
    component is allocated) and inserts the newborn at a uniformly chosen
    slot, or at the last slot under the append bookkeeping; death picks its
    victim uniformly among the non-allocated.  Weights are redrawn wholesale
    from the matching Dirichlet in both directions.  Returns
    (state, move, accepted).
    """
    counts = state.counts()
    m_na = state.m - int((counts > 0).sum())
    forced = m_na == 0
    alpha_post = hyper.alpha0 + counts
    if forced or rng.random() < hyper.q_birth:
        if hyper.birth_death == "reversible":
            slot = int(rng.integers(state.m + 1))
        else:
            slot = state.m
        w_new = rng.dirichlet(np.insert(alpha_post, slot, hyper.alpha0))
        mu_new = rng.normal(0.0, 1.0 / np.sqrt(state.zeta), size=state.dim)
        sigma_new = sample_invwishart(rng, hyper.v0, hyper.nu0)
        la = birth_log_accept(state, hyper, w_new, mu_new, forced)
        if np.log(rng.random()) < la:
            alloc = state.alloc.copy()
            alloc[alloc >= slot] += 1
            state = MixtureState(
                m=state.m + 1,
                weights=w_new,
                mus=np.insert(state.mus, slot, mu_new, axis=0),
                sigmas=np.insert(state.sigmas, slot, sigma_new, axis=0),
                alloc=alloc,
                gamma=state.gamma,
                zeta=state.zeta,
            )
            return state, "birth", True
        return state.copy(), "birth", False

    candidates = np.flatnonzero(counts == 0)
    j = int(candidates[rng.integers(candidates.size)])
    w_hat = rng.dirichlet(np.delete(alpha_post, j))
    la = death_log_accept(state, hyper, j, w_hat)
    if np.log(rng.random()) < la:
        alloc = state.alloc.copy()
        alloc[alloc > j] -= 1
        state = MixtureState(
            m=state.m - 1,
            weights=w_hat,
            mus=np.delete(state.mus, j, axis=0),
            sigmas=np.delete(state.sigmas, j, axis=0),
            alloc=alloc,
            gamma=state.gamma,
            zeta=state.zeta,
        )
        return state, "death", True
    return state.copy(), "death", False


# ---------------------------------------------------------------------------
# orchestration
# ---------------------------------------------------------------------------

def initial_state(y, hyper, rng):
    """Build a starting state; data-driven when observations exist, prior otherwise."""
    n, dim = y.shape
    gamma0 = hyper.gamma_fixed if not hyper.gamma_free else hyper.gamma_shape / hyper.gamma_rate
    if hyper.zeta_mode == "fixed":
        zeta0 = hyper.zeta_fixed
    elif hyper.zeta_mode == "gamma":
        zeta0 = hyper.zeta_shape / hyper.zeta_rate
    else:
        zeta0 = hyper.rho * gamma0
    if zeta0 <= 0.0:
        raise SamplerError("initial zeta must be positive")

    if n:
        m0 = max(2, int(round(hyper.lam)))
        alloc = rng.integers(0, m0, size=n).astype(np.int64)
        idx = rng.choice(n, size=m0, replace=n < m0)
        mus = y[idx] + 0.1 * rng.standard_normal((m0, dim))
        base = np.atleast_2d(np.cov(y, rowvar=False)) + 1e-6 * np.eye(dim)
        sigmas = np.tile(base, (m0, 1, 1))
    else:
        m0 = 1 + int(rng.poisson(hyper.lam))
        alloc = np.empty(0, dtype=np.int64)
        mus = np.empty((m0, dim))
        for d in range(dim):
            mus[:, d] = sample_ge(GeParams(zeta0, m0), 1, rng)[0]
        sigmas = np.stack([sample_invwishart(rng, hyper.v0, hyper.nu0) for _ in range(m0)])

    alpha_post = hyper.alpha0 + np.bincount(alloc, minlength=m0)
    while True:
        weights = rng.dirichlet(alpha_post)
        if gamma0 == 0.0 or pairwise_log_gap_sum(weights[:-1]) > -np.inf:
            break
    return MixtureState(
        m=m0, weights=weights, mus=mus, sigmas=sigmas, alloc=alloc,
        gamma=float(gamma0), zeta=float(zeta0),
    )


def run_sampler(y, config):
    """Run the full chain and return (trace, diagnostics).

    The trace holds one record per retained sample: component count, count
    of allocated components, the allocation vector, gamma and zeta, plus the
    weight vectors when ``record_weights`` is set.  Proposal scales adapt
    multiplicatively toward a 20-40% acceptance band during burn-in and are
    frozen afterwards.
    """
    y = np.asarray(y, dtype=float)
    if y.ndim != 2:
        raise ValueError("data must be a 2-D array (n, d)")
    hyper = config.hyper.resolved(y.shape[1])
    rng = np.random.default_rng(config.seed)
    state = initial_state(y, hyper, rng)

    ratio_mode = hyper.zeta_mode == "ratio" and hyper.gamma_free
    gamma_moves = hyper.gamma_free
    zeta_moves = hyper.zeta_free

    accepts = {k: 0 for k in RATE_KEYS}
    attempts = {k: 0 for k in RATE_KEYS}
    accepts["means_refresh"] = 0
    attempts["means_refresh"] = 0

    step_mu = hyper.step_mu
    step_gamma = hyper.step_gamma
    window = {"means": [0, 0], "scale": [0, 0]}

    burn, thin, n_keep = hyper.burn_in, hyper.thin, hyper.n_samples
    total = burn + thin * n_keep
    m_out = np.empty(n_keep, dtype=np.int64)
    ma_out = np.empty(n_keep, dtype=np.int64)
    alloc_out = np.empty((n_keep, y.shape[0]), dtype=np.int64)
    gamma_out = np.empty(n_keep)
    zeta_out = np.empty(n_keep)
    weights_out = [] if config.record_weights else None

    kept = 0
    for t in range(total):
        try:
            state = update_allocations(y, state, rng)
            state, (rw_acc, rw_att, ref_acc, ref_att) = update_means(
                y, state, hyper, rng, step_mu
            )
            state = update_covariances(y, state, hyper, rng)
            state, w_acc = update_weights(state, hyper, rng)
            if ratio_mode:
                state, g_acc = update_gamma_ratio_tied(state, hyper, rng, step_gamma)
                accepts["gamma"] += g_acc
                attempts["gamma"] += 1
                window["scale"][0] += g_acc
                window["scale"][1] += 1
            else:
                if gamma_moves:
                    state, g_acc = update_gamma(state, hyper, rng, step_gamma)
                    accepts["gamma"] += g_acc
                    attempts["gamma"] += 1
                    window["scale"][0] += g_acc
                    window["scale"][1] += 1
                if zeta_moves:
                    state, z_acc = update_zeta_full_conditional(state, hyper, rng, step_gamma)
                    accepts["zeta"] += z_acc
                    attempts["zeta"] += 1
                    if not gamma_moves:
                        window["scale"][0] += z_acc
                        window["scale"][1] += 1
            state, move, bd_acc = birth_death_step(y, state, hyper, rng)
        except SamplerError:
            raise
        except Exception as exc:
            raise SamplerError(f"sweep {t} failed: {exc}") from exc

        accepts["means"] += rw_acc
        attempts["means"] += rw_att
        accepts["means_refresh"] += ref_acc
        attempts["means_refresh"] += ref_att
        accepts["weights"] += w_acc
        attempts["weights"] += 1
        accepts[move] += bd_acc
        attempts[move] += 1
        window["means"][0] += rw_acc
        window["means"][1] += rw_att

        if hyper.adapt and t < burn and (t + 1) % 100 == 0:
            acc_n, att_n = window["means"]
            if att_n:
                rate = acc_n / att_n
                if rate < 0.2:
                    step_mu = max(step_mu * 0.5, 1e-6)
                elif rate > 0.4:
                    step_mu = min(step_mu * 2.0, 1e6)
            acc_n, att_n = window["scale"]
            if att_n:
                rate = acc_n / att_n
                if rate < 0.2:
                    step_gamma = max(step_gamma * 0.5, 1e-6)
                elif rate > 0.4:
                    step_gamma = min(step_gamma * 2.0, 1e6)
            window = {"means": [0, 0], "scale": [0, 0]}

        if t >= burn and (t - burn) % thin == thin - 1:
            m_out[kept] = state.m
            ma_out[kept] = state.m_allocated
            alloc_out[kept] = state.alloc
            gamma_out[kept] = state.gamma
            zeta_out[kept] = state.zeta
            if weights_out is not None:
                weights_out.append(state.weights.copy())
            kept += 1

    trace = PosteriorTrace(
        m=m_out, m_allocated=ma_out, alloc=alloc_out,
        gamma=gamma_out, zeta=zeta_out, weights=weights_out,
    )
    diag = StepDiagnostics(
        accepts=accepts, attempts=attempts,
        step_mu_final=step_mu, step_gamma_final=step_gamma,
    )
    return trace, diag
