"""Gibbs/Metropolis sampler for the multivariate standardized-effects model.

The model is ``y_i ~ N(L_Sigma @ delta, Sigma)`` with ``L_Sigma`` the lower
Cholesky factor of the error covariance, a multivariate Cauchy prior on the
standardized effects ``delta`` and the Jeffreys prior ``|Sigma|^-(p+1)/2``
on the covariance.  The Cauchy prior is handled by data augmentation: it is
a scale mixture of normals with an inverse Wishart mixing matrix ``Phi``,
so the sampler alternates

1. ``delta | Phi, Sigma, y`` -- multivariate normal,
2. ``Phi | delta``           -- inverse Wishart,
3. ``Sigma | delta, y``      -- elementwise random-walk Metropolis on the
   lower triangle, rejecting candidates whose minimum eigenvalue falls
   below a fixed floor.

A pooled variant restricts all effects to a common scalar ``delta``; its
normal update then pools all ``n * p`` whitened observations.  Running with
``data=None`` drops the likelihood terms, which turns the chain into a
sampler of the prior (useful for validation).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from ._validation import (
    SPD_EIGEN_FLOOR,
    as_generator,
    check_data_matrix,
    check_positive_vector,
    check_spd,
)
from .exceptions import ChainDivergedError, DataError, InvalidParameterError

__all__ = [
    "MvtModelState",
    "SamplerConfig",
    "ChainOutput",
    "gibbs_delta_step",
    "gibbs_phi_step",
    "rw_sigma_step",
    "run_unconstrained_chain",
    "run_constrained_chain",
    "delta_posterior_moments",
]


@dataclass
class MvtModelState:
    """Current sampler state: effects, error covariance, mixing matrix.

    ``delta`` has length p in the unconstrained chain and length 1 in the
    pooled (common-effect) chain; ``sigma`` is ``None`` in prior-only runs.
    """

    delta: np.ndarray
    sigma: np.ndarray | None
    phi: np.ndarray


@dataclass
class SamplerConfig:
    """Settings for one chain.

    ``rw_step_sds`` holds one random-walk standard deviation per
    lower-triangle element of Sigma in row-major order; when ``None`` the
    steps start from the asymptotic spread of the sample covariance and are
    tuned toward ``adapt_target`` acceptance during burn-in only, so
    detailed balance holds for the retained draws.  ``prior_mixing_df``
    defaults to the dimension of ``delta``, which makes the effect prior
    multivariate Cauchy with scale matrix ``prior_scale_matrix``; larger
    values give a multivariate Student t.
    """

    n_draws: int
    prior_scale_matrix: np.ndarray
    seed: int | None = None
    n_burnin: int | None = None
    rw_step_sds: np.ndarray | None = None
    prior_mixing_df: float | None = None
    adapt_target: float = 0.3
    adapt_interval: int = 100
    initial_delta: np.ndarray | None = None
    initial_sigma: np.ndarray | None = None

    def __post_init__(self):
        if self.n_draws < 1:
            raise InvalidParameterError("n_draws must be >= 1")
        self.prior_scale_matrix = check_spd(np.atleast_2d(self.prior_scale_matrix), "prior_scale_matrix")
        if self.rw_step_sds is not None:
            self.rw_step_sds = check_positive_vector(self.rw_step_sds, "rw_step_sds")
        if not 0.0 < self.adapt_target < 1.0:
            raise InvalidParameterError("adapt_target must lie in (0, 1)")

    @property
    def effective_burnin(self):
        if self.n_burnin is not None:
            return int(self.n_burnin)
        return max(2000, self.n_draws // 10)


@dataclass(frozen=True)
class ChainOutput:
    """Post-burn-in draws plus acceptance diagnostics."""

    delta_draws: np.ndarray
    sigma_draws: np.ndarray | None
    phi_draws: np.ndarray
    acceptance_rates: np.ndarray | None
    step_sds: np.ndarray | None
    n_burnin: int
    seed: int | None

    @property
    def n_draws(self):
        return self.delta_draws.shape[0]


def _effect_vector(delta, p):
    """Mean-forming effect vector: broadcasts a pooled scalar to length p."""
    delta = np.asarray(delta, dtype=float).ravel()
    if delta.size == p:
        return delta
    if delta.size == 1:
        return np.full(p, delta[0])
    raise InvalidParameterError(f"delta has length {delta.size}, expected 1 or {p}")


# Closed-form 1x1/2x2 linear algebra: the chains spend their time on tiny
# matrices where LAPACK call overhead dominates the arithmetic.


def _chol_small(matrix):
    if matrix.shape[0] == 1:
        a = matrix[0, 0]
        if not a > 0.0:
            raise np.linalg.LinAlgError("not positive definite")
        return np.array([[np.sqrt(a)]])
    if matrix.shape[0] == 2:
        a, b, c = matrix[0, 0], matrix[1, 0], matrix[1, 1]
        if not a > 0.0 or not a * c - b * b > 0.0:
            raise np.linalg.LinAlgError("not positive definite")
        l00 = np.sqrt(a)
        l10 = b / l00
        return np.array([[l00, 0.0], [l10, np.sqrt(c - l10 * l10)]])
    return np.linalg.cholesky(matrix)


def _inv_small(matrix):
    if matrix.shape[0] == 1:
        return np.array([[1.0 / matrix[0, 0]]])
    if matrix.shape[0] == 2:
        a, b, c, d = matrix[0, 0], matrix[0, 1], matrix[1, 0], matrix[1, 1]
        det = a * d - b * c
        return np.array([[d, -b], [-c, a]]) / det
    return np.linalg.inv(matrix)


def _min_eig(matrix):
    if matrix.shape[0] == 1:
        return matrix[0, 0]
    if matrix.shape[0] == 2:
        a, b, c = matrix[0, 0], matrix[1, 0], matrix[1, 1]
        half_trace = 0.5 * (a + c)
        radius = np.sqrt(0.25 * (a - c) ** 2 + b * b)
        return half_trace - radius
    return float(np.linalg.eigvalsh(matrix).min())


def _forward_solve(chol, rhs):
    """Solve ``chol @ x = rhs`` for lower-triangular chol; rhs is (p, n)."""
    p = chol.shape[0]
    out = np.empty_like(rhs)
    for i in range(p):
        acc = rhs[i] if i == 0 else rhs[i] - chol[i, :i] @ out[:i]
        out[i] = acc / chol[i, i]
    return out


def _draw_mv_normal(mean, cov, rng):
    # hot path: cov is constructed SPD by the caller, skip revalidation
    chol = _chol_small(cov)
    return mean + chol @ rng.standard_normal(mean.shape[0])


def _draw_invwishart(df, scale, rng):
    """Bartlett-decomposition inverse Wishart draw (no revalidation)."""
    p = scale.shape[0]
    if p == 1:
        return scale / rng.chisquare(df)
    inv_scale = _inv_small(scale)
    chol = _chol_small((inv_scale + inv_scale.T) / 2.0)
    bartlett = np.zeros((p, p))
    for i in range(p):
        bartlett[i, i] = np.sqrt(rng.chisquare(df - i))
        for j in range(i):
            bartlett[i, j] = rng.standard_normal()
    factor = chol @ bartlett
    inv_factor = solve_triangular(factor, np.eye(p), lower=True, check_finite=False)
    draw = inv_factor.T @ inv_factor
    return (draw + draw.T) / 2.0


def _whitened_mean(data, sigma):
    """Mean of ``z_i = L^-1 y_i`` under the current covariance."""
    chol = _chol_small(sigma)
    z = _forward_solve(chol, data.T)
    return z.mean(axis=1)


def delta_posterior_moments(zbar, n_obs, phi, *, pooled=False):
    """Mean and covariance of the normal full conditional of the effects.

    With whitened observations ``z_i ~ N(delta, I)`` and conditional prior
    ``delta | Phi ~ N(0, Phi)``, the posterior covariance is
    ``(Phi^-1 + n I)^-1`` and the mean is ``n (Phi^-1 + n I)^-1 zbar``.  In
    the pooled case every coordinate of ``z`` informs the common effect, so
    ``n`` becomes ``n * p`` and ``zbar`` collapses to its own mean.
    """
    phi = np.atleast_2d(np.asarray(phi, dtype=float))
    if pooled:
        n_total = n_obs * np.asarray(zbar).size
        precision = 1.0 / phi[0, 0] + n_total
        variance = 1.0 / precision
        mean = n_total * variance * float(np.mean(zbar))
        return np.array([mean]), np.array([[variance]])
    k = phi.shape[0]
    precision = _inv_small(phi) + n_obs * np.eye(k)
    cov = _inv_small(precision)
    cov = (cov + cov.T) / 2.0
    mean = cov @ (n_obs * np.asarray(zbar, dtype=float))
    return mean, cov


def gibbs_delta_step(state, data, rng, *, pooled=False):
    """Draw the effects from their normal full conditional.

    ``data=None`` drops the likelihood and returns a draw from the
    conditional prior ``N(0, Phi)``.
    """
    rng = as_generator(rng)
    if data is None:
        k = state.phi.shape[0]
        return _draw_mv_normal(np.zeros(k), state.phi, rng)
    zbar = _whitened_mean(data, state.sigma)
    mean, cov = delta_posterior_moments(zbar, data.shape[0], state.phi, pooled=pooled)
    return _draw_mv_normal(mean, cov, rng)


def gibbs_phi_step(delta, prior_scale, rng, *, prior_df=None):
    """Draw the mixing matrix: ``Phi | delta ~ IW(df + 1, S0 + delta delta')``.

    ``prior_df`` defaults to ``len(delta)``, the mixing degrees of freedom
    of a multivariate Cauchy effect prior.
    """
    delta = np.asarray(delta, dtype=float).ravel()
    prior_scale = np.atleast_2d(np.asarray(prior_scale, dtype=float))
    if prior_df is None:
        prior_df = delta.size
    posterior_scale = prior_scale + np.outer(delta, delta)
    return _draw_invwishart(prior_df + 1.0, posterior_scale, as_generator(rng))


def _lower_triangle_indices(p):
    return [(i, j) for i in range(p) for j in range(i + 1)]


def _sigma_log_target(data, sigma, effect):
    """Gaussian log likelihood plus the Jeffreys log prior for Sigma.

    Returns ``-inf`` when the Cholesky factorization fails, so callers can
    treat numerically unusable candidates as rejections.
    """
    p = data.shape[1]
    try:
        chol = _chol_small(sigma)
    except np.linalg.LinAlgError:
        return -np.inf
    mean = chol @ effect
    resid = data - mean
    w = _forward_solve(chol, resid.T)
    logdet = 2.0 * np.log(np.diag(chol)).sum()
    n = data.shape[0]
    loglik = -0.5 * n * p * np.log(2.0 * np.pi) - 0.5 * n * logdet - 0.5 * (w * w).sum()
    return loglik - 0.5 * (p + 1) * logdet


def rw_sigma_step(state, data, step_sds, rng):
    """One sweep of elementwise random-walk updates of Sigma.

    Each lower-triangle element (row-major order) is perturbed in turn, the
    perturbation mirrored to keep the candidate symmetric.  Candidates whose
    minimum eigenvalue is at or below the positive-definiteness floor are
    rejected outright; otherwise the usual Metropolis ratio of the Gaussian
    likelihood times the Jeffreys prior decides.

    Returns the new Sigma and a boolean acceptance flag per element.
    """
    rng = as_generator(rng)
    p = data.shape[1]
    elements = _lower_triangle_indices(p)
    step_sds = np.asarray(step_sds, dtype=float)
    if step_sds.size != len(elements):
        raise InvalidParameterError(f"need {len(elements)} step sds, got {step_sds.size}")
    effect = _effect_vector(state.delta, p)
    sigma = np.array(state.sigma, dtype=float)
    log_target = _sigma_log_target(data, sigma, effect)
    accepted = np.zeros(len(elements), dtype=bool)
    for idx, (i, j) in enumerate(elements):
        step = rng.normal(0.0, step_sds[idx])
        candidate = sigma.copy()
        candidate[i, j] += step
        if i != j:
            candidate[j, i] += step
        if _min_eig(candidate) <= SPD_EIGEN_FLOOR:
            continue
        candidate_target = _sigma_log_target(data, candidate, effect)
        if np.log(rng.uniform()) < candidate_target - log_target:
            sigma = candidate
            log_target = candidate_target
            accepted[idx] = True
    return sigma, accepted


def _initial_step_sds(sample_cov, n_obs, p):
    """Starting steps from the asymptotic spread of sample covariances."""
    steps = []
    for i, j in _lower_triangle_indices(p):
        spread = np.sqrt((sample_cov[i, i] * sample_cov[j, j] + sample_cov[i, j] ** 2) / n_obs)
        steps.append(2.4 * spread)
    return np.asarray(steps)


def _run_chain(data, config, *, pooled, fix_sigma=None, fix_phi=None):
    rng = as_generator(config.seed)

    if data is not None:
        data = check_data_matrix(data, "data", min_rows=2)
        n_obs, p = data.shape
        if n_obs <= p:
            raise DataError(f"need more observations than dimensions, got n={n_obs}, p={p}")
    else:
        n_obs, p = 0, None

    k = 1 if pooled else (p if p is not None else config.prior_scale_matrix.shape[0])
    prior_scale = config.prior_scale_matrix
    if prior_scale.shape[0] != k:
        raise InvalidParameterError(
            f"prior_scale_matrix must be {k}x{k} for this chain, got {prior_scale.shape}"
        )
    prior_df = config.prior_mixing_df if config.prior_mixing_df is not None else k

    update_sigma = data is not None and fix_sigma is None
    sigma = None
    if fix_sigma is not None:
        sigma = check_spd(fix_sigma, "fix_sigma")
    elif data is not None:
        sigma = np.cov(data, rowvar=False)
        if np.linalg.eigvalsh(sigma).min() <= SPD_EIGEN_FLOOR:
            raise DataError("sample covariance of the data is numerically singular")

    if config.initial_sigma is not None and update_sigma:
        sigma = check_spd(config.initial_sigma, "initial_sigma")

    if config.initial_delta is not None:
        delta = np.asarray(config.initial_delta, dtype=float).ravel()
        if delta.size != k:
            raise InvalidParameterError(f"initial_delta must have length {k}")
    elif data is not None:
        zbar = _whitened_mean(data, sigma)
        delta = np.array([zbar.mean()]) if pooled else zbar
    else:
        delta = np.zeros(k)

    phi = check_spd(fix_phi, "fix_phi") if fix_phi is not None else np.eye(k)

    step_sds = None
    adapting = False
    n_elements = len(_lower_triangle_indices(p)) if update_sigma else 0
    if update_sigma:
        if config.rw_step_sds is not None:
            if config.rw_step_sds.size != n_elements:
                raise InvalidParameterError(f"rw_step_sds must have length {n_elements}")
            step_sds = config.rw_step_sds.astype(float).copy()
        else:
            step_sds = _initial_step_sds(np.cov(data, rowvar=False), n_obs, p)
            adapting = True

    n_burnin = config.effective_burnin
    n_total = n_burnin + config.n_draws
    delta_draws = np.empty((config.n_draws, k))
    phi_draws = np.empty((config.n_draws, k, k))
    sigma_draws = np.empty((config.n_draws, p, p)) if update_sigma else None
    accept_counts = np.zeros(n_elements, dtype=int)
    window_counts = np.zeros(n_elements, dtype=int)

    state = MvtModelState(delta=delta, sigma=sigma, phi=phi)
    for s in range(n_total):
        state.delta = gibbs_delta_step(state, data, rng, pooled=pooled)
        if fix_phi is None:
            state.phi = gibbs_phi_step(state.delta, prior_scale, rng, prior_df=prior_df)
        if update_sigma:
            state.sigma, accepted = rw_sigma_step(state, data, step_sds, rng)
            if s >= n_burnin:
                accept_counts += accepted
            elif adapting:
                window_counts += accepted
                if (s + 1) % config.adapt_interval == 0:
                    rates = window_counts / config.adapt_interval
                    step_sds *= np.exp(rates - config.adapt_target)
                    window_counts[:] = 0

        if not np.all(np.isfinite(state.delta)) or not np.all(np.isfinite(state.phi)):
            raise ChainDivergedError("chain state became non-finite", iteration=s)

        if s >= n_burnin:
            i = s - n_burnin
            delta_draws[i] = state.delta
            phi_draws[i] = state.phi
            if update_sigma:
                sigma_draws[i] = state.sigma

    acceptance = accept_counts / config.n_draws if update_sigma else None
    return ChainOutput(
        delta_draws=delta_draws,
        sigma_draws=sigma_draws,
        phi_draws=phi_draws,
        acceptance_rates=acceptance,
        step_sds=step_sds.copy() if step_sds is not None else None,
        n_burnin=n_burnin,
        seed=config.seed,
    )


def run_unconstrained_chain(data, config, *, fix_sigma=None, fix_phi=None):
    """Sample the joint posterior of ``(delta, Sigma, Phi)``.

    ``data=None`` runs the chain without likelihood terms so the stationary
    law of ``delta`` is its multivariate Cauchy (or Student t) prior.  The
    ``fix_*`` hooks freeze a block at a given value, which reduces the chain
    to a conjugate special case with a known answer; they exist for
    validation.
    """
    return _run_chain(data, config, pooled=False, fix_sigma=fix_sigma, fix_phi=fix_phi)


def run_constrained_chain(data, config, *, fix_sigma=None, fix_phi=None):
    """Sample the posterior with all effects pooled to one common scalar.

    This targets the completed (untruncated) conditional posterior of the
    common effect given that the effect differences are zero; sign or order
    restrictions are applied afterwards through indicator functions inside
    Monte Carlo expectations, not by truncating the chain.
    """
    return _run_chain(data, config, pooled=True, fix_sigma=fix_sigma, fix_phi=fix_phi)
