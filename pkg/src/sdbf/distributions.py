"""Distribution families used by the constrained Bayes factor pipelines.

Only the families the two built-in analyses need are implemented: univariate
Cauchy and Student t, the multivariate Cauchy (as an elliptical scale-matrix
family), the Dirichlet, a scaled Dirichlet obtained by halving the middle
Dirichlet coordinate, and the inverse Wishart.  Every sampler takes an
explicit ``numpy.random.Generator`` so runs are reproducible bit for bit.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg as sla
from scipy.special import gammaln, stdtr

from ._validation import as_generator, check_positive, check_positive_vector, check_spd
from .exceptions import DecompositionError, InvalidParameterError

__all__ = [
    "Cauchy",
    "StudentT",
    "MvCauchy",
    "Dirichlet",
    "ScaledDirichlet",
    "InverseWishart",
    "sample_mv_normal",
    "cholesky_lower",
]


@dataclass(frozen=True)
class Cauchy:
    """Cauchy distribution with a location and a strictly positive scale."""

    location: float = 0.0
    scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "location", float(self.location))
        object.__setattr__(self, "scale", check_positive(self.scale, "scale"))

    def pdf(self, x):
        z = (np.asarray(x, dtype=float) - self.location) / self.scale
        return 1.0 / (np.pi * self.scale * (1.0 + z * z))

    def logpdf(self, x):
        z = (np.asarray(x, dtype=float) - self.location) / self.scale
        return -np.log(np.pi * self.scale) - np.log1p(z * z)

    def cdf(self, x):
        z = (np.asarray(x, dtype=float) - self.location) / self.scale
        return 0.5 + np.arctan(z) / np.pi

    def survival(self, x):
        """Pr(X > x)."""
        z = (np.asarray(x, dtype=float) - self.location) / self.scale
        return 0.5 - np.arctan(z) / np.pi

    def rvs(self, size, rng):
        rng = as_generator(rng)
        return self.location + self.scale * rng.standard_cauchy(size)


@dataclass(frozen=True)
class StudentT:
    """Student t distribution with ``df`` degrees of freedom.

    ``scale`` is the usual scale parameter: ``(X - location) / scale`` is a
    standard t variate.  ``df=1`` coincides with :class:`Cauchy`.
    """

    df: float
    location: float = 0.0
    scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "df", check_positive(self.df, "df"))
        object.__setattr__(self, "location", float(self.location))
        object.__setattr__(self, "scale", check_positive(self.scale, "scale"))

    def logpdf(self, x):
        z = (np.asarray(x, dtype=float) - self.location) / self.scale
        nu = self.df
        return (
            gammaln((nu + 1.0) / 2.0)
            - gammaln(nu / 2.0)
            - 0.5 * np.log(nu * np.pi)
            - np.log(self.scale)
            - (nu + 1.0) / 2.0 * np.log1p(z * z / nu)
        )

    def pdf(self, x):
        return np.exp(self.logpdf(x))

    def cdf(self, x):
        z = (np.asarray(x, dtype=float) - self.location) / self.scale
        return stdtr(self.df, z)

    def survival(self, x):
        return 1.0 - self.cdf(x)

    def rvs(self, size, rng):
        rng = as_generator(rng)
        return self.location + self.scale * rng.standard_t(self.df, size)


@dataclass(frozen=True)
class MvCauchy:
    """Multivariate Cauchy with symmetric positive-definite scale matrix.

    Equivalent to a multivariate Student t with one degree of freedom; the
    marginal of coordinate ``i`` is ``Cauchy(0, sqrt(S[i, i]))``.
    """

    scale_matrix: np.ndarray

    def __post_init__(self):
        matrix = check_spd(self.scale_matrix, "scale_matrix")
        matrix.setflags(write=False)
        object.__setattr__(self, "scale_matrix", matrix)

    @property
    def dim(self):
        return self.scale_matrix.shape[0]

    def logpdf(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        p = self.dim
        chol = cholesky_lower(self.scale_matrix)
        w = sla.solve_triangular(chol, x.T, lower=True)
        quad = np.sum(w * w, axis=0)
        logdet = 2.0 * np.sum(np.log(np.diag(chol)))
        out = (
            gammaln((1.0 + p) / 2.0)
            - gammaln(0.5)
            - 0.5 * p * np.log(np.pi)
            - 0.5 * logdet
            - (1.0 + p) / 2.0 * np.log1p(quad)
        )
        return out if out.size > 1 else float(out[0])

    def pdf(self, x):
        return np.exp(self.logpdf(x))

    def marginal(self, index):
        return Cauchy(0.0, float(np.sqrt(self.scale_matrix[index, index])))

    def conditional_scalar(self, given_index, given_value):
        """Conditional law of the other coordinate of a 2-d Cauchy.

        For an elliptical Cauchy, conditioning on one coordinate yields a
        Student t with 2 degrees of freedom whose scale shrinks by the usual
        Schur-complement factor.
        """
        if self.dim != 2:
            raise InvalidParameterError("conditional_scalar requires a 2-d scale matrix")
        i = int(given_index)
        j = 1 - i
        s = self.scale_matrix
        location = s[j, i] / s[i, i] * given_value
        schur = s[j, j] - s[j, i] ** 2 / s[i, i]
        dist = 1.0 + given_value**2 / s[i, i]
        scale2 = schur * dist / 2.0
        return StudentT(df=2.0, location=float(location), scale=float(np.sqrt(scale2)))

    def rvs(self, size, rng):
        """Draw via the normal/chi-square representation ``L z / sqrt(chi2_1)``."""
        rng = as_generator(rng)
        chol = cholesky_lower(self.scale_matrix)
        z = rng.standard_normal((size, self.dim))
        u = rng.chisquare(1.0, size)
        return (z / np.sqrt(u)[:, None]) @ chol.T


@dataclass(frozen=True)
class Dirichlet:
    """Dirichlet distribution with strictly positive concentration vector."""

    alpha: np.ndarray

    def __post_init__(self):
        alpha = check_positive_vector(self.alpha, "alpha")
        alpha.setflags(write=False)
        object.__setattr__(self, "alpha", alpha)

    @property
    def mean(self):
        return self.alpha / self.alpha.sum()

    def rvs(self, size, rng):
        rng = as_generator(rng)
        return rng.dirichlet(self.alpha, size=size)


@dataclass(frozen=True)
class ScaledDirichlet:
    """Law of ``(g1, g2, g4) = (x1, x2 / 2, x3)`` for ``x ~ Dirichlet(alpha)``.

    The support is ``{g1 > 0, g2 > 0, g1 + 2 g2 < 1}`` with the third
    coordinate fixed by ``g4 = 1 - g1 - 2 g2``.  The density in ``(g1, g2)``
    is ``2**a2 / B(a1, a2, a3) * g1**(a1-1) * g2**(a2-1) * g4**(a3-1)``,
    where ``B`` is the multivariate beta function.
    """

    alpha: np.ndarray

    def __post_init__(self):
        alpha = check_positive_vector(self.alpha, "alpha")
        if alpha.size != 3:
            raise InvalidParameterError("ScaledDirichlet takes exactly three concentrations")
        alpha.setflags(write=False)
        object.__setattr__(self, "alpha", alpha)

    @property
    def _log_norm(self):
        a = self.alpha
        log_beta = gammaln(a).sum() - gammaln(a.sum())
        return a[1] * np.log(2.0) - log_beta

    def logpdf(self, gamma1, gamma2):
        """Log density at ``(gamma1, gamma2)``; ``-inf`` outside the support."""
        g1 = np.asarray(gamma1, dtype=float)
        g2 = np.asarray(gamma2, dtype=float)
        g4 = 1.0 - g1 - 2.0 * g2
        inside = (g1 > 0.0) & (g2 > 0.0) & (g4 > 0.0)
        a = self.alpha
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(
                inside,
                self._log_norm
                + (a[0] - 1.0) * np.log(np.where(inside, g1, 1.0))
                + (a[1] - 1.0) * np.log(np.where(inside, g2, 1.0))
                + (a[2] - 1.0) * np.log(np.where(inside, g4, 1.0)),
                -np.inf,
            )
        return out if out.ndim else float(out)

    def pdf(self, gamma1, gamma2):
        out = np.exp(self.logpdf(gamma1, gamma2))
        return out if isinstance(out, np.ndarray) else float(out)

    def rvs(self, size, rng):
        """Draws of ``(g1, g2, g4)``; rows satisfy ``g1 + 2 g2 + g4 = 1``."""
        rng = as_generator(rng)
        xi = rng.dirichlet(self.alpha, size=size)
        return np.column_stack([xi[:, 0], xi[:, 1] / 2.0, xi[:, 2]])


@dataclass(frozen=True)
class InverseWishart:
    """Inverse Wishart with ``df`` degrees of freedom and SPD scale matrix.

    In one dimension this is the inverse gamma with shape ``df / 2`` and
    scale ``scale / 2``.

    Notes
    -----
    Sampling uses the Bartlett decomposition of the Wishart of the inverted
    scale followed by a triangular solve, which is exact and needs no
    rejection step.
    """

    df: float
    scale: np.ndarray
    _chol_inv_scale: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        scale = check_spd(self.scale, "scale")
        scale.setflags(write=False)
        p = scale.shape[0]
        df = float(self.df)
        if not np.isfinite(df) or df <= p - 1:
            raise InvalidParameterError(f"df must exceed dimension - 1 = {p - 1}, got {df}")
        object.__setattr__(self, "df", df)
        object.__setattr__(self, "scale", scale)
        # Wishart(df, scale^{-1}) drives the sampler; factor the inverse once.
        inv_scale = np.linalg.inv(scale)
        inv_scale = (inv_scale + inv_scale.T) / 2.0
        object.__setattr__(self, "_chol_inv_scale", cholesky_lower(inv_scale))

    @property
    def dim(self):
        return self.scale.shape[0]

    def mean(self):
        p = self.dim
        if self.df <= p + 1:
            raise InvalidParameterError("mean requires df > dim + 1")
        return self.scale / (self.df - p - 1.0)

    def _rvs_one(self, rng):
        p = self.dim
        bartlett = np.zeros((p, p))
        for i in range(p):
            bartlett[i, i] = np.sqrt(rng.chisquare(self.df - i))
            for j in range(i):
                bartlett[i, j] = rng.standard_normal()
        factor = self._chol_inv_scale @ bartlett  # lower triangular
        inv_factor = sla.solve_triangular(factor, np.eye(p), lower=True)
        draw = inv_factor.T @ inv_factor
        return (draw + draw.T) / 2.0

    def rvs(self, rng, size=None):
        """Draw symmetric positive-definite matrices.

        Returns one ``(p, p)`` matrix for ``size=None``, else a stacked
        ``(size, p, p)`` array.  The one-dimensional case is vectorized.
        """
        rng = as_generator(rng)
        if size is None:
            return self._rvs_one(rng)
        if self.dim == 1:
            chi = rng.chisquare(self.df, size)
            return (self.scale[0, 0] / chi).reshape(size, 1, 1)
        return np.stack([self._rvs_one(rng) for _ in range(size)])


def sample_mv_normal(mean, cov, rng, size=None):
    """Draw from a multivariate normal with SPD covariance.

    Returns a vector when ``size`` is ``None``, else a ``(size, p)`` matrix.
    """
    mean = np.asarray(mean, dtype=float).ravel()
    cov = check_spd(cov, "cov")
    if mean.size != cov.shape[0]:
        raise InvalidParameterError("mean and cov dimensions disagree")
    rng = as_generator(rng)
    chol = cholesky_lower(cov)
    shape = (mean.size,) if size is None else (size, mean.size)
    z = rng.standard_normal(shape)
    return mean + z @ chol.T


_MINOR_RE = re.compile(r"(\d+)-th leading minor")


def cholesky_lower(matrix):
    """Lower-triangular Cholesky factor ``L`` with ``L @ L.T == matrix``.

    Raises
    ------
    DecompositionError
        If the input is not symmetric positive definite; carries the 1-based
        index of the offending leading minor when the backend reports one.
    """
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise InvalidParameterError(f"expected a square matrix, got shape {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise InvalidParameterError("matrix contains non-finite entries")
    if not np.allclose(matrix, matrix.T, rtol=1e-10, atol=1e-12):
        raise InvalidParameterError("matrix is not symmetric")
    try:
        return sla.cholesky(matrix, lower=True)
    except sla.LinAlgError as exc:
        match = _MINOR_RE.search(str(exc))
        minor = int(match.group(1)) if match else None
        raise DecompositionError(
            f"matrix is not positive definite: {exc}", minor_index=minor
        ) from exc
