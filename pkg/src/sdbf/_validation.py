"""Input validation helpers shared across the package."""

from __future__ import annotations

import numpy as np

from .exceptions import DataError, InvalidParameterError

# Minimum eigenvalue for a matrix to count as positive definite.  The same
# floor is used by the random-walk covariance sampler to reject candidates.
SPD_EIGEN_FLOOR = 1e-6


def as_generator(seed):
    """Return a ``numpy.random.Generator``.

    ``seed`` may be ``None`` (fresh entropy), an integer, a ``SeedSequence``,
    or an existing ``Generator`` (returned unchanged).
    """
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def check_positive(value, name):
    """Validate a strictly positive finite scalar and return it as float."""
    value = float(value)
    if not np.isfinite(value) or value <= 0.0:
        raise InvalidParameterError(f"{name} must be a positive finite number, got {value!r}")
    return value


def check_spd(matrix, name, *, eigen_floor=SPD_EIGEN_FLOOR):
    """Validate a symmetric positive-definite matrix and return it as ndarray.

    Symmetry is checked up to a small relative tolerance; positive
    definiteness means the minimum eigenvalue exceeds ``eigen_floor``.
    """
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise InvalidParameterError(f"{name} must be a square matrix, got shape {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise InvalidParameterError(f"{name} contains non-finite entries")
    if not np.allclose(matrix, matrix.T, rtol=1e-10, atol=1e-12):
        raise InvalidParameterError(f"{name} is not symmetric")
    min_eig = float(np.linalg.eigvalsh(matrix).min())
    if min_eig <= eigen_floor:
        raise InvalidParameterError(
            f"{name} is not positive definite (min eigenvalue {min_eig:.3e} <= {eigen_floor:.0e})"
        )
    return matrix


def check_positive_vector(vector, name):
    """Validate a 1-d vector of strictly positive finite entries."""
    vector = np.asarray(vector, dtype=float)
    if vector.ndim != 1 or vector.size == 0:
        raise InvalidParameterError(f"{name} must be a non-empty 1-d vector")
    if not np.all(np.isfinite(vector)) or np.any(vector <= 0.0):
        raise InvalidParameterError(f"{name} must have strictly positive finite entries")
    return vector


def check_data_matrix(data, name="data", *, n_cols=None, min_rows=1):
    """Validate a finite 2-d data matrix and return it as a float ndarray."""
    data = np.asarray(data, dtype=float)
    if data.ndim != 2:
        raise DataError(f"{name} must be a 2-d array, got ndim={data.ndim}")
    if n_cols is not None and data.shape[1] != n_cols:
        raise DataError(f"{name} must have {n_cols} columns, got {data.shape[1]}")
    if data.shape[0] < min_rows:
        raise DataError(f"{name} must have at least {min_rows} rows, got {data.shape[0]}")
    if not np.all(np.isfinite(data)):
        bad = int(np.flatnonzero(~np.isfinite(data).all(axis=1))[0])
        raise DataError(f"{name} contains non-finite values (first bad row: {bad})")
    return data


def check_samples(samples, name="samples", *, min_samples=1):
    """Validate a 1-d or 2-d finite sample array."""
    samples = np.asarray(samples, dtype=float)
    if samples.ndim not in (1, 2):
        raise DataError(f"{name} must be 1-d or 2-d, got ndim={samples.ndim}")
    if samples.shape[0] < min_samples:
        raise DataError(f"{name} needs at least {min_samples} rows, got {samples.shape[0]}")
    if not np.all(np.isfinite(samples)):
        raise DataError(f"{name} contains non-finite values")
    return samples
