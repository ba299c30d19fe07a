"""Bundled example data.

The embedded tables are verified against their published summary statistics
at load time so that accidental edits are caught immediately.
"""

from __future__ import annotations

import numpy as np

from .exceptions import DataError

__all__ = [
    "cd45_count_differences",
    "mendel_pea_counts",
    "CD45_STEP_SDS_UNCONSTRAINED",
    "CD45_STEP_SDS_CONSTRAINED",
]

# Cell count differences of CD45RA T cells and CD45RO T cells for 36
# HIV-positive newborn infants; columns are the two cell types.
_CD45_ROWS = [
    (242, 1708), (569, 569), (270, 757), (-25, 499), (309, 231), (22, 338),
    (-42, 26), (-233, 119), (206, 163), (-106, -186), (55, 54), (85, 48),
    (30, 50), (194, 525), (-87, -110), (159, 148), (29, 102), (89, 364),
    (-9, 36), (158, 234), (76, 122), (15, 24), (3, 36), (93, 71),
    (160, 44), (66, 128), (180, 155), (237, 85), (105, 76), (16, 6),
    (167, 364), (-10, -18), (-61, -21), (-7, -2), (15, 32), (160, 188),
]

# Random-walk step deviations tuned for the CD45 data, one per
# lower-triangle covariance element in row-major order.
CD45_STEP_SDS_UNCONSTRAINED = (9_000.0, 13_000.0, 48_000.0)
CD45_STEP_SDS_CONSTRAINED = (10_000.0, 15_000.0, 48_000.0)

_CD45_MEAN = (86.94, 193.47)
_CD45_COV = ((20197.0, 23515.0), (23515.0, 106350.0))


def cd45_count_differences():
    """The (36, 2) matrix of CD45RA/CD45RO cell count differences."""
    data = np.array(_CD45_ROWS, dtype=float)
    mean = data.mean(axis=0)
    if not np.allclose(mean, _CD45_MEAN, atol=0.005):
        raise DataError(f"CD45 data corrupted: mean {mean} != {_CD45_MEAN}")
    cov = np.cov(data, rowvar=False)
    if not np.allclose(cov, _CD45_COV, atol=0.5):
        raise DataError("CD45 data corrupted: covariance mismatch")
    return data


def mendel_pea_counts():
    """Observed counts of 556 pea plants in the four phenotype categories.

    Order: round yellow, wrinkled yellow, round green, wrinkled green.
    """
    return np.array([315, 101, 108, 32])
