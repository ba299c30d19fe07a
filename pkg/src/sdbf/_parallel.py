"""Worker-pool helper honoring the SDBF_THREADS cap."""

from __future__ import annotations

import os
import warnings
from concurrent.futures import ProcessPoolExecutor

__all__ = ["max_workers", "run_tasks"]


def max_workers(n_tasks):
    """Number of workers to use: min(tasks, CPUs, SDBF_THREADS)."""
    cap = os.cpu_count() or 1
    env = os.environ.get("SDBF_THREADS")
    if env is not None:
        try:
            cap = min(cap, max(1, int(env)))
        except ValueError:
            warnings.warn(f"ignoring non-integer SDBF_THREADS={env!r}")
    return max(1, min(n_tasks, cap))


def run_tasks(tasks):
    """Run ``(fn, args)`` pairs, in parallel when allowed, preserving order.

    Tasks must be picklable top-level callables.  Results are identical to
    the serial execution because every task carries its own random seed.
    """
    workers = max_workers(len(tasks))
    if workers <= 1 or len(tasks) <= 1:
        return [fn(*args) for fn, args in tasks]
    try:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(fn, *args) for fn, args in tasks]
            return [future.result() for future in futures]
    except (OSError, PermissionError) as exc:  # restricted environments
        warnings.warn(f"process pool unavailable ({exc}); running serially")
        return [fn(*args) for fn, args in tasks]
