"""Offline trajectory-health metrics: freezing index and non-ergodicity."""

from __future__ import annotations

import logging

import numpy as np

log = logging.getLogger(__name__)


def freezing_index(window, lambda_F: float) -> float:
    """``exp(-lambda_F * trace(Sigma))`` for the population covariance of the window.

    ``window`` is a TrajectoryWindow or any (count, N) array of states.
    Values near 1 mean the trajectory has collapsed onto a point.
    """
    X = window.array() if hasattr(window, "array") else np.asarray(window, dtype=float)
    if X.shape[0] < 2:
        raise ValueError("freezing index needs at least two states")
    if lambda_F < 0:
        raise ValueError("lambda_F must be >= 0")
    trace = float(np.sum(X.var(axis=0)))
    return float(np.exp(-lambda_F * trace))


def kl_from_uniform(counts) -> float:
    """KL divergence of a histogram (normalized ``counts``) from the uniform law."""
    counts = np.asarray(counts, dtype=float)
    p = counts / counts.sum()
    nz = p > 0
    return float(np.sum(p[nz] * np.log(p[nz] * counts.size)))


def nonergodicity(trajectory, projection=None, bins: int = 20) -> float:
    """Occupancy divergence of a trajectory projected onto one direction.

    Projects each state onto the unit vector ``projection`` (default: the
    normalized all-ones vector), histograms the scalars into ``bins``
    equal-width bins over their observed range, and returns the KL
    divergence of that histogram from the uniform distribution.
    A zero-width range puts all mass in one bin and returns ``log(bins)``.
    """
    X = np.asarray(trajectory, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if bins < 2:
        raise ValueError("bins must be >= 2")
    if X.shape[0] < bins:
        raise ValueError("trajectory shorter than the number of bins")
    if projection is None:
        projection = np.ones(X.shape[1])
    u = np.asarray(projection, dtype=float)
    u = u / np.linalg.norm(u)
    s = X @ u
    lo, hi = s.min(), s.max()
    if hi == lo:
        log.info("degenerate projected range; all mass in one bin")
        return float(np.log(bins))
    counts, _ = np.histogram(s, bins=bins, range=(lo, hi))
    return kl_from_uniform(counts)
