"""Structural targets from recent trajectories and convex updates of W."""

from __future__ import annotations

import logging

import numpy as np

from .config import ModelConfig
from .model import StructuralDegeneracyError, _enforce, enforce_structure, spectral_radius
from .observables import InsufficientHistoryError, TrajectoryWindow

log = logging.getLogger(__name__)


class DegenerateTarget(StructuralDegeneracyError):
    """The proposed target is the zero matrix after thresholding."""


def window_covariance(X: np.ndarray) -> np.ndarray:
    """Population covariance (divide by row count) of the rows of ``X``."""
    Xc = X - X.mean(axis=0)
    return (Xc.T @ Xc) / X.shape[0]


def soft_threshold(C: np.ndarray, theta: float) -> np.ndarray:
    if theta == 0:
        return C
    return np.sign(C) * np.maximum(np.abs(C) - theta, 0.0)


def propose_target(window: TrajectoryWindow, config: ModelConfig) -> np.ndarray:
    """Covariance-shaped coupling target with spectral radius ``rho_target``.

    Demeaned covariance of the window, diagonal removed, optionally
    soft-thresholded, then symmetrized and rescaled.

    Raises:
        DegenerateTarget: when nothing survives (constant window, or a
            threshold above every off-diagonal entry).
    """
    if window.count < 2:
        raise InsufficientHistoryError("need at least two states for a target")
    C = window_covariance(window.array())
    C = 0.5 * (C + C.T)
    np.fill_diagonal(C, 0.0)
    C = soft_threshold(C, config.theta_soft)
    try:
        return enforce_structure(C, config.rho_target)
    except StructuralDegeneracyError as exc:
        raise DegenerateTarget(str(exc)) from None


def plastic_update(W: np.ndarray, W_target: np.ndarray, epsilon: float,
                   rho_target: float | None = None) -> np.ndarray:
    """Convex step ``(1 - epsilon) W + epsilon W_target``, then re-normalize.

    ``rho_target`` defaults to the spectral radius of ``W``, which already
    satisfies the structural constraints. On exact cancellation of the two
    matrices the old ``W`` is returned.
    """
    if rho_target is None:
        rho_target = spectral_radius(W)
    return plastic_update_warm(W, W_target, epsilon, rho_target)[0]


def plastic_update_warm(W, W_target, epsilon, rho_target, basis=None):
    """``plastic_update`` that also returns the eigen-block for warm starts."""
    if epsilon == 0:
        return W, basis
    mixed = (1.0 - epsilon) * W + epsilon * W_target
    try:
        return _enforce(mixed, rho_target, basis)
    except StructuralDegeneracyError:
        log.warning("convex step cancelled to zero; keeping previous W")
        return W, basis


def rms(A: np.ndarray) -> float:
    return float(np.sqrt(np.mean(np.square(A))))


def update_cost(W_old: np.ndarray, W_new: np.ndarray, c_W: float) -> float:
    """``c_W * RMS(W_new - W_old) / RMS(W_old)``; 0 when ``W_old`` is all zeros."""
    denom = rms(W_old)
    if denom == 0.0:
        log.warning("update cost requested for a zero matrix; charging 0")
        return 0.0
    return c_W * rms(W_new - W_old) / denom


def maybe_refresh_target(steps_in_gate: int, L_refresh: int, window: TrajectoryWindow,
                         config: ModelConfig) -> np.ndarray | None:
    """Fresh target every ``L_refresh`` steps after onset, otherwise ``None``.

    A degenerate proposal also yields ``None`` so the caller keeps its
    current target.
    """
    if steps_in_gate <= 0 or steps_in_gate % L_refresh:
        return None
    try:
        return propose_target(window, config)
    except DegenerateTarget:
        log.info("degenerate target at refresh; keeping previous target")
        return None
