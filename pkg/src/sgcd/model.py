"""Fast recurrent state and the structural constraints on the coupling matrix."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import ModelConfig

# Fixed seed for the power-iteration start block so spectral_radius is a pure function.
_START_SEED = 0x5EED_CAFE
_BLOCK = 8


class StructuralDegeneracyError(ArithmeticError):
    """The matrix is zero after symmetrization and diagonal removal."""


class NumericalError(FloatingPointError):
    """Non-finite values appeared in the state; carries the offending step."""

    def __init__(self, step: int, what: str = "x") -> None:
        super().__init__(f"non-finite values in {what} at step {step}")
        self.step = step


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based Philox4x64 stream; identical draws on every platform."""
    return np.random.Generator(np.random.Philox(seed))


@dataclass
class SimState:
    t: int
    x: np.ndarray
    W: np.ndarray
    rng: np.random.Generator


def _start_block(n: int, seed: int) -> np.ndarray:
    return np.random.default_rng(seed).standard_normal((n, min(n, _BLOCK)))


def power_iteration(
    W: np.ndarray, start: np.ndarray | None = None, tol: float = 1e-10
) -> tuple[float, np.ndarray]:
    """Largest |eigenvalue| of a symmetric matrix by block power iteration.

    Orthogonal iteration on a block of up to 8 vectors with a Rayleigh-Ritz
    estimate each sweep. Stops when successive estimates differ by less
    than ``tol`` (relative), or after ``10 * n + 100`` sweeps. Returns the
    estimate and the final orthonormal block, which can warm-start the
    next call on a nearby matrix.
    """
    n = W.shape[0]
    if not W.any():
        return 0.0, _start_block(n, _START_SEED)
    max_iter = 10 * n + 100
    for attempt in range(2):
        if attempt == 0 and start is not None:
            X = start
        else:
            X = _start_block(n, _START_SEED + attempt)
        Q, _ = np.linalg.qr(X)
        prev = -1.0
        est = 0.0
        for _ in range(max_iter):
            Y = W @ Q
            H = Q.T @ Y
            ritz = np.linalg.eigvalsh(0.5 * (H + H.T))
            est = float(max(-ritz[0], ritz[-1]))
            if abs(est - prev) <= tol * est:
                break
            prev = est
            Q, _ = np.linalg.qr(Y)
        if est > 0.0:
            return est, Q
    return est, Q


def spectral_radius(W: np.ndarray) -> float:
    return power_iteration(np.asarray(W, dtype=float))[0]


def _enforce(W, rho_target, start=None):
    W = np.asarray(W, dtype=float)
    S = 0.5 * (W + W.T)
    np.fill_diagonal(S, 0.0)
    rho, basis = power_iteration(S, start)
    if rho == 0.0:
        raise StructuralDegeneracyError("matrix has zero spectral radius")
    S *= rho_target / rho
    return S, basis


def enforce_structure(W: np.ndarray, rho_target: float) -> np.ndarray:
    """Symmetrize, zero the diagonal, and rescale to spectral radius ``rho_target``.

    Raises:
        StructuralDegeneracyError: if nothing is left after the first two steps.
    """
    if rho_target <= 0:
        raise ValueError("rho_target must be positive")
    return _enforce(W, rho_target)[0]


def init_state(config: ModelConfig) -> SimState:
    rng = make_rng(config.seed)
    n = config.N
    x = 0.1 * rng.standard_normal(n)
    iu = np.triu_indices(n, k=1)
    for attempt in range(2):
        W = np.zeros((n, n))
        W[iu] = rng.standard_normal(len(iu[0]))
        W = W + W.T
        try:
            W = enforce_structure(W, config.rho_target)
            break
        except StructuralDegeneracyError:
            if attempt == 1:
                raise
    return SimState(t=0, x=x, W=W, rng=rng)


def fast_step(state: SimState, config: ModelConfig) -> np.ndarray:
    """Advance x one step in place and return it.

    x <- (1 - alpha) x + alpha tanh(W x) + sigma * eta, eta ~ N(0, I).
    """
    noise = state.rng.standard_normal(config.N)
    x = (1.0 - config.alpha) * state.x + config.alpha * np.tanh(state.W @ state.x)
    if config.sigma:
        x += config.sigma * noise
    if not np.isfinite(x).all():
        raise NumericalError(state.t)
    state.x = x
    state.t += 1
    return x
