"""Sliding trajectory window and the windowed behavioral observables."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class InsufficientHistoryError(ValueError):
    pass


class TrajectoryWindow:
    """Fixed-capacity ring of state vectors, iterated oldest to newest.

    Consecutive-pair squared displacements are cached as states arrive, so
    the velocity statistic costs one reduction per step.
    """

    def __init__(self, capacity: int, dim: int) -> None:
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self.dim = dim
        self._buf = np.zeros((capacity, dim))
        self._disp = np.zeros(capacity)  # _disp[i]: |buf[i] - previous|^2
        self._head = 0  # next slot to write
        self.count = 0

    def push(self, x) -> None:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise ValueError(f"expected a vector of length {self.dim}, got shape {x.shape}")
        if self.count:
            prev = self._buf[(self._head - 1) % self.capacity]
            d = x - prev
            self._disp[self._head] = d @ d
        self._buf[self._head] = x
        self._head = (self._head + 1) % self.capacity
        self.count = min(self.count + 1, self.capacity)

    def _order(self) -> np.ndarray:
        start = (self._head - self.count) % self.capacity
        return (start + np.arange(self.count)) % self.capacity

    def array(self) -> np.ndarray:
        """Window contents as a (count, dim) array, oldest row first."""
        if self.count == self.capacity and self._head == 0:
            return self._buf.copy()
        return self._buf[self._order()]

    def pair_displacements(self) -> np.ndarray:
        """Squared displacement of each consecutive pair inside the window."""
        return self._disp[self._order()[1:]]

    def mean(self) -> np.ndarray:
        if self.count == self.capacity:
            return self._buf.mean(axis=0)
        return self.array().mean(axis=0)

    def __len__(self) -> int:
        return self.count

    def __iter__(self):
        return iter(self.array())


def raw_velocity(window: TrajectoryWindow, N: int) -> float:
    """Mean over consecutive pairs of (1/N) |x(t+1) - x(t)|^2."""
    if window.count < 2:
        raise InsufficientHistoryError("need at least two states for a velocity")
    return float(window.pair_displacements().mean() / N)


def noise_corrected_velocity(v_raw: float, sigma: float) -> float:
    return max(v_raw - sigma * sigma, 0.0)


def ewma(prev: float | None, sample: float, rate: float) -> float:
    """Exponentially weighted average; ``prev=None`` starts at ``sample``."""
    if prev is None:
        return sample
    return (1.0 - rate) * prev + rate * sample


def prototype_strength(window: TrajectoryWindow, N: int) -> float:
    """|mean state| / sqrt(N) over the window."""
    if window.count == 0:
        raise InsufficientHistoryError("empty window")
    mu = window.mean()
    return float(np.sqrt(mu @ mu) / np.sqrt(N))


def lagged_baseline(v_history, lag: int, win: int) -> float:
    """Mean of the ``win`` values that end ``lag`` steps before the newest.

    While the history is shorter than ``lag + win`` the mean of everything
    available is used instead; an empty history gives 0.
    """
    n = len(v_history)
    if n == 0:
        return 0.0
    if n < lag + win:
        return float(np.mean(v_history))
    return float(np.mean(v_history[n - lag - win:n - lag]))


@dataclass
class ObservableState:
    """Running observables for one simulation.

    ``v_history`` is append-only; ``v_base`` and the other fields are
    ``None`` until their first sample exists.
    """

    N: int
    sigma: float
    rate_v: float
    rate_Q: float
    lag_base: int
    win_base: int
    v_raw: float | None = None
    v_eff: float | None = None
    v_smooth: float | None = None
    v_base: float | None = None
    Q: float | None = None
    Q_base: float | None = None
    v_history: list[float] = field(default_factory=list)
    _hist_sum: float = 0.0

    @classmethod
    def from_config(cls, config) -> ObservableState:
        return cls(N=config.N, sigma=config.sigma, rate_v=config.rate_v,
                   rate_Q=config.rate_Q, lag_base=config.lag_base,
                   win_base=config.win_base)

    def update(self, window: TrajectoryWindow) -> None:
        if window.count >= 2:
            self.v_raw = raw_velocity(window, self.N)
            self.v_eff = noise_corrected_velocity(self.v_raw, self.sigma)
            self.v_smooth = ewma(self.v_smooth, self.v_eff, self.rate_v)
            self.v_history.append(self.v_eff)
            self.v_base = self._baseline()
        if window.count >= 1:
            self.Q = prototype_strength(window, self.N)
            self.Q_base = ewma(self.Q_base, self.Q, self.rate_Q)

    def _baseline(self) -> float:
        # Same value as lagged_baseline(), without re-summing the full history
        # every step during warmup.
        h = self.v_history
        self._hist_sum += h[-1]
        n = len(h)
        if n < self.lag_base + self.win_base:
            return self._hist_sum / n
        end = n - self.lag_base
        return float(np.mean(h[end - self.win_base:end]))
