"""Full runs in gated or continuous mode, event alignment, and run summaries."""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .config import ModelConfig
from .model import fast_step, init_state, power_iteration
from .observables import ObservableState, TrajectoryWindow
from .plasticity import DegenerateTarget, plastic_update_warm, propose_target, update_cost
from .stress import (
    OPENING_KINDS,
    EventKind,
    GateEvent,
    GateState,
    StressState,
    core_badness,
    gate_step,
    low_proto_score,
    plateau_score,
    stress_update,
    total_badness,
)

log = logging.getLogger(__name__)

MODES = ("gated", "continuous")
DEFAULT_STEPS = 50_000
PLATEAU_REL_CHANGE = 1e-10


@dataclass(slots=True)
class StepRecord:
    """One logged step. ``Z`` is the stress the gate saw on this step;
    ``B_total`` (which includes this step's plasticity costs) moves it to
    the next row's ``Z``. Observables without enough history are 0."""

    t: int
    v_raw: float
    v_eff: float
    v_smooth: float
    v_base: float
    Q: float
    Q_base: float
    plateau: float
    low_proto: float
    B_core: float
    rent: float
    update_cost: float
    B_total: float
    Z: float
    plastic_on: int
    W_frobenius: float


STEP_FIELDS = tuple(f.name for f in fields(StepRecord))
_INT_FIELDS = {"t", "plastic_on"}


def run_simulation(
    config: ModelConfig,
    mode: str = "gated",
    steps: int = DEFAULT_STEPS,
    *,
    on_structure: Callable[[int, np.ndarray, np.ndarray], None] | None = None,
    on_state: Callable[[int, np.ndarray], None] | None = None,
) -> tuple[list[StepRecord], list[GateEvent]]:
    """Simulate ``steps`` steps and return the step log and the event log.

    In ``continuous`` mode the gate machine is bypassed: plasticity (and
    its rent) runs on every step and the target is re-proposed every
    ``L_refresh`` steps. ``on_structure(t, W_old, W_new)`` is called after
    every write to W, ``on_state(t, x)`` after every fast step.

    Raises:
        NumericalError: if the fast state stops being finite.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    cfg = config
    state = init_state(cfg)
    window = TrajectoryWindow(cfg.tau, cfg.N)
    obs = ObservableState.from_config(cfg)
    stress = StressState.for_config(cfg)
    gate = GateState()
    gated = mode == "gated"

    Z = 0.0
    W_target = None
    basis = power_iteration(state.W)[1]
    w_norm = float(np.linalg.norm(state.W))
    records: list[StepRecord] = []
    events: list[GateEvent] = []

    for t in range(steps):
        x = fast_step(state, cfg)
        window.push(x)
        if on_state is not None:
            on_state(t, x)
        obs.update(window)
        plateau = plateau_score(obs.v_smooth, obs.v_base, cfg.f_plateau)
        low_proto = low_proto_score(obs.Q, obs.Q_base, cfg.g_proto)
        B_core = core_badness(plateau, low_proto, cfg.B_floor)

        stress.observe(Z, cfg.Z_on)
        if gated:
            gate, plastic_on, evs = gate_step(gate, stress, cfg, t)
            events.extend(evs)
            age = gate.steps_in_gate
        else:
            plastic_on = True
            age = t

        rent = cost = 0.0
        if plastic_on:
            rent = cfg.c_on
            if (age % cfg.L_refresh == 0 or W_target is None) and window.count >= 2:
                try:
                    W_target = propose_target(window, cfg)
                except DegenerateTarget:
                    events.append(GateEvent(t, EventKind.DEGENERATE_TARGET, Z))
            if W_target is not None:
                W_old = state.W
                W_new, basis = plastic_update_warm(W_old, W_target, cfg.epsilon,
                                                   cfg.rho_target, basis)
                if W_new is not W_old:
                    cost = update_cost(W_old, W_new, cfg.c_W)
                    state.W = W_new
                    w_norm = float(np.linalg.norm(W_new))
                    if on_structure is not None:
                        on_structure(t, W_old, W_new)

        B_total = total_badness(B_core, rent, cost)
        records.append(StepRecord(
            t, _or0(obs.v_raw), _or0(obs.v_eff), _or0(obs.v_smooth), _or0(obs.v_base),
            _or0(obs.Q), _or0(obs.Q_base), plateau, low_proto, B_core, rent, cost,
            B_total, Z, int(plastic_on), w_norm))
        Z = stress_update(Z, B_total, cfg.lambda_Z)

    return records, events


def _or0(v: float | None) -> float:
    return 0.0 if v is None else v


def column(records: Sequence[StepRecord], name: str) -> np.ndarray:
    if name not in STEP_FIELDS:
        raise KeyError(f"unknown signal {name!r}; choose from {', '.join(STEP_FIELDS)}")
    dtype = int if name in _INT_FIELDS else float
    return np.fromiter((getattr(r, name) for r in records), dtype=dtype, count=len(records))


# --- event-aligned analysis ----------------------------------------------------------


@dataclass
class EpisodeTensor:
    """Signal slices stacked by onset; column ``pre`` is the onset step."""

    signal: str
    pre: int
    post: int
    matrix: np.ndarray
    onsets: np.ndarray

    @property
    def onset_index(self) -> int:
        return self.pre

    @property
    def offsets(self) -> np.ndarray:
        return np.arange(-self.pre, self.post + 1)

    def mean_profile(self) -> np.ndarray:
        return self.matrix.mean(axis=0) if len(self.matrix) else np.full(len(self.offsets), np.nan)


def _slice_onsets(values: np.ndarray, onsets: Iterable[int], signal: str,
                  pre: int, post: int) -> EpisodeTensor:
    if pre < 0 or post < 0:
        raise ValueError("pre and post must be non-negative")
    T = len(values)
    kept = np.array([t for t in onsets if t >= pre and t + post < T], dtype=int)
    if kept.size:
        idx = kept[:, None] + np.arange(-pre, post + 1)[None, :]
        matrix = values[idx]
    else:
        matrix = np.empty((0, pre + post + 1))
    return EpisodeTensor(signal, pre, post, matrix, kept)


def opening_times(events: Iterable[GateEvent]) -> list[int]:
    return [e.t for e in events if e.kind in OPENING_KINDS]


def align_episodes(records, events, signal: str, pre: int, post: int) -> EpisodeTensor:
    """Stack ``signal`` around every gate opening that has full context."""
    return _slice_onsets(column(records, signal), opening_times(events), signal, pre, post)


def continuous_alignment(records, stride: int, pre: int, post: int,
                         signal: str = "Z") -> EpisodeTensor:
    """Same slicing as ``align_episodes`` with a putative onset every ``stride`` steps."""
    if stride < 1:
        raise ValueError("stride must be >= 1")
    values = column(records, signal)
    return _slice_onsets(values, range(0, len(values), stride), signal, pre, post)


# --- summary -----------------------------------------------------------------------


@dataclass
class RunSummary:
    steps: int
    gate_counts: dict[str, int]
    n_openings: int
    mean_interval: float | None
    median_interval: float | None
    plastic_fraction: float
    w_plateau_fraction: float
    longest_w_plateau: int
    n_episodes: int
    aligned_pre: int
    aligned_post: int
    mean_Z_onset: float | None
    mean_Z_after: float | None
    mean_B_core_onset: float | None
    mean_B_core_after: float | None
    mean_B_total_profile: list[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def relative_w_change(records) -> np.ndarray:
    """Per-step relative change of |W|_F between consecutive records."""
    w = column(records, "W_frobenius")
    return np.abs(np.diff(w)) / np.where(w[:-1] > 0, w[:-1], 1.0)


def longest_run(mask: np.ndarray) -> int:
    best = cur = 0
    for m in mask:
        cur = cur + 1 if m else 0
        best = max(best, cur)
    return best


def summarize(records, events, pre: int = 500, post: int = 500) -> RunSummary:
    if not records:
        raise ValueError("cannot summarize an empty run")
    counts = {k.value: 0 for k in EventKind}
    for e in events:
        counts[e.kind.value] += 1
    opens = opening_times(events)
    gaps = np.diff(opens)
    frozen = relative_w_change(records) < PLATEAU_REL_CHANGE
    plateau_frac = float(frozen.mean()) if frozen.size else 1.0

    Z_ep = align_episodes(records, events, "Z", pre, post)
    B_ep = align_episodes(records, events, "B_core", pre, post)
    Bt_ep = align_episodes(records, events, "B_total", pre, post)
    have = len(Z_ep.matrix) > 0

    def at(ep: EpisodeTensor, col: int) -> float | None:
        return float(ep.matrix[:, col].mean()) if have else None

    return RunSummary(
        steps=len(records),
        gate_counts=counts,
        n_openings=len(opens),
        mean_interval=float(gaps.mean()) if gaps.size else None,
        median_interval=float(np.median(gaps)) if gaps.size else None,
        plastic_fraction=float(column(records, "plastic_on").mean()),
        w_plateau_fraction=plateau_frac,
        longest_w_plateau=longest_run(frozen),
        n_episodes=len(Z_ep.matrix),
        aligned_pre=pre,
        aligned_post=post,
        mean_Z_onset=at(Z_ep, pre),
        mean_Z_after=at(Z_ep, pre + post),
        mean_B_core_onset=at(B_ep, pre),
        mean_B_core_after=at(B_ep, pre + post),
        mean_B_total_profile=Bt_ep.mean_profile().tolist() if have else [],
    )


# --- files -------------------------------------------------------------------------


def _fmt(name: str, value) -> str:
    return str(int(value)) if name in _INT_FIELDS else format(value, ".17g")


def write_steps_csv(records: Sequence[StepRecord], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(STEP_FIELDS)
        for r in records:
            w.writerow([_fmt(n, getattr(r, n)) for n in STEP_FIELDS])


def read_steps_csv(path: str | Path) -> list[StepRecord]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != STEP_FIELDS:
            raise ValueError(f"{path}: unexpected header {header}")
        conv = [int if n in _INT_FIELDS else float for n in STEP_FIELDS]
        return [StepRecord(*(c(v) for c, v in zip(conv, row))) for row in reader]


def write_events_json(events: Sequence[GateEvent], path: str | Path) -> None:
    Path(path).write_text(json.dumps([e.to_json() for e in events], indent=1) + "\n")


def read_events_json(path: str | Path) -> list[GateEvent]:
    return [GateEvent.from_json(o) for o in json.loads(Path(path).read_text())]


def write_episode_csv(ep: EpisodeTensor, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([str(o) for o in ep.offsets])
        for row in ep.matrix:
            w.writerow([format(v, ".17g") for v in row])
