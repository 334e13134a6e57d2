"""Badness scores, the stress accumulator, and the plasticity gate machine."""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field, replace

from .config import ModelConfig

EPS_V = 1e-12


class Phase(enum.Enum):
    STABLE = "Stable"
    PLASTIC = "Plastic"
    REFRACTORY = "Refractory"


class EventKind(str, enum.Enum):
    GATE_OPENED = "GateOpened"
    OVERRIDE_OPENED = "OverrideOpened"
    PROBE_OPENED = "ProbeOpened"
    GATE_CLOSED = "GateClosed"
    ABORTED = "Aborted"
    REARMED = "Rearmed"
    DEGENERATE_TARGET = "DegenerateTarget"


OPENING_KINDS = frozenset(
    {EventKind.GATE_OPENED, EventKind.OVERRIDE_OPENED, EventKind.PROBE_OPENED})
CLOSING_KINDS = frozenset({EventKind.GATE_CLOSED, EventKind.ABORTED})


@dataclass(frozen=True)
class GateEvent:
    t: int
    kind: EventKind
    z: float

    def to_json(self) -> dict:
        return {"t": self.t, "kind": self.kind.value, "z": self.z}

    @classmethod
    def from_json(cls, obj: dict) -> GateEvent:
        return cls(t=int(obj["t"]), kind=EventKind(obj["kind"]), z=float(obj["z"]))


def _clip01(v: float) -> float:
    return min(max(v, 0.0), 1.0)


def plateau_score(v_smooth: float | None, v_base: float | None, f_plateau: float) -> float:
    """Linear ramp from 0 (v_smooth at f_plateau * v_base) to 1 (v_smooth = 0).

    Cold start (either input unset) scores 0.
    """
    if v_smooth is None or v_base is None:
        return 0.0
    return _clip01(1.0 - v_smooth / (f_plateau * max(v_base, EPS_V)))


def low_proto_score(Q: float | None, Q_base: float | None, g_proto: float) -> float:
    if Q is None or Q_base is None:
        return 0.0
    good = g_proto * max(Q_base, EPS_V)
    return _clip01(1.0 - Q / good)


def core_badness(plateau: float, low_proto: float, B_floor: float) -> float:
    p = plateau * low_proto
    if p == 0.0 or B_floor == 0.0:
        return p
    return max(p, B_floor)


def total_badness(B_core: float, rent: float, update_cost: float) -> float:
    return _clip01(B_core + rent + update_cost)


def stress_update(Z: float, B_total: float, lambda_Z: float) -> float:
    return (1.0 - lambda_Z) * Z + lambda_Z * B_total


@dataclass
class StressState:
    """Current stress plus the recent-history bookkeeping for the override test."""

    Z: float = 0.0
    improvement_window: deque = field(default_factory=deque)
    above_count: int = 0

    @classmethod
    def for_config(cls, config: ModelConfig, Z: float = 0.0) -> StressState:
        return cls(Z=Z, improvement_window=deque(maxlen=config.W_override))

    def observe(self, Z: float, Z_on: float) -> None:
        """Record the stress value the gate will see this step."""
        self.Z = Z
        self.improvement_window.append(Z)
        self.above_count = self.above_count + 1 if Z > Z_on else 0


@dataclass
class GateState:
    armed: bool = True
    phase: Phase = Phase.STABLE
    commit_remaining: int = 0
    refractory_remaining: int = 0
    gate_onset_t: int = -1
    Z_at_onset: float = 0.0
    steps_in_gate: int = 0
    probe_attempts: int = 0
    forced_probe_pending: bool = False
    current_gate_is_probe: bool = False

    @property
    def plastic(self) -> bool:
        return self.phase is Phase.PLASTIC


def _override_due(stress: StressState, config: ModelConfig) -> bool:
    win = stress.improvement_window
    if stress.above_count < config.W_override or len(win) < config.W_override:
        return False
    return win[0] - stress.Z < config.delta_override


def gate_step(
    gate: GateState, stress: StressState, config: ModelConfig, t: int
) -> tuple[GateState, bool, list[GateEvent]]:
    """Advance the gate machine by one step.

    Order within a step: refractory countdown (and a pending probe),
    re-arm, normal trigger, override trigger, then in-gate bookkeeping for
    a gate opened on an earlier step. The step a gate opens on is its first
    plastic step, so a full gate spans ``L_commit`` plastic steps and an
    abort lands exactly ``L_abort`` steps after onset.

    Pure: neither ``gate`` nor ``stress`` is modified.
    """
    g = replace(gate)
    Z = stress.Z
    events: list[GateEvent] = []
    opened = False

    def open_gate(kind: EventKind, length: int) -> None:
        nonlocal opened
        g.phase = Phase.PLASTIC
        g.commit_remaining = length
        g.armed = False
        g.gate_onset_t = t
        g.steps_in_gate = 0
        g.current_gate_is_probe = kind is EventKind.PROBE_OPENED
        g.Z_at_onset = Z
        events.append(GateEvent(t, kind, Z))
        opened = True

    if g.phase is Phase.REFRACTORY:
        g.refractory_remaining -= 1
        if g.refractory_remaining <= 0:
            g.refractory_remaining = 0
            g.phase = Phase.STABLE
            if g.forced_probe_pending:
                g.forced_probe_pending = False
                if g.probe_attempts < config.max_probe:
                    g.probe_attempts += 1
                    open_gate(EventKind.PROBE_OPENED, config.L_probe)

    if g.phase is Phase.STABLE and not g.armed and Z < config.Z_off:
        g.armed = True
        events.append(GateEvent(t, EventKind.REARMED, Z))

    if g.phase is Phase.STABLE and g.armed and Z > config.Z_on:
        g.probe_attempts = 0  # a fresh episode
        open_gate(EventKind.GATE_OPENED, config.L_commit)
    elif g.phase is Phase.STABLE and not g.armed and _override_due(stress, config):
        g.probe_attempts = 0
        open_gate(EventKind.OVERRIDE_OPENED, config.L_commit)

    if g.phase is Phase.PLASTIC and not opened:
        g.steps_in_gate += 1
        if (g.steps_in_gate >= config.L_abort
                and g.Z_at_onset - Z < config.delta_abort
                and Z > config.Z_on):
            g.phase = Phase.REFRACTORY
            g.commit_remaining = 0
            g.refractory_remaining = config.refractory
            g.forced_probe_pending = True
            events.append(GateEvent(t, EventKind.ABORTED, Z))
        else:
            g.commit_remaining -= 1
            if g.commit_remaining == 0:
                g.phase = Phase.REFRACTORY
                g.refractory_remaining = config.refractory
                g.probe_attempts = 0
                events.append(GateEvent(t, EventKind.GATE_CLOSED, Z))

    return g, g.phase is Phase.PLASTIC, events
