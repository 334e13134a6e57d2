"""Stress-gated recurrent dynamics: a two-timescale model in which structural
plasticity of the coupling matrix switches on only when an internally
accumulated stress signal crosses a threshold."""

from .config import ConfigError, ModelConfig, load_config, parse_config
from .diagnostics import freezing_index, nonergodicity
from .harness import (
    EpisodeTensor,
    RunSummary,
    StepRecord,
    align_episodes,
    continuous_alignment,
    run_simulation,
    summarize,
)
from .model import (
    NumericalError,
    SimState,
    StructuralDegeneracyError,
    enforce_structure,
    fast_step,
    init_state,
    spectral_radius,
)
from .observables import TrajectoryWindow
from .plasticity import DegenerateTarget, plastic_update, propose_target, update_cost
from .stress import EventKind, GateEvent, GateState, StressState, gate_step

__version__ = "0.1.0"
