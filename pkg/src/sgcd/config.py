"""Model parameters, validation, and the flat ``key = value`` config format."""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any


class ConfigError(ValueError):
    """Raised for an invalid parameter set or a malformed config file."""


@dataclass(frozen=True)
class ModelConfig:
    """Every scalar parameter of the model.

    Defaults are tuned so that a gated run sits in the event-driven regime
    (sparse gates, long frozen stretches of W). Construct with keyword
    overrides; ranges are checked in ``__post_init__``.
    """

    N: int = 64
    alpha: float = 0.2
    sigma: float = 0.05
    rho_target: float = 1.2
    tau: int = 200
    lambda_Z: float = 0.01
    Z_on: float = 0.55
    Z_off: float = 0.35
    c_on: float = 0.05
    c_W: float = 0.5
    epsilon: float = 0.05
    L_commit: int = 150
    L_refresh: int = 25
    L_abort: int = 60
    L_probe: int = 40
    refractory: int = 300
    delta_abort: float = 0.02
    max_probe: int = 3
    W_override: int = 2000
    delta_override: float = 0.02
    f_plateau: float = 1.0
    g_proto: float = 1.0
    B_floor: float = 0.7
    theta_soft: float = 0.0
    rate_v: float = 0.05
    rate_Q: float = 0.002
    lag_base: int = 500
    win_base: int = 200
    seed: int = 0

    def __post_init__(self) -> None:
        for f in fields(self):
            value = getattr(self, f.name)
            if f.type == "int":
                if isinstance(value, bool) or not isinstance(value, int):
                    raise ConfigError(f"{f.name} must be an integer, got {value!r}")
            elif isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(f"{f.name} must be a real number, got {value!r}")
            elif value != value or value in (float("inf"), float("-inf")):
                raise ConfigError(f"{f.name} must be finite, got {value!r}")
        self._check_ranges()

    def _check_ranges(self) -> None:
        def need(ok: bool, msg: str) -> None:
            if not ok:
                raise ConfigError(msg)

        for name in ("N", "tau", "L_commit", "L_refresh", "L_abort", "L_probe",
                     "refractory", "W_override", "lag_base", "win_base"):
            need(getattr(self, name) >= 1, f"{name} must be a positive integer")
        for name in ("sigma", "c_on", "c_W", "delta_abort", "delta_override",
                     "theta_soft"):
            need(getattr(self, name) >= 0, f"{name} must be >= 0")
        for name in ("alpha", "lambda_Z", "f_plateau", "g_proto", "rate_v", "rate_Q"):
            need(0 < getattr(self, name) <= 1, f"{name} must lie in (0, 1]")
        need(self.rho_target > 0, "rho_target must be > 0")
        need(0 <= self.Z_off < self.Z_on <= 1, "need 0 <= Z_off < Z_on <= 1")
        need(0 <= self.epsilon <= 1, "epsilon must lie in [0, 1]")
        need(0 <= self.B_floor < 1, "B_floor must lie in [0, 1)")
        need(self.max_probe >= 0, "max_probe must be >= 0")
        need(0 <= self.seed < 2**64, "seed must be an unsigned 64-bit integer")
        need(self.L_abort < self.L_commit, "need L_abort < L_commit")
        need(self.L_probe <= self.L_commit, "need L_probe <= L_commit")

    def with_(self, **changes: Any) -> ModelConfig:
        return replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


_FIELD_TYPES = {f.name: f.type for f in fields(ModelConfig)}


def parse_config(text: str) -> ModelConfig:
    """Parse flat ``key = value`` text; ``#`` starts a comment.

    Unknown or repeated keys are errors; omitted keys keep their defaults.
    """
    values: dict[str, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = (part.strip() for part in line.partition("="))
        if key not in _FIELD_TYPES:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            values[key] = int(value) if _FIELD_TYPES[key] == "int" else float(value)
        except ValueError:
            raise ConfigError(
                f"line {lineno}: bad value {value!r} for {key}") from None
    return ModelConfig(**values)


def load_config(path: str | Path) -> ModelConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)


def format_config(config: ModelConfig) -> str:
    """Render a config in the same format ``parse_config`` reads (round-trips)."""
    lines = []
    for name, value in config.to_dict().items():
        lines.append(f"{name} = {value!r}")
    return "\n".join(lines) + "\n"
