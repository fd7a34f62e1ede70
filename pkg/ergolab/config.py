"""Device parameters, run configuration and environment settings."""
from __future__ import annotations

import json
import math
import os
from typing import Any, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .errors import ConfigError

DATA_DIR = os.getenv("ERGOLAB_DATA_DIR", "data")
DEFAULT_TAU = 80e-9
DEFAULT_HOLD = 4e-6
# Rabi angle of (sqrt(2)|1> + |0>)/sqrt(3)
THETA_S_REFERENCE = 2.0 * math.acos(math.sqrt(3.0) / 3.0)

Mode = Literal["ideal", "noisy", "sampled"]


def env_seed() -> Optional[int]:
    raw = os.getenv("ERGOLAB_SEED")
    if raw is None or not raw.strip():
        return None
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"ERGOLAB_SEED must be an integer, got {raw!r}")


def log_level() -> str:
    return os.getenv("ERGOLAB_LOG_LEVEL", "WARNING").upper()


def default_jobs() -> int:
    raw = os.getenv("ERGOLAB_JOBS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigError(f"ERGOLAB_JOBS must be an integer, got {raw!r}")


class QubitParams(BaseModel):
    """Transition frequency and decoherence times of the device model."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    omega_q: float = Field(gt=0, description="angular transition frequency (rad/s)")
    T1: float = Field(gt=0, description="relaxation time (s)")
    T2: float = Field(gt=0, description="total dephasing time (s)")
    n_th: float = Field(default=0.0, ge=0, description="thermal occupation")

    @model_validator(mode="after")
    def _dephasing_bound(self) -> "QubitParams":
        if self.T2 > 2.0 * self.T1 * (1.0 + 1e-12):
            raise ValueError(
                f"T2 <= 2*T1 violated: T2={self.T2:g} s exceeds 2*T1={2.0 * self.T1:g} s"
            )
        return self

    @property
    def gamma1(self) -> float:
        return 1.0 / self.T1

    @property
    def gamma_phi(self) -> float:
        return max(0.0, 1.0 / self.T2 - 0.5 / self.T1)


PRESETS: Dict[str, QubitParams] = {
    "sweet-spot": QubitParams(omega_q=2.0 * math.pi * 5.450e9, T1=25.7e-6, T2=32.7e-6),
    "working-point": QubitParams(omega_q=2.0 * math.pi * 5.336e9, T1=64.5e-6, T2=2.2e-6),
    # dynamical decoupling pushes T2 to its 2*T1 ceiling
    "decoupled": QubitParams(omega_q=2.0 * math.pi * 5.336e9, T1=64.5e-6, T2=2.0 * 64.5e-6),
}


def preset(name: str) -> QubitParams:
    try:
        return PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown device preset {name!r}; known presets: {', '.join(sorted(PRESETS))}")


def _parse_angle(value: Any) -> Any:
    if not isinstance(value, str):
        return value
    text = value.strip().lower()
    if text in ("fig2", "reference"):
        return THETA_S_REFERENCE
    if text.endswith("pi"):
        factor = text[:-2].rstrip("*").strip()
        return (float(factor) if factor else 1.0) * math.pi
    return float(text)


class RunConfig(BaseModel):
    """Everything a CLI command needs; loaded from JSON with flag overrides."""

    model_config = ConfigDict(extra="forbid")

    device: Union[str, QubitParams] = "working-point"
    gate_device: Union[str, QubitParams] = "sweet-spot"
    theta_s: float = THETA_S_REFERENCE
    hold_time: float = Field(default=DEFAULT_HOLD, ge=0)
    kappa: Union[float, Literal["default"]] = "default"
    mode: Mode = "ideal"
    noise: bool = True
    shots: int = Field(default=1000, ge=1)
    repetitions: int = Field(default=20, ge=2)
    seed: int = Field(default=0, ge=0)
    tau: float = Field(default=DEFAULT_TAU, gt=0)
    dt: Optional[float] = Field(default=None, gt=0)
    grid: int = Field(default=181, ge=2)
    grid_coherence: int = Field(default=21, ge=2)
    optimum: bool = False
    duration: float = Field(default=DEFAULT_HOLD, ge=0)
    hold_times: List[float] = Field(default_factory=lambda: [1e-6, 4e-6, 16e-6, 64e-6])
    jobs: int = Field(default_factory=default_jobs, ge=1)
    output: Optional[str] = None
    format: Literal["csv", "json"] = "csv"

    @field_validator("device", "gate_device")
    @classmethod
    def _known_preset(cls, value: Union[str, QubitParams]) -> Union[str, QubitParams]:
        if isinstance(value, str) and value not in PRESETS:
            raise ValueError(f"unknown device preset {value!r}; known presets: {', '.join(sorted(PRESETS))}")
        return value

    @field_validator("theta_s", mode="before")
    @classmethod
    def _angle(cls, value: Any) -> Any:
        return _parse_angle(value)

    @field_validator("theta_s")
    @classmethod
    def _angle_range(cls, value: float) -> float:
        if not 0.0 <= value <= math.pi:
            raise ValueError(f"theta_s must lie in [0, pi], got {value}")
        return value

    @field_validator("kappa")
    @classmethod
    def _positive_kappa(cls, value: Union[float, str]) -> Union[float, str]:
        if value != "default" and not value > 0:
            raise ValueError(f"kappa must be > 0, got {value}")
        return value

    @field_validator("hold_times")
    @classmethod
    def _nonnegative_holds(cls, value: List[float]) -> List[float]:
        if not value or any(t < 0 for t in value):
            raise ValueError("hold_times must be a non-empty list of times >= 0")
        return value

    def qubit_params(self) -> QubitParams:
        if isinstance(self.device, QubitParams):
            return self.device
        return preset(self.device)

    def gate_params(self) -> QubitParams:
        if isinstance(self.gate_device, QubitParams):
            return self.gate_device
        return preset(self.gate_device)

    def resolved_kappa(self) -> float:
        if self.kappa == "default":
            from .control import default_kappa

            return default_kappa(self.qubit_params(), self.tau)
        return float(self.kappa)


def load_run_config(path: Optional[str] = None, overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
    """Read the JSON config at `path`, then ERGOLAB_SEED, then the non-None overrides."""
    data: Dict[str, Any] = {}
    if path:
        try:
            with open(path, "r", encoding="utf-8") as f:
                data = json.load(f)
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}")
        except json.JSONDecodeError as e:
            raise ConfigError(f"invalid JSON in config file {path}: {e}")
        if not isinstance(data, dict):
            raise ConfigError(f"config file {path} must hold a JSON object")
    seed = env_seed()
    if seed is not None:
        data["seed"] = seed
    for key, value in (overrides or {}).items():
        if value is not None:
            data[key] = value
    return RunConfig.model_validate(data)
