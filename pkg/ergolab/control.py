"""Gates as axis-angle rotations driven by pulse envelopes.

All gates live in the frame rotating at the drive frequency (omega_d =
omega_q), so a pulse with envelope v(t) and coupling g_d generates
H(t) = (g_d v(t) / 2) (n . sigma) and rotates the Bloch vector about n by
the Rabi angle integral of g_d v(t).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate

from .config import DEFAULT_TAU, QubitParams
from .errors import DegenerateState, DomainError, UndefinedEfficiency
from .state import DensityMatrix, from_matrix, to_bloch, to_matrix

logger = logging.getLogger(__name__)

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)

ANGLE_TOL = 1e-9


@dataclass(frozen=True)
class Pulse:
    envelope: np.ndarray = field(compare=False)
    g_d: float
    omega_d: float = 0.0
    tau: float = DEFAULT_TAU

    def __post_init__(self) -> None:
        env = np.asarray(self.envelope, dtype=float)
        if self.tau <= 0:
            raise DomainError(f"pulse duration must be > 0, got {self.tau}")
        if env.ndim != 1 or env.size < 2:
            raise DomainError("envelope needs at least two samples")
        if np.any(env < 0):
            raise DomainError("envelope samples must be nonnegative")
        env.setflags(write=False)
        object.__setattr__(self, "envelope", env)

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.tau, self.envelope.size)

    def value(self, t: np.ndarray) -> np.ndarray:
        return np.interp(t, self.times, self.envelope)


@dataclass(frozen=True)
class Gate:
    axis: Tuple[float, float, float]
    angle: float
    pulse: Pulse
    label: str = ""

    def __post_init__(self) -> None:
        if abs(np.linalg.norm(self.axis) - 1.0) > ANGLE_TOL:
            raise DomainError(f"gate axis {self.axis} is not a unit vector")
        if not -ANGLE_TOL <= self.angle <= math.pi + ANGLE_TOL:
            raise DomainError(f"gate angle {self.angle} outside [0, pi]")
        if abs(rabi_angle(self.pulse) - self.angle) > ANGLE_TOL:
            raise DomainError("pulse area does not match the gate angle")

    def generator(self) -> np.ndarray:
        """n . sigma / 2 scaled by g_d; multiply by v(t) for H(t)."""
        n_sigma = sum(n * p for n, p in zip(self.axis, PAULIS))
        return 0.5 * self.pulse.g_d * n_sigma


def _envelope(shape: str, samples: int) -> np.ndarray:
    if shape == "flat":
        return np.ones(samples)
    if shape == "gaussian":
        u = np.linspace(-3.0, 3.0, samples)
        return np.exp(-0.5 * u * u)
    raise DomainError(f"unknown envelope {shape!r}; use 'flat' or 'gaussian'")


def make_gate(
    axis: Sequence[float],
    angle: float,
    envelope: str = "flat",
    tau: float = DEFAULT_TAU,
    samples: int = 201,
    omega_d: float = 0.0,
    label: str = "",
) -> Gate:
    """Gate whose pulse area equals `angle`; negative angles flip the axis."""
    n = np.asarray(axis, dtype=float)
    norm = float(np.linalg.norm(n))
    if norm == 0.0:
        raise DomainError("rotation axis must be nonzero")
    n = n / norm
    if angle < 0:
        n, angle = -n, -angle
    if angle > math.pi + ANGLE_TOL:
        raise DomainError(f"gate angle {angle} outside [0, pi]")
    v = _envelope(envelope, samples)
    area = float(integrate.trapezoid(v, np.linspace(0.0, tau, samples)))
    pulse = Pulse(envelope=v, g_d=angle / area, omega_d=omega_d, tau=tau)
    return Gate(axis=(float(n[0]), float(n[1]), float(n[2])), angle=float(angle), pulse=pulse, label=label)


def rotation_y(theta: float, **kwargs) -> Gate:
    kwargs.setdefault("label", "R_Y")
    return make_gate((0.0, 1.0, 0.0), theta, **kwargs)


def v_pi(**kwargs) -> Gate:
    kwargs.setdefault("label", "V_pi")
    return make_gate((1.0, 0.0, 0.0), math.pi, **kwargs)


def rabi_angle(pulse: Pulse) -> float:
    return float(integrate.trapezoid(pulse.g_d * pulse.envelope, pulse.times))


def unitary(gate: Gate) -> np.ndarray:
    n_sigma = sum(n * p for n, p in zip(gate.axis, PAULIS))
    half = gate.angle / 2.0
    return math.cos(half) * np.eye(2, dtype=complex) - 1j * math.sin(half) * n_sigma


def apply_ideal(gate: Gate, rho: DensityMatrix) -> DensityMatrix:
    u = unitary(gate)
    return from_matrix(u @ to_matrix(rho) @ u.conj().T)


def make_uc(rho: DensityMatrix, **kwargs) -> Gate:
    """Rotation taking the Bloch vector of rho onto the ground axis."""
    r = to_bloch(rho).as_array()
    norm = float(np.linalg.norm(r))
    if norm < 1e-9:
        raise DegenerateState("Bloch vector vanishes: U_c is undefined for the maximally mixed state")
    angle = math.atan2(math.hypot(r[0], r[1]), r[2])
    axis = np.cross(r, (0.0, 0.0, 1.0))
    if np.linalg.norm(axis) < 1e-12:
        axis = np.array([1.0, 0.0, 0.0])
    kwargs.setdefault("label", "U_c")
    return make_gate(axis, angle, **kwargs)


def default_kappa(params: QubitParams, tau: float = DEFAULT_TAU) -> float:
    return 1.0 / (params.omega_q * tau)


def gate_cost(gate: Gate, cost_unit: float) -> float:
    """Thermodynamic cost of a gate: proportional to its Rabi angle at fixed duration."""
    if not cost_unit > 0:
        raise DomainError(f"kappa must be > 0, got {cost_unit}")
    return cost_unit * gate.angle


def sequence_cost(gates: Iterable[Gate], cost_unit: float) -> float:
    return sum(gate_cost(g, cost_unit) for g in gates)


def efficiency(delta_e: float, sigma: float) -> float:
    if delta_e < 0 or sigma < 0:
        raise DomainError(f"efficiency needs delta_e >= 0 and sigma >= 0, got {delta_e}, {sigma}")
    total = delta_e + sigma
    if total == 0:
        raise UndefinedEfficiency("delta_e + sigma = 0: efficiency undefined")
    return delta_e / total


def safe_efficiency(delta_e: Optional[float], sigma: float, snap: float = 1e-12) -> Optional[float]:
    """Efficiency, or None where the step extracted nothing measurable or cost nothing."""
    if delta_e is None:
        return None
    if abs(delta_e) < snap:
        delta_e = 0.0
    if delta_e < 0:
        logger.warning("negative energy change %.3e: efficiency left undefined", delta_e)
        return None
    try:
        return efficiency(delta_e, sigma)
    except UndefinedEfficiency:
        return None
