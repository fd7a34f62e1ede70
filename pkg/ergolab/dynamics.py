"""Lindblad master equation for the dissipative qubit.

    drho/dt = -i[H, rho] + gamma1 D[sigma_-] rho + gamma1 n_th D[sigma_+] rho
              + (gamma_phi / 2) D[sigma_z] rho

in the frame rotating at omega_q, integrated with fixed-step RK4. The state
is carried as the row-major 4-vector of rho so every generator is a 4x4
matrix; vec(A rho B) = (A kron B^T) vec(rho).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .config import QubitParams
from .control import Gate
from .errors import DomainError, PositivityViolation, StepTooLarge
from .state import INTEGRATION_TOL, DensityMatrix, clip_physical, to_matrix

logger = logging.getLogger(__name__)

TRACE_TOL = 1e-9
DEFAULT_SAMPLES = 101

_I2 = np.eye(2, dtype=complex)
SIGMA_MINUS = np.array([[0, 1], [0, 0]], dtype=complex)
SIGMA_PLUS = SIGMA_MINUS.T.copy()
SIGMA_Z = np.diag([1.0, -1.0]).astype(complex)


@dataclass(frozen=True)
class NoiseModel:
    gamma1: float
    gamma_phi: float
    n_th: float = 0.0

    def __post_init__(self) -> None:
        if self.gamma1 < 0 or self.gamma_phi < 0 or self.n_th < 0:
            raise DomainError(f"noise rates must be >= 0, got {self}")

    @classmethod
    def from_params(cls, params: QubitParams) -> "NoiseModel":
        return cls(gamma1=params.gamma1, gamma_phi=params.gamma_phi, n_th=params.n_th)

    @classmethod
    def noiseless(cls) -> "NoiseModel":
        return cls(0.0, 0.0)

    @property
    def relaxation_rate(self) -> float:
        return self.gamma1 * (1.0 + self.n_th)

    @property
    def coherence_rate(self) -> float:
        return self.relaxation_rate / 2.0 + self.gamma_phi

    @property
    def shortest_time(self) -> float:
        """min(T1, T2); infinite without noise."""
        fastest = max(self.relaxation_rate, self.coherence_rate)
        return 1.0 / fastest if fastest > 0 else math.inf


@dataclass(frozen=True)
class EvolutionResult:
    final: DensityMatrix
    trajectory: List[Tuple[float, DensityMatrix]]
    step_count: int
    max_positivity_violation: float
    max_trace_error: float = 0.0

    def times(self) -> np.ndarray:
        return np.array([t for t, _ in self.trajectory])

    def populations(self) -> np.ndarray:
        return np.array([rho.p1 for _, rho in self.trajectory])

    def amplitudes(self) -> np.ndarray:
        return np.array([rho.a for _, rho in self.trajectory])


def _hamiltonian_super(h: np.ndarray) -> np.ndarray:
    return -1j * (np.kron(h, _I2) - np.kron(_I2, h.T))


def _dissipator_super(c: np.ndarray) -> np.ndarray:
    cdc = c.conj().T @ c
    return np.kron(c, c.conj()) - 0.5 * np.kron(cdc, _I2) - 0.5 * np.kron(_I2, cdc.T)


def free_generator(noise: NoiseModel) -> np.ndarray:
    gen = noise.gamma1 * _dissipator_super(SIGMA_MINUS)
    if noise.n_th > 0:
        gen = gen + noise.gamma1 * noise.n_th * _dissipator_super(SIGMA_PLUS)
    return gen + 0.5 * noise.gamma_phi * _dissipator_super(SIGMA_Z)


def _rk4_propagator(gen: np.ndarray, h: float) -> np.ndarray:
    """One RK4 step of a time-independent linear generator, as a matrix."""
    step = h * gen
    out = np.eye(4, dtype=complex)
    term = np.eye(4, dtype=complex)
    for k in range(1, 5):
        term = term @ step / k
        out = out + term
    return out


def _vec(rho: DensityMatrix) -> np.ndarray:
    return to_matrix(rho).reshape(4)


def _readout(v: np.ndarray) -> Tuple[DensityMatrix, float, float]:
    """State, trace error and positivity violation of an integrated vector."""
    m00, m01, m10, m11 = v
    trace = (m00 + m11).real
    a = 0.5 * (m01 + m10.conjugate())
    half_gap = math.sqrt(((m00 - m11).real / 2.0) ** 2 + abs(a) ** 2)
    violation = max(0.0, -(trace / 2.0 - half_gap))
    if violation > INTEGRATION_TOL:
        raise PositivityViolation(f"min eigenvalue {-violation:.3e} below -{INTEGRATION_TOL:g}")
    trace_error = abs(trace - 1.0)
    if trace_error > TRACE_TOL:
        raise PositivityViolation(f"trace drifted by {trace_error:.3e} (> {TRACE_TOL:g})")
    return clip_physical(m11.real, complex(a)), trace_error, violation


def _check_step(dt: float, noise: NoiseModel, tau: Optional[float] = None) -> None:
    if not dt > 0:
        raise DomainError(f"time step must be > 0, got {dt}")
    bound = noise.shortest_time / 100.0
    if tau is not None:
        bound = min(bound, tau / 100.0)
    if dt > bound:
        raise StepTooLarge(f"dt={dt:g} s exceeds the step bound {bound:g} s (min(T1, T2, tau)/100)")


def _steps(duration: float, dt: float) -> Tuple[int, float]:
    n = max(1, math.ceil(duration / dt - 1e-9))
    return n, duration / n


def evolve_free(
    rho0: DensityMatrix,
    noise: NoiseModel,
    t: float,
    dt: Optional[float] = None,
    samples: int = DEFAULT_SAMPLES,
) -> EvolutionResult:
    """Hold the qubit undriven for time t."""
    if t < 0:
        raise DomainError(f"hold time must be >= 0, got {t}")
    if t == 0:
        return EvolutionResult(rho0, [(0.0, rho0)], 0, 0.0, 0.0)
    if dt is None:
        dt = min(noise.shortest_time, t) / 1000.0
    _check_step(dt, noise)
    n, h = _steps(t, dt)
    prop = _rk4_propagator(free_generator(noise), h)
    stride = max(1, n // max(1, samples - 1))

    v = _vec(rho0)
    trajectory = [(0.0, rho0)]
    worst_violation = worst_trace = 0.0
    state = rho0
    for k in range(1, n + 1):
        v = prop @ v
        if k % stride == 0 or k == n:
            state, trace_error, violation = _readout(v)
            worst_violation = max(worst_violation, violation)
            worst_trace = max(worst_trace, trace_error)
            trajectory.append((k * h, state))
    logger.debug("evolve_free: %d steps of %.3e s", n, h)
    return EvolutionResult(state, trajectory, n, worst_violation, worst_trace)


def apply_noisy(
    gate: Gate,
    rho0: DensityMatrix,
    noise: NoiseModel,
    dt: Optional[float] = None,
    samples: int = DEFAULT_SAMPLES,
) -> EvolutionResult:
    """Drive `gate` through its pulse while the dissipators act."""
    pulse = gate.pulse
    if dt is None:
        dt = min(noise.shortest_time, pulse.tau) / 1000.0
    _check_step(dt, noise, pulse.tau)
    n, h = _steps(pulse.tau, dt)
    gen0 = free_generator(noise)
    drive = _hamiltonian_super(gate.generator())
    # envelope at every half step: index 2k is t_k, 2k+1 the midpoint
    env = pulse.value(np.arange(2 * n + 1) * (h / 2.0))
    stride = max(1, n // max(1, samples - 1))

    v = _vec(rho0)
    trajectory = [(0.0, rho0)]
    worst_violation = worst_trace = 0.0
    state = rho0
    gen_start = gen0 + env[0] * drive
    for k in range(n):
        gen_mid = gen0 + env[2 * k + 1] * drive
        gen_end = gen0 + env[2 * k + 2] * drive
        k1 = gen_start @ v
        k2 = gen_mid @ (v + 0.5 * h * k1)
        k3 = gen_mid @ (v + 0.5 * h * k2)
        k4 = gen_end @ (v + h * k3)
        v = v + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        gen_start = gen_end
        if (k + 1) % stride == 0 or k + 1 == n:
            state, trace_error, violation = _readout(v)
            worst_violation = max(worst_violation, violation)
            worst_trace = max(worst_trace, trace_error)
            trajectory.append(((k + 1) * h, state))
    logger.debug("apply_noisy %s: %d steps of %.3e s", gate.label or "gate", n, h)
    return EvolutionResult(state, trajectory, n, worst_violation, worst_trace)


def free_decay_closed_form(rho0: DensityMatrix, noise: NoiseModel, t: float) -> DensityMatrix:
    """Analytic solution of the undriven model."""
    rate = noise.relaxation_rate
    p_ss = noise.n_th / (1.0 + noise.n_th)
    p1 = p_ss + (rho0.p1 - p_ss) * math.exp(-rate * t)
    a = rho0.a * math.exp(-noise.coherence_rate * t)
    return DensityMatrix(p1, a)


def fit_coherence_rate(result: EvolutionResult) -> float:
    """Least-squares decay rate of |a(t)| along a sampled trajectory."""
    t = result.times()
    amp = np.abs(result.amplitudes())
    keep = amp > 0
    if keep.sum() < 2:
        raise DomainError("need at least two samples with nonzero coherence to fit a rate")
    slope, _ = np.polyfit(t[keep], np.log(amp[keep]), 1)
    return float(-slope)
