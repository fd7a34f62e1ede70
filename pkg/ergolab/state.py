"""Two-level density matrices.

A state is stored as (p1, a): the excited-state population and the single
off-diagonal amplitude. In the (|0>, |1>) ordering the matrix is

    [[1 - p1, a    ],
     [conj(a), p1  ]]

so trace and Hermiticity hold by construction. |0> is the ground state of
H0 = -hbar*omega_q*sigma_z/2 and sits at Bloch +z:

    x = 2 Re a,  y = -2 Im a,  z = 1 - 2 p1
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np
from scipy import special

from .errors import DomainError, PositivityViolation

logger = logging.getLogger(__name__)

CONSTRUCT_TOL = 1e-12
INTEGRATION_TOL = 1e-8
BLOCH_SLACK = 1e-9


def _check_physical(p1: float, a: complex, tol: float) -> None:
    if not (-tol <= p1 <= 1.0 + tol):
        raise DomainError(f"population p1={p1} outside [0, 1]")
    excess = abs(a) ** 2 - p1 * (1.0 - p1)
    if excess > tol:
        raise PositivityViolation(
            f"|a|^2 <= p1*(1-p1) violated: |a|^2={abs(a) ** 2:.6g} > {p1 * (1.0 - p1):.6g}"
        )


@dataclass(frozen=True)
class DensityMatrix:
    p1: float
    a: complex = 0j

    def __post_init__(self) -> None:
        object.__setattr__(self, "p1", float(self.p1))
        object.__setattr__(self, "a", complex(self.a))
        _check_physical(self.p1, self.a, INTEGRATION_TOL)

    @property
    def p0(self) -> float:
        return 1.0 - self.p1

    def to_dict(self) -> dict:
        return {"p1": self.p1, "re_a": self.a.real, "im_a": self.a.imag}


@dataclass(frozen=True)
class BlochVector:
    x: float
    y: float
    z: float

    @property
    def norm(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)

    @property
    def is_pure(self) -> bool:
        return abs(self.norm - 1.0) <= BLOCH_SLACK

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])


@dataclass(frozen=True)
class Spectrum:
    lam_hi: float
    lam_lo: float
    eigenbasis: Tuple[np.ndarray, np.ndarray] = field(compare=False)


GROUND = DensityMatrix(0.0, 0j)
EXCITED = DensityMatrix(1.0, 0j)
MAXIMALLY_MIXED = DensityMatrix(0.5, 0j)


def make_state(p1: float, a: complex = 0j) -> DensityMatrix:
    if not 0.0 <= p1 <= 1.0:
        raise DomainError(f"population p1={p1} outside [0, 1]")
    _check_physical(p1, complex(a), CONSTRUCT_TOL)
    return DensityMatrix(p1, a)


def pure_state(theta: float) -> DensityMatrix:
    """State reached from |0> by a Y rotation through the Rabi angle theta."""
    if not 0.0 <= theta <= math.pi:
        raise DomainError(f"Rabi angle {theta} outside [0, pi]")
    s, c = math.sin(theta / 2.0), math.cos(theta / 2.0)
    return DensityMatrix(s * s, s * c)


def to_bloch(rho: DensityMatrix) -> BlochVector:
    return BlochVector(2.0 * rho.a.real, -2.0 * rho.a.imag, 1.0 - 2.0 * rho.p1)


def from_bloch(v: BlochVector) -> DensityMatrix:
    if v.norm > 1.0 + BLOCH_SLACK:
        raise PositivityViolation(f"Bloch norm {v.norm:.12g} exceeds 1")
    return DensityMatrix((1.0 - v.z) / 2.0, complex(v.x, -v.y) / 2.0)


def spectrum(rho: DensityMatrix) -> Spectrum:
    v = to_bloch(rho)
    r = min(v.norm, 1.0)
    lam_lo = max(0.0, 0.5 - r / 2.0)
    lam_hi = 1.0 - lam_lo
    if r == 0.0:
        basis = (np.array([1.0 + 0j, 0j]), np.array([0j, 1.0 + 0j]))
        return Spectrum(lam_hi, lam_lo, basis)
    # the high eigenvector points along the Bloch vector
    beta = math.atan2(math.hypot(v.x, v.y), v.z)
    phi = math.atan2(v.y, v.x)
    cb, sb = math.cos(beta / 2.0), math.sin(beta / 2.0)
    phase = complex(math.cos(phi), math.sin(phi))
    hi = np.array([cb, phase * sb], dtype=complex)
    lo = np.array([-phase.conjugate() * sb, cb], dtype=complex)
    return Spectrum(lam_hi, lam_lo, (hi, lo))


def entropy(rho: DensityMatrix) -> float:
    """Von Neumann entropy in nats."""
    spec = spectrum(rho)
    return float(special.entr(spec.lam_hi) + special.entr(spec.lam_lo))


def purity(rho: DensityMatrix) -> float:
    return (1.0 + to_bloch(rho).norm ** 2) / 2.0


def trace_distance(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    d = to_bloch(rho).as_array() - to_bloch(sigma).as_array()
    return float(np.linalg.norm(d)) / 2.0


def to_matrix(rho: DensityMatrix) -> np.ndarray:
    return np.array([[rho.p0, rho.a], [rho.a.conjugate(), rho.p1]], dtype=complex)


def from_matrix(m: np.ndarray, tol: float = INTEGRATION_TOL) -> DensityMatrix:
    m = np.asarray(m, dtype=complex)
    if m.shape != (2, 2):
        raise DomainError(f"expected a 2x2 matrix, got shape {m.shape}")
    tr = m[0, 0] + m[1, 1]
    if abs(tr - 1.0) > tol:
        raise PositivityViolation(f"trace {tr.real:.12g} differs from 1")
    if abs(m[0, 1] - m[1, 0].conjugate()) > tol:
        raise PositivityViolation("matrix is not Hermitian")
    a = 0.5 * (m[0, 1] + m[1, 0].conjugate())
    return DensityMatrix(float(m[1, 1].real), a)


def clip_physical(p1: float, a: complex) -> DensityMatrix:
    """Nearest valid state to (p1, a); only called at readout."""
    x, y, z = 2.0 * a.real, -2.0 * a.imag, 1.0 - 2.0 * p1
    norm = math.sqrt(x * x + y * y + z * z)
    if norm > 1.0:
        logger.debug("clipping Bloch norm %.3e back to the unit ball", norm)
        x, y, z = x / norm, y / norm, z / norm
    return DensityMatrix((1.0 - z) / 2.0, complex(x, -y) / 2.0)
