"""Energy, passive states and the coherent/incoherent split of ergotropy.

Energies are normalized to E_max = hbar*omega_q with the ground level at 0,
so the energy of a state is its excited population.
"""
from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass

from scipy import constants, optimize, special

from .config import QubitParams
from .errors import DomainError
from .state import (
    DensityMatrix,
    MAXIMALLY_MIXED,
    entropy,
    pure_state,
    spectrum,
)

logger = logging.getLogger(__name__)

BISECTION_XTOL = 1e-12


@dataclass(frozen=True)
class ErgotropyReport:
    energy: float
    ergotropy_total: float
    ergotropy_incoherent: float
    ergotropy_coherent: float
    coherence: float

    def to_dict(self) -> dict:
        return asdict(self)


def energy(rho: DensityMatrix) -> float:
    return rho.p1


def absolute_energy(value: float, params: QubitParams) -> float:
    """Normalized energy to joules."""
    return value * constants.hbar * params.omega_q


def passive_state(rho: DensityMatrix) -> DensityMatrix:
    spec = spectrum(rho)
    if spec.lam_hi == spec.lam_lo:
        return MAXIMALLY_MIXED
    return DensityMatrix(spec.lam_lo, 0j)


def ergotropy(rho: DensityMatrix) -> float:
    return max(0.0, rho.p1 - spectrum(rho).lam_lo)


def dephase(rho: DensityMatrix) -> DensityMatrix:
    return DensityMatrix(rho.p1, 0j)


def coherence(rho: DensityMatrix) -> float:
    """Relative entropy of coherence in nats."""
    if rho.a == 0:
        return 0.0
    return max(0.0, entropy(dephase(rho)) - entropy(rho))


def incoherent_ergotropy(rho: DensityMatrix) -> float:
    return ergotropy(dephase(rho))


def coherent_ergotropy(rho: DensityMatrix) -> float:
    return ergotropy(rho) - incoherent_ergotropy(rho)


def sigma_state(rho: DensityMatrix) -> DensityMatrix:
    """Lowest-energy state with the coherence of rho: the V_pi image when p1 > 1/2."""
    if rho.p1 > 0.5:
        return DensityMatrix(1.0 - rho.p1, rho.a.conjugate())
    return rho


def report(rho: DensityMatrix) -> ErgotropyReport:
    total = ergotropy(rho)
    inc = incoherent_ergotropy(rho)
    return ErgotropyReport(
        energy=energy(rho),
        ergotropy_total=total,
        ergotropy_incoherent=inc,
        ergotropy_coherent=total - inc,
        coherence=coherence(rho),
    )


def pure_state_coherence(theta: float) -> float:
    s = math.sin(theta / 2.0) ** 2
    c = math.cos(theta / 2.0) ** 2
    return float(special.entr(s) + special.entr(c))


def partial_dephase(theta: float, c_target: float) -> DensityMatrix:
    """State with the populations of pure_state(theta) and coherence c_target.

    Coherence grows strictly with |a| at fixed populations, so |a| is found by
    bisection on [0, sin(theta/2)cos(theta/2)].
    """
    if not 0.0 < theta < math.pi:
        raise DomainError(f"Rabi angle {theta} outside (0, pi)")
    c_max = pure_state_coherence(theta)
    if c_target < 0.0 or c_target > c_max + 1e-12:
        raise DomainError(f"coherence {c_target} outside [0, {c_max}] available at theta={theta}")
    pure = pure_state(theta)
    if c_target == 0.0:
        return dephase(pure)
    a_max = pure.a.real

    def residual(amp: float) -> float:
        return coherence(DensityMatrix(pure.p1, amp)) - c_target

    # the spectrum path can sit a few ulps below the closed form
    if c_target >= c_max or residual(a_max) <= 0.0:
        return pure
    amp = optimize.bisect(residual, 0.0, a_max, xtol=BISECTION_XTOL)
    logger.debug("partial_dephase theta=%.6f c=%.6f -> |a|=%.12f", theta, c_target, amp)
    return DensityMatrix(pure.p1, amp)
