"""Simulated readout and single-qubit state tomography.

Each Pauli basis is measured with a binomial number of +1 outcomes. Linear
inversion turns the empirical means straight into a Bloch vector; estimates
that land outside the unit ball are pulled radially back onto it.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Sequence, Tuple, Union

import numpy as np

from .errors import DomainError, InsufficientRepetitions
from .ergotropy import report
from .state import BlochVector, DensityMatrix, from_bloch, to_bloch

logger = logging.getLogger(__name__)

BASES = ("X", "Y", "Z")
DEFAULT_SHOTS = 1000
DEFAULT_REPETITIONS = 20

Seed = Union[int, Sequence[int], np.random.SeedSequence]
Counts = Tuple[int, int]


@dataclass(frozen=True)
class Estimate:
    mean: float
    std_error: float


@dataclass(frozen=True)
class TomographyResult:
    estimate: DensityMatrix
    shots_per_basis: int
    repetitions: int
    std_error: Dict[str, float]
    seed: Tuple[int, ...]
    bloch_samples: List[BlochVector] = field(default_factory=list, compare=False)
    means: Dict[str, float] = field(default_factory=dict, compare=False)


def pauli_expectations(rho: DensityMatrix) -> Tuple[float, float, float]:
    v = to_bloch(rho)
    return v.x, v.y, v.z


def sample_counts(rho: DensityMatrix, basis: str, shots: int, seed: Seed) -> Counts:
    """Draw (n_plus, n_minus) for `shots` projective measurements of one Pauli."""
    if shots < 1:
        raise DomainError(f"shots must be >= 1, got {shots}")
    try:
        mean = pauli_expectations(rho)[BASES.index(basis)]
    except ValueError:
        raise DomainError(f"unknown basis {basis!r}; use one of {BASES}")
    p_plus = min(1.0, max(0.0, (1.0 + mean) / 2.0))
    rng = np.random.default_rng(seed)
    n_plus = int(rng.binomial(shots, p_plus))
    return n_plus, shots - n_plus


def reconstruct(counts: Mapping[str, Counts], seed: Tuple[int, ...] = (), propagate: bool = True) -> TomographyResult:
    """Linear-inversion estimate from (n_plus, n_minus) per basis.

    Single-shot errors are binomial for x, y and z and propagated to first
    order for coherence and the ergotropies; repeated runs skip that and use
    the spread across repetitions instead.
    """
    means = []
    errors: Dict[str, float] = {}
    for basis in BASES:
        n_plus, n_minus = counts[basis]
        total = n_plus + n_minus
        if total < 1:
            raise DomainError(f"basis {basis} has no shots")
        m = (n_plus - n_minus) / total
        means.append(m)
        errors[basis.lower()] = math.sqrt(max(0.0, 1.0 - m * m) / total)
    r = np.array(means)
    norm = float(np.linalg.norm(r))
    if norm > 1.0:
        logger.debug("raw Bloch estimate of norm %.4f projected onto the unit sphere", norm)
        r = r / norm
    estimate = from_bloch(BlochVector(*map(float, r)))
    errors["energy"] = errors["z"] / 2.0
    if propagate:
        errors.update(propagate_errors(r, [errors[b.lower()] for b in BASES]))
    shots = min(sum(counts[b]) for b in BASES)
    return TomographyResult(
        estimate=estimate,
        shots_per_basis=shots,
        repetitions=1,
        std_error=errors,
        seed=tuple(seed),
        bloch_samples=[to_bloch(estimate)],
    )


def repeat_stats(samples: Sequence[Mapping[str, float]]) -> Dict[str, Estimate]:
    """Mean and standard error (population std over sqrt(n)) per quantity."""
    n = len(samples)
    if n < 2:
        raise InsufficientRepetitions(f"need at least 2 repetitions, got {n}")
    out: Dict[str, Estimate] = {}
    for key in samples[0]:
        values = np.array([s[key] for s in samples], dtype=float)
        out[key] = Estimate(float(values.mean()), float(values.std() / math.sqrt(n)))
    return out


def _quantities(rho: DensityMatrix) -> Dict[str, float]:
    rep = report(rho)
    v = to_bloch(rho)
    return {
        "energy": rep.energy,
        "coherence": rep.coherence,
        "ergotropy": rep.ergotropy_total,
        "ergotropy_incoherent": rep.ergotropy_incoherent,
        "ergotropy_coherent": rep.ergotropy_coherent,
        "x": v.x,
        "y": v.y,
        "z": v.z,
    }


PROPAGATED = ("coherence", "ergotropy", "ergotropy_incoherent", "ergotropy_coherent")
DIFF_STEP = 1e-6


def _in_ball(r: np.ndarray) -> DensityMatrix:
    norm = float(np.linalg.norm(r))
    if norm > 1.0:
        r = r / norm
    return from_bloch(BlochVector(*map(float, r)))


def propagate_errors(r: np.ndarray, sigma: Sequence[float]) -> Dict[str, float]:
    """First-order error of the derived quantities from independent Bloch-component errors.

    Gradients are central differences, with both points kept inside the unit ball.
    """
    grads = np.zeros((len(PROPAGATED), 3))
    for i in range(3):
        step = np.zeros(3)
        step[i] = DIFF_STEP
        hi = _quantities(_in_ball(r + step))
        lo = _quantities(_in_ball(r - step))
        for k, key in enumerate(PROPAGATED):
            grads[k, i] = (hi[key] - lo[key]) / (2.0 * DIFF_STEP)
    var = (grads ** 2) @ (np.asarray(sigma, dtype=float) ** 2)
    return {key: float(math.sqrt(v)) for key, v in zip(PROPAGATED, var)}


def tomography(
    rho: DensityMatrix,
    shots: int = DEFAULT_SHOTS,
    repetitions: int = DEFAULT_REPETITIONS,
    seed: int = 0,
    stream: Tuple[int, ...] = (),
) -> TomographyResult:
    """Repeat full tomography of rho; the i-th repetition draws from seed (seed, *stream, i, basis)."""
    runs: List[DensityMatrix] = []
    for rep in range(repetitions):
        counts = {
            basis: sample_counts(rho, basis, shots, (seed, *stream, rep, b))
            for b, basis in enumerate(BASES)
        }
        runs.append(reconstruct(counts, propagate=False).estimate)
    stats = repeat_stats([_quantities(r) for r in runs])
    mean_r = np.array([stats["x"].mean, stats["y"].mean, stats["z"].mean])
    norm = float(np.linalg.norm(mean_r))
    if norm > 1.0:
        mean_r = mean_r / norm
    return TomographyResult(
        estimate=from_bloch(BlochVector(*map(float, mean_r))),
        shots_per_basis=shots,
        repetitions=repetitions,
        std_error={k: e.std_error for k, e in stats.items()},
        seed=(seed, *stream),
        bloch_samples=[to_bloch(r) for r in runs],
        means={k: e.mean for k, e in stats.items()},
    )
