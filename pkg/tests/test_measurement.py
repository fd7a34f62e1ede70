import math

import numpy as np
import pytest

from ergolab.config import THETA_S_REFERENCE
from ergolab.ergotropy import coherence
from ergolab.errors import DomainError, InsufficientRepetitions
from ergolab.measurement import (
    BASES,
    pauli_expectations,
    reconstruct,
    repeat_stats,
    sample_counts,
    tomography,
)
from ergolab.state import GROUND, MAXIMALLY_MIXED, BlochVector, DensityMatrix, from_bloch, pure_state, to_bloch, trace_distance


def test_pauli_expectations():
    assert pauli_expectations(GROUND) == (0.0, 0.0, 1.0)
    assert pauli_expectations(pure_state(math.pi / 2)) == pytest.approx((1.0, 0.0, 0.0), abs=1e-12)
    assert pauli_expectations(DensityMatrix(0.6, 0.2)) == pytest.approx((0.4, 0.0, -0.2))


def test_sample_counts_of_eigenstate():
    assert sample_counts(GROUND, "Z", 777, seed=3) == (777, 0)


def test_sample_counts_of_mixed_state():
    n_plus, n_minus = sample_counts(MAXIMALLY_MIXED, "X", 1_000_000, seed=1)
    assert n_plus + n_minus == 1_000_000
    assert n_plus / 1_000_000 == pytest.approx(0.5, abs=0.002)


def test_sample_counts_is_deterministic_per_seed():
    rho = pure_state(1.0)
    assert sample_counts(rho, "Y", 500, seed=(4, 2)) == sample_counts(rho, "Y", 500, seed=(4, 2))


def test_sample_counts_validation():
    with pytest.raises(DomainError):
        sample_counts(GROUND, "Z", 0, seed=0)
    with pytest.raises(DomainError):
        sample_counts(GROUND, "W", 10, seed=0)


def exact_counts(rho, shots=10**6):
    out = {}
    for basis, m in zip(BASES, pauli_expectations(rho)):
        n_plus = round(shots * (1 + m) / 2)
        out[basis] = (n_plus, shots - n_plus)
    return out


def test_reconstruct_exact_expectations():
    rho = DensityMatrix(0.25, 0.25)
    result = reconstruct(exact_counts(rho, shots=4))
    assert result.estimate.p1 == pytest.approx(0.25)
    assert result.estimate.a == pytest.approx(0.25)


def test_reconstruct_projects_long_vectors():
    # means (0.8, 0.6, 0.6) have norm 1.166
    counts = {"X": (90, 10), "Y": (80, 20), "Z": (80, 20)}
    result = reconstruct(counts)
    assert to_bloch(result.estimate).norm == pytest.approx(1.0, abs=1e-12)


def test_reconstruct_requires_shots():
    with pytest.raises(DomainError):
        reconstruct({"X": (0, 0), "Y": (1, 0), "Z": (1, 0)})


def test_projection_never_moves_away_from_truth():
    truth = pure_state(THETA_S_REFERENCE)
    checked = 0
    for trial in range(300):
        counts = {b: sample_counts(truth, b, 50, seed=(trial, i)) for i, b in enumerate(BASES)}
        raw = np.array([(p - m) / (p + m) for p, m in (counts[b] for b in BASES)])
        if np.linalg.norm(raw) <= 1.0:
            continue
        checked += 1
        projected = to_bloch(reconstruct(counts).estimate).as_array()
        target = to_bloch(truth).as_array()
        assert np.linalg.norm(projected - target) <= np.linalg.norm(raw - target) + 1e-12
    assert checked > 10


def test_reconstruction_error_halves_when_shots_quadruple():
    rho = DensityMatrix(0.35, 0.2 + 0.1j)

    def median_error(shots):
        errors = []
        for trial in range(200):
            counts = {b: sample_counts(rho, b, shots, seed=(shots, trial, i)) for i, b in enumerate(BASES)}
            errors.append(trace_distance(reconstruct(counts).estimate, rho))
        return float(np.median(errors))

    ratio = median_error(250) / median_error(1000)
    assert 1.6 <= ratio <= 2.5


def test_repeat_stats():
    stats = repeat_stats([{"e": 0.0}, {"e": 1.0}])
    assert stats["e"].mean == 0.5
    assert stats["e"].std_error == pytest.approx(0.3536, abs=1e-4)
    same = repeat_stats([{"e": 0.3}] * 5)
    assert same["e"].std_error == 0.0
    with pytest.raises(InsufficientRepetitions):
        repeat_stats([{"e": 1.0}])


def test_tomography_is_reproducible():
    rho = pure_state(2.0)
    a = tomography(rho, shots=200, repetitions=5, seed=11)
    b = tomography(rho, shots=200, repetitions=5, seed=11)
    assert a == b
    assert a.bloch_samples == b.bloch_samples
    c = tomography(rho, shots=200, repetitions=5, seed=12)
    assert c.estimate != a.estimate


def test_tomography_result_fields():
    result = tomography(pure_state(2.0), shots=300, repetitions=4, seed=0, stream=(7,))
    assert result.seed == (0, 7)
    assert result.repetitions == 4
    assert result.shots_per_basis == 300
    assert len(result.bloch_samples) == 4
    assert all(v.norm <= 1.0 + 1e-9 for v in result.bloch_samples)
    assert all(e >= 0 for e in result.std_error.values())
    assert {"energy", "coherence", "ergotropy_incoherent", "ergotropy_coherent"} <= set(result.std_error)


def test_tomography_mean_energy_is_unbiased():
    rho = pure_state(THETA_S_REFERENCE)
    within = 0
    for seed in range(100):
        result = tomography(rho, shots=500, repetitions=20, seed=seed)
        if abs(result.means["energy"] - rho.p1) <= 3 * result.std_error["energy"]:
            within += 1
    assert within >= 95


def test_tomography_of_random_mixed_state_is_close():
    v = BlochVector(0.3, -0.2, 0.4)
    rho = from_bloch(v)
    result = tomography(rho, shots=5000, repetitions=10, seed=2)
    assert trace_distance(result.estimate, rho) <= 0.02


def test_single_shot_errors_cover_derived_quantities():
    result = reconstruct(exact_counts(DensityMatrix(0.35, 0.2), shots=1000))
    for key in ("x", "y", "z", "energy", "coherence", "ergotropy", "ergotropy_incoherent", "ergotropy_coherent"):
        assert math.isfinite(result.std_error[key])
        assert result.std_error[key] >= 0.0
    assert result.std_error["coherence"] > 0.0
    # a pure estimate sits on the sphere; the errors stay finite there
    edge = reconstruct({"X": (1000, 0), "Y": (500, 500), "Z": (500, 500)})
    assert all(math.isfinite(v) for v in edge.std_error.values())


def test_propagated_coherence_error_matches_the_spread_over_seeds():
    rho = DensityMatrix(0.35, 0.2)
    coherences, predicted = [], []
    for trial in range(400):
        counts = {b: sample_counts(rho, b, 1000, seed=(trial, i)) for i, b in enumerate(BASES)}
        result = reconstruct(counts)
        coherences.append(coherence(result.estimate))
        predicted.append(result.std_error["coherence"])
    ratio = float(np.mean(predicted)) / float(np.std(coherences))
    assert 0.8 <= ratio <= 1.25
