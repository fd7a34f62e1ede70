import math

import numpy as np
import pytest

from ergolab.errors import DomainError, PositivityViolation
from ergolab.state import (
    GROUND,
    MAXIMALLY_MIXED,
    BlochVector,
    DensityMatrix,
    clip_physical,
    entropy,
    from_bloch,
    from_matrix,
    make_state,
    pure_state,
    purity,
    spectrum,
    to_bloch,
    to_matrix,
    trace_distance,
)


def random_states(n, seed=0):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        v = rng.normal(size=3)
        v *= rng.uniform() ** (1 / 3) / np.linalg.norm(v)
        out.append(from_bloch(BlochVector(*v)))
    return out


def test_make_state_ground():
    rho = make_state(0.0, 0.0)
    assert rho == GROUND


def test_make_state_reference_state_is_pure():
    rho = make_state(2 / 3, math.sqrt(2) / 3)
    assert purity(rho) == pytest.approx(1.0, abs=1e-12)


def test_make_state_rejects_excess_coherence():
    with pytest.raises(PositivityViolation):
        make_state(0.6, 0.5)


def test_make_state_rejects_population_outside_unit_interval():
    with pytest.raises(DomainError):
        make_state(1.2, 0.0)


@pytest.mark.parametrize(
    "theta, p1, a",
    [(0.0, 0.0, 0.0), (math.pi / 2, 0.5, 0.5), (2 * math.pi / 3, 0.75, 0.433013)],
)
def test_pure_state(theta, p1, a):
    rho = pure_state(theta)
    assert rho.p1 == pytest.approx(p1, abs=1e-12)
    assert rho.a.real == pytest.approx(a, abs=1e-6)
    assert rho.a.imag == 0.0
    assert purity(rho) == pytest.approx(1.0, abs=1e-12)


def test_pure_state_rejects_angles_outside_range():
    with pytest.raises(DomainError):
        pure_state(-0.1)
    with pytest.raises(DomainError):
        pure_state(4.0)


def test_bloch_convention():
    assert to_bloch(GROUND) == BlochVector(0.0, 0.0, 1.0)
    v = to_bloch(DensityMatrix(0.5, 0.5))
    assert (v.x, v.y, v.z) == pytest.approx((1.0, 0.0, 0.0))
    excited = from_bloch(BlochVector(0.0, 0.0, -1.0))
    assert excited.p1 == 1.0 and excited.a == 0


def test_bloch_of_off_axis_state():
    v = to_bloch(DensityMatrix(0.6, 0.2))
    assert (v.x, v.y, v.z) == pytest.approx((0.4, 0.0, -0.2))


def test_from_bloch_rejects_long_vectors():
    with pytest.raises(PositivityViolation):
        from_bloch(BlochVector(1.0, 0.1, 0.0))


def test_bloch_round_trip_and_spectrum_properties():
    for rho in random_states(10_000):
        back = from_bloch(to_bloch(rho))
        assert abs(back.p1 - rho.p1) <= 1e-12
        assert abs(back.a - rho.a) <= 1e-12
        spec = spectrum(rho)
        assert spec.lam_hi + spec.lam_lo == pytest.approx(1.0, abs=1e-12)
        assert 0.0 <= spec.lam_lo <= spec.lam_hi <= 1.0
        assert -1e-15 <= entropy(rho) <= math.log(2) + 1e-12


@pytest.mark.parametrize(
    "rho, expected",
    [
        (MAXIMALLY_MIXED, (0.5, 0.5)),
        (pure_state(1.1), (1.0, 0.0)),
        (DensityMatrix(0.6, 0.2), (0.723607, 0.276393)),
    ],
)
def test_spectrum_values(rho, expected):
    spec = spectrum(rho)
    assert (spec.lam_hi, spec.lam_lo) == pytest.approx(expected, abs=1e-6)


def test_spectrum_reconstructs_the_matrix():
    for rho in random_states(200, seed=3):
        spec = spectrum(rho)
        hi, lo = spec.eigenbasis
        assert abs(np.vdot(hi, lo)) <= 1e-12
        assert np.linalg.norm(hi) == pytest.approx(1.0, abs=1e-12)
        m = spec.lam_hi * np.outer(hi, hi.conj()) + spec.lam_lo * np.outer(lo, lo.conj())
        assert np.abs(m - to_matrix(rho)).max() <= 1e-12


@pytest.mark.parametrize(
    "rho, expected",
    [(pure_state(0.7), 0.0), (MAXIMALLY_MIXED, 0.693147), (DensityMatrix(0.6, 0.2), 0.589514)],
)
def test_entropy(rho, expected):
    assert entropy(rho) == pytest.approx(expected, abs=1e-6)


def test_entropy_is_unitary_invariant():
    rng = np.random.default_rng(7)
    for rho in random_states(500, seed=11):
        axis = rng.normal(size=3)
        axis /= np.linalg.norm(axis)
        angle = rng.uniform(0, math.pi)
        n_sigma = np.array([[axis[2], axis[0] - 1j * axis[1]], [axis[0] + 1j * axis[1], -axis[2]]])
        u = math.cos(angle / 2) * np.eye(2) - 1j * math.sin(angle / 2) * n_sigma
        rotated = from_matrix(u @ to_matrix(rho) @ u.conj().T)
        assert abs(entropy(rotated) - entropy(rho)) <= 1e-10


def test_trace_distance_between_antipodes_is_one():
    assert trace_distance(GROUND, DensityMatrix(1.0, 0)) == pytest.approx(1.0)


def test_clip_physical_pulls_slight_overshoot_back():
    rho = clip_physical(1.0 + 1e-10, 0j)
    assert rho.p1 <= 1.0
    assert rho.p1 == pytest.approx(1.0, abs=1e-9)
