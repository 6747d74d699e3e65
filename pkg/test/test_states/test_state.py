import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ukblab.algebra.ideals import make_ideal, quotient
from ukblab.errors import DimensionMismatch, NotNormalized, NotPositive, NotPure
from ukblab.states.state import (
    ProjectivePoint,
    canonical_ray,
    fiber_of,
    make_state,
    pullback,
    random_pure_state,
    random_state,
    restrict_values,
    state_from_block_densities,
    state_from_density,
    state_from_ray,
    vector_state,
)


def test_projective_point():
    point = ProjectivePoint.from_vector(1, [0, 2j])
    np.testing.assert_allclose(point.ray, [0, 1])
    assert point.dim == 2
    assert point.same_as(ProjectivePoint.from_vector(1, [0, -1]))
    assert not point.same_as(ProjectivePoint.from_vector(2, [0, 1]))
    with pytest.raises(ValueError, match="zero vector"):
        ProjectivePoint.from_vector(1, [0, 0])
    with pytest.raises(ValueError, match="unit vector"):
        ProjectivePoint(1, np.array([1.0, 1.0]))


def test_vector_state(m2):
    omega = vector_state(m2, 1, [1, 1j])
    assert omega.is_pure
    assert fiber_of(omega) == 1
    np.testing.assert_allclose(canonical_ray(omega).ray, np.array([1, 1j]) / np.sqrt(2))
    assert omega(np.eye(2)) == pytest.approx(1)
    assert omega(np.diag([1, 0])) == pytest.approx(0.5)
    # ⟨x|σ_y x⟩ = 1 for x = (1, i)/√2
    assert omega(np.array([[0, -1j], [1j, 0]])) == pytest.approx(1)


def test_make_state_rejects(m2):
    omega = vector_state(m2, 1, [1, 0])
    with pytest.raises(NotNormalized):
        make_state(m2, 2 * omega.values)
    with pytest.raises(NotPositive) as err:
        make_state(m2, -omega.values)
    assert err.value.eigenvalue < 0
    with pytest.raises(DimensionMismatch):
        make_state(m2, omega.values[:2])


def test_mixed_state(m2m3):
    omega = state_from_block_densities(m2m3, {1: np.eye(2) / 4, 2: np.eye(3) / 6})
    assert not omega.is_pure
    assert omega(np.eye(5)) == pytest.approx(1)
    assert omega(m2m3.block(1).central_projection) == pytest.approx(0.5)
    with pytest.raises(NotPure):
        fiber_of(omega)
    with pytest.raises(NotPure):
        canonical_ray(omega)


def test_state_from_density(m2m3):
    density = np.zeros((5, 5))
    density[2, 2] = 1
    omega = state_from_density(m2m3, density)
    assert omega.is_pure
    assert fiber_of(omega) == 2
    assert omega(m2m3.block(2).central_projection) == pytest.approx(1)


def test_multiplicity_densities_agree(m2x2):
    # different ambient densities can give the same state
    first = np.zeros((4, 4))
    first[0, 0] = 1
    second = np.zeros((4, 4))
    second[0, 0] = second[2, 2] = 0.5
    omega = state_from_density(m2x2, first)
    np.testing.assert_allclose(state_from_density(m2x2, second).values, omega.values, atol=1e-12)
    assert omega.is_pure


def test_state_from_ray_dimension(m2m3):
    with pytest.raises(DimensionMismatch, match="n=2"):
        state_from_ray(m2m3, ProjectivePoint.from_vector(1, [1, 0, 0]))


@settings(deadline=None, max_examples=25)
@given(st.integers(min_value=0, max_value=2**31))
def test_canonical_ray_recovers_vector(m2m3, seed):
    rng = np.random.default_rng(seed)
    omega = random_pure_state(m2m3, rng)
    point = canonical_ray(omega)
    rebuilt = state_from_ray(m2m3, point)
    np.testing.assert_allclose(rebuilt.values, omega.values, atol=1e-10)
    # the canonical ray has a real positive leading coordinate
    lead = point.ray[np.flatnonzero(np.abs(point.ray) > 1e-8)[0]]
    assert lead.imag == pytest.approx(0, abs=1e-12)
    assert lead.real > 0


def test_random_pure_state_fiber(m2m3, rng):
    assert fiber_of(random_pure_state(m2m3, rng, fiber=2)) == 2


def test_random_state_is_mixed(m2m3, rng):
    omega = random_state(m2m3, rng)
    assert not omega.is_pure
    assert sorted(omega.density_per_block) == [1, 2]


def test_restrict_and_pullback(m2m3):
    ideal = make_ideal(m2m3, [2])
    omega = vector_state(m2m3, 2, [1, 1, 0])
    values = restrict_values(omega, ideal.as_algebra)
    # ω restricted to the ideal is a state of the ideal
    restricted = make_state(ideal.as_algebra, values)
    assert restricted.is_pure

    q, h = quotient(m2m3, make_ideal(m2m3, [1]))
    tau = vector_state(q, 1, [0, 1, 0])
    pulled = pullback(tau, m2m3, h)
    assert pulled.is_pure
    assert fiber_of(pulled) == 2
