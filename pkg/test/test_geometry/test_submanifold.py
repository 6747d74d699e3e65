from dataclasses import dataclass

import numpy as np
import pytest

from ukblab.errors import DimensionMismatch, EmptyCandidate, PointNotOnSubmanifold
from ukblab.geometry.submanifold import (
    ProjectiveSubmanifold,
    RealPointSet,
    chart,
    chart_inverse,
    compact_operators,
    submanifold_closedness_check,
    tangent_span_condition,
    tangent_space,
)
from ukblab.linalg.kernel import DEFAULT_TOLERANCES, Subspace, orthonormalize, random_unit_vector
from ukblab.states.state import ProjectivePoint


def coordinate_span(n, *indices):
    return orthonormalize([np.eye(n)[k] for k in indices])


@dataclass(frozen=True)
class ChartBall:
    """Rays of C^3 whose chart image at e_0 has norm below 1, or at most 1
    when ``closed``."""

    closed: bool
    fiber: int = 1
    ambient_dim: int = 3

    def defect(self, vector):
        vector = np.asarray(vector, dtype=complex)
        if vector[0] == 0:
            return 1.0
        radius = float(np.linalg.norm(vector[1:]) / abs(vector[0]))
        if self.closed:
            return max(0.0, radius - 1.0)
        return 0.0 if radius < 1.0 else 1.0

    def contains(self, point, tol=DEFAULT_TOLERANCES):
        return self.defect(point.ray) <= tol.tol_eq

    def sample(self, rng):
        v = random_unit_vector(2, rng) * rng.uniform(0.0, 0.9)
        return ProjectivePoint.from_vector(self.fiber, [1.0, *v])


def test_projective_submanifold():
    sub = ProjectiveSubmanifold(1, coordinate_span(3, 0, 1))
    assert sub.ambient_dim == 3
    assert sub.contains(ProjectivePoint.from_vector(1, [1, 1j, 0]))
    assert not sub.contains(ProjectivePoint.from_vector(1, [1, 0, 1]))
    assert not sub.contains(ProjectivePoint.from_vector(2, [1, 0, 0]))
    with pytest.raises(EmptyCandidate):
        ProjectiveSubmanifold(1, Subspace.zero(3))


def test_tangent_space():
    sub = ProjectiveSubmanifold(1, coordinate_span(3, 0, 1))
    point = ProjectivePoint.from_vector(1, [1, 0, 0])
    tangent = tangent_space(point, sub)
    assert tangent.dim == 1
    assert tangent.contains([0, 1, 0])
    with pytest.raises(PointNotOnSubmanifold):
        tangent_space(ProjectivePoint.from_vector(1, [0, 0, 1]), sub)


def test_chart_roundtrip():
    center = np.array([1, 0, 0], dtype=complex)
    x = np.array([1, 1j, 2]) / np.sqrt(6)
    v = chart(center, x)
    assert abs(np.vdot(center, v)) == pytest.approx(0, abs=1e-12)
    assert abs(np.vdot(x, chart_inverse(center, v))) == pytest.approx(1)


def test_tangent_span_holds_for_nested_candidates():
    small = coordinate_span(3, 0)
    large = coordinate_span(3, 0, 1)
    result = tangent_span_condition(3, [small, large])
    assert result
    assert result.recovered.same_span(large)
    assert result.witness is None


def test_tangent_span_fails_for_two_lines():
    result = tangent_span_condition(3, [coordinate_span(3, 0), coordinate_span(3, 1)])
    assert not result
    assert result.span.dim == 2
    # the witness lies in the span but on neither line
    assert result.span.contains(result.witness)
    assert coordinate_span(3, 0).residual(result.witness) > 1e-8
    assert coordinate_span(3, 1).residual(result.witness) > 1e-8


def test_tangent_span_errors():
    with pytest.raises(EmptyCandidate):
        tangent_span_condition(3, [])
    with pytest.raises(EmptyCandidate):
        tangent_span_condition(3, [Subspace.zero(3)])
    with pytest.raises(DimensionMismatch):
        tangent_span_condition(3, [coordinate_span(2, 0)])


def test_compact_operators():
    b = compact_operators(coordinate_span(3, 0, 2))
    assert b.as_algebra.dim == 4
    np.testing.assert_allclose(b.unit_p, np.diag([1, 0, 1]), atol=1e-12)


def test_closedness_of_projective_subspace(rng):
    sub = ProjectiveSubmanifold(1, coordinate_span(4, 0, 1, 2))
    suite = submanifold_closedness_check(sub, samples=30, rng=rng)
    assert suite.passed
    assert [result.name for result in suite.results] == ["chart_linearity", "limit_closure"]


def test_real_points_are_not_complex(rng):
    suite = submanifold_closedness_check(RealPointSet(1, 3), samples=30, rng=rng)
    assert suite.result("limit_closure").passed
    assert not suite.result("chart_linearity").passed


def test_open_ball_is_not_closed(rng):
    # members along chart lines converge to boundary rays outside the set
    suite = submanifold_closedness_check(ChartBall(closed=False), samples=30, rng=rng)
    assert not suite.result("limit_closure").passed
    assert suite.result("limit_closure").max_residual == 1.0


def test_closed_ball_limits(rng):
    suite = submanifold_closedness_check(ChartBall(closed=True), samples=30, rng=rng)
    assert suite.result("limit_closure").passed
    # a ball is closed but not a projective subspace
    assert not suite.result("chart_linearity").passed
