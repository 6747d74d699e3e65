"""
Projective submanifolds P_M ⊂ CP^{n-1}, their tangent spaces, and the
tangent-span criterion that recognizes the pure-state sets of hereditary
subalgebras K(M) = p·M_n·p of M_n.

Points are handled in the affine chart at a base point ξ,
b_ξ(x) = x/⟨ξ|x⟩ − ξ, which maps the rays not orthogonal to ξ onto {ξ}⊥;
P_M is a closed Kähler submanifold because its chart image is the complex
subspace M ∩ {ξ}⊥.
"""

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ukblab.algebra.core import full_matrix_algebra
from ukblab.algebra.hereditary import HereditarySubalgebra, hereditary_from_projection
from ukblab.errors import DimensionMismatch, EmptyCandidate, PointNotOnSubmanifold
from ukblab.geometry.bundle import KAPPA
from ukblab.linalg.kernel import (
    DEFAULT_TOLERANCES,
    Subspace,
    ToleranceConfig,
    as_vector,
    orthonormalize,
    random_real_unit_vector,
    random_unit_vector,
)
from ukblab.states.state import ProjectivePoint
from ukblab.utils.report import CheckResult, CheckSuite

#: random stream for witnesses of the tangent-span criterion
STREAM_TANGENT = 401
#: random stream for chart sampling
STREAM_CHART = 402
#: margin kept between chart samples and the cut locus at distance κ
CUT_LOCUS_MARGIN = 1e-6
#: bisection steps toward the limit of a sequence in the closedness check
LIMIT_STEPS = 40
#: chart lines of the closedness check run this far past their first point,
#: in units of the distance between their two sampled points
LIMIT_REACH = 4.0


@dataclass(frozen=True, eq=False)
class ProjectiveSubmanifold:
    """P_M for a nonzero subspace M of C^n in the fiber over ``fiber``."""

    fiber: int
    subspace: Subspace

    def __post_init__(self):
        if self.subspace.dim == 0:
            raise EmptyCandidate("P_M needs a nonzero subspace M")

    @property
    def ambient_dim(self) -> int:
        return self.subspace.ambient_dim

    def defect(self, vector) -> float:
        """Distance of the unit vector along ``vector`` from M."""
        vector = as_vector(vector)
        return self.subspace.residual(vector / np.linalg.norm(vector))

    def contains(self, point: ProjectivePoint, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> bool:
        return (
            point.fiber == self.fiber
            and point.dim == self.ambient_dim
            and self.defect(point.ray) <= tol.tol_eq
        )

    def sample(self, rng: np.random.Generator) -> ProjectivePoint:
        vector = self.subspace.basis @ random_unit_vector(self.subspace.dim, rng)
        return ProjectivePoint.from_vector(self.fiber, vector)

    def __repr__(self):
        return f"ProjectiveSubmanifold(fiber={self.fiber}, n={self.ambient_dim}, dim M={self.subspace.dim})"


@dataclass(frozen=True, eq=False)
class RealPointSet:
    """Rays with a real representative; a totally real submanifold of
    CP^{n-1}, not of the form P_M."""

    fiber: int
    ambient_dim: int

    def defect(self, vector) -> float:
        """1 − |xᵀx| for the unit vector x along ``vector``; zero exactly
        when x is real up to phase."""
        vector = as_vector(vector)
        vector = vector / np.linalg.norm(vector)
        return 1.0 - float(abs(vector @ vector))

    def contains(self, point: ProjectivePoint, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> bool:
        return (
            point.fiber == self.fiber
            and point.dim == self.ambient_dim
            and self.defect(point.ray) <= tol.tol_eq
        )

    def sample(self, rng: np.random.Generator) -> ProjectivePoint:
        return ProjectivePoint.from_vector(self.fiber, random_real_unit_vector(self.ambient_dim, rng))


def tangent_space(point: ProjectivePoint, sub: ProjectiveSubmanifold) -> Subspace:
    """M ∩ {ξ}⊥, the holomorphic tangent space of P_M at [ξ].

    :raises: PointNotOnSubmanifold
    """
    if not sub.contains(point):
        raise PointNotOnSubmanifold(f"{point} is not on {sub}")
    xi = point.ray
    basis = sub.subspace.basis
    projected = basis - np.outer(xi, xi.conj() @ basis)
    return orthonormalize(projected, ambient_dim=sub.ambient_dim, scale=1.0)


def chart(center: np.ndarray, x: np.ndarray) -> np.ndarray:
    """b_ξ(x) = x/⟨ξ|x⟩ − ξ"""
    return x / np.vdot(center, x) - center


def chart_inverse(center: np.ndarray, v: np.ndarray) -> np.ndarray:
    vector = center + v
    return vector / np.linalg.norm(vector)


@dataclass(frozen=True, eq=False)
class TangentSpanResult:
    holds: bool
    #: M = span of the candidate subspaces
    span: Subspace
    #: M when the criterion holds
    recovered: Subspace | None = None
    #: a unit vector of M whose ray is outside the candidate set
    witness: np.ndarray | None = None

    def __bool__(self):
        return self.holds


def tangent_span_condition(
    n: int,
    candidates: Sequence[Subspace],
    tol: ToleranceConfig = DEFAULT_TOLERANCES,
) -> TangentSpanResult:
    """Decide whether P′ = ⋃_j P_{M_j} is closed under taking the span of
    its points and tangent spaces.

    Since each point together with its tangent space spans M_j, the
    closure is P_M for M = span(⋃ M_j); it lies in P′ exactly when some
    M_j already equals M. Otherwise a witness ray of P_M outside P′ is
    returned.

    :raises: EmptyCandidate, DimensionMismatch
    """
    if not candidates:
        raise EmptyCandidate("Candidate union is empty")
    for subspace in candidates:
        if subspace.ambient_dim != n:
            raise DimensionMismatch(f"Candidate lives in C^{subspace.ambient_dim}, expected C^{n}")
        if subspace.dim == 0:
            raise EmptyCandidate("Candidate contains a zero subspace")
    span = orthonormalize(np.hstack([s.basis for s in candidates]), tol)
    for subspace in candidates:
        if subspace.same_span(span, tol):
            return TangentSpanResult(True, span, subspace)

    def outside(vector):
        return all(s.residual(vector) > tol.tol_eq for s in candidates)

    first = sum(s.basis[:, 0] for s in candidates)
    if np.linalg.norm(first) > tol.tol_eq and outside(first / np.linalg.norm(first)):
        return TangentSpanResult(False, span, witness=first / np.linalg.norm(first))
    rng = tol.rng(STREAM_TANGENT)
    while True:
        vector = span.basis @ random_unit_vector(span.dim, rng)
        if outside(vector):
            return TangentSpanResult(False, span, witness=vector)


def compact_operators(subspace: Subspace, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> HereditarySubalgebra:
    """K(M) = p·M_n·p for p the projection onto M."""
    return hereditary_from_projection(full_matrix_algebra(subspace.ambient_dim, tol), subspace.projector())


def _boundary_limit(
    sub: ProjectiveSubmanifold | RealPointSet,
    center: np.ndarray,
    start: np.ndarray,
    end: np.ndarray,
    tol: ToleranceConfig,
) -> tuple[float, np.ndarray]:
    """Follow the chart line from ``start`` through ``end`` up to
    LIMIT_REACH. Bisection gives members of the set converging to the
    first point where the line leaves it, or to the far end when it never
    does; returns the defect at that limit and the limit ray."""

    def ray(t: float) -> np.ndarray:
        return chart_inverse(center, start + t * (end - start))

    inside, outside = 0.0, LIMIT_REACH
    if sub.contains(ProjectivePoint.from_vector(sub.fiber, ray(outside)), tol):
        limit = ray(outside)
        return sub.defect(limit), limit
    for _ in range(LIMIT_STEPS):
        middle = (inside + outside) / 2
        if sub.contains(ProjectivePoint.from_vector(sub.fiber, ray(middle)), tol):
            inside = middle
        else:
            outside = middle
    limit = ray(outside)
    return sub.defect(limit), limit


def submanifold_closedness_check(
    sub: ProjectiveSubmanifold | RealPointSet,
    samples: int = 200,
    tol: ToleranceConfig = DEFAULT_TOLERANCES,
    rng: np.random.Generator | None = None,
) -> CheckSuite:
    """Check that ``sub`` is a closed Kähler submanifold around a sampled
    base point ξ.

    Clauses: chart_linearity (random points of the complex span of the
    chart image map back into the set), limit_closure (sequences of
    members along chart lines through pairs of sampled points converge to
    members: where a line leaves the set, the defect at the exit point
    stays at the membership tolerance).
    """
    rng = rng or tol.rng(STREAM_CHART)
    suite = CheckSuite("submanifold_closedness")
    center = sub.sample(rng).ray
    # chart domain: distance to ξ below κ − margin
    min_overlap = math.cos((KAPPA - CUT_LOCUS_MARGIN) / math.sqrt(2))

    points = []
    for _ in range(samples):
        x = sub.sample(rng).ray
        if abs(np.vdot(center, x)) > min_overlap:
            points.append(x)

    images = [chart(center, x) for x in points]
    image_span = orthonormalize(images, tol, ambient_dim=len(center), scale=1.0)
    linearity = []
    if image_span.dim:
        for _ in range(samples):
            coefficients = random_unit_vector(image_span.dim, rng) * rng.uniform(0.1, 2.0)
            v = image_span.basis @ coefficients
            linearity.append((sub.defect(chart_inverse(center, v)), {"chart_point": v}))
    suite.add(CheckResult.from_residuals("chart_linearity", linearity, tol.tol_eq))

    closure = []
    for k in range(0, len(images) - 1, 2):
        defect, limit = _boundary_limit(sub, center, images[k], images[k + 1], tol)
        closure.append((defect, {"limit": limit}))
    # the exit point of a closed set sits at the membership tolerance
    suite.add(CheckResult.from_residuals("limit_closure", closure, 2 * tol.tol_eq))
    return suite
