"""
The bundle of pure states of a finite-dimensional C*-algebra over its
spectrum. The fiber over block i is the projective space of C^{n_i} with
distance √2·arccos|⟨x|y⟩|; points on different fibers are at the constant
distance 3, which exceeds the fiber diameter √2π/2.

Bundles here are views over one algebra: the full bundle, restrictions
to a subset of the base (open restrictions keyed by ideals, closed ones
keyed by quotients; at finite dimension every subset is both) and Kähler
subbundles whose fibers are projective subspaces.

:func:`check_uniform_kahler_iso` tests a proposed isomorphism between two
bundles clause by clause and returns a :class:`~ukblab.utils.report.CheckSuite`.

Example usage:
```
from ukblab.algebra.core import full_matrix_algebra
from ukblab.algebra.ideals import enumerate_ideals
from ukblab.geometry.bundle import restriction_iso_ideal

a = full_matrix_algebra(2)
for ideal in enumerate_ideals(a):
    assert restriction_iso_ideal(a, ideal).passed
```
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Mapping

import numpy as np
from intspan import intspan

from ukblab.algebra.core import FdCStarAlgebra
from ukblab.algebra.ideals import Ideal, enumerate_ideals, quotient
from ukblab.errors import DimensionMismatch, PointNotOnSubmanifold, UnknownBaseIndex
from ukblab.linalg.kernel import (
    ComplexMatrix,
    Subspace,
    as_matrix,
    intertwiner_space,
    operator_norm,
    random_unit_vector,
)
from ukblab.states.state import (
    ProjectivePoint,
    State,
    canonical_ray,
    fiber_of,
    make_state,
    pullback,
    restrict_values,
    state_from_ray,
)
from ukblab.utils.report import CheckResult, CheckSuite

#: distance between pure states on different fibers; compared exactly
CROSS_FIBER_DISTANCE = 3.0
#: diameter of every fiber, √2·arccos 0
KAPPA = math.sqrt(2) * math.pi / 2
#: random stream for isomorphism checks
STREAM_ISO = 301

FiberMap = ComplexMatrix | Callable[[ProjectivePoint], ProjectivePoint]


def ray_distance(x: np.ndarray, y: np.ndarray) -> float:
    """√2·arccos|⟨x|y⟩| for unit vectors.

    Evaluated as √2·2·atan2(‖x − φy‖, ‖x + φy‖) with φ the phase of
    ⟨y|x⟩, which stays accurate for nearly equal rays.
    """
    overlap = np.vdot(y, x)
    phase = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
    aligned = phase * y
    return math.sqrt(2) * 2 * math.atan2(np.linalg.norm(x - aligned), np.linalg.norm(x + aligned))


def point_distance(p: ProjectivePoint, q: ProjectivePoint) -> float:
    if p.fiber != q.fiber:
        return CROSS_FIBER_DISTANCE
    if p.dim != q.dim:
        raise DimensionMismatch(f"Rays of lengths {p.dim} and {q.dim} on fiber {p.fiber}")
    return ray_distance(p.ray, q.ray)


def kahler_distance(first: State, second: State) -> float:
    """Distance between two pure states of the same algebra.

    :raises: NotPure
    """
    if first.algebra is not second.algebra:
        raise DimensionMismatch("States belong to different algebras")
    return point_distance(canonical_ray(first), canonical_ray(second))


class RestrictionKind(Enum):
    #: restriction to Â^I for an ideal I
    OPEN = "open"
    #: restriction to Â∖Â^I, the spectrum of A/I
    CLOSED = "closed"


class _Fibered:
    """Behaviour shared by every bundle view over one algebra."""

    @property
    def algebra(self) -> FdCStarAlgebra:
        raise NotImplementedError

    @property
    def base(self) -> intspan:
        raise NotImplementedError

    def _require(self, label: int) -> int:
        if label not in self.base:
            raise UnknownBaseIndex(f"{label} is not in the base '{self.base}'")
        return label

    def fiber_frame(self, label: int) -> Subspace:
        """Orthonormal frame of the subspace of C^{n_i} whose rays form the
        fiber."""
        self._require(label)
        return Subspace.full(self.algebra.block(label).n)

    def fiber_dim(self, label: int) -> int:
        return self.fiber_frame(label).dim

    @property
    def fiber_dims(self) -> dict[int, int]:
        return {label: self.fiber_dim(label) for label in self.base}

    def projection(self, state: State) -> int:
        """p(ω): the fiber of a pure state.

        :raises: NotPure, UnknownBaseIndex
        """
        return self._require(fiber_of(state))

    def contains_point(self, point: ProjectivePoint) -> bool:
        if point.fiber not in self.base or point.dim != self.algebra.block(point.fiber).n:
            return False
        return self.fiber_frame(point.fiber).contains(point.ray, self.algebra.tol)

    def contains(self, state: State) -> bool:
        if state.algebra is not self.algebra or not state.is_pure:
            return False
        return self.contains_point(canonical_ray(state))

    def state_at(self, point: ProjectivePoint) -> State:
        self._require(point.fiber)
        if not self.contains_point(point):
            raise PointNotOnSubmanifold(f"{point} is not in the fiber over {point.fiber}")
        return state_from_ray(self.algebra, point)

    def sample_point(self, label: int, rng: np.random.Generator) -> ProjectivePoint:
        frame = self.fiber_frame(label)
        vector = frame.basis @ random_unit_vector(frame.dim, rng)
        return ProjectivePoint.from_vector(label, vector, self.algebra.tol)

    def fiber_roundtrip_residual(self, label: int, samples: int, rng: np.random.Generator) -> float:
        """Largest 1 − |⟨x|x′⟩| where x′ is the canonical ray of the state
        at a sampled ray x."""
        worst = 0.0
        for _ in range(samples):
            point = self.sample_point(label, rng)
            recovered = canonical_ray(self.state_at(point))
            if recovered.fiber != label:
                return 1.0
            worst = max(worst, 1.0 - point.overlap(recovered))
        return worst


@dataclass(frozen=True, eq=False)
class UniformKahlerBundle(_Fibered):
    """(P(A), p_A, Â) for an algebra A."""

    source: FdCStarAlgebra

    @property
    def algebra(self) -> FdCStarAlgebra:
        return self.source

    @property
    def base(self) -> intspan:
        return self.source.spectrum

    def __repr__(self):
        return f"UniformKahlerBundle(base='{self.base}', fibers={self.fiber_dims})"


@dataclass(frozen=True, eq=False)
class RestrictedBundle(_Fibered):
    """p_A⁻¹(S) over a subset S of the base."""

    parent: UniformKahlerBundle
    base_subset: intspan
    kind: RestrictionKind = RestrictionKind.OPEN

    @property
    def algebra(self) -> FdCStarAlgebra:
        return self.parent.algebra

    @property
    def base(self) -> intspan:
        return self.base_subset

    def __repr__(self):
        return f"RestrictedBundle(base='{self.base}', kind={self.kind.value})"


@dataclass(frozen=True, eq=False)
class KahlerSubbundle(_Fibered):
    """Fiberwise projective subspaces P_{M_i} of a bundle."""

    parent: UniformKahlerBundle
    frames: dict[int, Subspace]

    @property
    def algebra(self) -> FdCStarAlgebra:
        return self.parent.algebra

    @property
    def base(self) -> intspan:
        return intspan(self.frames)

    def fiber_frame(self, label: int) -> Subspace:
        self._require(label)
        return self.frames[label]

    def __repr__(self):
        return f"KahlerSubbundle(base='{self.base}', fibers={self.fiber_dims})"


Bundle = UniformKahlerBundle | RestrictedBundle | KahlerSubbundle


def restrict(
    bundle: UniformKahlerBundle | RestrictedBundle,
    subset,
    kind: RestrictionKind = RestrictionKind.OPEN,
) -> RestrictedBundle:
    """Restriction of ``bundle`` to ``subset`` of its base.

    :raises: UnknownBaseIndex
    """
    subset = intspan(subset)
    outside = subset - bundle.base
    if outside:
        raise UnknownBaseIndex(f"Labels '{outside}' are not in the base '{bundle.base}'")
    parent = bundle.parent if isinstance(bundle, RestrictedBundle) else bundle
    return RestrictedBundle(parent, subset, kind)


def open_restriction(bundle: UniformKahlerBundle, ideal: Ideal) -> RestrictedBundle:
    """The restriction to Â^I."""
    return restrict(bundle, ideal.block_set, RestrictionKind.OPEN)


def closed_restriction(bundle: UniformKahlerBundle, ideal: Ideal) -> RestrictedBundle:
    """The restriction to Â∖Â^I, the base of the bundle of A/I."""
    return restrict(bundle, ideal.complement, RestrictionKind.CLOSED)


def _overlap_residual(expected: np.ndarray, actual: np.ndarray) -> float:
    norm = np.linalg.norm(expected)
    if norm == 0:
        return 1.0
    return 1.0 - float(abs(np.vdot(expected / norm, actual)))


def reconstruct_fiber_unitary(
    ray_map: Callable[[ProjectivePoint], ProjectivePoint],
    source: Bundle,
    label: int,
) -> ComplexMatrix:
    """Candidate linear map U with [U·x] = ray_map([x]) from the images of
    the frame's basis rays e_r and of the superpositions (e_1 + e_r)/√2,
    which fix the relative phases. U acts on frame coordinates."""
    frame = source.fiber_frame(label)
    tol = source.algebra.tol
    images = [
        ray_map(ProjectivePoint.from_vector(label, frame.basis[:, r], tol)).ray
        for r in range(frame.dim)
    ]
    columns = [images[0]]
    for r in range(1, frame.dim):
        mixed = (frame.basis[:, 0] + frame.basis[:, r]) / math.sqrt(2)
        image = ray_map(ProjectivePoint.from_vector(label, mixed, tol)).ray
        lead = np.vdot(images[0], image)
        if abs(lead) <= tol.tol_eq:
            columns.append(images[r])
            continue
        phase = np.vdot(images[r], image) / lead
        if abs(phase) > tol.tol_eq:
            phase = phase / abs(phase)
        else:
            phase = 1.0
        columns.append(phase * images[r])
    return np.column_stack(columns)


def check_uniform_kahler_iso(
    first: Bundle,
    second: Bundle,
    base_map: Mapping[int, int],
    fiber_maps: Mapping[int, FiberMap],
    state_map: Callable[[State], State] | None = None,
    samples: int = 20,
    rng: np.random.Generator | None = None,
) -> CheckSuite:
    """Check that (base_map, fiber_maps) is a uniform Kähler isomorphism
    from ``first`` onto ``second``.

    Each fiber map is either a matrix U_i acting on the frame coordinates
    of the source fiber, or a callable on rays, in which case a candidate
    unitary is reconstructed first (see :func:`reconstruct_fiber_unitary`)
    and the holomorphy clause compares it with the callable on random
    rays. When ``state_map`` is given, commutation and distances are
    checked on the states it produces and it must agree with the fiber
    maps.

    Clauses: base_bijection, fiber_dims, isometry, holomorphy,
    commutation, distance.
    """
    tol = first.algebra.tol
    rng = rng or tol.rng(STREAM_ISO)
    suite = CheckSuite("uniform_kahler_iso")

    problems = []
    if intspan(base_map) != first.base:
        problems.append({"domain": str(intspan(base_map)), "base": str(first.base)})
    images = list(base_map.values())
    if len(set(images)) != len(images) or intspan(images) != second.base:
        problems.append({"image": sorted(images), "target_base": str(second.base)})
    suite.add(CheckResult("base_bijection", not problems, float(bool(problems)), problems))

    labels = [label for label in first.base if base_map.get(label) in second.base]
    suite.add(
        CheckResult.from_residuals(
            "fiber_dims",
            (
                (
                    float(first.fiber_dim(label) != second.fiber_dim(base_map[label])),
                    {"fiber": label, "dims": [first.fiber_dim(label), second.fiber_dim(base_map[label])]},
                )
                for label in labels
            ),
            0.0,
        )
    )
    labels = [
        label for label in labels if first.fiber_dim(label) == second.fiber_dim(base_map[label])
    ]

    unitaries: dict[int, ComplexMatrix] = {}
    holomorphy = []
    for label in labels:
        fiber_map = fiber_maps[label]
        if callable(fiber_map):
            unitary = reconstruct_fiber_unitary(fiber_map, first, label)
        else:
            unitary = as_matrix(fiber_map)
        unitaries[label] = unitary
        frame = first.fiber_frame(label)
        for _ in range(samples if callable(fiber_map) else 0):
            point = first.sample_point(label, rng)
            image = fiber_map(point)
            predicted = unitary @ (frame.basis.conj().T @ point.ray)
            holomorphy.append(
                (_overlap_residual(predicted, image.ray), {"fiber": label, "ray": point.ray})
            )
    suite.add(CheckResult.from_residuals("holomorphy", holomorphy, tol.tol_eq))

    def isometry_residual(label):
        unitary = unitaries[label]
        target = second.fiber_frame(base_map[label])
        if unitary.shape != (target.ambient_dim, first.fiber_dim(label)):
            return float("inf")
        local = target.basis.conj().T @ unitary
        return max(
            operator_norm(local.conj().T @ local - np.eye(local.shape[1])),
            operator_norm(local @ local.conj().T - np.eye(local.shape[0])),
            operator_norm(unitary - target.basis @ local),
        )

    suite.add(
        CheckResult.from_residuals(
            "isometry",
            ((isometry_residual(label), {"fiber": label}) for label in labels),
            tol.tol_ortho,
        )
    )

    def push(point: ProjectivePoint) -> ProjectivePoint:
        frame = first.fiber_frame(point.fiber)
        vector = unitaries[point.fiber] @ (frame.basis.conj().T @ point.ray)
        return ProjectivePoint.from_vector(base_map[point.fiber], vector, tol)

    sampled = [
        first.sample_point(label, rng)
        for label in labels
        if unitaries[label].shape[0] == second.algebra.block(base_map[label]).n
        for _ in range(samples)
    ]
    pushed = [push(point) for point in sampled]
    if state_map is not None:
        mapped = [canonical_ray(state_map(first.state_at(point))) for point in sampled]
    else:
        mapped = pushed

    commutation = []
    for point, image, expected in zip(sampled, mapped, pushed):
        witness = {"fiber": point.fiber, "image_fiber": image.fiber}
        if image.fiber != base_map[point.fiber] or not second.contains_point(image):
            commutation.append((1.0, witness))
        else:
            commutation.append((1.0 - image.overlap(expected), witness))
    suite.add(CheckResult.from_residuals("commutation", commutation, tol.tol_eq))

    distances = []
    for k in range(len(sampled) - 1):
        p, q = sampled[k], sampled[k + 1]
        if mapped[k].fiber != base_map[p.fiber] or mapped[k + 1].fiber != base_map[q.fiber]:
            continue
        before = point_distance(p, q)
        after = point_distance(mapped[k], mapped[k + 1])
        if before == CROSS_FIBER_DISTANCE or after == CROSS_FIBER_DISTANCE:
            residual = float(before != after)
        else:
            residual = abs(before - after)
        distances.append((residual, {"fibers": [p.fiber, q.fiber], "d": before, "d_image": after}))
    suite.add(CheckResult.from_residuals("distance", distances, tol.tol_eq))
    return suite


def block_intertwiner(
    left: list[ComplexMatrix], right: list[ComplexMatrix], tol
) -> ComplexMatrix:
    """The isometry T with left[k]·T = T·right[k], when ``right`` is
    irreducible and occurs once in ``left``; unique up to phase."""
    solutions = intertwiner_space(left, right, tol)
    if len(solutions) != 1:
        raise DimensionMismatch(f"Expected a one-dimensional intertwiner space, got {len(solutions)}")
    solution = solutions[0]
    return solution * math.sqrt(solution.shape[1]) / np.linalg.norm(solution)


def restriction_iso_ideal(
    a: FdCStarAlgebra, ideal: Ideal, samples: int = 20, rng: np.random.Generator | None = None
) -> CheckSuite:
    """P(I) is isomorphic to the restriction of P(A) to Â^I through
    ρ ↦ ρ|_I on states and π ↦ π|_I on the base."""
    tol = a.tol
    source = open_restriction(UniformKahlerBundle(a), ideal)
    target = UniformKahlerBundle(ideal.as_algebra)
    sub = ideal.as_algebra
    fiber_maps = {}
    for label in ideal.block_set:
        own = ideal.block_map[label]
        fiber_maps[label] = block_intertwiner(
            list(sub.block_images[own]),
            [a.block(label).represent(y) for y in sub.basis],
            tol,
        )

    def restrict_state(state: State) -> State:
        return make_state(sub, restrict_values(state, sub))

    suite = check_uniform_kahler_iso(
        source, target, ideal.block_map, fiber_maps, restrict_state, samples, rng
    )
    suite.name = "restriction_iso_ideal"
    return suite


def quotient_iso(
    a: FdCStarAlgebra, ideal: Ideal, samples: int = 20, rng: np.random.Generator | None = None
) -> CheckSuite:
    """P(A/I) is isomorphic to the restriction of P(A) to Â∖Â^I through
    ρ ↦ ρ∘h on states and π ↦ π∘h on the base."""
    tol = a.tol
    q, h = quotient(a, ideal)
    source = UniformKahlerBundle(q)
    target = closed_restriction(UniformKahlerBundle(a), ideal)
    base_map = {own: label for label, own in h.block_map.items()}
    fiber_maps = {}
    for label, own in h.block_map.items():
        fiber_maps[own] = block_intertwiner(
            [a.block(label).represent(b) for b in a.basis],
            [q.block(own).represent(h(b)) for b in a.basis],
            tol,
        )

    def pull(state: State) -> State:
        return pullback(state, a, h)

    suite = check_uniform_kahler_iso(source, target, base_map, fiber_maps, pull, samples, rng)
    suite.name = "quotient_iso"
    return suite


def ideal_bundle_correspondence(a: FdCStarAlgebra) -> CheckResult:
    """I ↦ open restriction to Â^I and A/I ↦ closed restriction to Â∖Â^I
    are bijections onto the 2^k restrictions of P(A)."""
    bundle = UniformKahlerBundle(a)
    ideals = enumerate_ideals(a)
    open_bases = {str(open_restriction(bundle, ideal).base) for ideal in ideals}
    closed_bases = {str(closed_restriction(bundle, ideal).base) for ideal in ideals}
    expected = 2 ** len(a.spectrum)
    witnesses = []
    if len(open_bases) != expected:
        witnesses.append({"open_restrictions": len(open_bases), "expected": expected})
    if len(closed_bases) != expected:
        witnesses.append({"closed_restrictions": len(closed_bases), "expected": expected})
    for ideal in ideals:
        q, _ = quotient(a, ideal)
        if len(q.spectrum) != len(ideal.complement):
            witnesses.append({"ideal": str(ideal.block_set), "quotient_blocks": len(q.spectrum)})
    return CheckResult("ideal_bundle_correspondence", not witnesses, float(len(witnesses)), witnesses)


def find_bundle_isomorphism(
    first: Bundle, second: Bundle
) -> tuple[dict[int, int], dict[int, ComplexMatrix]] | None:
    """Pair base points with equal fiber dimensions, in base order, and use
    the frame inclusions as fiber maps. Returns None when the multisets of
    fiber dimensions differ."""
    by_dim_first = sorted(first.base, key=lambda label: (first.fiber_dim(label), label))
    by_dim_second = sorted(second.base, key=lambda label: (second.fiber_dim(label), label))
    if [first.fiber_dim(label) for label in by_dim_first] != [
        second.fiber_dim(label) for label in by_dim_second
    ]:
        return None
    base_map = dict(zip(by_dim_first, by_dim_second))
    fiber_maps = {
        label: second.fiber_frame(target).basis.copy() for label, target in base_map.items()
    }
    return base_map, fiber_maps
