"""
Pure-state geometry of a hereditary subalgebra B = p·A·p.

Every pure state τ of B has a unique pure extension Ξ(τ) to A, given by
ρ(a) = τ(p·a·p). Conversely a pure state ρ of A that does not vanish on B
restricts to t·ρ′ with t = ρ(p) ∈ (0, 1] and ρ′ pure on B; this is
Θ(ρ) = (t, ρ′). Inside the fiber over a block i with p_i ≠ 0, ρ lies at
distance √2·arccos√t from Ξ(ρ′), so the fiber splits into the image of Ξ
(t = 1), an open disk of radius κ = √2π/2 around it (0 < t < 1) and the
boundary sphere of states vanishing on B (t = 0).

The extension is realized on rays through the isometries J_i from the
fibers of B onto the corner subspaces H_{B,i} = range π_i(p).

Example usage:
```
import numpy as np
from ukblab.algebra.core import full_matrix_algebra
from ukblab.geometry.hereditary import Region, classify_state, hereditary_context
from ukblab.states.state import vector_state

m2 = full_matrix_algebra(2)
ctx = hereditary_context(m2, np.diag([1, 0]))
rho = vector_state(m2, 1, [0.5, np.sqrt(0.75)])
ctx.weight(rho)                       # 0.25
classify_state(ctx, rho)              # Region.INSIDE_DISK
```
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np
from intspan import intspan
from numpy.typing import ArrayLike

from ukblab.algebra.core import FdCStarAlgebra, generate_algebra
from ukblab.algebra.hereditary import (
    HereditarySubalgebra,
    hereditary_from_projection,
    is_ideal,
)
from ukblab.errors import (
    BadDirection,
    FullCorner,
    InconsistentAlgebra,
    NotOnSphere,
    NotProjection,
    VanishesOnB,
)
from ukblab.geometry.bundle import (
    CROSS_FIBER_DISTANCE,
    KAPPA,
    KahlerSubbundle,
    UniformKahlerBundle,
    block_intertwiner,
    check_uniform_kahler_iso,
    kahler_distance,
    ray_distance,
)
from ukblab.geometry.submanifold import ProjectiveSubmanifold, submanifold_closedness_check
from ukblab.linalg.kernel import (
    ComplexMatrix,
    Subspace,
    as_vector,
    canonical_basis,
    gauge_fix,
    intersect,
    orthonormalize,
    random_unit_vector,
)
from ukblab.states.gns import gns
from ukblab.states.state import (
    ProjectivePoint,
    State,
    canonical_ray,
    fiber_of,
    make_state,
    random_pure_state,
    restrict_values,
    vector_state,
)
from ukblab.utils.report import CheckResult, CheckSuite

#: random stream for the sampled distance search
STREAM_DISTANCE = 601
#: random stream for subbundle and ball-cover checks
STREAM_SUBBUNDLE = 602
#: ascent steps applied to each sampled ray in the distance search
DISTANCE_REFINE_STEPS = 40


class Region(Enum):
    #: fiber outside Â^B; distance 3
    OUTSIDE_SPECTRUM = "outside_spectrum"
    #: t = 1; distance 0
    ON_IMAGE = "on_image"
    #: 0 < t < 1; 0 < distance < κ
    INSIDE_DISK = "inside_disk"
    #: t = 0; distance κ
    BOUNDARY_SPHERE = "boundary_sphere"


@dataclass(frozen=True, eq=False)
class HereditaryContext:
    parent: FdCStarAlgebra
    b: HereditarySubalgebra
    #: H_{B,i} = range π_i(p) for i ∈ Â^B
    corner_subspaces: dict[int, Subspace]
    #: J_i: C^{n′} → C^{n_i}, isometries onto H_{B,i} with π_i(y)·J_i = J_i·π′(y) for y ∈ B
    corner_isometries: dict[int, ComplexMatrix]
    kappa: float = KAPPA

    @property
    def sub(self) -> FdCStarAlgebra:
        return self.b.as_algebra

    @property
    def spectrum_b(self) -> intspan:
        return self.b.spectrum

    def is_full_corner(self, label: int) -> bool:
        return self.corner_subspaces[label].dim == self.parent.block(label).n

    def weight(self, state: State) -> float:
        """t_B(ρ) = ρ(p)"""
        return float(np.real(state(self.b.unit_p)))

    def embed_ray(self, tau: State) -> ProjectivePoint:
        """The ray of τ carried into C^{n_i} by J_i."""
        point = canonical_ray(tau)
        label = self.b.parent_label(point.fiber)
        return ProjectivePoint.from_vector(
            label, self.corner_isometries[label] @ point.ray, self.parent.tol
        )

    def __repr__(self):
        return f"HereditaryContext(spectrum_B='{self.spectrum_b}', b={self.b})"


def context_from_subalgebra(b: HereditarySubalgebra) -> HereditaryContext:
    a = b.parent
    tol = a.tol
    subspaces = {}
    isometries = {}
    for label, own in b.block_map.items():
        proj = b.corner_projections[label]
        rank = int(round(np.real(np.trace(proj))))
        subspaces[label] = Subspace(proj.shape[0], canonical_basis(proj, rank, tol))
        isometries[label] = block_intertwiner(
            [a.block(label).represent(y) for y in b.as_algebra.basis],
            list(b.as_algebra.block_images[own]),
            tol,
        )
    return HereditaryContext(a, b, subspaces, isometries)


def hereditary_context(a: FdCStarAlgebra, p: ArrayLike) -> HereditaryContext:
    """Context for B = p·A·p.

    :raises: NotProjection, ElementNotInAlgebra, InconsistentAlgebra
    """
    return context_from_subalgebra(hereditary_from_projection(a, p))


@dataclass(frozen=True, eq=False)
class ThetaResult:
    #: t_B(ρ) = ρ(p) in (0, 1]
    t: float
    #: pure state of B with ρ|_B = t·ρ′
    rho_prime: State


def xi_extend(ctx: HereditaryContext, tau: State) -> State:
    """Ξ(τ): the pure extension ρ(a) = τ(p·a·p).

    :raises: NotPure
    """
    expected = ctx.embed_ray(tau)
    p = ctx.b.unit_p
    values = np.array([tau(p @ b @ p) for b in ctx.parent.basis])
    rho = make_state(ctx.parent, values)
    if not rho.is_pure or not canonical_ray(rho).same_as(expected, ctx.parent.tol):
        raise InconsistentAlgebra("Corner extension is not the vector state at the embedded ray")
    return rho


def theta(ctx: HereditaryContext, rho: State) -> ThetaResult:
    """Θ(ρ) = (ρ(p), ρ|_B / ρ(p)).

    :raises: NotPure, VanishesOnB
    """
    tol = ctx.parent.tol
    fiber_of(rho)
    t = ctx.weight(rho)
    if t <= tol.tol_eq:
        raise VanishesOnB(f"State vanishes on B: ρ(p) = {t:.3e}")
    if t > 1 + tol.tol_eq:
        raise InconsistentAlgebra(f"ρ(p) = {t!r} exceeds 1")
    t = min(t, 1.0)
    rho_prime = make_state(ctx.sub, restrict_values(rho, ctx.sub) / t)
    if not rho_prime.is_pure:
        raise InconsistentAlgebra("Normalized restriction of a pure state is not pure")
    return ThetaResult(t, rho_prime)


def _require_direction(ctx: HereditaryContext, label: int, w: ArrayLike) -> np.ndarray:
    tol = ctx.parent.tol
    w = as_vector(w)
    corner = ctx.corner_subspaces[label]
    if len(w) != corner.ambient_dim:
        raise BadDirection(f"Direction has length {len(w)}, expected {corner.ambient_dim}")
    if abs(np.linalg.norm(w) - 1.0) > tol.tol_eq:
        raise BadDirection(f"Direction has norm {np.linalg.norm(w):.12g}, expected 1")
    if np.linalg.norm(corner.basis.conj().T @ w) > tol.tol_eq:
        raise BadDirection("Direction is not orthogonal to the corner subspace")
    return w


def theta_preimage(
    ctx: HereditaryContext, t: float, rho_prime: State, w: ArrayLike | None = None
) -> State:
    """The vector state at √t·J·x_{ρ′} + √(1−t)·w, which Θ maps to (t, ρ′).

    ``w`` defaults to the first canonical basis vector of the orthogonal
    complement of H_{B,i}. For t = 1 use :func:`xi_extend`.

    :raises: FullCorner, BadDirection
    """
    if not 0 < t < 1:
        raise ValueError(f"t must lie in (0, 1), got {t!r}")
    embedded = ctx.embed_ray(rho_prime)
    label = embedded.fiber
    if ctx.is_full_corner(label):
        raise FullCorner(f"Corner is the whole fiber over {label}")
    if w is None:
        w = ctx.corner_subspaces[label].complement(ctx.parent.tol).basis[:, 0]
    w = _require_direction(ctx, label, w)
    return vector_state(
        ctx.parent, label, math.sqrt(t) * embedded.ray + math.sqrt(1 - t) * w
    )


def distance_to_xi_image(ctx: HereditaryContext, rho: State) -> float:
    """d(ρ, Ξ(P(B))): 3 off Â^B, otherwise √2·arccos√t_B(ρ).

    Since t_B(ρ) = ‖P·x‖² for the canonical ray x and P the projection onto
    H_{B,i}, the angle is taken as atan2(‖(1 − P)·x‖, ‖P·x‖).

    :raises: NotPure
    """
    point = canonical_ray(rho)
    if point.fiber not in ctx.spectrum_b:
        return CROSS_FIBER_DISTANCE
    corner = ctx.corner_subspaces[point.fiber]
    inside = float(np.linalg.norm(corner.basis.conj().T @ point.ray))
    return math.sqrt(2) * math.atan2(corner.residual(point.ray), inside)


def distance_to_xi_image_sampled(
    ctx: HereditaryContext,
    rho: State,
    samples: int = 100,
    rng: np.random.Generator | None = None,
    refine_steps: int = DISTANCE_REFINE_STEPS,
) -> float:
    """Direct minimization of d(ρ, Ξ(τ)) over sampled pure τ of B.

    Each sampled ray y of the B-fiber is improved by ascent steps on
    |⟨x_ρ|J·y⟩|; the best candidate is then evaluated as a distance
    between states.
    """
    label = fiber_of(rho)
    if label not in ctx.spectrum_b:
        return CROSS_FIBER_DISTANCE
    rng = rng or ctx.parent.tol.rng(STREAM_DISTANCE)
    isometry = ctx.corner_isometries[label]
    target = isometry.conj().T @ canonical_ray(rho).ray
    scale = float(np.vdot(target, target).real)
    best, best_overlap = None, -1.0
    for _ in range(samples):
        y = random_unit_vector(isometry.shape[1], rng)
        if scale > 0:
            for _ in range(refine_steps):
                y = y + target * np.vdot(target, y) / scale
                y = y / np.linalg.norm(y)
        overlap = abs(np.vdot(target, y))
        if overlap > best_overlap:
            best, best_overlap = y, overlap
    tau = vector_state(ctx.sub, ctx.b.block_map[label], best)
    return kahler_distance(rho, xi_extend(ctx, tau))


def _band(t: float, tol_eq: float) -> Region:
    if t <= tol_eq:
        return Region.BOUNDARY_SPHERE
    if t >= 1 - tol_eq:
        return Region.ON_IMAGE
    return Region.INSIDE_DISK


def classify_state(ctx: HereditaryContext, rho: State) -> Region:
    """Region of ρ relative to Ξ(P(B)).

    The tag is computed twice, from t_B = ρ(p) and from the distance of
    the canonical ray to the corner subspace, with bands that correspond
    under d = √2·arccos√t.

    :raises: NotPure, InconsistentAlgebra when the two tags differ
    """
    tol = ctx.parent.tol
    point = canonical_ray(rho)
    if point.fiber not in ctx.spectrum_b:
        return Region.OUTSIDE_SPECTRUM
    by_weight = _band(ctx.weight(rho), tol.tol_eq)

    corner = ctx.corner_subspaces[point.fiber]
    overlap = min(float(np.linalg.norm(corner.basis.conj().T @ point.ray)), 1.0)
    distance = math.sqrt(2) * math.acos(overlap)
    near = math.sqrt(2) * math.acos(math.sqrt(1 - tol.tol_eq))
    far = math.sqrt(2) * math.acos(math.sqrt(tol.tol_eq))
    if distance <= near:
        by_distance = Region.ON_IMAGE
    elif distance >= far:
        by_distance = Region.BOUNDARY_SPHERE
    else:
        by_distance = Region.INSIDE_DISK
    if by_weight != by_distance:
        raise InconsistentAlgebra(
            f"Weight places the state in {by_weight.value}, distance {distance!r} in {by_distance.value}"
        )
    return by_weight


@dataclass(frozen=True, eq=False)
class SphereParam:
    #: λ ∈ T
    phase: complex
    #: [w] in the projective space of H_π ⊖ H_{B,i}
    orthogonal_point: ProjectivePoint


def _sphere_frame(ctx: HereditaryContext, mu: State) -> ProjectivePoint:
    embedded = ctx.embed_ray(mu)
    if ctx.is_full_corner(embedded.fiber):
        raise FullCorner(f"Corner is the whole fiber over {embedded.fiber}; the sphere is empty")
    return embedded


def upsilon(ctx: HereditaryContext, mu: State, t: float, rho: State) -> SphereParam:
    """Coordinates (λ, [w]) of ρ on the sphere of radius t around Ξ(μ):
    the ray of ρ is cos(t/√2)·x_μ + sin(t/√2)·λ·w up to a global phase,
    with w ⊥ H_{B,i} gauge-fixed.

    :raises: NotOnSphere, FullCorner
    """
    tol = ctx.parent.tol
    if not tol.tol_eq < t < KAPPA:
        raise NotOnSphere(f"Radius {t!r} is outside (0, κ)")
    center = _sphere_frame(ctx, mu)
    point = canonical_ray(rho)
    if point.fiber != center.fiber:
        raise NotOnSphere(f"State lies on fiber {point.fiber}, sphere on fiber {center.fiber}")
    distance = ray_distance(center.ray, point.ray)
    if abs(distance - t) > tol.tol_eq:
        raise NotOnSphere(f"State is at distance {distance!r}, not {t!r}")
    lead = np.vdot(center.ray, point.ray)
    aligned = point.ray * (abs(lead) / lead)
    rest = aligned - abs(lead) * center.ray
    corner = ctx.corner_subspaces[center.fiber]
    if np.linalg.norm(corner.basis.conj().T @ rest) > tol.tol_eq:
        raise NotOnSphere("Component inside the corner is not parallel to the center")
    direction = rest / np.linalg.norm(rest)
    w = gauge_fix(direction, tol)
    phase = complex(np.vdot(w, direction))
    return SphereParam(phase / abs(phase), ProjectivePoint(center.fiber, w))


def upsilon_inverse(ctx: HereditaryContext, mu: State, t: float, param: SphereParam) -> State:
    """The state at cos(t/√2)·x_μ + sin(t/√2)·λ·w.

    :raises: BadDirection, FullCorner
    """
    center = _sphere_frame(ctx, mu)
    w = _require_direction(ctx, center.fiber, param.orthogonal_point.ray)
    vector = math.cos(t / math.sqrt(2)) * center.ray + math.sin(t / math.sqrt(2)) * param.phase * w
    return vector_state(ctx.parent, center.fiber, vector)


def sphere_point(
    ctx: HereditaryContext, mu: State, t: float, w: ArrayLike | None = None
) -> State:
    """A point of the sphere of radius t around Ξ(μ), built as
    theta_preimage(cos²(t/√2), μ, w)."""
    return theta_preimage(ctx, math.cos(t / math.sqrt(2)) ** 2, mu, w)


@dataclass(frozen=True, eq=False)
class HilbertFiber:
    #: L(B) = A·p, vectorized
    left_ideal: Subspace
    #: distance between L ∩ L* and B (projector norm)
    intersection_residual: float
    #: largest distance from A·L to L over basis products
    left_ideal_residual: float
    #: Λ_ρ(L*) = Λ_ρ(p·A) inside the GNS space of ρ
    fiber: Subspace

    @property
    def dim(self) -> int:
        return self.fiber.dim


def _vectorized_span(matrices: Sequence[ComplexMatrix], size: int, tol) -> Subspace:
    return orthonormalize([m.reshape(-1) for m in matrices], tol, ambient_dim=size * size)


def left_ideal_and_hilbert_fiber(ctx: HereditaryContext, rho: State) -> HilbertFiber:
    """The closed left ideal L(B) = A·p, with L ∩ L* checked against B, and
    the subspace Λ_ρ(L*) of the GNS space of ρ."""
    a = ctx.parent
    tol = a.tol
    size = a.ambient_dim
    p = ctx.b.unit_p
    left = _vectorized_span([x @ p for x in a.basis], size, tol)
    right = _vectorized_span([p @ x for x in a.basis], size, tol)
    meet = intersect(left, right, tol)
    own = _vectorized_span(list(ctx.sub.basis), size, tol)
    if meet.dim != own.dim:
        intersection_residual = float("inf")
    else:
        intersection_residual = float(np.linalg.norm(meet.projector() - own.projector(), 2))

    elements = left.basis.T.reshape(-1, size, size)
    absorption = max(
        (left.residual((x @ y).reshape(-1)) for x in a.basis for y in elements), default=0.0
    )

    triple = gns(rho)
    images = [triple.quotient_map(p @ x) for x in a.basis]
    fiber = orthonormalize(images, tol, ambient_dim=triple.hilbert_dim, scale=1.0)
    return HilbertFiber(left, intersection_residual, absorption, fiber)


def hereditary_from_left_ideal(a: FdCStarAlgebra, elements: Sequence[ArrayLike]) -> HereditarySubalgebra:
    """B = L ∩ L* for the left ideal L generated by ``elements``.

    :raises: ElementNotInAlgebra, NotProjection when L ∩ L* is zero
    """
    tol = a.tol
    size = a.ambient_dim
    generators = [a.require(x) for x in elements]
    left = _vectorized_span([x @ g for x in a.basis for g in generators] + generators, size, tol)
    right = _vectorized_span(
        [m.reshape(size, size).conj().T for m in left.basis.T], size, tol
    )
    meet = intersect(left, right, tol)
    if meet.dim == 0:
        raise NotProjection("Left ideal meets its adjoint in zero")
    corner = generate_algebra(size, list(meet.basis.T.reshape(-1, size, size)), tol)
    return hereditary_from_projection(a, corner.unit)


def xi_subbundle(ctx: HereditaryContext) -> KahlerSubbundle:
    """Ξ(P(B)) as the subbundle with fibers P_{H_{B,i}} over Â^B."""
    return KahlerSubbundle(UniformKahlerBundle(ctx.parent), dict(ctx.corner_subspaces))


def subbundle_check(
    ctx: HereditaryContext, samples: int = 20, rng: np.random.Generator | None = None
) -> CheckSuite:
    """Check that Ξ(P(B)) is a Kähler subbundle isomorphic to P(B), and
    that it is the whole restriction to Â^B exactly when B is an ideal.

    Clauses: fibers_over_spectrum, fiber_images, kahler_iso, ideal_iff_full.
    """
    a = ctx.parent
    tol = a.tol
    rng = rng or tol.rng(STREAM_SUBBUNDLE)
    suite = CheckSuite("subbundle")
    subbundle = xi_subbundle(ctx)
    sub_bundle = UniformKahlerBundle(ctx.sub)
    base_map = {own: label for label, own in ctx.b.block_map.items()}

    fibers = []
    images = []
    for own, label in base_map.items():
        for _ in range(samples):
            tau = random_pure_state(ctx.sub, rng, own)
            point = canonical_ray(xi_extend(ctx, tau))
            fibers.append((float(point.fiber != label), {"b_fiber": own, "a_fiber": point.fiber}))
            images.append(
                (ctx.corner_subspaces[label].residual(point.ray), {"b_fiber": own})
            )
    fibers.append(
        (float(subbundle.base != ctx.spectrum_b), {"base": str(subbundle.base)})
    )
    suite.add(CheckResult.from_residuals("fibers_over_spectrum", fibers, 0.0))

    for label, corner in ctx.corner_subspaces.items():
        closedness = submanifold_closedness_check(
            ProjectiveSubmanifold(label, corner), samples, tol, rng
        )
        images.append((closedness.max_residual if closedness.passed else 1.0, {"a_fiber": label}))
        # every ray of H_{B,i} is hit: pull it back through J_i and extend again
        point = subbundle.sample_point(label, rng)
        tau = vector_state(ctx.sub, ctx.b.block_map[label], ctx.corner_isometries[label].conj().T @ point.ray)
        images.append((1.0 - point.overlap(canonical_ray(xi_extend(ctx, tau))), {"a_fiber": label}))
    suite.add(CheckResult.from_residuals("fiber_images", images, tol.tol_eq))

    iso = check_uniform_kahler_iso(
        sub_bundle,
        subbundle,
        base_map,
        {own: ctx.corner_isometries[label] for own, label in base_map.items()},
        lambda tau: xi_extend(ctx, tau),
        samples,
        rng,
    )
    suite.add(
        CheckResult(
            "kahler_iso",
            iso.passed,
            iso.max_residual,
            [result.name for result in iso.failures()],
        )
    )

    ideal = is_ideal(a, ctx.sub)
    full = all(ctx.is_full_corner(label) for label in ctx.spectrum_b)
    suite.add(
        CheckResult(
            "ideal_iff_full",
            ideal == full,
            float(ideal != full),
            [] if ideal == full else [{"is_ideal": ideal, "full_fibers": full}],
        )
    )
    return suite


def ball_cover_check(
    ctx: HereditaryContext, samples: int = 20, rng: np.random.Generator | None = None
) -> CheckSuite:
    """Check the closed-ball and open-disk descriptions of the fibers over
    Â^B on sampled states.

    Clauses: fiber_in_ball (d(ρ, Ξ(μ)) ≤ κ for every ρ and μ over one
    fiber), disk_cover (ρ lies in the open disk of radius κ around
    Ξ(Θ̂(ρ)) at distance √2·arccos√t_B(ρ)).
    """
    tol = ctx.parent.tol
    rng = rng or tol.rng(STREAM_SUBBUNDLE, 1)
    suite = CheckSuite("ball_cover")
    in_ball = []
    in_disk = []
    for label in ctx.spectrum_b:
        own = ctx.b.block_map[label]
        for _ in range(samples):
            rho = random_pure_state(ctx.parent, rng, label)
            mu = random_pure_state(ctx.sub, rng, own)
            distance = kahler_distance(rho, xi_extend(ctx, mu))
            in_ball.append((max(distance - KAPPA, 0.0), {"fiber": label, "d": distance}))

            t = ctx.weight(rho)
            if t <= tol.tol_eq:
                continue
            center = xi_extend(ctx, theta(ctx, rho).rho_prime)
            distance = kahler_distance(rho, center)
            expected = distance_to_xi_image(ctx, rho)
            residual = abs(distance - expected)
            if not distance < KAPPA:
                residual = max(residual, 1.0)
            in_disk.append((residual, {"fiber": label, "t": t, "d": distance}))
    suite.add(CheckResult.from_residuals("fiber_in_ball", in_ball, tol.tol_eq))
    suite.add(CheckResult.from_residuals("disk_cover", in_disk, 1e-9))
    return suite
