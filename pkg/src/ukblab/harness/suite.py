"""
The acceptance suite run by ``ukb-lab verify-all``.

Every section checks one family of properties on a list of instances and
returns a :class:`~ukblab.utils.report.CheckSuite`. The instances are the
catalog algebras, the input algebra when one is given, and a few random
algebras; the hereditary sections also use the unit and random corner
projections of each instance. Sample counts follow ``samples``. Most are
capped per section so that a full run stays at desk scale; the distance
and classification sections scale with it instead, drawing 1000 pairs per
fiber and 1000 states per context at the default of 200.

Example usage:
```
from ukblab.harness.suite import verify_all

sections = verify_all(samples=50)
all(section.passed for section in sections)
```
"""

import math
import sys
from dataclasses import dataclass
from typing import Iterable

import numpy as np
from tqdm import tqdm

from ukblab.algebra.core import FdCStarAlgebra, full_matrix_algebra, hull
from ukblab.algebra.hereditary import is_hereditary
from ukblab.algebra.ideals import enumerate_ideals, ideal_join, ideal_meet, quotient
from ukblab.errors import InconsistentAlgebra, NotOnSphere, PurityMismatch
from ukblab.gelfand.calculus import (
    TransformFunction,
    build_frame,
    cstar_norm,
    gelfand,
    invert,
    star,
)
from ukblab.geometry.bundle import (
    CROSS_FIBER_DISTANCE,
    KAPPA,
    UniformKahlerBundle,
    ideal_bundle_correspondence,
    kahler_distance,
    point_distance,
    quotient_iso,
    restriction_iso_ideal,
)
from ukblab.geometry.hereditary import (
    HereditaryContext,
    Region,
    ball_cover_check,
    classify_state,
    distance_to_xi_image,
    hereditary_context,
    hereditary_from_left_ideal,
    left_ideal_and_hilbert_fiber,
    sphere_point,
    subbundle_check,
    theta,
    theta_preimage,
    upsilon,
    upsilon_inverse,
    xi_extend,
)
from ukblab.geometry.submanifold import compact_operators, tangent_span_condition
from ukblab.harness.catalog import (
    CATALOG,
    catalog_algebra,
    random_algebra,
    random_corner_projection,
)
from ukblab.linalg.kernel import (
    DEFAULT_TOLERANCES,
    ComplexMatrix,
    Subspace,
    ToleranceConfig,
    intersect,
    operator_norm,
    orthonormalize,
    random_unit_vector,
)
from ukblab.states.gns import gns, intertwine_with_block, intertwiner_residual, is_pure_via_gns
from ukblab.states.state import (
    ProjectivePoint,
    State,
    fiber_of,
    random_pure_state,
    random_state,
    vector_state,
)
from ukblab.utils.json_specs import dumps
from ukblab.utils.report import MAX_WITNESSES, CheckResult, CheckSuite

#: random stream of the suite; each section draws from (STREAM_SUITE, section)
STREAM_SUITE = 701
#: base sample count of a default run
DEFAULT_SAMPLES = 200
#: point triples per fiber for the metric axioms at the default sample count
DISTANCE_TRIPLES = 1000
#: states per context for region classification at the default sample count
CLASSIFIED_STATES = 1000
#: random algebras added to the instance list
RANDOM_INSTANCES = 2
#: random corner projections per instance
CONTEXTS_PER_INSTANCE = 2
#: cap on inversion and round-trip samples
ROUNDTRIP_SAMPLES = 100
#: cap on star-product and norm samples per algebra
STAR_SAMPLES = 50
#: cap on GNS and Hilbert-fiber samples
STATE_SAMPLES = 10
#: cap on isometry samples per isomorphism check
ISO_SAMPLES = 20
#: starting rays per block for the sampled norm
NORM_STARTS = 10
#: power-iteration steps per starting ray for the sampled norm
NORM_REFINE_STEPS = 200
#: sampled norms must come within this relative gap of the exact norm ...
NORM_GAP = 1e-3
#: ... when every block has at most this size
NORM_GAP_MAX_N = 4
#: radii per fiber at which the sphere description is checked
SPHERE_RADII = 20
#: random hereditary subalgebras in the subbundle section
SUBBUNDLE_CONTEXTS = 20
#: random candidate unions for the tangent-span criterion
TANGENT_CANDIDATES = 50
#: largest fiber dimension of the tangent-span candidates
TANGENT_MAX_N = 8
#: largest n for which a recovered K(M) is also tested with is_hereditary
HEREDITARY_CHECK_MAX_N = 4
#: residual bound for round trips and formula comparisons
ROUNDTRIP_TOL = 1e-9
#: residual bound for exact reconstructions
EXACT_TOL = 1e-10


@dataclass(frozen=True)
class Instance:
    name: str
    algebra: FdCStarAlgebra


@dataclass(frozen=True)
class ContextInstance:
    name: str
    context: HereditaryContext


def build_instances(
    tol: ToleranceConfig = DEFAULT_TOLERANCES,
    algebra: FdCStarAlgebra | None = None,
    random_instances: int = RANDOM_INSTANCES,
) -> list[Instance]:
    """Catalog algebras, then ``algebra`` as ``input``, then random algebras
    ``random-1``, ``random-2``, ..."""
    instances = [Instance(name, catalog_algebra(name, tol)) for name in CATALOG]
    if algebra is not None:
        instances.append(Instance("input", algebra))
    rng = tol.rng(STREAM_SUITE, 0)
    for k in range(random_instances):
        instances.append(Instance(f"random-{k + 1}", random_algebra(rng, max_blocks=2, tol=tol)))
    return instances


def build_contexts(
    instances: Iterable[Instance], tol: ToleranceConfig = DEFAULT_TOLERANCES
) -> list[ContextInstance]:
    """For every nonzero instance: B = A (p the unit) and
    CONTEXTS_PER_INSTANCE random corners."""
    rng = tol.rng(STREAM_SUITE, 100)
    contexts = []
    for instance in instances:
        a = instance.algebra
        if not a.blocks:
            continue
        contexts.append(ContextInstance(f"{instance.name}:unit", hereditary_context(a, a.unit)))
        for k in range(CONTEXTS_PER_INSTANCE):
            p = random_corner_projection(a, rng)
            contexts.append(
                ContextInstance(f"{instance.name}:corner-{k + 1}", hereditary_context(a, p))
            )
    return contexts


def _collapse(name: str, suites: Iterable[tuple[CheckSuite, dict]]) -> CheckResult:
    """One result for many compound checks; witnesses name the failing
    clauses."""
    passed = True
    worst = 0.0
    witnesses = []
    for suite, witness in suites:
        worst = max(worst, suite.max_residual)
        if not suite.passed:
            passed = False
            if len(witnesses) < MAX_WITNESSES:
                witnesses.append({**witness, "failed": [r.name for r in suite.failures()]})
    return CheckResult(name, passed, worst, witnesses)


def _scaled(samples: int, at_default: int) -> int:
    """Sample count proportional to ``samples``, equal to ``at_default`` for
    a default run."""
    return max(1, math.ceil(at_default * samples / DEFAULT_SAMPLES))


def _random_element(a: FdCStarAlgebra, rng: np.random.Generator) -> ComplexMatrix:
    return a.element(rng.standard_normal(a.dim) + 1j * rng.standard_normal(a.dim))


def _opaque(f: TransformFunction) -> TransformFunction:
    """``f`` without its element, so that consumers must invert it."""
    return TransformFunction(f.algebra, f.evaluator)


def _value_gap(first: State, second: State) -> float:
    return float(np.max(np.abs(first.values - second.values), initial=0.0))


def _complements(ctx: HereditaryContext) -> dict[int, Subspace]:
    tol = ctx.parent.tol
    return {
        label: ctx.corner_subspaces[label].complement(tol)
        for label in ctx.spectrum_b
        if not ctx.is_full_corner(label)
    }


def _direction(complement: Subspace, rng: np.random.Generator) -> np.ndarray:
    return complement.basis @ random_unit_vector(complement.dim, rng)


def structure_section(
    instances: list[Instance], samples: int, tol: ToleranceConfig = DEFAULT_TOLERANCES
) -> CheckSuite:
    """Block decompositions reconstruct the algebra; GNS triples reproduce
    their states and agree with the density purity test."""
    rng = tol.rng(STREAM_SUITE, 1)
    suite = CheckSuite("structure")
    suite.add(
        CheckResult.from_residuals(
            "block_reconstruction",
            ((inst.algebra.reconstruction_residual(), {"algebra": inst.name}) for inst in instances),
            tol.tol_eq,
        )
    )
    triples = []
    purity = []
    intertwiners = []
    for inst in instances:
        a = inst.algebra
        if not a.blocks:
            continue
        for _ in range(min(samples, STATE_SAMPLES)):
            for state in (random_pure_state(a, rng), random_state(a, rng)):
                triple = gns(state)
                witness = {"algebra": inst.name, "pure": state.is_pure}
                triples.append(
                    (max(triple.reconstruction_residual(), triple.homomorphism_residual()), witness)
                )
                try:
                    is_pure_via_gns(state, triple)
                    purity.append((float(triple.cyclic_rank() != triple.hilbert_dim), witness))
                except PurityMismatch:
                    purity.append((1.0, witness))
                if state.is_pure:
                    unitary = intertwine_with_block(state, triple)
                    intertwiners.append((intertwiner_residual(state, triple, unitary), witness))
    suite.add(CheckResult.from_residuals("gns_reconstruction", triples, tol.tol_eq))
    suite.add(CheckResult.from_residuals("gns_purity", purity, 0.0))
    suite.add(CheckResult.from_residuals("gns_intertwiner", intertwiners, tol.tol_eq))
    return suite


def distance_section(
    instances: list[Instance], samples: int, tol: ToleranceConfig = DEFAULT_TOLERANCES
) -> CheckSuite:
    """Metric axioms inside fibers, the constant 3 across fibers and the
    fiber diameter κ."""
    rng = tol.rng(STREAM_SUITE, 2)
    suite = CheckSuite("distance")
    axioms = []
    cross = []
    diameter = []
    for inst in instances:
        bundle = UniformKahlerBundle(inst.algebra)
        labels = list(bundle.base)
        for label in labels:
            witness = {"algebra": inst.name, "fiber": label}
            for _ in range(_scaled(samples, DISTANCE_TRIPLES)):
                x, y, z = (bundle.sample_point(label, rng) for _ in range(3))
                dxy = point_distance(x, y)
                residual = max(
                    abs(dxy - point_distance(y, x)),
                    point_distance(x, x),
                    dxy - point_distance(x, z) - point_distance(z, y),
                    -dxy,
                    dxy - KAPPA,
                )
                axioms.append((residual, witness))
            n = bundle.fiber_dim(label)
            if n >= 2:
                e = np.eye(n, dtype=complex)
                d = point_distance(ProjectivePoint(label, e[0]), ProjectivePoint(label, e[1]))
                diameter.append((abs(d - KAPPA), witness))
        for first in labels:
            for second in labels:
                if first == second:
                    continue
                p = bundle.state_at(bundle.sample_point(first, rng))
                q = bundle.state_at(bundle.sample_point(second, rng))
                cross.append(
                    (
                        abs(kahler_distance(p, q) - CROSS_FIBER_DISTANCE),
                        {"algebra": inst.name, "fibers": [first, second]},
                    )
                )
    suite.add(CheckResult.from_residuals("metric_axioms", axioms, ROUNDTRIP_TOL))
    suite.add(CheckResult.from_residuals("cross_fiber", cross, 0.0))
    suite.add(CheckResult.from_residuals("fiber_diameter", diameter, 1e-12))
    return suite


def gelfand_section(
    instances: list[Instance], samples: int, tol: ToleranceConfig = DEFAULT_TOLERANCES
) -> CheckSuite:
    """Inversion of transforms, the star product and the recovered C*-norm."""
    rng = tol.rng(STREAM_SUITE, 3)
    suite = CheckSuite("gelfand")
    inversion = []
    products = []
    norms = []
    upper = []
    gaps = []
    for inst in instances:
        a = inst.algebra
        if not a.blocks:
            continue
        frame = build_frame(a)
        for _ in range(min(samples, ROUNDTRIP_SAMPLES)):
            x = _random_element(a, rng)
            recovered = invert(frame, _opaque(gelfand(a, x)), rng=rng).element
            inversion.append(
                (
                    operator_norm(recovered - x) / max(1.0, operator_norm(x)),
                    {"algebra": inst.name},
                )
            )
        small = all(block.n <= NORM_GAP_MAX_N for block in a.blocks)
        for _ in range(min(samples, STAR_SAMPLES)):
            x, y = _random_element(a, rng), _random_element(a, rng)
            product = star(frame, _opaque(gelfand(a, x)), _opaque(gelfand(a, y)))
            omega = random_pure_state(a, rng)
            expected = omega(x @ y)
            products.append(
                (abs(product(omega) - expected) / max(1.0, abs(expected)), {"algebra": inst.name})
            )

            witness = {"algebra": inst.name}
            exact = operator_norm(x)
            try:
                recovery = cstar_norm(
                    frame,
                    _opaque(gelfand(a, x)),
                    samples=NORM_STARTS,
                    rng=rng,
                    refine_steps=NORM_REFINE_STEPS,
                )
            except InconsistentAlgebra:
                upper.append((math.inf, witness))
                continue
            norms.append((abs(recovery.exact - exact) / max(exact, 1e-300), witness))
            upper.append((max(recovery.sampled - recovery.exact, 0.0) / max(recovery.exact, 1.0), witness))
            if small and recovery.exact > 0:
                gaps.append(((recovery.exact - recovery.sampled) / recovery.exact, witness))
    suite.add(CheckResult.from_residuals("invert_gelfand", inversion, EXACT_TOL))
    suite.add(CheckResult.from_residuals("star_product", products, ROUNDTRIP_TOL))
    suite.add(CheckResult.from_residuals("cstar_norm", norms, ROUNDTRIP_TOL))
    suite.add(CheckResult.from_residuals("sampled_norm_bound", upper, 1e-12))
    suite.add(CheckResult.from_residuals("sampled_norm_gap", gaps, NORM_GAP))
    return suite


def _span(algebra: FdCStarAlgebra) -> Subspace:
    n = algebra.ambient_dim
    return orthonormalize([b.reshape(-1) for b in algebra.basis], algebra.tol, ambient_dim=n * n)


def ideal_section(
    instances: list[Instance], samples: int, tol: ToleranceConfig = DEFAULT_TOLERANCES
) -> CheckSuite:
    """Every ideal and quotient against its restricted bundle, kernels of
    the remaining representations, and the ideal lattice."""
    rng = tol.rng(STREAM_SUITE, 4)
    iso_samples = min(samples, ISO_SAMPLES)
    suite = CheckSuite("ideals")
    restrictions = []
    quotients = []
    kernels = []
    homomorphisms = []
    lattice = []
    correspondence = []
    for inst in instances:
        a = inst.algebra
        ideals = enumerate_ideals(a)
        for ideal in ideals:
            witness = {"algebra": inst.name, "ideal": ideal.block_set}
            restrictions.append((restriction_iso_ideal(a, ideal, iso_samples, rng), witness))
            quotients.append((quotient_iso(a, ideal, iso_samples, rng), witness))
            kernels.append((ideal.kernel_residual(), witness))
            kernels.append((ideal.absorption_residual(), witness))
            _, h = quotient(a, ideal)
            homomorphisms.append((h.homomorphism_residual(), witness))
        spans = {str(ideal.block_set): _span(ideal.as_algebra) for ideal in ideals}
        for first in ideals:
            for second in ideals:
                meet = ideal_meet(first, second)
                join = ideal_join(first, second)
                first_span = spans[str(first.block_set)]
                second_span = spans[str(second.block_set)]
                expected_join = orthonormalize(
                    np.hstack([first_span.basis, second_span.basis]),
                    tol,
                    ambient_dim=first_span.ambient_dim,
                )
                mismatch = (
                    not intersect(first_span, second_span, tol).same_span(_span(meet.as_algebra), tol)
                    or not expected_join.same_span(_span(join.as_algebra), tol)
                )
                lattice.append(
                    (
                        float(mismatch),
                        {"algebra": inst.name, "ideals": [first.block_set, second.block_set]},
                    )
                )
        result = ideal_bundle_correspondence(a)
        correspondence.append((0.0 if result.passed else 1.0, {"algebra": inst.name}))
    suite.add(_collapse("restriction_iso_ideal", restrictions))
    suite.add(_collapse("quotient_iso", quotients))
    suite.add(CheckResult.from_residuals("ideal_is_kernel", kernels, EXACT_TOL))
    suite.add(CheckResult.from_residuals("quotient_homomorphism", homomorphisms, tol.tol_eq))
    suite.add(CheckResult.from_residuals("ideal_lattice", lattice, 0.0))
    suite.add(CheckResult.from_residuals("ideal_bundle_correspondence", correspondence, 0.0))
    return suite


def hereditary_section(
    contexts: list[ContextInstance], samples: int, tol: ToleranceConfig = DEFAULT_TOLERANCES
) -> CheckSuite:
    """θ∘Ξ = (1, id), θ∘theta_preimage = id, and Ξ∘Θ = id on full corners."""
    rng = tol.rng(STREAM_SUITE, 5)
    suite = CheckSuite("hereditary_roundtrips")
    xi_theta = []
    preimages = []
    full = []
    for item in contexts:
        ctx = item.context
        complements = _complements(ctx)
        witness = {"context": item.name}
        for _ in range(min(samples, ROUNDTRIP_SAMPLES)):
            tau = random_pure_state(ctx.sub, rng)
            label = ctx.b.parent_label(fiber_of(tau))
            rho = xi_extend(ctx, tau)
            result = theta(ctx, rho)
            xi_theta.append(
                (
                    max(
                        float(fiber_of(rho) != label),
                        abs(result.t - 1.0),
                        _value_gap(result.rho_prime, tau),
                    ),
                    witness,
                )
            )
            if label in complements:
                t = float(rng.uniform(1e-3, 1 - 1e-3))
                w = _direction(complements[label], rng)
                result = theta(ctx, theta_preimage(ctx, t, tau, w))
                preimages.append(
                    (max(abs(result.t - t), _value_gap(result.rho_prime, tau)), {**witness, "t": t})
                )
            else:
                rho = random_pure_state(ctx.parent, rng, label)
                back = xi_extend(ctx, theta(ctx, rho).rho_prime)
                full.append((_value_gap(back, rho), witness))
    suite.add(CheckResult.from_residuals("theta_after_xi", xi_theta, ROUNDTRIP_TOL))
    suite.add(CheckResult.from_residuals("theta_after_preimage", preimages, ROUNDTRIP_TOL))
    suite.add(CheckResult.from_residuals("xi_after_theta_full_corner", full, ROUNDTRIP_TOL))
    return suite


def _distance_band(distance: float, tol_eq: float) -> Region:
    if distance == CROSS_FIBER_DISTANCE:
        return Region.OUTSIDE_SPECTRUM
    if distance <= math.sqrt(2) * math.acos(math.sqrt(1 - tol_eq)):
        return Region.ON_IMAGE
    if distance >= math.sqrt(2) * math.acos(math.sqrt(tol_eq)):
        return Region.BOUNDARY_SPHERE
    return Region.INSIDE_DISK


def _weight_band(ctx: HereditaryContext, rho: State, tol_eq: float) -> Region:
    if fiber_of(rho) not in ctx.spectrum_b:
        return Region.OUTSIDE_SPECTRUM
    t = ctx.weight(rho)
    if t <= tol_eq:
        return Region.BOUNDARY_SPHERE
    if t >= 1 - tol_eq:
        return Region.ON_IMAGE
    return Region.INSIDE_DISK


def classification_section(
    contexts: list[ContextInstance], samples: int, tol: ToleranceConfig = DEFAULT_TOLERANCES
) -> CheckSuite:
    """Region tags from ρ(p) and from the distance formula agree; the
    formula matches direct distances; sphere points round-trip through Υ
    and lie on the sphere Θ⁻¹(cos²(t/√2), μ) in both directions."""
    rng = tol.rng(STREAM_SUITE, 6)
    suite = CheckSuite("classification")
    regions = []
    formula = []
    sphere = []
    coordinates = []
    balls = []
    for item in contexts:
        ctx = item.context
        witness = {"context": item.name}
        complements = _complements(ctx)
        states = [
            random_pure_state(ctx.parent, rng)
            for _ in range(_scaled(samples, CLASSIFIED_STATES))
        ]
        for label in ctx.spectrum_b:
            states.append(xi_extend(ctx, random_pure_state(ctx.sub, rng, ctx.b.block_map[label])))
            if label in complements:
                states.append(vector_state(ctx.parent, label, _direction(complements[label], rng)))
        for rho in states:
            expected = _weight_band(ctx, rho, tol.tol_eq)
            distance = distance_to_xi_image(ctx, rho)
            try:
                tag = classify_state(ctx, rho)
            except InconsistentAlgebra:
                tag = None
            agree = tag == expected == _distance_band(distance, tol.tol_eq)
            regions.append((0.0 if agree else 1.0, {**witness, "region": expected}))
            if expected in (Region.ON_IMAGE, Region.INSIDE_DISK):
                center = xi_extend(ctx, theta(ctx, rho).rho_prime)
                formula.append((abs(kahler_distance(rho, center) - distance), witness))

        for label in complements:
            own = ctx.b.block_map[label]
            for _ in range(min(samples, SPHERE_RADII)):
                mu = random_pure_state(ctx.sub, rng, own)
                radius = float(rng.uniform(0.05, KAPPA - 0.05))
                rho = sphere_point(ctx, mu, radius, _direction(complements[label], rng))
                result = theta(ctx, rho)
                sphere.append(
                    (
                        max(
                            abs(result.t - math.cos(radius / math.sqrt(2)) ** 2),
                            _value_gap(result.rho_prime, mu),
                            abs(kahler_distance(rho, xi_extend(ctx, mu)) - radius),
                        ),
                        {**witness, "radius": radius},
                    )
                )
                try:
                    param = upsilon(ctx, mu, radius, rho)
                    residual = _value_gap(upsilon_inverse(ctx, mu, radius, param), rho)
                except NotOnSphere:
                    residual = 1.0
                coordinates.append((residual, {**witness, "radius": radius}))
        balls.append(
            (ball_cover_check(ctx, min(samples, ISO_SAMPLES), rng), witness)
        )
    suite.add(CheckResult.from_residuals("region_agreement", regions, 0.0))
    suite.add(CheckResult.from_residuals("distance_formula", formula, ROUNDTRIP_TOL))
    suite.add(CheckResult.from_residuals("sphere_preimage", sphere, ROUNDTRIP_TOL))
    suite.add(CheckResult.from_residuals("sphere_coordinates", coordinates, EXACT_TOL))
    suite.add(_collapse("ball_cover", balls))
    return suite


def _random_subspace(n: int, dim: int, rng: np.random.Generator, tol: ToleranceConfig) -> Subspace:
    return orthonormalize([random_unit_vector(n, rng) for _ in range(dim)], tol, ambient_dim=n)


def _tangent_candidates(
    kind: int, n: int, rng: np.random.Generator, tol: ToleranceConfig
) -> list[Subspace]:
    """kind 0: one subspace; kind 1: a subspace and subspaces of it;
    kind 2: two or three independent random subspaces."""
    if kind == 0:
        return [_random_subspace(n, int(rng.integers(1, n + 1)), rng, tol)]
    if kind == 1:
        big = _random_subspace(n, int(rng.integers(1, n + 1)), rng, tol)
        smaller = []
        for _ in range(int(rng.integers(1, 3))):
            vectors = [big.basis @ random_unit_vector(big.dim, rng) for _ in range(int(rng.integers(1, big.dim + 1)))]
            smaller.append(orthonormalize(vectors, tol, ambient_dim=n))
        return smaller + [big]
    return [
        _random_subspace(n, int(rng.integers(1, n)), rng, tol)
        for _ in range(int(rng.integers(2, 4)))
    ]


def subbundle_section(
    instances: list[Instance], samples: int, tol: ToleranceConfig = DEFAULT_TOLERANCES
) -> CheckSuite:
    """Ξ(P(B)) is a Kähler subbundle for random hereditary B, and the
    tangent-span criterion recognizes single-subspace unions."""
    rng = tol.rng(STREAM_SUITE, 7)
    suite = CheckSuite("subbundles")
    nonzero = [inst for inst in instances if inst.algebra.blocks]
    checks = []
    for k in range(SUBBUNDLE_CONTEXTS if nonzero else 0):
        inst = nonzero[k % len(nonzero)]
        ctx = hereditary_context(inst.algebra, random_corner_projection(inst.algebra, rng))
        checks.append(
            (subbundle_check(ctx, min(samples, ISO_SAMPLES // 2), rng), {"algebra": inst.name, "k": k})
        )
    suite.add(_collapse("subbundle_check", checks))

    criterion = []
    witnesses = []
    hereditary = []
    full_algebras: dict[int, FdCStarAlgebra] = {}
    for k in range(TANGENT_CANDIDATES):
        n = int(rng.integers(2, TANGENT_MAX_N + 1))
        candidates = _tangent_candidates(k % 3, n, rng, tol)
        span_rank = int(np.linalg.matrix_rank(np.hstack([c.basis for c in candidates])))
        expected = any(c.dim == span_rank for c in candidates)
        result = tangent_span_condition(n, candidates, tol)
        witness = {"n": n, "dims": [c.dim for c in candidates]}
        criterion.append((float(result.holds != expected), witness))
        if not result.holds:
            w = result.witness
            bad = (
                w is None
                or abs(np.linalg.norm(w) - 1.0) > tol.tol_eq
                or result.span.residual(w) > tol.tol_eq
                or any(c.residual(w) <= tol.tol_eq for c in candidates)
            )
            witnesses.append((float(bad), witness))
        elif n <= HEREDITARY_CHECK_MAX_N:
            if n not in full_algebras:
                full_algebras[n] = full_matrix_algebra(n, tol)
            corner = compact_operators(result.recovered, tol).as_algebra
            hereditary.append((float(not is_hereditary(full_algebras[n], corner)), witness))
    suite.add(CheckResult.from_residuals("tangent_span", criterion, 0.0))
    suite.add(CheckResult.from_residuals("tangent_span_witness", witnesses, 0.0))
    suite.add(CheckResult.from_residuals("tangent_span_hereditary", hereditary, 0.0))
    return suite


def correspondence_section(
    contexts: list[ContextInstance], samples: int, tol: ToleranceConfig = DEFAULT_TOLERANCES
) -> CheckSuite:
    """The ideal generated by B against its hull, L(B) ∩ L(B)* = B, and
    Hilbert-fiber dimensions against rank π_i(p)."""
    rng = tol.rng(STREAM_SUITE, 8)
    suite = CheckSuite("ideal_correspondence")
    generated = []
    hulls = []
    left = []
    fibers = []
    roundtrip = []
    for item in contexts:
        ctx = item.context
        a = ctx.parent
        witness = {"context": item.name}
        generated.append((ctx.b.generated_ideal_residual, witness))
        expected_hull = a.spectrum - ctx.spectrum_b
        hulls.append((float(hull(a, list(ctx.sub.basis)) != expected_hull), witness))
        for _ in range(min(samples, STATE_SAMPLES)):
            rho = random_pure_state(a, rng)
            label = fiber_of(rho)
            fiber = left_ideal_and_hilbert_fiber(ctx, rho)
            left.append((fiber.intersection_residual, witness))
            left.append((fiber.left_ideal_residual, witness))
            oracle = ctx.corner_subspaces[label].dim if label in ctx.spectrum_b else 0
            fibers.append((float(fiber.dim != oracle), {**witness, "fiber": label}))
        recovered = hereditary_from_left_ideal(a, [ctx.b.unit_p])
        roundtrip.append(
            (
                max(
                    operator_norm(recovered.unit_p - ctx.b.unit_p),
                    float(recovered.as_algebra.dim != ctx.sub.dim),
                ),
                witness,
            )
        )
    suite.add(CheckResult.from_residuals("generated_ideal", generated, EXACT_TOL))
    suite.add(CheckResult.from_residuals("hull", hulls, 0.0))
    suite.add(CheckResult.from_residuals("left_ideal", left, EXACT_TOL))
    suite.add(CheckResult.from_residuals("hilbert_fiber_dim", fibers, 0.0))
    suite.add(CheckResult.from_residuals("left_ideal_roundtrip", roundtrip, tol.tol_eq))
    return suite


def determinism_section(samples: int, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> CheckSuite:
    """Two independent runs of a reduced suite serialize to the same
    bytes."""
    samples = min(samples, STATE_SAMPLES)

    def run_once() -> bytes:
        instances = build_instances(tol, random_instances=1)
        contexts = build_contexts(instances[-1:], tol)
        return dumps(
            [
                distance_section(instances, samples, tol),
                hereditary_section(contexts, samples, tol),
            ]
        )

    first = run_once()
    second = run_once()
    suite = CheckSuite("determinism")
    suite.add(
        CheckResult(
            "identical_reports",
            first == second,
            float(first != second),
            [] if first == second else [{"bytes": [len(first), len(second)]}],
        )
    )
    return suite


def verify_all(
    algebra: FdCStarAlgebra | None = None,
    samples: int = DEFAULT_SAMPLES,
    tol: ToleranceConfig = DEFAULT_TOLERANCES,
    progress: bool = False,
) -> list[CheckSuite]:
    """Run every section and return their suites in order.

    :param algebra: input algebra, checked along with the built-in instances
    :param samples: base sample count
    :param tol: tolerances and seed
    :param progress: show a progress bar on stderr
    """
    instances = build_instances(tol, algebra)
    contexts = build_contexts(instances, tol)
    sections = [
        ("structure", lambda: structure_section(instances, samples, tol)),
        ("distance", lambda: distance_section(instances, samples, tol)),
        ("gelfand", lambda: gelfand_section(instances, samples, tol)),
        ("ideals", lambda: ideal_section(instances, samples, tol)),
        ("hereditary", lambda: hereditary_section(contexts, samples, tol)),
        ("classification", lambda: classification_section(contexts, samples, tol)),
        ("subbundles", lambda: subbundle_section(instances, samples, tol)),
        ("correspondence", lambda: correspondence_section(contexts, samples, tol)),
        ("determinism", lambda: determinism_section(samples, tol)),
    ]
    progress_sections = tqdm(
        sections,
        desc="Verifying",
        bar_format="{desc}: {n}/{total} sections{postfix} | elapsed: {elapsed}",
        disable=not progress,
        file=sys.stderr,
    )
    results = []
    for name, run_section in progress_sections:
        progress_sections.set_postfix_str(name)
        results.append(run_section())
    return results
