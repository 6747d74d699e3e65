"""
Hereditary subalgebras. At finite dimension these are exactly the corners
p·A·p for projections p in A; :func:`hereditary_from_projection` builds
one together with its per-block corner projections and the ideal it
generates, and :func:`is_hereditary` decides the property for an
arbitrary subalgebra, producing a witness when it fails.
"""

from dataclasses import dataclass

import numpy as np
from intspan import intspan
from numpy.typing import ArrayLike

from ukblab.algebra.core import FdCStarAlgebra, generate_algebra
from ukblab.algebra.ideals import Ideal, make_ideal, match_blocks
from ukblab.errors import (
    ElementNotInAlgebra,
    InconsistentAlgebra,
    NotProjection,
    NotSubalgebra,
)
from ukblab.linalg.kernel import (
    ComplexMatrix,
    ToleranceConfig,
    as_matrix,
    hermitian_eig,
    null_space,
    operator_norm,
    orthonormalize,
)

#: random stream for the witness search in :func:`is_hereditary`
STREAM_WITNESS = 201
#: random elements tried before falling back to a non-projection witness
WITNESS_ATTEMPTS = 32


@dataclass(frozen=True, eq=False)
class HereditarySubalgebra:
    parent: FdCStarAlgebra
    #: the projection p (the unit of B)
    unit_p: ComplexMatrix
    #: π_i(p) for every parent block, possibly zero
    corner_projections: dict[int, ComplexMatrix]
    #: B = p·A·p as an algebra
    as_algebra: FdCStarAlgebra
    #: parent label → label of the corresponding block of B, for labels in Â^B
    block_map: dict[int, int]
    #: ideal generated by B
    generated_ideal: Ideal
    #: distance between the product-generated ideal and ⋂ ker π_i over hull(B)
    generated_ideal_residual: float

    @property
    def spectrum(self) -> intspan:
        """Â^B: parent blocks on which p is nonzero."""
        return intspan(self.block_map)

    def parent_label(self, label: int) -> int:
        """Parent block carrying block ``label`` of B."""
        for parent_label, own in self.block_map.items():
            if own == label:
                return parent_label
        raise KeyError(label)

    def __repr__(self):
        return f"HereditarySubalgebra(spectrum='{self.spectrum}', dim={self.as_algebra.dim})"


def _span(matrices: list[ComplexMatrix], tol: ToleranceConfig, size: int):
    return orthonormalize([m.reshape(-1) for m in matrices], tol, ambient_dim=size * size)


def _require_projection(a: FdCStarAlgebra, p: ArrayLike) -> ComplexMatrix:
    tol = a.tol
    p = as_matrix(p)
    if p.shape != (a.ambient_dim, a.ambient_dim):
        raise NotProjection(f"Projection has shape {p.shape}, expected N={a.ambient_dim}")
    if not a.contains(p):
        raise ElementNotInAlgebra(f"Projection is at distance {a.residual(p):.3e} from the algebra")
    scale = max(operator_norm(p), 1.0)
    if operator_norm(p - p.conj().T) > tol.tol_eq * scale or operator_norm(p @ p - p) > tol.tol_eq * scale:
        raise NotProjection("Matrix is not a self-adjoint idempotent")
    if operator_norm(p) <= tol.tol_eq:
        raise NotProjection("Projection is zero; hereditary subalgebras here are nonzero")
    return (p + p.conj().T) / 2


def generated_ideal_span(a: FdCStarAlgebra, b: FdCStarAlgebra):
    """span(A·B·A) computed by direct multiplication (as A·B, then ·A)."""
    tol = a.tol
    size = a.ambient_dim
    left = _span([x @ y for x in a.basis for y in b.basis], tol, size)
    left_elements = left.basis.T.reshape(-1, size, size)
    return _span([z @ x for z in left_elements for x in a.basis], tol, size)


def hull_kernel_span(a: FdCStarAlgebra, labels: intspan):
    """⋂_{i ∈ labels} ker π_i as a subspace of the vectorized matrices."""
    tol = a.tol
    if not labels:
        coefficients = np.eye(a.dim, dtype=complex)
    else:
        rows = np.vstack([a.block_images[label].reshape(a.dim, -1).T for label in labels])
        coefficients = null_space(rows, tol).basis
    elements = [a.element(coefficients[:, k]) for k in range(coefficients.shape[1])]
    return _span(elements, tol, a.ambient_dim)


def hereditary_from_projection(a: FdCStarAlgebra, p: ArrayLike) -> HereditarySubalgebra:
    """The hereditary subalgebra p·A·p.

    Also computes the ideal generated by B twice, as span(A·B·A) and as
    the intersection of the primitive ideals ker π_i over hull(B), and
    requires both to equal the block ideal on Â^B.

    :raises: NotProjection, ElementNotInAlgebra, InconsistentAlgebra
    """
    tol = a.tol
    p = _require_projection(a, p)
    corner = generate_algebra(a.ambient_dim, [p @ b @ p for b in a.basis] + [p], tol)
    corner_projections = {block.index: block.represent(p) for block in a.blocks}
    visible = intspan(
        label for label, proj in corner_projections.items() if operator_norm(proj) > tol.tol_eq
    )
    block_map = match_blocks(corner, a, visible, compress=p)

    ideal = make_ideal(a, visible)
    by_products = generated_ideal_span(a, corner)
    by_hull = hull_kernel_span(a, a.spectrum - visible)
    residual = 0.0
    for candidate in (by_products, by_hull):
        if candidate.dim != ideal.as_algebra.dim:
            raise InconsistentAlgebra(
                f"Generated ideal has dimension {candidate.dim}, expected {ideal.as_algebra.dim}"
            )
        if candidate.dim:
            for y in ideal.as_algebra.basis:
                residual = max(residual, candidate.residual(y.reshape(-1)))
    if residual > tol.tol_eq:
        raise InconsistentAlgebra(f"Generated ideal differs from ⋂ hull(B) by {residual:.3e}")
    return HereditarySubalgebra(a, p, corner_projections, corner, block_map, ideal, residual)


@dataclass(frozen=True, eq=False)
class HereditaryVerdict:
    hereditary: bool
    #: (x, y) with 0 ≤ x ≤ y, y ∈ B and x ∉ B when ``hereditary`` is false
    witness: tuple[ComplexMatrix, ComplexMatrix] | None = None
    #: seed of the generator the witness was drawn from; the draw is
    #: ``ToleranceConfig(rng_seed=seed).rng(STREAM_WITNESS, attempt)``
    seed: int | None = None
    attempt: int | None = None

    def __bool__(self):
        return self.hereditary


def is_subalgebra(a: FdCStarAlgebra, b: FdCStarAlgebra) -> bool:
    return b.ambient_dim == a.ambient_dim and all(a.contains(y) for y in b.basis)


def is_ideal(a: FdCStarAlgebra, b: FdCStarAlgebra) -> bool:
    """Two-sided ideal test by direct multiplication on bases."""
    tol = a.tol
    return all(
        b.residual(x @ y) <= tol.tol_eq and b.residual(y @ x) <= tol.tol_eq
        for x in a.basis
        for y in b.basis
    )


def is_hereditary(a: FdCStarAlgebra, b: FdCStarAlgebra) -> HereditaryVerdict:
    """Decide whether ``b`` is hereditary in ``a``: it is exactly when
    b = p·A·p for p the unit of b.

    On failure the witness is (x, p) with x a projection in p·A·p outside
    ``b``, found as the top spectral projection of a random positive
    element of p·A·p; then 0 ≤ x ≤ p and p ∈ b. Attempt k draws from
    ``tol.rng(STREAM_WITNESS, k)``; the verdict records the seed and the
    attempt, so the same inputs and seed always give the same witness.

    :raises: NotSubalgebra
    """
    tol = a.tol
    if not is_subalgebra(a, b):
        raise NotSubalgebra("Candidate is not contained in the parent algebra")
    if b.dim == 0:
        return HereditaryVerdict(True)
    p = b.unit
    corner = _span([p @ x @ p for x in a.basis], tol, a.ambient_dim)
    if corner.dim == b.dim:
        return HereditaryVerdict(True)

    corner_elements = corner.basis.T.reshape(-1, a.ambient_dim, a.ambient_dim)
    fallback = None
    for attempt in range(WITNESS_ATTEMPTS):
        rng = tol.rng(STREAM_WITNESS, attempt)
        weights = rng.standard_normal(len(corner_elements)) + 1j * rng.standard_normal(
            len(corner_elements)
        )
        z = np.tensordot(weights, corner_elements, axes=1)
        positive = z @ z.conj().T
        values, vectors = hermitian_eig(positive, tol)
        if values[0] - values[1] > tol.tol_eq * values[0]:
            top = vectors[:, :1]
            x = top @ top.conj().T
            if a.contains(x) and not b.contains(x):
                return HereditaryVerdict(False, (x, p), tol.rng_seed, attempt)
        if fallback is None and not b.contains(positive):
            fallback = (positive / operator_norm(positive), attempt)
    if fallback is None:
        raise InconsistentAlgebra("No witness found although p·A·p is larger than the subalgebra")
    x, attempt = fallback
    return HereditaryVerdict(False, (x, p), tol.rng_seed, attempt)
