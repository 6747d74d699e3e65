"""
Finite-dimensional C*-algebras as *-closed subalgebras of M_N.

An algebra is stored as a Hilbert–Schmidt-orthonormal basis of N×N
matrices together with its unit and its block decomposition
⊕_i M_{n_i} ⊗ I_{m_i}. Blocks are labelled 1..k; the labels form the
spectrum of the algebra, and block i carries the irreducible
representation π_i(x) = V_i*·x·V_i where V_i is the block's
``irrep_isometry``.

Blocks are ordered by the first ambient coordinate their central
projection touches, so an algebra given in block-diagonal form keeps the
order of its diagonal blocks.

The algebra also keeps a small *-closed generating set (a generic pair
and its adjoints); the center, the block commutants and the irreducible
copies are all computed from it rather than from the whole basis.

Example usage:
```
from ukblab.algebra.core import generate_algebra, hull

a = generate_algebra(2, [[[1, 0], [0, 0]], [[0, 0], [0, 1]]])
[(block.n, block.multiplicity) for block in a.blocks]   # [(1, 1), (1, 1)]
hull(a, [[[1, 0], [0, 0]]])                             # intspan('2')
```
"""

import functools
import math
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg
from intspan import intspan
from numpy.typing import ArrayLike

from ukblab.errors import (
    AmbientTooLarge,
    DegenerateSample,
    DimensionMismatch,
    ElementNotInAlgebra,
    InconsistentAlgebra,
    UnknownBlock,
)
from ukblab.linalg.kernel import (
    DEFAULT_TOLERANCES,
    ComplexMatrix,
    ToleranceConfig,
    as_matrix,
    canonical_basis,
    gram_schmidt,
    hermitian_eig,
    intertwiner_space,
    null_space,
    operator_norm,
    orthonormalize,
    projector,
)

#: random stream for generic central elements
STREAM_CENTER = 101
#: random stream for generic commutant elements
STREAM_COMMUTANT = 102
#: random stream for the generic generating pair of a closure
STREAM_CLOSURE = 103
#: number of generic elements drawn before giving up on a decomposition
MAX_ATTEMPTS = 8
#: eigenvalue gap, relative to the spread, that separates two clusters
CLUSTER_GAP = 1e-6
#: matrix entries per batch of candidate products during a closure
PRODUCT_BATCH_ENTRIES = 1 << 22


@dataclass(frozen=True, eq=False)
class BlockDescriptor:
    """One summand M_n ⊗ I_m of the block decomposition."""

    #: spectrum label (1-based)
    index: int
    #: dimension of the irreducible representation
    n: int
    #: number of copies of the irreducible subspace in C^N
    multiplicity: int
    #: minimal central projection q_i
    central_projection: ComplexMatrix
    #: N×n isometry onto one copy of the irreducible subspace
    irrep_isometry: ComplexMatrix
    #: N×n isometries onto every copy, all intertwining π_i;
    #: ``copies[0]`` is ``irrep_isometry``
    copies: tuple[ComplexMatrix, ...]

    def represent(self, x: ComplexMatrix) -> ComplexMatrix:
        """π_i(x)"""
        return self.irrep_isometry.conj().T @ x @ self.irrep_isometry

    def embed(self, m: ComplexMatrix) -> ComplexMatrix:
        """The element x of the algebra with π_i(x) = m and π_j(x) = 0 for
        every other block."""
        return sum(copy @ m @ copy.conj().T for copy in self.copies)


@dataclass(frozen=True, eq=False)
class FdCStarAlgebra:
    """A *-subalgebra of M_N with its block decomposition.

    Use :func:`generate_algebra` to build instances; it computes the unit
    and the blocks and certifies them.
    """

    ambient_dim: int
    #: array of shape (dim, N, N); Hilbert–Schmidt-orthonormal basis
    basis: np.ndarray
    #: identity of the algebra (projection onto its support)
    unit: ComplexMatrix
    blocks: tuple[BlockDescriptor, ...] = ()
    #: N×N unitary taking the algebra to ⊕(M_{n_i} ⊗ I_{m_i}) ⊕ 0
    block_unitary: ComplexMatrix | None = None
    #: small *-closed set of elements generating the algebra
    generators: tuple[ComplexMatrix, ...] = ()
    tol: ToleranceConfig = DEFAULT_TOLERANCES

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def spectrum(self) -> intspan:
        return intspan(block.index for block in self.blocks)

    def block(self, label: int) -> BlockDescriptor:
        for block in self.blocks:
            if block.index == label:
                return block
        raise UnknownBlock(f"Algebra has no block {label} (spectrum: {self.spectrum or 'empty'})")

    def _square(self, x: ArrayLike) -> ComplexMatrix:
        x = as_matrix(x)
        if x.shape != (self.ambient_dim, self.ambient_dim):
            raise DimensionMismatch(
                f"Expected a {self.ambient_dim}×{self.ambient_dim} matrix, got {x.shape}"
            )
        return x

    def coordinates(self, x: ArrayLike) -> np.ndarray:
        """Coefficients ⟨b_k, x⟩ of the orthogonal projection of x onto the
        algebra."""
        x = self._square(x)
        return np.einsum("kab,ab->k", self.basis.conj(), x)

    def element(self, coefficients: ArrayLike) -> ComplexMatrix:
        coefficients = np.asarray(coefficients, dtype=complex)
        if coefficients.shape != (self.dim,):
            raise DimensionMismatch(f"Expected {self.dim} coefficients, got {coefficients.shape}")
        if self.dim == 0:
            return np.zeros((self.ambient_dim, self.ambient_dim), dtype=complex)
        return np.tensordot(coefficients, self.basis, axes=1)

    def project(self, x: ArrayLike) -> ComplexMatrix:
        return self.element(self.coordinates(x))

    def residual(self, x: ArrayLike) -> float:
        """Hilbert–Schmidt distance from x to the algebra."""
        x = self._square(x)
        return float(np.linalg.norm(x - self.project(x)))

    def contains(self, x: ArrayLike) -> bool:
        x = self._square(x)
        return self.residual(x) <= self.tol.tol_eq * float(np.linalg.norm(x))

    def require(self, x: ArrayLike) -> ComplexMatrix:
        """Return x as a matrix, raising ElementNotInAlgebra if it is not in
        the algebra."""
        x = self._square(x)
        if not self.contains(x):
            raise ElementNotInAlgebra(
                f"Element is at distance {self.residual(x):.3e} from the algebra"
            )
        return x

    def represent(self, label: int, x: ArrayLike) -> ComplexMatrix:
        return self.block(label).represent(self._square(x))

    def embed(self, label: int, m: ArrayLike) -> ComplexMatrix:
        block = self.block(label)
        m = as_matrix(m)
        if m.shape != (block.n, block.n):
            raise DimensionMismatch(f"Block {label} has n={block.n}; got a {m.shape} matrix")
        return block.embed(m)

    def block_form(self, x: ArrayLike) -> ComplexMatrix:
        x = self._square(x)
        return self.block_unitary.conj().T @ x @ self.block_unitary

    def reconstruction_residual(self) -> float:
        """Largest deviation of U*·b·U from ⊕(π_i(b) ⊗ I_{m_i}) ⊕ 0 over the
        basis."""
        if self.dim == 0:
            return 0.0
        used = sum(block.n * block.multiplicity for block in self.blocks)
        worst = 0.0
        for b in self.basis:
            expected = scipy.linalg.block_diag(
                *[np.kron(block.represent(b), np.eye(block.multiplicity)) for block in self.blocks],
                np.zeros((self.ambient_dim - used, self.ambient_dim - used)),
            )
            worst = max(worst, float(np.linalg.norm(self.block_form(b) - expected)))
        return worst

    def left_multiplication(self, x: ArrayLike) -> np.ndarray:
        """Matrix of b ↦ x·b in basis coordinates: entry (l, k) is
        ⟨b_l, x·b_k⟩."""
        x = self._square(x)
        flat = self.basis.reshape(self.dim, -1)
        return flat.conj() @ (x @ self.basis).reshape(self.dim, -1).T

    def gram(self, values: ArrayLike) -> np.ndarray:
        """Gram matrix ω(b_j*·b_k) of the functional with ω(b_l) = values[l]."""
        values = np.asarray(values, dtype=complex)
        flat = self.basis.reshape(self.dim, -1)
        # ω(x) = Tr(W·x) with W = Σ_l values[l]·b_l*
        weight = np.tensordot(values, self.basis.conj().transpose(0, 2, 1), axes=1)
        return flat.conj() @ (self.basis @ weight).reshape(self.dim, -1).T

    @functools.cached_property
    def adjoint_coordinates(self) -> np.ndarray:
        """A[j, l] = ⟨b_l, b_j*⟩"""
        adjoints = self.basis.conj().transpose(0, 2, 1).reshape(self.dim, -1)
        return adjoints @ self.basis.reshape(self.dim, -1).conj().T

    @functools.cached_property
    def unit_coordinates(self) -> np.ndarray:
        return self.coordinates(self.unit)

    @functools.cached_property
    def block_images(self) -> dict[int, np.ndarray]:
        """For each label, the array of π_i(b_k) with shape (dim, n, n)."""
        return {
            block.index: block.irrep_isometry.conj().T @ self.basis @ block.irrep_isometry
            for block in self.blocks
        }

    @functools.cached_property
    def matrix_unit_coordinates(self) -> dict[int, np.ndarray]:
        """For each label, coordinates of the embedded matrix units E_rs as
        an array of shape (n, n, dim)."""
        units = {}
        for block in self.blocks:
            coords = np.zeros((block.n, block.n, self.dim), dtype=complex)
            for r in range(block.n):
                for s in range(block.n):
                    coords[r, s] = self.coordinates(block.embed(matrix_unit(block.n, r, s)))
            units[block.index] = coords
        return units

    def __repr__(self):
        blocks = ", ".join(f"M{block.n}x{block.multiplicity}" for block in self.blocks)
        return f"FdCStarAlgebra(N={self.ambient_dim}, dim={self.dim}, blocks=[{blocks}])"


def matrix_unit(n: int, r: int, s: int) -> ComplexMatrix:
    """E_rs in M_n (0-based indices)."""
    unit = np.zeros((n, n), dtype=complex)
    unit[r, s] = 1.0
    return unit


def _vectors(matrices: Iterable[ComplexMatrix]) -> list[np.ndarray]:
    return [m.reshape(-1) for m in matrices]


def _unvec(space, n: int) -> np.ndarray:
    return space.basis.T.reshape(-1, n, n)


def _generic_pair(seed: np.ndarray, tol: ToleranceConfig) -> list[ComplexMatrix]:
    """Two generic elements of the span of ``seed``, normalized in operator
    norm, and their adjoints."""
    rng = tol.rng(STREAM_CLOSURE)
    pair = []
    for _ in range(2):
        weights = rng.standard_normal(len(seed)) + 1j * rng.standard_normal(len(seed))
        x = np.tensordot(weights, seed, axes=1)
        x = x / np.linalg.norm(x, 2)
        pair.extend([x, x.conj().T])
    return pair


def _extend(basis: np.ndarray, candidates: np.ndarray, tol: ToleranceConfig) -> np.ndarray:
    """Orthonormal columns spanning the part of ``candidates`` outside the
    span of the orthonormal columns of ``basis``."""
    residual = candidates - basis @ (basis.conj().T @ candidates)
    residual -= basis @ (basis.conj().T @ residual)
    fresh = orthonormalize(residual, tol, scale=1.0)
    if fresh.dim == 0:
        return np.zeros((basis.shape[0], 0), dtype=complex)
    fresh_basis = fresh.basis - basis @ (basis.conj().T @ fresh.basis)
    q, _ = np.linalg.qr(fresh_basis)
    return q


def _close(n: int, multipliers: Sequence[ComplexMatrix], tol: ToleranceConfig) -> np.ndarray:
    """Orthonormal columns (row-major vec) spanning every nonempty word in
    ``multipliers``; each new direction is multiplied on the left by every
    multiplier once."""
    size = n * n
    basis = _extend(
        np.zeros((size, 0), dtype=complex), np.column_stack(_vectors(multipliers)), tol
    )
    frontier = basis
    batch = max(1, PRODUCT_BATCH_ENTRIES // (size * len(multipliers)))
    while frontier.shape[1]:
        grown = []
        for start in range(0, frontier.shape[1], batch):
            elements = frontier[:, start : start + batch].T.reshape(-1, n, n)
            candidates = np.concatenate(
                [(s @ elements).reshape(-1, size) for s in multipliers]
            ).T
            added = _extend(basis, candidates, tol)
            basis = np.hstack([basis, added])
            grown.append(added)
        frontier = np.hstack(grown)
    return basis


def _span_closure(
    n: int, generators: Sequence[ComplexMatrix], tol: ToleranceConfig
) -> tuple[np.ndarray, tuple[ComplexMatrix, ...]]:
    """Basis of the *-algebra generated by ``generators`` as an array of
    shape (dim, n, n), and a *-closed generating set of at most a few
    elements.

    The algebra is grown from a generic pair of elements of the span of
    the generators and their adjoints. Generators the pair misses are
    added to the generating set and the closure is repeated.
    """
    seed = list(generators) + [g.conj().T for g in generators]
    seed_space = orthonormalize(_vectors(seed), tol, ambient_dim=n * n)
    if seed_space.dim == 0:
        return np.zeros((0, n, n), dtype=complex), ()
    seed_elements = _unvec(seed_space, n)
    multipliers = _generic_pair(seed_elements, tol)
    while True:
        basis = _close(n, multipliers, tol)
        outside = seed_space.basis - basis @ (basis.conj().T @ seed_space.basis)
        missing = np.flatnonzero(np.linalg.norm(outside, axis=0) > tol.tol_eq)
        if missing.size == 0:
            return basis.T.reshape(-1, n, n), tuple(multipliers)
        for k in missing:
            x = seed_elements[k] / np.linalg.norm(seed_elements[k], 2)
            multipliers.extend([x, x.conj().T])


def generate_algebra(
    n: int, generators: Sequence[ArrayLike], tol: ToleranceConfig = DEFAULT_TOLERANCES
) -> FdCStarAlgebra:
    """Smallest *-subalgebra of M_n containing ``generators``, with its unit
    and block decomposition.

    :param n: ambient dimension N
    :param generators: N×N matrices
    :param tol: tolerances and seed for the decomposition
    :returns: certified :class:`FdCStarAlgebra`
    :raises: AmbientTooLarge, DimensionMismatch, DegenerateSample
    """
    if n > tol.max_ambient_dim:
        raise AmbientTooLarge(f"Ambient dimension {n} exceeds the limit of {tol.max_ambient_dim}")
    if n < 0:
        raise DimensionMismatch(f"Ambient dimension must be non-negative (got {n})")
    matrices = []
    for generator in generators:
        generator = as_matrix(generator)
        if generator.shape != (n, n):
            raise DimensionMismatch(f"Generator has shape {generator.shape}, expected ({n}, {n})")
        matrices.append(generator)
    basis, generating_set = _span_closure(n, matrices, tol)
    return assemble_algebra(n, basis, tol, generating_set)


def assemble_algebra(
    n: int,
    basis: np.ndarray,
    tol: ToleranceConfig = DEFAULT_TOLERANCES,
    generators: Sequence[ComplexMatrix] | None = None,
) -> FdCStarAlgebra:
    """Build an algebra from an orthonormal basis of a *-closed span:
    compute the unit, decompose into blocks and certify the result.

    :param generators: *-closed generating set; derived from ``basis``
        when omitted
    """
    if generators is None:
        generators = _span_closure(n, list(basis), tol)[1]
    if basis.shape[0] == 0:
        unit = np.zeros((n, n), dtype=complex)
    else:
        support = orthonormalize(np.hstack(list(basis)), tol)
        unit = projector(support)
    raw = FdCStarAlgebra(
        ambient_dim=n,
        basis=basis,
        unit=unit,
        block_unitary=np.eye(n, dtype=complex),
        generators=tuple(generators),
        tol=tol,
    )
    for b in basis:
        if max(np.linalg.norm(unit @ b - b), np.linalg.norm(b @ unit - b)) > tol.tol_eq:
            raise InconsistentAlgebra("Support projection does not act as the unit")
    if basis.shape[0] and not raw.contains(unit):
        raise InconsistentAlgebra("Unit does not lie in the span; the span is not an algebra")
    blocks, unitary = block_decompose(raw, tol)
    algebra = replace(raw, blocks=blocks, block_unitary=unitary)
    residual = algebra.reconstruction_residual()
    if residual > tol.tol_eq:
        raise InconsistentAlgebra(f"Block form reconstruction residual {residual:.3e}")
    return algebra


def full_matrix_algebra(n: int, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> FdCStarAlgebra:
    """M_n as an algebra of n×n matrices."""
    return generate_algebra(n, [matrix_unit(n, r, s) for r in range(n) for s in range(n)], tol)


def _spectral_clusters(values: np.ndarray, vectors: ComplexMatrix) -> list[ComplexMatrix]:
    spread = values[0] - values[-1] if values.size else 0.0
    clusters = []
    start = 0
    for stop in range(1, values.size + 1):
        if stop < values.size and values[stop - 1] - values[stop] <= CLUSTER_GAP * spread:
            continue
        clusters.append(vectors[:, start:stop])
        start = stop
    return clusters


def _center(a: FdCStarAlgebra, tol: ToleranceConfig) -> tuple[int, list[ComplexMatrix]]:
    """Dimension of Z(A) and a family of self-adjoint elements spanning it."""
    d = a.dim
    size = a.ambient_dim**2
    # z = Σ c_j b_j is central iff it commutes with every generator; the
    # stacked commutator systems are reduced to their R factor as they come
    reduced = np.zeros((0, d), dtype=complex)
    for s in a.generators:
        commutators = (a.basis @ s - s @ a.basis).reshape(d, size).T
        reduced = np.linalg.qr(np.vstack([reduced, commutators]), mode="r")
    scale = 2 * max(operator_norm(s) for s in a.generators)
    solutions = null_space(reduced, tol, scale=scale)
    hermitian = []
    for k in range(solutions.dim):
        z = a.element(solutions.basis[:, k])
        hermitian.append((z + z.conj().T) / 2)
        hermitian.append((z - z.conj().T) / 2j)
    return solutions.dim, hermitian


def _first_support_index(q: ComplexMatrix, tol: ToleranceConfig) -> int:
    diagonal = np.real(np.diagonal(q))
    return int(np.flatnonzero(diagonal > tol.tol_eq)[0])


def _minimal_central_projections(a: FdCStarAlgebra, tol: ToleranceConfig) -> list[ComplexMatrix]:
    center_dim, hermitian = _center(a, tol)
    if center_dim == 1:
        return [a.unit]
    support = canonical_basis(a.unit, int(round(np.real(np.trace(a.unit)))), tol)
    for attempt in range(MAX_ATTEMPTS):
        weights = tol.rng(STREAM_CENTER, attempt).standard_normal(len(hermitian))
        z = np.tensordot(weights, np.array(hermitian), axes=1)
        values, vectors = hermitian_eig(support.conj().T @ z @ support, tol)
        clusters = _spectral_clusters(values, vectors)
        if len(clusters) == center_dim:
            projections = [support @ c @ c.conj().T @ support.conj().T for c in clusters]
            return sorted(projections, key=lambda q: _first_support_index(q, tol))
    raise DegenerateSample(
        f"Generic central element did not separate {center_dim} blocks in {MAX_ATTEMPTS} attempts"
    )


def _minimal_commutant_projection(
    local: list[ComplexMatrix], n: int, m: int, label: int, tol: ToleranceConfig
) -> ComplexMatrix:
    """Rank-n projection in the commutant of the compressed block algebra
    (which is ≅ M_m) via the spectrum of a generic self-adjoint element.
    ``local`` holds the compressed generators."""
    commutant = intertwiner_space(local, local, tol)
    if len(commutant) != m * m:
        raise InconsistentAlgebra(
            f"Block {label}: commutant has dimension {len(commutant)}, expected {m * m}"
        )
    hermitian = [(x + x.conj().T) / 2 for x in commutant] + [
        (x - x.conj().T) / 2j for x in commutant
    ]
    for attempt in range(MAX_ATTEMPTS):
        weights = tol.rng(STREAM_COMMUTANT, label, attempt).standard_normal(len(hermitian))
        z = np.tensordot(weights, np.array(hermitian), axes=1)
        values, vectors = hermitian_eig(z, tol)
        clusters = _spectral_clusters(values, vectors)
        if len(clusters) == m and all(c.shape[1] == n for c in clusters):
            top = clusters[0]
            return top @ top.conj().T
    raise DegenerateSample(
        f"Block {label}: generic commutant element did not split into {m} copies"
    )


def _block_copies(
    a: FdCStarAlgebra, isometry: ComplexMatrix, n: int, m: int, tol: ToleranceConfig
) -> tuple[ComplexMatrix, ...]:
    """Isometries onto all m copies of the irreducible subspace, each
    intertwining the same π_i; the first is ``isometry`` itself."""
    if m == 1:
        return (isometry,)
    images = [isometry.conj().T @ g @ isometry for g in a.generators]
    solutions = intertwiner_space(list(a.generators), images, tol)
    if len(solutions) != m:
        raise InconsistentAlgebra(f"Found {len(solutions)} intertwiners, expected {m}")
    # for intertwiners S, T: S*·T = (⟨S, T⟩_HS / n)·I
    ordered = gram_schmidt([isometry.reshape(-1)] + [s.reshape(-1) for s in solutions], tol)
    if ordered.shape[1] != m:
        raise InconsistentAlgebra("Intertwiners do not span the expected multiplicity space")
    return tuple(
        math.sqrt(n) * ordered[:, k].reshape(a.ambient_dim, n) for k in range(m)
    )


def _describe_block(
    a: FdCStarAlgebra, label: int, q: ComplexMatrix, tol: ToleranceConfig
) -> BlockDescriptor:
    rank = int(round(np.real(np.trace(q))))
    # q is central, so q·A·q = q·A
    block_span = orthonormalize([(q @ b).reshape(-1) for b in a.basis], tol)
    n = math.isqrt(block_span.dim)
    if n * n != block_span.dim or n == 0:
        raise InconsistentAlgebra(f"Block {label} has dimension {block_span.dim}, not a square")
    m, remainder = divmod(rank, n)
    if remainder:
        raise InconsistentAlgebra(f"Block {label}: rank {rank} is not a multiple of n={n}")
    if m == 1:
        minimal = q
    else:
        frame = canonical_basis(q, rank, tol)
        local = [frame.conj().T @ g @ frame for g in a.generators]
        minimal = frame @ _minimal_commutant_projection(local, n, m, label, tol) @ frame.conj().T
    isometry = canonical_basis(minimal, n, tol)
    return BlockDescriptor(label, n, m, q, isometry, _block_copies(a, isometry, n, m, tol))


def block_decompose(
    a: FdCStarAlgebra, tol: ToleranceConfig = DEFAULT_TOLERANCES
) -> tuple[tuple[BlockDescriptor, ...], ComplexMatrix]:
    """Block decomposition of ``a``: minimal central projections from the
    spectrum of a generic central element, block sizes from dim(q_i·A·q_i),
    irreducible copies from a minimal projection of the commutant.

    :returns: blocks and the N×N unitary aligning ``a`` with
        ⊕(M_{n_i} ⊗ I_{m_i}) ⊕ 0
    :raises: DegenerateSample, InconsistentAlgebra
    """
    n = a.ambient_dim
    if a.dim == 0:
        return (), np.eye(n, dtype=complex)
    blocks = tuple(
        _describe_block(a, label, q, tol)
        for label, q in enumerate(_minimal_central_projections(a, tol), start=1)
    )
    columns = [
        copy[:, r] for block in blocks for r in range(block.n) for copy in block.copies
    ]
    kernel = canonical_basis(np.eye(n) - a.unit, n - len(columns), tol)
    unitary = np.hstack([np.column_stack(columns), kernel])
    return blocks, unitary


def hull(
    a: FdCStarAlgebra, elements: Iterable[ArrayLike], tol: ToleranceConfig | None = None
) -> intspan:
    """Labels of the blocks whose representation vanishes on every element.

    :raises: ElementNotInAlgebra
    """
    tol = tol or a.tol
    matrices = [a.require(x) for x in elements]
    return intspan(
        block.index
        for block in a.blocks
        if all(
            np.linalg.norm(block.represent(x)) <= tol.tol_eq * max(float(np.linalg.norm(x)), 1.0)
            for x in matrices
        )
    )
