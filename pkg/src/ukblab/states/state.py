"""
States on a finite-dimensional C*-algebra.

A :class:`State` is stored as the vector of its values ω(b_k) on the
algebra's orthonormal basis, not as an ambient density matrix: an
algebra with multiplicity sits in M_N in a way that makes ambient
densities non-unique. From the values we derive, for each block i, the
n_i×n_i density D_i with ω(x) = Σ_i Tr(D_i·π_i(x)), by evaluating ω on
the embedded matrix units of the block.

A state is pure exactly when one D_i is nonzero and it has rank one; its
top eigenvector, phase-fixed so that the first significant coordinate is
real and positive, is the state's :class:`ProjectivePoint`.

Example usage:
```
from ukblab.algebra.core import full_matrix_algebra
from ukblab.states.state import ProjectivePoint, canonical_ray, state_from_ray

m2 = full_matrix_algebra(2)
omega = state_from_ray(m2, ProjectivePoint.from_vector(1, [1, 1j]))
canonical_ray(omega).ray     # (1, i)/√2
```
"""

import functools
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np
from numpy.typing import ArrayLike

from ukblab.algebra.core import FdCStarAlgebra
from ukblab.errors import DimensionMismatch, NotNormalized, NotPositive, NotPure
from ukblab.linalg.kernel import (
    DEFAULT_TOLERANCES,
    ComplexMatrix,
    ToleranceConfig,
    as_matrix,
    as_vector,
    gauge_fix,
    hermitian_eig,
    random_unit_vector,
)


@dataclass(frozen=True, eq=False)
class ProjectivePoint:
    """A ray [x] in the fiber CP^{n-1} over spectrum label ``fiber``."""

    fiber: int
    #: unit vector in C^n
    ray: np.ndarray

    def __post_init__(self):
        ray = as_vector(self.ray)
        if abs(np.linalg.norm(ray) - 1.0) > DEFAULT_TOLERANCES.tol_ortho:
            raise ValueError(f"Ray must be a unit vector (norm {np.linalg.norm(ray):.12f})")
        object.__setattr__(self, "ray", ray)

    @classmethod
    def from_vector(
        cls, fiber: int, vector: ArrayLike, tol: ToleranceConfig = DEFAULT_TOLERANCES
    ) -> "ProjectivePoint":
        """Normalize and gauge-fix ``vector``."""
        vector = as_vector(vector)
        norm = np.linalg.norm(vector)
        if norm == 0:
            raise ValueError("Cannot build a ray from the zero vector")
        return cls(fiber, gauge_fix(vector / norm, tol))

    @property
    def dim(self) -> int:
        return len(self.ray)

    def overlap(self, other: "ProjectivePoint") -> float:
        """|⟨x|y⟩|"""
        return float(abs(np.vdot(self.ray, other.ray)))

    def same_as(self, other: "ProjectivePoint", tol: ToleranceConfig = DEFAULT_TOLERANCES) -> bool:
        return (
            self.fiber == other.fiber
            and self.dim == other.dim
            and 1.0 - self.overlap(other) <= tol.tol_eq
        )

    def __repr__(self):
        return f"ProjectivePoint(fiber={self.fiber}, ray={np.round(self.ray, 6).tolist()})"


@dataclass(frozen=True, eq=False)
class State:
    """A certified state: positive and normalized."""

    algebra: FdCStarAlgebra
    #: ω(b_k) for the algebra basis
    values: np.ndarray
    #: label → D_i with ω(x) = Σ_i Tr(D_i·π_i(x))
    density_per_block: dict[int, ComplexMatrix]
    is_pure: bool

    def __call__(self, x: ArrayLike) -> complex:
        """ω(x); x is orthogonally projected onto the algebra first."""
        return complex(self.algebra.coordinates(x) @ self.values)

    @functools.cached_property
    def point(self) -> ProjectivePoint:
        """The canonical ray; see :func:`canonical_ray`."""
        label = fiber_of(self)
        tol = self.algebra.tol
        eigenvalues, vectors = hermitian_eig(self.density_per_block[label], tol)
        if len(eigenvalues) > 1 and eigenvalues[0] - eigenvalues[1] <= tol.tol_eq:
            raise NotPure("Top eigenvalue of the block density is degenerate")
        return ProjectivePoint(label, vectors[:, 0])

    def __repr__(self):
        kind = "pure" if self.is_pure else "mixed"
        return f"State({kind}, blocks={sorted(self.density_per_block)})"


def _nonzero_blocks(densities: Mapping[int, ComplexMatrix], tol: ToleranceConfig) -> list[int]:
    return [label for label, d in densities.items() if np.linalg.norm(d) > tol.tol_eq]


def _density_is_pure(densities: Mapping[int, ComplexMatrix], tol: ToleranceConfig) -> bool:
    support = _nonzero_blocks(densities, tol)
    if len(support) != 1:
        return False
    density = densities[support[0]]
    eigenvalues = np.linalg.eigvalsh((density + density.conj().T) / 2)
    if eigenvalues.size == 1:
        return True
    return bool(eigenvalues[-2] <= tol.tol_rank * eigenvalues[-1])


def make_state(
    algebra: FdCStarAlgebra, values: ArrayLike, tol: ToleranceConfig | None = None
) -> State:
    """Certify ``values`` (ω(b_k) per basis element) as a state.

    :raises: DimensionMismatch, NotPositive (with the violating Gram
        eigenvalue), NotNormalized
    """
    tol = tol or algebra.tol
    values = as_vector(values)
    if values.shape != (algebra.dim,):
        raise DimensionMismatch(f"Expected {algebra.dim} values, got {values.shape[0]}")
    if algebra.dim == 0:
        raise NotNormalized("The zero algebra has no states")

    gram = algebra.gram(values)
    asymmetry = float(np.linalg.norm(gram - gram.conj().T))
    eigenvalues = np.linalg.eigvalsh((gram + gram.conj().T) / 2)
    scale = max(1.0, float(eigenvalues[-1]))
    if asymmetry > tol.tol_eq * scale:
        raise NotPositive(
            f"Functional is not self-adjoint: Gram asymmetry {asymmetry:.3e}", -asymmetry
        )
    if eigenvalues[0] < -tol.tol_eq * scale:
        raise NotPositive(
            f"Gram matrix has negative eigenvalue {eigenvalues[0]:.3e}", float(eigenvalues[0])
        )
    total = complex(algebra.unit_coordinates @ values)
    if abs(total - 1.0) > tol.tol_eq:
        raise NotNormalized(f"ω(e) = {total:.12g}, expected 1")

    densities = {
        label: (coords @ values).T for label, coords in algebra.matrix_unit_coordinates.items()
    }
    return State(algebra, values, densities, _density_is_pure(densities, tol))


def fiber_of(state: State) -> int:
    """Spectrum label of the block carrying a pure state.

    :raises: NotPure
    """
    if not state.is_pure:
        raise NotPure("State is not pure")
    return _nonzero_blocks(state.density_per_block, state.algebra.tol)[0]


def canonical_ray(state: State) -> ProjectivePoint:
    """Top eigenvector of the block density of a pure state, gauge-fixed.

    :raises: NotPure
    """
    return state.point


def state_from_ray(
    algebra: FdCStarAlgebra, point: ProjectivePoint, tol: ToleranceConfig | None = None
) -> State:
    """The vector state ω(x) = ⟨ray|π_i(x)·ray⟩."""
    block = algebra.block(point.fiber)
    if point.dim != block.n:
        raise DimensionMismatch(f"Block {point.fiber} has n={block.n}; ray has length {point.dim}")
    images = algebra.block_images[point.fiber]
    values = np.einsum("r,krs,s->k", point.ray.conj(), images, point.ray)
    return make_state(algebra, values, tol)


def vector_state(algebra: FdCStarAlgebra, fiber: int, vector: ArrayLike) -> State:
    return state_from_ray(algebra, ProjectivePoint.from_vector(fiber, vector, algebra.tol))


def state_from_density(algebra: FdCStarAlgebra, density: ArrayLike) -> State:
    """ω(x) = Tr(ρ·x) for an ambient density ρ."""
    density = as_matrix(density)
    return make_state(algebra, np.einsum("ab,kba->k", density, algebra.basis))


def state_from_block_densities(
    algebra: FdCStarAlgebra, densities: Mapping[int, ArrayLike]
) -> State:
    """ω(x) = Σ_i Tr(D_i·π_i(x)) for per-block densities."""
    values = np.zeros(algebra.dim, dtype=complex)
    for label, density in densities.items():
        density = as_matrix(density)
        values = values + np.einsum("rs,ksr->k", density, algebra.block_images[label])
    return make_state(algebra, values)


def random_pure_state(
    algebra: FdCStarAlgebra, rng: np.random.Generator, fiber: int | None = None
) -> State:
    """Vector state at a Haar-random ray, on ``fiber`` or on a uniformly
    chosen block."""
    if fiber is None:
        fiber = int(rng.choice(list(algebra.spectrum)))
    n = algebra.block(fiber).n
    return vector_state(algebra, fiber, random_unit_vector(n, rng))


def random_state(algebra: FdCStarAlgebra, rng: np.random.Generator) -> State:
    """Generic (full-rank, mixed) state with random block weights."""
    labels = list(algebra.spectrum)
    weights = rng.dirichlet(np.ones(len(labels)))
    densities = {}
    for label, weight in zip(labels, weights):
        n = algebra.block(label).n
        g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        density = g @ g.conj().T
        densities[label] = weight * density / np.real(np.trace(density))
    return state_from_block_densities(algebra, densities)


def restrict_values(state: State, sub: FdCStarAlgebra) -> np.ndarray:
    """Values of ω on the basis of a subalgebra ``sub``."""
    parent = state.algebra
    if sub.ambient_dim != parent.ambient_dim:
        raise DimensionMismatch("Subalgebra lives in a different ambient space")
    overlaps = np.einsum("kab,mab->mk", parent.basis.conj(), sub.basis)
    return overlaps @ state.values


def pullback(
    state: State, parent: FdCStarAlgebra, homomorphism: Callable[[ComplexMatrix], ComplexMatrix]
) -> State:
    """ω∘h as a state of ``parent``, for a unital *-homomorphism h from
    ``parent`` onto the algebra of ``state``."""
    values = np.array([state(homomorphism(b)) for b in parent.basis])
    return make_state(parent, values)
