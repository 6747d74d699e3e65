"""
GNS construction for states given by their values on the algebra basis.

The GNS space A/N_ω is built in coefficient space: with G the Gram
matrix ω(b_j*·b_k) = W·Λ·W*, the quotient map sends a coefficient vector
α to Λ_r^{1/2}·W_r*·α, keeping the eigenvalues above the rank cutoff.
Left multiplication by x acts on coefficients through
:meth:`FdCStarAlgebra.left_multiplication`, and conjugating it by the
quotient map gives rep(x).
"""

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike

from ukblab.errors import PurityMismatch
from ukblab.linalg.kernel import (
    ComplexMatrix,
    as_vector,
    hermitian_eig,
    intertwiner_space,
    operator_norm,
    orthonormalize,
)
from ukblab.states.state import State, fiber_of


@dataclass(frozen=True, eq=False)
class GnsTriple:
    state: State
    hilbert_dim: int
    #: rep(b_k) for the algebra basis, shape (dim, h, h)
    rep_basis: np.ndarray
    #: x_ω = Λ(e)
    cyclic_vector: np.ndarray
    #: Λ as an h×dim matrix acting on basis coefficients
    quotient_matrix: np.ndarray
    #: right inverse of Λ on the orthogonal complement of N_ω, dim×h
    quotient_inverse: np.ndarray

    def rep(self, x: ArrayLike) -> ComplexMatrix:
        coords = self.state.algebra.coordinates(x)
        return np.tensordot(coords, self.rep_basis, axes=1)

    def quotient_map(self, x: ArrayLike) -> np.ndarray:
        """Λ(x) ∈ A/N_ω"""
        return self.quotient_matrix @ self.state.algebra.coordinates(x)

    def reconstruction_residual(self) -> float:
        """max_k |ω(b_k) − ⟨x_ω|rep(b_k)·x_ω⟩|"""
        x = self.cyclic_vector
        recovered = np.einsum("r,krs,s->k", x.conj(), self.rep_basis, x)
        return float(np.max(np.abs(recovered - self.state.values), initial=0.0))

    def homomorphism_residual(self) -> float:
        """Largest deviation of rep from multiplicativity (rep(g·b_k) against
        rep(g)·rep(b_k) for the generators g and the basis) and from
        *-preservation over the basis."""
        algebra = self.state.algebra
        worst = 0.0
        for g in algebra.generators:
            expected = np.einsum("lk,lac->kac", algebra.left_multiplication(g), self.rep_basis)
            worst = max(worst, float(np.max(np.abs(self.rep(g) @ self.rep_basis - expected))))
        adjoints = np.einsum("jl,lac->jac", algebra.adjoint_coordinates, self.rep_basis)
        return max(
            worst,
            float(np.max(np.abs(adjoints - self.rep_basis.conj().transpose(0, 2, 1)), initial=0.0)),
        )

    def cyclic_rank(self) -> int:
        """Dimension of rep(A)·x_ω; equals ``hilbert_dim`` for a cyclic vector."""
        vectors = [r @ self.cyclic_vector for r in self.rep_basis]
        return orthonormalize(vectors, self.state.algebra.tol, ambient_dim=self.hilbert_dim).dim

    def __repr__(self):
        return f"GnsTriple(hilbert_dim={self.hilbert_dim})"


def gns(state: State) -> GnsTriple:
    """The GNS triple (A/N_ω, rep, x_ω) of ``state``."""
    algebra = state.algebra
    tol = algebra.tol
    gram = algebra.gram(state.values)
    eigenvalues, vectors = hermitian_eig((gram + gram.conj().T) / 2, tol)
    keep = eigenvalues > tol.tol_rank * eigenvalues[0]
    kept_values = eigenvalues[keep]
    kept_vectors = vectors[:, keep]

    quotient_matrix = np.sqrt(kept_values)[:, None] * kept_vectors.conj().T
    quotient_inverse = kept_vectors / np.sqrt(kept_values)[None, :]
    # rep(x)[h, m] = ⟨P_h, x·R_m⟩ with P_h = Σ_l conj(Λ[h, l])·b_l and
    # R_m = Σ_k Λ⁺[k, m]·b_k
    left = np.tensordot(quotient_matrix, algebra.basis.conj(), axes=1)
    right = np.tensordot(quotient_inverse.T, algebra.basis, axes=1)
    h = left.shape[0]
    pairing = np.einsum("hab,mcb->hmac", left, right).reshape(h * h, -1)
    rep_basis = (algebra.basis.reshape(algebra.dim, -1) @ pairing.T).reshape(-1, h, h)
    cyclic = quotient_matrix @ algebra.unit_coordinates
    return GnsTriple(
        state, int(keep.sum()), rep_basis, cyclic, quotient_matrix, quotient_inverse
    )


def commutant_dim(triple: GnsTriple) -> int:
    """Dimension of the commutant of rep(A) on the GNS space."""
    family = [triple.rep(g) for g in triple.state.algebra.generators]
    return len(intertwiner_space(family, family, triple.state.algebra.tol))


def is_pure_via_gns(state: State, triple: GnsTriple | None = None) -> bool:
    """Irreducibility of the GNS representation.

    :raises: PurityMismatch when the verdict differs from the density
        criterion recorded on ``state``
    """
    triple = triple or gns(state)
    irreducible = commutant_dim(triple) == 1
    if irreducible != state.is_pure:
        raise PurityMismatch(
            f"GNS irreducibility ({irreducible}) disagrees with density rank test "
            f"({state.is_pure})"
        )
    return irreducible


def intertwine_with_block(state: State, triple: GnsTriple | None = None) -> ComplexMatrix:
    """For a pure state on block i, the unitary U from the GNS space onto
    C^{n_i} with U·rep(a) = π_i(a)·U and U·x_ω = canonical ray.

    U is determined on Λ(a) by U·Λ(a) = π_i(a)·x, x the canonical ray.

    :raises: NotPure
    """
    triple = triple or gns(state)
    label = fiber_of(state)
    ray = as_vector(state.point.ray)
    images = state.algebra.block_images[label]
    orbit = np.einsum("lrs,s->rl", images, ray)
    return orbit @ triple.quotient_inverse


def intertwiner_residual(state: State, triple: GnsTriple, unitary: ComplexMatrix) -> float:
    """Largest of the unitarity defect and ‖U·rep(b_k) − π_i(b_k)·U‖."""
    images = state.algebra.block_images[fiber_of(state)]
    worst = operator_norm(unitary.conj().T @ unitary - np.eye(triple.hilbert_dim))
    worst = max(worst, operator_norm(unitary @ unitary.conj().T - np.eye(unitary.shape[0])))
    for rep, image in zip(triple.rep_basis, images):
        worst = max(worst, operator_norm(unitary @ rep - image @ unitary))
    return worst
