"""
Deterministic dense complex linear algebra used by every other
:mod:`ukblab` module.

All functions are pure: they take numpy arrays (or anything
:func:`numpy.asarray` accepts), never modify their inputs, and return new
arrays. Spans are cut relative to their largest singular value; null
spaces also treat anything at the level of tol_eq as zero, so rounding
noise never counts as rank. Randomized procedures elsewhere in the
package draw their generators from :meth:`ToleranceConfig.rng`, so a run
is reproducible from its seed.

Example usage:
```
from ukblab.linalg.kernel import ToleranceConfig, hermitian_eig, orthonormalize

tol = ToleranceConfig(tol_eq=1e-9)
values, vectors = hermitian_eig([[1, 0], [0, 2]], tol)
span = orthonormalize([[1, 0], [2, 0]], tol)
```
"""

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg
from numpy.typing import ArrayLike

from ukblab.errors import DimensionMismatch, NonFiniteEntries, NotHermitian

#: type alias for complex matrices; always 2-d complex128 numpy arrays
ComplexMatrix = np.ndarray


@dataclass(frozen=True)
class ToleranceConfig:
    """Numerical tolerances and the seed for all randomized procedures."""

    #: relative singular-value cutoff for rank decisions
    tol_rank: float = 1e-9
    #: absolute tolerance for equality and membership comparisons
    tol_eq: float = 1e-8
    #: tolerance for orthonormality and unitarity
    tol_ortho: float = 1e-10
    #: seed for every random generator handed out by :meth:`rng`
    rng_seed: int = 42
    #: largest ambient matrix size accepted by algebra construction
    max_ambient_dim: int = 64

    def __post_init__(self):
        for name in ("tol_rank", "tol_eq", "tol_ortho"):
            value = getattr(self, name)
            if not value > 0:
                raise ValueError(f"Tolerance {name} must be strictly positive (got {value})")
        if self.rng_seed < 0:
            raise ValueError(f"rng_seed must be non-negative (got {self.rng_seed})")
        if self.max_ambient_dim < 1:
            raise ValueError("max_ambient_dim must be at least 1")

    def rng(self, *stream: int) -> np.random.Generator:
        """Return a generator for the random stream identified by ``stream``.
        Different stream keys give independent generators; the same key
        always gives the same sequence."""
        return np.random.default_rng([self.rng_seed, *stream])


#: tolerances used when a caller does not pass its own
DEFAULT_TOLERANCES = ToleranceConfig()


def as_matrix(data: ArrayLike) -> ComplexMatrix:
    """Convert ``data`` to a 2-d complex array, rejecting non-finite entries.

    :raises: DimensionMismatch if the data is not two-dimensional,
        NonFiniteEntries if any entry is NaN or infinite
    """
    matrix = np.array(data, dtype=complex)
    if matrix.ndim != 2:
        raise DimensionMismatch(f"Expected a matrix, got an array with shape {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise NonFiniteEntries("Matrix has NaN or infinite entries")
    return matrix


def as_vector(data: ArrayLike) -> np.ndarray:
    """Convert ``data`` to a 1-d complex array, rejecting non-finite entries."""
    vector = np.array(data, dtype=complex).reshape(-1)
    if not np.all(np.isfinite(vector)):
        raise NonFiniteEntries("Vector has NaN or infinite entries")
    return vector


def _require_square(m: ComplexMatrix) -> None:
    if m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"Expected a square matrix, got shape {m.shape}")


def adjoint(m: ArrayLike) -> ComplexMatrix:
    """Conjugate transpose."""
    return as_matrix(m).conj().T


def multiply(a: ArrayLike, b: ArrayLike) -> ComplexMatrix:
    """Matrix product ``a·b``.

    :raises: DimensionMismatch when the inner dimensions differ
    """
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise DimensionMismatch(f"Cannot multiply {a.shape} by {b.shape}")
    return a @ b


def trace_inner(a: ArrayLike, b: ArrayLike) -> complex:
    """Hilbert–Schmidt inner product Tr(a*·b)."""
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape != b.shape:
        raise DimensionMismatch(f"Cannot pair {a.shape} with {b.shape}")
    return complex(np.vdot(a, b))


def operator_norm(m: ArrayLike) -> float:
    """Largest singular value (0 for empty matrices)."""
    m = as_matrix(m)
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, 2))


def is_hermitian(m: ArrayLike, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> bool:
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        return False
    return operator_norm(m - m.conj().T) <= tol.tol_eq * operator_norm(m)


def is_isometry(m: ArrayLike, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> bool:
    """True when the columns of ``m`` are orthonormal within tol_ortho."""
    m = as_matrix(m)
    gram = m.conj().T @ m
    return bool(np.max(np.abs(gram - np.eye(m.shape[1])), initial=0.0) <= tol.tol_ortho)


def is_unitary(m: ArrayLike, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> bool:
    m = as_matrix(m)
    return m.shape[0] == m.shape[1] and is_isometry(m, tol)


def gauge_fix(vector: ArrayLike, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> np.ndarray:
    """Multiply ``vector`` by a phase so that its first component of
    magnitude greater than tol_eq is real and positive. Vectors without
    such a component are returned unchanged."""
    vector = as_vector(vector)
    significant = np.flatnonzero(np.abs(vector) > tol.tol_eq)
    if significant.size == 0:
        return vector
    lead = vector[significant[0]]
    return vector * (abs(lead) / lead)


def _gauge_columns(basis: np.ndarray, tol: ToleranceConfig) -> np.ndarray:
    if basis.shape[1] == 0:
        return basis
    return np.column_stack([gauge_fix(basis[:, k], tol) for k in range(basis.shape[1])])


def canonical_basis(proj: ArrayLike, rank: int, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> np.ndarray:
    """Orthonormal basis of the range of the projection ``proj`` that
    depends only on the projection, not on how it was computed.

    Columns of the projection are taken in pivoted order (largest first,
    ties by position) and orthonormalized; each column is gauge-fixed.
    For a coordinate projection this returns the selected standard basis
    vectors in increasing order.
    """
    proj = as_matrix(proj)
    if rank == 0:
        return np.zeros((proj.shape[0], 0), dtype=complex)
    q, _, _ = scipy.linalg.qr(proj, pivoting=True, mode="economic")
    return _gauge_columns(q[:, :rank], tol)


def hermitian_eig(
    m: ArrayLike, tol: ToleranceConfig = DEFAULT_TOLERANCES
) -> tuple[np.ndarray, ComplexMatrix]:
    """Eigendecomposition of a Hermitian matrix.

    Returns eigenvalues in descending order and a unitary whose columns are
    the matching eigenvectors. Within a cluster of eigenvalues closer than
    tol_eq (relative to the norm) the eigenvectors are replaced by the
    :func:`canonical_basis` of the cluster's spectral projection, and every
    eigenvector is gauge-fixed, so the result is deterministic: the zero
    matrix gives the identity, ``diag(1, 2)`` gives the swap.

    :raises: NotHermitian if ‖m − m*‖ > tol_eq·‖m‖
    """
    m = as_matrix(m)
    _require_square(m)
    scale = operator_norm(m)
    if operator_norm(m - m.conj().T) > tol.tol_eq * scale:
        raise NotHermitian(
            f"Matrix is not Hermitian: ‖m − m*‖ = {operator_norm(m - m.conj().T):.3e}"
        )
    size = m.shape[0]
    if size == 0:
        return np.zeros(0), np.zeros((0, 0), dtype=complex)
    values, vectors = np.linalg.eigh((m + m.conj().T) / 2)
    order = np.argsort(-values, kind="stable")
    values = values[order]
    vectors = vectors[:, order]

    gap = tol.tol_eq * max(scale, 1.0)
    columns = []
    start = 0
    for stop in range(1, size + 1):
        if stop < size and values[stop - 1] - values[stop] <= gap:
            continue
        cluster = vectors[:, start:stop]
        if stop - start > 1:
            cluster = canonical_basis(cluster @ cluster.conj().T, stop - start, tol)
        else:
            cluster = _gauge_columns(cluster, tol)
        columns.append(cluster)
        start = stop
    return values, np.hstack(columns)


@dataclass(frozen=True, eq=False)
class Subspace:
    """Linear subspace of C^n given by an orthonormal basis (columns)."""

    ambient_dim: int
    basis: np.ndarray

    def __post_init__(self):
        basis = np.asarray(self.basis, dtype=complex)
        if basis.size == 0:
            basis = np.zeros((self.ambient_dim, 0), dtype=complex)
        if basis.ndim == 1:
            basis = basis.reshape(-1, 1)
        if basis.shape[0] != self.ambient_dim:
            raise DimensionMismatch(
                f"Basis vectors have length {basis.shape[0]}, expected {self.ambient_dim}"
            )
        if not is_isometry(basis):
            raise ValueError("Subspace basis is not orthonormal")
        object.__setattr__(self, "basis", basis)

    @classmethod
    def zero(cls, ambient_dim: int) -> "Subspace":
        return cls(ambient_dim, np.zeros((ambient_dim, 0), dtype=complex))

    @classmethod
    def full(cls, ambient_dim: int) -> "Subspace":
        return cls(ambient_dim, np.eye(ambient_dim, dtype=complex))

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def projector(self) -> ComplexMatrix:
        return projector(self)

    def residual(self, vector: ArrayLike) -> float:
        """Norm of the component of ``vector`` orthogonal to the subspace."""
        vector = as_vector(vector)
        return float(np.linalg.norm(vector - self.basis @ (self.basis.conj().T @ vector)))

    def contains(self, vector: ArrayLike, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> bool:
        vector = as_vector(vector)
        return self.residual(vector) <= tol.tol_eq * max(float(np.linalg.norm(vector)), 1.0)

    def complement(self, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> "Subspace":
        """Orthogonal complement, with the :func:`canonical_basis` of its
        projection."""
        proj = np.eye(self.ambient_dim) - self.projector()
        return Subspace(
            self.ambient_dim,
            canonical_basis(proj, self.ambient_dim - self.dim, tol),
        )

    def same_span(self, other: "Subspace", tol: ToleranceConfig = DEFAULT_TOLERANCES) -> bool:
        if self.ambient_dim != other.ambient_dim or self.dim != other.dim:
            return False
        return operator_norm(self.projector() - other.projector()) <= tol.tol_eq

    def __repr__(self):
        return f"Subspace(ambient_dim={self.ambient_dim}, dim={self.dim})"


def _stack_columns(vectors, ambient_dim: int | None) -> np.ndarray:
    if isinstance(vectors, np.ndarray) and vectors.ndim == 2:
        matrix = np.asarray(vectors, dtype=complex)
    else:
        vectors = [as_vector(v) for v in vectors]
        if not vectors:
            if ambient_dim is None:
                raise DimensionMismatch("Ambient dimension is required for an empty vector list")
            return np.zeros((ambient_dim, 0), dtype=complex)
        lengths = {len(v) for v in vectors}
        if len(lengths) > 1:
            raise DimensionMismatch(f"Vectors have different lengths: {sorted(lengths)}")
        matrix = np.column_stack(vectors)
    if ambient_dim is not None and matrix.shape[0] != ambient_dim:
        raise DimensionMismatch(f"Vectors have length {matrix.shape[0]}, expected {ambient_dim}")
    if not np.all(np.isfinite(matrix)):
        raise NonFiniteEntries("Vectors have NaN or infinite entries")
    return matrix


def orthonormalize(
    vectors: Sequence[ArrayLike] | np.ndarray,
    tol: ToleranceConfig = DEFAULT_TOLERANCES,
    ambient_dim: int | None = None,
    scale: float | None = None,
) -> Subspace:
    """Orthonormal basis of the span of ``vectors``.

    ``vectors`` is a sequence of vectors, or a 2-d array whose columns are
    the vectors. Singular values at or below tol_rank times the largest
    singular value (or times ``scale``, when that is larger) count as zero.

    :param ambient_dim: required when ``vectors`` is empty
    :param scale: reference magnitude for the rank cutoff, for spans whose
        vectors may all be numerically negligible
    """
    matrix = _stack_columns(vectors, ambient_dim)
    dim = matrix.shape[0]
    if matrix.shape[1] == 0:
        return Subspace.zero(dim)
    u, s, _ = np.linalg.svd(matrix, full_matrices=False)
    reference = max(float(s[0]) if s.size else 0.0, scale or 0.0)
    if reference == 0.0:
        return Subspace.zero(dim)
    rank = int(np.count_nonzero(s > tol.tol_rank * reference))
    return Subspace(dim, _gauge_columns(u[:, :rank], tol))


def gram_schmidt(
    vectors: Sequence[ArrayLike] | np.ndarray,
    tol: ToleranceConfig = DEFAULT_TOLERANCES,
    ambient_dim: int | None = None,
) -> np.ndarray:
    """Order-preserving orthonormalization: the k-th returned column spans
    the part of the k-th kept input orthogonal to the earlier ones. Inputs
    whose residual is below tol_eq relative to the largest input norm are
    dropped."""
    matrix = _stack_columns(vectors, ambient_dim)
    norms = np.linalg.norm(matrix, axis=0)
    reference = float(norms.max()) if norms.size else 0.0
    kept: list[np.ndarray] = []
    for k in range(matrix.shape[1]):
        column = matrix[:, k].copy()
        # two passes keep the result orthogonal to machine precision
        for _ in range(2):
            for q in kept:
                column -= q * np.vdot(q, column)
        norm = np.linalg.norm(column)
        if norm > tol.tol_eq * reference and norm > 0:
            kept.append(column / norm)
    if not kept:
        return np.zeros((matrix.shape[0], 0), dtype=complex)
    return np.column_stack(kept)


def null_space(
    m: ArrayLike, tol: ToleranceConfig = DEFAULT_TOLERANCES, scale: float | None = None
) -> Subspace:
    """Null space of ``m``. Singular values at or below tol_eq times
    ``max(1, scale)`` count as zero, where ``scale`` defaults to the
    operator norm of ``m``; a matrix of rounding noise therefore has a full
    null space. ``null_space(I)`` is the zero subspace and the null space
    of a zero matrix is everything.

    :param scale: magnitude of the data ``m`` was built from, when that is
        known better than from ``m`` itself
    """
    m = as_matrix(m)
    rows, cols = m.shape
    if rows == 0 or cols == 0:
        return Subspace.full(cols) if rows == 0 else Subspace.zero(0)
    _, s, vh = np.linalg.svd(m, full_matrices=rows < cols)
    reference = float(s[0]) if scale is None else scale
    cutoff = max(tol.tol_rank * float(s[0]), tol.tol_eq * max(1.0, reference))
    rank = int(np.count_nonzero(s > cutoff))
    return Subspace(cols, _gauge_columns(vh[rank:].conj().T, tol))


def projector(s: Subspace) -> ComplexMatrix:
    """Orthogonal projection onto ``s``."""
    return s.basis @ s.basis.conj().T


def intersect(s1: Subspace, s2: Subspace, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> Subspace:
    """Intersection of two subspaces of the same ambient space."""
    if s1.ambient_dim != s2.ambient_dim:
        raise DimensionMismatch(
            f"Cannot intersect subspaces of C^{s1.ambient_dim} and C^{s2.ambient_dim}"
        )
    if s1.dim == 0 or s2.dim == 0:
        return Subspace.zero(s1.ambient_dim)
    coefficients = null_space(np.hstack([s1.basis, -s2.basis]), tol)
    if coefficients.dim == 0:
        return Subspace.zero(s1.ambient_dim)
    vectors = s1.basis @ coefficients.basis[: s1.dim, :]
    return orthonormalize(vectors, tol, ambient_dim=s1.ambient_dim)


def intertwiner_space(
    left: Sequence[ComplexMatrix],
    right: Sequence[ComplexMatrix],
    tol: ToleranceConfig = DEFAULT_TOLERANCES,
) -> list[ComplexMatrix]:
    """All matrices T with ``left[k]·T = T·right[k]`` for every k.

    Returns a Hilbert–Schmidt-orthonormal basis of the solution space. With
    ``left`` equal to ``right`` this is the commutant of the family.
    """
    if len(left) != len(right):
        raise DimensionMismatch("left and right families must have the same length")
    if not left:
        raise DimensionMismatch("Cannot infer intertwiner shape from empty families")
    rows = left[0].shape[0]
    cols = right[0].shape[0]
    id_rows = np.eye(rows)
    id_cols = np.eye(cols)
    # row-major vec: vec(L·T) = (L ⊗ I)·vec(T), vec(T·R) = (I ⊗ Rᵀ)·vec(T)
    system = np.vstack(
        [np.kron(lft, id_cols) - np.kron(id_rows, rgt.T) for lft, rgt in zip(left, right)]
    )
    scale = max(operator_norm(m) for m in (*left, *right))
    solutions = null_space(system, tol, scale=scale)
    return [solutions.basis[:, k].reshape(rows, cols) for k in range(solutions.dim)]


def random_unit_vector(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unit vector in C^n."""
    vector = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return vector / np.linalg.norm(vector)


def random_real_unit_vector(n: int, rng: np.random.Generator) -> np.ndarray:
    vector = rng.standard_normal(n)
    return (vector / np.linalg.norm(vector)).astype(complex)


def random_unitary(n: int, rng: np.random.Generator) -> ComplexMatrix:
    """Haar-random n×n unitary (QR of a complex Gaussian matrix with the
    phases of R's diagonal removed)."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    diagonal = np.diagonal(r)
    return q * (diagonal / np.abs(diagonal))
