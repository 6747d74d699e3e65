"""
Two-sided ideals and quotients of a finite-dimensional C*-algebra.

Every ideal is a sum of blocks, so the ideals of an algebra with k blocks
are in bijection with the 2^k subsets of its spectrum; block sets are
:class:`intspan.intspan` instances. The quotient by the ideal on S is
realized concretely as the block-diagonal algebra ⊕_{j∉S} M_{n_j}, and the
quotient map deletes the blocks in S.
"""

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np
import scipy.linalg
from intspan import intspan

from ukblab.algebra.core import (
    FdCStarAlgebra,
    generate_algebra,
    matrix_unit,
)
from ukblab.errors import InconsistentAlgebra, UnknownBlock
from ukblab.linalg.kernel import (
    ComplexMatrix,
    null_space,
    operator_norm,
    orthonormalize,
)


def match_blocks(
    sub: FdCStarAlgebra,
    parent: FdCStarAlgebra,
    labels: Iterable[int] | None = None,
    compress: ComplexMatrix | None = None,
) -> dict[int, int]:
    """Map each parent block label to the label of the block of ``sub``
    whose central projection is q_i (or compress·q_i when the subalgebra
    lives under a projection). Parent blocks with no counterpart are left
    out. Only the blocks in ``labels`` are matched when it is given."""
    tol = parent.tol
    wanted = parent.spectrum if labels is None else intspan(labels)
    mapping = {}
    for block in parent.blocks:
        if block.index not in wanted:
            continue
        target = block.central_projection
        if compress is not None:
            target = compress @ target
        if operator_norm(target) <= tol.tol_eq:
            continue
        for candidate in sub.blocks:
            if operator_norm(candidate.central_projection - target) <= 10 * tol.tol_eq:
                mapping[block.index] = candidate.index
                break
        else:
            raise InconsistentAlgebra(f"Block {block.index} has no counterpart in the subalgebra")
    return mapping


def _check_labels(a: FdCStarAlgebra, labels: Iterable[int]) -> intspan:
    labels = intspan(labels)
    unknown = labels - a.spectrum
    if unknown:
        raise UnknownBlock(f"Blocks {unknown} are not in the spectrum {a.spectrum or 'empty'}")
    return labels


def _support_projection(a: FdCStarAlgebra, labels: Iterable[int]) -> ComplexMatrix:
    total = np.zeros((a.ambient_dim, a.ambient_dim), dtype=complex)
    for label in labels:
        total = total + a.block(label).central_projection
    return total


@dataclass(frozen=True, eq=False)
class Ideal:
    """The ideal ⊕_{i∈S} block_i of ``parent``."""

    parent: FdCStarAlgebra
    block_set: intspan
    #: the ideal as an algebra in its own right (same ambient space)
    as_algebra: FdCStarAlgebra
    #: parent block label → label of the same block in ``as_algebra``
    block_map: dict[int, int]

    @property
    def complement(self) -> intspan:
        return self.parent.spectrum - self.block_set

    @property
    def is_zero(self) -> bool:
        return not self.block_set

    def contains(self, x) -> bool:
        return self.as_algebra.contains(x)

    def absorption_residual(self) -> float:
        """Largest distance from A·I and I·A to I over basis products."""
        worst = 0.0
        for a in self.parent.basis:
            for y in self.as_algebra.basis:
                worst = max(worst, self.as_algebra.residual(a @ y), self.as_algebra.residual(y @ a))
        return worst

    def kernel_residual(self) -> float:
        """Distance between I and ker ⊕_{i∉S} π_i, both computed in the
        parent's coefficient space: the kernel as a null space, I from the
        coordinates of its own basis."""
        parent = self.parent
        tol = parent.tol
        rows = [
            parent.block_images[label].reshape(parent.dim, -1).T for label in self.complement
        ]
        if rows:
            kernel = null_space(np.vstack(rows), tol)
        else:
            kernel = orthonormalize(np.eye(parent.dim), tol)
        ideal_coords = orthonormalize(
            [parent.coordinates(y) for y in self.as_algebra.basis], tol, ambient_dim=parent.dim
        )
        if kernel.dim != ideal_coords.dim:
            return float("inf")
        if kernel.dim == 0:
            return 0.0
        return operator_norm(kernel.projector() - ideal_coords.projector())

    def __repr__(self):
        return f"Ideal(blocks='{self.block_set}', dim={self.as_algebra.dim})"


def make_ideal(a: FdCStarAlgebra, labels: Iterable[int]) -> Ideal:
    """The ideal of ``a`` supported on the blocks in ``labels``.

    :raises: UnknownBlock
    """
    labels = _check_labels(a, labels)
    support = _support_projection(a, labels)
    basis = orthonormalize(
        [(support @ b).reshape(-1) for b in a.basis], a.tol, ambient_dim=a.ambient_dim**2
    )
    members = [basis.basis[:, k].reshape(a.ambient_dim, a.ambient_dim) for k in range(basis.dim)]
    as_algebra = generate_algebra(a.ambient_dim, members, a.tol)
    return Ideal(a, labels, as_algebra, match_blocks(as_algebra, a, labels))


def enumerate_ideals(a: FdCStarAlgebra) -> list[Ideal]:
    """All 2^k ideals, ordered by size and then lexicographically by block
    set."""
    labels = list(a.spectrum)
    return [
        make_ideal(a, subset)
        for size in range(len(labels) + 1)
        for subset in itertools.combinations(labels, size)
    ]


def ideal_meet(first: Ideal, second: Ideal) -> Ideal:
    """Intersection of two ideals of the same algebra."""
    return make_ideal(first.parent, first.block_set & second.block_set)


def ideal_join(first: Ideal, second: Ideal) -> Ideal:
    """Sum of two ideals of the same algebra."""
    return make_ideal(first.parent, first.block_set | second.block_set)


@dataclass(frozen=True, eq=False)
class QuotientMap:
    """The block-deletion *-homomorphism h: A → A/I."""

    parent: FdCStarAlgebra
    #: parent labels of the blocks that survive, in order
    kept: tuple[int, ...]
    quotient: FdCStarAlgebra

    def __call__(self, x) -> ComplexMatrix:
        if not self.kept:
            return np.zeros((0, 0), dtype=complex)
        return scipy.linalg.block_diag(*[self.parent.represent(label, x) for label in self.kept])

    @property
    def block_map(self) -> dict[int, int]:
        """Parent label → quotient label."""
        return {label: position for position, label in enumerate(self.kept, start=1)}

    def homomorphism_residual(self) -> float:
        """Largest deviation of h(ab) from h(a)h(b) and of h(a*) from h(a)*
        over the parent basis."""
        worst = 0.0
        for x in self.parent.basis:
            hx = self(x)
            worst = max(worst, float(np.linalg.norm(self(x.conj().T) - hx.conj().T)))
            for y in self.parent.basis:
                worst = max(worst, float(np.linalg.norm(self(x @ y) - hx @ self(y))))
        return worst

    def kernel(self) -> np.ndarray:
        """Coordinates (columns) of an orthonormal basis of ker h in the
        parent's coefficient space."""
        if not self.kept:
            return np.eye(self.parent.dim, dtype=complex)
        images = np.column_stack([self(b).reshape(-1) for b in self.parent.basis])
        return null_space(images, self.parent.tol).basis

    def image_dim(self) -> int:
        if not self.kept:
            return 0
        images = [self(b).reshape(-1) for b in self.parent.basis]
        return orthonormalize(images, self.parent.tol).dim


def quotient(a: FdCStarAlgebra, ideal: Ideal) -> tuple[FdCStarAlgebra, QuotientMap]:
    """A/I realized as ⊕_{j∉S} M_{n_j}, with the block-deletion map.

    The quotient's blocks appear in the order of the surviving parent
    blocks, so quotient label k is the k-th surviving parent label.
    """
    kept = tuple(ideal.complement)
    sizes = [a.block(label).n for label in kept]
    total = sum(sizes)
    generators = []
    offset = 0
    for size in sizes:
        for r in range(size):
            for s in range(size):
                unit = np.zeros((total, total), dtype=complex)
                unit[offset : offset + size, offset : offset + size] = matrix_unit(size, r, s)
                generators.append(unit)
        offset += size
    q = generate_algebra(total, generators, a.tol)
    return q, QuotientMap(a, kept, q)


def enumerate_quotients(
    a: FdCStarAlgebra,
) -> Iterator[tuple[Ideal, FdCStarAlgebra, QuotientMap]]:
    for ideal in enumerate_ideals(a):
        q, h = quotient(a, ideal)
        yield ideal, q, h
