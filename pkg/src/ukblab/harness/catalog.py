"""
Built-in algebras for the command line and the acceptance suite.

The named catalog covers a single matrix block, several blocks, a block
with multiplicity and the abelian case:

- ``M2``, ``M3``: full matrix algebras
- ``M2+M3``: M_2 ⊕ M_3 inside M_5
- ``CI2``: the scalars C·I_2 inside M_2
- ``M2x2``: {a ⊕ a : a ∈ M_2} inside M_4
- ``D3``: diagonal matrices in M_3

Example usage:
```
from ukblab.harness.catalog import catalog_algebra

a = catalog_algebra("M2+M3")
[block.n for block in a.blocks]     # [2, 3]
```
"""

from typing import Callable, Sequence

import numpy as np
import scipy.linalg

from ukblab.algebra.core import FdCStarAlgebra, full_matrix_algebra, generate_algebra, matrix_unit
from ukblab.errors import SpecError
from ukblab.linalg.kernel import (
    DEFAULT_TOLERANCES,
    ComplexMatrix,
    ToleranceConfig,
    random_unit_vector,
    random_unitary,
)


def _block_units(sizes: Sequence[int], multiplicities: Sequence[int]) -> list[ComplexMatrix]:
    """Generators of ⊕_i (M_{n_i} ⊗ I_{m_i}) in block-diagonal position."""
    total = sum(n * m for n, m in zip(sizes, multiplicities))
    generators = []
    offset = 0
    for n, m in zip(sizes, multiplicities):
        for r in range(n):
            for s in range(n):
                unit = np.zeros((total, total), dtype=complex)
                unit[offset : offset + n * m, offset : offset + n * m] = np.kron(
                    matrix_unit(n, r, s), np.eye(m)
                )
                generators.append(unit)
        offset += n * m
    return generators


def block_diagonal_algebra(
    sizes: Sequence[int],
    multiplicities: Sequence[int] | None = None,
    tol: ToleranceConfig = DEFAULT_TOLERANCES,
) -> FdCStarAlgebra:
    """⊕_i M_{n_i} ⊗ I_{m_i} in block-diagonal position; multiplicities
    default to 1."""
    if multiplicities is None:
        multiplicities = [1] * len(sizes)
    if len(multiplicities) != len(sizes):
        raise ValueError("sizes and multiplicities must have the same length")
    total = sum(n * m for n, m in zip(sizes, multiplicities))
    return generate_algebra(total, _block_units(sizes, multiplicities), tol)


def scalar_algebra(n: int, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> FdCStarAlgebra:
    """C·I_n inside M_n: one block of size 1 with multiplicity n."""
    return generate_algebra(n, [np.eye(n)], tol)


def amplified_algebra(n: int, copies: int, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> FdCStarAlgebra:
    """{a ⊕ ... ⊕ a} inside M_{n·copies}."""
    generators = [
        scipy.linalg.block_diag(*[matrix_unit(n, r, s)] * copies)
        for r in range(n)
        for s in range(n)
    ]
    return generate_algebra(n * copies, generators, tol)


def diagonal_algebra(n: int, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> FdCStarAlgebra:
    return generate_algebra(n, [matrix_unit(n, r, r) for r in range(n)], tol)


#: catalog name → constructor
CATALOG: dict[str, Callable[[ToleranceConfig], FdCStarAlgebra]] = {
    "M2": lambda tol: full_matrix_algebra(2, tol),
    "M3": lambda tol: full_matrix_algebra(3, tol),
    "M2+M3": lambda tol: block_diagonal_algebra([2, 3], tol=tol),
    "CI2": lambda tol: scalar_algebra(2, tol),
    "M2x2": lambda tol: amplified_algebra(2, 2, tol),
    "D3": lambda tol: diagonal_algebra(3, tol),
}


def catalog_algebra(name: str, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> FdCStarAlgebra:
    """Build a catalog algebra by name.

    :raises: SpecError for unknown names
    """
    try:
        builder = CATALOG[name]
    except KeyError:
        raise SpecError(f"Unknown catalog algebra {name!r} (known: {', '.join(CATALOG)})")
    return builder(tol)


def random_algebra(
    rng: np.random.Generator,
    max_blocks: int = 3,
    max_n: int = 3,
    max_multiplicity: int = 2,
    tol: ToleranceConfig = DEFAULT_TOLERANCES,
) -> FdCStarAlgebra:
    """A random block structure ⊕ M_{n_i} ⊗ I_{m_i}, conjugated by a
    Haar-random unitary so that it is not in block-diagonal position."""
    blocks = int(rng.integers(1, max_blocks + 1))
    sizes = [int(rng.integers(1, max_n + 1)) for _ in range(blocks)]
    multiplicities = [int(rng.integers(1, max_multiplicity + 1)) for _ in range(blocks)]
    total = sum(n * m for n, m in zip(sizes, multiplicities))
    u = random_unitary(total, rng)
    generators = [u @ g @ u.conj().T for g in _block_units(sizes, multiplicities)]
    return generate_algebra(total, generators, tol)


def random_corner_projection(a: FdCStarAlgebra, rng: np.random.Generator) -> ComplexMatrix:
    """A random nonzero projection of ``a``: on each block a projection of
    random rank (possibly zero or full) onto a random subspace."""
    if not a.blocks:
        raise ValueError("The zero algebra has no nonzero projections")
    ranks = [int(rng.integers(0, block.n + 1)) for block in a.blocks]
    if not any(ranks):
        chosen = int(rng.integers(len(a.blocks)))
        ranks[chosen] = int(rng.integers(1, a.blocks[chosen].n + 1))
    p = np.zeros((a.ambient_dim, a.ambient_dim), dtype=complex)
    for block, rank in zip(a.blocks, ranks):
        if not rank:
            continue
        vectors = np.column_stack([random_unit_vector(block.n, rng) for _ in range(rank)])
        q, _ = np.linalg.qr(vectors)
        p = p + block.embed(q @ q.conj().T)
    return (p + p.conj().T) / 2
