import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from intspan import intspan

from ukblab.algebra.core import full_matrix_algebra, generate_algebra, hull, matrix_unit
from ukblab.errors import (
    AmbientTooLarge,
    DimensionMismatch,
    ElementNotInAlgebra,
    UnknownBlock,
)
from ukblab.harness.catalog import catalog_algebra, random_algebra
from ukblab.linalg.kernel import ToleranceConfig, is_isometry, random_unitary


def test_full_matrix_algebra():
    a = full_matrix_algebra(3)
    assert a.dim == 9
    assert a.spectrum == intspan("1")
    block = a.block(1)
    assert (block.n, block.multiplicity) == (3, 1)
    np.testing.assert_allclose(a.unit, np.eye(3), atol=1e-12)
    assert a.reconstruction_residual() <= 1e-10


def test_diagonal_blocks_keep_order(m2m3):
    assert [(block.n, block.multiplicity) for block in m2m3.blocks] == [(2, 1), (3, 1)]
    assert m2m3.dim == 13
    # block 1 sits on the first two coordinates
    np.testing.assert_allclose(m2m3.block(1).central_projection, np.diag([1, 1, 0, 0, 0]), atol=1e-10)


def test_commuting_projections():
    a = generate_algebra(2, [matrix_unit(2, 0, 0), matrix_unit(2, 1, 1)])
    assert [(block.n, block.multiplicity) for block in a.blocks] == [(1, 1), (1, 1)]
    assert hull(a, [matrix_unit(2, 0, 0)]) == intspan("2")


def test_multiplicity(m2x2):
    assert [(block.n, block.multiplicity) for block in m2x2.blocks] == [(2, 2)]
    assert m2x2.dim == 4
    block = m2x2.block(1)
    assert len(block.copies) == 2
    assert is_isometry(block.irrep_isometry)


def test_non_unital_subalgebra():
    # M_2 in the top-left corner of M_3: the unit is a proper projection
    a = generate_algebra(3, [np.pad(matrix_unit(2, r, s), ((0, 1), (0, 1))) for r in range(2) for s in range(2)])
    np.testing.assert_allclose(a.unit, np.diag([1, 1, 0]), atol=1e-10)
    assert a.reconstruction_residual() <= 1e-10


def test_zero_algebra():
    a = generate_algebra(2, [])
    assert a.dim == 0
    assert not a.blocks
    assert a.spectrum == intspan()
    np.testing.assert_allclose(a.unit, np.zeros((2, 2)))


def test_generate_errors():
    with pytest.raises(AmbientTooLarge):
        generate_algebra(5, [], ToleranceConfig(max_ambient_dim=4))
    with pytest.raises(DimensionMismatch, match="Generator has shape"):
        generate_algebra(2, [np.eye(3)])


def test_membership(m2m3):
    x = np.zeros((5, 5), dtype=complex)
    x[0, 1] = 1
    x[3, 4] = 2j
    assert m2m3.contains(x)
    np.testing.assert_allclose(m2m3.require(x), x)
    off_diagonal = np.zeros((5, 5))
    off_diagonal[0, 4] = 1
    assert not m2m3.contains(off_diagonal)
    with pytest.raises(ElementNotInAlgebra):
        m2m3.require(off_diagonal)
    with pytest.raises(DimensionMismatch):
        m2m3.require(np.eye(3))


def test_represent_and_embed(m2m3):
    m = np.array([[1, 2], [3, 4]], dtype=complex)
    x = m2m3.embed(1, m)
    np.testing.assert_allclose(m2m3.represent(1, x), m, atol=1e-10)
    np.testing.assert_allclose(m2m3.represent(2, x), np.zeros((3, 3)), atol=1e-10)
    with pytest.raises(UnknownBlock):
        m2m3.block(3)
    with pytest.raises(DimensionMismatch, match="n=2"):
        m2m3.embed(1, np.eye(3))


def test_hull(m2m3):
    assert hull(m2m3, []) == intspan("1-2")
    assert hull(m2m3, [m2m3.embed(2, np.eye(3))]) == intspan("1")
    assert hull(m2m3, [np.eye(5)]) == intspan()


@settings(deadline=None, max_examples=10)
@given(st.integers(min_value=0, max_value=2**31))
def test_random_algebra_reconstruction(seed):
    rng = np.random.default_rng(seed)
    a = random_algebra(rng, max_blocks=2, max_n=2, max_multiplicity=2)
    assert a.reconstruction_residual() <= 1e-8
    assert a.dim == sum(block.n**2 for block in a.blocks)
    assert sum(block.n * block.multiplicity for block in a.blocks) == a.ambient_dim
    # conjugating by a unitary keeps the block structure
    u = random_unitary(a.ambient_dim, rng)
    conjugated = generate_algebra(a.ambient_dim, [u @ b @ u.conj().T for b in a.basis])
    assert sorted((b.n, b.multiplicity) for b in conjugated.blocks) == sorted(
        (b.n, b.multiplicity) for b in a.blocks
    )


def test_scalar_block_with_multiplicity():
    a = catalog_algebra("CI2")
    assert [(block.n, block.multiplicity) for block in a.blocks] == [(1, 2)]
    assert a.dim == 1
    assert a.reconstruction_residual() <= 1e-10


def test_rotated_commuting_projections():
    u = random_unitary(2, np.random.default_rng(7))
    a = generate_algebra(2, [u @ matrix_unit(2, k, k) @ u.conj().T for k in range(2)])
    assert [(block.n, block.multiplicity) for block in a.blocks] == [(1, 1), (1, 1)]
    projections = [block.central_projection for block in a.blocks]
    for k in range(2):
        expected = u @ matrix_unit(2, k, k) @ u.conj().T
        assert any(np.allclose(q, expected, atol=1e-8) for q in projections)


def test_rotated_scalar_block():
    # C ⊕ C·I_2 in a rotated frame of C^3
    u = random_unitary(3, np.random.default_rng(11))
    generators = [u @ np.diag(d) @ u.conj().T for d in ([1, 0, 0], [0, 1, 1])]
    a = generate_algebra(3, generators)
    assert a.dim == 2
    assert sorted((block.n, block.multiplicity) for block in a.blocks) == [(1, 1), (1, 2)]
    assert a.reconstruction_residual() <= 1e-8
    np.testing.assert_allclose(a.unit, np.eye(3), atol=1e-8)


def test_generating_set():
    a = full_matrix_algebra(32)
    assert a.dim == 1024
    assert [(block.n, block.multiplicity) for block in a.blocks] == [(32, 1)]
    # a generic pair and its adjoints
    assert len(a.generators) == 4
    for g in a.generators:
        assert a.contains(g)
        assert any(np.allclose(g.conj().T, other) for other in a.generators)


def test_left_multiplication_and_gram(m2m3, rng):
    x = m2m3.element(rng.standard_normal(m2m3.dim) + 1j * rng.standard_normal(m2m3.dim))
    left = m2m3.left_multiplication(x)
    for k, b in enumerate(m2m3.basis):
        np.testing.assert_allclose(left[:, k], m2m3.coordinates(x @ b), atol=1e-12)
    values = rng.standard_normal(m2m3.dim) + 1j * rng.standard_normal(m2m3.dim)
    gram = m2m3.gram(values)
    j, k = 3, 7
    product = m2m3.basis[j].conj().T @ m2m3.basis[k]
    assert gram[j, k] == pytest.approx(values @ m2m3.coordinates(product))
