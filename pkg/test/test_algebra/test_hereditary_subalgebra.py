import numpy as np
import pytest
from intspan import intspan

from ukblab.algebra.core import full_matrix_algebra, generate_algebra, matrix_unit
from ukblab.algebra.hereditary import (
    hereditary_from_projection,
    is_hereditary,
    is_ideal,
    is_subalgebra,
)
from ukblab.errors import ElementNotInAlgebra, NotProjection, NotSubalgebra
from ukblab.linalg.kernel import ToleranceConfig


def test_corner_of_matrix_algebra(m2m3):
    # rank-one projection in the M_3 block
    p = m2m3.embed(2, matrix_unit(3, 0, 0))
    b = hereditary_from_projection(m2m3, p)
    assert b.as_algebra.dim == 1
    assert b.spectrum == intspan("2")
    assert b.parent_label(1) == 2
    assert b.generated_ideal.block_set == intspan("2")
    assert b.generated_ideal_residual <= 1e-8
    np.testing.assert_allclose(b.corner_projections[1], np.zeros((2, 2)), atol=1e-10)
    assert not is_ideal(m2m3, b.as_algebra)
    assert is_hereditary(m2m3, b.as_algebra)


def test_central_projection_gives_ideal(m2m3):
    b = hereditary_from_projection(m2m3, m2m3.block(1).central_projection)
    assert b.as_algebra.dim == 4
    assert is_ideal(m2m3, b.as_algebra)


def test_projection_validation(m2m3):
    with pytest.raises(NotProjection, match="zero"):
        hereditary_from_projection(m2m3, np.zeros((5, 5)))
    with pytest.raises(NotProjection, match="idempotent"):
        hereditary_from_projection(m2m3, 2 * np.eye(5))
    with pytest.raises(NotProjection, match="shape"):
        hereditary_from_projection(m2m3, np.eye(3))
    off = np.zeros((5, 5))
    off[0, 0] = off[4, 4] = 0.5
    off[0, 4] = off[4, 0] = 0.5
    with pytest.raises(ElementNotInAlgebra):
        hereditary_from_projection(m2m3, off)


def test_diagonal_is_not_hereditary(m2):
    diagonal = generate_algebra(2, [matrix_unit(2, 0, 0), matrix_unit(2, 1, 1)])
    assert is_subalgebra(m2, diagonal)
    verdict = is_hereditary(m2, diagonal)
    assert not verdict
    x, y = verdict.witness
    assert diagonal.contains(y)
    assert not diagonal.contains(x)
    # 0 ≤ x ≤ y
    assert np.min(np.linalg.eigvalsh(x)) >= -1e-10
    assert np.min(np.linalg.eigvalsh(y - x)) >= -1e-10


def test_hereditary_witness_is_reproducible(m2):
    diagonal = generate_algebra(2, [matrix_unit(2, 0, 0), matrix_unit(2, 1, 1)])
    first = is_hereditary(m2, diagonal)
    second = is_hereditary(m2, diagonal)
    assert first.seed == m2.tol.rng_seed
    assert first.attempt == second.attempt
    for x, y in zip(first.witness, second.witness):
        np.testing.assert_array_equal(x, y)

    tol = ToleranceConfig(rng_seed=7)
    parent = full_matrix_algebra(2, tol)
    child = generate_algebra(2, [matrix_unit(2, 0, 0), matrix_unit(2, 1, 1)], tol)
    verdict = is_hereditary(parent, child)
    assert verdict.seed == 7
    assert 0 <= verdict.attempt
    assert is_hereditary(parent, child).attempt == verdict.attempt


def test_hereditary_verdict_has_no_seed_when_hereditary(m2m3):
    b = hereditary_from_projection(m2m3, m2m3.embed(2, matrix_unit(3, 0, 0)))
    verdict = is_hereditary(m2m3, b.as_algebra)
    assert verdict.witness is None
    assert verdict.seed is None


def test_not_a_subalgebra(m2m3):
    with pytest.raises(NotSubalgebra):
        is_hereditary(m2m3, generate_algebra(5, [np.ones((5, 5))]))
