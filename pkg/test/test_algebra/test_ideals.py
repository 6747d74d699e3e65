import numpy as np
import pytest
from intspan import intspan

from ukblab.algebra.ideals import (
    enumerate_ideals,
    enumerate_quotients,
    ideal_join,
    ideal_meet,
    make_ideal,
    quotient,
)
from ukblab.errors import UnknownBlock


def test_enumerate_ideals_order(m2m3):
    ideals = enumerate_ideals(m2m3)
    assert [ideal.block_set for ideal in ideals] == [
        intspan(),
        intspan("1"),
        intspan("2"),
        intspan("1-2"),
    ]
    assert [ideal.as_algebra.dim for ideal in ideals] == [0, 4, 9, 13]
    assert ideals[0].is_zero


def test_single_block_algebra_is_simple(m2):
    assert [ideal.block_set for ideal in enumerate_ideals(m2)] == [intspan(), intspan("1")]


def test_ideal_membership_and_residuals(m2m3):
    ideal = make_ideal(m2m3, [2])
    assert ideal.complement == intspan("1")
    assert ideal.contains(m2m3.embed(2, np.ones((3, 3))))
    assert not ideal.contains(m2m3.embed(1, np.eye(2)))
    assert ideal.absorption_residual() <= 1e-10
    assert ideal.kernel_residual() <= 1e-10
    assert list(ideal.block_map) == [2]


def test_make_ideal_unknown_block(m2m3):
    with pytest.raises(UnknownBlock, match="3"):
        make_ideal(m2m3, [3])


def test_lattice_operations(m2m3):
    first = make_ideal(m2m3, [1])
    second = make_ideal(m2m3, [2])
    assert ideal_meet(first, second).is_zero
    assert ideal_join(first, second).as_algebra.dim == m2m3.dim
    assert ideal_meet(first, ideal_join(first, second)).block_set == intspan("1")


def test_quotient(m2m3):
    ideal = make_ideal(m2m3, [1])
    q, h = quotient(m2m3, ideal)
    assert [block.n for block in q.blocks] == [3]
    assert h.kept == (2,)
    assert h.block_map == {2: 1}
    assert h.homomorphism_residual() <= 1e-10
    assert h.image_dim() == 9
    # the kernel of the quotient map is the ideal
    assert h.kernel().shape[1] == ideal.as_algebra.dim
    m = np.arange(9).reshape(3, 3).astype(complex)
    np.testing.assert_allclose(h(m2m3.embed(2, m)), m, atol=1e-10)


def test_quotient_by_everything(m2m3):
    q, h = quotient(m2m3, make_ideal(m2m3, [1, 2]))
    assert q.dim == 0
    assert h(np.eye(5)).shape == (0, 0)
    assert h.image_dim() == 0
    assert h.kernel().shape == (m2m3.dim, m2m3.dim)


def test_enumerate_quotients(m1m2):
    pairs = list(enumerate_quotients(m1m2))
    assert len(pairs) == 4
    for ideal, q, h in pairs:
        assert q.dim + ideal.as_algebra.dim == m1m2.dim
        assert h.homomorphism_residual() <= 1e-10
