import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from stabrad import BasisStructure, StructureSpace, project
from stabrad.errors import DimensionMismatch
from stabrad.structures import membership_residual, real_basis

from helpers import KINDS, crandn, random_structure


def rdot(X, Y):
    return np.vdot(X, Y).real


def ls_oracle(S, Z):
    """Least-squares projection onto the span of an explicit basis (normal equations)."""
    B = real_basis(S)
    if len(B) == 0:
        return np.zeros_like(Z)
    gram = np.array([[rdot(Bi, Bj) for Bj in B] for Bi in B])
    rhs = np.array([rdot(Bi, Z) for Bi in B])
    c = np.linalg.solve(gram, rhs)
    return np.tensordot(c, B, axes=1)


cases = st.tuples(st.sampled_from(KINDS), st.integers(1, 6), st.integers(0, 2**32 - 1))


def make(kind, n, seed):
    rng = np.random.default_rng(seed)
    return random_structure(kind, n, rng), rng


def test_full_real_example():
    assert project(StructureSpace.full_real(1), np.array([[1 + 2j]])) == pytest.approx(np.array([[1.0]]))


def test_sparsity_complex_example():
    S = StructureSpace.sparsity([(0, 0)], 2, real=False)
    P = S.project(np.array([[1 + 1j, 3], [4, 5]]))
    assert np.array_equal(P, np.array([[1 + 1j, 0], [0, 0]]))


def test_toeplitz_diagonal_means():
    S = StructureSpace.toeplitz_band(3, 1, 1)
    Z = np.zeros((3, 3), dtype=complex)
    Z[np.diag_indices(3)] = [1 + 1j, 3, 5]
    P = S.project(Z)
    assert np.allclose(np.diag(P), 3.0)
    assert np.allclose(P, ls_oracle(S, Z), atol=1e-12)


def test_membership_examples(grcar10):
    S = StructureSpace.full_real(1)
    assert membership_residual(S, np.array([[2.0]])) == 0
    assert membership_residual(S, np.array([[1j]])) == pytest.approx(1.0)
    assert StructureSpace.toeplitz_band(10, 1, 3).membership_residual(grcar10) < 1e-15


def test_real_dimension_matches_basis():
    rng = np.random.default_rng(0)
    for kind in KINDS:
        S = random_structure(kind, 4, rng)
        assert S.real_dimension == len(real_basis(S))


@pytest.mark.parametrize(
    "kind, kwargs",
    [
        ("sparsity-real", {"pattern": ((0, 0), (0, 0))}),
        ("sparsity-real", {"pattern": ((0, 3),)}),
        ("toeplitz-real", {"band": (3, 0)}),
        ("nonsense", {}),
    ],
)
def test_invalid_structures(kind, kwargs):
    with pytest.raises(ValueError):
        StructureSpace(kind, 3, **kwargs)


def test_shape_mismatch():
    with pytest.raises(DimensionMismatch):
        StructureSpace.full_real(3).project(np.eye(2))


def test_sparsity_of_sorts_pattern(grcar10):
    S = StructureSpace.sparsity_of(grcar10)
    assert list(S.pattern) == sorted(S.pattern)
    assert len(S.pattern) == 10 + 9 + 9 + 8 + 7


@given(cases)
def test_idempotent(case):
    S, rng = make(*case)
    Z = crandn(rng, S.dim, S.dim)
    P = S.project(Z)
    assert np.allclose(S.project(P), P, atol=1e-12)
    assert S.membership_residual(P) < 1e-12


@given(cases)
def test_self_adjoint(case):
    S, rng = make(*case)
    Z, W = crandn(rng, S.dim, S.dim), crandn(rng, S.dim, S.dim)
    assert rdot(S.project(Z), W) == pytest.approx(rdot(Z, S.project(W)), abs=1e-12 * (1 + abs(rdot(Z, W))))


@given(cases)
def test_characterizing_property(case):
    # Re<P Z, W> = Re<Z, W> for W in S
    S, rng = make(*case)
    Z = crandn(rng, S.dim, S.dim)
    W = S.project(crandn(rng, S.dim, S.dim))
    assert rdot(S.project(Z), W) == pytest.approx(rdot(Z, W), abs=1e-12 * S.dim**2)


@given(cases)
def test_contraction_and_pythagoras(case):
    S, rng = make(*case)
    Z = crandn(rng, S.dim, S.dim)
    P = S.project(Z)
    nz, np_, nr = (np.linalg.norm(X) for X in (Z, P, Z - P))
    assert np_ <= nz + 1e-12
    assert nz**2 == pytest.approx(np_**2 + nr**2, abs=1e-10)


@given(st.tuples(st.sampled_from(KINDS), st.integers(1, 4), st.integers(0, 2**32 - 1)))
def test_least_squares_oracle(case):
    S, rng = make(*case)
    Z = crandn(rng, S.dim, S.dim)
    assert np.allclose(S.project(Z), ls_oracle(S, Z), atol=1e-10)


@given(st.tuples(st.sampled_from(KINDS), st.integers(1, 4), st.integers(0, 2**32 - 1)))
def test_basis_structure_agrees(case):
    S, rng = make(*case)
    B = BasisStructure(real_basis(S), is_real=S.is_real)
    # a random invertible mix keeps the span but breaks orthogonality
    m = len(B.basis)
    mix = rng.standard_normal((m, m)) + 3 * np.eye(m)
    B2 = BasisStructure(np.tensordot(mix, B.basis, axes=1), is_real=S.is_real)
    Z = crandn(rng, S.dim, S.dim)
    assert np.allclose(B2.project(Z), S.project(Z), atol=1e-10)
    assert B2.real_dimension == S.real_dimension
