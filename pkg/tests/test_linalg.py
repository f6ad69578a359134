import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qprobe.errors import NumericalPreconditionError
from qprobe.linalg import (
    IDENTITY_2 as I2,
    SIGMA_X as X,
    SIGMA_Y as Y,
    SIGMA_Z as Z,
    MatrixSpan,
    ad_power,
    commutator,
    dft_matrix,
    kron,
    propagator,
    span_extend,
)

from conftest import random_hermitian


def brute_kron(a, b):
    ra, ca = a.shape
    rb, cb = b.shape
    out = np.zeros((ra * rb, ca * cb), dtype=complex)
    for i in range(ra):
        for j in range(ca):
            for k in range(rb):
                for l in range(cb):
                    out[i * rb + k, j * cb + l] = a[i, j] * b[k, l]
    return out


def rand_matrix(rng, r, c=None):
    c = r if c is None else c
    return rng.normal(size=(r, c)) + 1j * rng.normal(size=(r, c))


class TestKron:
    def test_identity(self):
        np.testing.assert_array_equal(kron(I2, I2), np.eye(4))

    def test_pauli_z(self):
        np.testing.assert_array_equal(kron(Z, I2), np.diag([1, 1, -1, -1]))

    def test_matches_elementwise_definition(self, rng):
        a, b = rand_matrix(rng, 2, 3), rand_matrix(rng, 3, 2)
        np.testing.assert_allclose(kron(a, b), brute_kron(a, b), atol=1e-14)

    def test_mixed_product(self, rng):
        a, b, c, d = (rand_matrix(rng, 2) for _ in range(4))
        lhs = brute_kron(a, b) @ brute_kron(c, d)
        np.testing.assert_allclose(kron(a @ c, b @ d), lhs, atol=1e-12)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(1, 4), st.integers(1, 4), st.integers(1, 4), st.integers(0, 2**32 - 1))
    def test_associative(self, da, db, dc, seed):
        rng = np.random.default_rng(seed)
        a, b, c = rand_matrix(rng, da), rand_matrix(rng, db), rand_matrix(rng, dc)
        np.testing.assert_allclose(kron(kron(a, b), c), kron(a, kron(b, c)), atol=1e-12)


class TestCommutator:
    def test_pauli(self):
        np.testing.assert_allclose(commutator(X, Y), 2j * Z)

    def test_self(self, rng):
        a = rand_matrix(rng, 3)
        np.testing.assert_array_equal(commutator(a, a), np.zeros((3, 3)))

    def test_diagonal_with_sigma_x(self):
        np.testing.assert_allclose(commutator(np.diag([1, 2]), X), [[0, -1], [1, 0]])

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            commutator(np.eye(2), np.eye(3))

    @settings(max_examples=30, deadline=None)
    @given(st.integers(1, 5), st.integers(0, 2**32 - 1))
    def test_antisymmetric_bitwise(self, d, seed):
        rng = np.random.default_rng(seed)
        a, b = rand_matrix(rng, d), rand_matrix(rng, d)
        assert np.array_equal(commutator(a, b), -commutator(b, a))

    def test_jacobi(self, rng):
        for _ in range(20):
            a, b, c = (rand_matrix(rng, 4) for _ in range(3))
            total = commutator(a, commutator(b, c)) + commutator(b, commutator(c, a)) + commutator(c, commutator(a, b))
            assert np.linalg.norm(total) < 1e-10


class TestAdPower:
    def test_zeroth(self, rng):
        c = rand_matrix(rng, 3)
        np.testing.assert_array_equal(ad_power(rand_matrix(rng, 3), c, 0), c)

    def test_first(self):
        np.testing.assert_allclose(ad_power(Z, X, 1), 2j * Y)

    def test_second(self):
        # [Z, [Z, X]] = [Z, 2iY] = 2i(-2iX) = 4X
        np.testing.assert_allclose(ad_power(Z, X, 2), 4 * X)

    def test_matches_nested_commutators(self, rng):
        h, c = rand_matrix(rng, 3), rand_matrix(rng, 3)
        nested = c
        for _ in range(3):
            nested = h @ nested - nested @ h
        np.testing.assert_allclose(ad_power(h, c, 3), nested, atol=1e-10)

    def test_negative_power(self):
        with pytest.raises(ValueError):
            ad_power(X, X, -1)


class TestPropagator:
    def test_zero_time(self, rng):
        np.testing.assert_allclose(propagator(random_hermitian(rng, 4), 0.0), np.eye(4), atol=1e-14)

    def test_diagonal(self):
        np.testing.assert_allclose(propagator(Z, np.pi / 2), np.diag([-1j, 1j]), atol=1e-15)

    def test_unitary(self, rng):
        u = propagator(random_hermitian(rng, 8), 1.3)
        assert np.linalg.norm(u @ u.conj().T - np.eye(8)) < 1e-10

    def test_matches_taylor_series(self, rng):
        h = random_hermitian(rng, 3) * 0.3
        series = np.eye(3, dtype=complex)
        term = np.eye(3, dtype=complex)
        for k in range(1, 40):
            term = term @ (-1j * 0.7 * h) / k
            series = series + term
        np.testing.assert_allclose(propagator(h, 0.7), series, atol=1e-12)

    def test_group_property(self, rng):
        h = random_hermitian(rng, 5)
        np.testing.assert_allclose(propagator(h, 0.4) @ propagator(h, 1.1), propagator(h, 1.5), atol=1e-10)

    def test_rejects_non_hermitian(self):
        with pytest.raises(NumericalPreconditionError):
            propagator(np.array([[0, 1], [0, 0]]), 1.0)


class TestDft:
    def test_hadamard(self):
        np.testing.assert_allclose(dft_matrix(2), np.array([[1, 1], [1, -1]]) / np.sqrt(2), atol=1e-15)

    def test_entry(self):
        assert abs(dft_matrix(4)[1, 3] - (-0.5j)) < 1e-15

    @pytest.mark.parametrize("n", range(1, 17))
    def test_unitary_and_fourth_power(self, n):
        f = dft_matrix(n)
        assert np.linalg.norm(f @ f.conj().T - np.eye(n)) < 1e-10
        assert np.linalg.norm(np.linalg.matrix_power(f, 4) - np.eye(n)) < 1e-10

    @pytest.mark.parametrize("n", [3, 4, 5])
    def test_square_is_parity(self, n):
        parity = np.zeros((n, n))
        for k in range(n):
            parity[(-k) % n, k] = 1
        np.testing.assert_allclose(dft_matrix(n) @ dft_matrix(n), parity, atol=1e-12)


class TestSpan:
    def test_first_element(self):
        s, grew = span_extend(MatrixSpan(2), X)
        assert grew and len(s) == 1
        np.testing.assert_allclose(s.basis[0], X / np.sqrt(2))

    def test_dependent(self):
        s, _ = span_extend(MatrixSpan(2), X)
        s2, grew = span_extend(s, 3 * X)
        assert not grew and s2 is s

    def test_gram_schmidt(self):
        s, _ = span_extend(MatrixSpan(2), X)
        s, grew = span_extend(s, X + Y)
        assert grew and len(s) == 2
        np.testing.assert_allclose(s.basis[1], Y / np.sqrt(2), atol=1e-15)

    def test_idempotent(self, rng):
        s, _ = span_extend(MatrixSpan(3), rand_matrix(rng, 3))
        m = rand_matrix(rng, 3)
        s1, g1 = span_extend(s, m)
        s2, g2 = span_extend(s1, m)
        assert g1 and not g2 and len(s2) == 2

    def test_full_space_orthonormal(self, rng):
        s = MatrixSpan(3)
        for _ in range(12):
            s, _ = span_extend(s, rand_matrix(rng, 3))
        assert len(s) == 9
        assert np.linalg.norm(s.gram() - np.eye(9)) < 1e-10

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            span_extend(MatrixSpan(2), np.eye(3))
