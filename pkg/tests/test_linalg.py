import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graphriccati.errors import AmbientMismatch, NonFinite, NonHermitian
from graphriccati.linalg import (
    Subspace,
    Tolerances,
    eig_hermitian,
    intersect,
    is_invariant,
    kernel,
    polar_isometry,
    principal_angles,
    same_subspace,
    svd,
)

from conftest import random_complex, random_hermitian

EPS = np.finfo(float).eps
e1, e2, e3 = np.eye(3)


def span(*vectors):
    return Subspace.span(np.column_stack(vectors))


class TestEig:
    def test_diagonal(self):
        w, U = eig_hermitian(np.diag([-1.0, 1.0]))
        np.testing.assert_allclose(w, [-1, 1])
        np.testing.assert_allclose(np.abs(U), np.eye(2))

    def test_two_by_two(self):
        # lambda^2 - 2 = 0
        w, _ = eig_hermitian([[-1, 1], [1, 1]])
        np.testing.assert_allclose(w, [-np.sqrt(2), np.sqrt(2)], atol=1e-15)

    def test_scalar(self):
        w, U = eig_hermitian([[3.5]])
        assert w.tolist() == [3.5]
        assert abs(U[0, 0]) == pytest.approx(1.0)

    def test_rejects_non_hermitian(self):
        with pytest.raises(NonHermitian):
            eig_hermitian([[0, 1], [0, 0]])

    def test_rejects_nan(self):
        with pytest.raises(NonFinite):
            eig_hermitian([[np.nan]])

    @settings(max_examples=40, deadline=None)
    @given(n=st.integers(1, 24), seed=st.integers(0, 2**32 - 1))
    def test_reassembly(self, n, seed):
        rng = np.random.default_rng(seed)
        M = random_hermitian(rng, n)
        w, U = eig_hermitian(M)
        norm = np.linalg.norm(M, 2)
        assert np.all(np.diff(w) >= 0)
        assert np.linalg.norm(U @ np.diag(w) @ U.conj().T - M, 2) <= 100 * n * EPS * norm
        assert np.max(np.abs(U.conj().T @ U - np.eye(n))) <= 1e-12


class TestSvd:
    def test_zero(self):
        _, s, _ = svd(np.zeros((2, 3)))
        assert np.all(s == 0)

    def test_imaginary_scalar(self):
        _, s, _ = svd([[2j]])
        assert s.tolist() == [2.0]

    def test_descending(self):
        U, s, W = svd([[3, 0], [0, 4]])
        assert s.tolist() == [4.0, 3.0]
        np.testing.assert_allclose(U @ np.diag(s) @ W.conj().T, [[3, 0], [0, 4]], atol=1e-15)


class TestPolar:
    def test_one(self):
        np.testing.assert_allclose(polar_isometry([[1.0]]), [[1.0]])

    def test_imaginary(self):
        # V^H = -2i = S * 2
        np.testing.assert_allclose(polar_isometry([[2j]]), [[-1j]], atol=1e-15)

    def test_zero(self):
        S = polar_isometry(np.zeros((2, 3)))
        assert S.shape == (3, 2)
        assert np.all(S == 0)

    @settings(max_examples=40, deadline=None)
    @given(m=st.integers(1, 16), n=st.integers(1, 16), r=st.integers(0, 16), seed=st.integers(0, 2**32 - 1))
    def test_partial_isometry(self, m, n, r, seed):
        rng = np.random.default_rng(seed)
        r = min(r, m, n)
        V = random_complex(rng, m, r) @ random_complex(rng, r, n)
        S = polar_isometry(V)
        tol = Tolerances()
        assert np.linalg.norm(S @ S.conj().T @ S - S, 2) <= tol.tol_rank * max(1.0, np.linalg.norm(S, 2))
        assert np.linalg.matrix_rank(S, tol=1e-8) == np.linalg.matrix_rank(V, tol=1e-8 * max(1, np.linalg.norm(V, 2)))
        w, U = np.linalg.eigh(V @ V.conj().T)
        root = (U * np.sqrt(np.clip(w, 0, None))) @ U.conj().T
        assert np.linalg.norm(V.conj().T - S @ root, 2) <= 1e-10 * max(1.0, np.linalg.norm(V, 2))


class TestKernel:
    def test_projector(self):
        K = kernel([[1, 0], [0, 0]])
        assert same_subspace(K, span(np.array([0, 1.0])))

    def test_zero_scalar(self):
        assert kernel([[0.0]]).dim == 1

    def test_rank_one(self):
        # eigenvector of eigenvalue 0
        K = kernel([[1, 1], [1, 1]])
        assert same_subspace(K, span(np.array([1, -1]) / np.sqrt(2)))

    def test_column_norms(self, rng):
        M = random_complex(rng, 5, 3) @ random_complex(rng, 3, 7)
        K = kernel(M)
        assert K.dim == 4
        smax = np.linalg.norm(M, 2)
        assert np.all(np.linalg.norm(M @ K.basis, axis=0) <= 2 * 1e-10 * smax)

    def test_scale_treats_roundoff_as_zero(self):
        tiny = np.array([[1e-17, 0], [0, 2e-17]])
        assert kernel(tiny).dim == 0
        assert kernel(tiny, scale=1.0).dim == 2


class TestIntersect:
    def test_same(self):
        assert same_subspace(intersect(span(e1), span(e1)), span(e1))

    def test_orthogonal(self):
        assert intersect(span(e1), span(e2)).dim == 0

    def test_plane_and_plane(self):
        got = intersect(span(e1, e2), span((e1 + e2) / np.sqrt(2), e3))
        assert same_subspace(got, span((e1 + e2) / np.sqrt(2)))

    def test_mismatch(self):
        with pytest.raises(AmbientMismatch):
            intersect(Subspace.full(2), Subspace.full(3))

    def test_counts_small_angles(self):
        t = 1e-9
        a = span(e1, e2)
        b = span(np.cos(t) * e1 + np.sin(t) * e3, e2 + 0.5 * e3)
        assert intersect(a, b).dim == 1

    @settings(max_examples=30, deadline=None)
    @given(n=st.integers(2, 10), seed=st.integers(0, 2**32 - 1))
    def test_matches_stacked_kernel(self, n, seed):
        rng = np.random.default_rng(seed)
        r1, r2 = rng.integers(0, n, size=2)
        # shared rows make the kernels overlap
        shared = random_complex(rng, int(rng.integers(0, n)), n)
        M1 = np.vstack([shared, random_complex(rng, int(r1), n)])
        M2 = np.vstack([shared, random_complex(rng, int(r2), n)])
        got = intersect(kernel(M1), kernel(M2))
        want = kernel(np.vstack([M1, M2]))
        assert got.dim == want.dim
        assert same_subspace(got, want)


class TestPrincipalAngles:
    def test_identical(self):
        S = span(e1, e2)
        np.testing.assert_allclose(principal_angles(S, S), [0, 0], atol=1e-7)

    def test_orthogonal(self):
        np.testing.assert_allclose(principal_angles(span(e1), span(e2)), [np.pi / 2])

    def test_quarter(self):
        # cos theta = 1/sqrt(2)
        np.testing.assert_allclose(principal_angles(span(e1), span(e1 + e2)), [np.pi / 4], atol=1e-15)

    @settings(max_examples=30, deadline=None)
    @given(n=st.integers(1, 12), seed=st.integers(0, 2**32 - 1))
    def test_symmetric(self, n, seed):
        rng = np.random.default_rng(seed)
        k1, k2 = rng.integers(1, n + 1, size=2)
        A = Subspace.span(random_complex(rng, n, int(k1)))
        B = Subspace.span(random_complex(rng, n, int(k2)))
        np.testing.assert_allclose(principal_angles(A, B), principal_angles(B, A), atol=1e-7)
        ang = principal_angles(A, B)
        assert np.all((ang >= 0) & (ang <= np.pi / 2))


class TestInvariant:
    def test_trivial(self, rng):
        assert is_invariant(random_complex(rng, 3, 3), Subspace.trivial(3))

    def test_diagonal(self):
        assert is_invariant(np.diag([1.0, 2.0]), Subspace(np.array([[1.0], [0.0]])))

    def test_swap(self):
        assert not is_invariant([[0, 1], [1, 0]], Subspace(np.array([[1.0], [0.0]])))

    def test_shape(self):
        with pytest.raises(AmbientMismatch):
            is_invariant(np.eye(3), Subspace.full(2))


class TestSubspace:
    def test_complement(self, rng):
        S = Subspace.span(random_complex(rng, 6, 2))
        C = S.complement()
        assert C.dim == 4
        assert np.linalg.norm(S.basis.conj().T @ C.basis) < 1e-14

    def test_tolerances_validated(self):
        with pytest.raises(ValueError):
            Tolerances(tol_rank=0)
        with pytest.raises(ValueError):
            Tolerances(tol_rank=1.5)
