import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graphriccati.errors import DimensionMismatch, HypothesisViolated, NotAGraph
from graphriccati.linalg import Subspace, is_invariant, same_subspace, subspace_distance
from graphriccati.model import BlockOperator, GeneratorSpec, assemble, ensemble_specs, generate
from graphriccati.projections import (
    build_Q,
    eigenspace_at,
    graph_extract,
    graph_subspace,
    kernel_crosscheck,
    kernel_decomposition,
    norm_relations,
    spectral_subspace_below,
    two_projection_geometry,
)

from conftest import random_complex

SQ2 = np.sqrt(2)


def line(*v):
    return Subspace.span(np.array(v, dtype=complex).reshape(-1, 1))


class TestSpectralSubspaces:
    def test_diagonal(self):
        assert same_subspace(spectral_subspace_below(np.diag([-1.0, 1.0]), 0), line(1, 0))

    def test_two_by_two(self):
        # (B + sqrt2) v = 0  =>  v2 = (1 - sqrt2) v1
        S = spectral_subspace_below([[-1, 1], [1, 1]], 0)
        assert same_subspace(S, line(1, 1 - SQ2))
        assert is_invariant(np.array([[-1, 1], [1, 1.0]]), S)

    def test_zero(self):
        assert spectral_subspace_below(np.zeros((2, 2)), 0).dim == 0

    def test_at(self):
        assert same_subspace(eigenspace_at(np.diag([0.0, 1.0]), 0), line(1, 0))
        assert eigenspace_at([[0, 1], [1, 0]], 0).dim == 0
        assert eigenspace_at(np.zeros((2, 2)), 0).dim == 2


class TestKernelDecomposition:
    def test_touching_scalar(self, touching):
        dec = kernel_decomposition(touching)
        assert dec.N0.dim == 0 and dec.N1.dim == 0
        assert eigenspace_at(assemble(touching), 0).dim == 0

    def test_diagonal_with_zero_row(self):
        V = np.array([[0.7, 0.0], [0.0, 0.0]])
        op = BlockOperator(np.diag([-1.0, 0.0]), np.diag([1.0, 0.0]), V, 0)
        dec = kernel_decomposition(op)
        assert same_subspace(dec.N0, line(0, 1))
        assert same_subspace(dec.N1, line(0, 1))
        assert kernel_crosscheck(op, dec) <= 1e-7

    def test_zero_coupling(self):
        dec = kernel_decomposition(BlockOperator([[0]], [[0]], [[0]], 0))
        assert dec.N0.dim == 1 and dec.N1.dim == 1

    def test_hypothesis_violated(self):
        with pytest.raises(HypothesisViolated):
            kernel_decomposition(BlockOperator([[1]], [[0]], [[1]], 0))

    def test_crosscheck_on_coupled(self):
        for spec in ensemble_specs(40, 10, seed=3)[2::4]:
            op = generate(spec)
            assert kernel_crosscheck(op, kernel_decomposition(op)) <= 1e-7


class TestBuildQ:
    def test_sharp(self, sharp):
        assert same_subspace(build_Q(sharp), line(1, 1 - SQ2))

    def test_touching(self, touching):
        assert same_subspace(build_Q(touching), line(1, -1))

    def test_no_coupling(self):
        op = BlockOperator(np.diag([-1.0, 0.0]), np.diag([0.0, 2.0]), np.zeros((2, 2)), 0)
        Q = build_Q(op)
        assert same_subspace(Q, Subspace.full(2).embed(0, 4))

    def test_properties(self):
        for spec in ensemble_specs(24, 12, seed=8):
            op = generate(spec)
            Q = build_Q(op)
            assert Q.dim == op.n0
            assert is_invariant(assemble(op), Q)
            below = spectral_subspace_below(assemble(op), op.lam)
            assert np.linalg.norm(below.basis - Q.basis @ (Q.basis.conj().T @ below.basis)) < 1e-9

    def test_wide_window(self):
        # the window swallows both eigenvalues; the exact count still decides
        from graphriccati.linalg import Tolerances

        op = BlockOperator([[-1e-3]], [[1e-3]], [[1e-3]], 0)
        Q = build_Q(op, Tolerances(tol_eig=1e-2))
        assert same_subspace(Q, build_Q(op))

    def test_eigenvalue_inside_window(self):
        # lowest eigenvalue of B is about -1e-10, inside the default window
        op = BlockOperator([[0.0]], [[1.0]], [[1e-5]], 0)
        X = graph_extract(build_Q(op), 1).X
        assert X[0, 0] == pytest.approx((1 - np.sqrt(1 + 4e-10)) / 2e-5, abs=1e-12)

    def test_inconsistent_count(self):
        from graphriccati.projections import KernelDecomposition

        op = BlockOperator(np.diag([-1.0, -2.0]), [[1.0]], np.ones((2, 1)), 0)
        dec = kernel_decomposition(op)
        fake = KernelDecomposition(Subspace.full(2), dec.N1, dec.ker_A0, dec.ker_A1)
        with pytest.raises(DimensionMismatch):
            build_Q(op, decomposition=fake)


class TestGeometry:
    def test_equal(self):
        g = two_projection_geometry(line(1, 0), line(1, 0))
        assert (g.dim_M11, g.dim_M00, g.dim_M01, g.dim_M10, g.dim_Mprime) == (1, 1, 0, 0, 0)
        assert g.norm_P_minus_Q == pytest.approx(0, abs=1e-15)

    def test_swapped(self):
        g = two_projection_geometry(line(1, 0), line(0, 1))
        assert (g.dim_M10, g.dim_M01, g.dim_M11, g.dim_M00) == (1, 1, 0, 0)
        assert g.norm_P_minus_Q == pytest.approx(1)

    def test_generic(self):
        # ||P - Q|| = sin(pi/4) for lines at angle pi/4
        g = two_projection_geometry(line(1, 0), line(1, 1))
        assert (g.dim_M00, g.dim_M01, g.dim_M10, g.dim_M11, g.dim_Mprime) == (0, 0, 0, 0, 2)
        assert g.norm_P_minus_Q == pytest.approx(SQ2 / 2, abs=1e-15)

    def test_graph_criterion(self):
        for spec in ensemble_specs(20, 10, seed=11):
            op = generate(spec)
            H0 = Subspace.full(op.n0).embed(0, op.n0 + op.n1)
            g = two_projection_geometry(H0, build_Q(op))
            assert g.dim_M01 == 0 and g.dim_M10 == 0
            assert g.norm_P_minus_Q <= SQ2 / 2 + 1e-10


class TestGraphExtract:
    def test_h0(self):
        X = graph_extract(Subspace.full(2).embed(0, 3), 2).X
        np.testing.assert_allclose(X, np.zeros((1, 2)), atol=1e-15)

    def test_antidiagonal(self):
        # Z0 = 1/sqrt2, Z1 = -1/sqrt2
        np.testing.assert_allclose(graph_extract(line(1, -1), 1).X, [[-1]], atol=1e-15)

    def test_not_a_graph(self):
        with pytest.raises(NotAGraph):
            graph_extract(line(0, 1), 1)

    def test_wrong_dim(self):
        with pytest.raises(DimensionMismatch):
            graph_extract(Subspace.full(2), 1)

    def test_roundtrip(self):
        for spec in ensemble_specs(20, 10, seed=4):
            op = generate(spec)
            Q = build_Q(op)
            X = graph_extract(Q, op.n0).X
            assert subspace_distance(graph_subspace(X), Q) <= 1e-7


class TestNormRelations:
    def test_zero(self):
        r = norm_relations(np.zeros((2, 3)))
        assert r.norm_X == 0 and r.norm_P_minus_Q == 0
        assert np.all(r.angles == 0)

    def test_minus_one(self):
        r = norm_relations([[-1.0]])
        assert r.norm_X == pytest.approx(1)
        assert r.norm_P_minus_Q == pytest.approx(1 / SQ2, abs=1e-15)
        assert r.angles[0] == pytest.approx(np.pi / 4)

    def test_sharp_value(self):
        r = norm_relations([[1 - SQ2]])
        assert r.norm_X == pytest.approx(SQ2 - 1, abs=1e-15)
        # sin(pi/8)^2 = (2 - sqrt2) / 4
        assert r.norm_P_minus_Q == pytest.approx(np.sqrt((2 - SQ2) / 4), abs=1e-15)
        assert r.norm_P_minus_Q == pytest.approx(np.sin(np.pi / 8), abs=1e-15)

    @settings(max_examples=50, deadline=None)
    @given(m=st.integers(1, 32), n=st.integers(1, 32), scale=st.floats(0.0, 10.0), seed=st.integers(0, 2**32 - 1))
    def test_identities(self, m, n, scale, seed):
        X = scale * random_complex(np.random.default_rng(seed), m, n)
        r = norm_relations(X)
        pq, x = r.norm_P_minus_Q, r.norm_X
        assert abs(pq - x / np.sqrt(1 + x * x)) <= 1e-12 * max(pq, 1e-300)
        assert abs(x - pq / np.sqrt(1 - pq * pq)) <= 1e-12 * max(x, 1e-300) * (1 + x * x)
        assert np.all(np.diff(r.angles) >= 0)
        assert np.all((r.angles >= 0) & (r.angles < np.pi / 2))
        # the projection route gives the same number
        H0 = Subspace.full(n).embed(0, m + n)
        direct = np.linalg.norm(H0.projector() - graph_subspace(X).projector(), 2)
        assert direct == pytest.approx(pq, abs=1e-12)
