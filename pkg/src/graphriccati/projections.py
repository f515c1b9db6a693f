"""Spectral subspaces of B, the invariant graph subspace Q and graph operators.

For a block operator with ordered diagonal spectra the subspace

    Q = Ran E_B((-inf, lam))  (+)  (Ker(A0 - lam) & Ker V^H)

is B-invariant and is the graph ``{x (+) X x : x in H0}`` of a contraction
``X : H0 -> H1``.  This module builds Q, tests the graph property through
the dimensions of the canonical two-projection decomposition, and reads X
off an orthonormal basis of Q.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AmbientMismatch, DimensionMismatch, HypothesisViolated, NotAGraph
from .linalg import (
    DEFAULT_TOL,
    Subspace,
    as_matrix,
    eig_hermitian,
    intersect,
    kernel,
    opnorm,
    subspace_distance,
    svd,
)
from .model import assemble, validate


@dataclass(frozen=True)
class SpectralSplit:
    """Eigenvalues of B split at ``lam`` with a clustering window."""

    evals: np.ndarray
    below: Subspace
    at: Subspace
    above: Subspace
    window: float


def spectral_split(B, lam, tol=DEFAULT_TOL):
    B = as_matrix(B, "B")
    evals, evecs = eig_hermitian(B, tol)
    w = tol.eig_window(np.max(np.abs(evals)) if evals.size else 0.0)
    lo = evals < lam - w
    hi = evals > lam + w
    mid = ~(lo | hi)
    return SpectralSplit(evals, Subspace(evecs[:, lo]), Subspace(evecs[:, mid]), Subspace(evecs[:, hi]), w)


def spectral_subspace_below(B, lam, tol=DEFAULT_TOL):
    """Span of the eigenvectors of B with eigenvalue below ``lam - window``."""
    return spectral_split(B, lam, tol).below


def eigenspace_at(B, lam, tol=DEFAULT_TOL):
    """Span of the eigenvectors of B with eigenvalue within the window of ``lam``."""
    return spectral_split(B, lam, tol).at


@dataclass(frozen=True)
class KernelDecomposition:
    """``N0 = Ker(A0 - lam) & Ker V^H`` in H0 and ``N1 = Ker(A1 - lam) & Ker V`` in H1."""

    N0: Subspace
    N1: Subspace
    ker_A0: Subspace
    ker_A1: Subspace

    def __iter__(self):
        return iter((self.N0, self.N1))

    def embedded(self):
        """``N0 (+) N1`` inside H0 (+) H1."""
        n0, n1 = self.N0.ambient_dim, self.N1.ambient_dim
        return Subspace(np.hstack([self.N0.embed(0, n0 + n1).basis, self.N1.embed(n0, n0 + n1).basis]))


def require_hypothesis(op, tol=DEFAULT_TOL):
    report = validate(op, tol)
    if not report.hermitian_ok:
        raise HypothesisViolated("A0 and A1 must be Hermitian (block hypothesis)")
    if not report.ordering_ok:
        raise HypothesisViolated(
            f"spectral ordering fails at lambda={op.lam}: sup spec(A0)={report.sup_spec_A0:.6g}, "
            f"inf spec(A1)={report.inf_spec_A1:.6g} (block hypothesis requires "
            "sup spec(A0) <= lambda <= inf spec(A1))"
        )
    return report


def problem_scale(op):
    """``max(1, ||A0||, ||A1||, ||V||)``, cached on the operator."""
    s = op._cache.get("scale")
    if s is None:
        s = op._cache["scale"] = max(1.0, opnorm(op.A0), opnorm(op.A1), opnorm(op.V))
    return s


def block_kernels(op, tol=DEFAULT_TOL, scale=None):
    """Ker(A0 - lam) and Ker(A1 - lam), with the rank cutoff taken against the problem scale."""
    s = problem_scale(op) if scale is None else scale
    k0 = kernel(op.A0 - op.lam * np.eye(op.n0), tol, scale=s)
    k1 = kernel(op.A1 - op.lam * np.eye(op.n1), tol, scale=s)
    return k0, k1


def kernel_decomposition(op, tol=DEFAULT_TOL):
    require_hypothesis(op, tol)
    s = problem_scale(op)
    k0, k1 = block_kernels(op, tol, s)
    N0 = intersect(k0, kernel(op.V.conj().T, tol, scale=s), tol) if k0.dim else k0
    N1 = intersect(k1, kernel(op.V, tol, scale=s), tol) if k1.dim else k1
    return KernelDecomposition(N0, N1, k0, k1)


def build_Q(op, tol=DEFAULT_TOL, decomposition=None, split=None):
    """Orthonormal basis of the B-invariant graph subspace Q (dimension n0)."""
    if decomposition is None:
        decomposition = kernel_decomposition(op, tol)
    if split is None:
        split = spectral_split(assemble(op), op.lam, tol)
    N0 = decomposition.N0.embed(0, op.n0 + op.n1)
    below = split.below.basis
    count = op.n0 - N0.dim
    if below.shape[1] != count:
        # the window misplaced eigenvalues within tol of lambda; the count is
        # exact, so take the lowest `count` eigenvectors unless that would
        # cross an eigenvalue clearly on the wrong side of lambda
        ev = split.evals
        evecs = np.hstack([split.below.basis, split.at.basis, split.above.basis])
        w = split.window
        bad = count < 0 or count > ev.size
        bad = bad or (count > 0 and ev[count - 1] > op.lam + w)
        bad = bad or (count < ev.size and ev[count] < op.lam - w)
        if bad:
            raise DimensionMismatch(
                f"dim Q = {split.below.dim} + {N0.dim} != n0 = {op.n0}; "
                "eigenvalues of B near lambda were clustered inconsistently"
            )
        below = evecs[:, :count]
    # the two pieces are orthogonal in exact arithmetic; reorthonormalize
    Qb, _ = np.linalg.qr(np.hstack([below, N0.basis]))
    return Subspace(Qb)


@dataclass(frozen=True)
class TwoProjectionGeometry:
    dim_M00: int
    dim_M01: int
    dim_M10: int
    dim_M11: int
    dim_Mprime: int
    norm_P_minus_Q: float

    def as_dict(self):
        return dict(self.__dict__)


def two_projection_geometry(S_P, S_Q, tol=DEFAULT_TOL):
    """Dimensions of the pieces ``M_pq = Ran P^p & Ran Q^q`` and ``||P - Q||``.

    Here ``P^1 = P`` and ``P^0 = I - P``; ``M'`` is what is left over.
    """
    if S_P.ambient_dim != S_Q.ambient_dim:
        raise AmbientMismatch("subspaces live in different spaces")
    Pc, Qc = S_P.complement(), S_Q.complement()
    m11 = intersect(S_P, S_Q, tol).dim
    m10 = intersect(S_P, Qc, tol).dim
    m01 = intersect(Pc, S_Q, tol).dim
    m00 = intersect(Pc, Qc, tol).dim
    rest = S_P.ambient_dim - (m00 + m01 + m10 + m11)
    diff = opnorm(S_P.projector() - S_Q.projector())
    return TwoProjectionGeometry(m00, m01, m10, m11, rest, min(1.0, diff))


@dataclass(frozen=True)
class GraphOperator:
    """``X`` with ``graph(X) = S_Q`` and the condition number of the top block."""

    X: np.ndarray
    cond: float


def graph_extract(S_Q, n0, tol=DEFAULT_TOL):
    """Write ``S_Q`` as ``{x (+) X x}``; raises NotAGraph if impossible.

    With the basis split into rows ``[Z0; Z1]`` the operator is
    ``X = Z1 Z0^{-1}``.  Z0 is inverted through its SVD and is declared
    singular once its condition number exceeds ``1 / tol_rank``.
    """
    if S_Q.dim != n0:
        raise DimensionMismatch(f"subspace has dimension {S_Q.dim}, expected n0 = {n0}")
    if S_Q.ambient_dim < n0:
        raise DimensionMismatch("ambient space smaller than n0")
    Z0 = S_Q.basis[:n0]
    Z1 = S_Q.basis[n0:]
    if n0 == 0:
        return GraphOperator(np.zeros((S_Q.ambient_dim, 0), complex), 1.0)
    U, s, W = svd(Z0)
    if s[-1] <= tol.tol_rank * s[0]:
        raise NotAGraph(
            "subspace meets the complement of H0 (or its orthocomplement meets H0); "
            "it is not the graph of a bounded operator"
        )
    X = ((Z1 @ W) / s) @ U.conj().T
    return GraphOperator(X, float(s[0] / s[-1]))


def graph_subspace(X):
    """Orthonormal basis of ``{x (+) X x : x in H0}``."""
    X = as_matrix(X, "X")
    n1, n0 = X.shape
    G = np.vstack([np.eye(n0), X])
    Qb, _ = np.linalg.qr(G)
    return Subspace(Qb)


@dataclass(frozen=True)
class NormRelations:
    norm_X: float
    norm_P_minus_Q: float
    angles: np.ndarray


def norm_relations(X):
    """``||X||``, ``||P - Q||`` for ``Q = graph(X)``, and the angles ``arctan s_i(X)``.

    ``||P - Q|| = ||X|| / sqrt(1 + ||X||^2)``, equivalently
    ``||X|| = ||P - Q|| / sqrt(1 - ||P - Q||^2)``.
    """
    X = as_matrix(X, "X")
    _, s, _ = svd(X)
    nx = float(s[0]) if s.size else 0.0
    return NormRelations(nx, nx / np.hypot(1.0, nx), np.sort(np.arctan(s)))


def kernel_crosscheck(op, decomposition, split=None, tol=DEFAULT_TOL):
    """Largest principal angle between ``N0 (+) N1`` and Ker(B - lam).

    Returns pi/2 when the dimensions differ.
    """
    if split is None:
        split = spectral_split(assemble(op), op.lam, tol)
    return subspace_distance(decomposition.embedded(), split.at)
