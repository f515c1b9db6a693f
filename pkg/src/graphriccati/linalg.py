"""Dense complex linear algebra: eigen/singular decompositions and subspaces.

Everything here works on ``numpy`` complex arrays.  Real input is promoted
to complex.  Subspaces are carried as matrices with orthonormal columns.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import AmbientMismatch, NonFinite, NonHermitian


@dataclass(frozen=True)
class Tolerances:
    """Numerical cutoffs used throughout the package.

    tol_rank
        relative singular value cutoff for rank and kernel decisions
    tol_eig
        eigenvalue clustering width; the effective window is
        ``tol_eig * max(1, ||B||)``
    tol_orth
        slack allowed in orthonormality and Hermitian symmetry checks
    tol_sub
        largest principal angle (radians) at which two subspaces are equal
    tol_res
        Riccati residual allowed, relative to ``||B||``
    tol_mu1
        a singular value s of X counts as 1 when ``|s - 1| <= tol_mu1``
    """

    tol_rank: float = 1e-10
    tol_eig: float = 1e-8
    tol_orth: float = 1e-12
    tol_sub: float = 1e-7
    tol_res: float = 1e-10
    tol_mu1: float = 1e-8

    def __post_init__(self):
        for name in ("tol_rank", "tol_eig", "tol_orth", "tol_sub", "tol_res", "tol_mu1"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be strictly positive, got {value!r}")
        if self.tol_rank >= 1:
            raise ValueError("tol_rank must be < 1")

    def eig_window(self, scale):
        return self.tol_eig * max(1.0, float(scale))

    def as_dict(self):
        return {
            "tol_rank": self.tol_rank,
            "tol_eig": self.tol_eig,
            "tol_orth": self.tol_orth,
            "tol_sub": self.tol_sub,
            "tol_res": self.tol_res,
            "tol_mu1": self.tol_mu1,
        }


DEFAULT_TOL = Tolerances()


def as_matrix(M, name="matrix"):
    """Return ``M`` as a finite 2-d complex array (copying)."""
    A = np.array(M, dtype=complex)
    if A.ndim == 0:
        A = A.reshape(1, 1)
    if A.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise NonFinite(f"{name} has non-finite entries")
    return A


def opnorm(M):
    """Spectral norm; 0 for empty matrices."""
    M = np.asarray(M)
    if M.size == 0:
        return 0.0
    if M.shape[0] == 1 or M.shape[1] == 1:
        return float(np.sqrt(np.sum(np.abs(M) ** 2)))
    return float(np.linalg.svd(M, compute_uv=False)[0])


def _check_hermitian(M, tol_orth):
    scale = max(float(np.max(np.abs(M))), 1.0) if M.size else 1.0
    if M.shape[0] != M.shape[1]:
        raise NonHermitian(f"matrix is not square: {M.shape}")
    if M.size and np.max(np.abs(M - M.conj().T)) > tol_orth * scale:
        raise NonHermitian("matrix is not Hermitian within tol_orth")


def eig_hermitian(M, tol=DEFAULT_TOL):
    """Eigenvalues (ascending) and unitary eigenvector matrix of Hermitian ``M``."""
    M = as_matrix(M)
    _check_hermitian(M, tol.tol_orth)
    # symmetrize so LAPACK sees exactly Hermitian data
    evals, evecs = np.linalg.eigh(0.5 * (M + M.conj().T))
    return evals, evecs


def svd(M):
    """Thin SVD ``M = U @ diag(sigma) @ W^H`` with sigma descending."""
    M = as_matrix(M)
    m, n = M.shape
    if m == 0 or n == 0:
        k = min(m, n)
        return np.zeros((m, k), complex), np.zeros(k), np.zeros((n, k), complex)
    U, s, Wh = np.linalg.svd(M, full_matrices=False)
    return U, s, Wh.conj().T


def numerical_rank(sigma, tol_rank, scale=None):
    if sigma.size == 0:
        return 0
    ref = sigma[0] if scale is None else max(float(scale), sigma[0])
    return int(np.count_nonzero(sigma > tol_rank * ref))


def polar_isometry(V, tol=DEFAULT_TOL):
    """Partial isometry ``S`` with ``V^H = S (V V^H)^{1/2}``.

    ``V`` maps H1 -> H0 (shape n0 x n1); ``S`` maps H0 -> H1 (shape n1 x n0),
    with initial space Ran V and final space Ran V^H.
    """
    V = as_matrix(V, "V")
    U, s, W = svd(V)
    r = numerical_rank(s, tol.tol_rank)
    return W[:, :r] @ U[:, :r].conj().T


@dataclass(frozen=True)
class Subspace:
    """Closed subspace of C^n held as an orthonormal basis (n x k)."""

    basis: np.ndarray = field(repr=False)

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=complex)
        if b.ndim != 2:
            raise ValueError("basis must be 2-dimensional")
        if b.shape[1] > b.shape[0]:
            raise ValueError("more basis vectors than ambient dimension")
        b = b.copy()
        b.flags.writeable = False
        object.__setattr__(self, "basis", b)

    @classmethod
    def trivial(cls, ambient_dim):
        return cls(np.zeros((ambient_dim, 0), complex))

    @classmethod
    def full(cls, ambient_dim):
        return cls(np.eye(ambient_dim, dtype=complex))

    @classmethod
    def span(cls, vectors, tol=DEFAULT_TOL):
        """Orthonormal basis of the column span of ``vectors``."""
        A = as_matrix(vectors, "vectors")
        U, s, _ = svd(A)
        return cls(U[:, : numerical_rank(s, tol.tol_rank)])

    @property
    def ambient_dim(self):
        return self.basis.shape[0]

    @property
    def dim(self):
        return self.basis.shape[1]

    def projector(self):
        return self.basis @ self.basis.conj().T

    def complement(self):
        """Orthogonal complement, as a new Subspace."""
        n, k = self.basis.shape
        if k == 0:
            return Subspace.full(n)
        Q, _ = np.linalg.qr(self.basis, mode="complete")
        # the first k columns of Q span the same space as basis
        return Subspace(Q[:, k:])

    def orthonormality_error(self):
        if self.dim == 0:
            return 0.0
        G = self.basis.conj().T @ self.basis
        return float(np.max(np.abs(G - np.eye(self.dim))))

    def embed(self, offset, ambient_dim):
        """Embed into a larger space, placing coordinates at ``offset``."""
        b = np.zeros((ambient_dim, self.dim), complex)
        b[offset : offset + self.ambient_dim] = self.basis
        return Subspace(b)

    def __add__(self, other):
        _same_ambient(self, other)
        return Subspace.span(np.hstack([self.basis, other.basis]))


def _same_ambient(S1, S2):
    if S1.ambient_dim != S2.ambient_dim:
        raise AmbientMismatch(f"ambient dimensions differ: {S1.ambient_dim} vs {S2.ambient_dim}")


def kernel(M, tol=DEFAULT_TOL, scale=None):
    """Numerical kernel of ``M`` as a Subspace.

    Right singular vectors with ``sigma <= tol_rank * ref`` span the result,
    where ``ref`` is the largest singular value, or ``max(sigma_max, scale)``
    when ``scale`` is given.  Pass ``scale`` whenever ``M`` may be a
    round-off-sized residue of an exactly zero operator.
    """
    M = as_matrix(M)
    m, n = M.shape
    if n == 0:
        return Subspace.trivial(0)
    if m == 0:
        return Subspace.full(n)
    _, s, Wh = np.linalg.svd(M, full_matrices=True)
    r = numerical_rank(s, tol.tol_rank, scale)
    return Subspace(Wh[r:].conj().T)


def intersect(S1, S2, tol=DEFAULT_TOL):
    """Intersection of two subspaces.

    Vectors annihilated by both complementary projections are found from one
    SVD of the stacked matrix ``[I - P1; I - P2]``.  Its squared singular
    values are ``1 - cos(theta)`` for each principal angle theta, so the
    cutoff ``sqrt(2) sin(tol_sub / 2)`` keeps exactly the angles below
    ``tol_sub``.
    """
    _same_ambient(S1, S2)
    n = S1.ambient_dim
    if S1.dim == 0 or S2.dim == 0:
        return Subspace.trivial(n)
    eye = np.eye(n)
    stacked = np.vstack([eye - S1.projector(), eye - S2.projector()])
    _, s, Wh = np.linalg.svd(stacked, full_matrices=False)
    cutoff = np.sqrt(2.0) * np.sin(tol.tol_sub / 2)
    keep = s <= cutoff
    return Subspace(Wh[keep].conj().T)


def principal_angles(S1, S2):
    """Principal angles in [0, pi/2], ascending; ``min(dim1, dim2)`` of them."""
    _same_ambient(S1, S2)
    if S1.dim == 0 or S2.dim == 0:
        return np.zeros(0)
    c = np.linalg.svd(S1.basis.conj().T @ S2.basis, compute_uv=False)
    return np.sort(np.arccos(np.clip(c, 0.0, 1.0)))


def subspace_distance(S1, S2):
    """Largest principal angle, or pi/2 when the dimensions differ."""
    if S1.dim != S2.dim:
        return np.pi / 2
    angles = principal_angles(S1, S2)
    return float(angles.max()) if angles.size else 0.0


def same_subspace(S1, S2, tol=DEFAULT_TOL):
    return subspace_distance(S1, S2) <= tol.tol_sub


def is_invariant(M, S, tol=DEFAULT_TOL):
    """True iff ``||(I - P_S) M basis_S|| <= tol_rank ||M||``."""
    M = as_matrix(M)
    if M.shape != (S.ambient_dim, S.ambient_dim):
        raise AmbientMismatch(f"operator shape {M.shape} vs ambient {S.ambient_dim}")
    return invariance_defect(M, S) <= tol.tol_rank * opnorm(M)


def invariance_defect(M, S):
    """``||(I - P_S) M basis_S||``, 0 for the trivial subspace."""
    if S.dim == 0:
        return 0.0
    image = M @ S.basis
    return opnorm(image - S.basis @ (S.basis.conj().T @ image))
