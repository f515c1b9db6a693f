"""The contractive solution of ``A1 X - X A0 - X V X + V^H = 0`` and its structure.

The distinguished solution is read off the invariant graph subspace built in
:mod:`graphriccati.projections`; the Riccati equation itself only serves as a
residual check.  Where X attains norm one, the subspaces
``Ker(I - X^H X)`` and ``Ker(I - X X^H)`` have an intrinsic description
(``K0``, ``K1`` below) in terms of A0, A1 and V alone.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import AssertionFailure, InconsistentVerdict, NoKernelCoupling, ShapeMismatch
from .linalg import (
    DEFAULT_TOL,
    Subspace,
    as_matrix,
    eig_hermitian,
    intersect,
    invariance_defect,
    kernel,
    opnorm,
    polar_isometry,
    subspace_distance,
    svd,
)
from .model import assemble
from .projections import (
    block_kernels,
    build_Q,
    graph_extract,
    kernel_decomposition,
    problem_scale,
    require_hypothesis,
    spectral_split,
)


def residual(op, X):
    """Spectral norm of ``A1 X - X A0 - X V X + V^H``."""
    X = as_matrix(X, "X")
    if X.shape != (op.n1, op.n0):
        raise ShapeMismatch(f"X must be {op.n1}x{op.n0}, got {X.shape}")
    R = op.A1 @ X - X @ op.A0 - X @ op.V @ X + op.V.conj().T
    return opnorm(R)


@dataclass(frozen=True)
class GraphSolution:
    X: np.ndarray = field(repr=False)
    singular_values: np.ndarray = field(repr=False)
    norm: float
    residual: float
    mu1_multiplicity: int
    provenance: str
    cond: float = 1.0
    Q: Subspace | None = field(default=None, repr=False)
    warnings: tuple = ()

    @property
    def strictly_contractive(self):
        return self.mu1_multiplicity == 0


def _solution(op, X, provenance, tol, cond=1.0, Q=None, warnings=()):
    _, s, _ = svd(X)
    mu1 = int(np.count_nonzero(np.abs(s - 1.0) <= tol.tol_mu1))
    return GraphSolution(
        X=X,
        singular_values=s,
        norm=float(s[0]) if s.size else 0.0,
        residual=residual(op, X),
        mu1_multiplicity=mu1,
        provenance=provenance,
        cond=cond,
        Q=Q,
        warnings=tuple(warnings),
    )


def solve(op, tol=DEFAULT_TOL, decomposition=None, split=None):
    """The contraction X whose graph is the invariant subspace Q."""
    if decomposition is None:
        decomposition = kernel_decomposition(op, tol)
    if split is None:
        split = spectral_split(assemble(op), op.lam, tol)
    Q = build_Q(op, tol, decomposition, split)
    g = graph_extract(Q, op.n0, tol)
    return _solution(op, g.X, "FromQ", tol, cond=g.cond, Q=Q)


def norm_one_subspaces(X, tol=DEFAULT_TOL):
    """``Ker(I - X^H X)`` in H0 and ``Ker(I - X X^H)`` in H1.

    Read off the SVD: right/left singular vectors whose singular value is
    within ``tol_mu1`` of one.
    """
    X = as_matrix(X, "X")
    U, s, W = svd(X)
    hit = np.abs(s - 1.0) <= tol.tol_mu1
    return Subspace(W[:, hit]), Subspace(U[:, hit])


# --- K0 / K1 -----------------------------------------------------------------


def _range(M, tol):
    U, s, _ = svd(M)
    if s.size == 0 or s[0] == 0:
        return Subspace.trivial(M.shape[0])
    return Subspace(U[:, s > tol.tol_rank * s[0]])


def _admissible(op, tol, side):
    """Largest subspace satisfying the static conditions on K0 (side 0) or K1 (side 1).

    For side 0: ``Ker(A0 - lam) & Ran V & {x : V^H x in Ker(A1 - lam)}``.
    """
    k0, k1 = block_kernels(op, tol)
    s = problem_scale(op)
    if side == 0:
        W, own, other = op.V, k0, k1
    else:
        W, own, other = op.V.conj().T, k1, k0
    # x with W^H x in `other`
    lift = W.conj().T
    outside = np.eye(other.ambient_dim) - other.projector()
    pre = kernel(outside @ lift, tol, scale=s)
    return intersect(intersect(own, _range(W, tol), tol), pre, tol)


def _largest_invariant(M, start, tol, scale):
    """Largest M-invariant subspace of ``start`` by shrinking to a fixed point.

    ``K <- {x in K : M x in K}`` until the dimension stops changing; at most
    ``dim start`` rounds since every proper step loses a dimension.
    """
    K = start
    for _ in range(start.dim + 1):
        if K.dim == 0:
            return K
        B = K.basis
        image = M @ B
        leak = image - B @ (B.conj().T @ image)
        c = kernel(leak, tol, scale=scale)
        if c.dim == K.dim:
            return K
        K = Subspace(B @ c.basis)
    return K


def compute_K0_K1(op, tol=DEFAULT_TOL):
    """Maximal ``V V^H``-invariant K0 in H0 and ``V^H V``-invariant K1 in H1.

    K0 is the largest ``V V^H``-invariant subspace inside
    ``Ker(A0 - lam) & Ran V`` whose image under ``V^H`` lies in
    ``Ker(A1 - lam)``; K1 is defined with the roles of the blocks exchanged.
    """
    require_hypothesis(op, tol)
    VV = op.V @ op.V.conj().T
    WW = op.V.conj().T @ op.V
    scale = max(opnorm(VV), 1e-300)
    K0 = _largest_invariant(VV, _admissible(op, tol, 0), tol, scale)
    K1 = _largest_invariant(WW, _admissible(op, tol, 1), tol, scale)
    return K0, K1


def k0_brute_force(op, tol=DEFAULT_TOL):
    """Independent K0 oracle built from the eigenspaces of ``V V^H``.

    Any ``V V^H``-invariant subspace is the direct sum of its intersections
    with the eigenspaces of ``V V^H``.  So the largest invariant subspace of
    the admissible set W0 is the sum over eigenvalue clusters mu of
    ``E_mu & W0``.  Each piece is checked for invariance before it is kept.
    Intended for small dimensions.
    """
    VV = op.V @ op.V.conj().T
    W0 = _admissible(op, tol, 0)
    if W0.dim == 0:
        return W0
    evals, evecs = eig_hermitian(VV, tol)
    window = tol.eig_window(abs(evals).max() if evals.size else 0.0)
    scale = max(opnorm(VV), 1e-300)
    pieces = []
    start = 0
    for i in range(1, len(evals) + 1):
        if i == len(evals) or evals[i] - evals[i - 1] > window:
            L = intersect(Subspace(evecs[:, start:i]), W0, tol)
            if L.dim and invariance_defect(VV, L) <= tol.tol_rank * scale:
                pieces.append(L.basis)
            start = i
    if not pieces:
        return Subspace.trivial(op.n0)
    return Subspace.span(np.hstack(pieces), tol)


def K_relation_checks(op, K0, K1, tol=DEFAULT_TOL):
    """Angles (radians) measuring the relations between K0, K1 and V.

    ``closure(V^H K0) = K1``, ``closure(V K1) = K0``; and V^H, V map the
    orthogonal complements of K0, K1 into each other's complements (given
    as the sine of the worst leak).
    """
    out = {}
    out["VhK0_eq_K1"] = subspace_distance(Subspace.span(op.V.conj().T @ K0.basis, tol), K1) if K0.dim else (0.0 if K1.dim == 0 else np.pi / 2)
    out["VK1_eq_K0"] = subspace_distance(Subspace.span(op.V @ K1.basis, tol), K0) if K1.dim else (0.0 if K0.dim == 0 else np.pi / 2)
    vn = max(opnorm(op.V), 1e-300)
    C0, C1 = K0.complement(), K1.complement()
    out["Vh_complement"] = opnorm(K1.basis.conj().T @ op.V.conj().T @ C0.basis) / vn if K1.dim and C0.dim else 0.0
    out["V_complement"] = opnorm(K0.basis.conj().T @ op.V @ C1.basis) / vn if K0.dim and C1.dim else 0.0
    return out


@dataclass(frozen=True)
class CheckReport:
    """Named clause -> (measured defect, passed)."""

    clauses: dict

    @property
    def ok(self):
        return all(ok for _, ok in self.clauses.values())

    def failed(self):
        return [name for name, (_, ok) in self.clauses.items() if not ok]

    def as_dict(self):
        return {k: {"value": float(v), "ok": bool(ok)} for k, (v, ok) in self.clauses.items()}


def _finish(clauses, check):
    rep = CheckReport(clauses)
    if check and not rep.ok:
        name = rep.failed()[0]
        raise AssertionFailure(name, f"defect {clauses[name][0]:.3e}")
    return rep


def verify_norm_attaining(op, sol, K0, K1, tol=DEFAULT_TOL, check_tol=1e-8, check=True):
    """Check that X attains its norm exactly on K0 and acts there as ``-S``.

    Clauses:
      ker_I_XhX_eq_K0, ker_I_XXh_eq_K1 -- subspace angles;
      X_plus_S_on_K0 -- ``||(X + S) basis_K0||`` with S the polar isometry of V;
      XK0_eq_K1 -- angle between ``X K0`` and K1.
    """
    E0, E1 = norm_one_subspaces(sol.X, tol)
    S = polar_isometry(op.V, tol)
    d_E0 = subspace_distance(E0, K0)
    d_E1 = subspace_distance(E1, K1)
    xs = opnorm((sol.X + S) @ K0.basis) if K0.dim else 0.0
    if K0.dim:
        xk = subspace_distance(Subspace.span(sol.X @ K0.basis, tol), K1)
    else:
        xk = 0.0 if K1.dim == 0 else np.pi / 2
    clauses = {
        "ker_I_XhX_eq_K0": (d_E0, d_E0 <= tol.tol_sub),
        "ker_I_XXh_eq_K1": (d_E1, d_E1 <= tol.tol_sub),
        "X_plus_S_on_K0": (xs, xs <= check_tol),
        "XK0_eq_K1": (xk, xk <= tol.tol_sub),
    }
    return _finish(clauses, check)


def kernel_side_checks(op, sol, tol=DEFAULT_TOL, check_tol=1e-8, check=True):
    """Inclusions and reductions on ``E0 = Ker(I - X^H X)`` and ``E1 = Ker(I - X X^H)``.

    On E0: E0 in Ker(A0 - lam); X E0 in Ker(A1 - lam); ``X V X = V^H``;
    E0 reduces ``V X`` and ``V V^H``.  The mirror clauses on E1 use X^H.
    Defects are absolute, scaled by ``max(1, ||B||)`` before comparison.
    """
    X, V = sol.X, op.V
    Xh, Vh = X.conj().T, V.conj().T
    E0, E1 = norm_one_subspaces(X, tol)
    lim = check_tol * problem_scale(op)
    I0, I1 = np.eye(op.n0), np.eye(op.n1)
    A0l, A1l = op.A0 - op.lam * I0, op.A1 - op.lam * I1

    def on(M, E):
        return opnorm(M @ E.basis) if E.dim else 0.0

    def reduces(M, E):
        # invariant under M and M^H
        return max(invariance_defect(M, E), invariance_defect(M.conj().T, E))

    values = {
        "E0_in_ker_A0": on(A0l, E0),
        "XE0_in_ker_A1": on(A1l @ X, E0),
        "XVX_eq_Vh_on_E0": on(X @ V @ X - Vh, E0),
        "E0_reduces_VX": reduces(V @ X, E0),
        "E0_reduces_VVh": reduces(V @ Vh, E0),
        "E1_in_ker_A1": on(A1l, E1),
        "XhE1_in_ker_A0": on(A0l @ Xh, E1),
        "XhVhXh_eq_V_on_E1": on(Xh @ Vh @ Xh - V, E1),
        "E1_reduces_VhXh": reduces(Vh @ Xh, E1),
        "E1_reduces_VhV": reduces(Vh @ V, E1),
    }
    return _finish({k: (v, v <= lim) for k, v in values.items()}, check)


# --- uniqueness ----------------------------------------------------------------


@dataclass(frozen=True)
class UniquenessVerdict:
    condition_i: bool
    condition_ii: bool
    unique: bool
    strictly_contractive: bool
    isolated: bool

    def as_dict(self):
        return dict(self.__dict__)


def classify_uniqueness(op, sol, K0, tol=DEFAULT_TOL, decomposition=None):
    """Decide whether ``sol.X`` is the only contractive solution.

    It is unique iff one of N0, N1 is trivial and K0 is trivial; it is an
    isolated solution iff one of N0, N1 is trivial.  Raises
    InconsistentVerdict if the norm-one multiplicity of X disagrees with
    ``dim K0`` in a way that changes the answer.
    """
    if decomposition is None:
        decomposition = kernel_decomposition(op, tol)
    cond_i = decomposition.N0.dim == 0 or decomposition.N1.dim == 0
    cond_ii = K0.dim == 0
    unique = cond_i and cond_ii
    strict = sol.mu1_multiplicity == 0
    if unique != (strict and cond_i):
        raise InconsistentVerdict(
            f"dim K0 = {K0.dim} but X has {sol.mu1_multiplicity} singular values at 1"
        )
    return UniquenessVerdict(cond_i, cond_ii, unique, strict, cond_i)


def family_member(op, sol, T, tol=DEFAULT_TOL, decomposition=None):
    """Another solution: X on the complement of N0, and T from N0 into N1.

    ``T`` is a ``dim N1 x dim N0`` matrix in the orthonormal bases of N1 and
    N0 held by ``decomposition`` (computed if not given).  The result
    is contractive when ``||T|| <= 1``; otherwise a warning is attached.
    """
    if decomposition is None:
        decomposition = kernel_decomposition(op, tol)
    N0, N1 = decomposition.N0, decomposition.N1
    if N0.dim == 0 or N1.dim == 0:
        raise NoKernelCoupling("family needs both N0 and N1 nontrivial")
    T = as_matrix(T, "T")
    if T.shape != (N1.dim, N0.dim):
        raise ShapeMismatch(f"T must be {N1.dim}x{N0.dim}, got {T.shape}")
    B0, B1 = N0.basis, N1.basis
    Xt = sol.X @ (np.eye(op.n0) - B0 @ B0.conj().T) + B1 @ T @ B0.conj().T
    warnings = ("NonContraction",) if opnorm(T) > 1 + tol.tol_mu1 else ()
    return _solution(op, Xt, "Family", tol, warnings=warnings)
