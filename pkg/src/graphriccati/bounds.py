"""Two-sided estimates for ``||X||`` and ``||P - Q||`` and instance certification.

With ``d = dist(spec A0, spec A1)``, ``v = ||V||`` and ``delta`` the largest
outward shift of the spectral edges of ``A0 (+) A1`` caused by V::

    delta / v                  <=  ||X||      <=  tan(arctan(2 v / d) / 2)
    delta / sqrt(delta^2+v^2)  <=  ||P - Q||  <=  sin(arctan(2 v / d) / 2)

For ``d = 0`` the upper bounds fall back to 1 and ``sqrt(2)/2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import AssertionFailure, GraphRiccatiError, NegativeInput
from .linalg import DEFAULT_TOL, Subspace, invariance_defect, opnorm
from .model import assemble
from .projections import (
    kernel_crosscheck,
    kernel_decomposition,
    problem_scale,
    require_hypothesis,
    spectral_split,
    two_projection_geometry,
)
from .riccati import (
    K_relation_checks,
    classify_uniqueness,
    compute_K0_K1,
    kernel_side_checks,
    solve,
    verify_norm_attaining,
)

#: slack used for every inequality in the certification chain
CHAIN_SLACK = 1e-9


@dataclass(frozen=True)
class SpectralShift:
    delta_minus: float
    delta_plus: float
    delta: float
    notes: tuple = ()

    def __iter__(self):
        return iter((self.delta_minus, self.delta_plus, self.delta))


def spectral_shift(op, tol=DEFAULT_TOL, evals_B=None):
    """Outward shifts of the bottom and top of the spectrum under V.

    ``delta_minus = inf spec(A) - inf spec(B)`` and
    ``delta_plus = sup spec(B) - sup spec(A)`` with ``A = A0 (+) A1``.
    Both are nonnegative in exact arithmetic; values in ``(-tol, 0)`` are
    reported as 0 with a note, anything lower raises AssertionFailure.
    """
    val = require_hypothesis(op, tol)
    eA = np.concatenate([val.spec_A0, val.spec_A1])
    eB = np.linalg.eigvalsh(assemble(op)) if evals_B is None else evals_B
    lim = tol.eig_window(problem_scale(op))
    notes = []
    out = []
    for name, value in (("delta_minus", eA.min() - eB.min()), ("delta_plus", eB.max() - eA.max())):
        value = float(value)
        if value < -lim:
            raise AssertionFailure(name, f"negative spectral shift {value:.3e}")
        if value < 0:
            notes.append(f"{name} = {value:.3e} clamped to 0")
            value = 0.0
        out.append(value)
    return SpectralShift(out[0], out[1], max(out), tuple(notes))


def _check_nonneg(**kw):
    for k, v in kw.items():
        if not v >= 0:
            raise NegativeInput(f"{k} must be >= 0, got {v!r}")


def upper_bounds(d, vnorm):
    """``(tan(t/2), sin(t/2))`` with ``t = arctan(2 vnorm / d)``; ``(1, sqrt(2)/2)`` at d = 0."""
    _check_nonneg(d=d, vnorm=vnorm)
    if vnorm == 0:
        return 0.0, 0.0
    if d == 0:
        return 1.0, math.sqrt(2) / 2
    half = 0.5 * math.atan2(2 * vnorm, d)
    return math.tan(half), math.sin(half)


def lower_bounds(delta, vnorm):
    """``(delta / vnorm, delta / sqrt(delta^2 + vnorm^2))``; zero when ``vnorm == 0``."""
    if vnorm <= 0:
        return 0.0, 0.0
    delta = max(0.0, float(delta))
    return delta / vnorm, delta / math.hypot(delta, vnorm)


@dataclass
class CertificationReport:
    d: float
    delta_minus: float
    delta_plus: float
    delta: float
    vnorm: float
    norm_X: float
    norm_PQ: float
    upper_X: float
    upper_PQ: float
    lower_X: float
    lower_PQ: float
    mu1_multiplicity: int
    verdict: object
    gap_empty: bool
    all_pass: bool
    residual: float = 0.0
    norm_B: float = 0.0
    lam: float = 0.0
    n0: int = 0
    n1: int = 0
    dims: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    tolerances: dict = field(default_factory=dict)

    def failed(self):
        return [k for k, v in self.checks.items() if not v["ok"]]

    def as_dict(self):
        out = {}
        for k, v in self.__dict__.items():
            out[k] = v.as_dict() if hasattr(v, "as_dict") else v
        return out


def _chk(value, ok):
    return {"value": float(value), "ok": bool(ok)}


def certify(op, tol=DEFAULT_TOL, check_tol=1e-8):
    """Run every construction and check on one instance.

    Raises HypothesisViolated for inputs outside the ordered-spectra setting;
    numerical failures are recorded in ``checks`` and turn ``all_pass`` off.
    """
    val = require_hypothesis(op, tol)
    B = assemble(op)
    nB = opnorm(B)
    scale = max(1.0, nB)
    split = spectral_split(B, op.lam, tol)
    dec = kernel_decomposition(op, tol)
    sol = solve(op, tol, dec, split)
    K0, K1 = compute_K0_K1(op, tol)
    vnorm = opnorm(op.V)
    checks = {}
    notes = []

    # graph geometry of Q against H0, computed from the projections themselves
    H0 = Subspace.full(op.n0).embed(0, op.n0 + op.n1)
    geo = two_projection_geometry(H0, sol.Q, tol)
    norm_PQ = geo.norm_P_minus_Q
    norm_X = sol.norm
    checks["graph_M01_M10_trivial"] = _chk(geo.dim_M01 + geo.dim_M10, geo.dim_M01 == 0 and geo.dim_M10 == 0)
    pq_from_x = norm_X / math.hypot(1.0, norm_X)
    checks["norm_relation"] = _chk(abs(pq_from_x - norm_PQ), abs(pq_from_x - norm_PQ) <= 1e-10)

    qdef = invariance_defect(B, sol.Q)
    checks["Q_invariant"] = _chk(qdef, qdef <= tol.tol_rank * scale)
    checks["contraction"] = _chk(norm_X, norm_X <= 1 + tol.tol_mu1)
    checks["residual"] = _chk(sol.residual, sol.residual <= tol.tol_res * scale)
    leak0 = opnorm(sol.X @ dec.N0.basis) if dec.N0.dim else 0.0
    leak1 = opnorm(sol.X.conj().T @ dec.N1.basis) if dec.N1.dim else 0.0
    checks["N0_in_ker_X"] = _chk(leak0, leak0 <= check_tol)
    checks["N1_in_ker_Xh"] = _chk(leak1, leak1 <= check_tol)
    eig_top = np.linalg.eigvals(op.A0 + op.V @ sol.X)
    top = float(eig_top.real.max()) if eig_top.size else -math.inf
    checks["spec_A0_plus_VX_below_lam"] = _chk(top - op.lam, top <= op.lam + check_tol * scale)

    canon = kernel_crosscheck(op, dec, split, tol)
    checks["kernel_decomposition_crosscheck"] = _chk(canon, canon <= tol.tol_sub)

    mult_cap = min(dec.ker_A0.dim, dec.ker_A1.dim)
    checks["mu1_multiplicity_bound"] = _chk(sol.mu1_multiplicity, sol.mu1_multiplicity <= mult_cap)

    for name, ang in K_relation_checks(op, K0, K1, tol).items():
        checks[f"K_{name}"] = _chk(ang, ang <= max(tol.tol_sub, check_tol))
    for name, c in verify_norm_attaining(op, sol, K0, K1, tol, check_tol, check=False).as_dict().items():
        checks[f"normattain_{name}"] = c
    for name, c in kernel_side_checks(op, sol, tol, check_tol, check=False).as_dict().items():
        checks[f"side_{name}"] = c

    verdict = None
    try:
        verdict = classify_uniqueness(op, sol, K0, tol, dec)
        checks["verdict_consistent"] = _chk(0, True)
    except GraphRiccatiError as exc:
        notes.append(str(exc))
        checks["verdict_consistent"] = _chk(1, False)

    try:
        shift = spectral_shift(op, tol, split.evals)
        notes.extend(shift.notes)
        dm, dp, delta = shift
    except AssertionFailure as exc:
        notes.append(str(exc))
        checks["spectral_shift_nonnegative"] = _chk(1, False)
        dm = dp = delta = float("nan")
    else:
        cap = vnorm * norm_X + CHAIN_SLACK * scale
        checks["delta_le_vnorm_normX"] = _chk(delta - vnorm * norm_X, delta <= cap)

    d = val.d
    # under the ordering, the spectral distance is the edge gap
    edge = max(0.0, val.inf_spec_A1 - val.sup_spec_A0)
    edge_window = tol.eig_window(scale)
    gap_err = 0.0 if d == edge else abs(d - edge)
    checks["d_equals_edge_gap"] = _chk(gap_err, gap_err <= edge_window)
    up_X, up_PQ = upper_bounds(d, vnorm)
    lo_X, lo_PQ = lower_bounds(delta if math.isfinite(delta) else 0.0, vnorm)
    checks["upper_X"] = _chk(norm_X - up_X, norm_X <= up_X + CHAIN_SLACK)
    checks["upper_PQ"] = _chk(norm_PQ - up_PQ, norm_PQ <= up_PQ + CHAIN_SLACK)
    checks["lower_X"] = _chk(lo_X - norm_X, lo_X <= norm_X + CHAIN_SLACK)
    checks["lower_PQ"] = _chk(lo_PQ - norm_PQ, lo_PQ <= norm_PQ + CHAIN_SLACK)
    checks["PQ_le_sqrt2_over_2"] = _chk(norm_PQ, norm_PQ <= math.sqrt(2) / 2 + CHAIN_SLACK)

    gap_empty = True
    if d > 0:
        margin = CHAIN_SLACK * scale
        inside = (split.evals > val.sup_spec_A0 + margin) & (split.evals < val.inf_spec_A1 - margin)
        gap_empty = not bool(inside.any())
    checks["gap_empty"] = _chk(0 if gap_empty else 1, gap_empty)

    all_pass = all(c["ok"] for c in checks.values())
    return CertificationReport(
        d=d,
        delta_minus=dm,
        delta_plus=dp,
        delta=delta,
        vnorm=vnorm,
        norm_X=norm_X,
        norm_PQ=norm_PQ,
        upper_X=up_X,
        upper_PQ=up_PQ,
        lower_X=lo_X,
        lower_PQ=lo_PQ,
        mu1_multiplicity=sol.mu1_multiplicity,
        verdict=verdict,
        gap_empty=gap_empty,
        all_pass=all_pass,
        residual=sol.residual,
        norm_B=nB,
        lam=op.lam,
        n0=op.n0,
        n1=op.n1,
        dims={
            "ker_A0": dec.ker_A0.dim,
            "ker_A1": dec.ker_A1.dim,
            "N0": dec.N0.dim,
            "N1": dec.N1.dim,
            "K0": K0.dim,
            "K1": K1.dim,
            "M00": geo.dim_M00,
            "M01": geo.dim_M01,
            "M10": geo.dim_M10,
            "M11": geo.dim_M11,
            "Mprime": geo.dim_Mprime,
        },
        checks=checks,
        notes=notes,
        tolerances=tol.as_dict(),
    )
