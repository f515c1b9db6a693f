"""Block operator data model, validation, seeded generation and JSON I/O.

A block operator is ``B = [[A0, V], [V^H, A1]]`` acting on ``H0 (+) H1``
together with a real threshold ``lam`` separating the spectra of the
diagonal blocks: ``sup spec(A0) <= lam <= inf spec(A1)``.

Randomness comes from ``numpy.random.Generator(PCG64(seed))``; PCG64 output
is specified bit-for-bit by numpy and is platform independent.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InconsistentSpec, NonFinite
from .linalg import DEFAULT_TOL, as_matrix, opnorm

__all__ = [
    "BlockOperator",
    "ValidationReport",
    "GeneratorSpec",
    "validate",
    "assemble",
    "generate",
    "dumps",
    "to_json",
    "from_json",
    "save",
    "load",
]


@dataclass(frozen=True, eq=False)
class BlockOperator:
    A0: np.ndarray
    A1: np.ndarray
    V: np.ndarray
    lam: float
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        A0 = as_matrix(self.A0, "A0")
        A1 = as_matrix(self.A1, "A1")
        V = as_matrix(self.V, "V")
        if A0.shape[0] != A0.shape[1] or A1.shape[0] != A1.shape[1]:
            raise ValueError("A0 and A1 must be square")
        if V.shape != (A0.shape[0], A1.shape[0]):
            raise ValueError(f"V must be {A0.shape[0]}x{A1.shape[0]}, got {V.shape}")
        lam = float(self.lam)
        if not math.isfinite(lam):
            raise NonFinite("lambda must be finite")
        for name, value in (("A0", A0), ("A1", A1), ("V", V)):
            value.flags.writeable = False
            object.__setattr__(self, name, value)
        object.__setattr__(self, "lam", lam)
        # derived data keyed by Tolerances; safe since the instance is immutable
        object.__setattr__(self, "_cache", {})

    @property
    def n0(self):
        return self.A0.shape[0]

    @property
    def n1(self):
        return self.A1.shape[0]

    def __eq__(self, other):
        if not isinstance(other, BlockOperator):
            return NotImplemented
        return (
            self.lam == other.lam
            and np.array_equal(self.A0, other.A0)
            and np.array_equal(self.A1, other.A1)
            and np.array_equal(self.V, other.V)
        )

    __hash__ = None

    def with_V(self, V):
        return BlockOperator(self.A0, self.A1, V, self.lam, dict(self.meta))

    def shifted(self, sep):
        """Push the diagonal blocks apart by ``sep`` (A0 down, A1 up by sep/2)."""
        I0 = np.eye(self.n0)
        I1 = np.eye(self.n1)
        return BlockOperator(self.A0 - 0.5 * sep * I0, self.A1 + 0.5 * sep * I1, self.V, self.lam, dict(self.meta))

    def conjugated(self, U0, U1):
        """Apply the block-diagonal unitary ``U0 (+) U1``."""
        return BlockOperator(
            U0 @ self.A0 @ U0.conj().T,
            U1 @ self.A1 @ U1.conj().T,
            U0 @ self.V @ U1.conj().T,
            self.lam,
            dict(self.meta),
        )


@dataclass(frozen=True)
class ValidationReport:
    hermitian_ok: bool
    ordering_ok: bool
    sup_spec_A0: float
    inf_spec_A1: float
    d: float
    spec_A0: np.ndarray = field(repr=False)
    spec_A1: np.ndarray = field(repr=False)

    @property
    def ok(self):
        return self.hermitian_ok and self.ordering_ok

    def as_dict(self):
        return {
            "hermitian_ok": self.hermitian_ok,
            "ordering_ok": self.ordering_ok,
            "sup_spec_A0": self.sup_spec_A0,
            "inf_spec_A1": self.inf_spec_A1,
            "d": self.d,
        }


def _hermitian_defect(M):
    if M.size == 0:
        return 0.0
    return float(np.max(np.abs(M - M.conj().T)))


def validate(op, tol=DEFAULT_TOL):
    """Check Hermitian diagonal blocks and the spectral ordering at ``lam``.

    ``d`` is the distance between the computed spectra of A0 and A1 (0 when
    they overlap).  A value within the eigenvalue window is reported as 0:
    kernels placed exactly at ``lam`` otherwise leave round-off-sized gaps.
    The report is cached on the (immutable) operator.
    """
    cached = op._cache.get(("validate", tol))
    if cached is not None:
        return cached
    scale = max(1.0, opnorm(op.A0), opnorm(op.A1))
    herm = max(_hermitian_defect(op.A0), _hermitian_defect(op.A1)) <= tol.tol_orth * scale
    e0 = np.linalg.eigvalsh(0.5 * (op.A0 + op.A0.conj().T)) if op.n0 else np.zeros(0)
    e1 = np.linalg.eigvalsh(0.5 * (op.A1 + op.A1.conj().T)) if op.n1 else np.zeros(0)
    sup0 = float(e0[-1]) if e0.size else -math.inf
    inf1 = float(e1[0]) if e1.size else math.inf
    window = tol.eig_window(max(scale, opnorm(op.V)))
    ordering = sup0 <= op.lam + window and inf1 >= op.lam - window
    if e0.size and e1.size:
        d = float(np.min(np.abs(e0[:, None] - e1[None, :])))
        if d <= window:
            d = 0.0
    else:
        d = math.inf
    e0.flags.writeable = False
    e1.flags.writeable = False
    report = ValidationReport(herm, ordering, sup0, inf1, d, e0, e1)
    op._cache[("validate", tol)] = report
    return report


def assemble(op):
    """The full Hermitian matrix ``[[A0, V], [V^H, A1]]`` (read-only, cached)."""
    B = op._cache.get("B")
    if B is None:
        n0 = op.n0
        B = np.empty((n0 + op.n1, n0 + op.n1), complex)
        B[:n0, :n0] = op.A0
        B[:n0, n0:] = op.V
        B[n0:, :n0] = op.V.conj().T
        B[n0:, n0:] = op.A1
        B.flags.writeable = False
        op._cache["B"] = B
    return B


@dataclass(frozen=True)
class GeneratorSpec:
    """Recipe for a random block operator with exactly placed kernels.

    ``ker0_dim``/``ker1_dim`` eigenvalues of A0/A1 sit exactly at ``lam``.
    The remaining eigenvalues of A0 lie in ``[lam - 2, lam - gap]`` and of A1
    in ``[lam + gap, lam + 2]``, with the edge values ``lam -/+ gap`` attained
    whenever ``gap > 0``.

    ``couple_kernels`` makes part of Ker(A0 - lam) lie in Ker V^H and part of
    Ker(A1 - lam) lie in Ker V.  ``k0_dim`` kernel pairs are linked by V
    directly (``V w_i = s_i u_i`` with ``u_i``, ``w_i`` kernel vectors), which
    makes the norm-attaining subspaces of X nontrivial.
    """

    n0: int
    n1: int
    ker0_dim: int = 0
    ker1_dim: int = 0
    gap: float = 0.5
    vnorm: float = 1.0
    couple_kernels: bool = False
    seed: int = 0
    lam: float = 0.0
    k0_dim: int = 0

    def check(self):
        if self.n0 < 1 or self.n1 < 1:
            raise InconsistentSpec("n0 and n1 must be positive")
        if not (0 <= self.ker0_dim <= self.n0 and 0 <= self.ker1_dim <= self.n1):
            raise InconsistentSpec("kernel dimensions must fit in n0, n1")
        if not (0 <= self.gap <= 2):
            raise InconsistentSpec("gap must lie in [0, 2]")
        if self.vnorm < 0:
            raise InconsistentSpec("vnorm must be >= 0")
        if self.k0_dim < 0 or self.k0_dim > min(self.ker0_dim, self.ker1_dim):
            raise InconsistentSpec("k0_dim cannot exceed either kernel dimension")
        if self.couple_kernels:
            if self.ker0_dim - self.k0_dim < 1 or self.ker1_dim - self.k0_dim < 1:
                raise InconsistentSpec("couple_kernels needs a kernel vector on each side beyond k0_dim")
        if self.k0_dim and self.vnorm == 0:
            raise InconsistentSpec("k0_dim > 0 needs vnorm > 0")

    def as_dict(self):
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def haar_unitary(rng, n):
    """Haar-distributed unitary from the QR of a complex Gaussian matrix."""
    Z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    Q, R = np.linalg.qr(Z)
    d = np.diagonal(R)
    return Q * (d / np.abs(d))


def _block_eigs(rng, n, nker, lam, gap, sign):
    # sign = -1 for A0 (below lam), +1 for A1 (above lam)
    rest = n - nker
    u = rng.uniform(0.0, 1.0, size=rest)
    if rest and gap > 0:
        u[0] = 0.0
    vals = lam + sign * (gap + u * (2.0 - gap))
    return np.concatenate([np.full(nker, lam), vals])


def generate(spec):
    """Draw a BlockOperator from ``spec``; deterministic in ``spec.seed``."""
    spec.check()
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    n0, n1, lam = spec.n0, spec.n1, float(spec.lam)
    U0 = haar_unitary(rng, n0)
    U1 = haar_unitary(rng, n1)
    d0 = _block_eigs(rng, n0, spec.ker0_dim, lam, spec.gap, -1)
    d1 = _block_eigs(rng, n1, spec.ker1_dim, lam, spec.gap, +1)
    A0 = (U0 * d0) @ U0.conj().T
    A1 = (U1 * d1) @ U1.conj().T
    # exact Hermitian symmetry
    A0 = 0.5 * (A0 + A0.conj().T)
    A1 = 0.5 * (A1 + A1.conj().T)

    G = (rng.standard_normal((n0, n1)) + 1j * rng.standard_normal((n0, n1))) / np.sqrt(2)
    k = spec.k0_dim
    # the first ker_dim columns of U0/U1 span the kernels
    pairs0 = U0[:, :k]
    pairs1 = U1[:, :k]
    if spec.couple_kernels:
        c0 = max(1, (spec.ker0_dim - k + 1) // 2)
        c1 = max(1, (spec.ker1_dim - k + 1) // 2)
        null0 = U0[:, k : k + c0]
        null1 = U1[:, k : k + c1]
    else:
        null0 = U0[:, :0]
        null1 = U1[:, :0]
    left = np.hstack([pairs0, null0])
    right = np.hstack([pairs1, null1])
    P0 = np.eye(n0) - left @ left.conj().T
    P1 = np.eye(n1) - right @ right.conj().T
    V = P0 @ G @ P1
    if k:
        s = rng.uniform(0.5, 1.5, size=k) * max(opnorm(V), 1.0)
        V = V + (pairs0 * s) @ pairs1.conj().T
    nrm = opnorm(V)
    if spec.vnorm == 0 or nrm == 0:
        V = np.zeros((n0, n1), complex)
    else:
        V = V * (spec.vnorm / nrm)
    return BlockOperator(A0, A1, V, lam, {"generator": spec.as_dict()})


# --- JSON -------------------------------------------------------------------


def _fmt_float(x):
    x = float(x)
    if not math.isfinite(x):
        raise NonFinite(f"cannot serialize non-finite value {x!r}")
    text = format(x, ".17g")
    if text.lstrip("-").isdigit():
        text += ".0"
    return text


def dumps(obj, indent=None, _level=0):
    """JSON text with every float written to 17 significant digits.

    numpy scalars and arrays are accepted; complex numbers become ``[re, im]``.
    """
    if isinstance(obj, (bool, np.bool_)) or obj is None or isinstance(obj, str):
        return json.dumps(obj.item() if isinstance(obj, np.bool_) else obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return "[" + _fmt_float(obj.real) + ", " + _fmt_float(obj.imag) + "]"
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    pad = "" if indent is None else "\n" + " " * (indent * (_level + 1))
    end = "" if indent is None else "\n" + " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [pad + json.dumps(str(k)) + ": " + dumps(v, indent, _level + 1) for k, v in obj.items()]
        return "{" + ",".join(items) + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        # keep numeric rows on one line
        flat = all(not isinstance(v, (list, tuple, dict, np.ndarray)) for v in obj)
        if flat or indent is None:
            return "[" + ", ".join(dumps(v, None) for v in obj) + "]"
        return "[" + ",".join(pad + dumps(v, indent, _level + 1) for v in obj) + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _encode_matrix(M):
    return [[[float(z.real), float(z.imag)] for z in row] for row in M]


def _decode_matrix(rows, name, shape):
    if len(rows) != shape[0]:
        raise ValueError(f"{name}: expected {shape[0]} rows, got {len(rows)}")
    out = np.zeros(shape, complex)
    for i, row in enumerate(rows):
        if len(row) != shape[1]:
            raise ValueError(f"{name}: row {i} has {len(row)} entries, expected {shape[1]}")
        for j, z in enumerate(row):
            if isinstance(z, (list, tuple)):
                if len(z) != 2:
                    raise ValueError(f"{name}[{i}][{j}]: complex entries are [re, im]")
                out[i, j] = complex(float(z[0]), float(z[1]))
            else:
                out[i, j] = float(z)
    return out


def to_json(op):
    doc = {
        "n0": op.n0,
        "n1": op.n1,
        "lambda": op.lam,
        "A0": _encode_matrix(op.A0),
        "A1": _encode_matrix(op.A1),
        "V": _encode_matrix(op.V),
    }
    if op.meta:
        doc["meta"] = op.meta
    return dumps(doc, indent=1) + "\n"


def from_json(text):
    doc = json.loads(text)
    n0, n1 = int(doc["n0"]), int(doc["n1"])
    return BlockOperator(
        _decode_matrix(doc["A0"], "A0", (n0, n0)),
        _decode_matrix(doc["A1"], "A1", (n1, n1)),
        _decode_matrix(doc["V"], "V", (n0, n1)),
        float(doc["lambda"]),
        dict(doc.get("meta") or {}),
    )


def save(op, path):
    Path(path).write_text(to_json(op), encoding="utf-8")


def load(path):
    return from_json(Path(path).read_text(encoding="utf-8"))


# --- ensembles ----------------------------------------------------------------

ENSEMBLE_KINDS = ("gapped", "touching", "coupled", "norm_attaining")


def ensemble_specs(count, max_dim=32, seed=0):
    """Deterministic list of GeneratorSpecs cycling through ENSEMBLE_KINDS.

    gapped
        no kernels at lam, ``gap >= 0.05`` so ``d > 0``
    touching
        kernels on both sides (so ``d = 0``), generic V
    coupled
        ``couple_kernels`` set: N0 and N1 both nontrivial
    norm_attaining
        kernel pairs linked by V, so X has singular values equal to 1
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    specs = []
    for i in range(count):
        kind = ENSEMBLE_KINDS[i % len(ENSEMBLE_KINDS)]
        lo = 1 if kind == "gapped" else 2
        n0 = int(rng.integers(lo, max(lo, max_dim) + 1))
        n1 = int(rng.integers(lo, max(lo, max_dim) + 1))
        vnorm = float(rng.uniform(0.1, 3.0))
        gap = float(rng.uniform(0.05, 1.0))
        sub_seed = int(rng.integers(0, 2**31 - 1))
        lam = float(rng.uniform(-1.0, 1.0))
        # k0 + k1 <= min(n0, n1): larger kernels make X attain norm one
        # up to ~1e-10 without doing so exactly
        if kind != "gapped":
            m = min(n0, n1)
            k0 = int(rng.integers(1, m // 2 + 1))
            k1 = int(rng.integers(1, m - k0 + 1))
        if kind == "gapped":
            spec = GeneratorSpec(n0, n1, 0, 0, gap, vnorm, False, sub_seed, lam)
        elif kind == "touching":
            spec = GeneratorSpec(n0, n1, k0, k1, gap, vnorm, False, sub_seed, lam)
        elif kind == "coupled":
            spec = GeneratorSpec(n0, n1, k0, k1, gap, vnorm, True, sub_seed, lam)
        else:
            pairs = int(rng.integers(1, min(k0, k1) + 1))
            spec = GeneratorSpec(n0, n1, k0, k1, gap, vnorm, False, sub_seed, lam, pairs)
        specs.append(spec)
    return specs
