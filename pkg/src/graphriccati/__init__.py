"""Invariant graph subspaces and contractive Riccati solutions for 2x2 block operators."""

from .bounds import CertificationReport, certify, lower_bounds, spectral_shift, upper_bounds
from .linalg import DEFAULT_TOL, Subspace, Tolerances
from .model import BlockOperator, GeneratorSpec, assemble, generate, validate
from .projections import build_Q, kernel_decomposition, two_projection_geometry
from .riccati import classify_uniqueness, compute_K0_K1, family_member, residual, solve

__version__ = "0.1.0"
