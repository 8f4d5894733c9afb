"""Structure verification for metric-affinor charts.

Checks the compatibility identity ``g(FX, Y) + mu g(X, FY) = 0``, pointwise
nondegeneracy of F, the fundamental 2-form ``Omega(X, Y) = g(FX, Y)`` for
``mu = +1``, parallelism ``nabla F = 0``, and recognizes the classical
structure families the compatibility sign and F^2 single out.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import report as rp
from .chart_calculus import (
    ManifoldSpec,
    affinor_at,
    metric_at,
    metric_inverse_at,
    nabla_affinor,
)

__all__ = [
    "RANK_REL",
    "RANK_FLOOR",
    "StructureVerdict",
    "Inapplicable",
    "check_compatibility",
    "check_nondegeneracy",
    "nondegeneracy_verdict",
    "fundamental_form",
    "check_fundamental_form",
    "check_parallel",
    "parallelism_residual",
    "classify_structure",
    "check_structure_family",
]

RANK_REL = 1e-8  # relative singular-value cut for rank decisions
RANK_FLOOR = 1e-12  # absolute floor, double-precision SVD noise scale
FAMILY_TOL = 1e-8

FAMILY_HERMITIAN = "almost-Hermitian-like"
FAMILY_PRODUCT = "almost-product-like"
FAMILY_CONTACT = "contact-like-degenerate"
FAMILY_GENERIC = "generic"


class Inapplicable(RuntimeError):
    """Raised when an operation's structural precondition does not hold."""


@dataclass
class StructureVerdict:
    """Aggregated structure classification over a sample set."""

    compatible: bool
    compatibility_residual: float
    nondegenerate: bool
    min_singular_value: float
    kernel_dim: int | None
    parallel: bool
    max_nabla_f: float
    family: str
    fundamental_form_ok: bool | None  # None when mu = -1


def _require_samples(samples):
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    if samples.size == 0:
        raise ValueError("samples must be nonempty")
    return samples


def _maxabs(a) -> float:
    return float(np.max(np.abs(a))) if np.asarray(a).size else 0.0


def check_compatibility(spec: ManifoldSpec, samples, tol: float = 1e-10) -> rp.CheckReport:
    """Residual of ``G F + mu F^T G`` (and of the adjoint form) over samples."""
    samples = _require_samples(samples)
    worst = -1.0
    worst_adj = 0.0
    witness = None
    for x in samples:
        g = metric_at(spec, x)
        f = affinor_at(spec, x)
        residual = _maxabs(g @ f + spec.mu * f.T @ g)
        adj = _maxabs(metric_inverse_at(spec, x) @ f.T @ g + spec.mu * f)
        if residual > worst:
            worst, witness = residual, x
        worst_adj = max(worst_adj, adj)
    status = rp.PASS if worst <= tol else rp.FAIL
    return rp.CheckReport(
        check_id="eq_1_1_compatibility",
        status=status,
        max_residual=worst,
        threshold=tol,
        witness=tuple(witness),
        detail=f"adjoint identity residual {worst_adj!r}",
    )


def _rank_cut(singular_values: np.ndarray) -> float:
    top = float(singular_values[0]) if singular_values.size else 0.0
    return max(RANK_REL * top, RANK_FLOOR)


def nondegeneracy_verdict(spec: ManifoldSpec, samples) -> tuple[bool, float, int]:
    """(nondegenerate, min sigma_min, worst kernel dimension) over samples."""
    samples = _require_samples(samples)
    min_sigma = np.inf
    kernel_dim = 0
    for x in samples:
        sigma = np.linalg.svd(affinor_at(spec, x), compute_uv=False)
        cut = _rank_cut(sigma)
        min_sigma = min(min_sigma, float(sigma[-1]))
        kernel_dim = max(kernel_dim, int(np.sum(sigma < cut)))
    return kernel_dim == 0, float(min_sigma), kernel_dim


def check_nondegeneracy(spec: ManifoldSpec, samples) -> rp.CheckReport:
    """Verdict-style report: nondegenerate or degenerate with kernel dimension."""
    nondeg, min_sigma, kernel_dim = nondegeneracy_verdict(spec, samples)
    if nondeg:
        detail = f"nondegenerate; min sigma_min {min_sigma!r}"
    else:
        detail = f"degenerate; kernel dim {kernel_dim}; min sigma_min {min_sigma!r}"
    return rp.CheckReport(
        check_id="nondegeneracy",
        status=rp.PASS,
        max_residual=0.0,
        threshold=0.0,
        witness=None,
        detail=detail,
    )


def fundamental_form(spec: ManifoldSpec, x) -> np.ndarray:
    """``Omega_ij = g(F e_i, e_j)`` in the chart basis; requires ``mu = +1``."""
    if spec.mu != 1:
        raise Inapplicable("fundamental form requires mu = +1")
    return affinor_at(spec, x).T @ metric_at(spec, x)


def check_fundamental_form(spec: ManifoldSpec, samples,
                           skew_tol: float = 1e-12) -> rp.CheckReport:
    """Skewness of Omega plus the nondegeneracy equivalence with F."""
    check_id = "prop_1_3_fundamental_form"
    if spec.mu != 1:
        return rp.CheckReport(
            check_id=check_id,
            status=rp.INAPPLICABLE,
            detail="hypothesis failed: mu = +1 (structure has mu = -1)",
        )
    samples = _require_samples(samples)
    worst_skew = -1.0
    witness = None
    omega_nondeg = True
    omega_rank_min = spec.dim
    for x in samples:
        omega = fundamental_form(spec, x)
        skew = _maxabs(omega + omega.T)
        if skew > worst_skew:
            worst_skew, witness = skew, x
        sigma = np.linalg.svd(omega, compute_uv=False)
        cut = _rank_cut(sigma)
        rank = int(np.sum(sigma >= cut))
        omega_rank_min = min(omega_rank_min, rank)
        if rank < spec.dim:
            omega_nondeg = False
    f_nondeg, _, f_kernel = nondegeneracy_verdict(spec, samples)
    consistent = omega_nondeg == f_nondeg
    even_ok = (spec.dim % 2 == 0) if omega_nondeg else True
    if omega_nondeg:
        verdict = "Omega nondegenerate <=> F nondegenerate; m even"
    else:
        verdict = (
            f"Omega degenerate (rank {omega_rank_min}) consistent with degenerate F "
            f"(kernel dim {f_kernel})"
        )
    if not consistent or not even_ok or worst_skew > skew_tol:
        status = rp.MISMATCH
        if not consistent:
            verdict = (
                f"equivalence violated: Omega nondegenerate={omega_nondeg}, "
                f"F nondegenerate={f_nondeg}"
            )
        elif not even_ok:
            verdict = f"Omega nondegenerate but dimension {spec.dim} is odd"
    else:
        status = rp.PASS
    return rp.CheckReport(
        check_id=check_id,
        status=status,
        max_residual=worst_skew,
        threshold=skew_tol,
        witness=tuple(witness),
        detail=verdict,
    )


def parallelism_residual(spec: ManifoldSpec, samples) -> tuple[float, np.ndarray]:
    samples = _require_samples(samples)
    worst = -1.0
    witness = samples[0]
    for x in samples:
        residual = _maxabs(nabla_affinor(spec, x))
        if residual > worst:
            worst, witness = residual, x
    return worst, witness


def check_parallel(spec: ManifoldSpec, samples, tol: float = 1e-8) -> rp.CheckReport:
    """Pass tags the affinor parallel: ``max |nabla F| <= tol`` over samples."""
    worst, witness = parallelism_residual(spec, samples)
    return rp.CheckReport(
        check_id="eq_4_1_parallelism",
        status=rp.PASS if worst <= tol else rp.FAIL,
        max_residual=worst,
        threshold=tol,
        witness=tuple(witness),
        detail="parallel" if worst <= tol else "not parallel",
    )


def classify_structure(spec: ManifoldSpec, samples) -> StructureVerdict:
    samples = _require_samples(samples)
    compat = check_compatibility(spec, samples)
    nondeg, min_sigma, kernel_dim = nondegeneracy_verdict(spec, samples)
    par_residual, _ = parallelism_residual(spec, samples)

    f2_plus = -1.0
    f2_minus = -1.0
    contact_shape = True  # kernel dim 1 and rank(F^2 + I) = 1 at every sample
    for x in samples:
        f = affinor_at(spec, x)
        f2 = f @ f
        eye = np.eye(spec.dim)
        f2_plus = max(f2_plus, _maxabs(f2 + eye))
        f2_minus = max(f2_minus, _maxabs(f2 - eye))
        sigma_f = np.linalg.svd(f, compute_uv=False)
        sigma_p = np.linalg.svd(f2 + eye, compute_uv=False)
        if int(np.sum(sigma_f < _rank_cut(sigma_f))) != 1:
            contact_shape = False
        elif int(np.sum(sigma_p >= _rank_cut(sigma_p))) != 1:
            contact_shape = False

    if spec.mu == 1 and nondeg and f2_plus <= FAMILY_TOL:
        family = FAMILY_HERMITIAN
    elif spec.mu == -1 and nondeg and f2_minus <= FAMILY_TOL:
        family = FAMILY_PRODUCT
    elif spec.mu == 1 and not nondeg and contact_shape:
        family = FAMILY_CONTACT
    else:
        family = FAMILY_GENERIC

    fundamental_ok: bool | None = None
    if spec.mu == 1:
        fundamental_ok = check_fundamental_form(spec, samples).status == rp.PASS
    return StructureVerdict(
        compatible=compat.status == rp.PASS,
        compatibility_residual=compat.max_residual,
        nondegenerate=nondeg,
        min_singular_value=min_sigma,
        kernel_dim=None if nondeg else kernel_dim,
        parallel=par_residual <= 1e-8,
        max_nabla_f=par_residual,
        family=family,
        fundamental_form_ok=fundamental_ok,
    )


def check_structure_family(spec: ManifoldSpec, samples) -> rp.CheckReport:
    """Verdict-style report carrying the recognized structure family."""
    verdict = classify_structure(spec, samples)
    parts = [f"family {verdict.family}"]
    parts.append("nondegenerate" if verdict.nondegenerate else
                 f"degenerate (kernel dim {verdict.kernel_dim})")
    parts.append("parallel" if verdict.parallel else "not parallel")
    return rp.CheckReport(
        check_id="structure_family",
        status=rp.PASS,
        max_residual=0.0,
        threshold=0.0,
        witness=None,
        detail="; ".join(parts),
    )
