"""Extraction and verification of semi-invariant tangent splittings.

At each point the tangential part of the affinor restricted to the tangent
space is formed in a g-orthonormal tangent frame.  Its kernel (decided by
SVD with a relative threshold) is the candidate anti-invariant distribution
``Dperp``; its orthocomplement inside the tangent space is the candidate
invariant distribution ``D``.  The defining inclusions are then *verified*
against tolerances rather than assumed, so degenerate or non-semi-invariant
inputs are reported honestly.  A user-declared frame for ``D`` overrides
the extraction.

Subspace equality is always measured by principal angles between
g-orthonormal bases.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import report as rp
from .chart_calculus import ManifoldSpec, affinor_at
from .submanifold_geometry import FrameData, SubmanifoldSpec, frames_at, gnorm

__all__ = [
    "SplitData",
    "ProjectorPair",
    "split_tangent",
    "projectors",
    "phi_omega",
    "phi_of",
    "project_onto_rows",
    "principal_angle",
    "verify_definition21",
    "classify_submanifold",
    "verify_prop25",
    "verify_cor26",
]

KERNEL_REL = 1e-8  # relative SVD threshold for the kernel decision
AMBIG_LOW = 1e-10
AMBIG_HIGH = 1e-6  # singular values in [low, high] * sigma_max are ambiguous
DROP_TOL = 1e-8  # norm below which an image/complement direction is dropped


@dataclass(eq=False)
class SplitData:
    """Per-point bases of the semi-invariant splitting.

    ``basis_d`` (p rows) and ``basis_dperp`` (q rows) split the tangent
    space; ``basis_fdperp`` spans the image of ``Dperp`` under the affinor
    and ``basis_dtilde`` its orthocomplement in the normal space.  All rows
    are ambient vectors, g-orthonormal within each block and across blocks.
    ``singular_values`` is the decision spectrum of the tangential part of
    the affinor; ``rank_ambiguous`` flags values inside the ambiguity band.
    """

    u: np.ndarray
    p: int
    q: int
    basis_d: np.ndarray
    basis_dperp: np.ndarray
    basis_fdperp: np.ndarray
    basis_dtilde: np.ndarray
    singular_values: np.ndarray
    rank_ambiguous: bool
    frame: FrameData


@dataclass
class ProjectorPair:
    """Projectors onto D and Dperp in the orthonormal tangent frame."""

    p_matrix: np.ndarray
    q_matrix: np.ndarray


def _frozen(arr) -> np.ndarray:
    arr = np.asarray(arr, dtype=float)
    arr.setflags(write=False)
    return arr


def _orthonormal_rows(vectors, g, drop_tol=DROP_TOL):
    """g-Gram-Schmidt keeping directions with residual norm above drop_tol."""
    rows = []
    for vec in vectors:
        v = np.array(vec, dtype=float)
        for _ in range(2):
            for built in rows:
                v = v - (built @ g @ v) * built
        norm = gnorm(g, v)
        if norm >= drop_tol:
            rows.append(v / norm)
    return rows


def _point_key(u):
    return tuple(float(v) for v in u)


@lru_cache(maxsize=None)
def _split_tangent(ambient: ManifoldSpec, spec: SubmanifoldSpec, key) -> SplitData:
    frame = frames_at(spec, key)
    g = frame.metric
    f = affinor_at(ambient, frame.x)
    n = spec.dim
    tangent = frame.tangent_basis

    # tangential part of F restricted to TN, in the orthonormal tangent frame
    images = (f @ tangent.T).T  # rows F t_j
    phi_mat = tangent @ g @ images.T  # phi[i, j] = g(F t_j, t_i)
    _, sigma, vt = np.linalg.svd(phi_mat)
    top = float(sigma[0]) if n else 0.0

    rank_ambiguous = False
    if top <= 1e-12:
        q = n
        d_cols = np.empty((0, n))
        dperp_cols = vt
    else:
        cut = KERNEL_REL * top
        rank_ambiguous = bool(
            np.any((sigma >= AMBIG_LOW * top) & (sigma <= AMBIG_HIGH * top))
        )
        q = int(np.sum(sigma < cut))
        d_cols = vt[: n - q]
        dperp_cols = vt[n - q :]

    if spec.frame_d is not None:
        declared = [frame.push(fd.value(np.asarray(key))) for fd in spec.frame_d]
        basis_d = _orthonormal_rows(declared, g)
        if len(basis_d) != len(spec.frame_d):
            raise ValueError("declared frame for D is linearly dependent")
        # complement of declared D inside TN
        complement = []
        for t in tangent:
            v = np.array(t)
            for _ in range(2):
                for built in basis_d + complement:
                    v = v - (built @ g @ v) * built
            norm = gnorm(g, v)
            if norm >= DROP_TOL:
                complement.append(v / norm)
        basis_dperp = complement
        rank_ambiguous = False
    else:
        basis_d = [sum(c[i] * tangent[i] for i in range(n)) for c in d_cols]
        basis_dperp = [sum(c[i] * tangent[i] for i in range(n)) for c in dperp_cols]

    p = len(basis_d)
    q = len(basis_dperp)
    f_images = [f @ v for v in basis_dperp]
    basis_fdperp = _orthonormal_rows(f_images, g)
    # complement of F(Dperp) inside the normal space
    dtilde = []
    for nu in frame.normal_basis:
        v = np.array(nu)
        for _ in range(2):
            for built in basis_fdperp + dtilde:
                v = v - (built @ g @ v) * built
        norm = gnorm(g, v)
        if norm >= DROP_TOL:
            dtilde.append(v / norm)

    def stack(rows, width):
        return _frozen(np.array(rows).reshape(len(rows), width))

    m = ambient.dim
    return SplitData(
        u=_frozen(key),
        p=p,
        q=q,
        basis_d=stack(basis_d, m),
        basis_dperp=stack(basis_dperp, m),
        basis_fdperp=stack(basis_fdperp, m),
        basis_dtilde=stack(dtilde, m),
        singular_values=_frozen(sigma),
        rank_ambiguous=rank_ambiguous,
        frame=frame,
    )


def split_tangent(ambient: ManifoldSpec, spec: SubmanifoldSpec, u) -> SplitData:
    """Tangent/normal splitting at ``u``; see the module docstring."""
    if ambient is not spec.ambient:
        raise ValueError("ambient spec does not match the submanifold's ambient")
    return _split_tangent(ambient, spec, _point_key(u))


def project_onto_rows(rows: np.ndarray, g: np.ndarray, w: np.ndarray) -> np.ndarray:
    if rows.shape[0] == 0:
        return np.zeros_like(w)
    coeff = rows @ (g @ w)
    return rows.T @ coeff


def projectors(split: SplitData) -> ProjectorPair:
    """P and Q in the orthonormal tangent frame (P + Q = I, P^2 = P, PQ = 0)."""
    g = split.frame.metric
    tangent = split.frame.tangent_basis
    a = split.basis_d @ g @ tangent.T  # rows: D basis in tangent-frame coords
    b = split.basis_dperp @ g @ tangent.T
    return ProjectorPair(p_matrix=a.T @ a, q_matrix=b.T @ b)


def phi_omega(ambient: ManifoldSpec, spec: SubmanifoldSpec, u, x_vec):
    """Split ``F X = phi X + omega X`` for an ambient tangent vector ``x_vec``."""
    split = split_tangent(ambient, spec, u)
    g = split.frame.metric
    f = affinor_at(ambient, split.frame.x)
    x_vec = np.asarray(x_vec, dtype=float)
    px = project_onto_rows(split.basis_d, g, x_vec)
    qx = project_onto_rows(split.basis_dperp, g, x_vec)
    return f @ px, f @ qx


def phi_of(split: SplitData, ambient: ManifoldSpec, x_vec) -> np.ndarray:
    """``phi X = F(P X)`` as an ambient vector, for one precomputed split."""
    g = split.frame.metric
    f = affinor_at(ambient, split.frame.x)
    return f @ project_onto_rows(split.basis_d, g, np.asarray(x_vec, dtype=float))


def principal_angle(rows_a: np.ndarray, rows_b: np.ndarray, g: np.ndarray) -> float:
    """Largest principal angle between two subspaces given by g-orthonormal rows."""
    if rows_a.shape[0] != rows_b.shape[0]:
        return float(np.pi / 2)
    if rows_a.shape[0] == 0:
        return 0.0
    cosines = np.linalg.svd(rows_a @ g @ rows_b.T, compute_uv=False)
    return float(np.arccos(np.clip(cosines[-1], -1.0, 1.0)))


def _samples_2d(samples) -> np.ndarray:
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    if samples.size == 0:
        raise ValueError("samples must be nonempty")
    return samples


def _collect_splits(ambient, spec, samples):
    splits = [split_tangent(ambient, spec, u) for u in samples]
    ambiguous = next((s for s in splits if s.rank_ambiguous), None)
    ranks = {(s.p, s.q) for s in splits}
    return splits, ambiguous, ranks


def verify_definition21(ambient: ManifoldSpec, spec: SubmanifoldSpec, samples,
                        tol: float = 1e-6) -> rp.CheckReport:
    """The three defining conditions of a semi-invariant splitting:
    F(D) inside D, F(Dperp) inside the normal space, and F^2(Dperp) a
    constant-rank subbundle of the tangent space (rank constancy over the
    sample set stands in for the distribution condition).
    """
    check_id = "def_2_1_semi_invariant"
    samples = _samples_2d(samples)
    splits, ambiguous, ranks = _collect_splits(ambient, spec, samples)
    if ambiguous is not None:
        return rp.CheckReport(
            check_id=check_id,
            status=rp.RANK_AMBIGUOUS,
            max_residual=0.0,
            threshold=tol,
            witness=tuple(ambiguous.u),
            detail=(
                "kernel decision unstable: singular values "
                f"{np.array2string(np.asarray(ambiguous.singular_values), precision=3)}"
            ),
        )
    if len(ranks) > 1:
        return rp.CheckReport(
            check_id=check_id,
            status=rp.RANK_AMBIGUOUS,
            max_residual=0.0,
            threshold=tol,
            witness=tuple(splits[0].u),
            detail=f"(p, q) varies across samples: {sorted(ranks)}",
        )

    worst = -1.0
    witness = splits[0].u
    residual_i = residual_ii = residual_iii = 0.0
    f2_ranks = set()
    for split in splits:
        g = split.frame.metric
        f = affinor_at(ambient, split.frame.x)
        for d in split.basis_d:
            r = gnorm(g, f @ d - project_onto_rows(split.basis_d, g, f @ d))
            residual_i = max(residual_i, r)
            if r > worst:
                worst, witness = r, split.u
        for e in split.basis_dperp:
            r = gnorm(g, project_onto_rows(split.frame.tangent_basis, g, f @ e))
            residual_ii = max(residual_ii, r)
            if r > worst:
                worst, witness = r, split.u
        f2_images = [f @ (f @ e) for e in split.basis_dperp]
        for w in f2_images:
            r = gnorm(g, project_onto_rows(split.frame.normal_basis, g, w))
            residual_iii = max(residual_iii, r)
            if r > worst:
                worst, witness = r, split.u
        if f2_images:
            coords = np.array(
                [split.frame.tangent_basis @ g @ w for w in f2_images]
            )
            sigma = np.linalg.svd(coords, compute_uv=False)
            rank = int(np.sum(sigma >= max(KERNEL_REL * sigma[0], 1e-12)))
        else:
            rank = 0
        f2_ranks.add(rank)

    worst = max(worst, 0.0)
    split0 = splits[0]
    detail = (
        f"p={split0.p} q={split0.q}; residuals: F(D) in D {residual_i!r}, "
        f"F(Dperp) normal {residual_ii!r}, F^2(Dperp) tangent {residual_iii!r}; "
        f"rank F^2(Dperp) = {sorted(f2_ranks)}"
    )
    if len(f2_ranks) > 1:
        return rp.CheckReport(
            check_id=check_id,
            status=rp.RANK_AMBIGUOUS,
            max_residual=worst,
            threshold=tol,
            witness=tuple(witness),
            detail="rank of F^2(Dperp) varies across samples; " + detail,
        )
    status = rp.PASS if worst <= tol else rp.FAIL
    return rp.CheckReport(
        check_id=check_id,
        status=status,
        max_residual=worst,
        threshold=tol,
        witness=tuple(witness),
        detail=detail,
    )


def classify_submanifold(ambient: ManifoldSpec, spec: SubmanifoldSpec,
                         samples) -> rp.CheckReport:
    """Label: invariant / anti-invariant / proper, with a ``normal-`` prefix
    when the affinor image of Dperp fills the whole normal space."""
    check_id = "submanifold_class"
    samples = _samples_2d(samples)
    splits, ambiguous, ranks = _collect_splits(ambient, spec, samples)
    dtilde_dims = {s.basis_dtilde.shape[0] for s in splits}
    if ambiguous is not None or len(ranks) > 1 or len(dtilde_dims) > 1:
        bad = ambiguous if ambiguous is not None else splits[0]
        return rp.CheckReport(
            check_id=check_id,
            status=rp.RANK_AMBIGUOUS,
            witness=tuple(bad.u),
            detail=f"unstable ranks: (p, q) {sorted(ranks)}, dim Dtilde {sorted(dtilde_dims)}",
        )
    p, q = splits[0].p, splits[0].q
    dtilde = splits[0].basis_dtilde.shape[0]
    if q == 0:
        label = "invariant"
    elif p == 0:
        label = "normal-anti-invariant" if dtilde == 0 else "anti-invariant"
    else:
        label = "normal-proper" if dtilde == 0 else "proper"
    return rp.CheckReport(
        check_id=check_id,
        status=rp.PASS,
        detail=f"{label}; p={p} q={q} dim Dtilde={dtilde}",
    )


def verify_prop25(ambient: ManifoldSpec, spec: SubmanifoldSpec, samples,
                  tol: float = 1e-6) -> rp.CheckReport:
    """Three consequences of the splitting: the tangential part phi is
    itself mu-compatible with the induced metric, F^2 maps Dperp into
    Dperp, and the complement Dtilde is F-invariant."""
    check_id = "prop_2_5"
    samples = _samples_2d(samples)
    worst = -1.0
    witness = None
    res_iv = res_v = res_vi = 0.0
    for u in samples:
        split = split_tangent(ambient, spec, u)
        g = split.frame.metric
        f = affinor_at(ambient, split.frame.x)
        tangent = split.frame.tangent_basis
        phis = [phi_of(split, ambient, t) for t in tangent]
        for i in range(spec.dim):
            for j in range(spec.dim):
                r = abs(
                    float(phis[i] @ g @ tangent[j])
                    + ambient.mu * float(tangent[i] @ g @ phis[j])
                )
                res_iv = max(res_iv, r)
                if r > worst:
                    worst, witness = r, u
        for e in split.basis_dperp:
            w = f @ (f @ e)
            r = np.hypot(
                gnorm(g, project_onto_rows(split.basis_d, g, w)),
                gnorm(g, project_onto_rows(split.frame.normal_basis, g, w)),
            )
            res_v = max(res_v, r)
            if r > worst:
                worst, witness = r, u
        for v in split.basis_dtilde:
            w = f @ v
            r = np.hypot(
                gnorm(g, project_onto_rows(tangent, g, w)),
                gnorm(g, project_onto_rows(split.basis_fdperp, g, w)),
            )
            res_vi = max(res_vi, r)
            if r > worst:
                worst, witness = r, u
    worst = max(worst, 0.0)
    if witness is None:
        witness = samples[0]
    return rp.CheckReport(
        check_id=check_id,
        status=rp.PASS if worst <= tol else rp.FAIL,
        max_residual=worst,
        threshold=tol,
        witness=tuple(witness),
        detail=(
            f"(iv) phi compatibility {res_iv!r}; (v) F^2(Dperp) in Dperp {res_v!r}; "
            f"(vi) F(Dtilde) in Dtilde {res_vi!r}"
        ),
    )


def verify_cor26(ambient: ManifoldSpec, spec: SubmanifoldSpec, samples,
                 ambient_nondegenerate: bool | None = None,
                 angle_tol: float = 1e-6,
                 lagrangian_tol: float = 1e-8) -> rp.CheckReport:
    """With a nondegenerate ambient structure the defining inclusions become
    equalities (measured by principal angles); for mu = +1 the fundamental
    2-form vanishes on Dperp and on its affinor image."""
    check_id = "cor_2_6"
    samples = _samples_2d(samples)
    if ambient_nondegenerate is None:
        from .affinor_manifold import nondegeneracy_verdict

        xs = [frames_at(spec, u).x for u in samples]
        ambient_nondegenerate = nondegeneracy_verdict(ambient, np.array(xs))[0]
    if not ambient_nondegenerate:
        return rp.CheckReport(
            check_id=check_id,
            status=rp.INAPPLICABLE,
            detail="hypothesis failed: ambient structure is degenerate",
        )
    worst_angle = -1.0
    worst_lagr = 0.0
    witness = None
    for u in samples:
        split = split_tangent(ambient, spec, u)
        g = split.frame.metric
        f = affinor_at(ambient, split.frame.x)
        fd = np.array([f @ d for d in split.basis_d]).reshape(split.p, ambient.dim)
        fd = np.array(_orthonormal_rows(fd, g)).reshape(-1, ambient.dim)
        f2dp = np.array([f @ (f @ e) for e in split.basis_dperp]).reshape(
            split.q, ambient.dim
        )
        f2dp = np.array(_orthonormal_rows(f2dp, g)).reshape(-1, ambient.dim)
        fdt = np.array([f @ v for v in split.basis_dtilde]).reshape(
            split.basis_dtilde.shape[0], ambient.dim
        )
        fdt = np.array(_orthonormal_rows(fdt, g)).reshape(-1, ambient.dim)
        angles = (
            principal_angle(fd, split.basis_d, g),
            principal_angle(f2dp, split.basis_dperp, g),
            principal_angle(fdt, split.basis_dtilde, g),
        )
        a = max(angles)
        if a > worst_angle:
            worst_angle, witness = a, u
        if ambient.mu == 1:
            for rows in (split.basis_dperp, split.basis_fdperp):
                for i in range(rows.shape[0]):
                    for j in range(i, rows.shape[0]):
                        omega = abs(float((f @ rows[i]) @ g @ rows[j]))
                        worst_lagr = max(worst_lagr, omega)
    worst_angle = max(worst_angle, 0.0)
    ok = worst_angle <= angle_tol and worst_lagr <= lagrangian_tol
    lagr_note = (
        f"Lagrangian residual {worst_lagr!r}"
        if ambient.mu == 1
        else "Lagrangian sub-check skipped (mu = -1)"
    )
    return rp.CheckReport(
        check_id=check_id,
        status=rp.PASS if ok else rp.FAIL,
        max_residual=worst_angle,
        threshold=angle_tol,
        witness=tuple(witness) if witness is not None else None,
        detail=f"max principal angle {worst_angle!r}; {lagr_note}",
    )
