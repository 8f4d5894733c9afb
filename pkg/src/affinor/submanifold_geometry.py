"""Embedded-submanifold calculus: frames, induced metric, Gauss-Weingarten.

Derivatives of tangent and normal fields are always taken along curves in
parameter space (pullback differentiation), so no ambient extension is ever
chosen.  Second derivatives of the embedding come from exact order-2 jets;
procedurally given fields along the submanifold are differentiated by
central differences with step ``FD_STEP``.

Frames are built by Gram-Schmidt in a fixed order (Jacobian columns for the
tangent part, ambient index order for normals, skipping directions whose
projection is negligible), which makes them deterministic and smooth in the
parameters as long as the pivot choice does not change.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from . import report as rp
from .chart_calculus import (
    FD_STEP,
    ManifoldSpec,
    StructuralError,
    VectorField,
    christoffel,
    metric_at,
)
from .expr_dsl import Expression, evaluate_jet

__all__ = [
    "SubmanifoldSpec",
    "FrameData",
    "frames_at",
    "induced_metric",
    "gauss_split",
    "second_fundamental_form",
    "induced_nabla",
    "weingarten_operator",
    "normal_frame_field",
    "frames_check",
    "duality_check",
    "h_symmetry_check",
    "totally_geodesic_check",
    "gnorm",
]

JACOBIAN_RANK_REL = 1e-8
NORMAL_PIVOT_SKIP = 1e-8
FRAME_GRAM_TOL = 1e-10


def gnorm(g: np.ndarray, v: np.ndarray) -> float:
    """Norm of an ambient vector in the metric ``g``."""
    return float(np.sqrt(max(float(v @ g @ v), 0.0)))


@dataclass(eq=False)
class SubmanifoldSpec:
    """An n-dimensional embedded submanifold of an ambient chart.

    ``embedding`` holds the m ambient components as expressions in the
    parameters ``u1..un``.  ``frame_d`` optionally declares the invariant
    distribution by spanning vector fields in parameter coordinates;
    without it the splitting module extracts the distribution itself.
    """

    name: str
    dim: int
    embedding: tuple
    ambient: ManifoldSpec
    domain: tuple
    frame_d: tuple | None = None

    def __post_init__(self):
        if not 0 < self.dim < self.ambient.dim:
            raise ValueError("parameter dimension must satisfy 0 < n < m")
        self.embedding = tuple(self.embedding)
        if len(self.embedding) != self.ambient.dim:
            raise ValueError("embedding needs one component per ambient dimension")
        for comp in self.embedding:
            if not isinstance(comp, Expression):
                raise TypeError("embedding components must be Expression")
            if comp.arity != self.dim:
                raise ValueError("embedding component arity must equal dim")
        self.domain = tuple((float(a), float(b)) for a, b in self.domain)
        if len(self.domain) != self.dim or any(b <= a for a, b in self.domain):
            raise ValueError("domain must give one positive interval per parameter")
        if self.frame_d is not None:
            self.frame_d = tuple(self.frame_d)
            if len(self.frame_d) > self.dim:
                raise ValueError("frame_d cannot exceed the tangent dimension")


@dataclass(eq=False)
class FrameData:
    """Orthonormal tangent/normal frames at one parameter point.

    ``tangent_basis`` rows are g-orthonormal ambient vectors spanning the
    tangent space, with ``tangent_basis[i] = jacobian @ tangent_coeffs[i]``;
    ``normal_basis`` rows complete them to a g-orthonormal frame of the
    ambient space.  ``gram_residual`` records how far the full frame is
    from exact orthonormality.
    """

    u: np.ndarray
    x: np.ndarray
    jacobian: np.ndarray
    metric: np.ndarray
    tangent_basis: np.ndarray
    tangent_coeffs: np.ndarray
    normal_basis: np.ndarray
    normal_pivots: tuple
    gram_residual: float

    def project_tangent(self, w: np.ndarray) -> np.ndarray:
        coeff = self.tangent_basis @ (self.metric @ w)
        return self.tangent_basis.T @ coeff

    def project_normal(self, w: np.ndarray) -> np.ndarray:
        coeff = self.normal_basis @ (self.metric @ w)
        return self.normal_basis.T @ coeff

    def ambient_to_param(self, w: np.ndarray) -> np.ndarray:
        """Parameter coordinates of the tangential part of ``w``."""
        coeff = self.tangent_basis @ (self.metric @ w)
        return self.tangent_coeffs.T @ coeff

    def push(self, c: np.ndarray) -> np.ndarray:
        """Ambient vector of a parameter-coordinate tangent vector."""
        return self.jacobian @ np.asarray(c, dtype=float)


def _point_key(u) -> tuple:
    return tuple(float(v) for v in u)


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.asarray(arr, dtype=float)
    arr.setflags(write=False)
    return arr


@lru_cache(maxsize=None)
def _embedding_jets(spec: SubmanifoldSpec, key):
    """Values, Jacobian, and Hessians of the embedding at one point."""
    m = spec.ambient.dim
    n = spec.dim
    values = np.empty(m)
    jac = np.empty((m, n))
    hess = np.empty((m, n, n))
    for k, comp in enumerate(spec.embedding):
        jet = evaluate_jet(comp, key, order=2)
        values[k] = jet.value
        jac[k] = jet.gradient
        hess[k] = jet.hessian
    return _frozen(values), _frozen(jac), _frozen(hess)


def _gram_schmidt(vectors, coeffs, g, against=(), skip_below=None):
    """g-orthonormalize ``vectors`` (two passes), mirroring ops on ``coeffs``.

    Returns (basis rows, coeff rows, kept indices).  Directions whose
    residual norm falls below ``skip_below`` are dropped; with
    ``skip_below=None`` a short vector is a hard error.
    """
    basis: list[np.ndarray] = []
    mirror: list[np.ndarray] = []
    kept: list[int] = []
    others = list(against)
    for idx, (vec, cf) in enumerate(zip(vectors, coeffs)):
        v = np.array(vec, dtype=float)
        c = None if cf is None else np.array(cf, dtype=float)
        for _ in range(2):  # re-orthogonalize for numerical safety
            for prev in others:
                v = v - (prev @ g @ v) * prev
            for built, built_c in zip(basis, mirror):
                proj = built @ g @ v
                v = v - proj * built
                if c is not None:
                    c = c - proj * built_c
        norm = gnorm(g, v)
        if skip_below is not None and norm < skip_below:
            continue
        if norm < 1e-12:
            raise StructuralError(f"Gram-Schmidt degenerated (norm {norm:g})")
        basis.append(v / norm)
        mirror.append(None if c is None else c / norm)
        kept.append(idx)
    return basis, mirror, kept


@lru_cache(maxsize=None)
def _frames_at(spec: SubmanifoldSpec, key, pivots):
    values, jac, _ = _embedding_jets(spec, key)
    n = spec.dim
    m = spec.ambient.dim
    sigma = np.linalg.svd(jac, compute_uv=False)
    if sigma[-1] <= JACOBIAN_RANK_REL * sigma[0]:
        raise StructuralError(
            f"embedding Jacobian rank-deficient at {key}: singular values "
            f"{np.array2string(sigma, precision=3)}"
        )
    g = metric_at(spec.ambient, values)
    columns = [jac[:, a] for a in range(n)]
    identity = np.eye(n)
    tangent, coeffs, _ = _gram_schmidt(columns, identity, g)

    candidates = range(m) if pivots is None else pivots
    raw = [np.eye(m)[i] for i in candidates]
    skip = NORMAL_PIVOT_SKIP if pivots is None else None
    normal_rows: list[np.ndarray] = []
    chosen: list[int] = []
    normals, _, kept = _gram_schmidt(
        raw, [None] * len(raw), g, against=tangent, skip_below=skip
    )
    for basis_vec, idx in zip(normals, kept):
        normal_rows.append(basis_vec)
        chosen.append(list(candidates)[idx])
        if len(normal_rows) == m - n:
            break
    if len(normal_rows) != m - n:
        raise StructuralError(
            f"could not complete a normal frame at {key} "
            f"({len(normal_rows)} of {m - n} directions found)"
        )

    tangent_arr = np.array(tangent)
    normal_arr = np.array(normal_rows)
    full = np.vstack([tangent_arr, normal_arr])
    gram_residual = float(np.max(np.abs(full @ g @ full.T - np.eye(m))))
    if gram_residual > 1e-8:
        raise StructuralError(f"frame lost orthonormality at {key}: {gram_residual:g}")
    return FrameData(
        u=_frozen(key),
        x=values,
        jacobian=jac,
        metric=g,
        tangent_basis=_frozen(tangent_arr),
        tangent_coeffs=_frozen(np.array(coeffs)),
        normal_basis=_frozen(normal_arr),
        normal_pivots=tuple(chosen),
        gram_residual=gram_residual,
    )


def frames_at(spec: SubmanifoldSpec, u, pivots: tuple | None = None) -> FrameData:
    """Tangent/normal frames at ``u``; ``pivots`` freezes the normal pivots
    (needed when the frame enters a finite-difference stencil)."""
    return _frames_at(spec, _point_key(u), None if pivots is None else tuple(pivots))


def induced_metric(spec: SubmanifoldSpec, u) -> np.ndarray:
    """Pullback metric ``(g_N)_ab = g(d_a f, d_b f)``."""
    frame = frames_at(spec, u)
    return frame.jacobian.T @ frame.metric @ frame.jacobian


def _param_jacobian(field, u) -> np.ndarray:
    if isinstance(field, VectorField):
        return field.jacobian(u)
    return np.zeros((len(u), len(u)))


def _param_value(field, u) -> np.ndarray:
    if isinstance(field, VectorField):
        return field.value(u)
    return np.asarray(field, dtype=float)


def gauss_split(spec: SubmanifoldSpec, u, x_vec, y_field):
    """Ambient derivative of a tangent field along a tangent direction,
    split into its tangential and normal parts.

    ``x_vec`` is a tangent vector in parameter coordinates; ``y_field`` is a
    parameter-coordinate vector (treated as frozen coefficients of the
    Jacobian columns) or a ``VectorField`` over the parameters.  Returns
    ``(tangential, normal, full)`` in ambient coordinates: the tangential
    part is the induced Levi-Civita derivative, the normal part the second
    fundamental form.
    """
    u = np.asarray(u, dtype=float)
    x_vec = np.asarray(x_vec, dtype=float)
    frame = frames_at(spec, u)
    _, jac, hess = _embedding_jets(spec, _point_key(u))
    y_val = _param_value(y_field, u)
    dy = _param_jacobian(y_field, u)
    ambient_x = jac @ x_vec
    ambient_y = jac @ y_val
    gamma = christoffel(spec.ambient, frame.x)
    full = (
        np.einsum("kab,a,b->k", hess, x_vec, y_val)
        + jac @ (dy @ x_vec)
        + np.einsum("kij,i,j->k", gamma, ambient_x, ambient_y)
    )
    return frame.project_tangent(full), frame.project_normal(full), full


def second_fundamental_form(spec: SubmanifoldSpec, u, x_vec, y_field) -> np.ndarray:
    """Normal part of the ambient derivative: ``h(X, Y)`` in ambient coords."""
    return gauss_split(spec, u, x_vec, y_field)[1]


def induced_nabla(spec: SubmanifoldSpec, u, x_vec, y_field) -> np.ndarray:
    """Induced connection: tangential part of the ambient derivative."""
    return gauss_split(spec, u, x_vec, y_field)[0]


def weingarten_operator(spec: SubmanifoldSpec, u, v_field: Callable, x_vec):
    """Shape operator and normal connection for a normal field ``v_field``.

    ``v_field`` maps a parameter point to an ambient vector that must be
    g-orthogonal to the tangent space at ``u``.  Returns the pair
    ``(A_V X, nabla-perp_X V)`` in ambient coordinates.
    """
    u = np.asarray(u, dtype=float)
    x_vec = np.asarray(x_vec, dtype=float)
    frame = frames_at(spec, u)
    v_here = np.asarray(v_field(u), dtype=float)
    tangent_part = frame.project_tangent(v_here)
    scale = max(1.0, gnorm(frame.metric, v_here))
    if gnorm(frame.metric, tangent_part) > 1e-8 * scale:
        raise ValueError(
            "field is not g-orthogonal to the tangent space at the base point "
            f"(tangential residual {gnorm(frame.metric, tangent_part):g})"
        )
    dv = (
        np.asarray(v_field(u + FD_STEP * x_vec), dtype=float)
        - np.asarray(v_field(u - FD_STEP * x_vec), dtype=float)
    ) / (2 * FD_STEP)
    gamma = christoffel(spec.ambient, frame.x)
    full = dv + np.einsum("kij,i,j->k", gamma, frame.push(x_vec), v_here)
    return -frame.project_tangent(full), frame.project_normal(full)


def normal_frame_field(spec: SubmanifoldSpec, base_u) -> list:
    """Smooth normal frame fields near ``base_u`` (pivots frozen there)."""
    pivots = frames_at(spec, base_u).normal_pivots
    count = spec.ambient.dim - spec.dim

    def make(j):
        return lambda uu: frames_at(spec, uu, pivots=pivots).normal_basis[j]

    return [make(j) for j in range(count)]


# ---------------------------------------------------------------------------
# report-producing checks


def _samples_2d(samples) -> np.ndarray:
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    if samples.size == 0:
        raise ValueError("samples must be nonempty")
    return samples


def frames_check(spec: SubmanifoldSpec, samples) -> rp.CheckReport:
    """Frame construction over the sample set: rank, orthonormality, pivots."""
    samples = _samples_2d(samples)
    worst = -1.0
    witness = None
    pivot_sets = set()
    for u in samples:
        try:
            frame = frames_at(spec, u)
        except StructuralError as exc:
            return rp.CheckReport(
                check_id="frames",
                status=rp.FAIL,
                max_residual=1.0,
                threshold=FRAME_GRAM_TOL,
                witness=tuple(u),
                detail=f"error: {exc}",
            )
        pivot_sets.add(frame.normal_pivots)
        if frame.gram_residual > worst:
            worst, witness = frame.gram_residual, u
    detail = f"normal pivots {sorted(pivot_sets)}"
    if len(pivot_sets) > 1:
        detail = "warning: normal pivot choice changes across the domain; " + detail
    return rp.CheckReport(
        check_id="frames",
        status=rp.PASS if worst <= FRAME_GRAM_TOL else rp.FAIL,
        max_residual=worst,
        threshold=FRAME_GRAM_TOL,
        witness=tuple(witness),
        detail=detail,
    )


def duality_check(spec: SubmanifoldSpec, samples, tol: float = 1e-6) -> rp.CheckReport:
    """Residual of ``g(h(X, Y), V) = g(A_V X, Y)`` over frame vectors."""
    samples = _samples_2d(samples)
    worst = -1.0
    witness = None
    for u in samples:
        frame = frames_at(spec, u)
        n = spec.dim
        normal_fields = normal_frame_field(spec, u)
        h_table = [
            [
                second_fundamental_form(spec, u, frame.tangent_coeffs[i],
                                        frame.tangent_coeffs[j])
                for j in range(n)
            ]
            for i in range(n)
        ]
        for k, v_field in enumerate(normal_fields):
            nu = frame.normal_basis[k]
            for i in range(n):
                shape_applied, _ = weingarten_operator(
                    spec, u, v_field, frame.tangent_coeffs[i]
                )
                for j in range(n):
                    lhs = float(h_table[i][j] @ frame.metric @ nu)
                    rhs = float(shape_applied @ frame.metric @ frame.tangent_basis[j])
                    residual = abs(lhs - rhs)
                    if residual > worst:
                        worst, witness = residual, u
    if worst < 0.0:  # no normal directions (m = n is excluded, so unreachable)
        worst, witness = 0.0, samples[0]
    return rp.CheckReport(
        check_id="eq_1_4_duality",
        status=rp.PASS if worst <= tol else rp.FAIL,
        max_residual=worst,
        threshold=tol,
        witness=tuple(witness),
        detail="second fundamental form and shape operator are g-dual",
    )


def h_symmetry_check(spec: SubmanifoldSpec, samples, tol: float = 1e-8) -> rp.CheckReport:
    samples = _samples_2d(samples)
    worst = -1.0
    witness = None
    for u in samples:
        frame = frames_at(spec, u)
        n = spec.dim
        for i in range(n):
            for j in range(i + 1, n):
                forward = second_fundamental_form(
                    spec, u, frame.tangent_coeffs[i], frame.tangent_coeffs[j]
                )
                backward = second_fundamental_form(
                    spec, u, frame.tangent_coeffs[j], frame.tangent_coeffs[i]
                )
                residual = gnorm(frame.metric, forward - backward)
                if residual > worst:
                    worst, witness = residual, u
    if worst < 0.0:  # one-dimensional submanifold: nothing to compare
        worst, witness = 0.0, samples[0]
    return rp.CheckReport(
        check_id="h_symmetry",
        status=rp.PASS if worst <= tol else rp.FAIL,
        max_residual=worst,
        threshold=tol,
        witness=tuple(witness),
        detail="h(X, Y) = h(Y, X) over frame pairs",
    )


def totally_geodesic_check(spec: SubmanifoldSpec, samples,
                           tol: float = 1e-6) -> rp.CheckReport:
    samples = _samples_2d(samples)
    worst = -1.0
    witness = None
    for u in samples:
        frame = frames_at(spec, u)
        n = spec.dim
        for i in range(n):
            for j in range(i, n):
                h_vec = second_fundamental_form(
                    spec, u, frame.tangent_coeffs[i], frame.tangent_coeffs[j]
                )
                size = gnorm(frame.metric, h_vec)
                if size > worst:
                    worst, witness = size, u
    verdict = "totally geodesic" if worst <= tol else "not totally geodesic"
    return rp.CheckReport(
        check_id="totally_geodesic",
        status=rp.PASS if worst <= tol else rp.FAIL,
        max_residual=worst,
        threshold=tol,
        witness=tuple(witness),
        detail=f"{verdict}; max |h| = {worst!r}",
    )
