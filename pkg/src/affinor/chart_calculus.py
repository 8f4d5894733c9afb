"""Pointwise tensor calculus on a single coordinate chart.

Index conventions, fixed once here: the metric ``g`` carries two lower
indices (``g_ij``), the affinor ``F`` one upper and one lower index with
``(F X)^i = F^i_j X^j``, and Christoffel symbols are returned as
``gamma[k, i, j] = Γ^k_{ij}``.

All operations are pure functions of immutable specs; evaluating the same
spec from several threads is safe.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .expr_dsl import Expression, evaluate, evaluate_jet

__all__ = [
    "FD_STEP",
    "ManifoldSpec",
    "StructuralError",
    "VectorField",
    "metric_at",
    "metric_inverse_at",
    "affinor_at",
    "christoffel",
    "covariant_derivative",
    "lie_bracket",
    "nijenhuis_of",
    "nabla_affinor",
]

FD_STEP = 1e-5  # central-difference step for procedural fields
METRIC_EIG_FLOOR = 1e-10


class StructuralError(RuntimeError):
    """A structural invariant failed at a concrete point."""


def _point_key(x) -> tuple[float, ...]:
    return tuple(float(v) for v in x)


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.asarray(arr, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(eq=False)
class ManifoldSpec:
    """A chart of an m-dimensional manifold carrying a metric and an affinor.

    ``mu`` is the sign in the compatibility identity
    ``g(FX, Y) + mu * g(X, FY) = 0``.  The domain box is where sample points
    are drawn; it is not a hard evaluation boundary (finite-difference
    stencils may step marginally outside).  Treat instances as read-only
    after construction.
    """

    name: str
    dim: int
    mu: int
    metric: tuple
    affinor: tuple
    domain: tuple

    def __post_init__(self):
        if self.mu not in (-1, 1):
            raise ValueError("mu must be -1 or +1")
        if self.dim < 1:
            raise ValueError("dimension must be positive")
        self.metric = tuple(tuple(row) for row in self.metric)
        self.affinor = tuple(tuple(row) for row in self.affinor)
        self.domain = tuple((float(a), float(b)) for a, b in self.domain)
        for mat, label in ((self.metric, "metric"), (self.affinor, "affinor")):
            if len(mat) != self.dim or any(len(row) != self.dim for row in mat):
                raise ValueError(f"{label} must be a {self.dim}x{self.dim} matrix")
            for row in mat:
                for entry in row:
                    if not isinstance(entry, Expression):
                        raise TypeError(f"{label} entries must be Expression")
                    if entry.arity != self.dim:
                        raise ValueError(
                            f"{label} entry arity {entry.arity} != dim {self.dim}"
                        )
        if len(self.domain) != self.dim:
            raise ValueError("domain must give one interval per dimension")
        if any(b <= a for a, b in self.domain):
            raise ValueError("domain intervals must have positive length")


def _eval_matrix(rows, x) -> np.ndarray:
    return np.array([[evaluate(e, x) for e in row] for row in rows], dtype=float)


@lru_cache(maxsize=None)
def _metric_at(spec: ManifoldSpec, key) -> np.ndarray:
    g = _eval_matrix(spec.metric, key)
    asym = np.max(np.abs(g - g.T)) if g.size else 0.0
    if asym > 1e-10 * (1.0 + np.max(np.abs(g))):
        raise StructuralError(f"metric not symmetric at {key}: residual {asym:g}")
    g = 0.5 * (g + g.T)
    smallest = float(np.linalg.eigvalsh(g)[0])
    if smallest <= METRIC_EIG_FLOOR:
        raise StructuralError(
            f"metric degenerate at {key}: smallest eigenvalue {smallest:g}"
        )
    return _frozen(g)


@lru_cache(maxsize=None)
def _metric_inverse_at(spec: ManifoldSpec, key) -> np.ndarray:
    return _frozen(np.linalg.inv(_metric_at(spec, key)))


@lru_cache(maxsize=None)
def _affinor_at(spec: ManifoldSpec, key) -> np.ndarray:
    return _frozen(_eval_matrix(spec.affinor, key))


@lru_cache(maxsize=None)
def _christoffel(spec: ManifoldSpec, key) -> np.ndarray:
    m = spec.dim
    dg = np.empty((m, m, m))  # dg[k, i, j] = d_k g_ij
    for i in range(m):
        for j in range(m):
            dg[:, i, j] = evaluate_jet(spec.metric[i][j], key, order=1).gradient
    ginv = _metric_inverse_at(spec, key)
    # T[l, i, j] = d_i g_jl + d_j g_il - d_l g_ij
    t = np.einsum("ijl->lij", dg) + np.einsum("jil->lij", dg) - dg
    return _frozen(0.5 * np.einsum("kl,lij->kij", ginv, t))


def metric_at(spec: ManifoldSpec, x) -> np.ndarray:
    """Metric matrix at ``x``; raises ``StructuralError`` if degenerate."""
    return _metric_at(spec, _point_key(x))


def metric_inverse_at(spec: ManifoldSpec, x) -> np.ndarray:
    return _metric_inverse_at(spec, _point_key(x))


def affinor_at(spec: ManifoldSpec, x) -> np.ndarray:
    return _affinor_at(spec, _point_key(x))


def christoffel(spec: ManifoldSpec, x) -> np.ndarray:
    """Levi-Civita symbols ``gamma[k, i, j]``, symmetric in (i, j)."""
    return _christoffel(spec, _point_key(x))


class VectorField:
    """A field given by component expressions, a point evaluator, or a constant.

    Expression-backed fields differentiate exactly via jets; procedural
    evaluators use central finite differences with step ``FD_STEP`` and are
    expected to be smooth near where they are differentiated.
    """

    __slots__ = ("dim", "_components", "_func", "_constant")

    def __init__(self, dim, components=None, func=None, constant=None):
        self.dim = dim
        self._components = components
        self._func = func
        self._constant = constant

    @classmethod
    def from_expressions(cls, components: Sequence[Expression]) -> "VectorField":
        components = tuple(components)
        if not components:
            raise ValueError("a vector field needs at least one component")
        return cls(len(components), components=components)

    @classmethod
    def from_function(cls, func: Callable, dim: int) -> "VectorField":
        return cls(dim, func=func)

    @classmethod
    def constant(cls, values) -> "VectorField":
        values = _frozen(np.asarray(values, dtype=float))
        return cls(len(values), constant=values)

    def value(self, x) -> np.ndarray:
        if self._constant is not None:
            return self._constant
        if self._components is not None:
            return np.array([evaluate(e, x) for e in self._components])
        return np.asarray(self._func(np.asarray(x, dtype=float)), dtype=float)

    def jacobian(self, x) -> np.ndarray:
        """``d[i, j] = d X^i / d x^j`` at ``x``."""
        if self._constant is not None:
            return np.zeros((self.dim, len(x)))
        if self._components is not None:
            return np.array(
                [evaluate_jet(e, x, order=1).gradient for e in self._components]
            )
        x = np.asarray(x, dtype=float)
        n = len(x)
        jac = np.empty((self.dim, n))
        for j in range(n):
            shift = np.zeros(n)
            shift[j] = FD_STEP
            jac[:, j] = (self.value(x + shift) - self.value(x - shift)) / (2 * FD_STEP)
        return jac


def covariant_derivative(spec: ManifoldSpec, x_field: VectorField,
                         y_field: VectorField, x) -> np.ndarray:
    """Levi-Civita derivative ``(nabla_X Y)^k = X^i d_i Y^k + gamma^k_ij X^i Y^j``."""
    xv = x_field.value(x)
    yv = y_field.value(x)
    gamma = christoffel(spec, x)
    return y_field.jacobian(x) @ xv + np.einsum("kij,i,j->k", gamma, xv, yv)


def lie_bracket(x_field: VectorField, y_field: VectorField, x) -> np.ndarray:
    """``[X, Y]^k = X^i d_i Y^k - Y^i d_i X^k`` at ``x``."""
    return y_field.jacobian(x) @ x_field.value(x) - x_field.jacobian(x) @ y_field.value(x)


def _tensor_apply(tensor, dim: int) -> Callable:
    """Normalize a (1,1)-tensor given as Expression matrix / array / callable."""
    if callable(tensor):
        return lambda p: np.asarray(tensor(p), dtype=float)
    if isinstance(tensor, np.ndarray):
        mat = tensor.astype(float)
        return lambda p: mat
    rows = tuple(tuple(row) for row in tensor)
    if len(rows) != dim or any(len(r) != dim for r in rows):
        raise ValueError(f"tensor must be {dim}x{dim}")
    return lambda p: _eval_matrix(rows, p)


def nijenhuis_of(tensor, x_field: VectorField, y_field: VectorField, x) -> np.ndarray:
    """Four-term torsion of a (1,1)-tensor field A:

    ``N_A(X, Y) = [AX, AY] + A^2 [X, Y] - A [AX, Y] - A [X, AY]``

    AX and AY are formed as procedural fields, so their derivatives use
    central finite differences regardless of how X and Y are backed.
    """
    dim = x_field.dim
    apply_a = _tensor_apply(tensor, dim)
    ax = VectorField.from_function(lambda p: apply_a(p) @ x_field.value(p), dim)
    ay = VectorField.from_function(lambda p: apply_a(p) @ y_field.value(p), dim)
    a_here = apply_a(np.asarray(x, dtype=float))
    return (
        lie_bracket(ax, ay, x)
        + a_here @ (a_here @ lie_bracket(x_field, y_field, x))
        - a_here @ lie_bracket(ax, y_field, x)
        - a_here @ lie_bracket(x_field, ay, x)
    )


@lru_cache(maxsize=None)
def _nabla_affinor(spec: ManifoldSpec, key) -> np.ndarray:
    m = spec.dim
    df = np.empty((m, m, m))  # df[k, i, j] = d_k F^i_j
    for i in range(m):
        for j in range(m):
            df[:, i, j] = evaluate_jet(spec.affinor[i][j], key, order=1).gradient
    f = _affinor_at(spec, key)
    gamma = _christoffel(spec, key)
    # out[i, j, k] = (nabla_k F)^i_j
    out = (
        np.einsum("kij->ijk", df)
        + np.einsum("ikl,lj->ijk", gamma, f)
        - np.einsum("lkj,il->ijk", gamma, f)
    )
    return _frozen(out)


def nabla_affinor(spec: ManifoldSpec, x) -> np.ndarray:
    """Covariant derivative of the affinor, ``out[i, j, k] = (nabla_k F)^i_j``."""
    return _nabla_affinor(spec, _point_key(x))
