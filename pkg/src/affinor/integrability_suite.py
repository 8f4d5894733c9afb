"""Frobenius integrability tests and the theorem verification harness.

Frame fields for the invariant/anti-invariant distributions are built as
projections of fixed coordinate vector fields: the projection operator onto
a distribution is independent of the basis chosen inside it, so these
fields are smooth wherever the rank is constant, even where individual
SVD basis vectors are not.  Pivots are chosen greedily at a base point and
frozen; samples where the frozen frame loses rank trigger a deterministic
re-framing that is noted in the report.

Residual bands: a bracket-based residual at or below ``HOLD_TOL`` counts as
holding, at or above ``FAIL_TOL`` as failing, and anything in between is
indeterminate — finite-difference noise must not manufacture theorem
counterexamples.  Equivalence verdicts over several conditions report
``all-hold``, ``none-hold``, ``MISMATCH`` (definitive disagreement, never
suppressed), or ``indeterminate`` (no claim).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from . import report as rp
from .affinor_manifold import nondegeneracy_verdict, parallelism_residual
from .chart_calculus import FD_STEP, ManifoldSpec, StructuralError, VectorField, affinor_at
from .semi_invariant import (
    SplitData,
    project_onto_rows,
    split_tangent,
    verify_definition21,
)
from .submanifold_geometry import (
    SubmanifoldSpec,
    frames_at,
    gauss_split,
    gnorm,
    second_fundamental_form,
    weingarten_operator,
)

__all__ = [
    "HOLD_TOL",
    "FAIL_TOL",
    "FrameField",
    "Condition",
    "EquivalenceVerdict",
    "Hypotheses",
    "compute_hypotheses",
    "failed_hypotheses",
    "inapplicable_report",
    "smooth_frame",
    "frame_values",
    "frobenius_residual",
    "phi_matrix",
    "nijenhuis_phi",
    "check_theorem31",
    "check_theorem33",
    "check_eq38",
    "check_prop42",
    "check_theorem44",
    "check_theorem46",
    "check_eq410",
    "check_theorem48",
    "check_eq414",
    "check_theorem410",
]

HOLD_TOL = 1e-5
FAIL_TOL = 1e-3
FRAME_RANK_REL = 1e-8

HOLDS = "holds"
FAILS = "fails"
INDET = "indeterminate"
VACUOUS = "vacuous"


# ---------------------------------------------------------------------------
# hypotheses shared by the theorem checks


@dataclass
class Hypotheses:
    """Ambient/submanifold facts the theorem checks are gated on."""

    compatible: bool
    nondegenerate: bool
    parallel: bool
    parallel_residual: float
    mu: int
    semi_invariant: bool | None  # None when there is no submanifold
    rank_ambiguous: bool


def compute_hypotheses(ambient: ManifoldSpec, sub: SubmanifoldSpec | None,
                       ambient_samples, param_samples=None) -> Hypotheses:
    from .affinor_manifold import check_compatibility

    compat = check_compatibility(ambient, ambient_samples)
    nondeg, _, _ = nondegeneracy_verdict(ambient, ambient_samples)
    par_res, _ = parallelism_residual(ambient, ambient_samples)
    semi: bool | None = None
    ambiguous = False
    if sub is not None:
        if param_samples is None:
            raise ValueError("param_samples required when a submanifold is given")
        def21 = verify_definition21(ambient, sub, param_samples)
        semi = def21.status == rp.PASS
        ambiguous = def21.status == rp.RANK_AMBIGUOUS
    return Hypotheses(
        compatible=compat.status == rp.PASS,
        nondegenerate=nondeg,
        parallel=par_res <= 1e-8,
        parallel_residual=par_res,
        mu=ambient.mu,
        semi_invariant=semi,
        rank_ambiguous=ambiguous,
    )


def failed_hypotheses(hyp: Hypotheses, *, need_nondegenerate=False,
                       need_parallel=False, need_mu=None,
                       need_semi_invariant=True) -> list[str]:
    failed = []
    if hyp.semi_invariant is None:
        failed.append("no submanifold")
    elif need_semi_invariant and not hyp.semi_invariant:
        failed.append(
            "submanifold is rank-ambiguous"
            if hyp.rank_ambiguous
            else "submanifold is not semi-invariant"
        )
    if need_nondegenerate and not hyp.nondegenerate:
        failed.append("ambient structure degenerate")
    if need_parallel and not hyp.parallel:
        failed.append(
            f"parallelism failed (max |nabla F| = {hyp.parallel_residual!r})"
        )
    if need_mu is not None and hyp.mu != need_mu:
        failed.append(f"mu = {need_mu:+d} required (structure has mu = {hyp.mu:+d})")
    return failed


def inapplicable_report(check_id: str, failed: Sequence[str], note: str = "") -> rp.CheckReport:
    detail = "hypothesis failed: " + "; ".join(failed)
    if note:
        detail += f" [{note}]"
    return rp.CheckReport(check_id=check_id, status=rp.INAPPLICABLE, detail=detail)


# ---------------------------------------------------------------------------
# frame fields


def _memoized(fn: Callable) -> Callable:
    cache: dict = {}

    def wrapped(u):
        key = tuple(float(v) for v in u)
        hit = cache.get(key)
        if hit is None:
            hit = np.asarray(fn(np.array(key)), dtype=float)
            cache[key] = hit
        return hit

    return wrapped


@dataclass(eq=False)
class FrameField:
    """k smooth procedural fields spanning one distribution near a base point."""

    target: str  # "D" or "Dperp"
    base: tuple
    pivots: tuple
    fields: tuple
    provenance: str
    ambient: ManifoldSpec
    sub: SubmanifoldSpec

    @property
    def k(self) -> int:
        return len(self.fields)


def _target_rows(split: SplitData, target: str) -> np.ndarray:
    if target == "D":
        return split.basis_d
    if target == "Dperp":
        return split.basis_dperp
    raise ValueError("target must be 'D' or 'Dperp'")


def _complement_rows(split: SplitData, target: str) -> np.ndarray:
    return split.basis_dperp if target == "D" else split.basis_d


def smooth_frame(ambient: ManifoldSpec, sub: SubmanifoldSpec, target: str,
                 base) -> FrameField:
    """Greedy-pivoted projected-coordinate frame for the target distribution."""
    base_key = tuple(float(v) for v in base)
    split = split_tangent(ambient, sub, base_key)
    rows = _target_rows(split, target)
    k = rows.shape[0]
    if k == 0:
        return FrameField(target, base_key, (), (), "projected-constant", ambient, sub)
    g = split.frame.metric
    n = sub.dim
    candidates = {
        a: project_onto_rows(rows, g, split.frame.jacobian[:, a]) for a in range(n)
    }
    pivots: list[int] = []
    for _ in range(k):
        best = max(
            sorted(candidates),
            key=lambda a: gnorm(g, candidates[a]),
        )
        direction = candidates.pop(best)
        norm = gnorm(g, direction)
        if norm < 1e-10:
            raise StructuralError(
                f"cannot build a {target} frame at {base_key}: projections degenerate"
            )
        unit = direction / norm
        for a in list(candidates):
            candidates[a] = candidates[a] - (unit @ g @ candidates[a]) * unit
        pivots.append(best)

    def make(a):
        def value(uu):
            local = split_tangent(ambient, sub, uu)
            projected = project_onto_rows(
                _target_rows(local, target),
                local.frame.metric,
                local.frame.jacobian[:, a],
            )
            return local.frame.ambient_to_param(projected)

        return _memoized(value)

    return FrameField(
        target=target,
        base=base_key,
        pivots=tuple(pivots),
        fields=tuple(make(a) for a in pivots),
        provenance="projected-constant",
        ambient=ambient,
        sub=sub,
    )


def frame_values(frame: FrameField, u) -> np.ndarray:
    """Stacked field values at ``u`` (rows, parameter coordinates)."""
    return np.array([f(u) for f in frame.fields]).reshape(frame.k, frame.sub.dim)


def _frame_ok(frame: FrameField, u) -> bool:
    if frame.k == 0:
        return True
    values = frame_values(frame, u)
    sigma = np.linalg.svd(values, compute_uv=False)
    return sigma[-1] > FRAME_RANK_REL * sigma[0]


def _frame_for_sample(frame: FrameField, u) -> tuple[FrameField, bool]:
    """Re-frame at ``u`` when the frozen pivots lose independence there."""
    if _frame_ok(frame, u):
        return frame, False
    return smooth_frame(frame.ambient, frame.sub, frame.target, u), True


def _jacobians(fields: Sequence[Callable], u, step: float = FD_STEP):
    """Values and parameter-space Jacobians of procedural fields at ``u``."""
    u = np.asarray(u, dtype=float)
    n = len(u)
    values = [np.asarray(f(u), dtype=float) for f in fields]
    jacs = [np.empty((len(v), n)) for v in values]
    for b in range(n):
        e = np.zeros(n)
        e[b] = step
        plus = [np.asarray(f(u + e), dtype=float) for f in fields]
        minus = [np.asarray(f(u - e), dtype=float) for f in fields]
        for jac, hi, lo in zip(jacs, plus, minus):
            jac[:, b] = (hi - lo) / (2 * step)
    return values, jacs


def _bracket_from(values, jacs, i: int, j: int) -> np.ndarray:
    return jacs[j] @ values[i] - jacs[i] @ values[j]


# ---------------------------------------------------------------------------
# Frobenius residual


def _frobenius_numbers(ambient, sub, frame: FrameField, samples, complement=None):
    complement_of = complement or (lambda split: _complement_rows(split, frame.target))
    worst = 0.0
    witness = tuple(np.asarray(samples[0], dtype=float))
    per_sample: list[float] = []
    reframed = 0
    for u in np.atleast_2d(np.asarray(samples, dtype=float)):
        local_frame, again = _frame_for_sample(frame, u)
        reframed += int(again)
        split = split_tangent(ambient, sub, u)
        sample_worst = 0.0
        if local_frame.k >= 2:
            values, jacs = _jacobians(local_frame.fields, u)
            for i in range(local_frame.k):
                for j in range(i + 1, local_frame.k):
                    bracket = _bracket_from(values, jacs, i, j)
                    leak = project_onto_rows(
                        complement_of(split), split.frame.metric,
                        split.frame.push(bracket),
                    )
                    sample_worst = max(sample_worst, gnorm(split.frame.metric, leak))
        per_sample.append(sample_worst)
        if sample_worst >= worst:
            if sample_worst > worst:
                witness = tuple(u)
            worst = max(worst, sample_worst)
    return worst, witness, per_sample, reframed


def frobenius_residual(ambient: ManifoldSpec, sub: SubmanifoldSpec,
                       frame: FrameField, samples, complement=None,
                       check_id: str = "frobenius") -> rp.CheckReport:
    """Leak of pairwise frame brackets into the complement distribution.

    Verdicts: integrable (pass) at or below ``HOLD_TOL``, non-integrable
    (fail) at or above ``FAIL_TOL``, indeterminate in between.
    """
    worst, witness, per_sample, reframed = _frobenius_numbers(
        ambient, sub, frame, samples, complement
    )
    if worst <= HOLD_TOL:
        status, verdict = rp.PASS, "integrable"
    elif worst >= FAIL_TOL:
        status, verdict = rp.FAIL, "non-integrable"
    else:
        status, verdict = rp.INDETERMINATE, "indeterminate"
    detail = f"{verdict}; {frame.k} frame fields; min per-sample residual {min(per_sample)!r}"
    if reframed:
        detail += f"; re-framed at {reframed} samples"
    return rp.CheckReport(
        check_id=check_id,
        status=status,
        max_residual=worst,
        threshold=HOLD_TOL,
        witness=witness,
        detail=detail,
    )


# ---------------------------------------------------------------------------
# phi as a parameter-space matrix field, and its torsion


@lru_cache(maxsize=None)
def _phi_matrix(ambient: ManifoldSpec, sub: SubmanifoldSpec, key) -> np.ndarray:
    split = split_tangent(ambient, sub, key)
    frame = split.frame
    f = affinor_at(ambient, frame.x)
    n = sub.dim
    out = np.empty((n, n))
    for a in range(n):
        projected = project_onto_rows(split.basis_d, frame.metric, frame.jacobian[:, a])
        out[:, a] = frame.ambient_to_param(f @ projected)
    out.setflags(write=False)
    return out


def phi_matrix(ambient: ManifoldSpec, sub: SubmanifoldSpec, u) -> np.ndarray:
    """Matrix of ``phi = F o P`` acting on parameter coordinates at ``u``."""
    return _phi_matrix(ambient, sub, tuple(float(v) for v in u))


def _phi_field(ambient, sub, base_field: Callable) -> Callable:
    return _memoized(lambda uu: phi_matrix(ambient, sub, uu) @ base_field(uu))


def nijenhuis_phi(ambient: ManifoldSpec, sub: SubmanifoldSpec,
                  x_field: Callable, y_field: Callable, u) -> np.ndarray:
    """Four-term torsion of phi in parameter coordinates:

    ``N_phi(X, Y) = [phiX, phiY] + phi^2 [X, Y] - phi [phiX, Y] - phi [X, phiY]``
    """
    phi_x = _phi_field(ambient, sub, x_field)
    phi_y = _phi_field(ambient, sub, y_field)
    values, jacs = _jacobians([x_field, y_field, phi_x, phi_y], u)
    phi_here = phi_matrix(ambient, sub, u)
    return (
        _bracket_from(values, jacs, 2, 3)
        + phi_here @ (phi_here @ _bracket_from(values, jacs, 0, 1))
        - phi_here @ _bracket_from(values, jacs, 2, 1)
        - phi_here @ _bracket_from(values, jacs, 0, 3)
    )


# ---------------------------------------------------------------------------
# equivalence harness


@dataclass
class Condition:
    name: str
    residual: float
    status: str
    witness: tuple | None = None
    note: str = ""


def _condition(name: str, residual: float, witness, vacuous: bool = False,
               note: str = "") -> Condition:
    if vacuous:
        return Condition(name, 0.0, VACUOUS, None, note or "vacuous")
    if residual <= HOLD_TOL:
        status = HOLDS
    elif residual >= FAIL_TOL:
        status = FAILS
    else:
        status = INDET
    return Condition(name, float(residual), status,
                     tuple(witness) if witness is not None else None, note)


@dataclass
class EquivalenceVerdict:
    """Joint outcome of the residual conditions an equivalence quantifies over.

    ``sides`` groups condition names into the statements that must agree; a
    side holds when all of its conditions hold (vacuous counts as holding)
    and fails when any condition definitively fails.
    """

    check_id: str
    conditions: list[Condition]
    sides: list[tuple[str, tuple[str, ...]]]
    verdict: str = field(init=False)
    hypothesis_notes: str = ""

    def __post_init__(self):
        by_name = {c.name: c for c in self.conditions}
        side_status = []
        for _, names in self.sides:
            members = [by_name[name] for name in names]
            if any(c.status == FAILS for c in members):
                side_status.append(FAILS)
            elif all(c.status in (HOLDS, VACUOUS) for c in members):
                side_status.append(HOLDS)
            else:
                side_status.append(INDET)
        if HOLDS in side_status and FAILS in side_status:
            self.verdict = "MISMATCH"
        elif INDET in side_status:
            self.verdict = "indeterminate"
        elif all(s == HOLDS for s in side_status):
            self.verdict = "all-hold"
        else:
            self.verdict = "none-hold"

    def to_report(self) -> rp.CheckReport:
        parts = [f"verdict={self.verdict}"]
        parts += [
            f"{c.name}={c.residual!r} ({c.status}{'; ' + c.note if c.note else ''})"
            for c in self.conditions
        ]
        if self.hypothesis_notes:
            parts.append(self.hypothesis_notes)
        detail = "; ".join(parts)
        witness = None
        for cond in sorted(self.conditions, key=lambda c: -c.residual):
            if cond.witness is not None:
                witness = cond.witness
                break
        if self.verdict == "all-hold":
            residual = max((c.residual for c in self.conditions), default=0.0)
            return rp.CheckReport(self.check_id, rp.PASS, residual, HOLD_TOL,
                                  witness, detail)
        if self.verdict == "none-hold":
            return rp.CheckReport(self.check_id, rp.PASS, 0.0, HOLD_TOL,
                                  witness, detail)
        if self.verdict == "MISMATCH":
            residual = max((c.residual for c in self.conditions), default=0.0)
            return rp.CheckReport(self.check_id, rp.MISMATCH, residual, HOLD_TOL,
                                  witness, detail)
        residual = max(
            (c.residual for c in self.conditions if c.status == INDET), default=0.0
        )
        return rp.CheckReport(self.check_id, rp.INDETERMINATE, residual, HOLD_TOL,
                              witness, detail)


def _max_tracker():
    state = {"value": 0.0, "witness": None}

    def update(residual: float, u):
        residual = float(residual)
        if state["witness"] is None or residual > state["value"]:
            state["witness"] = tuple(u)
        state["value"] = max(state["value"], residual)

    return state, update


def _per_frame(factory: Callable) -> Callable:
    """Build derived fields once per FrameField (re-framing is rare)."""
    cache: dict = {}

    def get(frame: FrameField):
        key = id(frame)
        if key not in cache:
            cache[key] = factory(frame)
        return cache[key]

    return get


def _samples_2d(samples) -> np.ndarray:
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    if samples.size == 0:
        raise ValueError("samples must be nonempty")
    return samples


def _default_hyp(ambient, sub, samples) -> Hypotheses:
    from .sampling import DEFAULT_SEED, sample_domain

    ambient_samples = sample_domain(ambient.domain, len(samples), DEFAULT_SEED)
    return compute_hypotheses(ambient, sub, ambient_samples, samples)


def _pullback_f_field(ambient, sub, base_field: Callable) -> Callable:
    """Parameter coordinates of F applied to the pushforward of a field."""

    def value(uu):
        frame = frames_at(sub, uu)
        f = affinor_at(ambient, frame.x)
        return frame.ambient_to_param(f @ frame.push(base_field(uu)))

    return _memoized(value)


# ---------------------------------------------------------------------------
# theorem checks


def check_theorem31(ambient: ManifoldSpec, sub: SubmanifoldSpec, samples,
                    hyp: Hypotheses | None = None) -> rp.CheckReport:
    """Equivalence of D-integrability, vanishing of Q o N_phi on D, and
    agreement of the two torsion tensors on D."""
    check_id = "thm_3_1_d_integrability"
    samples = _samples_2d(samples)
    hyp = hyp or _default_hyp(ambient, sub, samples)
    failed = failed_hypotheses(hyp, need_nondegenerate=True)
    if failed:
        return inapplicable_report(
            check_id, failed,
            note="statement omits nondegeneracy; the proof requires it",
        )
    frame = smooth_frame(ambient, sub, "D", samples[0])
    frob, frob_witness, _, _ = _frobenius_numbers(ambient, sub, frame, samples)
    q_state, q_update = _max_tracker()
    nf_state, nf_update = _max_tracker()
    vacuous = frame.k < 2
    derived = _per_frame(
        lambda fr: (
            [_pullback_f_field(ambient, sub, xf) for xf in fr.fields],
            [_phi_field(ambient, sub, xf) for xf in fr.fields],
        )
    )
    for u in samples:
        local, _ = _frame_for_sample(frame, u)
        if local.k < 2:
            continue
        split = split_tangent(ambient, sub, u)
        g = split.frame.metric
        f = affinor_at(ambient, split.frame.x)
        fx_fields, phi_fields = derived(local)
        values, jacs = _jacobians(
            list(local.fields) + fx_fields + phi_fields, u
        )
        k = local.k
        phi_here = phi_matrix(ambient, sub, u)
        for i in range(k):
            for j in range(i + 1, k):
                nphi = (
                    _bracket_from(values, jacs, 2 * k + i, 2 * k + j)
                    + phi_here @ (phi_here @ _bracket_from(values, jacs, i, j))
                    - phi_here @ _bracket_from(values, jacs, 2 * k + i, j)
                    - phi_here @ _bracket_from(values, jacs, i, 2 * k + j)
                )
                nphi_ambient = split.frame.push(nphi)
                q_leak = project_onto_rows(split.basis_dperp, g, nphi_ambient)
                q_update(gnorm(g, q_leak), u)
                nf_ambient = (
                    split.frame.push(_bracket_from(values, jacs, k + i, k + j))
                    + f @ (f @ split.frame.push(_bracket_from(values, jacs, i, j)))
                    - f @ split.frame.push(_bracket_from(values, jacs, k + i, j))
                    - f @ split.frame.push(_bracket_from(values, jacs, i, k + j))
                )
                nf_update(gnorm(g, nf_ambient - nphi_ambient), u)
    conditions = [
        _condition("d_frobenius", frob, frob_witness, vacuous=vacuous),
        _condition("q_nphi_on_d", q_state["value"], q_state["witness"], vacuous=vacuous),
        _condition("nf_equals_nphi_on_d", nf_state["value"], nf_state["witness"],
                   vacuous=vacuous),
    ]
    sides = [("1", ("d_frobenius",)), ("2", ("q_nphi_on_d",)),
             ("3", ("nf_equals_nphi_on_d",))]
    return EquivalenceVerdict(check_id, conditions, sides).to_report()


def check_theorem33(ambient: ManifoldSpec, sub: SubmanifoldSpec, samples,
                    hyp: Hypotheses | None = None) -> rp.CheckReport:
    """Dperp is integrable exactly when N_phi vanishes on it."""
    check_id = "thm_3_3_dperp_integrability"
    samples = _samples_2d(samples)
    hyp = hyp or _default_hyp(ambient, sub, samples)
    failed = failed_hypotheses(hyp, need_nondegenerate=True)
    if failed:
        return inapplicable_report(check_id, failed)
    frame = smooth_frame(ambient, sub, "Dperp", samples[0])
    frob, frob_witness, _, _ = _frobenius_numbers(ambient, sub, frame, samples)
    nphi_state, nphi_update = _max_tracker()
    vacuous = frame.k < 2
    for u in samples:
        local, _ = _frame_for_sample(frame, u)
        if local.k < 2:
            continue
        split = split_tangent(ambient, sub, u)
        for i in range(local.k):
            for j in range(i + 1, local.k):
                value = nijenhuis_phi(ambient, sub, local.fields[i], local.fields[j], u)
                nphi_update(
                    gnorm(split.frame.metric, split.frame.push(value)), u
                )
    conditions = [
        _condition("dperp_frobenius", frob, frob_witness, vacuous=frame.k < 2),
        _condition("nphi_on_dperp", nphi_state["value"], nphi_state["witness"],
                   vacuous=vacuous),
    ]
    sides = [("integrable", ("dperp_frobenius",)), ("nphi", ("nphi_on_dperp",))]
    return EquivalenceVerdict(check_id, conditions, sides).to_report()


def check_eq38(ambient: ManifoldSpec, sub: SubmanifoldSpec, samples,
               hyp: Hypotheses | None = None, tol: float = 1e-6) -> rp.CheckReport:
    """Two-path identity on Dperp: N_phi(X, Y) against F^2 P [X, Y]."""
    check_id = "eq_3_8_two_path"
    samples = _samples_2d(samples)
    hyp = hyp or _default_hyp(ambient, sub, samples)
    failed = failed_hypotheses(hyp)
    if failed:
        return inapplicable_report(check_id, failed)
    frame = smooth_frame(ambient, sub, "Dperp", samples[0])
    state, update = _max_tracker()
    vacuous = frame.k < 2
    for u in samples:
        local, _ = _frame_for_sample(frame, u)
        if local.k < 2:
            continue
        split = split_tangent(ambient, sub, u)
        g = split.frame.metric
        f = affinor_at(ambient, split.frame.x)
        values, jacs = _jacobians(local.fields, u)
        for i in range(local.k):
            for j in range(i + 1, local.k):
                lhs = split.frame.push(
                    nijenhuis_phi(ambient, sub, local.fields[i], local.fields[j], u)
                )
                bracket = split.frame.push(_bracket_from(values, jacs, i, j))
                rhs = f @ (f @ project_onto_rows(split.basis_d, g, bracket))
                update(gnorm(g, lhs - rhs), u)
    if vacuous:
        detail = "vacuous: fewer than two Dperp frame fields"
        return rp.CheckReport(check_id, rp.PASS, 0.0, tol, None, detail)
    status = rp.PASS if state["value"] <= tol else rp.MISMATCH
    return rp.CheckReport(
        check_id, status, state["value"], tol, state["witness"],
        "N_phi against F^2 P[X, Y] on Dperp",
    )


def _normal_field_from(ambient, sub, base_field: Callable) -> Callable:
    """Ambient normal field u -> F(pushforward of a Dperp frame field)."""

    def value(uu):
        frame = frames_at(sub, uu)
        return affinor_at(ambient, frame.x) @ frame.push(base_field(uu))

    return _memoized(value)


def check_prop42(ambient: ManifoldSpec, sub: SubmanifoldSpec, samples,
                 hyp: Hypotheses | None = None) -> rp.CheckReport:
    """Shape-operator commutator identity on Dperp:
    ``A_{FX} Y - A_{FY} X = phi([X, Y])``."""
    check_id = "prop_4_2_weingarten_commutator"
    samples = _samples_2d(samples)
    hyp = hyp or _default_hyp(ambient, sub, samples)
    failed = failed_hypotheses(hyp, need_nondegenerate=True, need_parallel=True)
    if failed:
        return inapplicable_report(check_id, failed)
    frame = smooth_frame(ambient, sub, "Dperp", samples[0])
    if frame.k == 0:
        return rp.CheckReport(check_id, rp.PASS, 0.0, HOLD_TOL, None,
                              "vacuous: Dperp is trivial")
    state, update = _max_tracker()
    derived = _per_frame(
        lambda fr: [_normal_field_from(ambient, sub, xf) for xf in fr.fields]
    )
    for u in samples:
        local, _ = _frame_for_sample(frame, u)
        split = split_tangent(ambient, sub, u)
        g = split.frame.metric
        normals = derived(local)
        values, jacs = _jacobians(local.fields, u)
        phi_here = phi_matrix(ambient, sub, u)
        for i in range(local.k):
            for j in range(i, local.k):
                a_ij, _ = weingarten_operator(sub, u, normals[i], values[j])
                a_ji, _ = weingarten_operator(sub, u, normals[j], values[i])
                phi_bracket = split.frame.push(
                    phi_here @ _bracket_from(values, jacs, i, j)
                )
                update(gnorm(g, a_ij - a_ji - phi_bracket), u)
    residual = state["value"]
    if residual <= HOLD_TOL:
        status = rp.PASS
    elif residual >= FAIL_TOL:
        status = rp.MISMATCH
    else:
        status = rp.INDETERMINATE
    return rp.CheckReport(
        check_id, status, residual, HOLD_TOL, state["witness"],
        f"{frame.k} Dperp frame fields",
    )


def check_theorem44(ambient: ManifoldSpec, sub: SubmanifoldSpec, samples,
                    hyp: Hypotheses | None = None) -> rp.CheckReport:
    """With a parallel affinor and mu = +1, Dperp must be integrable; a
    definitive violation is MISMATCH-grade (a bug or hypothesis leak)."""
    check_id = "thm_4_4_dperp_integrable"
    samples = _samples_2d(samples)
    hyp = hyp or _default_hyp(ambient, sub, samples)
    failed = failed_hypotheses(hyp, need_nondegenerate=True, need_parallel=True,
                                need_mu=1)
    if failed:
        return inapplicable_report(check_id, failed)
    frame = smooth_frame(ambient, sub, "Dperp", samples[0])
    worst, witness, per_sample, reframed = _frobenius_numbers(ambient, sub, frame, samples)
    if worst <= HOLD_TOL:
        status = rp.PASS
    elif worst >= FAIL_TOL:
        status = rp.MISMATCH
    else:
        status = rp.INDETERMINATE
    detail = f"{frame.k} Dperp frame fields"
    if reframed:
        detail += f"; re-framed at {reframed} samples"
    return rp.CheckReport(check_id, status, worst, HOLD_TOL, witness, detail)


def _h_of(sub, u, x_vec, y_vec) -> np.ndarray:
    return second_fundamental_form(sub, u, x_vec, y_vec)


def check_theorem46(ambient: ManifoldSpec, sub: SubmanifoldSpec, samples,
                    hyp: Hypotheses | None = None) -> rp.CheckReport:
    """D-integrability against the mixed second-fundamental-form condition
    ``g(h(X, phiY) - h(Y, phiX), FZ) = 0``."""
    check_id = "thm_4_6_d_integrability_h"
    samples = _samples_2d(samples)
    hyp = hyp or _default_hyp(ambient, sub, samples)
    failed = failed_hypotheses(hyp, need_nondegenerate=True, need_parallel=True)
    if failed:
        return inapplicable_report(check_id, failed)
    d_frame = smooth_frame(ambient, sub, "D", samples[0])
    perp_frame = smooth_frame(ambient, sub, "Dperp", samples[0])
    frob, frob_witness, _, _ = _frobenius_numbers(ambient, sub, d_frame, samples)
    state, update = _max_tracker()
    vacuous_h = d_frame.k < 2 or perp_frame.k == 0
    for u in samples:
        local, _ = _frame_for_sample(d_frame, u)
        local_perp, _ = _frame_for_sample(perp_frame, u)
        if local.k < 2 or local_perp.k == 0:
            continue
        split = split_tangent(ambient, sub, u)
        g = split.frame.metric
        f = affinor_at(ambient, split.frame.x)
        phi_here = phi_matrix(ambient, sub, u)
        xs = [xf(u) for xf in local.fields]
        zs = [zf(u) for zf in local_perp.fields]
        for i in range(local.k):
            for j in range(i + 1, local.k):
                h_diff = _h_of(sub, u, xs[i], phi_here @ xs[j]) - _h_of(
                    sub, u, xs[j], phi_here @ xs[i]
                )
                for z in zs:
                    fz = f @ split.frame.push(z)
                    update(abs(float(h_diff @ g @ fz)), u)
    conditions = [
        _condition("d_frobenius", frob, frob_witness, vacuous=d_frame.k < 2),
        _condition("h_commutator_vs_fdperp", state["value"], state["witness"],
                   vacuous=vacuous_h,
                   note="no Z in Dperp" if perp_frame.k == 0 else ""),
    ]
    sides = [("integrable", ("d_frobenius",)), ("h", ("h_commutator_vs_fdperp",))]
    return EquivalenceVerdict(check_id, conditions, sides).to_report()


def check_eq410(ambient: ManifoldSpec, sub: SubmanifoldSpec, samples,
                hyp: Hypotheses | None = None, tol: float = 1e-5) -> rp.CheckReport:
    """Two-path identity ``h(X, phiY) - h(Y, phiX) = omega([X, Y])`` on D."""
    check_id = "eq_4_10_two_path"
    samples = _samples_2d(samples)
    hyp = hyp or _default_hyp(ambient, sub, samples)
    failed = failed_hypotheses(hyp, need_nondegenerate=True, need_parallel=True)
    if failed:
        return inapplicable_report(check_id, failed)
    frame = smooth_frame(ambient, sub, "D", samples[0])
    if frame.k < 2:
        return rp.CheckReport(check_id, rp.PASS, 0.0, tol, None,
                              "vacuous: fewer than two D frame fields")
    state, update = _max_tracker()
    for u in samples:
        local, _ = _frame_for_sample(frame, u)
        if local.k < 2:
            continue
        split = split_tangent(ambient, sub, u)
        g = split.frame.metric
        f = affinor_at(ambient, split.frame.x)
        phi_here = phi_matrix(ambient, sub, u)
        values, jacs = _jacobians(local.fields, u)
        for i in range(local.k):
            for j in range(i + 1, local.k):
                h_diff = _h_of(sub, u, values[i], phi_here @ values[j]) - _h_of(
                    sub, u, values[j], phi_here @ values[i]
                )
                bracket = split.frame.push(_bracket_from(values, jacs, i, j))
                omega_bracket = f @ project_onto_rows(split.basis_dperp, g, bracket)
                update(gnorm(g, h_diff - omega_bracket), u)
    status = rp.PASS if state["value"] <= tol else rp.MISMATCH
    return rp.CheckReport(
        check_id, status, state["value"], tol, state["witness"],
        "h-commutator against omega of the bracket on D",
    )


def check_theorem48(ambient: ManifoldSpec, sub: SubmanifoldSpec, samples,
                    hyp: Hypotheses | None = None) -> rp.CheckReport:
    """Three-way equivalence for the anti-invariant foliation: totally
    geodesic leaves, mixed h valued in Dtilde, and A_V-invariance of Dperp."""
    check_id = "thm_4_8_totally_geodesic_dperp"
    samples = _samples_2d(samples)
    hyp = hyp or _default_hyp(ambient, sub, samples)
    failed = failed_hypotheses(hyp, need_nondegenerate=True, need_parallel=True)
    if failed:
        return inapplicable_report(check_id, failed)
    perp_frame = smooth_frame(ambient, sub, "Dperp", samples[0])
    d_frame = smooth_frame(ambient, sub, "D", samples[0])
    if perp_frame.k >= 2:
        frob, _, _, _ = _frobenius_numbers(ambient, sub, perp_frame, samples)
        if frob >= FAIL_TOL:
            return inapplicable_report(
                check_id,
                [f"Dperp is not integrable (Frobenius residual {frob!r})"],
            )
    geo_state, geo_update = _max_tracker()
    h_state, h_update = _max_tracker()
    shape_state, shape_update = _max_tracker()
    derived = _per_frame(
        lambda fr: [_normal_field_from(ambient, sub, yf) for yf in fr.fields]
    )
    for u in samples:
        local_perp, _ = _frame_for_sample(perp_frame, u)
        local_d, _ = _frame_for_sample(d_frame, u)
        split = split_tangent(ambient, sub, u)
        g = split.frame.metric
        ys = [yf(u) for yf in local_perp.fields]
        xs = [xf(u) for xf in local_d.fields]
        normals = derived(local_perp)
        for i, y in enumerate(ys):
            for j, zf in enumerate(local_perp.fields):
                tangential = gauss_split(
                    sub, u, y, VectorField.from_function(zf, sub.dim)
                )[0]
                geo_update(
                    gnorm(g, project_onto_rows(split.basis_d, g, tangential)), u
                )
        for x in xs:
            for y in ys:
                h_vec = _h_of(sub, u, x, y)
                h_update(
                    gnorm(g, project_onto_rows(split.basis_fdperp, g, h_vec)), u
                )
        for v_field in normals:
            for y in ys:
                shape_applied, _ = weingarten_operator(sub, u, v_field, y)
                shape_update(
                    gnorm(g, project_onto_rows(split.basis_d, g, shape_applied)), u
                )
    vac_perp = perp_frame.k == 0
    vac_mixed = perp_frame.k == 0 or d_frame.k == 0
    conditions = [
        _condition("nabla_dperp_stays", geo_state["value"], geo_state["witness"],
                   vacuous=vac_perp),
        _condition("h_mixed_in_dtilde", h_state["value"], h_state["witness"],
                   vacuous=vac_mixed, note="no mixed pairs" if vac_mixed else ""),
        _condition("shape_preserves_dperp", shape_state["value"],
                   shape_state["witness"], vacuous=vac_perp),
    ]
    sides = [("i", ("nabla_dperp_stays",)), ("ii", ("h_mixed_in_dtilde",)),
             ("iii", ("shape_preserves_dperp",))]
    return EquivalenceVerdict(check_id, conditions, sides).to_report()


def check_eq414(ambient: ManifoldSpec, sub: SubmanifoldSpec, samples,
                hyp: Hypotheses | None = None, tol: float = 1e-5) -> rp.CheckReport:
    """Chain identity ``g(nabla_Y Z, FX) = mu g(h(X, Y), FZ)`` for X in D
    and Y, Z in Dperp (first and last members compared)."""
    check_id = "eq_4_14_chain"
    samples = _samples_2d(samples)
    hyp = hyp or _default_hyp(ambient, sub, samples)
    failed = failed_hypotheses(hyp, need_nondegenerate=True, need_parallel=True)
    if failed:
        return inapplicable_report(check_id, failed)
    perp_frame = smooth_frame(ambient, sub, "Dperp", samples[0])
    d_frame = smooth_frame(ambient, sub, "D", samples[0])
    if perp_frame.k == 0 or d_frame.k == 0:
        return rp.CheckReport(check_id, rp.PASS, 0.0, tol, None,
                              "vacuous: no mixed triples")
    state, update = _max_tracker()
    for u in samples:
        local_perp, _ = _frame_for_sample(perp_frame, u)
        local_d, _ = _frame_for_sample(d_frame, u)
        split = split_tangent(ambient, sub, u)
        g = split.frame.metric
        f = affinor_at(ambient, split.frame.x)
        xs = [xf(u) for xf in local_d.fields]
        ys = [yf(u) for yf in local_perp.fields]
        for i, y in enumerate(ys):
            for j, zf in enumerate(local_perp.fields):
                tangential = gauss_split(
                    sub, u, y, VectorField.from_function(zf, sub.dim)
                )[0]
                z = ys[j]
                for x in xs:
                    lhs = float(tangential @ g @ (f @ split.frame.push(x)))
                    rhs = ambient.mu * float(
                        _h_of(sub, u, x, y) @ g @ (f @ split.frame.push(z))
                    )
                    update(abs(lhs - rhs), u)
    status = rp.PASS if state["value"] <= tol else rp.MISMATCH
    return rp.CheckReport(
        check_id, status, state["value"], tol, state["witness"],
        "induced-connection member against the h member",
    )


def check_theorem410(ambient: ManifoldSpec, sub: SubmanifoldSpec, samples,
                     hyp: Hypotheses | None = None) -> rp.CheckReport:
    """D integrable with totally geodesic leaves iff h(D, D) lies in Dtilde."""
    check_id = "thm_4_10_totally_geodesic_d"
    samples = _samples_2d(samples)
    hyp = hyp or _default_hyp(ambient, sub, samples)
    failed = failed_hypotheses(hyp, need_nondegenerate=True, need_parallel=True)
    if failed:
        return inapplicable_report(check_id, failed)
    d_frame = smooth_frame(ambient, sub, "D", samples[0])
    frob, frob_witness, _, _ = _frobenius_numbers(ambient, sub, d_frame, samples)
    nabla_state, nabla_update = _max_tracker()
    h_state, h_update = _max_tracker()
    vacuous = d_frame.k == 0
    for u in samples:
        local, _ = _frame_for_sample(d_frame, u)
        if local.k == 0:
            continue
        split = split_tangent(ambient, sub, u)
        g = split.frame.metric
        xs = [xf(u) for xf in local.fields]
        for x in xs:
            for uf in local.fields:
                tangential = gauss_split(
                    sub, u, x, VectorField.from_function(uf, sub.dim)
                )[0]
                nabla_update(
                    gnorm(g, project_onto_rows(split.basis_dperp, g, tangential)), u
                )
        for i in range(local.k):
            for j in range(i, local.k):
                h_vec = _h_of(sub, u, xs[i], xs[j])
                h_update(
                    gnorm(g, project_onto_rows(split.basis_fdperp, g, h_vec)), u
                )
    conditions = [
        _condition("d_frobenius", frob, frob_witness, vacuous=d_frame.k < 2),
        _condition("nabla_d_stays", nabla_state["value"], nabla_state["witness"],
                   vacuous=vacuous),
        _condition("h_d_in_dtilde", h_state["value"], h_state["witness"],
                   vacuous=vacuous),
    ]
    sides = [
        ("totally_geodesic_foliation", ("d_frobenius", "nabla_d_stays")),
        ("h", ("h_d_in_dtilde",)),
    ]
    return EquivalenceVerdict(check_id, conditions, sides).to_report()
