import numpy as np
import pytest

from affinor.chart_calculus import ManifoldSpec
from affinor.expr_dsl import parse
from affinor.sampling import sample_domain
from affinor.semi_invariant import (
    classify_submanifold,
    phi_omega,
    principal_angle,
    projectors,
    split_tangent,
    verify_cor26,
    verify_definition21,
    verify_prop25,
)
from affinor.submanifold_geometry import SubmanifoldSpec, frames_at, gnorm


def expr_matrix(rows, dim):
    return tuple(tuple(parse(src, dim) for src in row) for row in rows)


def flat_manifold(dim, mu, affinor_rows, name):
    identity = [["1" if i == j else "0" for j in range(dim)] for i in range(dim)]
    return ManifoldSpec(
        name=name,
        dim=dim,
        mu=mu,
        metric=expr_matrix(identity, dim),
        affinor=expr_matrix(affinor_rows, dim),
        domain=[(-1.0, 1.0)] * dim,
    )


J4 = [
    ["0", "-1", "0", "0"],
    ["1", "0", "0", "0"],
    ["0", "0", "0", "-1"],
    ["0", "0", "1", "0"],
]
PHI5 = [
    ["0", "-1", "0", "0", "0"],
    ["1", "0", "0", "0", "0"],
    ["0", "0", "0", "-1", "0"],
    ["0", "0", "1", "0", "0"],
    ["0", "0", "0", "0", "0"],
]

KAEHLER = flat_manifold(4, 1, J4, "kaehler_r4")
COSYM = flat_manifold(5, 1, PHI5, "cosymplectic_r5")


def sub(name, dim, sources, ambient=KAEHLER, domain=None):
    return SubmanifoldSpec(
        name=name,
        dim=dim,
        embedding=tuple(parse(s, dim) for s in sources),
        ambient=ambient,
        domain=domain or [(-1.0, 1.0)] * dim,
    )


FLAT_CR = sub("flat_cr", 3, ("u1", "u2", "u3", "0"))
TOTALLY_REAL = sub("plane", 2, ("u1", "0", "u2", "0"))
COMPLEX_CURVE = sub("curve", 2, ("u1", "u2", "u1^2 - u2^2", "2*u1*u2"))
CONTACT_SLICE = sub("slice", 3, ("u1", "u2", "u3", "0", "0"), ambient=COSYM)
S3 = sub(
    "s3",
    3,
    (
        "cos(u1)",
        "sin(u1)*cos(u2)",
        "sin(u1)*sin(u2)*cos(u3)",
        "sin(u1)*sin(u2)*sin(u3)",
    ),
    domain=[(0.3, np.pi - 0.3), (0.3, np.pi - 0.3), (0.3, 2 * np.pi - 0.3)],
)


def pts(spec, count=20, seed=24245):
    return sample_domain(spec.domain, count, seed)


def span_residual(rows, g, target_rows):
    """Largest component of ``rows`` outside the span of ``target_rows``."""
    worst = 0.0
    for v in rows:
        coeff = target_rows @ g @ v if target_rows.size else np.zeros(0)
        proj = target_rows.T @ coeff if target_rows.size else np.zeros_like(v)
        worst = max(worst, gnorm(g, v - proj))
    return worst


def test_split_flat_cr():
    split = split_tangent(KAEHLER, FLAT_CR, (0.1, -0.4, 0.7))
    assert (split.p, split.q) == (2, 1)
    g = split.frame.metric
    assert span_residual(split.basis_d, g, np.eye(4)[:2]) <= 1e-12
    assert span_residual(split.basis_dperp, g, np.eye(4)[2:3]) <= 1e-12
    assert span_residual(split.basis_fdperp, g, np.eye(4)[3:]) <= 1e-12
    assert split.basis_dtilde.shape[0] == 0
    assert not split.rank_ambiguous


def test_split_totally_real():
    split = split_tangent(KAEHLER, TOTALLY_REAL, (0.3, 0.3))
    assert (split.p, split.q) == (0, 2)
    assert split.basis_dtilde.shape[0] == 0
    g = split.frame.metric
    assert span_residual(split.basis_fdperp, g, np.eye(4)[[1, 3]]) <= 1e-12


def test_split_complex_curve_invariant():
    for u in pts(COMPLEX_CURVE, 15):
        split = split_tangent(KAEHLER, COMPLEX_CURVE, u)
        assert (split.p, split.q) == (2, 0)
        assert not split.rank_ambiguous


def test_split_contact_slice():
    split = split_tangent(COSYM, CONTACT_SLICE, (0.2, 0.1, -0.5))
    assert (split.p, split.q) == (2, 1)
    assert split.basis_fdperp.shape[0] == 1
    assert split.basis_dtilde.shape[0] == 1
    g = split.frame.metric
    assert span_residual(split.basis_dtilde, g, np.eye(5)[4:]) <= 1e-12


def test_split_mismatched_ambient_rejected():
    with pytest.raises(ValueError):
        split_tangent(COSYM, FLAT_CR, (0.0, 0.0, 0.0))


def test_projector_algebra():
    for spec in (FLAT_CR, TOTALLY_REAL, COMPLEX_CURVE, S3):
        for u in pts(spec, 10):
            pair = projectors(split_tangent(spec.ambient, spec, u))
            p, q = pair.p_matrix, pair.q_matrix
            eye = np.eye(spec.dim)
            assert np.max(np.abs(p + q - eye)) <= 1e-10
            assert np.max(np.abs(p @ p - p)) <= 1e-10
            assert np.max(np.abs(q @ q - q)) <= 1e-10
            assert np.max(np.abs(p @ q)) <= 1e-10


def test_phi_omega_flat_cr():
    u = (0.0, 0.0, 0.0)
    phi_x, omega_x = phi_omega(KAEHLER, FLAT_CR, u, np.eye(4)[0])
    assert np.allclose(phi_x, [0.0, 1.0, 0.0, 0.0])
    assert np.allclose(omega_x, 0.0)
    phi_x, omega_x = phi_omega(KAEHLER, FLAT_CR, u, np.eye(4)[2])
    assert np.allclose(phi_x, 0.0)
    assert np.allclose(omega_x, [0.0, 0.0, 0.0, 1.0])
    phi_x, omega_x = phi_omega(KAEHLER, FLAT_CR, u, np.zeros(4))
    assert np.allclose(phi_x, 0.0) and np.allclose(omega_x, 0.0)


def test_phi_omega_reassembles_f():
    from affinor.chart_calculus import affinor_at

    for spec in (FLAT_CR, TOTALLY_REAL, COMPLEX_CURVE, S3, CONTACT_SLICE):
        for u in pts(spec, 10):
            split = split_tangent(spec.ambient, spec, u)
            f = affinor_at(spec.ambient, split.frame.x)
            for t in split.frame.tangent_basis:
                phi_x, omega_x = phi_omega(spec.ambient, spec, u, t)
                assert gnorm(split.frame.metric, f @ t - phi_x - omega_x) <= 1e-10


def test_phi_annihilates_dperp():
    for spec in (FLAT_CR, TOTALLY_REAL, S3, CONTACT_SLICE):
        for u in pts(spec, 10):
            split = split_tangent(spec.ambient, spec, u)
            for e in split.basis_dperp:
                phi_x, _ = phi_omega(spec.ambient, spec, u, e)
                assert gnorm(split.frame.metric, phi_x) <= 1e-8


def test_dimension_counts():
    for spec in (FLAT_CR, TOTALLY_REAL, COMPLEX_CURVE, S3):
        for u in pts(spec, 10):
            split = split_tangent(spec.ambient, spec, u)
            assert split.p + split.q == spec.dim
            assert split.basis_fdperp.shape[0] == split.q
            assert (
                split.basis_fdperp.shape[0] + split.basis_dtilde.shape[0]
                == spec.ambient.dim - spec.dim
            )


def test_definition21_passes_on_semi_invariant_fixtures():
    for spec in (FLAT_CR, TOTALLY_REAL, COMPLEX_CURVE, S3, CONTACT_SLICE):
        out = verify_definition21(spec.ambient, spec, pts(spec, 20))
        assert out.status == "pass", (spec.name, out.detail)
        assert out.max_residual <= 1e-6


def test_definition21_s3_rank_one_everywhere():
    out = verify_definition21(KAEHLER, S3, pts(S3, 30))
    assert "q=1" in out.detail
    assert "rank F^2(Dperp) = [1]" in out.detail


def test_definition21_rejects_generic_surface():
    generic = sub("generic", 2, ("u1", "u2", "u1*u2", "0"))
    out = verify_definition21(KAEHLER, generic, pts(generic, 20))
    assert out.status in ("fail", "rank-ambiguous")
    assert out.witness is not None


def test_classification_labels():
    assert "normal-proper" in classify_submanifold(KAEHLER, FLAT_CR, pts(FLAT_CR)).detail
    assert (
        "normal-anti-invariant"
        in classify_submanifold(KAEHLER, TOTALLY_REAL, pts(TOTALLY_REAL)).detail
    )
    curve = classify_submanifold(KAEHLER, COMPLEX_CURVE, pts(COMPLEX_CURVE)).detail
    assert curve.startswith("invariant")
    slice_detail = classify_submanifold(COSYM, CONTACT_SLICE, pts(CONTACT_SLICE)).detail
    assert slice_detail.startswith("proper") and "dim Dtilde=1" in slice_detail
    assert "normal-proper" in classify_submanifold(KAEHLER, S3, pts(S3)).detail


def test_prop25_residuals():
    for spec in (FLAT_CR, TOTALLY_REAL, COMPLEX_CURVE, S3, CONTACT_SLICE):
        out = verify_prop25(spec.ambient, spec, pts(spec, 20))
        assert out.status == "pass", (spec.name, out.detail)
        assert out.max_residual <= 1e-6


def test_cor26_flat_cr_and_totally_real():
    for spec in (FLAT_CR, TOTALLY_REAL):
        out = verify_cor26(spec.ambient, spec, pts(spec, 20))
        assert out.status == "pass", out.detail
        assert out.max_residual <= 1e-6
        assert "Lagrangian residual" in out.detail


def test_cor26_inapplicable_on_degenerate_ambient():
    out = verify_cor26(COSYM, CONTACT_SLICE, pts(CONTACT_SLICE))
    assert out.status == "inapplicable"
    assert "degenerate" in out.detail


def test_cor26_s3():
    out = verify_cor26(KAEHLER, S3, pts(S3, 20))
    assert out.status == "pass", out.detail


def test_principal_angle_basics():
    g = np.eye(3)
    a = np.eye(3)[:2]
    b = np.vstack([[1.0, 0.0, 0.0], [0.0, np.cos(0.3), np.sin(0.3)]])
    assert abs(principal_angle(a, b, g) - 0.3) <= 1e-12
    assert principal_angle(np.empty((0, 3)), np.empty((0, 3)), g) == 0.0
    assert principal_angle(a, np.eye(3)[:1], g) == pytest.approx(np.pi / 2)


def test_user_declared_frame_overrides_extraction():
    from affinor.chart_calculus import VectorField

    declared = SubmanifoldSpec(
        name="declared",
        dim=3,
        embedding=tuple(parse(s, 3) for s in ("u1", "u2", "u3", "0")),
        ambient=KAEHLER,
        domain=[(-1.0, 1.0)] * 3,
        frame_d=(
            VectorField.constant([1.0, 0.0, 0.0]),
            VectorField.constant([0.0, 1.0, 0.0]),
        ),
    )
    split = split_tangent(KAEHLER, declared, (0.2, 0.2, 0.2))
    assert (split.p, split.q) == (2, 1)
    out = verify_definition21(KAEHLER, declared, pts(declared, 10))
    assert out.status == "pass"
