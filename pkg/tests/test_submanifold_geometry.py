import numpy as np
import pytest

from affinor.chart_calculus import ManifoldSpec, StructuralError
from affinor.expr_dsl import parse
from affinor.sampling import sample_domain
from affinor.submanifold_geometry import (
    SubmanifoldSpec,
    duality_check,
    frames_at,
    frames_check,
    gauss_split,
    gnorm,
    h_symmetry_check,
    induced_metric,
    second_fundamental_form,
    totally_geodesic_check,
    weingarten_operator,
)


def expr_matrix(rows, dim):
    return tuple(tuple(parse(src, dim) for src in row) for row in rows)


J4 = [
    ["0", "-1", "0", "0"],
    ["1", "0", "0", "0"],
    ["0", "0", "0", "-1"],
    ["0", "0", "1", "0"],
]


def kaehler_r4():
    identity = [["1" if i == j else "0" for j in range(4)] for i in range(4)]
    return ManifoldSpec(
        name="kaehler_r4",
        dim=4,
        mu=1,
        metric=expr_matrix(identity, 4),
        affinor=expr_matrix(J4, 4),
        domain=[(-1.0, 1.0)] * 4,
    )


def make_sub(name, dim, sources, ambient=None, domain=None):
    ambient = ambient or kaehler_r4()
    return SubmanifoldSpec(
        name=name,
        dim=dim,
        embedding=tuple(parse(s, dim) for s in sources),
        ambient=ambient,
        domain=domain or [(-1.0, 1.0)] * dim,
    )


def flat_r3():
    return make_sub("flat_r3", 3, ("u1", "u2", "u3", "0"))


def graph_surface():
    return make_sub("graph", 2, ("u1", "u2", "u1^2 - u2^2", "2*u1*u2"))


def totally_real_plane():
    return make_sub("plane", 2, ("u1", "0", "u2", "0"))


def s3_chart():
    return make_sub(
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


def test_frames_flat():
    frame = frames_at(flat_r3(), (0.2, -0.3, 0.5))
    assert np.allclose(frame.tangent_basis, np.eye(4)[:3])
    assert np.allclose(frame.normal_basis, np.eye(4)[3:])
    assert frame.normal_pivots == (3,)
    assert frame.gram_residual <= 1e-12


def test_frames_graph_surface_origin():
    frame = frames_at(graph_surface(), (0.0, 0.0))
    assert np.allclose(frame.tangent_basis, np.eye(4)[:2])
    assert np.allclose(frame.normal_basis, np.eye(4)[2:])


def test_frames_rank_deficient_embedding():
    bad = make_sub("bad", 2, ("u1", "u1", "0", "0"))
    with pytest.raises(StructuralError, match="rank-deficient"):
        frames_at(bad, (0.1, 0.4))


def test_frame_orthonormality_invariant():
    for sub in (flat_r3(), graph_surface(), s3_chart()):
        for u in sample_domain(sub.domain, 25, seed=12):
            frame = frames_at(sub, u)
            assert frame.gram_residual <= 1e-10


def test_induced_metric_examples():
    assert np.allclose(induced_metric(flat_r3(), (0.5, 0.1, -0.2)), np.eye(3))
    assert np.allclose(induced_metric(graph_surface(), (0.0, 0.0)), np.eye(2))
    assert np.allclose(induced_metric(graph_surface(), (1.0, 0.0)), np.diag([5.0, 5.0]))


def test_induced_metric_s3_round():
    sub = s3_chart()
    for u in sample_domain(sub.domain, 10, seed=3):
        expected = np.diag(
            [1.0, np.sin(u[0]) ** 2, (np.sin(u[0]) * np.sin(u[1])) ** 2]
        )
        assert np.allclose(induced_metric(sub, u), expected, atol=1e-12)


def test_second_fundamental_form_flat_vanishes():
    sub = flat_r3()
    h = second_fundamental_form(sub, (0.1, 0.2, 0.3), np.eye(3)[0], np.eye(3)[1])
    assert np.allclose(h, 0.0)


def test_second_fundamental_form_graph_values():
    sub = graph_surface()
    h11 = second_fundamental_form(sub, (0.0, 0.0), np.eye(2)[0], np.eye(2)[0])
    h12 = second_fundamental_form(sub, (0.0, 0.0), np.eye(2)[0], np.eye(2)[1])
    assert np.allclose(h11, [0.0, 0.0, 2.0, 0.0])
    assert np.allclose(h12, [0.0, 0.0, 0.0, 2.0])


def test_gauss_split_reassembles():
    for sub in (graph_surface(), s3_chart()):
        for u in sample_domain(sub.domain, 15, seed=5):
            frame = frames_at(sub, u)
            for i in range(sub.dim):
                for j in range(sub.dim):
                    tangential, normal, full = gauss_split(
                        sub, u, frame.tangent_coeffs[i], frame.tangent_coeffs[j]
                    )
                    assert gnorm(frame.metric, full - tangential - normal) <= 1e-8


def test_weingarten_flat():
    sub = flat_r3()
    shape_applied, normal_conn = weingarten_operator(
        sub, (0.1, 0.2, 0.3), lambda u: np.array([0.0, 0.0, 0.0, 1.0]), np.eye(3)[0]
    )
    assert np.allclose(shape_applied, 0.0)
    assert np.allclose(normal_conn, 0.0)


def test_weingarten_graph_matches_h():
    sub = graph_surface()
    u0 = np.zeros(2)

    def v_field(u):
        return frames_at(sub, u, pivots=(2, 3)).normal_basis[0]  # e3-direction

    shape_applied, _ = weingarten_operator(sub, u0, v_field, np.eye(2)[0])
    assert np.allclose(shape_applied, [2.0, 0.0, 0.0, 0.0], atol=1e-8)


def test_weingarten_rejects_tangent_input():
    sub = flat_r3()
    with pytest.raises(ValueError, match="not g-orthogonal"):
        weingarten_operator(
            sub, (0.0, 0.0, 0.0), lambda u: np.array([1.0, 0.0, 0.0, 0.0]), np.eye(3)[0]
        )


def test_duality_flat_exact():
    out = duality_check(flat_r3(), sample_domain(flat_r3().domain, 10, seed=1))
    assert out.status == "pass" and out.max_residual == 0.0


def test_duality_graph_surface():
    sub = graph_surface()
    out = duality_check(sub, sample_domain(sub.domain, 20, seed=24245))
    assert out.status == "pass"
    assert out.max_residual <= 1e-6


def test_duality_s3():
    sub = s3_chart()
    out = duality_check(sub, sample_domain(sub.domain, 20, seed=24245))
    assert out.status == "pass"
    assert out.max_residual <= 1e-6


def test_h_symmetry():
    for sub in (graph_surface(), s3_chart()):
        out = h_symmetry_check(sub, sample_domain(sub.domain, 20, seed=8))
        assert out.status == "pass"
        assert out.max_residual <= 1e-8


def test_totally_geodesic_verdicts():
    flat = totally_geodesic_check(flat_r3(), sample_domain(flat_r3().domain, 10, seed=2))
    assert flat.status == "pass" and "totally geodesic" in flat.detail

    pts = np.vstack([np.zeros((1, 2)), sample_domain(graph_surface().domain, 10, seed=2)])
    graph = totally_geodesic_check(graph_surface(), pts)
    assert graph.status == "fail"
    assert graph.max_residual >= 2.0  # |h| at u = 0

    plane = totally_real_plane()
    out = totally_geodesic_check(plane, sample_domain(plane.domain, 10, seed=2))
    assert out.status == "pass"


def test_frames_check_report():
    out = frames_check(s3_chart(), sample_domain(s3_chart().domain, 30, seed=24245))
    assert out.status == "pass"
    assert out.max_residual <= 1e-10
