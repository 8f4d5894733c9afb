import numpy as np
import pytest

from affinor.chart_calculus import (
    ManifoldSpec,
    StructuralError,
    VectorField,
    affinor_at,
    christoffel,
    covariant_derivative,
    lie_bracket,
    metric_at,
    nabla_affinor,
    nijenhuis_of,
)
from affinor.expr_dsl import evaluate, parse
from affinor.sampling import sample_domain
from genexpr import random_expression


def expr_matrix(rows, dim):
    return tuple(tuple(parse(src, dim) for src in row) for row in rows)


def euclidean(dim, mu=1, affinor_rows=None, name="euclid"):
    identity = [["1" if i == j else "0" for j in range(dim)] for i in range(dim)]
    if affinor_rows is None:
        affinor_rows = identity
    return ManifoldSpec(
        name=name,
        dim=dim,
        mu=mu,
        metric=expr_matrix(identity, dim),
        affinor=expr_matrix(affinor_rows, dim),
        domain=[(-1.0, 1.0)] * dim,
    )


J4_ROWS = [
    ["0", "-1", "0", "0"],
    ["1", "0", "0", "0"],
    ["0", "0", "0", "-1"],
    ["0", "0", "1", "0"],
]


def sphere_chart():
    # round 2-sphere chart, g = diag(1, sin^2 x1), away from the poles
    rows = [["1", "0"], ["0", "sin(x1)^2"]]
    return ManifoldSpec(
        name="sphere_chart",
        dim=2,
        mu=1,
        metric=expr_matrix(rows, 2),
        affinor=expr_matrix([["0", "-1"], ["1", "0"]], 2),
        domain=[(0.3, np.pi - 0.3), (0.0, 2 * np.pi)],
    )


def fd_metric_gradient(spec, x, step=1e-6):
    m = spec.dim
    out = np.zeros((m, m, m))
    for k in range(m):
        shift = np.zeros(m)
        shift[k] = step
        out[k] = (metric_at(spec, np.asarray(x) + shift)
                  - metric_at(spec, np.asarray(x) - shift)) / (2 * step)
    return out


def fd_christoffel(spec, x):
    """Independent oracle: assemble the symbols from difference quotients."""
    dg = fd_metric_gradient(spec, x)
    ginv = np.linalg.inv(metric_at(spec, x))
    t = np.einsum("ijl->lij", dg) + np.einsum("jil->lij", dg) - dg
    return 0.5 * np.einsum("kl,lij->kij", ginv, t)


def test_metric_euclidean_identity():
    spec = euclidean(4, affinor_rows=J4_ROWS)
    assert np.array_equal(metric_at(spec, (0.1, -0.2, 0.3, 0.9)), np.eye(4))


def test_metric_sphere_at_equator():
    spec = sphere_chart()
    assert np.allclose(metric_at(spec, (np.pi / 2, 1.0)), np.diag([1.0, 1.0]))


def test_metric_degenerate_point_rejected():
    spec = sphere_chart()
    with pytest.raises(StructuralError, match="degenerate"):
        metric_at(spec, (0.0, 1.0))


def test_christoffel_flat_is_zero():
    spec = euclidean(4, affinor_rows=J4_ROWS)
    assert np.array_equal(christoffel(spec, (0.2, 0.4, -0.1, 0.0)), np.zeros((4, 4, 4)))


def test_christoffel_sphere_values():
    spec = sphere_chart()
    for x1 in (0.5, 1.0, np.pi / 3):
        gamma = christoffel(spec, (x1, 2.0))
        expected = np.zeros((2, 2, 2))
        expected[0, 1, 1] = -np.sin(x1) * np.cos(x1)
        expected[1, 0, 1] = expected[1, 1, 0] = np.cos(x1) / np.sin(x1)
        assert np.allclose(gamma, expected, atol=1e-12)
        assert np.max(np.abs(gamma - fd_christoffel(spec, (x1, 2.0)))) <= 1e-8


def test_christoffel_symmetry_exact():
    spec = sphere_chart()
    for x in sample_domain(spec.domain, 10, seed=3):
        gamma = christoffel(spec, x)
        assert np.array_equal(gamma, np.transpose(gamma, (0, 2, 1)))


def test_covariant_derivative_directional():
    spec = euclidean(4, affinor_rows=J4_ROWS)
    x_field = VectorField.constant([1.0, 0.0, 0.0, 0.0])
    y_field = VectorField.from_expressions(
        [parse(s, 4) for s in ("x1^2", "0", "0", "0")]
    )
    out = covariant_derivative(spec, x_field, y_field, (1.5, 0.0, 0.0, 0.0))
    assert np.allclose(out, [3.0, 0.0, 0.0, 0.0])


def test_covariant_derivative_constant_field_flat():
    spec = euclidean(3, mu=-1, affinor_rows=[["1", "0", "0"], ["0", "1", "0"], ["0", "0", "-1"]])
    x_field = VectorField.constant([0.3, -0.2, 0.9])
    y_field = VectorField.constant([1.0, 2.0, 3.0])
    assert np.allclose(covariant_derivative(spec, x_field, y_field, (0.1, 0.2, 0.3)), 0.0)


def test_covariant_derivative_sphere():
    spec = sphere_chart()
    e2 = VectorField.constant([0.0, 1.0])
    out = covariant_derivative(spec, e2, e2, (np.pi / 4, 1.0))
    assert np.allclose(out, [-0.5, 0.0], atol=1e-12)


def test_lie_bracket_coordinate_fields():
    e1 = VectorField.constant([1.0, 0.0])
    e2 = VectorField.constant([0.0, 1.0])
    assert np.allclose(lie_bracket(e1, e2, (0.4, 0.7)), 0.0)


def test_lie_bracket_hand_example():
    x_field = VectorField.from_expressions([parse("x2", 2), parse("0", 2)])
    y_field = VectorField.constant([0.0, 1.0])
    assert np.allclose(lie_bracket(x_field, y_field, (0.3, 0.8)), [-1.0, 0.0])


def test_torsion_free_residual():
    rng = np.random.default_rng(42)
    for spec in (euclidean(4, affinor_rows=J4_ROWS), sphere_chart()):
        for _ in range(5):
            comps_x = [random_expression(rng, spec.dim)[0] for _ in range(spec.dim)]
            comps_y = [random_expression(rng, spec.dim)[0] for _ in range(spec.dim)]
            x_field = VectorField.from_expressions(comps_x)
            y_field = VectorField.from_expressions(comps_y)
            for x in sample_domain(spec.domain, 10, seed=11):
                residual = (
                    covariant_derivative(spec, x_field, y_field, x)
                    - covariant_derivative(spec, y_field, x_field, x)
                    - lie_bracket(x_field, y_field, x)
                )
                assert np.max(np.abs(residual)) <= 1e-8


def test_metric_compatibility_residual():
    # X<g(Y,Z)> - g(nabla_X Y, Z) - g(Y, nabla_X Z), scalar derivative by FD
    rng = np.random.default_rng(5)
    for spec in (euclidean(4, affinor_rows=J4_ROWS), sphere_chart()):
        fields = [
            VectorField.from_expressions(
                [random_expression(rng, spec.dim, max_depth=3)[0] for _ in range(spec.dim)]
            )
            for _ in range(3)
        ]
        x_field, y_field, z_field = fields

        def scalar(p):
            return float(y_field.value(p) @ metric_at(spec, p) @ z_field.value(p))

        for x in sample_domain(spec.domain, 50, seed=8):
            xv = x_field.value(x)
            h = 1e-5
            directional = (scalar(x + h * xv) - scalar(x - h * xv)) / (2 * h)
            g = metric_at(spec, x)
            residual = (
                directional
                - covariant_derivative(spec, x_field, y_field, x) @ g @ z_field.value(x)
                - y_field.value(x) @ g @ covariant_derivative(spec, x_field, z_field, x)
            )
            assert abs(residual) <= 1e-7


def test_nijenhuis_constant_structure_constant_fields():
    spec = euclidean(4, affinor_rows=J4_ROWS)
    x_field = VectorField.constant([1.0, 2.0, 0.0, -1.0])
    y_field = VectorField.constant([0.0, 1.0, 1.0, 0.5])
    out = nijenhuis_of(spec.affinor, x_field, y_field, (0.1, 0.2, 0.3, 0.4))
    assert np.max(np.abs(out)) <= 1e-12


def _fd_bracket(f_x, f_y, x, h=1e-5):
    x = np.asarray(x, dtype=float)
    n = len(x)
    jac_y = np.empty((n, n))
    jac_x = np.empty((n, n))
    for j in range(n):
        e = np.zeros(n)
        e[j] = h
        jac_y[:, j] = (f_y(x + e) - f_y(x - e)) / (2 * h)
        jac_x[:, j] = (f_x(x + e) - f_x(x - e)) / (2 * h)
    return jac_y @ f_x(x) - jac_x @ f_y(x)


def test_nijenhuis_standard_j_vanishes():
    spec = euclidean(4, affinor_rows=J4_ROWS)
    rng = np.random.default_rng(21)
    j_mat = affinor_at(spec, np.zeros(4))
    for _ in range(4):
        comps_x = [random_expression(rng, 4)[0] for _ in range(4)]
        comps_y = [random_expression(rng, 4)[0] for _ in range(4)]
        x_field = VectorField.from_expressions(comps_x)
        y_field = VectorField.from_expressions(comps_y)
        for x in sample_domain(spec.domain, 5, seed=20):
            out = nijenhuis_of(spec.affinor, x_field, y_field, x)
            assert np.max(np.abs(out)) <= 1e-7

            # independent oracle: expand the four terms with plain FD brackets
            def fx(p):
                return np.array([evaluate(e, p) for e in comps_x])

            def fy(p):
                return np.array([evaluate(e, p) for e in comps_y])

            def jfx(p):
                return j_mat @ fx(p)

            def jfy(p):
                return j_mat @ fy(p)

            oracle = (
                _fd_bracket(jfx, jfy, x)
                + j_mat @ j_mat @ _fd_bracket(fx, fy, x)
                - j_mat @ _fd_bracket(jfx, fy, x)
                - j_mat @ _fd_bracket(fx, jfy, x)
            )
            assert np.max(np.abs(out - oracle)) <= 1e-7


def test_nijenhuis_antisymmetry():
    spec = euclidean(4, affinor_rows=J4_ROWS)
    rng = np.random.default_rng(77)
    x_field = VectorField.from_expressions([random_expression(rng, 4)[0] for _ in range(4)])
    y_field = VectorField.from_expressions([random_expression(rng, 4)[0] for _ in range(4)])
    for x in sample_domain(spec.domain, 10, seed=6):
        forward = nijenhuis_of(spec.affinor, x_field, y_field, x)
        backward = nijenhuis_of(spec.affinor, y_field, x_field, x)
        assert np.max(np.abs(forward + backward)) <= 1e-9
        assert np.max(np.abs(nijenhuis_of(spec.affinor, x_field, x_field, x))) <= 1e-9


def test_nabla_affinor_flat_constant():
    spec = euclidean(4, affinor_rows=J4_ROWS)
    assert np.array_equal(nabla_affinor(spec, (0.1, 0.2, 0.3, 0.4)), np.zeros((4, 4, 4)))


def test_nabla_affinor_cosymplectic_zero():
    rows = [
        ["0", "-1", "0", "0", "0"],
        ["1", "0", "0", "0", "0"],
        ["0", "0", "0", "-1", "0"],
        ["0", "0", "1", "0", "0"],
        ["0", "0", "0", "0", "0"],
    ]
    spec = euclidean(5, affinor_rows=rows)
    assert np.array_equal(nabla_affinor(spec, (0.0, 0.1, 0.2, 0.3, 0.4)), np.zeros((5, 5, 5)))


def test_nabla_affinor_perturbed_component():
    rows = [
        ["0", "-(1 + 0.1*x1)", "0", "0"],
        ["1 + 0.1*x1", "0", "0", "0"],
        ["0", "0", "0", "-1"],
        ["0", "0", "1", "0"],
    ]
    spec = euclidean(4, affinor_rows=rows, name="nonparallel")
    out = nabla_affinor(spec, (0.5, 0.0, 0.0, 0.0))
    assert np.isclose(out[0, 1, 0], -0.1)
    # FD cross-check of the same component
    h = 1e-6
    f_plus = affinor_at(spec, (0.5 + h, 0.0, 0.0, 0.0))
    f_minus = affinor_at(spec, (0.5 - h, 0.0, 0.0, 0.0))
    assert abs(out[0, 1, 0] - (f_plus - f_minus)[0, 1] / (2 * h)) <= 1e-8


def test_procedural_field_jacobian_matches_expressions():
    comps = [parse("sin(x1)*x2", 2), parse("x1^2", 2)]
    exact = VectorField.from_expressions(comps)

    def evaluator(p):
        return np.array([np.sin(p[0]) * p[1], p[0] ** 2])

    procedural = VectorField.from_function(evaluator, 2)
    for x in sample_domain([(-1, 1), (-1, 1)], 10, seed=9):
        assert np.allclose(exact.jacobian(x), procedural.jacobian(x), atol=1e-9)
