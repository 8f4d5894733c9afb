import math

import numpy as np
import pytest

from affinor.expr_dsl import (
    Binary,
    Call,
    EvalError,
    Num,
    ParseError,
    Var,
    evaluate,
    evaluate_jet,
    format_expression,
    parse,
)
from genexpr import fd_gradient, fd_hessian, random_expression


def test_parse_structure():
    expr = parse("x1^2 + sin(x2)", 2)
    root = expr.root
    assert isinstance(root, Binary) and root.op == "+"
    assert isinstance(root.left, Binary) and root.left.op == "^"
    assert isinstance(root.left.left, Var) and root.left.left.index == 0
    assert isinstance(root.left.right, Num) and root.left.right.value == 2.0
    assert isinstance(root.right, Call) and root.right.func == "sin"
    assert isinstance(root.right.arg, Var) and root.right.arg.index == 1


def test_parse_error_offset_and_expected():
    with pytest.raises(ParseError) as err:
        parse("x1 + * x2", 2)
    assert err.value.offset == 5
    assert "unexpected '*'" in str(err.value)
    assert err.value.expected


def test_parse_arity_violation():
    with pytest.raises(ParseError, match="variable x3 exceeds arity 2"):
        parse("x3", 2)


def test_parse_unknown_identifier():
    with pytest.raises(ParseError, match="unknown identifier 'foo'"):
        parse("foo + 1", 2)


def test_parse_unknown_character():
    with pytest.raises(ParseError) as err:
        parse("x1 ? 2", 1)
    assert err.value.offset == 3


def test_parse_empty():
    with pytest.raises(ParseError):
        parse("   ", 2)


def test_parse_missing_close_paren():
    with pytest.raises(ParseError):
        parse("sin(x1", 1)


def test_parse_trailing_garbage():
    with pytest.raises(ParseError):
        parse("x1 2", 1)


def test_parameter_variables():
    expr = parse("u1 * u2", 2)
    assert evaluate(expr, (3.0, 5.0)) == 15.0


def test_precedence_and_associativity():
    assert evaluate(parse("2 + 3 * 4", 0), ()) == 14.0
    assert evaluate(parse("2 ^ 3 ^ 2", 0), ()) == 512.0  # right associative
    assert evaluate(parse("-2 ^ 2", 0), ()) == -4.0  # ^ binds tighter than unary -
    assert evaluate(parse("2 ^ -1", 0), ()) == 0.5
    assert evaluate(parse("6 / 3 / 2", 0), ()) == 1.0  # left associative


def test_evaluate_examples():
    assert evaluate(parse("x1^2 + sin(x2)", 2), (2.0, 0.0)) == 4.0
    assert evaluate(parse("x1 * x2", 2), (3.0, 5.0)) == 15.0
    with pytest.raises(EvalError, match="division by zero"):
        evaluate(parse("1 / x1", 2), (0.0, 1.0))


def test_evaluate_domain_errors_name_subexpression():
    with pytest.raises(EvalError, match=r"log of non-positive value in 'log\(x1\)'"):
        evaluate(parse("1 + log(x1)", 1), (-1.0,))
    with pytest.raises(EvalError, match="sqrt of negative"):
        evaluate(parse("sqrt(x1)", 1), (-4.0,))
    with pytest.raises(EvalError, match="non-integer power of non-positive base"):
        evaluate(parse("x1 ^ 0.5", 1), (-2.0,))


def test_integer_power_negative_base():
    assert evaluate(parse("x1 ^ 3", 1), (-2.0,)) == -8.0
    assert evaluate(parse("x1 ^ -2", 1), (-2.0,)) == 0.25


def test_jet_product_rule():
    jet = evaluate_jet(parse("x1 * x2", 2), (3.0, 5.0), order=1)
    assert jet.value == 15.0
    assert np.allclose(jet.gradient, [5.0, 3.0])
    assert jet.hessian is None


def test_jet_sin_second_order():
    jet = evaluate_jet(parse("sin(x1)", 1), (0.0,), order=2)
    assert jet.value == 0.0
    assert np.allclose(jet.gradient, [1.0])
    assert np.allclose(jet.hessian, [[0.0]])


def test_jet_hessian_example():
    expr = parse("x1^2 * x2", 2)
    point = (1.0, 2.0)
    jet = evaluate_jet(expr, point, order=2)
    expected = np.array([[4.0, 2.0], [2.0, 0.0]])
    assert np.allclose(jet.hessian, expected, atol=1e-12)
    # independent oracle: central differences with step 1e-4
    assert np.max(np.abs(fd_hessian(expr, point, step=1e-4) - expected)) <= 1e-6


def test_jet_variable_exponent():
    expr = parse("x1 ^ x2", 2)
    point = (2.0, 3.0)
    jet = evaluate_jet(expr, point, order=2)
    assert math.isclose(jet.value, 8.0)
    assert np.allclose(jet.gradient, fd_gradient(expr, point), atol=1e-6)
    assert np.allclose(jet.hessian, fd_hessian(expr, point), atol=1e-4)


def test_jet_division():
    expr = parse("x1 / x2", 2)
    point = (1.0, 4.0)
    jet = evaluate_jet(expr, point, order=2)
    assert np.allclose(jet.gradient, [0.25, -1.0 / 16.0])
    assert np.allclose(jet.hessian, [[0.0, -1.0 / 16.0], [-1.0 / 16.0, 1.0 / 32.0]])


def test_jet_hessian_symmetric():
    rng = np.random.default_rng(7)
    for _ in range(50):
        expr, point = random_expression(rng, 3)
        hess = evaluate_jet(expr, point, order=2).hessian
        assert np.array_equal(hess, hess.T)


def test_gradient_matches_finite_differences_1000():
    rng = np.random.default_rng(24245)
    for _ in range(1000):
        expr, point = random_expression(rng, 3)
        jet = evaluate_jet(expr, point, order=1)
        approx = fd_gradient(expr, point, step=1e-5)
        bound = 1e-6 * (1.0 + np.abs(jet.gradient))
        assert np.all(np.abs(jet.gradient - approx) <= bound), expr.source


def test_random_hessians_match_finite_differences():
    rng = np.random.default_rng(99)
    for _ in range(200):
        expr, point = random_expression(rng, 2)
        jet = evaluate_jet(expr, point, order=2)
        approx = fd_hessian(expr, point, step=1e-4)
        bound = 1e-4 * (1.0 + np.abs(jet.hessian))
        assert np.all(np.abs(jet.hessian - approx) <= bound), expr.source


def test_print_parse_roundtrip():
    rng = np.random.default_rng(13)
    for _ in range(60):
        expr, _ = random_expression(rng, 3)
        reparsed = parse(format_expression(expr), 3)
        for _ in range(100):
            point = rng.uniform(-1.0, 1.0, size=3)
            try:
                a = evaluate(expr, point)
            except ArithmeticError:
                continue
            b = evaluate(reparsed, point)
            assert abs(a - b) <= 1e-15 * max(1.0, abs(a))


def test_point_length_mismatch():
    expr = parse("x1", 2)
    with pytest.raises(ValueError):
        evaluate(expr, (1.0,))
    with pytest.raises(ValueError):
        evaluate_jet(expr, (1.0, 2.0, 3.0), order=1)
