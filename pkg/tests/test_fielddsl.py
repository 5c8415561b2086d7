import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lcricci.fielddsl import (
    BinOp,
    Call,
    FieldEvaluationError,
    FieldExpr,
    FieldSyntaxError,
    Neg,
    Num,
    Pow,
    Var,
    evaluate,
    parse,
    random_ast,
    seeded_factors,
    to_text,
)


def test_parse_zero():
    assert parse("0").ast == Num(0.0)


def test_parse_variable():
    assert parse("x1").ast == Var("x", 1)


def test_parse_log_absq():
    assert parse("log(absq)").ast == Call("log", Var("absq"))


def test_evaluate_read_off():
    assert evaluate(parse("x1 + y1"), [1 + 2j, 0]) == 3.0


def test_evaluate_log_absq_at_unit_point():
    assert evaluate(parse("log(absq)"), [1, 0]) == 0.0


def test_evaluate_exp():
    assert evaluate(parse("exp(x1)"), [1, 0]) == pytest.approx(math.e, rel=1e-15)


def test_precedence():
    assert evaluate(parse("2+3*4"), [0]) == 14.0
    assert parse("-x1^2").ast == Neg(Pow(Var("x", 1), 2))
    assert evaluate(parse("-x1^2"), [3]) == -9.0


def test_left_associativity():
    assert evaluate(parse("8-3-2"), [0]) == 3.0
    assert evaluate(parse("8/4/2"), [0]) == 1.0


def test_whitespace_is_insignificant():
    assert parse(" sin ( x1 )*  2 ").ast == parse("sin(x1)*2").ast


def test_negative_exponent():
    assert parse("x1^-2").ast == Pow(Var("x", 1), -2)
    assert evaluate(parse("x1^-2"), [2]) == 0.25


def test_scientific_literal():
    assert evaluate(parse("1e-5*x1"), [2]) == pytest.approx(2e-5)


@pytest.mark.parametrize("text", ["x1^2.5", "2^3^2", "x1^y1"])
def test_exponent_must_be_integer_literal(text):
    with pytest.raises(FieldSyntaxError):
        parse(text)


def test_syntax_error_offset_and_expected_token():
    with pytest.raises(FieldSyntaxError) as info:
        parse("((x1)")
    assert info.value.offset == 6
    assert "expected ')'" in str(info.value)


def test_unexpected_character_byte_offset():
    with pytest.raises(FieldSyntaxError) as info:
        parse("α+$")
    assert info.value.offset == 1
    with pytest.raises(FieldSyntaxError) as info:
        parse("x1+$")
    assert info.value.offset == 4


def test_unknown_identifier():
    with pytest.raises(FieldSyntaxError, match="unknown identifier"):
        parse("z1")


def test_function_needs_parentheses():
    with pytest.raises(FieldSyntaxError):
        parse("sin x1")


def test_index_checked_at_evaluation_time():
    expr = parse("x3")
    with pytest.raises(IndexError):
        evaluate(expr, [1, 2])
    assert evaluate(expr, [1, 2, 5]) == 5.0


def test_domain_error_names_subexpression():
    with pytest.raises(FieldEvaluationError, match="log"):
        evaluate(parse("log(x1)"), [-1])
    with pytest.raises(FieldEvaluationError, match="division by zero"):
        evaluate(parse("1/x1"), [0])


def test_vectorised_evaluation():
    z = np.array([[1, 0], [0, 2j], [1 + 1j, 1]])
    np.testing.assert_allclose(evaluate(parse("absq"), z), [1, 4, 3])


def test_expressions_are_immutable():
    expr = parse("x1")
    with pytest.raises(AttributeError):
        expr.ast = Num(1.0)


def test_fifty_random_asts_round_trip_exactly():
    rng = np.random.default_rng(2024)
    points = rng.normal(size=(7, 3)) + 1j * rng.normal(size=(7, 3))
    for _ in range(50):
        ast = random_ast(rng, 3, depth=4)
        reparsed = parse(to_text(ast))
        assert reparsed.ast == ast
        a = evaluate(FieldExpr(ast), points)
        b = evaluate(reparsed, points)
        assert np.array_equal(a, b)


def test_printer_uses_minimal_parentheses():
    ast = BinOp("-", Num(1.0), BinOp("-", Var("x", 1), Var("y", 1)))
    assert to_text(ast) == "1.0-(x1-y1)"
    assert to_text(Pow(Neg(Var("x", 1)), 2)) == "(-x1)^2"


def test_seeded_factors_are_bounded_and_deterministic():
    a = seeded_factors(5, 2, seed=0)
    b = seeded_factors(5, 2, seed=0)
    assert [f.text for f in a] == [f.text for f in b]
    z = np.random.default_rng(1).normal(size=(50, 2)) * (1 + 1j)
    for f in a:
        assert np.all(np.abs(evaluate(f, z)) <= 1.0 + 1e-12)


# fuzz corpus: valid expressions with one parenthesis dropped or added
_atoms = st.sampled_from(["x1", "y2", "absq", "2", "0.5"])


def _exprs():
    return st.recursive(
        _atoms,
        lambda inner: st.one_of(
            st.tuples(inner, st.sampled_from("+-*/"), inner).map(lambda t: f"({t[0]}{t[1]}{t[2]})"),
            st.tuples(st.sampled_from(["sin", "cos", "exp"]), inner).map(lambda t: f"{t[0]}({t[1]})"),
        ),
        max_leaves=8,
    )


@settings(max_examples=300, deadline=None)
@given(text=_exprs(), data=st.data())
def test_unbalanced_parentheses_are_rejected(text, data):
    if "(" in text:
        positions = [i for i, c in enumerate(text) if c in "()"]
        i = data.draw(st.sampled_from(positions))
        broken = text[:i] + text[i + 1:]
    else:
        broken = data.draw(st.sampled_from(["(" + text, text + ")"]))
    with pytest.raises(FieldSyntaxError):
        parse(broken)


@settings(max_examples=200, deadline=None)
@given(text=st.text(alphabet="x1y2+-*/^()., absqsinlog0e", max_size=20))
def test_parser_never_crashes(text):
    try:
        parse(text)
    except FieldSyntaxError:
        pass
