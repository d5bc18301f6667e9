import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from revend.errors import ExprSyntaxError, UnknownIdentifierError
from revend.expr import (ALLOWED, CONSTANTS, FUNCTIONS, BinOp, Call, Const, Neg, Num, Var, compile_expr, evaluate,
                         parse_expr, to_source)


@pytest.mark.parametrize("src, t, expected", [
    ("2*sin(t)^2", math.pi / 2, 2.0),
    ("(1-0)*t^2/(t^2+1)+0", 1.0, 0.5),
    ("-2^2", 0.0, -4.0),
    ("2^3^2", 0.0, 512.0),
    ("2^-1", 0.0, 0.5),
    ("8/4/2", 0.0, 1.0),
    ("1-2-3", 0.0, -4.0),
    ("--t", 3.0, 3.0),
    ("e^t", 1.0, math.e),
    ("pi", 0.0, math.pi),
    ("1.5e2 + .5", 0.0, 150.5),
    ("sqrt(abs(-t))", -4.0, 2.0),
    ("atan(1)*4", 0.0, math.pi),
    ("log(exp(t)) - t", 2.5, 0.0),
    ("cosh(t)^2 - sinh(t)^2", 0.7, 1.0),
    ("tanh(0) + tan(0) + cos(0)", 0.0, 1.0),
])
def test_examples(src, t, expected):
    assert float(compile_expr(src)(t)) == pytest.approx(expected, abs=1e-12)


def test_vectorized_and_constant():
    t = np.linspace(0, 1, 5)
    np.testing.assert_allclose(compile_expr("t*t")(t), t * t)
    out = compile_expr("3")(t)
    assert out.shape == t.shape
    np.testing.assert_array_equal(out, 3.0)


def test_nonfinite_propagates_without_warning():
    with np.errstate(all="raise"):
        assert math.isnan(float(compile_expr("log(t)")(-1.0)))
        assert math.isinf(float(compile_expr("1/t")(0.0)))


@pytest.mark.parametrize("src, offset", [
    ("sin(", 4),
    ("", 0),
    ("   ", 0),
    ("1 +", 3),
    ("(t", 2),
    ("t)", 1),
    ("2 $ 3", 2),
    ("sin t", 4),
    ("pi(2)", 2),
    ("1 2", 2),
    ("é+", 0),
    ("t + é", 4),
])
def test_syntax_errors(src, offset):
    with pytest.raises(ExprSyntaxError) as info:
        parse_expr(src)
    assert info.value.offset == offset


def test_offsets_are_bytes():
    # a no-break space is whitespace but two bytes in UTF-8
    with pytest.raises(ExprSyntaxError) as info:
        parse_expr("\u00a0t )")
    assert info.value.offset == 4
    with pytest.raises(UnknownIdentifierError) as info:
        parse_expr("\u00a0\u00a0x")
    assert info.value.offset == 4


def test_unknown_identifier_lists_names():
    with pytest.raises(UnknownIdentifierError) as info:
        parse_expr("2*x + 1")
    err = info.value
    assert err.offset == 2
    msg = str(err)
    assert "'x'" in msg
    for name in ("sin", "pi", "t"):
        assert name in msg


def test_allowed_names():
    assert ALLOWED == set(FUNCTIONS) | set(CONSTANTS) | {"t"}


def test_negative_literal_rejected_in_ast():
    with pytest.raises(ValueError):
        Num(-1.0)


_leaf = st.one_of(
    st.floats(0, 1e6, allow_nan=False, allow_infinity=False).map(Num),
    st.just(Var()),
    st.sampled_from(sorted(CONSTANTS)).map(Const),
)


def _extend(children):
    return st.one_of(
        children.map(Neg),
        st.tuples(st.sampled_from("+-*/^"), children, children).map(lambda x: BinOp(*x)),
        st.tuples(st.sampled_from(sorted(FUNCTIONS)), children).map(lambda x: Call(*x)),
    )


asts = st.recursive(_leaf, _extend, max_leaves=12)


@settings(max_examples=100, deadline=None)
@given(asts)
def test_print_parse_roundtrip(node):
    assert parse_expr(to_source(node)) == node


@settings(max_examples=50, deadline=None)
@given(asts, st.floats(-3, 3))
def test_printed_form_evaluates_identically(node, t):
    a = evaluate(node, t)
    b = evaluate(parse_expr(to_source(node)), t)
    np.testing.assert_array_equal(a, b)
