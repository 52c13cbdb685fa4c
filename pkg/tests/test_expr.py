import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from weylgeo import expr as ex
from weylgeo.expr import BinOp, Call, Const, Neg, Num, Var


def test_parse_product_tree():
    assert ex.parse("sin(x1)*x2") == BinOp("*", Call("sin", (Var("x1"),)), Var("x2"))


def test_incomplete_input_offset():
    with pytest.raises(ex.ExprSyntaxError) as err:
        ex.parse("x1 + ")
    assert err.value.offset == 5
    assert "identifier" in err.value.expected


def test_pow_and_constant():
    e = ex.parse("pow(x3, 2) + cos(pi)")
    assert ex.evaluate(e, {"x3": 2.0}) == pytest.approx(3.0, abs=1e-15)


def test_caret_rejected():
    with pytest.raises(ex.ExprSyntaxError) as err:
        ex.parse("x1^2")
    assert err.value.offset == 2


def test_unknown_identifier():
    with pytest.raises(ex.ExprNameError) as err:
        ex.parse("x1 + foo")
    assert err.value.name == "foo" and err.value.offset == 5
    with pytest.raises(ex.ExprNameError):
        ex.parse("bar(x1)")


def test_byte_offsets_count_utf8():
    with pytest.raises(ex.ExprSyntaxError) as err:
        ex.parse("x1 + é")
    assert err.value.offset == 5
    with pytest.raises(ex.ExprSyntaxError) as err:
        ex.parse("sin(x1) * (x2 + ")
    assert err.value.offset == len("sin(x1) * (x2 + ".encode())


def test_wrong_arity():
    with pytest.raises(ex.ExprSyntaxError):
        ex.parse("pow(x1)")


@pytest.mark.parametrize("src, env, msg", [
    ("1/x1", {"x1": 0.0}, "division by zero"),
    ("log(x1)", {"x1": -1.0}, "log"),
    ("sqrt(x1 - 2)", {"x1": 1.0}, "sqrt"),
    ("atan2(x1, x2)", {"x1": 0.0, "x2": 0.0}, "atan2"),
])
def test_domain_errors_name_subexpression(src, env, msg):
    with pytest.raises(ex.ExprDomainError) as err:
        ex.evaluate(ex.parse(src), env)
    assert msg in str(err.value)
    assert err.value.subexpr


def test_domain_error_inside_arrays():
    with pytest.raises(ex.ExprDomainError):
        ex.eval_values(ex.parse("log(x1)"), np.array([[1.0, 0, 0, 0], [0.0, 0, 0, 0]]), ex.CHART_VARS)


def test_jet2_sine_at_zero():
    val, grad, mixed = ex.eval_jet2(ex.parse("sin(x1)"), [0.0, 0, 0, 0], seeds=(0, 0))
    assert val == 0.0 and grad[0] == 1.0 and mixed == 0.0


def test_jet2_bilinear_mixed():
    _, grad, mixed = ex.eval_jet2(ex.parse("x1*x2"), [0.5, 2.0, 0, 0], seeds=(0, 1))
    assert grad == (2.0, 0.5) and mixed == 1.0


def test_jet2_exp_second_partial_vs_fd():
    e = ex.parse("exp(2*x1)")
    _, _, d11 = ex.eval_jet2(e, [0.3, 0, 0, 0], seeds=(0, 0))
    assert d11 == pytest.approx(4 * math.exp(0.6), rel=1e-14)
    h = 1e-4
    f = lambda x: math.exp(2 * x)
    fd = (f(0.3 + h) - 2 * f(0.3) + f(0.3 - h)) / h**2
    assert abs(d11 - fd) / abs(fd) <= 1e-6


def test_jet2_direction_vectors():
    e = ex.parse("x1*x1*x2 + sin(x3)")
    d = np.array([1.0, 2.0, 0.5, 0.0])
    val, grad, mixed = ex.eval_jet2(e, [1.0, 1.0, 0.2, 0.0], seeds=(d, d))
    gradient = np.array([2.0, 1.0, math.cos(0.2), 0.0])
    hess = np.array([[2.0, 2.0, 0, 0], [2.0, 0, 0, 0], [0, 0, -math.sin(0.2), 0], [0, 0, 0, 0]])
    assert grad[0] == pytest.approx(gradient @ d)
    assert mixed == pytest.approx(d @ hess @ d)


def test_jet_matches_hyperdual_and_symbolic():
    e = ex.parse("atan2(x2, x1) * exp(x3) / (2 + cos(x4)) + pow(x1, 3) - sqrt(x1*x1 + 1)")
    pts = np.array([[0.7, -0.3, 0.1, 1.2], [1.5, 0.4, -0.2, 0.3]])
    jet = ex.eval_jet(e, pts, ex.CHART_VARS)
    names = ex.CHART_VARS
    for p in range(len(pts)):
        env = dict(zip(names, pts[p]))
        for a in range(4):
            sym = ex.evaluate(ex.diff(e, names[a]), env)
            assert jet.grad[a][p] == pytest.approx(sym, rel=1e-12, abs=1e-13)
            for b in range(4):
                _, _, mixed = ex.eval_jet2(e, pts[p], seeds=(a, b))
                sym2 = ex.evaluate(ex.diff(ex.diff(e, names[a]), names[b]), env)
                assert jet.hess[a, b][p] == pytest.approx(mixed, rel=1e-12, abs=1e-12)
                assert mixed == pytest.approx(sym2, rel=1e-10, abs=1e-12)


def test_pow_variable_exponent():
    e = ex.parse("pow(x1, x2)")
    val, grad, mixed = ex.eval_jet2(e, [2.0, 3.0, 0, 0], seeds=(0, 1))
    assert val == pytest.approx(8.0)
    assert grad[0] == pytest.approx(12.0) and grad[1] == pytest.approx(8 * math.log(2))
    assert mixed == pytest.approx(4.0 + 12 * math.log(2))


# -- property tests --------------------------------------------------------

def _monomials(draw):
    terms = []
    for _ in range(draw(st.integers(1, 6))):
        c = draw(st.floats(-2, 2, allow_nan=False))
        powers = [draw(st.integers(0, 2)) for _ in range(4)]
        while sum(powers) > 4:
            powers[powers.index(max(powers))] -= 1
        terms.append((c, powers))
    return terms


@st.composite
def polynomials(draw):
    terms = _monomials(draw)
    src = " + ".join(
        f"({c!r})" + "".join(f"*pow(x{k + 1}, {p})" for k, p in enumerate(pw) if p) for c, pw in terms)
    return src


@settings(max_examples=100)
@given(polynomials(), st.lists(st.floats(-1.5, 1.5), min_size=4, max_size=4),
       st.integers(0, 3), st.integers(0, 3))
def test_polynomial_jets_match_finite_differences(src, point, a, b):
    e = ex.parse(src)
    x = np.array(point)
    f = lambda y: ex.evaluate(e, dict(zip(ex.CHART_VARS, y)))
    _, grad, mixed = ex.eval_jet2(e, x, seeds=(a, b))
    ea, eb = np.eye(4)[a], np.eye(4)[b]
    h1, h2 = 1e-4, 1e-3
    fd1 = (f(x + h1 * ea) - f(x - h1 * ea)) / (2 * h1)
    fd2 = (f(x + h2 * ea + h2 * eb) - f(x + h2 * ea - h2 * eb) - f(x - h2 * ea + h2 * eb)
           + f(x - h2 * ea - h2 * eb)) / (4 * h2 * h2)
    scale1 = max(1.0, abs(fd1))
    scale2 = max(1.0, abs(fd2))
    assert abs(grad[0] - fd1) / scale1 <= 1e-6
    assert abs(mixed - fd2) / scale2 <= 1e-6


leaves = st.one_of(
    st.floats(0, 1e3, allow_nan=False, allow_infinity=False).map(Num),
    st.sampled_from(ex.CHART_VARS + ex.SURFACE_VARS).map(Var),
    st.sampled_from(sorted(ex.CONSTANTS)).map(Const),
)


def _extend(children):
    unary = st.sampled_from(["sin", "cos", "tan", "exp", "log", "sqrt"])
    return st.one_of(
        st.builds(BinOp, st.sampled_from("+-*/"), children, children),
        children.map(Neg),
        st.builds(lambda f, a: Call(f, (a,)), unary, children),
        st.builds(lambda f, a, b: Call(f, (a, b)), st.sampled_from(["pow", "atan2"]), children, children),
    )


trees = st.recursive(leaves, _extend, max_leaves=20)


@settings(max_examples=1000)
@given(trees)
def test_print_parse_round_trip(tree):
    once = ex.parse(ex.to_string(tree))
    assert once == tree
    assert ex.parse(ex.to_string(once)) == once


def test_numbers_print_exactly():
    for v in (0.1, 1e-300, 123456789.123, 2.0**-40):
        assert ex.parse(ex.to_string(Num(v))) == Num(v)
