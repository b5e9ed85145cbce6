import pytest

from svistab.errors import ExpressionError
from svistab.expressions import Expression


@pytest.mark.parametrize(
    "text,p,x,expected",
    [
        ("p^3 + x^3", [1.0], [2.0], 9.0),
        ("x - p", [0.5], [2.0], 1.5),
        ("-x^2", [0.0], [3.0], -9.0),
        ("2^3^2", [0.0], [0.0], 512.0),
        ("min(x, p, 4)", [2.0], [3.0], 2.0),
        ("max(abs(x), sqrt(p))", [9.0], [-2.0], 3.0),
        ("(x + 1) * (x - 1) / 2", [0.0], [3.0], 4.0),
        ("1.5e1 - .5", [0.0], [0.0], 14.5),
    ],
)
def test_evaluation(text, p, x, expected):
    assert Expression.compile(text)(p, x) == pytest.approx(expected)


def test_vector_components():
    f = Expression.compile("x1 + 2*x2 - p2", p_dim=2, x_dim=2)
    assert f([0.0, 1.0], [1.0, 3.0]) == pytest.approx(6.0)
    assert f.variables == frozenset({"x1", "x2", "p2"})
    assert f.depends_on_p


def test_depends_on_p():
    assert not Expression.compile("x^3").depends_on_p
    assert Expression.compile("p + x").depends_on_p


@pytest.mark.parametrize("text", ["x +", "(x", "y + 1", "x3", "sqrt(x, p)", "max(x)", "x $ 2", ""])
def test_parse_errors(text):
    with pytest.raises(ExpressionError):
        Expression.compile(text)


def test_parse_error_reports_column():
    with pytest.raises(ExpressionError) as info:
        Expression.compile("x + y")
    assert info.value.column == 5


@pytest.mark.parametrize("text,x", [("1 / x", 0.0), ("sqrt(x)", -1.0)])
def test_evaluation_errors(text, x):
    f = Expression.compile(text)
    with pytest.raises(ExpressionError):
        f([0.0], [x])
