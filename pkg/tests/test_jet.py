import pytest
import sympy

from gvb import (
    ModelSpec, OrderCapExceeded, ParityError, contact_decompose, exterior_d,
    h_k, horizontal_d, interior_product, iterated_total_derivative,
    lie_derivative, parse_expression, prolong, total_derivative, vertical_d,
)
from gvb.jet import base_contraction, jet_contraction, omega_lambda

from oracles import same, to_sympy, sympy_context


def P(text, model):
    return parse_expression(text, model)


@pytest.fixture
def m1():
    return ModelSpec.build(1, even=["y"], odd=["c"])


@pytest.fixture
def m2():
    return ModelSpec.build(2, even=["y", "z"], odd=["c", "b"])


# total derivatives ------------------------------------------------------------------
def test_total_derivative_examples(m1):
    assert total_derivative(P("y", m1), 0) == P("y[0]", m1)
    assert total_derivative(P("y * y[0]", m1), 0) == P("y[0]^2 + y * y[0 0]", m1)
    assert total_derivative(P("x0", m1), 0) == P("1", m1)


def test_iterated_total_derivative_examples(m1, m2):
    assert iterated_total_derivative(P("y", m1), [0, 0]) == P("y[0 0]", m1)
    assert (iterated_total_derivative(P("y", m2), [0, 1])
            == iterated_total_derivative(P("y", m2), [1, 0]) == P("y[0 1]", m2))
    # c_0 c_0 vanishes
    assert iterated_total_derivative(P("c * c[0]", m1), [0]) == P("c * c[0 0]", m1)


def test_total_derivative_on_contact_generators(m2):
    assert total_derivative(P("theta(c[1])", m2), 0) == P("theta(c[0 1])", m2)
    assert total_derivative(P("dx1", m2), 0).is_zero()


def test_total_derivative_respects_cap():
    m = ModelSpec.build(1, even=["y"], order_cap=2)
    with pytest.raises(OrderCapExceeded):
        total_derivative(P("y[0 0]", m), 0)


@pytest.mark.parametrize("text", [
    "y * y[0]", "sin(x0 * y[1]) * z", "exp(y) * z[0 1]^2 + x1", "cos(y[0] + z) * x0^3",
])
def test_total_derivative_matches_sympy(m2, text):
    ctx = sympy_context(m2)
    xs = ctx[0]
    f = P(text, m2)
    for lam in range(2):
        assert same(to_sympy(total_derivative(f, lam), ctx), sympy.diff(to_sympy(f, ctx), xs[lam]))


# differentials ---------------------------------------------------------------------
def test_exterior_d_examples(m2):
    assert exterior_d(P("y", m2)) == P("theta(y) + y[0] * dx0 + y[1] * dx1", m2)
    assert exterior_d(P("dx0", m2)).is_zero()
    f = P("x0 * sin(y[1]) * c * theta(z)", m2)
    assert exterior_d(exterior_d(f)).is_zero()


def test_exterior_d_leibniz(m2):
    for phi in (P("c * y[0]", m2), P("theta(b) * z", m2), P("y * dx0", m2)):
        for sigma in (P("b * theta(z) * dx1", m2), P("x1 * c", m2), P("theta(c[0])", m2)):
            sign = -1 if phi.degree % 2 else 1
            assert exterior_d(phi * sigma) == exterior_d(phi) * sigma + (phi * exterior_d(sigma)).scale(sign)


def test_contact_decompose_examples(m2):
    pieces = contact_decompose(exterior_d(P("y", m2)))
    assert pieces == {(0, 1): P("y[0] * dx0 + y[1] * dx1", m2), (1, 0): P("theta(y)", m2)}
    tw = P("theta(y) * omega", m2)
    assert contact_decompose(tw) == {(1, 2): tw}
    phi = P("y + theta(y) * theta(c) + c * dx0", m2)
    for k in range(3):
        assert h_k(h_k(phi, k), k) == h_k(phi, k)


def test_horizontal_d_examples(m1, m2):
    assert horizontal_d(P("y^2", m1)) == P("2 * y * y[0] * dx0", m1)
    assert horizontal_d(P("x0 * dx1", m2)) == P("dx0 * dx1", m2)
    assert horizontal_d(P("theta(y)", m1)) == P("dx0 * theta(y[0])", m1)


def test_vertical_d_examples(m1):
    assert vertical_d(P("y^2", m1)) == P("2 * y * theta(y)", m1)
    assert vertical_d(P("dx0", m1)).is_zero()
    assert vertical_d(P("c", m1)) == P("theta(c)", m1)


# contact derivations ----------------------------------------------------------------
def test_prolong_examples(m1):
    d_y = prolong({}, {"y": P("1", m1)})
    assert d_y.coefficient("y") == P("1", m1)
    assert d_y.coefficient("y", [0]).is_zero()
    scale = prolong({}, {"y": P("y", m1)})
    assert scale.coefficient("y", [0]) == P("y[0]", m1)
    assert scale.coefficient("y", [0, 0]) == P("y[0 0]", m1)
    d0 = prolong({0: P("1", m1)}, {}, model=m1)
    assert d0.vertical_part().vertical == {} and not d0.is_vertical
    f = P("y * c[0]", m1)
    assert lie_derivative(d0, f) == total_derivative(f, 0)


def test_prolong_parity_checks(m1):
    with pytest.raises(ParityError):
        prolong({}, {"y": P("1", m1), "c": P("1", m1)})
    with pytest.raises(ParityError):
        prolong({}, {"y": P("y + c", m1)})
    odd = prolong({}, {"y": P("c", m1), "c": P("y[0]", m1)})
    assert odd.parity == 1


def test_interior_product_examples(m2):
    lam0 = base_contraction(P("omega", m2), 0)
    assert lam0 == P("dx1", m2) == omega_lambda(m2, 0)
    assert omega_lambda(m2, 1) == P("-1 * dx0", m2)
    d_y = prolong({}, {"y": P("1", m2)})
    assert interior_product(d_y, P("theta(y)", m2)) == P("1", m2)
    assert jet_contraction(P("theta(y[0]) * theta(c)", m2), "y", [0]) == P("theta(c)", m2)


def test_interior_product_leibniz(m2):
    vt = prolong({1: P("c", m2)}, {"y": P("b", m2), "c": P("y[0]", m2)})
    pairs = [(P("theta(y) * c", m2), P("theta(c[1]) * dx0", m2)),
             (P("dx1 * b", m2), P("theta(y[0])", m2))]
    for phi, sigma in pairs:
        sign = -1 if (phi.degree + phi.parity * vt.parity) % 2 else 1
        lhs = interior_product(vt, phi * sigma)
        rhs = interior_product(vt, phi) * sigma + (phi * interior_product(vt, sigma)).scale(sign)
        assert lhs == rhs


def test_interior_product_twice_vanishes_for_even(m2):
    vt = prolong({0: P("y", m2)}, {"y": P("z[1]", m2), "c": P("b", m2)})
    phi = P("theta(y) * theta(c) * dx0 + theta(y[1]) * dx0 * dx1", m2)
    assert interior_product(vt, interior_product(vt, phi)).is_zero()


def test_lie_derivative_examples(m1, m2):
    d_y = prolong({}, {"y": P("1", m1)})
    assert lie_derivative(d_y, P("y * omega", m1)) == P("omega", m1)
    vt = prolong({0: P("x1", m2)}, {"y": P("c * b", m2), "c": P("z * b", m2)})
    phi = P("y[0] * c * theta(b)", m2)
    assert lie_derivative(vt, exterior_d(phi)) == exterior_d(lie_derivative(vt, phi))


def test_vertical_relations_with_dh(m2):
    vt = prolong({}, {"y": P("c * b[0]", m2), "c": P("y[1] * b", m2), "b": P("x0 * c", m2)})
    phi = P("y * c * theta(z[0]) + b * z[1] * dx0", m2)
    assert (interior_product(vt, horizontal_d(phi)) + horizontal_d(interior_product(vt, phi))).is_zero()
    assert lie_derivative(vt, horizontal_d(phi)) == horizontal_d(lie_derivative(vt, phi))
