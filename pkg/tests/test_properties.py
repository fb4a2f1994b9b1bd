"""Invariants checked on hypothesis-generated inputs over a fixed model."""
from fractions import Fraction

from hypothesis import given, strategies as st

from gvb import (
    GradedForm, Lagrangian, ModelSpec, MultiIndex, euler_lagrange, exterior_d,
    first_variational_check, h_k, horizontal_d, interior_product,
    lepagean_residual, lie_derivative, normalize, parse_expression, prolong,
    render, rho, total_derivative, variational_delta, vertical_d, wedge,
)
from gvb.algebra import dx, jet, left_jet_partial, swap_sign, theta
from gvb.model import JetVariable

M = ModelSpec.build(2, even=["y", "z"], odd=["c", "b"])
ONE = GradedForm.constant(M, 1)

multi_indices = st.lists(st.integers(0, 1), max_size=2).map(MultiIndex)
coefficients = st.fractions(min_value=-9, max_value=9, max_denominator=9).filter(bool)


def _jv(names):
    return st.builds(lambda n, mi: JetVariable(M.field(n), mi), st.sampled_from(names), multi_indices)


even_jets = _jv(["y", "z"]).map(lambda v: jet(M, v))
odd_jets = _jv(["c", "b"]).map(lambda v: jet(M, v))
coords = st.integers(0, 1).map(M.coord)
plain_atoms = st.one_of(coords, even_jets)
even_atoms = st.one_of(
    plain_atoms, plain_atoms,
    st.builds(M.apply, st.sampled_from(["sin", "cos", "exp"]), plain_atoms))


@st.composite
def functions(draw, parity=None):
    out = GradedForm.zero(M)
    for _ in range(draw(st.integers(1, 3))):
        p = draw(st.integers(0, 1)) if parity is None else parity
        t = GradedForm.constant(M, draw(coefficients))
        for a in draw(st.lists(even_atoms, max_size=2)):
            t = t * a
        for o in draw(st.lists(odd_jets, min_size=p, max_size=p + 2).filter(lambda xs: len(xs) % 2 == p)):
            t = t * o
        out = out + t
    return out


@st.composite
def forms(draw, k=None, m=None, parity=None):
    k = draw(st.integers(0, 2)) if k is None else k
    m = draw(st.integers(0, 2)) if m is None else m
    parity = draw(st.integers(0, 1)) if parity is None else parity
    out = GradedForm.zero(M)
    for _ in range(draw(st.integers(1, 2))):
        word, par = ONE, 0
        for v in draw(st.lists(_jv(["y", "z", "c", "b"]), min_size=k, max_size=k)):
            word = word * theta(M, v)
            par += v.field.parity
        for lam in sorted(draw(st.sets(st.integers(0, 1), min_size=m, max_size=m))):
            word = word * dx(M, lam)
        out = out + draw(functions((parity - par) % 2)) * word
    return out


mixed_forms = st.lists(forms(), min_size=1, max_size=2).map(lambda fs: sum(fs[1:], fs[0]))


@st.composite
def vertical_derivations(draw):
    parity = draw(st.integers(0, 1))
    vertical = {}
    for f in M.fields:
        if draw(st.booleans()):
            vertical[f.name] = draw(functions((f.parity + parity) % 2))
    vt = prolong({}, vertical, model=M)
    vt.parity = parity
    return vt


lagrangians = st.integers(0, 1).flatmap(functions).map(Lagrangian)


# graded algebra ---------------------------------------------------------------------
@given(forms(), forms())
def test_wedge_swap_law(phi, sigma):
    if phi and sigma:
        assert wedge(phi, sigma) == wedge(sigma, phi).scale(swap_sign(phi, sigma))


@given(forms(), forms(), forms())
def test_wedge_associative_and_distributive(a, b, c):
    assert wedge(wedge(a, b), c) == wedge(a, wedge(b, c))
    assert wedge(a, b + c) == wedge(a, b) + wedge(a, c)


@given(mixed_forms)
def test_normalize_idempotent(phi):
    again = normalize(("+", phi, ("num", Fraction(0))), M)
    assert again == phi and again.sorted_terms() == phi.sorted_terms()
    assert (phi - phi).terms == {}


homogeneous_functions = st.integers(0, 1).flatmap(functions)


@given(homogeneous_functions, functions(), st.sampled_from(["y", "z", "c", "b"]), multi_indices)
def test_left_partial_leibniz(f, g, name, mi):
    if not f:
        return
    sign = -1 if M.field(name).parity * f.parity else 1
    lhs = left_jet_partial(f * g, name, mi)
    rhs = left_jet_partial(f, name, mi) * g + (f * left_jet_partial(g, name, mi)).scale(sign)
    assert lhs == rhs


@given(functions(), multi_indices, multi_indices)
def test_odd_partials_anticommute(f, mi, nu):
    a = lambda h: left_jet_partial(h, "c", mi)
    b = lambda h: left_jet_partial(h, "b", nu)
    assert a(b(f)) == -b(a(f))
    assert a(a(f)).is_zero()


# jet calculus ---------------------------------------------------------------------
@given(mixed_forms)
def test_differentials_square_to_zero(phi):
    assert exterior_d(exterior_d(phi)).is_zero()
    assert horizontal_d(horizontal_d(phi)).is_zero()
    assert vertical_d(vertical_d(phi)).is_zero()
    assert (horizontal_d(vertical_d(phi)) + vertical_d(horizontal_d(phi))).is_zero()
    assert exterior_d(phi) == horizontal_d(phi) + vertical_d(phi)


@given(functions(), st.integers(0, 1), st.integers(0, 1))
def test_total_derivatives_commute(f, lam, mu):
    assert total_derivative(total_derivative(f, lam), mu) == total_derivative(total_derivative(f, mu), lam)


@given(mixed_forms)
def test_contact_projectors(phi):
    total = GradedForm.zero(M)
    for k in range(4):
        assert h_k(h_k(phi, k), k) == h_k(phi, k)
        for j in range(4):
            if j != k:
                assert h_k(h_k(phi, k), j).is_zero()
        total = total + h_k(phi, k)
    assert total == phi


@given(vertical_derivations(), mixed_forms)
def test_vertical_derivation_relations(vt, phi):
    assert (interior_product(vt, horizontal_d(phi)) + horizontal_d(interior_product(vt, phi))).is_zero()
    assert lie_derivative(vt, horizontal_d(phi)) == horizontal_d(lie_derivative(vt, phi))
    assert lie_derivative(vt, exterior_d(phi)) == exterior_d(lie_derivative(vt, phi))


@given(vertical_derivations(), forms(), forms())
def test_interior_product_leibniz(vt, phi, sigma):
    if not phi:
        return
    sign = -1 if (phi.degree + phi.parity * vt.parity) % 2 else 1
    lhs = interior_product(vt, phi * sigma)
    rhs = interior_product(vt, phi) * sigma + (phi * interior_product(vt, sigma)).scale(sign)
    assert lhs == rhs


@given(vertical_derivations(), mixed_forms)
def test_even_interior_product_twice_vanishes(vt, phi):
    if vt.parity == 0:
        assert interior_product(vt, interior_product(vt, phi)).is_zero()


# variational ------------------------------------------------------------------------
@given(st.integers(1, 2).flatmap(lambda k: forms(k=k, m=2)))
def test_rho_idempotent(phi):
    r = rho(phi)
    assert rho(r) == r


@given(forms(m=1))
def test_rho_kills_horizontal_exact(xi):
    assert rho(horizontal_d(xi)).is_zero()


@given(forms(k=0, m=1))
def test_delta_and_el_kill_total_divergences(xi):
    dh = horizontal_d(xi)
    assert variational_delta(dh).is_zero()
    if dh:
        ev = euler_lagrange(Lagrangian.from_form(dh))
        assert all(e.is_zero() for e in ev.components.values())


@given(lagrangians)
def test_el_matches_delta_and_parity(lag):
    ev = euler_lagrange(lag)
    assert variational_delta(lag.form()) == ev.to_form()
    if lag.density:
        for f, e in ev.components.items():
            assert not e or e.parity == (lag.density.parity + f.parity) % 2


@given(lagrangians)
def test_lepagean_decomposition(lag):
    assert lepagean_residual(lag).is_zero()


@given(lagrangians, vertical_derivations())
def test_first_variational_formula(lag, vt):
    assert first_variational_check(lag, vt).ok


# language ---------------------------------------------------------------------------
@given(mixed_forms)
def test_render_round_trip(phi):
    text = render(phi)
    assert parse_expression(text, M) == phi
    assert render(parse_expression(text, M)) == text
