"""Differential calculus on the graded jet algebra.

Forms are stored in the contact basis {dx^λ, θ^A_Λ}, so the splitting
d = d_H + d_V is read off generator by generator:

    d x^μ      = dx^μ                       (horizontal)
    d s^A_Λ    = θ^A_Λ + s^A_{μ+Λ} dx^μ     (vertical + horizontal)
    d θ^A_Λ    = dx^μ ∧ θ^A_{μ+Λ}           (horizontal)
    d dx^μ     = 0
"""
from __future__ import annotations

from .algebra import (
    A_COORD, A_JET, G_DX, G_ODD, G_THETA, Atom, GradedForm, GradedFunction,
    apply_derivation, dx, jet, omega, theta,
)
from .model import EVEN, GvbError, JetVariable, MultiIndex, ParityError


def _one(model):
    return GradedForm.constant(model, 1)


def total_derivative(f: GradedForm, lam: int) -> GradedForm:
    """d_λ; on forms it also acts on contact generators, θ^A_Λ -> θ^A_{λ+Λ}."""
    model = f.model
    if not 0 <= lam < model.n:
        raise GvbError(f"index {lam} out of range for dim {model.n}")
    cap = model.order_cap
    one = _one(model)

    def image(x):
        k = x.kind
        if isinstance(x, Atom):
            if k == A_COORD:
                return one if x.payload == lam else None
            if k == A_JET:
                return jet(model, x.payload.raised(lam, cap))
            return None
        if k == G_ODD:
            return jet(model, x.payload.raised(lam, cap))
        if k == G_THETA:
            return theta(model, x.payload.raised(lam, cap))
        return None

    return apply_derivation(f, image, 0, 0)


def iterated_total_derivative(f: GradedForm, multi_index) -> GradedForm:
    """d_Λ = d_{λ1} ∘ ... ∘ d_{λk}, applied in ascending index order."""
    for lam in MultiIndex(multi_index):
        if not f.terms:
            break
        f = total_derivative(f, lam)
    return f


def _raised_sum(model, jv, make):
    """Σ_μ make(s_{μ+Λ}) ∧ dx^μ."""
    out = GradedForm.zero(model)
    for mu in range(model.n):
        out = out + make(jv.raised(mu, model.order_cap)) * dx(model, mu)
    return out


def exterior_d(phi: GradedForm) -> GradedForm:
    model = phi.model

    def image(x):
        k = x.kind
        if isinstance(x, Atom):
            if k == A_COORD:
                return dx(model, x.payload)
            if k == A_JET:
                jv = x.payload
                return theta(model, jv) + _raised_sum(model, jv, lambda j: jet(model, j))
            return None
        if k == G_ODD:
            jv = x.payload
            return theta(model, jv) + _raised_sum(model, jv, lambda j: jet(model, j))
        if k == G_THETA:
            return _dtheta(model, x.payload)
        return None

    return apply_derivation(phi, image, 1, 0)


def _dtheta(model, jv):
    out = GradedForm.zero(model)
    for mu in range(model.n):
        out = out + dx(model, mu) * theta(model, jv.raised(mu, model.order_cap))
    return out


def horizontal_d(phi: GradedForm) -> GradedForm:
    """d_H = dx^λ ∧ d_λ."""
    model = phi.model

    def image(x):
        k = x.kind
        if isinstance(x, Atom):
            if k == A_COORD:
                return dx(model, x.payload)
            if k == A_JET:
                return _raised_sum(model, x.payload, lambda j: jet(model, j))
            return None
        if k == G_ODD:
            return _raised_sum(model, x.payload, lambda j: jet(model, j))
        if k == G_THETA:
            return _dtheta(model, x.payload)
        return None

    return apply_derivation(phi, image, 1, 0)


def vertical_d(phi: GradedForm) -> GradedForm:
    """d_V: s^A_Λ -> θ^A_Λ, zero on x^λ, dx^λ and θ^A_Λ."""
    model = phi.model

    def image(x):
        if isinstance(x, Atom):
            return theta(model, x.payload) if x.kind == A_JET else None
        if x.kind == G_ODD:
            return theta(model, x.payload)
        return None

    return apply_derivation(phi, image, 1, 0)


def contact_decompose(phi: GradedForm) -> dict:
    """{(k, m): h_k h^m φ} over the nonzero pieces."""
    return phi.pieces()


def h_k(phi: GradedForm, k: int) -> GradedForm:
    return phi.project(k=k)


def h_m(phi: GradedForm, m: int) -> GradedForm:
    return phi.project(m=m)


class ContactDerivation:
    """ϑ = ϑ^λ d_λ + ϑ^A ∂_A + Σ_{|Λ|>0} d_Λ ϑ^A ∂^Λ_A.

    Only the generating coefficients are stored; prolongation coefficients
    d_Λ ϑ^A are computed on demand and memoised per instance.
    """

    def __init__(self, model, horizontal, vertical, parity):
        self.model = model
        self.horizontal = dict(horizontal)
        self.vertical = dict(vertical)
        self.parity = parity
        self._memo = {}

    def coefficient(self, field, multi_index=()) -> GradedFunction:
        """The coefficient d_Λ ϑ^A of ∂^Λ_A."""
        field = self.model.field(field)
        mi = MultiIndex(multi_index)
        key = (field, mi)
        try:
            return self._memo[key]
        except KeyError:
            pass
        base = self.vertical.get(field)
        if base is None:
            value = GradedForm.zero(self.model)
        elif not mi:
            value = base
        else:
            value = total_derivative(self.coefficient(field, mi[:-1]), mi[-1])
        self._memo[key] = value
        return value

    @property
    def is_vertical(self) -> bool:
        return all(c.is_zero() for c in self.horizontal.values())

    def vertical_part(self) -> "ContactDerivation":
        return ContactDerivation(self.model, {}, self.vertical, self.parity)

    def horizontal_part(self) -> "ContactDerivation":
        return ContactDerivation(self.model, self.horizontal, {}, self.parity)

    def __call__(self, f: GradedForm) -> GradedForm:
        return lie_derivative(self, f)

    def __eq__(self, other):
        if not isinstance(other, ContactDerivation):
            return NotImplemented
        nz = lambda d: {k: v for k, v in d.items() if not v.is_zero()}
        return (self.model == other.model
                and nz(self.horizontal) == nz(other.horizontal)
                and nz(self.vertical) == nz(other.vertical))

    __hash__ = None

    def __repr__(self):
        from .lang import render_derivation
        return f"<ContactDerivation {render_derivation(self)}>"


def prolong(horizontal=None, vertical=None, model=None) -> ContactDerivation:
    """Contact derivation from ϑ^λ and ϑ^A.

    Coefficients must be homogeneous functions with [ϑ^λ] = [ϑ] and
    [ϑ^A] = [A] + [ϑ].
    """
    horizontal = dict(horizontal or {})
    vertical = dict(vertical or {})
    values = list(horizontal.values()) + list(vertical.values())
    if model is None:
        if not values:
            raise GvbError("model required for the zero derivation")
        model = values[0].model
    parity = None
    for lam, c in horizontal.items():
        if not 0 <= lam < model.n:
            raise GvbError(f"index {lam} out of range for dim {model.n}")
        parity = _check_slot(c, 0, parity, f"horizontal coefficient {lam}")
    fixed = {}
    for name, c in vertical.items():
        f = model.field(name)
        parity = _check_slot(c, f.parity, parity, f"vertical coefficient {f.name}")
        fixed[f] = c
    for c in values:
        if c.model != model:
            raise GvbError("derivation coefficients from a different model")
    return ContactDerivation(model, horizontal, fixed, parity or 0)


def _check_slot(c, shift, parity, what):
    if c.is_zero():
        return parity
    if not c.is_homogeneous() or c.degree != 0:
        raise ParityError(f"{what} must be a homogeneous function")
    p = (c.parity + shift) % 2
    if parity is not None and p != parity:
        raise ParityError(f"{what} has inconsistent parity")
    return p


def interior_product(vt: ContactDerivation, phi: GradedForm) -> GradedForm:
    """ϑ⌋φ: dx^λ -> ϑ^λ, θ^A_Λ -> d_Λ ϑ^A, extended with the graded Leibniz rule."""

    def image(x):
        if isinstance(x, Atom):
            return None
        if x.kind == G_DX:
            return vt.horizontal.get(x.payload)
        if x.kind == G_THETA:
            jv = x.payload
            return vt.coefficient(jv.field, jv.multi_index)
        return None

    return apply_derivation(phi, image, -1, vt.parity)


def lie_derivative(vt: ContactDerivation, phi: GradedForm) -> GradedForm:
    """L_ϑ φ = ϑ⌋dφ + d(ϑ⌋φ)."""
    return interior_product(vt, exterior_d(phi)) + exterior_d(interior_product(vt, phi))


def jet_contraction(phi: GradedForm, field, multi_index=()) -> GradedForm:
    """∂^Λ_A⌋φ for the derivation dual to ds^A_Λ."""
    model = phi.model
    target = JetVariable(model.field(field), MultiIndex(multi_index))
    one = _one(model)

    def image(x):
        if isinstance(x, Atom) or x.kind != G_THETA:
            return None
        return one if x.payload == target else None

    return apply_derivation(phi, image, -1, target.field.parity)


def base_contraction(phi: GradedForm, lam: int) -> GradedForm:
    """∂_λ⌋φ."""
    one = _one(phi.model)

    def image(x):
        if isinstance(x, Atom) or x.kind != G_DX:
            return None
        return one if x.payload == lam else None

    return apply_derivation(phi, image, -1, 0)


def omega_lambda(model, lam: int) -> GradedForm:
    """ω_λ = ∂_λ⌋ω."""
    return base_contraction(omega(model), lam)


__all__ = [
    "total_derivative", "iterated_total_derivative", "exterior_d",
    "horizontal_d", "vertical_d", "contact_decompose", "h_k", "h_m",
    "ContactDerivation", "prolong", "interior_product", "lie_derivative",
    "jet_contraction", "base_contraction", "omega_lambda", "EVEN",
]
