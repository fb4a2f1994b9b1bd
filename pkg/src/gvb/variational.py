"""Variational structure: ϱ, δ = ϱ∘d, Euler-Lagrange operator, Lepagean tail.

Sums over multi-indices run over distinct unordered Λ with ∂^Λ_A the plain
partial derivative in s^A_Λ.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .algebra import (
    G_DX, G_ODD, GradedForm, GradedFunction, left_jet_partial, omega, theta, wedge,
)
from .jet import (
    ContactDerivation, exterior_d, horizontal_d, interior_product,
    iterated_total_derivative, jet_contraction, lie_derivative, omega_lambda,
    total_derivative, vertical_d,
)
from .model import BidegreeError, Field, JetVariable, MultiIndex


@dataclass(frozen=True, eq=False)
class Lagrangian:
    """L = ℒ ω for a density ℒ of form degree 0."""
    density: GradedFunction

    def __post_init__(self):
        if not isinstance(self.density, GradedForm) or self.density.degree != 0:
            raise BidegreeError("a Lagrangian density must have form degree 0")

    @classmethod
    def from_form(cls, form: GradedForm) -> "Lagrangian":
        """Recover ℒ from a (0, n) form ℒω."""
        model = form.model
        volume = tuple(range(model.n))
        density = {}
        for (mono, gens), c in form.terms.items():
            k = len(gens) - model.n
            head, tail = gens[:max(k, 0)], gens[max(k, 0):]
            if (k < 0 or any(g.kind != G_DX for g in tail)
                    or tuple(g.payload for g in tail) != volume
                    or any(g.kind != G_ODD for g in head)):
                raise BidegreeError("not a (0, n) form")
            density[(mono, head)] = c
        return cls(GradedFunction(model, density))

    @property
    def model(self):
        return self.density.model

    def form(self) -> GradedForm:
        return self.density * omega(self.model)

    @property
    def order(self) -> int:
        return max((j.order for j in self.density.jet_variables()), default=0)

    def __eq__(self, other):
        return isinstance(other, Lagrangian) and self.density == other.density

    __hash__ = None


@dataclass(eq=False)
class DensityVariation:
    """δL = Σ θ^A ∧ E_A ω, one component per field in declaration order."""
    model: object
    components: dict

    def __getitem__(self, name) -> GradedFunction:
        return self.components[self.model.field(name)]

    def to_form(self) -> GradedForm:
        out = GradedForm.zero(self.model)
        w = omega(self.model)
        for f, e in self.components.items():
            if e:
                out = out + theta(self.model, JetVariable(f, MultiIndex())) * e * w
        return out

    def __eq__(self, other):
        if not isinstance(other, DensityVariation):
            return NotImplemented
        nz = lambda c: {k: v for k, v in c.items() if v}
        return self.model == other.model and nz(self.components) == nz(other.components)

    __hash__ = None


@dataclass(eq=False)
class LepageanTail:
    """Ξ = Σ θ^A_ν ∧ F^{λν}_A ω_λ keyed by (field, ν, λ)."""
    model: object
    coefficients: dict

    def to_form(self) -> GradedForm:
        out = GradedForm.zero(self.model)
        for (f, nu, lam), c in sorted(self.coefficients.items()):
            out = out + theta(self.model, JetVariable(f, nu)) * c * omega_lambda(self.model, lam)
        return out

    def __getitem__(self, key):
        field, nu, lam = key
        return self.coefficients.get(
            (self.model.field(field), MultiIndex(nu), lam), GradedForm.zero(self.model))


def _require_top_horizontal(phi, contact=True):
    n = phi.model.n
    for k, m in phi.bidegrees():
        if m != n or (contact and k < 1):
            raise BidegreeError(f"expected horizontal degree {n}"
                                f"{' and contact degree >= 1' if contact else ''},"
                                f" got bidegree {(k, m)}")


def rho_bar(phi: GradedForm) -> GradedForm:
    """Σ_{A,Λ} (-1)^|Λ| θ^A ∧ d_Λ(∂^Λ_A⌋φ)."""
    _require_top_horizontal(phi)
    if len({k for k, _ in phi.bidegrees()}) > 1:
        raise BidegreeError("rho_bar needs a form of a single contact degree")
    model = phi.model
    out = GradedForm.zero(model)
    for jv in phi.theta_variables():
        inner = jet_contraction(phi, jv.field, jv.multi_index)
        inner = iterated_total_derivative(inner, jv.multi_index)
        term = theta(model, JetVariable(jv.field, MultiIndex())) * inner
        out = out - term if len(jv.multi_index) % 2 else out + term
    return out


def rho(phi: GradedForm) -> GradedForm:
    """ϱ = Σ_{k>0} (1/k) ϱ̄ ∘ h_k ∘ h^n; pieces of other bidegree go to zero."""
    n = phi.model.n
    out = GradedForm.zero(phi.model)
    for (k, m), piece in phi.pieces().items():
        if k > 0 and m == n:
            out = out + rho_bar(piece).scale(Fraction(1, k))
    return out


def variational_delta(phi: GradedForm) -> GradedForm:
    """δφ = ϱ(dφ) for φ of horizontal degree n."""
    _require_top_horizontal(phi, contact=False)
    return rho(exterior_d(phi))


def _el_sign(multi_index) -> int:
    return -1 if len(multi_index) % 2 else 1


def euler_lagrange(L) -> DensityVariation:
    """E_A = Σ_Λ (-1)^|Λ| d_Λ(∂^Λ_A ℒ)."""
    if not isinstance(L, Lagrangian):
        L = Lagrangian(L)
    density = L.density
    model = density.model
    jets = density.jet_variables()
    components = {}
    for f in model.fields:
        e = GradedForm.zero(model)
        for jv in jets:
            if jv.field != f:
                continue
            mi = jv.multi_index
            term = iterated_total_derivative(left_jet_partial(density, f, mi), mi)
            e = e + term.scale(_el_sign(mi))
        components[f] = e
    return DensityVariation(model, components)


def _lepagean_step(partial, tail):
    # F^Λ = ∂^Λ ℒ - Σ_λ d_λ F^{λΛ}
    return partial - tail


def _sub_multisets(mi):
    out = set()
    stack = [MultiIndex(mi)]
    while stack:
        cur = stack.pop()
        if not cur or cur in out:
            continue
        out.add(cur)
        for lam in cur.distinct():
            stack.append(cur.remove(lam))
    return out


def lepagean(L) -> LepageanTail:
    """Ξ from the descending recursion with all free functions h set to zero.

    With unordered multi-indices the symmetric solution Φ^I of the recursion
    is split over the leading index as F^{λ, I-λ} = (m_λ(I)/|I|) Φ^I, where
    m_λ(I) is the multiplicity of λ in I.
    """
    if not isinstance(L, Lagrangian):
        L = Lagrangian(L)
    density = L.density
    model = density.model
    coeffs = {}
    for f in model.fields:
        partials = {}
        support = set()
        for jv in density.jet_variables():
            if jv.field == f and jv.order > 0:
                partials[jv.multi_index] = left_jet_partial(density, f, jv.multi_index)
                support |= _sub_multisets(jv.multi_index)
        for idx in sorted(support, key=lambda m: (-len(m), tuple(m))):
            tail = GradedForm.zero(model)
            for lam in range(model.n):
                upper = coeffs.get((f, idx, lam))
                if upper is not None:
                    tail = tail + total_derivative(upper, lam)
            phi = _lepagean_step(partials.get(idx, GradedForm.zero(model)), tail)
            if not phi:
                continue
            for lam in idx.distinct():
                value = phi.scale(Fraction(idx.multiplicity(lam), len(idx)))
                coeffs[(f, idx.remove(lam), lam)] = value
    return LepageanTail(model, coeffs)


def lepagean_residual(L, tail: LepageanTail | None = None) -> GradedForm:
    """dL - δL + d_H Ξ; zero exactly when the decomposition holds."""
    if not isinstance(L, Lagrangian):
        L = Lagrangian(L)
    if tail is None:
        tail = lepagean(L)
    form = L.form()
    return exterior_d(form) - variational_delta(form) + horizontal_d(tail.to_form())


@dataclass(eq=False)
class Report:
    lhs: GradedForm
    rhs: GradedForm
    residual: GradedForm
    vertical: bool

    @property
    def ok(self) -> bool:
        return self.residual.is_zero()


def first_variational_check(L, vt: ContactDerivation) -> Report:
    """Both sides of L_ϑ L = ϑ_V⌋δL + d_H(h_0(ϑ⌋Ξ_L)) + d_V(ϑ_H⌋ω) ℒ.

    The last term is read as (d_V(ϑ_H⌋ω)) ∧ ℒ; it vanishes for vertical ϑ,
    the only case in which a zero residual is guaranteed.
    """
    if not isinstance(L, Lagrangian):
        L = Lagrangian(L)
    model = L.model
    form = L.form()
    lhs = lie_derivative(vt, form)
    source = euler_lagrange(L).to_form()
    xi_l = lepagean(L).to_form() + form
    rhs = (interior_product(vt.vertical_part(), source)
           + horizontal_d(interior_product(vt, xi_l).project(k=0))
           + wedge(vertical_d(interior_product(vt.horizontal_part(), omega(model))),
                   L.density))
    return Report(lhs, rhs, lhs - rhs, vt.is_vertical)


__all__ = [
    "Lagrangian", "DensityVariation", "LepageanTail", "Report", "rho_bar",
    "rho", "variational_delta", "euler_lagrange", "lepagean",
    "lepagean_residual", "first_variational_check", "Field",
]
