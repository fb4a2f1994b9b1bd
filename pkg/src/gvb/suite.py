"""Seeded property suite over randomly generated models, forms and derivations.

Every case draws from its own counter-based stream keyed by
``(seed, property index, case index)``, so a case can be reproduced alone
and the report does not depend on evaluation order.
"""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field as dc_field
from fractions import Fraction

import numpy as np

from . import jet as J
from . import variational as V
from .algebra import GradedForm, swap_sign, wedge
from .lang import SCHEMA_VERSION, model_text, parse_expression, render, render_derivation
from .model import EVEN, ODD, GvbError, JetVariable, ModelSpec, MultiIndex

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class SuiteConfig:
    seed: int = 42
    cases: int = 10
    max_dim: int = 2
    max_fields: int = 2
    max_order: int = 2
    max_terms: int = 4
    max_coeff: int = 9
    even_only: bool = False

    def __post_init__(self):
        for name in ("cases", "max_dim", "max_terms", "max_coeff"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.max_fields < 1 or self.max_order < 0:
            raise ValueError("need at least one field and a non-negative order bound")


def case_rng(seed: int, prop: int, case: int) -> np.random.Generator:
    ss = np.random.SeedSequence([seed & _MASK64, prop, case])
    return np.random.Generator(np.random.Philox(ss))


# generators ---------------------------------------------------------------
_EVEN_NAMES = ("y", "z")
_ODD_NAMES = ("c", "b")


def _names(base, count):
    return [base[i] if i < len(base) else f"{base[0]}{i}" for i in range(count)]


def random_model(rng, cfg: SuiteConfig) -> ModelSpec:
    n = int(rng.integers(1, cfg.max_dim + 1))
    n_even = int(rng.integers(0, cfg.max_fields + 1))
    n_odd = 0 if cfg.even_only else int(rng.integers(0, cfg.max_fields + 1))
    if n_even + n_odd == 0:
        if cfg.even_only or rng.integers(2):
            n_even = 1
        else:
            n_odd = 1
    return ModelSpec.build(n, _names(_EVEN_NAMES, n_even), _names(_ODD_NAMES, n_odd))


def _coeff(rng, cfg):
    p = int(rng.integers(1, cfg.max_coeff + 1)) * (1 if rng.integers(2) else -1)
    q = int(rng.integers(1, cfg.max_coeff + 1))
    return Fraction(p, q)


def _jet_variable(rng, model, cfg, fields):
    f = fields[int(rng.integers(len(fields)))]
    order = int(rng.integers(0, cfg.max_order + 1))
    mi = MultiIndex(int(i) for i in rng.integers(0, model.n, size=order))
    return JetVariable(f, mi)


def _even_atom(rng, model, cfg, allow_apply=True):
    r = rng.random()
    if r < 0.2 or not model.even_fields:
        return model.coord(int(rng.integers(model.n)))
    if allow_apply and r > 0.9:
        name = ("sin", "cos", "exp")[int(rng.integers(3))]
        inner = _even_atom(rng, model, cfg, allow_apply=False).scale(
            Fraction(int(rng.integers(1, 4))))
        return model.apply(name, inner)
    from .algebra import jet
    return jet(model, _jet_variable(rng, model, cfg, model.even_fields))


def random_function(rng, model, cfg: SuiteConfig, parity: int | None = None,
                    terms: int | None = None) -> GradedForm:
    """Random graded function; homogeneous of ``parity`` when given."""
    from .algebra import jet
    out = GradedForm.zero(model)
    if terms is None:
        terms = int(rng.integers(1, cfg.max_terms + 1))
    for _ in range(terms):
        p = int(rng.integers(2)) if parity is None else parity
        if p and not model.odd_fields:
            continue
        t = GradedForm.constant(model, _coeff(rng, cfg))
        for _ in range(int(rng.integers(0, 3))):
            t = t * _even_atom(rng, model, cfg)
        n_odd = p
        if model.odd_fields and rng.random() < 0.4:
            n_odd += 2
        for _ in range(n_odd):
            t = t * jet(model, _jet_variable(rng, model, cfg, model.odd_fields))
        out = out + t
    return out


def random_form(rng, model, cfg: SuiteConfig, k: int | None = None, m: int | None = None,
                parity: int | None = None, terms: int | None = None) -> GradedForm:
    """Random form, homogeneous of bidegree (k, m) and ``parity`` when given."""
    from .algebra import dx, theta
    if k is None:
        k = int(rng.integers(0, 3))
    if m is None:
        m = int(rng.integers(0, model.n + 1))
    if parity is None:
        parity = int(rng.integers(2)) if model.odd_fields else 0
    if terms is None:
        terms = int(rng.integers(1, cfg.max_terms + 1))
    out = GradedForm.zero(model)
    for _ in range(terms):
        word = GradedForm.constant(model, 1)
        par = 0
        for _ in range(k):
            jv = _jet_variable(rng, model, cfg, model.fields)
            par += jv.parity
            word = word * theta(model, jv)
        for lam in sorted(rng.choice(model.n, size=m, replace=False).tolist()):
            word = word * dx(model, int(lam))
        coeff = random_function(rng, model, cfg, parity=(parity - par) % 2, terms=1)
        out = out + coeff * word
    return out


def random_mixed_form(rng, model, cfg):
    out = GradedForm.zero(model)
    for _ in range(int(rng.integers(1, 3))):
        out = out + random_form(rng, model, cfg, terms=int(rng.integers(1, 3)))
    return out


def random_lagrangian(rng, model, cfg) -> V.Lagrangian:
    parity = 0 if not model.odd_fields else int(rng.integers(2))
    return V.Lagrangian(random_function(rng, model, cfg, parity=parity))


def random_vertical_derivation(rng, model, cfg) -> J.ContactDerivation:
    parity = 0 if not model.odd_fields else int(rng.integers(2))
    vertical = {}
    for f in model.fields:
        if rng.random() < 0.75:
            vertical[f.name] = random_function(rng, model, cfg, parity=(f.parity + parity) % 2,
                                               terms=int(rng.integers(1, 3)))
    vt = J.prolong({}, vertical, model=model)
    vt.parity = parity
    return vt


# cases ------------------------------------------------------------------------
@dataclass
class Case:
    """Inputs of one generated case, enough to rebuild it from DSL text."""
    model: ModelSpec
    lets: list = dc_field(default_factory=list)

    def add(self, kind, name, value):
        self.lets.append((kind, name, value))
        return value

    def document(self, title: str) -> str:
        lines = [f"# {title}", model_text(self.model)]
        for kind, name, value in self.lets:
            if kind == "derivation":
                lines.append(f"derivation {name} = {render_derivation(value)}".rstrip())
            elif kind == "lagrangian":
                lines.append(f"lagrangian {name} = {render(value.density)}")
            else:
                lines.append(f"let {name} = {render(value)}")
        return "\n".join(lines) + "\n"


def _p_d_squared(rng, cfg, case):
    phi = case.add("let", "phi", random_mixed_form(rng, case.model, cfg))
    return J.exterior_d(J.exterior_d(phi))


def _p_dh_squared(rng, cfg, case):
    phi = case.add("let", "phi", random_mixed_form(rng, case.model, cfg))
    return J.horizontal_d(J.horizontal_d(phi))


def _p_dv_squared(rng, cfg, case):
    phi = case.add("let", "phi", random_mixed_form(rng, case.model, cfg))
    return J.vertical_d(J.vertical_d(phi))


def _p_anticommute(rng, cfg, case):
    phi = case.add("let", "phi", random_mixed_form(rng, case.model, cfg))
    return J.horizontal_d(J.vertical_d(phi)) + J.vertical_d(J.horizontal_d(phi))


def _p_split(rng, cfg, case):
    phi = case.add("let", "phi", random_mixed_form(rng, case.model, cfg))
    return J.exterior_d(phi) - J.horizontal_d(phi) - J.vertical_d(phi)


def _p_total_commute(rng, cfg, case):
    f = case.add("let", "f", random_function(rng, case.model, cfg))
    n = case.model.n
    lam, mu = int(rng.integers(n)), int(rng.integers(n))
    return (J.total_derivative(J.total_derivative(f, lam), mu)
            - J.total_derivative(J.total_derivative(f, mu), lam))


def _p_wedge_swap(rng, cfg, case):
    model = case.model
    phi = case.add("let", "phi", random_form(rng, model, cfg, m=int(rng.integers(0, 2))))
    sigma = case.add("let", "sigma", random_form(rng, model, cfg, m=int(rng.integers(0, 2))))
    if not phi or not sigma:
        return GradedForm.zero(model)
    return wedge(phi, sigma) - wedge(sigma, phi).scale(swap_sign(phi, sigma))


def _p_rho_idempotent(rng, cfg, case):
    model = case.model
    phi = case.add("let", "phi", random_form(rng, model, cfg, k=int(rng.integers(1, 3)), m=model.n))
    r = V.rho(phi)
    return V.rho(r) - r


def _p_rho_dh(rng, cfg, case):
    model = case.model
    xi = case.add("let", "xi", random_form(rng, model, cfg, k=int(rng.integers(0, 3)), m=model.n - 1))
    return V.rho(J.horizontal_d(xi))


def _p_delta_dh(rng, cfg, case):
    model = case.model
    xi = case.add("let", "xi", random_form(rng, model, cfg, k=0, m=model.n - 1))
    return V.variational_delta(J.horizontal_d(xi))


def _p_el_exact(rng, cfg, case):
    model = case.model
    xi = case.add("let", "xi", random_form(rng, model, cfg, k=0, m=model.n - 1))
    dh = J.horizontal_d(xi)
    if not dh:
        return dh
    return V.euler_lagrange(V.Lagrangian.from_form(dh)).to_form()


def _p_el_delta(rng, cfg, case):
    L = case.add("lagrangian", "L", random_lagrangian(rng, case.model, cfg))
    return V.variational_delta(L.form()) - V.euler_lagrange(L).to_form()


def _p_el_parity(rng, cfg, case):
    L = case.add("lagrangian", "L", random_lagrangian(rng, case.model, cfg))
    bad = GradedForm.zero(case.model)
    if not L.density:
        return bad
    p = L.density.parity
    for f, e in V.euler_lagrange(L).components.items():
        for piece_parity in {par for _, _, par in e._gradings()}:
            if piece_parity != (p + f.parity) % 2:
                bad = bad + e
    return bad


def _p_lepagean(rng, cfg, case):
    L = case.add("lagrangian", "L", random_lagrangian(rng, case.model, cfg))
    return V.lepagean_residual(L)


def _p_g232_interior(rng, cfg, case):
    model = case.model
    vt = case.add("derivation", "v", random_vertical_derivation(rng, model, cfg))
    phi = case.add("let", "phi", random_form(rng, model, cfg, k=int(rng.integers(0, 2)),
                                             m=int(rng.integers(0, model.n))))
    return J.interior_product(vt, J.horizontal_d(phi)) + J.horizontal_d(J.interior_product(vt, phi))


def _p_g232_lie(rng, cfg, case):
    model = case.model
    vt = case.add("derivation", "v", random_vertical_derivation(rng, model, cfg))
    phi = case.add("let", "phi", random_form(rng, model, cfg, k=int(rng.integers(0, 2)),
                                             m=int(rng.integers(0, model.n))))
    return J.lie_derivative(vt, J.horizontal_d(phi)) - J.horizontal_d(J.lie_derivative(vt, phi))


def _p_first_variation(rng, cfg, case):
    model = case.model
    L = case.add("lagrangian", "L", random_lagrangian(rng, model, cfg))
    vt = case.add("derivation", "v", random_vertical_derivation(rng, model, cfg))
    return V.first_variational_check(L, vt).residual


def _p_round_trip(rng, cfg, case):
    phi = case.add("let", "phi", random_mixed_form(rng, case.model, cfg))
    return parse_expression(render(phi), case.model) - phi


PROPERTIES = (
    ("d_squared", _p_d_squared),
    ("dh_squared", _p_dh_squared),
    ("dv_squared", _p_dv_squared),
    ("dh_dv_anticommute", _p_anticommute),
    ("d_split", _p_split),
    ("total_derivatives_commute", _p_total_commute),
    ("wedge_swap", _p_wedge_swap),
    ("rho_idempotent", _p_rho_idempotent),
    ("rho_dh", _p_rho_dh),
    ("delta_dh", _p_delta_dh),
    ("el_exact", _p_el_exact),
    ("el_matches_delta", _p_el_delta),
    ("el_parity", _p_el_parity),
    ("lepagean_identity", _p_lepagean),
    ("interior_dh_anticommute", _p_g232_interior),
    ("lie_dh_commute", _p_g232_lie),
    ("first_variation", _p_first_variation),
    ("dsl_round_trip", _p_round_trip),
)
PROPERTY_NAMES = tuple(name for name, _ in PROPERTIES)


@dataclass
class PropertyResult:
    name: str
    passed: int = 0
    failed: int = 0
    counterexample: str | None = None
    residual: str | None = None

    @property
    def total(self):
        return self.passed + self.failed


@dataclass
class Report:
    config: SuiteConfig
    results: list
    elapsed: float = 0.0

    @property
    def ok(self) -> bool:
        return all(r.failed == 0 for r in self.results)

    def __getitem__(self, name) -> PropertyResult:
        for r in self.results:
            if r.name == name:
                return r
        raise KeyError(name)

    def failures(self):
        return [r for r in self.results if r.failed]

    # wall time is left out of both renderings so identical configs give
    # identical bytes
    def render(self) -> str:
        c = self.config
        lines = [f"property suite: seed={c.seed} cases={c.cases} max_dim={c.max_dim} "
                 f"max_fields={c.max_fields} max_order={c.max_order} "
                 f"max_terms={c.max_terms} max_coeff={c.max_coeff}"]
        width = max(len(r.name) for r in self.results)
        for r in self.results:
            status = "ok" if not r.failed else "FAIL"
            lines.append(f"  {r.name:<{width}}  {r.passed}/{r.total}  {status}")
        for r in self.failures():
            lines.append("")
            lines.append(f"counterexample for {r.name}:")
            lines.extend("  " + ln for ln in r.counterexample.rstrip("\n").split("\n"))
            lines.append(f"  residual: {r.residual}")
        lines.append("")
        lines.append("all properties passed" if self.ok else
                     f"{len(self.failures())} properties failed")
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        c = self.config
        doc = {
            "schema_version": SCHEMA_VERSION,
            "model": None,
            "value": {
                "kind": "suite_report",
                "config": {k: getattr(c, k) for k in (
                    "seed", "cases", "max_dim", "max_fields", "max_order",
                    "max_terms", "max_coeff")},
                "ok": self.ok,
                "properties": [
                    {"name": r.name, "passed": r.passed, "failed": r.failed,
                     "counterexample": r.counterexample, "residual": r.residual}
                    for r in self.results],
            },
        }
        return json.dumps(doc, indent=2, sort_keys=True)


def run_case(prop_index: int, case_index: int, cfg: SuiteConfig):
    """Evaluate one case; returns (residual_text or None, Case)."""
    name, fn = PROPERTIES[prop_index]
    rng = case_rng(cfg.seed, prop_index, case_index)
    case = Case(random_model(rng, cfg))
    try:
        residual = fn(rng, cfg, case)
    except GvbError as exc:
        return f"error: {type(exc).__name__}: {exc}", case
    return (None if residual.is_zero() else render(residual)), case


def property_suite(config: SuiteConfig, only=None) -> Report:
    start = time.perf_counter()
    wanted = set(only) if only else None
    if wanted:
        unknown = wanted - set(PROPERTY_NAMES)
        if unknown:
            raise ValueError(f"unknown properties: {', '.join(sorted(unknown))}")
    results = []
    for idx, (name, _) in enumerate(PROPERTIES):
        if wanted is not None and name not in wanted:
            continue
        res = PropertyResult(name)
        for case_index in range(config.cases):
            residual, case = run_case(idx, case_index, config)
            if residual is None:
                res.passed += 1
                continue
            res.failed += 1
            if res.counterexample is None:
                res.counterexample = case.document(
                    f"{name}: seed {config.seed}, case {case_index}")
                res.residual = residual
        results.append(res)
    return Report(config, results, time.perf_counter() - start)


__all__ = [
    "SuiteConfig", "Report", "PropertyResult", "property_suite", "run_case",
    "PROPERTIES", "PROPERTY_NAMES", "case_rng", "random_model", "random_function",
    "random_form", "random_lagrangian", "random_vertical_derivation", "EVEN", "ODD",
]
