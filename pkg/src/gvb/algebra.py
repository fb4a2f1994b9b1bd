"""Canonical graded functions and graded exterior forms.

Every value is a finite sum of terms ``q * m * g_1 ... g_r`` where ``q`` is
an exact rational, ``m`` a commutative monomial in base coordinates, even
jet variables and function applications, and ``g_i`` are graded
generators kept in the canonical order

    odd jet variables c^a_Λ  <  contact forms θ^A_Λ  <  horizontal dx^λ

(within each group by field declaration order, then |Λ|, then Λ).
Reordering adjacent generators a, b costs (-1)^(|a||b| + [a][b]).
"""
from __future__ import annotations

from fractions import Fraction
from typing import NamedTuple

from .model import (
    EVEN, ODD, BidegreeError, GvbError, JetVariable, ModelMismatch,
    ModelSpec, MultiIndex, ParityError,
)

# atom kinds (commutative, degree 0, parity 0)
A_COORD, A_JET, A_APPLY, A_ARG = 0, 1, 2, 3
# generator kinds, disjoint from the atom kinds so that atoms and generators never compare equal
G_ODD, G_THETA, G_DX = 10, 11, 12

ONE = Fraction(1)


class Atom(NamedTuple):
    kind: int
    payload: object


class Gen(NamedTuple):
    kind: int
    payload: object


def _grade(g):
    """(form degree, Grassmann parity) of a generator."""
    k = g.kind
    if k == G_DX:
        return 1, 0
    if k == G_THETA:
        return 1, g.payload.field.parity
    return 0, 1


def _swap_exponent(deg_b, par_b, deg_a, par_a):
    # exponent of the sign picked up when b moves left across a
    return deg_b * deg_a + par_b * par_a


def _merge(left, right):
    """Concatenate two sorted generator words and sort the result.

    Returns ``(sign_exponent, word)`` or ``None`` if the product vanishes.
    """
    if not right:
        return 0, left
    if not left:
        return 0, right
    rem_deg = rem_par = 0
    for a in left:
        d, p = _grade(a)
        rem_deg += d
        rem_par += p
    out = []
    sign = 0
    i = j = 0
    nl, nr = len(left), len(right)
    while i < nl and j < nr:
        a = left[i]
        b = right[j]
        if b < a:
            db, pb = _grade(b)
            sign += _swap_exponent(db, pb, rem_deg, rem_par)
            out.append(b)
            j += 1
        else:
            da, pa = _grade(a)
            if a == b and (da + pa) & 1:
                return None
            out.append(a)
            rem_deg -= da
            rem_par -= pa
            i += 1
    if i < nl:
        out.extend(left[i:])
    elif j < nr:
        out.extend(right[j:])
    return sign, tuple(out)


def _sort_word(word):
    """Sort an arbitrary generator sequence; ``(sign, word)`` or None."""
    result = (0, ())
    for g in word:
        merged = _merge(result[1], (g,))
        if merged is None:
            return None
        result = (result[0] + merged[0], merged[1])
    return result


def _mono_mul(m1, m2):
    if not m1:
        return m2
    if not m2:
        return m1
    powers = dict(m1)
    for a, p in m2:
        powers[a] = powers.get(a, 0) + p
    return tuple(sorted(powers.items()))


def _acc(out, key, c):
    v = out.get(key)
    v = c if v is None else v + c
    if v:
        out[key] = v
    else:
        out.pop(key, None)


def _is_function_terms(terms):
    for _, gens in terms:
        if gens and gens[-1].kind != G_ODD:
            return False
    return True


def _make(model, terms):
    if _is_function_terms(terms):
        return GradedFunction(model, terms)
    return GradedForm(model, terms)


def _term_grade(gens):
    k = m = par = 0
    for g in gens:
        if g.kind == G_DX:
            m += 1
        elif g.kind == G_THETA:
            k += 1
            par += g.payload.field.parity
        else:
            par += 1
    return k, m, par & 1


def _check_model(a, b):
    if a.model is not b.model and a.model != b.model:
        raise ModelMismatch("operands belong to different models")


class GradedForm:
    """Element of the bigraded algebra in canonical form.

    ``terms`` maps ``(monomial, word)`` to a nonzero :class:`Fraction`.
    Instances are immutable; arithmetic returns new values.  ``*`` is the
    graded exterior product.
    """
    __slots__ = ("model", "terms", "_hash")

    def __init__(self, model: ModelSpec, terms: dict):
        self.model = model
        self.terms = terms
        self._hash = None

    # construction ------------------------------------------------------
    @classmethod
    def constant(cls, model, value):
        value = Fraction(value)
        return GradedFunction(model, {((), ()): value} if value else {})

    @classmethod
    def zero(cls, model):
        return GradedFunction(model, {})

    def _coerce(self, other):
        if isinstance(other, GradedForm):
            _check_model(self, other)
            return other
        if isinstance(other, (int, Fraction)):
            return GradedForm.constant(self.model, other)
        return NotImplemented

    # arithmetic --------------------------------------------------------
    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self.terms)
        for k, c in other.terms.items():
            _acc(out, k, c)
        return _make(self.model, out)

    __radd__ = __add__

    def __neg__(self):
        return _make(self.model, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, q):
        q = Fraction(q)
        if not q:
            return GradedForm.zero(self.model)
        return _make(self.model, {k: c * q for k, c in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if not isinstance(other, GradedForm):
            return NotImplemented
        return wedge(self, other)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, GradedForm):
            if other.is_zero() or set(other.terms) != {((), ())}:
                raise GvbError("division only by nonzero rational constants")
            other = other.terms[((), ())]
        if not isinstance(other, (int, Fraction)) or not other:
            raise GvbError("division only by nonzero rational constants")
        return self.scale(ONE / Fraction(other))

    def __pow__(self, k):
        if not isinstance(k, int) or k < 0:
            raise GvbError("only non-negative integer powers are supported")
        if self.terms and (self.degree != 0 or self.parity != 0):
            raise ParityError("powers need an even function (degree 0, parity 0)")
        result = GradedForm.constant(self.model, 1)
        for _ in range(k):
            result = result * self
        return result

    # comparison ----------------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = GradedForm.constant(self.model, other)
        if not isinstance(other, GradedForm):
            return NotImplemented
        return self.model == other.model and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    # inspection ----------------------------------------------------------
    def sorted_terms(self):
        """Terms in display order: by generator word, then monomial."""
        return sorted(self.terms.items(), key=lambda kv: (kv[0][1], kv[0][0]))

    def canonical_key(self):
        return tuple(sorted(self.terms.items()))

    def _gradings(self):
        return {_term_grade(gens) for _, gens in self.terms}

    @property
    def degree(self) -> int:
        degs = {k + m for k, m, _ in self._gradings()}
        if len(degs) > 1:
            raise ParityError("form is not homogeneous in degree")
        return degs.pop() if degs else 0

    @property
    def parity(self) -> int:
        pars = {p for _, _, p in self._gradings()}
        if len(pars) > 1:
            raise ParityError("form is not homogeneous in parity")
        return pars.pop() if pars else 0

    def is_homogeneous(self) -> bool:
        g = {(k + m, p) for k, m, p in self._gradings()}
        return len(g) <= 1

    def bidegrees(self):
        return sorted({(k, m) for k, m, _ in self._gradings()})

    def pieces(self):
        """Map (k, m) -> bidegree-(k, m) component."""
        out = {}
        for key, c in self.terms.items():
            k, m, _ = _term_grade(key[1])
            out.setdefault((k, m), {})[key] = c
        return {bd: _make(self.model, t) for bd, t in sorted(out.items())}

    def project(self, k=None, m=None):
        """h_k and/or h^m."""
        out = {}
        for key, c in self.terms.items():
            kk, mm, _ = _term_grade(key[1])
            if (k is None or kk == k) and (m is None or mm == m):
                out[key] = c
        return _make(self.model, out)

    def grading(self):
        return grading(self)

    def jet_variables(self):
        """All jet variables occurring anywhere (inside function arguments too)."""
        found = set()
        _collect_jets(self.terms, found)
        return sorted(found)

    def theta_variables(self):
        return sorted({g.payload for _, gens in self.terms for g in gens
                       if g.kind == G_THETA})

    def max_order(self) -> int:
        jets = self.jet_variables() + self.theta_variables()
        return max((len(j.multi_index) for j in jets), default=0)

    def __repr__(self):
        from .lang import render
        return f"<{type(self).__name__} {render(self)}>"

    def __str__(self):
        from .lang import render
        return render(self)


class GradedFunction(GradedForm):
    """Degree-0 element: a polynomial in odd jet variables over even coefficients."""
    __slots__ = ()

    def odd_terms(self):
        """List of (commutative coefficient, odd monomial) in canonical order."""
        grouped = {}
        for (mono, gens), c in self.terms.items():
            grouped.setdefault(gens, {})[(mono, ())] = c
        return [(GradedFunction(self.model, grouped[g]),
                 tuple(x.payload for x in g)) for g in sorted(grouped)]


def _collect_jets(terms, found):
    for (mono, gens), _ in (terms.items() if isinstance(terms, dict) else terms):
        for a, _p in mono:
            if a.kind == A_JET:
                found.add(a.payload)
            elif a.kind == A_APPLY:
                _collect_jets(a.payload[1], found)
        for g in gens:
            if g.kind == G_ODD:
                found.add(g.payload)


# builders ----------------------------------------------------------------
def coordinate(model, lam):
    if not 0 <= lam < model.n:
        raise GvbError(f"index {lam} out of range for dim {model.n}")
    return GradedFunction(model, {(((Atom(A_COORD, lam), 1),), ()): ONE})


def jet(model, jv: JetVariable):
    if jv.field.parity == EVEN:
        return GradedFunction(model, {(((Atom(A_JET, jv), 1),), ()): ONE})
    return GradedFunction(model, {((), (Gen(G_ODD, jv),)): ONE})


def dx(model, lam):
    if not 0 <= lam < model.n:
        raise GvbError(f"index {lam} out of range for dim {model.n}")
    return GradedForm(model, {((), (Gen(G_DX, lam),)): ONE})


def theta(model, jv: JetVariable):
    return GradedForm(model, {((), (Gen(G_THETA, jv),)): ONE})


def omega(model):
    """Volume form dx0 ∧ ... ∧ dx(n-1)."""
    return GradedForm(model, {((), tuple(Gen(G_DX, i) for i in range(model.n))): ONE})


def bound_argument(model):
    return GradedFunction(model, {(((Atom(A_ARG, 0), 1),), ()): ONE})


def apply_function(model, name, arg):
    if not model.has_function(name):
        raise GvbError(f"unknown function symbol {name!r}")
    if isinstance(arg, (int, Fraction)):
        arg = GradedForm.constant(model, arg)
    for _, gens in arg.terms:
        if gens:
            raise ParityError(
                f"argument of {name} must be an even function free of odd variables")
    payload = (name, tuple(sorted(arg.terms.items())))
    return GradedFunction(model, {(((Atom(A_APPLY, payload), 1),), ()): ONE})


def _atom_form(model, atom, power=1):
    return GradedFunction(model, {(((atom, power),), ()): ONE})


def substitute_argument(model, terms, value):
    """Replace the bound variable ``_`` by ``value`` in canonical terms."""
    result = GradedForm.zero(model)
    for (mono, _gens), c in terms:
        t = GradedForm.constant(model, c)
        for atom, p in mono:
            if atom.kind == A_ARG:
                f = value
            elif atom.kind == A_APPLY:
                name, inner = atom.payload
                f = apply_function(model, name, substitute_argument(model, inner, value))
            else:
                f = _atom_form(model, atom)
            t = t * f ** p
        result = result + t
    return result


def function_derivative(model, name, arg):
    """f'(arg) via the model's registered derivative rule."""
    return substitute_argument(model, model.derivative_rule(name), arg)


# products ------------------------------------------------------------------
def wedge(phi: GradedForm, sigma: GradedForm) -> GradedForm:
    """Graded exterior product φ ∧ σ."""
    _check_model(phi, sigma)
    out = {}
    for (m1, g1), c1 in phi.terms.items():
        for (m2, g2), c2 in sigma.terms.items():
            merged = _merge(g1, g2)
            if merged is None:
                continue
            s, word = merged
            c = c1 * c2
            _acc(out, (_mono_mul(m1, m2), word), -c if s & 1 else c)
    return _make(phi.model, out)


def swap_sign(phi: GradedForm, sigma: GradedForm) -> int:
    """(-1)^(|φ||σ| + [φ][σ]) for homogeneous operands."""
    e = phi.degree * sigma.degree + phi.parity * sigma.parity
    return -1 if e & 1 else 1


def grading(phi: GradedForm):
    """(form degree, parity, (k, m)) for each homogeneous piece of φ."""
    return sorted((k + m, p, (k, m)) for k, m, p in phi._gradings())


# derivations ------------------------------------------------------------------
def apply_derivation(form: GradedForm, image, degree: int, parity: int) -> GradedForm:
    """Extend a graded derivation from generators to a whole form.

    ``image(x)`` gives the value (a form, or None for zero) on an atom or a
    generator ``x``; function applications are handled by the chain rule.
    The derivation has the given form degree and parity and obeys
    D(a b) = D(a) b + (-1)^(deg|a| + par[a]) a D(b).
    """
    model = form.model
    cache = {}

    def img(x):
        try:
            return cache[x]
        except KeyError:
            pass
        if isinstance(x, Atom) and x.kind == A_APPLY:
            name, inner = x.payload
            arg = GradedFunction(model, dict(inner))
            d_arg = apply_derivation(arg, image, degree, parity)
            r = function_derivative(model, name, arg) * d_arg if d_arg else None
        elif isinstance(x, Atom) and x.kind == A_ARG:
            r = None
        else:
            r = image(x)
        if r is not None and not r.terms:
            r = None
        cache[x] = r
        return r

    out = {}
    for (mono, gens), c in form.terms.items():
        for idx, (atom, p) in enumerate(mono):
            r = img(atom)
            if r is None:
                continue
            if p > 1:
                rest = mono[:idx] + ((atom, p - 1),) + mono[idx + 1:]
            else:
                rest = mono[:idx] + mono[idx + 1:]
            cp = c * p
            for (m2, g2), c2 in r.terms.items():
                merged = _merge(g2, gens)
                if merged is None:
                    continue
                s, word = merged
                v = cp * c2
                _acc(out, (_mono_mul(rest, m2), word), -v if s & 1 else v)
        dsum = psum = 0
        for j, g in enumerate(gens):
            r = img(g)
            if r is not None:
                s0 = degree * dsum + parity * psum
                prefix, suffix = gens[:j], gens[j + 1:]
                for (m2, g2), c2 in r.terms.items():
                    first = _merge(prefix, g2)
                    if first is None:
                        continue
                    second = _merge(first[1], suffix)
                    if second is None:
                        continue
                    s = s0 + first[0] + second[0]
                    v = c * c2
                    _acc(out, (_mono_mul(mono, m2), second[1]), -v if s & 1 else v)
            d, q = _grade(g)
            dsum += d
            psum += q
    return _make(model, out)


def left_jet_partial(f: GradedForm, field, multi_index=()) -> GradedForm:
    """Left partial derivative ∂^Λ_A with respect to the coordinate s^A_Λ."""
    model = f.model
    jv = JetVariable(model.field(field), MultiIndex(multi_index))
    one = GradedForm.constant(model, 1)
    if jv.field.parity == EVEN:
        target = Atom(A_JET, jv)
    else:
        target = Gen(G_ODD, jv)

    def image(x):
        return one if x == target else None

    return apply_derivation(f, image, 0, jv.field.parity)


def base_partial(f: GradedForm, lam: int) -> GradedForm:
    """Derivative in the explicit x^λ dependence; jet variables held fixed."""
    model = f.model
    if not 0 <= lam < model.n:
        raise GvbError(f"index {lam} out of range for dim {model.n}")
    target = Atom(A_COORD, lam)
    one = GradedForm.constant(model, 1)
    return apply_derivation(f, lambda x: one if x == target else None, 0, 0)


# raw expression trees ---------------------------------------------------------
def normalize(expr, model: ModelSpec) -> GradedForm:
    """Canonical form of a raw expression tree.

    Leaves are ints, Fractions, GradedForms or tuples ``('num', q)``,
    ``('x', λ)``, ``('jet', name, indices)``, ``('dx', λ)``,
    ``('theta', name, indices)``, ``('omega',)``, ``('arg',)``; inner nodes are
    ``('+', a, b)``, ``('-', a, b)``, ``('neg', a)``, ``('*', a, b)``,
    ``('/', a, b)``, ``('^', a, k)`` and ``('apply', name, a)``.
    """
    try:
        return _normalize(expr, model)
    except GvbError as exc:
        if getattr(exc, "node", None) is None:
            exc.node = expr
        raise


def _normalize(e, model):
    if isinstance(e, GradedForm):
        if e.model is not model and e.model != model:
            raise ModelMismatch("expression belongs to a different model")
        return e
    if isinstance(e, (int, Fraction)):
        return GradedForm.constant(model, e)
    try:
        op = e[0]
        return _OPS[op](e, model)
    except GvbError as exc:
        if getattr(exc, "node", None) is None:
            exc.node = e
        raise
    except (KeyError, IndexError, TypeError):
        raise GvbError(f"malformed expression node {e!r}") from None


def _binary(fn):
    return lambda e, m: fn(_normalize(e[1], m), _normalize(e[2], m))


def _node_pow(e, m):
    base = _normalize(e[1], m)
    k = e[2]
    if base.terms and not base.is_homogeneous():
        raise ParityError("powers need a homogeneous even function")
    if base.terms and (base.degree or base.parity):
        raise ParityError("only even functions (degree 0, parity 0) can be raised to a power")
    return base ** k


def _node_apply(e, m):
    arg = _normalize(e[2], m)
    return apply_function(m, e[1], arg)


_OPS = {
    "num": lambda e, m: GradedForm.constant(m, e[1]),
    "x": lambda e, m: coordinate(m, e[1]),
    "jet": lambda e, m: jet(m, m.jet_variable(e[1], tuple(e[2]))),
    "dx": lambda e, m: dx(m, e[1]),
    "theta": lambda e, m: theta(m, m.jet_variable(e[1], tuple(e[2]))),
    "omega": lambda e, m: omega(m),
    "arg": lambda e, m: bound_argument(m),
    "+": _binary(lambda a, b: a + b),
    "-": _binary(lambda a, b: a - b),
    "*": _binary(lambda a, b: a * b),
    "/": _binary(lambda a, b: a / b),
    "neg": lambda e, m: -_normalize(e[1], m),
    "^": _node_pow,
    "apply": _node_apply,
}


def bidegree_of(phi: GradedForm):
    """The single bidegree of φ, or raise if it has several."""
    bds = phi.bidegrees()
    if len(bds) > 1:
        raise BidegreeError(f"form has several bidegrees {bds}")
    return bds[0] if bds else None


__all__ = [
    "Atom", "Gen", "GradedForm", "GradedFunction", "wedge", "swap_sign",
    "grading", "apply_derivation", "left_jet_partial", "base_partial",
    "normalize", "coordinate", "jet", "dx", "theta", "omega",
    "apply_function", "function_derivative", "bidegree_of", "ODD", "EVEN",
]
