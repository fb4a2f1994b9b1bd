"""The ``.gvb`` model/expression language.

Example document::

    dim 1
    even y
    odd c
    let phi = theta(y) * omega
    lagrangian L = 1/2 * y[0]^2 + y * c * c[0]
    derivation v = vert: y -> 1, c -> c[0]

Statements are separated by newlines or ``;`` and ``#`` starts a comment.
In expressions ``*`` is the graded product (the wedge product as soon as a
factor has positive form degree); ``y[0 1]`` is the jet variable y_{01}.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field as dc_field
from fractions import Fraction

from .algebra import (
    A_APPLY, A_ARG, A_COORD, A_JET, G_DX, G_ODD, G_THETA, GradedForm,
    normalize,
)
from .model import (
    DEFAULT_FUNCTIONS, EVEN, ODD, RESERVED, GvbError, ModelSpec, OrderCapExceeded,
    jet_text,
)

SCHEMA_VERSION = "gvb-machine/1"

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>\#[^\n]*)
  | (?P<sep>[\n;])
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<arrow>->)
  | (?P<op>[-+*/^()\[\],:=])
""", re.X)

_COORD = re.compile(r"^x(\d+)$")
_DX = re.compile(r"^dx(\d+)$")


@dataclass(frozen=True)
class Diagnostic:
    line: int
    column: int
    message: str
    kind: str = "error"

    def __str__(self):
        return f"{self.line}:{self.column}: {self.message}"


class DslError(GvbError):
    """Parse or elaboration failure; carries positioned diagnostics."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(map(str, self.diagnostics)))


@dataclass(frozen=True)
class Token:
    kind: str
    value: str
    line: int
    col: int
    start: int
    end: int


def tokenize(text: str):
    tokens = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise DslError([Diagnostic(line, pos - line_start + 1,
                                       f"unexpected character {text[pos]!r}")])
        kind = m.lastgroup
        if kind not in ("ws", "comment"):
            tokens.append(Token(kind, m.group(), line, pos - line_start + 1, pos, m.end()))
        if kind == "sep" and m.group() == "\n":
            line += 1
            line_start = m.end()
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1, pos, pos))
    return tokens


class Node(tuple):
    """Syntax tree node: a tuple ``(op, *args)`` with a source position."""

    def __new__(cls, items, pos):
        self = tuple.__new__(cls, items)
        self.pos = pos
        return self


class _ParseFailure(Exception):
    def __init__(self, token, message):
        self.diagnostic = Diagnostic(token.line, token.col, message)


def _describe(tok):
    return "end of input" if tok.kind == "eof" else (
        "end of statement" if tok.kind == "sep" else repr(tok.value))


class Parser:
    def __init__(self, text):
        self.text = text
        self.tokens = tokenize(text)
        self.i = 0

    @property
    def tok(self):
        return self.tokens[self.i]

    def advance(self):
        t = self.tokens[self.i]
        self.i += 1
        return t

    def at(self, kind, value=None):
        t = self.tok
        return t.kind == kind and (value is None or t.value == value)

    def expect(self, kind, value=None, what=None):
        if not self.at(kind, value):
            want = what or (repr(value) if value else kind)
            raise _ParseFailure(self.tok, f"expected {want}, found {_describe(self.tok)}")
        return self.advance()

    # expressions ---------------------------------------------------------
    def expression(self):
        node = self.term()
        while self.at("op", "+") or self.at("op", "-"):
            t = self.advance()
            node = Node((t.value, node, self.term()), (t.line, t.col))
        return node

    def term(self):
        node = self.unary()
        while self.at("op", "*") or self.at("op", "/"):
            t = self.advance()
            node = Node((t.value, node, self.unary()), (t.line, t.col))
        return node

    def unary(self):
        if self.at("op", "-"):
            t = self.advance()
            return Node(("neg", self.unary()), (t.line, t.col))
        return self.power()

    def power(self):
        node = self.primary()
        if self.at("op", "^"):
            t = self.advance()
            k = self.expect("int", what="a non-negative integer exponent")
            node = Node(("^", node, int(k.value)), (t.line, t.col))
        return node

    def indices(self):
        self.expect("op", "[")
        out = []
        while self.at("int"):
            out.append(int(self.advance().value))
        self.expect("op", "]", what="index or ']'")
        return out

    def primary(self):
        t = self.tok
        pos = (t.line, t.col)
        if t.kind == "int":
            self.advance()
            return Node(("num", Fraction(int(t.value))), pos)
        if self.at("op", "("):
            self.advance()
            node = self.expression()
            self.expect("op", ")")
            return node
        if t.kind == "ident":
            self.advance()
            if t.value == "theta":
                self.expect("op", "(")
                name = self.expect("ident", what="field name").value
                idx = self.indices() if self.at("op", "[") else []
                self.expect("op", ")")
                return Node(("theta", name, idx), pos)
            if self.at("op", "("):
                self.advance()
                arg = self.expression()
                self.expect("op", ")")
                return Node(("call", t.value, arg), pos)
            if self.at("op", "["):
                return Node(("index", t.value, self.indices()), pos)
            return Node(("ident", t.value), pos)
        raise _ParseFailure(t, f"expected an expression, found {_describe(t)}")

    # statements ------------------------------------------------------------
    def statements(self):
        """Parse the whole document; returns (statements, diagnostics)."""
        out, diags = [], []
        while True:
            while self.at("sep"):
                self.advance()
            if self.at("eof"):
                return out, diags
            try:
                out.append(self.statement())
                if not (self.at("sep") or self.at("eof")):
                    raise _ParseFailure(self.tok, f"expected end of statement, "
                                                  f"found {_describe(self.tok)}")
            except _ParseFailure as exc:
                diags.append(exc.diagnostic)
                while not (self.at("sep") or self.at("eof")):
                    self.advance()

    def statement(self):
        t = self.expect("ident", what="a statement keyword")
        pos = (t.line, t.col)
        kw = t.value
        if kw == "dim":
            return ("dim", int(self.expect("int").value), pos)
        if kw in ("even", "odd"):
            names = [self.expect("ident", what="field name")]
            while self.at("ident"):
                names.append(self.advance())
            return (kw, [(n.value, (n.line, n.col)) for n in names], pos)
        if kw == "function":
            name = self.expect("ident", what="function name").value
            self.expect("ident", "deriv")
            return ("function", (name, self.expression()), pos)
        if kw in ("let", "lagrangian"):
            name = self.expect("ident", what="name").value
            self.expect("op", "=")
            return (kw, (name, self.expression()), pos)
        if kw == "derivation":
            name = self.expect("ident", what="name").value
            self.expect("op", "=")
            horiz, vert = [], []
            if self.at("ident", "horiz"):
                self.advance()
                self.expect("op", ":")
                horiz = self._entries("int")
            if self.at("ident", "vert"):
                self.advance()
                self.expect("op", ":")
                vert = self._entries("ident")
            return ("derivation", (name, horiz, vert), pos)
        raise _ParseFailure(t, f"unknown statement {kw!r}; expected one of "
                               "dim, even, odd, function, let, lagrangian, derivation")

    def _entries(self, key_kind):
        out = []
        while True:
            k = self.expect(key_kind, what="index" if key_kind == "int" else "field name")
            self.expect("arrow", what="'->'")
            out.append((k.value, self.expression(), (k.line, k.col)))
            if not self.at("op", ","):
                return out
            self.advance()


# elaboration -----------------------------------------------------------------
class _Env:
    def __init__(self, model, values=None, bound=None):
        self.model = model
        self.values = values or {}
        self.bound = bound


def _resolve(node, env):
    """Syntax tree -> raw tree accepted by :func:`normalize`."""
    op = node[0]
    model = env.model
    if op == "num":
        return node
    if op == "ident":
        name = node[1]
        if env.bound is not None and name == env.bound:
            return Node(("arg",), node.pos)
        if name in env.values:
            return env.values[name]
        m = _COORD.match(name)
        if m:
            return Node(("x", int(m.group(1))), node.pos)
        m = _DX.match(name)
        if m:
            return Node(("dx", int(m.group(1))), node.pos)
        if name == "omega":
            return Node(("omega",), node.pos)
        if name in model._by_name and env.bound is None:
            return Node(("jet", name, ()), node.pos)
        raise _Elab(node, f"unknown identifier {name!r}")
    if op == "index":
        if node[1] not in model._by_name or env.bound is not None:
            raise _Elab(node, f"unknown field {node[1]!r}")
        return Node(("jet", node[1], tuple(node[2])), node.pos)
    if op == "theta":
        if node[1] not in model._by_name or env.bound is not None:
            raise _Elab(node, f"unknown field {node[1]!r}")
        return Node(("theta", node[1], tuple(node[2])), node.pos)
    if op == "call":
        if not model.has_function(node[1]):
            raise _Elab(node, f"unknown function symbol {node[1]!r}")
        return Node(("apply", node[1], _resolve(node[2], env)), node.pos)
    if op == "^":
        return Node(("^", _resolve(node[1], env), node[2]), node.pos)
    if op == "neg":
        return Node(("neg", _resolve(node[1], env)), node.pos)
    return Node((op, _resolve(node[1], env), _resolve(node[2], env)), node.pos)


class _Elab(Exception):
    def __init__(self, node, message, kind="error"):
        pos = getattr(node, "pos", (0, 0))
        self.diagnostic = Diagnostic(pos[0], pos[1], message, kind)


def _elaborate(node, env) -> GradedForm:
    raw = _resolve(node, env)
    try:
        return normalize(raw, env.model)
    except GvbError as exc:
        bad = getattr(exc, "node", None)
        pos = getattr(bad, "pos", None) or getattr(node, "pos", (0, 0))
        kind = "order_cap" if isinstance(exc, OrderCapExceeded) else "error"
        raise _Elab(Node((), pos), str(exc), kind) from None


def _free_identifiers(node, model, out):
    op = node[0]
    if op == "ident":
        name = node[1]
        if not (_COORD.match(name) or _DX.match(name) or name == "omega"):
            out.append(name)
    elif op in ("call", "neg", "^"):
        _free_identifiers(node[2] if op == "call" else node[1], model, out)
    elif op in ("+", "-", "*", "/"):
        _free_identifiers(node[1], model, out)
        _free_identifiers(node[2], model, out)
    elif op in ("index", "theta"):
        out.append(node[1])


def compile_rules(model: ModelSpec) -> dict:
    """Parse every derivative rule of ``model`` into canonical terms."""
    rules = {}
    for name, text in model.functions:
        try:
            p = Parser(text)
            node = p.expression()
            if not p.at("eof"):
                raise _ParseFailure(p.tok, f"unexpected {_describe(p.tok)}")
            value = _elaborate(node, _Env(model, bound="_"))
        except (_ParseFailure, _Elab) as exc:
            raise DslError([exc.diagnostic]) from None
        except DslError:
            raise
        if any(gens for _, gens in value.terms):
            raise DslError([Diagnostic(0, 0, f"derivative rule of {name} must be an even function")])
        rules[name] = tuple(sorted(value.terms.items()))
    return rules


@dataclass
class SourceDocument:
    model: ModelSpec
    expressions: dict = dc_field(default_factory=dict)
    lagrangians: dict = dc_field(default_factory=dict)
    derivations: dict = dc_field(default_factory=dict)
    diagnostics: list = dc_field(default_factory=list)

    def get(self, name):
        for table in (self.lagrangians, self.derivations, self.expressions):
            if name in table:
                return table[name]
        raise KeyError(name)


def parse_model(text: str, order_cap: int = 10) -> SourceDocument:
    """Parse and elaborate a ``.gvb`` document.

    Raises :class:`DslError` listing every diagnostic when anything fails.
    """
    parser = Parser(text)
    stmts, diags = parser.statements()
    dim = None
    fields, functions = [], []
    names = {}

    def claim(name, pos):
        if name in names or name in RESERVED or _COORD.match(name) or _DX.match(name):
            what = "duplicate name" if name in names else "reserved name"
            diags.append(Diagnostic(pos[0], pos[1], f"{what} {name!r}"))
            return False
        names[name] = pos
        return True

    for name, _ in DEFAULT_FUNCTIONS:
        names[name] = (0, 0)
    for kind, payload, pos in stmts:
        if kind == "dim":
            if dim is not None:
                diags.append(Diagnostic(*pos, "dimension declared twice"))
            elif payload < 1:
                diags.append(Diagnostic(*pos, "dimension must be >= 1"))
            else:
                dim = payload
        elif kind in ("even", "odd"):
            for name, npos in payload:
                if claim(name, npos):
                    fields.append((name, EVEN if kind == "even" else ODD))
        elif kind == "function":
            if claim(payload[0], pos):
                functions.append((payload[0], payload[1], pos))
    if dim is None:
        if not any("dimension" in d.message for d in diags):
            diags.append(Diagnostic(1, 1, "missing 'dim' statement"))
        raise DslError(_sorted(diags))

    # rules may refer to each other: check them against a provisional registry
    provisional = ModelSpec(dim, tuple(fields),
                            DEFAULT_FUNCTIONS + tuple((n, "0") for n, _, _ in functions),
                            order_cap)
    rule_texts = []
    for name, node, pos in functions:
        free = []
        _free_identifiers(node, provisional, free)
        free = sorted(set(free))
        if len(free) > 1:
            diags.append(Diagnostic(*pos, f"derivative rule of {name} must use one "
                                          f"variable, found {', '.join(free)}"))
            rule_texts.append((name, "0"))
            continue
        bound = free[0] if free else "_"
        try:
            value = _elaborate(node, _Env(provisional, bound=bound))
            if any(gens for _, gens in value.terms):
                raise _Elab(node, f"derivative rule of {name} must be an even function")
        except _Elab as exc:
            diags.append(exc.diagnostic)
            rule_texts.append((name, "0"))
            continue
        # stored in canonical form, written in the bound variable "_"
        rule_texts.append((name, render(value)))
    model = ModelSpec(dim, tuple(fields), DEFAULT_FUNCTIONS + tuple(rule_texts), order_cap)

    doc = SourceDocument(model)
    env = _Env(model, values={})
    for kind, payload, pos in stmts:
        try:
            if kind in ("let", "lagrangian"):
                name, node = payload
                if not claim(name, pos):
                    continue
                value = _elaborate(node, env)
                if kind == "lagrangian":
                    from .variational import Lagrangian
                    if value.terms and (not value.is_homogeneous() or value.degree != 0):
                        raise _Elab(node, f"Lagrangian density {name} must have form degree 0")
                    lag = Lagrangian(value)
                    doc.lagrangians[name] = lag
                    value = lag.form()
                doc.expressions[name] = value
                env.values[name] = value
            elif kind == "derivation":
                name, horiz, vert = payload
                if not claim(name, pos):
                    continue
                doc.derivations[name] = _elaborate_derivation(model, env, horiz, vert)
        except _Elab as exc:
            diags.append(exc.diagnostic)
    if diags:
        raise DslError(_sorted(diags))
    return doc


def _sorted(diags):
    return sorted(diags, key=lambda d: (d.line, d.column))


def _elaborate_derivation(model, env, horiz, vert):
    from .jet import prolong
    h, v = {}, {}
    for key, node, pos in horiz:
        lam = int(key)
        if lam >= model.n:
            raise _Elab(Node((), pos), f"index {lam} out of range for dim {model.n}")
        if lam in h:
            raise _Elab(Node((), pos), f"duplicate horizontal index {lam}")
        h[lam] = _elaborate(node, env)
    for key, node, pos in vert:
        if key not in model._by_name:
            raise _Elab(Node((), pos), f"unknown field {key!r}")
        if key in v:
            raise _Elab(Node((), pos), f"duplicate vertical entry {key}")
        v[key] = _elaborate(node, env)
    try:
        return prolong(h, v, model=model)
    except GvbError as exc:
        first = (horiz or vert or [(None, None, (0, 0))])[0][2]
        raise _Elab(Node((), first), str(exc)) from None


def parse_expression(text: str, model: ModelSpec, env: dict | None = None) -> GradedForm:
    """Parse one expression against ``model``; ``env`` maps names to forms."""
    try:
        p = Parser(text)
        node = p.expression()
        if not p.at("eof"):
            raise _ParseFailure(p.tok, f"expected end of expression, found {_describe(p.tok)}")
        return _elaborate(node, _Env(model, values=dict(env or {})))
    except (_ParseFailure, _Elab) as exc:
        raise DslError([exc.diagnostic]) from None


# rendering --------------------------------------------------------------------
def _num(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _atom_text(atom):
    k = atom.kind
    if k == A_COORD:
        return f"x{atom.payload}"
    if k == A_JET:
        return jet_text(atom.payload)
    if k == A_APPLY:
        name, inner = atom.payload
        return f"{name}({_terms_text(sorted(inner, key=_display_key))})"
    return "_"


def _gen_text(g):
    if g.kind == G_DX:
        return f"dx{g.payload}"
    if g.kind == G_THETA:
        return f"theta({jet_text(g.payload)})"
    return jet_text(g.payload)


def _display_key(item):
    (mono, gens), _ = item
    return (gens, mono)


def _terms_text(items):
    if not items:
        return "0"
    parts = []
    for (mono, gens), c in items:
        factors = [_atom_text(a) + (f"^{p}" if p > 1 else "") for a, p in mono]
        factors += [_gen_text(g) for g in gens]
        if not factors:
            parts.append(_num(c))
        elif c == 1:
            parts.append(" * ".join(factors))
        else:
            parts.append(" * ".join([_num(c)] + factors))
    return " + ".join(parts)


def rule_text(terms) -> str:
    """Canonical text of compiled derivative-rule terms."""
    return _terms_text(sorted(terms, key=_display_key))


def render(value, fmt: str = "text") -> str:
    """Text (the expression grammar, round-trippable) or machine (JSON) output."""
    if fmt == "machine":
        return json.dumps(machine_document(value), indent=2, sort_keys=True)
    if fmt != "text":
        raise ValueError(f"unknown format {fmt!r}")
    if isinstance(value, GradedForm):
        return _terms_text(value.sorted_terms())
    if hasattr(value, "to_form"):
        return render(value.to_form())
    from .jet import ContactDerivation
    if isinstance(value, ContactDerivation):
        return render_derivation(value)
    raise TypeError(f"cannot render {type(value).__name__}")


def render_derivation(vt) -> str:
    parts = []
    h = [(lam, c) for lam, c in sorted(vt.horizontal.items()) if c]
    v = [(f, c) for f, c in sorted(vt.vertical.items()) if c]
    if h:
        parts.append("horiz: " + ", ".join(f"{lam} -> {render(c)}" for lam, c in h))
    if v:
        parts.append("vert: " + ", ".join(f"{f.name} -> {render(c)}" for f, c in v))
    return " ".join(parts)


def model_text(model: ModelSpec) -> str:
    lines = [f"dim {model.n}"]
    if model.even_fields:
        lines.append("even " + " ".join(f.name for f in model.even_fields))
    if model.odd_fields:
        lines.append("odd " + " ".join(f.name for f in model.odd_fields))
    for name, rule in model.functions:
        if (name, rule) not in DEFAULT_FUNCTIONS:
            lines.append(f"function {name} deriv {rule}")
    return "\n".join(lines)


def _terms_machine(items):
    out = []
    for (mono, gens), c in items:
        k = sum(1 for g in gens if g.kind == G_THETA)
        m = sum(1 for g in gens if g.kind == G_DX)
        par = (sum(1 for g in gens if g.kind == G_ODD)
               + sum(g.payload.field.parity for g in gens if g.kind == G_THETA)) % 2
        out.append({
            "coefficient": _num(c),
            "monomial": [dict(_atom_machine(a), power=p) for a, p in mono],
            "word": [_gen_machine(g) for g in gens],
            "degree": k + m,
            "parity": par,
            "bidegree": [k, m],
        })
    return out


def _atom_machine(a):
    if a.kind == A_COORD:
        return {"atom": "x", "index": a.payload}
    if a.kind == A_JET:
        return {"atom": "jet", "field": a.payload.field.name,
                "multi_index": list(a.payload.multi_index)}
    if a.kind == A_APPLY:
        name, inner = a.payload
        return {"atom": "apply", "function": name,
                "arg": {"terms": _terms_machine(sorted(inner, key=_display_key))}}
    assert a.kind == A_ARG
    return {"atom": "arg"}


def _gen_machine(g):
    if g.kind == G_DX:
        return {"gen": "dx", "index": g.payload}
    return {"gen": "theta" if g.kind == G_THETA else "odd",
            "field": g.payload.field.name, "multi_index": list(g.payload.multi_index)}


def form_machine(phi: GradedForm) -> dict:
    return {"kind": "form", "text": render(phi), "terms": _terms_machine(phi.sorted_terms())}


def model_machine(model: ModelSpec) -> dict:
    return {
        "n": model.n,
        "fields": [{"name": f.name, "parity": f.parity} for f in model.fields],
        "even": [f.name for f in model.even_fields],
        "odd": [f.name for f in model.odd_fields],
        "functions": {name: rule for name, rule in model.functions},
        "order_cap": model.order_cap,
    }


def value_machine(value):
    from .jet import ContactDerivation
    from .variational import DensityVariation, Lagrangian, LepageanTail
    if isinstance(value, GradedForm):
        return form_machine(value)
    if isinstance(value, Lagrangian):
        return {"kind": "lagrangian", "density": form_machine(value.density),
                "form": form_machine(value.form())}
    if isinstance(value, DensityVariation):
        return {"kind": "density_variation",
                "components": [{"field": f.name, "value": form_machine(e)}
                               for f, e in value.components.items()],
                "form": form_machine(value.to_form())}
    if isinstance(value, LepageanTail):
        return {"kind": "lepagean_tail",
                "coefficients": [{"field": f.name, "nu": list(nu), "lambda": lam,
                                  "value": form_machine(c)}
                                 for (f, nu, lam), c in sorted(value.coefficients.items())],
                "form": form_machine(value.to_form())}
    if isinstance(value, ContactDerivation):
        return {"kind": "derivation", "parity": value.parity,
                "horizontal": [{"index": lam, "value": form_machine(c)}
                               for lam, c in sorted(value.horizontal.items())],
                "vertical": [{"field": f.name, "value": form_machine(c)}
                             for f, c in sorted(value.vertical.items())]}
    if isinstance(value, dict):
        return {k: value_machine(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [value_machine(v) for v in value]
    return value


def machine_document(value, model: ModelSpec | None = None) -> dict:
    if model is None:
        model = getattr(value, "model", None)
    return {"schema_version": SCHEMA_VERSION,
            "model": model_machine(model) if model is not None else None,
            "value": value_machine(value)}


__all__ = [
    "parse_model", "parse_expression", "render", "render_derivation",
    "model_text", "machine_document", "SourceDocument", "DslError",
    "Diagnostic", "SCHEMA_VERSION",
]
