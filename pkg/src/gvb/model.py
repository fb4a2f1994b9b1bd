"""Model declarations: base dimension, even/odd fields, jet coordinates.

A :class:`ModelSpec` is the context every expression lives in.  Fields are
numbered in declaration order and that order is the canonical ordering of
jet variables and contact generators throughout the engine.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from functools import cached_property
from typing import NamedTuple


class GvbError(Exception):
    """Base class for engine errors."""


class OrderCapExceeded(GvbError):
    """A jet variable would exceed the model's jet-order cap."""


class ModelMismatch(GvbError, ValueError):
    pass


class ParityError(GvbError, ValueError):
    """Grassmann parity or form degree bookkeeping violated."""


class BidegreeError(GvbError, ValueError):
    pass


EVEN, ODD = 0, 1

RESERVED = frozenset({
    "dim", "even", "odd", "function", "deriv", "let", "lagrangian",
    "derivation", "horiz", "vert", "theta", "omega", "_",
})
_COORD_NAME = re.compile(r"^d?x\d+$")


class Field(NamedTuple):
    """A field s^A: declaration index, name and Grassmann parity."""
    index: int
    name: str
    parity: int

    def __repr__(self):
        return f"Field({self.name!r}, parity={self.parity})"


class MultiIndex(tuple):
    """Unordered multiset of base indices, stored sorted.

    Ordering is by length first, then lexicographic, so that
    ``y < y[0] < y[1] < y[0 0]``.
    """
    __slots__ = ()

    def __new__(cls, indices=()):
        if isinstance(indices, int):
            indices = (indices,)
        idx = tuple(sorted(int(i) for i in indices))
        if idx and idx[0] < 0:
            raise ValueError(f"negative base index in {idx}")
        return tuple.__new__(cls, idx)

    def merge(self, lam) -> "MultiIndex":
        """λ + Λ."""
        if isinstance(lam, int):
            lam = (lam,)
        return MultiIndex(tuple(self) + tuple(lam))

    def remove(self, lam: int) -> "MultiIndex":
        i = self.index(lam)
        return tuple.__new__(MultiIndex, self[:i] + self[i + 1:])

    def multiplicity(self, lam: int) -> int:
        return self.count(lam)

    def distinct(self):
        return sorted(set(self))

    def __lt__(self, other):
        return (len(self), tuple(self)) < (len(other), tuple(other))

    def __le__(self, other):
        return (len(self), tuple(self)) <= (len(other), tuple(other))

    def __gt__(self, other):
        return (len(self), tuple(self)) > (len(other), tuple(other))

    def __ge__(self, other):
        return (len(self), tuple(self)) >= (len(other), tuple(other))

    def __repr__(self):
        return f"MultiIndex({list(self)})"


class JetVariable(NamedTuple):
    """The jet coordinate s^A_Λ; identity is (field, unordered Λ)."""
    field: Field
    multi_index: MultiIndex

    @property
    def order(self) -> int:
        return len(self.multi_index)

    @property
    def parity(self) -> int:
        return self.field.parity

    def raised(self, lam, cap: int) -> "JetVariable":
        mi = self.multi_index.merge(lam)
        if len(mi) > cap:
            raise OrderCapExceeded(
                f"jet order {len(mi)} of {self.field.name} exceeds cap {cap}")
        return JetVariable(self.field, mi)

    def __repr__(self):
        return jet_text(self)


def jet_text(jv: JetVariable) -> str:
    if not jv.multi_index:
        return jv.field.name
    return f"{jv.field.name}[{' '.join(map(str, jv.multi_index))}]"


DEFAULT_FUNCTIONS = (("sin", "cos(_)"), ("cos", "-1 * sin(_)"), ("exp", "exp(_)"))


@dataclass(frozen=True, eq=False)
class ModelSpec:
    """Base dimension, fields in declaration order, function registry.

    ``functions`` maps each unary function symbol to the source text of its
    derivative, written in the bound variable ``_``; the registry is
    compiled once and frozen with the model.
    """
    n: int
    fields: tuple = ()
    functions: tuple = DEFAULT_FUNCTIONS
    order_cap: int = 10
    _rules: dict = dc_field(default=None, repr=False, compare=False)

    def __post_init__(self):
        fields = []
        for i, f in enumerate(self.fields):
            if isinstance(f, Field):
                name, parity = f.name, f.parity
            else:
                name, parity = f
            fields.append(Field(i, name, int(parity)))
        object.__setattr__(self, "fields", tuple(fields))
        object.__setattr__(self, "functions", tuple(
            (str(k), str(v)) for k, v in (
                self.functions.items() if isinstance(self.functions, dict)
                else self.functions)))
        if self.n < 1:
            raise ValueError("base dimension must be >= 1")
        if self.order_cap < 1:
            raise ValueError("order cap must be >= 1")
        names = [f.name for f in self.fields] + [k for k, _ in self.functions]
        seen = set()
        for name in names:
            if name in seen:
                raise ValueError(f"duplicate name {name!r}")
            seen.add(name)
            if (name in RESERVED or _COORD_NAME.match(name)
                    or not re.match(r"^[A-Za-z_][A-Za-z_0-9]*$", name)):
                raise ValueError(f"invalid or reserved name {name!r}")
        from .lang import compile_rules, rule_text
        rules = compile_rules(self)
        object.__setattr__(self, "_rules", rules)
        object.__setattr__(self, "functions", tuple(
            (name, rule_text(rules[name])) for name, _ in self.functions))

    @classmethod
    def build(cls, n, even=(), odd=(), functions=None, order_cap=10):
        """Convenience constructor: even fields are declared before odd ones."""
        fields = [(name, EVEN) for name in even] + [(name, ODD) for name in odd]
        funcs = dict(DEFAULT_FUNCTIONS)
        if functions:
            funcs.update(functions)
        return cls(n, tuple(fields), tuple(funcs.items()), order_cap)

    # equality by value, identity fast path
    def _key(self):
        return (self.n, self.fields, self.functions, self.order_cap)

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, ModelSpec):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    @property
    def even_fields(self):
        return tuple(f for f in self.fields if f.parity == EVEN)

    @property
    def odd_fields(self):
        return tuple(f for f in self.fields if f.parity == ODD)

    @cached_property
    def _by_name(self):
        return {f.name: f for f in self.fields}

    def field(self, name) -> Field:
        if isinstance(name, Field):
            return name
        try:
            return self._by_name[name]
        except KeyError:
            raise GvbError(f"unknown field {name!r}") from None

    @cached_property
    def function_names(self):
        return frozenset(k for k, _ in self.functions)

    def has_function(self, name: str) -> bool:
        return name in self.function_names

    def multi_index(self, indices) -> MultiIndex:
        mi = MultiIndex(indices)
        for i in mi:
            if i >= self.n:
                raise GvbError(f"index {i} out of range for dim {self.n}")
        if len(mi) > self.order_cap:
            raise OrderCapExceeded(f"jet order {len(mi)} exceeds cap {self.order_cap}")
        return mi

    def jet_variable(self, name, *indices) -> JetVariable:
        if len(indices) == 1 and not isinstance(indices[0], int):
            indices = tuple(indices[0])
        return JetVariable(self.field(name), self.multi_index(indices))

    def derivative_rule(self, name: str):
        """Canonical terms of the derivative of ``name`` in the bound variable."""
        try:
            return self._rules[name]
        except KeyError:
            raise GvbError(f"unknown function symbol {name!r}") from None

    # builders ---------------------------------------------------------
    def const(self, value):
        from .algebra import GradedForm
        return GradedForm.constant(self, Fraction(value))

    def coord(self, lam: int):
        from .algebra import coordinate
        return coordinate(self, lam)

    def jet(self, name, *indices):
        from .algebra import jet
        return jet(self, self.jet_variable(name, *indices))

    def dx(self, lam: int):
        from .algebra import dx
        return dx(self, lam)

    def theta(self, name, *indices):
        from .algebra import theta
        return theta(self, self.jet_variable(name, *indices))

    def omega(self):
        from .algebra import omega
        return omega(self)

    def apply(self, name, arg):
        from .algebra import apply_function
        return apply_function(self, name, arg)
