"""Independent reference computations used by the tests.

Even-field quantities are cross-checked against sympy, which knows nothing
about the engine's representation: jet variables become derivatives of
undefined functions of the base coordinates.
"""
from __future__ import annotations

from itertools import permutations

import sympy

from gvb.algebra import A_APPLY, A_ARG, A_COORD, A_JET


def sympy_context(model):
    xs = sympy.symbols(f"x0:{model.n}")
    funcs = {f.name: sympy.Function(f.name)(*xs) for f in model.even_fields}
    return xs, funcs


def _atom(atom, xs, funcs):
    if atom.kind == A_COORD:
        return xs[atom.payload]
    if atom.kind == A_JET:
        jv = atom.payload
        base = funcs[jv.field.name]
        if not jv.multi_index:
            return base
        return sympy.Derivative(base, *[xs[i] for i in jv.multi_index])
    if atom.kind == A_APPLY:
        name, inner = atom.payload
        return getattr(sympy, name)(_terms(inner, xs, funcs))
    assert atom.kind != A_ARG
    raise AssertionError(atom)


def _terms(items, xs, funcs):
    total = sympy.Integer(0)
    for (mono, gens), c in items:
        assert not gens, "sympy oracle covers even functions only"
        t = sympy.Rational(c.numerator, c.denominator)
        for atom, p in mono:
            t *= _atom(atom, xs, funcs) ** p
        total += t
    return total


def to_sympy(f, ctx=None):
    xs, funcs = ctx or sympy_context(f.model)
    return _terms(f.terms.items(), xs, funcs)


def sympy_euler_lagrange(density):
    """{field name: E} from sympy's euler_equations."""
    model = density.model
    xs, funcs = sympy_context(model)
    L = to_sympy(density, (xs, funcs))
    names = [f.name for f in model.even_fields]
    eqs = sympy.euler_equations(L, [funcs[n] for n in names], xs)
    return {n: eq.lhs for n, eq in zip(names, eqs)}, (xs, funcs)


def same(a, b) -> bool:
    return sympy.expand(a - b) == 0


def permutation_sign(order) -> int:
    """Sign of the permutation sorting ``order`` (count of inversions)."""
    inv = sum(1 for i in range(len(order)) for j in range(i + 1, len(order))
              if order[i] > order[j])
    return -1 if inv % 2 else 1


def brute_force_odd_product(indices):
    """Product of distinct anticommuting symbols given by sort keys.

    Returns (sign, sorted keys) or (0, None) when a symbol repeats.
    """
    if len(set(indices)) < len(indices):
        return 0, None
    return permutation_sign(list(indices)), tuple(sorted(indices))


__all__ = ["sympy_context", "to_sympy", "sympy_euler_lagrange", "same",
           "permutation_sign", "brute_force_odd_product", "permutations"]
