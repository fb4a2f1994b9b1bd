"""Command-line frontend.

Exit status: 0 success, 1 identity/property failure, 2 parse, elaboration
or file error, 3 jet-order cap exceeded.
"""
from __future__ import annotations

import argparse
import json
import sys

from . import jet as J
from . import variational as V
from .algebra import GradedForm
from .lang import DslError, machine_document, parse_model, render
from .model import GvbError, OrderCapExceeded
from .suite import PROPERTY_NAMES, SuiteConfig, property_suite

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_CAP = 0, 1, 2, 3


class _InputError(Exception):
    pass


def _positive_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def _load(path, order_cap):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise _InputError(f"{path}: cannot read file: {exc.strerror or exc}") from None
    try:
        return parse_model(text, order_cap=order_cap)
    except DslError as exc:
        text = "\n".join(f"{path}:{d}" for d in exc.diagnostics)
        if all(d.kind == "order_cap" for d in exc.diagnostics):
            raise OrderCapExceeded(text) from None
        raise _InputError(text) from None


def _lookup(doc, name, table, what):
    if name in table:
        return table[name]
    kinds = {**{k: "form" for k in doc.expressions},
             **{k: "lagrangian" for k in doc.lagrangians},
             **{k: "derivation" for k in doc.derivations}}
    if name in kinds:
        raise _InputError(f"{name!r} is a {kinds[name]}, expected a {what}")
    raise _InputError(f"no {what} named {name!r}")


def _emit(args, value, text_lines, model=None):
    if args.json:
        print(json.dumps(machine_document(value, model), indent=2, sort_keys=True))
    else:
        for line in text_lines:
            print(line)


def cmd_el(args):
    doc = _load(args.file, args.order_cap)
    L = _lookup(doc, args.lagrangian, doc.lagrangians, "lagrangian")
    ev = V.euler_lagrange(L)
    _emit(args, ev, [f"E[{f.name}] = {render(e)}" for f, e in ev.components.items()])
    return EXIT_OK


def cmd_lepagean(args):
    doc = _load(args.file, args.order_cap)
    L = _lookup(doc, args.lagrangian, doc.lagrangians, "lagrangian")
    tail = V.lepagean(L)
    residual = V.lepagean_residual(L, tail)
    ok = residual.is_zero()
    lines = []
    for (f, nu, lam), c in sorted(tail.coefficients.items()):
        lines.append(f"F[{f.name}, lambda={lam}, nu=[{' '.join(map(str, nu))}]] = {render(c)}")
    lines.append(f"Xi = {render(tail.to_form())}")
    lines.append(f"dL - deltaL + d_H Xi = {render(residual)}  ({'ok' if ok else 'FAILED'})")
    _emit(args, {"tail": tail, "residual": residual, "ok": ok}, lines, doc.model)
    return EXIT_OK if ok else EXIT_FAIL


def _form(doc, name):
    if name in doc.lagrangians:
        return doc.lagrangians[name].form()
    value = _lookup(doc, name, doc.expressions, "form")
    if not isinstance(value, GradedForm):
        raise _InputError(f"{name!r} is not a form")
    return value


def cmd_delta(args):
    doc = _load(args.file, args.order_cap)
    phi = _form(doc, args.form)
    try:
        value = V.variational_delta(phi)
    except OrderCapExceeded:
        raise
    except GvbError as exc:
        raise _InputError(str(exc)) from None
    _emit(args, value, [render(value)])
    return EXIT_OK


def cmd_lie(args):
    doc = _load(args.file, args.order_cap)
    vt = _lookup(doc, args.derivation, doc.derivations, "derivation")
    phi = _form(doc, args.form)
    value = J.lie_derivative(vt, phi)
    _emit(args, value, [render(value)])
    return EXIT_OK


def cmd_fvf(args):
    doc = _load(args.file, args.order_cap)
    L = _lookup(doc, args.lagrangian, doc.lagrangians, "lagrangian")
    vt = _lookup(doc, args.derivation, doc.derivations, "derivation")
    rep = V.first_variational_check(L, vt)
    lines = [f"lhs = {render(rep.lhs)}", f"rhs = {render(rep.rhs)}",
             f"residual = {render(rep.residual)}"]
    if rep.vertical:
        lines.append("vertical derivation: " + ("ok" if rep.ok else "FAILED"))
    else:
        lines.append("derivation has a horizontal part: residual reported, not checked")
    _emit(args, {"lhs": rep.lhs, "rhs": rep.rhs, "residual": rep.residual,
                 "vertical": rep.vertical, "ok": rep.ok}, lines, doc.model)
    return EXIT_FAIL if rep.vertical and not rep.ok else EXIT_OK


def cmd_check(args):
    try:
        cfg = SuiteConfig(seed=args.seed, cases=args.cases, max_dim=args.max_dim,
                          max_fields=args.max_fields, max_order=args.max_order,
                          max_terms=args.max_terms, max_coeff=args.max_coeff)
    except ValueError as exc:
        raise _InputError(str(exc)) from None
    report = property_suite(cfg, only=args.only)
    if args.json:
        print(report.to_json())
    else:
        sys.stdout.write(report.render())
    print(f"elapsed {report.elapsed:.2f}s", file=sys.stderr)
    return EXIT_OK if report.ok else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="gvb", description="Graded variational bicomplex calculator.")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_text, *positional):
        sp = sub.add_parser(name, help=help_text)
        for arg in positional:
            sp.add_argument(arg)
        sp.add_argument("--json", action="store_true", help="machine-readable output")
        if positional:
            sp.add_argument("--order-cap", type=_positive_int, default=10, help="maximum jet order")
        sp.set_defaults(func=fn)
        return sp

    add("el", cmd_el, "Euler-Lagrange operator of a Lagrangian", "file", "lagrangian")
    add("lepagean", cmd_lepagean, "Lepagean tail and decomposition check", "file", "lagrangian")
    add("delta", cmd_delta, "variational operator on a form", "file", "form")
    add("lie", cmd_lie, "Lie derivative of a form", "file", "derivation", "form")
    add("fvf", cmd_fvf, "first variational formula check", "file", "lagrangian", "derivation")
    chk = add("check", cmd_check, "run the seeded property suite")
    chk.add_argument("--seed", type=int, default=42)
    chk.add_argument("--cases", type=int, default=10)
    chk.add_argument("--max-dim", type=int, default=2)
    chk.add_argument("--max-fields", type=int, default=2)
    chk.add_argument("--max-order", type=int, default=2)
    chk.add_argument("--max-terms", type=int, default=4)
    chk.add_argument("--max-coeff", type=int, default=9)
    chk.add_argument("--only", nargs="+", choices=PROPERTY_NAMES, metavar="PROPERTY",
                     help="run only these properties")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OrderCapExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP


if __name__ == "__main__":
    sys.exit(main())
