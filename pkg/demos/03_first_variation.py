"""
First variational formula for a supersymmetry-like transformation
=================================================================

An odd vertical derivation mixes y and c.  Both sides of the first
variational formula are computed and compared; a horizontal derivation is
shown as well, where the residual is only reported.
"""

from gvb import first_variational_check, parse_model, render

doc = parse_model("""
dim 1
even y
odd c
lagrangian L = 1/2 * y[0]^2 + c * c[0]
derivation susy = vert: y -> c, c -> y[0]
derivation translate = horiz: 0 -> 1
""")
L = doc.lagrangians["L"]

for name in ("susy", "translate"):
    rep = first_variational_check(L, doc.derivations[name])
    print(f"{name}:")
    print("    L_v L    =", render(rep.lhs))
    print("    rhs      =", render(rep.rhs))
    print("    residual =", render(rep.residual),
          "(checked)" if rep.vertical else "(reported only)")
