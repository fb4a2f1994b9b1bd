"""
Boundary terms and the decomposition dL = deltaL - d_H Xi
=========================================================

For a second-order Lagrangian the tail Xi carries the momenta of both
orders.  Every coefficient is printed and the decomposition is verified
as an exact identity of forms.
"""

from gvb import exterior_d, horizontal_d, lepagean, parse_model, render, variational_delta

doc = parse_model("""
dim 1
even y
odd c
lagrangian beam = 1/2 * y[0 0]^2 + c * c[0] * y[0]
""")
L = doc.lagrangians["beam"]
tail = lepagean(L)

for (field, nu, lam), coeff in sorted(tail.coefficients.items()):
    print(f"F[{field.name}; lambda={lam}; nu={list(nu)}] = {render(coeff)}")
print("Xi =", render(tail.to_form()))

lhs = exterior_d(L.form())
rhs = variational_delta(L.form()) - horizontal_d(tail.to_form())
print("dL            =", render(lhs))
print("dL - rhs      =", render(lhs - rhs))
assert lhs == rhs
