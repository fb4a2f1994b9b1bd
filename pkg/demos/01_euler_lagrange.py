"""
Field equations for even and odd fields
=======================================

Builds a few Lagrangians, computes their Euler-Lagrange operators and
checks the result against the variational operator computed from the
exterior derivative.
"""

from gvb import euler_lagrange, parse_model, render, variational_delta

doc = parse_model("""
dim 2
even y
odd c
# wave equation in one space and one time dimension
lagrangian wave = 1/2 * (y[0]^2 - y[1]^2)
# first-order odd field coupled to y
lagrangian spin = y * c * c[0]
# higher order: a plate-like term
lagrangian plate = 1/2 * y[0 1]^2 + x0 * y[1]
""")

for name, lag in doc.lagrangians.items():
    ev = euler_lagrange(lag)
    print(f"{name}: L = {render(lag.density)}")
    for field, e in ev.components.items():
        print(f"    E[{field.name}] = {render(e)}")
    # the same object through delta = rho o d
    assert variational_delta(lag.form()) == ev.to_form()

# odd fields use the left derivative: for c * c[0] the answer is 2 c[0],
# not 0 as a naive commuting calculation would give
one = parse_model("dim 1\nodd c\nlagrangian L = c * c[0]")
print("c c_0:", render(euler_lagrange(one.lagrangians["L"])["c"]))
