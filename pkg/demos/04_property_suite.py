"""
Running the seeded property suite
=================================

The same report is produced by ``gvb check --seed 42 --cases 25``.
A deliberately broken sign rule shows what a failure looks like.
"""

from gvb import algebra
from gvb.suite import SuiteConfig, property_suite

cfg = SuiteConfig(seed=42, cases=25)
print(property_suite(cfg).render())

# flip the wedge sign convention: Grassmann parity no longer contributes
original = algebra._swap_exponent
algebra._swap_exponent = lambda db, pb, da, pa: db * da
try:
    report = property_suite(SuiteConfig(seed=42, cases=5), only=["wedge_swap", "d_squared"])
finally:
    algebra._swap_exponent = original
print(report.render())
