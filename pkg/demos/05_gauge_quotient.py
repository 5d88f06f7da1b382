"""
Gauge invariants and the field-strength equations
=================================================

"""

from jetcas.cli import fixture_text
from jetcas.correspondence import pullback_equation
from jetcas.dsl import parse
from jetcas.expr import format_expr
from jetcas.symmetry import invariant_basis, quotient_rewrite

mw = parse(fixture_text("maxwell"))
gauge = mw.generator_set("gauge")

# linear forms on J^1 killed by A -> A + d(chi)
for f in invariant_basis(gauge.generators, gauge.bundle, 1):
    print(format_expr(f))
g2 = mw.generator_set("gauge2")
print(len(invariant_basis(g2.generators, g2.bundle, 2)), "invariants on J^2")

# rewrite the potential equations in F = dA
fa = mw.corr("faraday")
q = quotient_rewrite(mw.system("maxwell"), list(zip(fa.target.fiber, fa.components)), fa.target)
for e in q.equations:
    print(format_expr(e))

# the homogeneous equations hold identically for F = dA
print([format_expr(e) for e in pullback_equation(fa, mw.system("bianchi")).equations])
