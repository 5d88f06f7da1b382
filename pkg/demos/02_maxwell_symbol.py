"""
Maxwell's equations for the potential
=====================================

The symbol, its first prolongation and the restricted symbols decide
formal integrability without solving anything.
"""

from jetcas.cli import fixture_text
from jetcas.dsl import parse
from jetcas.expr import format_expr
from jetcas.integrability import check_formal_integrability
from jetcas.symbol import g_dimension, prolonged_symbol_matrix, quasi_regular_check, rank, symbol_matrix

mw = parse(fixture_text("maxwell"))
maxwell = mw.system("maxwell")
for e in maxwell.equations:
    print(format_expr(e))

sigma = symbol_matrix(maxwell)
print("symbol", sigma.shape, "rank", rank(sigma).rank)
print("prolonged symbol rank", rank(prolonged_symbol_matrix(maxwell, 1)).rank)
print("dim g^2 =", g_dimension(maxwell, 0), " dim g^3 =", g_dimension(maxwell, 1))

# quasi-regularity: dim g^3 = dim g^2 + sum_j dim g^{2,j}
qr = quasi_regular_check(maxwell)
print(qr.lhs, "=", qr.rhs, [p["dim"] for p in qr.per_j])

rep = check_formal_integrability(maxwell)
print(rep.verdict)
# the relation among the sources is the divergence of J
print([format_expr(a) for a in rep.assumptions])
