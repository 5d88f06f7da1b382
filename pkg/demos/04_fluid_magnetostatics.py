"""
Fluid flow compared with magnetostatics through the curl
========================================================

The symbol numbers of the second-order fluid system are reproduced exactly.
The formal-integrability verdict is not positive: combining the equations
gives sum_ij u^i_{x_j} u^j_{x_i} = 0, and its derivatives are second-order
conditions that many points of R^2 violate.
"""

from jetcas.cli import fixture_text
from jetcas.correspondence import shared_structure, transfer_solution
from jetcas.dsl import parse, parse_assignment, parse_expressions
from jetcas.expr import format_expr
from jetcas.integrability import check_formal_integrability
from jetcas.symbol import EvalStrategy, g_dimension, prolonged_symbol_matrix, rank, restricted_symbol_matrix, symbol_matrix
from jetcas.system import verify_solution

hy = parse(fixture_text("hydro"))
fluid = hy.bundles["fluid"]
sysJ = hy.system("hydroJ2")

at0 = EvalStrategy.at_point(parse_assignment("u[i]=0", hy, fluid))
print("symbol rank", rank(symbol_matrix(sysJ)).rank)
print("prolonged rank", rank(prolonged_symbol_matrix(sysJ, 1)).rank,
      "at u=0", rank(prolonged_symbol_matrix(sysJ, 1), at0).rank)
print("g^2, g^3 =", g_dimension(sysJ, 0), g_dimension(sysJ, 1))
print("restricted", [rank(restricted_symbol_matrix(sysJ, 0, j)).rank for j in (1, 2, 3)],
      "at u=0", [rank(restricted_symbol_matrix(sysJ, 0, j), at0).rank for j in (1, 2, 3)])

rep = check_formal_integrability(sysJ)
print(rep.verdict, "|", rep.reason[:120])
for w in rep.exceptional_points:
    print("rank drop at", w["point"], w["ranks"])

# Navier-Stokes with the static pressure assumption nu I = -grad p / rho
accept = parse_expressions("nu*I[i] + D(p,x[i])/rho", hy, fluid)
shared = shared_structure(hy.system("ns"), hy.corr("curl"), hy.system("mstatics"), accept=accept)
print(shared.verdict)
for batch in shared.fi.conditions_trail:
    print([format_expr(c)[:60] for c in batch])

# a shear flow still transfers to a magnetostatic field
sec = hy.section("shear")
B = transfer_solution(hy.corr("curl"), sec.as_dict(), sec.bindings_dict())
print({k: format_expr(v) for k, v in B.items()},
      verify_solution(hy.system("mstatics"), B, 0, sec.bindings_dict()).ok)
