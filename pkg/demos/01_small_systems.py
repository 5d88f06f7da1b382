"""
Small systems: surjectivity, hidden conditions, contradictions
==============================================================

"""

from jetcas.cli import fixture_text
from jetcas.correspondence import shared_structure
from jetcas.dsl import parse
from jetcas.expr import format_expr
from jetcas.integrability import check_formal_integrability
from jetcas.system import complete, prolong, verify_solution

ode = parse(fixture_text("ode"))

# u_x = u. The first prolongation adds u_xx = u_x and nothing of order one.
growth = ode.system("growth")
print([format_expr(e) for e in prolong(growth, 1).equations])
print(check_formal_integrability(growth).verdict, check_formal_integrability(growth).g_dims)

# u_x = u with u_xx = 0: differentiating the first equation forces u = 0,
# so points of R^2 with u != 0 never lift.
rep = check_formal_integrability(ode.system("pinned"))
print(rep.verdict, "|", rep.reason)

# u_x = 0, u_tt = 0 hide u_xt = u_xx = 0; after adjoining them, u = 3t + 5 solves everything.
comp = complete(ode.system("hidden"))
print(comp.status, [[format_expr(c) for c in batch] for batch in comp.trail])
print(verify_solution(comp.system, ode.section("linear").as_dict(), 1).ok)

# u_tt = u against u_ttt = 4 under the identity: completion runs into 0 = 4.
rep = shared_structure(ode.system("oscillator"), ode.corr("same"), ode.system("forced"))
print(rep.verdict, "|", rep.reason)
