"""
Electrostatics inside electrodynamics, and the wave equation
============================================================

"""

from jetcas.cli import fixture_text
from jetcas.correspondence import equations_subsume, intersect, joint_kernel, shared_structure, transfer_solution
from jetcas.dsl import parse
from jetcas.expr import format_expr
from jetcas.system import prolong, verify_solution

ed = parse(fixture_text("electrodynamics"))

# forgetting time and B maps electrodynamics onto electrostatics
it = intersect(ed.system("ed"), ed.corr("electric"), ed.system("estatics"))
ker = joint_kernel(it)
for e in ker.equations():
    print(format_expr(e))
print("relations:", [format_expr(a) for a in ker.assumptions])

# the magnetic field becomes static but need not vanish
rep = shared_structure(ed.system("ed"), ed.corr("electric"), ed.system("estatics"))
print(rep.verdict, [format_expr(a) for a in rep.assumption_candidates])

sec = ed.section("static_fields")
out = transfer_solution(ed.corr("electric"), sec.as_dict(), sec.bindings_dict())
print({k: format_expr(v) for k, v in out.items()},
      verify_solution(ed.system("estatics"), out, 0, sec.bindings_dict()).ok)

# wave rows are differential consequences of the vacuum equations, not conversely
wave, vac = ed.system("wave"), ed.system("vacuum")
print(equations_subsume(wave, prolong(vac, 1)), equations_subsume(vac, wave))
