import sympy as sp

from jetcas.dsl import parse
from jetcas.integrability import (FI_AFTER_COMPLETION, FORMALLY_INTEGRABLE, INCONCLUSIVE, INCONSISTENT,
                                  NOT_FI, FiOptions, check_formal_integrability)
from jetcas.system import complete


def test_growth(theories):
    r = check_formal_integrability(theories["ode"].system("growth"))
    assert r.verdict == FORMALLY_INTEGRABLE and r.g_dims == {1: 0, 2: 0}


def test_pinned_not_surjective(theories):
    r = check_formal_integrability(theories["ode"].system("pinned"))
    assert r.verdict == NOT_FI and r.reason.startswith("surjectivity")
    assert r.surjective is False


def test_hidden_completes(theories):
    r = check_formal_integrability(theories["ode"].system("hidden"))
    assert r.verdict == FI_AFTER_COMPLETION
    assert len(r.conditions_trail) == 1 and len(r.conditions_trail[0]) == 2


def test_inconsistent_system():
    tf = parse("bundle time { base: t; fiber: u; } system s on time order 3 "
               "{ eq: d(u,t,t) - u; eq: d(u,t,t,t) - 4; }")
    r = check_formal_integrability(tf.system("s"))
    assert r.verdict == INCONSISTENT


def test_maxwell(theories):
    r = check_formal_integrability(theories["maxwell"].system("maxwell"))
    assert r.verdict == FORMALLY_INTEGRABLE
    assert r.g_dims == {2: 36, 3: 65} and r.symbol_ranks == {"sigma": 4, "sigma1": 15}
    assert r.involutive_order == 2
    # the charge-conservation identity surfaces as a relation on the sources
    assert len(r.assumptions) == 1


def test_iteration_cap():
    tf = parse("bundle b { base: x y; fiber: u v w; } system s on b order 1 "
               "{ eq: d(u,x); eq: d(u,y) - v; eq: d(v,x) - w; eq: d(w,y); }")
    assert complete(tf.system("s"), 1).status == "iteration_cap"
    r = check_formal_integrability(tf.system("s"), FiOptions(max_iter=1))
    assert r.verdict == INCONCLUSIVE and r.reason.startswith("iteration_cap")
    assert check_formal_integrability(tf.system("s")).positive


def test_prolongation_reaches_quasi_regular_order(theories):
    ed = theories["electrodynamics"]
    from jetcas.correspondence import intersect
    joint = intersect(ed.system("ed"), ed.corr("electric"), ed.system("estatics")).joint
    r = check_formal_integrability(joint)
    assert r.positive and r.involutive_order == 2
    assert any("involutive after 1" in n for n in r.notes)
    r0 = check_formal_integrability(joint, FiOptions(max_prolong=0))
    assert r0.verdict == INCONCLUSIVE and "quasi-regular" in r0.reason


def test_report_serialises(theories):
    d = check_formal_integrability(theories["ode"].system("hidden")).to_dict()
    assert d["verdict"] == FI_AFTER_COMPLETION and d["conditions_trail"]


# The hydrodynamic second-order system is not formally integrable: an independent check with sympy.

def hydro_point_lifts(shear: int) -> bool:
    """Pick a point of R^2 with u = 0, u1_x2 = shear, u2_x1x1 = 1 and ask whether it extends to R^3."""
    t, x1, x2, x3 = X = sp.symbols("t x1 x2 x3")
    xs = (x1, x2, x3)
    u = [sp.Function(f"u{i}")(*X) for i in (1, 2, 3)]
    I = [sp.Function(f"I{i}")(*xs) for i in (1, 2, 3)]
    div = sum(sp.diff(u[j], xs[j]) for j in range(3))
    mat = [sp.diff(u[i], t) + sum(u[j] * sp.diff(u[i], xs[j]) for j in range(3)) for i in range(3)]
    eqs = [div, sp.diff(div, t)] + [sp.diff(div, x) for x in xs] + mat
    eqs += [sp.diff(mat[i], x) for i in range(3) for x in xs] + [sp.diff(mat[i], t) for i in range(3)]
    eqs += [sum(sp.diff(u[i], x, x) for x in xs) + I[i] for i in range(3)]

    # jets up to order 3 of u, order 1 of I, as plain symbols
    def jets(fs, vars_, order):
        out = {}
        for f in fs:
            for n in range(order + 1):
                for combo in sp.utilities.iterables.multiset_combinations(list(vars_) * n, n):
                    d = sp.diff(f, *combo) if combo else f
                    out[d] = sp.Symbol(f"{f.func}_{''.join(str(c) for c in combo)}")
        return out

    ujets = jets(u, X, 3)
    ijets = jets(I, xs, 1)
    table = {**ujets, **ijets}

    def as_jets(expr):
        derivs = sorted(expr.atoms(sp.Derivative), key=lambda d: -sum(c for _, c in d.variable_count))
        expr = expr.subs({d: table[d] for d in derivs})
        return expr.subs({f: table[f] for f in u + I})

    # remaining second-order jets and the values of I are solved for
    point = {table[f]: 0 for f in u}
    for f in u:
        for x in X:
            point[table[sp.diff(f, x)]] = 0
    point[table[sp.diff(u[0], x2)]] = shear
    second = [table[d] for d in ujets if isinstance(d, sp.Derivative) and sum(c for _, c in d.variable_count) == 2]
    fixed = table[sp.diff(u[1], x1, x1)]
    unknowns = [s for s in second if s != fixed] + [table[f] for f in I]
    low = [as_jets(e).subs(point).subs(fixed, 1) for e in eqs]
    sol = sp.linsolve(low, unknowns)
    assert sol != sp.EmptySet, "the chosen point must lie on R^2"
    (values,) = list(sol)
    free = set().union(*[sp.sympify(v).free_symbols for v in values])
    values = [sp.sympify(v).subs({f: 0 for f in free}) for v in values]
    point.update(dict(zip(unknowns, values)))
    point[fixed] = 1
    # every equation of the system holds at the point
    assert all(sp.simplify(as_jets(e).subs(point)) == 0 for e in eqs)

    # first prolongation, with all third-order jets and first derivatives of I unknown
    prolonged = [as_jets(sp.diff(e, x)).subs(point) for e in eqs for x in X]
    third = [table[d] for d in ujets if isinstance(d, sp.Derivative) and sum(c for _, c in d.variable_count) == 3]
    third += [table[sp.diff(f, x)] for f in I for x in xs]
    return sp.linsolve(prolonged, third) != sp.EmptySet


def test_hydro_second_order_system_does_not_lift():
    # D_l of sum_ij u^i_{x_j} u^j_{x_i} = 0 is violated: 2 * u1_x2 * u2_x1x1 != 0
    assert not hydro_point_lifts(1)


def test_hydro_oracle_control_point_lifts():
    assert hydro_point_lifts(0)


def test_engine_reports_hydro_obstruction(theories):
    r = check_formal_integrability(theories["hydro"].system("hydroJ2"))
    assert not r.positive
    assert r.completion_status == "not_solvable"
    assert r.g_dims == {2: 12, 3: 16}
    assert any(w["special"] for w in r.exceptional_points)
