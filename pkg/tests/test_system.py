import random
from itertools import combinations_with_replacement

import pytest
import sympy as sp

from jetcas.errors import Inconsistent, MissingBaseFunc, NotSolvable
from jetcas.expr import Expr, coord, format_expr, jet
from jetcas.jetgeom import BundleSpec
from jetcas.system import (PdeSystem, Ranking, complete, integrability_conditions, parametric_jets,
                           prolong, reduce, solved_form, verify_solution)

u = Expr.sym(jet("u"))


def J(*idx):
    return Expr.sym(jet("u", *idx))


def eqset(sys):
    return sorted(format_expr(e) for e in sys.equations)


LINE = BundleSpec(("x",), ("u",), "line")
PLANE = BundleSpec(("x", "t"), ("u",), "plane")
TIME = BundleSpec(("t",), ("u",), "time")


def test_prolong_examples(theories):
    s = PdeSystem(TIME, (J("t") - u,))
    assert eqset(prolong(s, 1)) == sorted([format_expr(J("t") - u), format_expr(J("t", "t") - J("t"))])
    assert prolong(s, 0) == s
    pinned = theories["ode"].system("pinned")
    got = set(eqset(prolong(pinned, 1)))
    want = {format_expr(e) for e in (J("x") - u, J("x", "x"), J("x", "x") - J("x"), J("x", "x", "x"))}
    assert got == want


def test_prolong_composes(theories):
    s = theories["ode"].system("hidden")
    assert set(eqset(prolong(prolong(s, 1), 1))) == set(eqset(prolong(s, 2)))


def test_solved_form_examples():
    o = solved_form(PdeSystem(LINE, (J("x") - u,)))
    assert o.mapping == {jet("u", "x"): u}
    o = solved_form(PdeSystem(PLANE, (J("x"), J("t", "t"))))
    assert o.mapping == {jet("u", "x"): Expr.const(0), jet("u", "t", "t"): Expr.const(0)}
    with pytest.raises(NotSolvable):
        solved_form([J("x") ** 2 - u], Ranking.for_bundle(LINE))
    with pytest.raises(Inconsistent):
        solved_form([Expr.const(4)], Ranking.for_bundle(LINE))


def test_reduce_examples():
    o = solved_form(PdeSystem(TIME, (J("t") - u,)))
    assert reduce(J("t", "t") - J("t"), o) == J("t", "t") - u
    o2 = solved_form(PdeSystem(TIME, (J("t") - u, J("t", "t") - J("t"))))
    assert reduce(J("t", "t") - J("t"), o2).is_zero
    o3 = solved_form(PdeSystem(LINE, (J("x") - u, J("x", "x"))))
    assert reduce(J("x", "x") - J("x"), o3) == -u
    empty = solved_form(PdeSystem(LINE, ()))
    assert reduce(J("x") + 1, empty) == J("x") + 1


def test_integrability_condition_examples(theories):
    ode = theories["ode"]
    conds = integrability_conditions(ode.system("hidden"))
    assert set(conds) == {J("x", "x"), J("x", "t")}
    assert integrability_conditions(ode.system("growth")) == []


def test_completion_examples(theories):
    ode = theories["ode"]
    c = complete(ode.system("hidden"))
    assert c.status == "completed" and c.iterations == 1
    pinned = complete(ode.system("pinned"))
    assert pinned.status == "completed"
    assert parametric_jets(pinned.system) == []
    both = PdeSystem(TIME, (J("t", "t") - u, J("t", "t", "t") - 4))
    res = complete(both)
    assert res.status == "inconsistent" and res.iterations <= 2


def test_verify_examples(theories):
    ode = theories["ode"]
    sec = ode.section("linear").as_dict()
    assert verify_solution(ode.system("hidden_completed"), sec, 1).ok
    bad = verify_solution(PdeSystem(TIME, (J("t") - u,)), {"u": Expr.sym(coord("t"))})
    assert not bad.ok and format_expr(bad.residuals[0]) in ("1 - t", "-t + 1")
    exp6 = ode.section("exp6").as_dict()
    osc = ode.system("oscillator")
    assert verify_solution(osc, exp6, 4, point={"t": 0}).ok
    assert not verify_solution(osc, exp6, 5, point={"t": 0}).ok
    ed = theories["electrodynamics"]
    with pytest.raises(MissingBaseFunc):
        verify_solution(ed.system("estatics"), ed.section("static_fields").as_dict())


def test_completion_is_sound(theories):
    # a verified solution satisfies every discovered condition
    ode = theories["ode"]
    sec = ode.section("linear").as_dict()
    comp = complete(ode.system("hidden"))
    for batch in comp.trail:
        assert verify_solution(PdeSystem(PLANE, batch), sec, 0).ok


def test_reduce_idempotent_and_kills_equations(theories):
    for name in ("hidden_completed", "oscillator", "growth"):
        s = theories["ode"].system(name)
        o = solved_form(s)
        for e in s.equations:
            assert reduce(e, o).is_zero
        f = J("t", "t") * 3 + u if "t" in s.bundle.base else J("x") + 2
        assert reduce(reduce(f, o), o) == reduce(f, o)


def test_completion_trail_deterministic(theories):
    s = theories["ode"].system("hidden")
    assert complete(s).trail == complete(s).trail


# Taylor oracle: surjectivity of R^{k+1} -> R^k for linear constant-coefficient systems.

def _shift(count, i):
    c = list(count)
    c[i] += 1
    return tuple(c)


def oracle_surjective(eqs, m, e, k):
    """eqs: list of {(dep, counts): coeff}; compares dim R^k with dim of the projection of R^{k+1}."""
    def coords(order):
        out = []
        for r in range(order + 1):
            for combo in combinations_with_replacement(range(m), r):
                cnt = tuple(combo.count(i) for i in range(m))
                out.extend((d, cnt) for d in range(e))
        return out

    ck, ck1 = coords(k), coords(k + 1)
    pro = list(eqs)
    for eq in eqs:
        for i in range(m):
            pro.append({(d, _shift(c, i)): v for (d, c), v in eq.items()})
    a_k = sp.Matrix([[eq.get(c, 0) for c in ck] for eq in eqs]) if eqs else sp.zeros(0, len(ck))
    a_k1 = sp.Matrix([[eq.get(c, 0) for c in ck1] for eq in pro])
    dim_rk = len(ck) - (a_k.rank() if eqs else 0)
    dim_rk1 = len(ck1) - a_k1.rank()
    top = [j for j, c in enumerate(ck1) if sum(c[1]) == k + 1]
    fibre = len(top) - a_k1[:, top].rank()  # points of R^{k+1} over the origin of J^k
    return dim_rk1 - fibre == dim_rk


def random_linear_system(seed):
    rng = random.Random(seed)
    m, e, k = rng.randint(1, 2), rng.randint(1, 2), rng.randint(1, 2)
    base = ("x", "y")[:m]
    deps = ("u", "v")[:e]
    pool = [(d, combo) for r in range(k + 1) for combo in combinations_with_replacement(range(m), r)
            for d in range(e)]
    eqs = []
    for _ in range(rng.randint(1, 3)):
        terms = rng.sample(pool, rng.randint(1, min(3, len(pool))))
        eq = {}
        for d, combo in terms:
            eq[(d, tuple(combo.count(i) for i in range(m)))] = rng.choice([-2, -1, 1, 2, 3])
        eqs.append(eq)
    exprs = []
    for eq in eqs:
        f = Expr.const(0)
        for (d, cnt), v in eq.items():
            idx = [base[i] for i in range(m) for _ in range(cnt[i])]
            f = f + Expr.sym(jet(deps[d], *idx)) * v
        exprs.append(f)
    bundle = BundleSpec(base, deps)
    return eqs, PdeSystem(bundle, tuple(exprs), k), (m, e, k)


@pytest.mark.parametrize("seed", range(50))
def test_surjectivity_agrees_with_taylor_oracle(seed):
    eqs, sys_, (m, e, k) = random_linear_system(seed)
    engine = not [c for c in integrability_conditions(sys_) if c.has_jets()]
    assert engine == oracle_surjective(eqs, m, e, k)


def test_oracle_generator_covers_both_outcomes():
    outcomes = set()
    for seed in range(50):
        eqs, _, (m, e, k) = random_linear_system(seed)
        outcomes.add(oracle_surjective(eqs, m, e, k))
    assert outcomes == {True, False}
