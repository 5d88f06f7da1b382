import sys
from pathlib import Path

import pytest
import sympy as sp

from jetcas.cli import fixture_text
from jetcas.dsl import parse
from jetcas.expr import COORD, FUNC, JET, PARAM

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture(scope="session")
def theories():
    return {name: parse(fixture_text(name)) for name in ("ode", "maxwell", "electrodynamics", "hydro")}


def to_sympy(f, base):
    """Independent reading of an Expr: jets become derivatives of sympy functions of ``base``."""
    xs = {v: sp.Symbol(v) for v in base}
    out = 0
    for mono, c in f.terms.items():
        term = sp.Rational(c.numerator, c.denominator)
        for s, e in mono:
            if s.kind == JET:
                g = sp.Function(s.name)(*xs.values())
                atom = sp.diff(g, *[xs[v] for v in s.idx]) if s.idx else g
            elif s.kind == FUNC:
                g = sp.Function(s.name)(*[xs[a] for a in s.args])
                atom = sp.diff(g, *[xs[v] for v in s.idx]) if s.idx else g
            elif s.kind == COORD:
                atom = xs.get(s.name, sp.Symbol(s.name))
            else:
                assert s.kind == PARAM
                atom = sp.Symbol("p_" + s.name)
            term *= atom ** e
        out += term
    return out
