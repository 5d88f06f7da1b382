"""Sparse polynomial expressions over jet coordinates with exact rational coefficients.

A symbol is one of four kinds:

* ``COORD``  a base coordinate x^i,
* ``PARAM``  a constant parameter (may carry negative exponents, so 1/rho is allowed),
* ``FUNC``   an opaque given function of some base variables, with formal derivatives,
* ``JET``    a jet coordinate u^j_sigma.

Multi-indices are stored as sorted tuples of base-variable names, which makes
u_{xt} and u_{tx} the same symbol.  An :class:`Expr` maps monomials (sorted
tuples of ``(symbol, exponent)``) to :class:`fractions.Fraction` coefficients and
is never mutated after construction.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from numbers import Rational
from typing import Iterable, Mapping, NamedTuple, Union

from .errors import CyclicSubstitution, UnboundSymbol

COORD, PARAM, FUNC, JET = 0, 1, 2, 3


class Symbol(NamedTuple):
    kind: int
    name: str
    idx: tuple = ()
    args: tuple = ()

    @property
    def order(self) -> int:
        return len(self.idx)

    @property
    def is_jet(self) -> bool:
        return self.kind == JET

    @property
    def is_func(self) -> bool:
        return self.kind == FUNC

    def __str__(self) -> str:
        if self.idx:
            return f"{self.name}_{''.join(self.idx)}"
        return self.name

    def __repr__(self) -> str:
        return f"Symbol({self})"


JetVar = Symbol
Monomial = tuple
Number = Union[int, Fraction]


def jet(dep: str, *vars: str) -> Symbol:
    return Symbol(JET, dep, tuple(sorted(vars)))


def func(name: str, args: Iterable[str], deriv: Iterable[str] = ()) -> Symbol:
    return Symbol(FUNC, name, tuple(sorted(deriv)), tuple(args))


def param(name: str) -> Symbol:
    return Symbol(PARAM, name)


def coord(name: str) -> Symbol:
    return Symbol(COORD, name)


@lru_cache(maxsize=1 << 18)
def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    exps = dict(a)
    for s, e in b:
        n = exps.get(s, 0) + e
        if n:
            exps[s] = n
        else:
            del exps[s]
    return tuple(sorted(exps.items()))


def _mono_drop(m: Monomial, pos: int) -> Monomial:
    """Lower the exponent of the factor at ``pos`` by one."""
    s, e = m[pos]
    if e == 1:
        return m[:pos] + m[pos + 1:]
    return m[:pos] + ((s, e - 1),) + m[pos + 1:]


class Expr:
    """Immutable sparse polynomial; ``terms`` maps monomial -> nonzero Fraction."""

    __slots__ = ("terms", "_hash")

    def __init__(self, terms: Mapping[Monomial, Number] | None = None):
        if terms:
            self.terms = {m: Fraction(c) for m, c in terms.items() if c}
        else:
            self.terms = {}
        self._hash = None

    @classmethod
    def _raw(cls, terms: dict) -> "Expr":
        # terms already normalized: no zero coefficients, Fraction values
        e = cls.__new__(cls)
        e.terms = terms
        e._hash = None
        return e

    @classmethod
    def const(cls, c: Number) -> "Expr":
        return cls._raw({(): Fraction(c)}) if c else cls._raw({})

    @classmethod
    def sym(cls, s: Symbol, power: int = 1) -> "Expr":
        return cls._raw({((s, power),): Fraction(1)})

    @staticmethod
    def coerce(x) -> "Expr":
        if isinstance(x, Expr):
            return x
        if isinstance(x, Symbol):
            return Expr.sym(x)
        if isinstance(x, (int, Rational)):
            return Expr.const(Fraction(x))
        raise TypeError(f"cannot convert {type(x).__name__} to Expr")

    # arithmetic
    def __add__(self, other) -> "Expr":
        other = Expr.coerce(other)
        if not other.terms:
            return self
        if not self.terms:
            return other
        out = dict(self.terms)
        for m, c in other.terms.items():
            n = out.get(m, 0) + c
            if n:
                out[m] = n
            else:
                del out[m]
        return Expr._raw(out)

    __radd__ = __add__

    def __neg__(self) -> "Expr":
        return Expr._raw({m: -c for m, c in self.terms.items()})

    def __sub__(self, other) -> "Expr":
        return self + (-Expr.coerce(other))

    def __rsub__(self, other) -> "Expr":
        return Expr.coerce(other) + (-self)

    def __mul__(self, other) -> "Expr":
        if isinstance(other, (int, Rational)) and not isinstance(other, bool):
            return self.scale(other)
        other = Expr.coerce(other)
        if not self.terms or not other.terms:
            return ZERO
        out: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = _mono_mul(m1, m2)
                n = out.get(m, 0) + c1 * c2
                if n:
                    out[m] = n
                else:
                    del out[m]
        return Expr._raw(out)

    __rmul__ = __mul__

    def scale(self, c: Number) -> "Expr":
        c = Fraction(c)
        if not c:
            return ZERO
        if c == 1:
            return self
        return Expr._raw({m: v * c for m, v in self.terms.items()})

    def __pow__(self, n: int) -> "Expr":
        if not isinstance(n, int):
            raise TypeError("only integer powers are supported")
        if n < 0:
            return self.inverse() ** (-n)
        result = ONE
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def inverse(self) -> "Expr":
        """Inverse of a single term whose symbols are all parameters."""
        if len(self.terms) != 1:
            raise ZeroDivisionError(f"cannot invert {self}")
        (m, c), = self.terms.items()
        if any(s.kind != PARAM for s, _ in m):
            raise ZeroDivisionError(f"cannot invert {self}: only parameters may be divided by")
        return Expr._raw({tuple((s, -e) for s, e in m): 1 / c})

    def __truediv__(self, other) -> "Expr":
        if isinstance(other, (int, Rational)):
            return self.scale(1 / Fraction(other))
        return self * Expr.coerce(other).inverse()

    # comparison
    def __eq__(self, other) -> bool:
        if isinstance(other, Expr):
            return self.terms == other.terms
        if isinstance(other, (int, Rational, Symbol)):
            return self.terms == Expr.coerce(other).terms
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def __bool__(self) -> bool:
        return bool(self.terms)

    def sort_key(self) -> tuple:
        """Total order on expressions, used to make outputs deterministic."""
        return tuple(sorted((m, c.numerator, c.denominator) for m, c in self.terms.items()))

    # inspection
    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and () in self.terms)

    @property
    def constant_value(self) -> Fraction:
        return self.terms.get((), Fraction(0))

    def symbols(self) -> frozenset:
        return frozenset(s for m in self.terms for s, _ in m)

    def jets(self) -> list:
        return sorted({s for m in self.terms for s, _ in m if s.kind == JET})

    def funcs(self) -> list:
        return sorted({s for m in self.terms for s, _ in m if s.kind == FUNC})

    def has_jets(self) -> bool:
        return any(s.kind == JET for m in self.terms for s, _ in m)

    def max_order(self) -> int:
        """Highest jet order present; -1 when the expression contains no jet."""
        return max((s.order for m in self.terms for s, _ in m if s.kind == JET), default=-1)

    def degree(self, s: Symbol) -> int:
        return max((e for m in self.terms for t, e in m if t == s), default=0)

    def is_linear(self) -> bool:
        """Total degree in jet coordinates is at most one."""
        return all(sum(e for s, e in m if s.kind == JET) <= 1 for m in self.terms)

    def __str__(self) -> str:
        return format_expr(self)

    def __repr__(self) -> str:
        return f"Expr({format_expr(self)})"


ZERO = Expr._raw({})
ONE = Expr._raw({(): Fraction(1)})


def as_expr(x) -> Expr:
    return Expr.coerce(x)


# calculus

@lru_cache(maxsize=1 << 16)
def _dsym(s: Symbol, var: str):
    """D_var of a single symbol: a Symbol, the integer 1, or None for zero."""
    if s.kind == JET:
        return Symbol(JET, s.name, tuple(sorted(s.idx + (var,))))
    if s.kind == COORD:
        return 1 if s.name == var else None
    if s.kind == FUNC:
        if var in s.args:
            return Symbol(FUNC, s.name, tuple(sorted(s.idx + (var,))), s.args)
        return None
    return None


def total_derivative(f: Expr, var: str) -> Expr:
    """D_var f: chain rule over every factor, shifting jets and function derivatives."""
    out: dict = {}
    for m, c in f.terms.items():
        for pos, (s, e) in enumerate(m):
            ds = _dsym(s, var)
            if ds is None:
                continue
            rest = _mono_drop(m, pos)
            if ds != 1:
                rest = _mono_mul(rest, ((ds, 1),))
            n = out.get(rest, 0) + c * e
            if n:
                out[rest] = n
            else:
                del out[rest]
    return Expr._raw(out)


def total_derivative_multi(f: Expr, vars: Iterable[str]) -> Expr:
    for v in vars:
        f = total_derivative(f, v)
    return f


def partial(f: Expr, v: Symbol) -> Expr:
    """Ordinary partial derivative treating every symbol as independent."""
    out: dict = {}
    for m, c in f.terms.items():
        for pos, (s, e) in enumerate(m):
            if s == v:
                rest = _mono_drop(m, pos)
                n = out.get(rest, 0) + c * e
                if n:
                    out[rest] = n
                else:
                    del out[rest]
                break
    return Expr._raw(out)


def collect(f: Expr, v: Symbol) -> dict:
    """Split f into {power: coefficient} with respect to ``v``."""
    parts: dict = {}
    for m, c in f.terms.items():
        p = 0
        rest = m
        for pos, (s, e) in enumerate(m):
            if s == v:
                p = e
                rest = m[:pos] + m[pos + 1:]
                break
        parts.setdefault(p, {})[rest] = c
    return {p: Expr._raw(t) for p, t in parts.items()}


def _check_acyclic(mapping: Mapping[Symbol, Expr]) -> None:
    deps = {s: [t for t in e.symbols() if t in mapping] for s, e in mapping.items()}
    state: dict = {}

    def visit(s):
        st = state.get(s)
        if st == 1:
            raise CyclicSubstitution(s)
        if st == 2:
            return
        state[s] = 1
        for t in deps[s]:
            visit(t)
        state[s] = 2

    for s in sorted(deps):
        visit(s)


def substitute(f: Expr, mapping: Mapping, repeat: bool = False) -> Expr:
    """Simultaneous substitution of symbols by expressions.

    With ``repeat`` the substitution is applied until no mapped symbol remains;
    the mapping must then be acyclic.
    """
    if not mapping:
        return f
    mapping = {s: Expr.coerce(v) for s, v in mapping.items()}
    if repeat:
        _check_acyclic(mapping)
        while True:
            g = _substitute_once(f, mapping)
            if not (g.symbols() & mapping.keys()):
                return g
            f = g
    return _substitute_once(f, mapping)


def _substitute_once(f: Expr, mapping: Mapping[Symbol, Expr]) -> Expr:
    powers: dict = {}
    out = ZERO
    acc: dict = {}
    for m, c in f.terms.items():
        if not any(s in mapping for s, _ in m):
            n = acc.get(m, 0) + c
            if n:
                acc[m] = n
            else:
                del acc[m]
            continue
        keep = []
        term = None
        for s, e in m:
            r = mapping.get(s)
            if r is None:
                keep.append((s, e))
                continue
            key = (s, e)
            p = powers.get(key)
            if p is None:
                p = r ** e
                powers[key] = p
            term = p if term is None else term * p
        term = term * Expr._raw({tuple(keep): c})
        out = out + term
    return out + Expr._raw(acc)


def evaluate(f: Expr, values: Mapping[Symbol, Number]) -> Fraction:
    """Numeric value of ``f``; raises UnboundSymbol for any unassigned symbol."""
    total = Fraction(0)
    for m, c in f.terms.items():
        t = c
        for s, e in m:
            try:
                v = values[s]
            except KeyError:
                raise UnboundSymbol(s) from None
            t *= Fraction(v) ** e
        total += t
    return total


def normalize(f: Expr) -> Expr:
    """Canonical form; expressions are always kept canonical, so this is the identity."""
    return Expr._raw(dict(f.terms))


# printing

def _sym_print_key(s: Symbol):
    return (-s.kind, -len(s.idx), s.name, s.idx)


def _mono_print_key(m: Monomial):
    return (-sum(e for s, e in m if s.kind == JET),
            [(_sym_print_key(s), -e) for s, e in sorted(m, key=lambda se: _sym_print_key(se[0]))])


def _format_symbol(s: Symbol, dsl: bool) -> str:
    if not dsl or not s.idx:
        return str(s)
    op = "d" if s.kind == JET else "D"
    return f"{op}({s.name}, {', '.join(s.idx)})"


def _format_coeff(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def format_expr(f: Expr, dsl: bool = False) -> str:
    """Human readable text; with ``dsl`` the output parses back in theory files."""
    if not f.terms:
        return "0"
    parts = []
    for m in sorted(f.terms, key=_mono_print_key):
        c = f.terms[m]
        factors = []
        for s, e in sorted(m, key=lambda se: _sym_print_key(se[0])):
            txt = _format_symbol(s, dsl)
            if e != 1:
                txt += f"^{e}" if e > 0 else f"^({e})"
            factors.append(txt)
        mag = abs(c)
        if not factors:
            body = _format_coeff(mag)
        elif mag == 1:
            body = "*".join(factors)
        else:
            body = "*".join([_format_coeff(mag)] + factors)
        sign = "-" if c < 0 else "+"
        parts.append((sign, body))
    first_sign, first = parts[0]
    out = ("-" if first_sign == "-" else "") + first
    for sign, body in parts[1:]:
        out += f" {sign} {body}"
    return out
