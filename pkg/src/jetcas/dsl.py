"""Theory-file language: tokenizer, recursive-descent parser, index expansion, printer.

Example::

    range i j k = 1..3;
    bundle mstat { base: x[i]; fiber: B[i]; }
    functions I[i] on x1 x2 x3;
    system mstatics on mstat {
      eq: eps(i,j,k)*d(B[k], x[j]) - I[i];
      eq: d(B[i], x[i]);
    }

Indices in square brackets are appended to names (``B[k]`` with k=2 is ``B2``).
A free index expands an equation into one scalar equation per value; an index
that occurs twice inside one product or one call is summed there.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Iterable

from .correspondence import BaseCorrespondence, Correspondence
from .errors import DslError, DslSyntaxError, IndexRangeMismatch, UndeclaredName
from .expr import JET, ONE, ZERO, Expr, Symbol, coord, format_expr, func, jet, param, total_derivative
from .jetgeom import BundleSpec
from .symmetry import GeneratorSet, LinearGenerator
from .system import PdeSystem

KEYWORDS = {"bundle", "params", "functions", "range", "tensor", "system", "corr", "gens", "section"}

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<num>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<dots>\.\.)
  | (?P<punct>[{}()\[\];:,=+\-*/^])
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise DslSyntaxError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        col = pos - line_start + 1
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            tokens.append(Token(kind if kind != "punct" else m.group(), m.group(), line, col))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


# expression syntax tree

@dataclass(frozen=True)
class Node:
    line: int
    col: int


@dataclass(frozen=True)
class Num(Node):
    value: int


@dataclass(frozen=True)
class Name(Node):
    name: str
    indices: tuple  # entries: str (index variable) or int (literal)


@dataclass(frozen=True)
class Call(Node):
    fn: str
    args: tuple


@dataclass(frozen=True)
class BinOp(Node):
    op: str
    left: Node
    right: Node


@dataclass(frozen=True)
class Neg(Node):
    operand: Node


@dataclass(frozen=True)
class Pow(Node):
    base: Node
    exp: int


@dataclass(frozen=True)
class Section:
    name: str
    bundle: BundleSpec
    components: tuple  # ((fiber var, Expr), ...)
    bindings: tuple = ()  # ((function name, Expr), ...)

    def as_dict(self) -> dict:
        return dict(self.components)

    def bindings_dict(self) -> dict:
        return dict(self.bindings)


@dataclass
class TheoryFile:
    ranges: dict = field(default_factory=dict)
    tensors: dict = field(default_factory=dict)
    bundles: dict = field(default_factory=dict)
    params: tuple = ()
    functions: dict = field(default_factory=dict)
    systems: dict = field(default_factory=dict)
    corrs: dict = field(default_factory=dict)
    gens: dict = field(default_factory=dict)
    sections: dict = field(default_factory=dict)

    def system(self, name: str) -> PdeSystem:
        return self._get(self.systems, name, "system")

    def corr(self, name: str) -> Correspondence:
        return self._get(self.corrs, name, "correspondence")

    def section(self, name: str) -> Section:
        return self._get(self.sections, name, "section")

    def generator_set(self, name: str) -> GeneratorSet:
        return self._get(self.gens, name, "generator set")

    @staticmethod
    def _get(table: dict, name: str, what: str):
        try:
            return table[name]
        except KeyError:
            known = ", ".join(sorted(table)) or "none"
            raise UndeclaredName(f"no {what} named {name!r} (declared: {known})") from None


class _Scope:
    """Name resolution for expressions living on one bundle."""

    def __init__(self, tf: TheoryFile, bundle: BundleSpec | None):
        self.tf = tf
        self.bundle = bundle

    def symbol(self, name: str, node: Node) -> Symbol:
        b = self.bundle
        if b is not None:
            if name in b.fiber:
                return jet(name)
            if name in b.base:
                return coord(name)
        if name in self.tf.params:
            return param(name)
        if name in self.tf.functions:
            return func(name, self.tf.functions[name])
        raise UndeclaredName(f"undeclared name {name!r}", node.line, node.col)

    def base_var(self, name: str, node: Node) -> str:
        if self.bundle is None or name not in self.bundle.base:
            raise UndeclaredName(f"{name!r} is not a base variable here", node.line, node.col)
        return name


def _levi_civita(values: tuple) -> int:
    if len(set(values)) != len(values):
        return 0
    sign = 1
    vals = list(values)
    for i in range(len(vals)):
        for j in range(i + 1, len(vals)):
            if vals[i] > vals[j]:
                sign = -sign
    return sign


class _Expander:
    """Evaluates syntax trees to Exprs, summing repeated and expanding free indices."""

    def __init__(self, tf: TheoryFile, scope: _Scope):
        self.tf = tf
        self.scope = scope

    def index_range(self, idx: str, node: Node) -> tuple:
        try:
            lo, hi = self.tf.ranges[idx]
        except KeyError:
            raise UndeclaredName(f"undeclared index {idx!r}", node.line, node.col) from None
        return tuple(range(lo, hi + 1))

    def _merge(self, lists: Iterable[list], node: Node) -> tuple:
        counts: dict = {}
        for lst in lists:
            for i in lst:
                counts[i] = counts.get(i, 0) + 1
        bad = [i for i, c in counts.items() if c > 2]
        if bad:
            raise IndexRangeMismatch(f"index {bad[0]!r} occurs more than twice", node.line, node.col)
        return [i for i, c in counts.items() if c == 1], [i for i, c in counts.items() if c == 2]

    def free(self, node: Node) -> list:
        return self._free_summed(node)[0]

    def _free_summed(self, node: Node) -> tuple:
        if isinstance(node, Num):
            return [], []
        if isinstance(node, Name):
            return self._merge([[i for i in node.indices if isinstance(i, str)]], node)
        if isinstance(node, Call):
            if node.fn in ("d", "D"):
                return self._merge([self.free(a) for a in node.args], node)
            # index-valued slots of eps, delta and declared tensors
            slots = []
            for a in node.args:
                if isinstance(a, Name) and not a.indices:
                    if a.name not in self.tf.ranges:
                        raise UndeclaredName(f"undeclared index {a.name!r}", a.line, a.col)
                    slots.append(a.name)
                elif not isinstance(a, Num):
                    raise DslSyntaxError("expected an index", a.line, a.col)
            return self._merge([slots], node)
        if isinstance(node, Neg):
            return self._free_summed(node.operand)[0], []
        if isinstance(node, Pow):
            return self.free(node.base), []
        if isinstance(node, BinOp):
            if node.op in "+-":
                left, right = self.free(node.left), self.free(node.right)
                if set(left) != set(right):
                    raise IndexRangeMismatch(
                        f"terms have different free indices {sorted(left)} and {sorted(right)}",
                        node.line, node.col)
                return left, []
            if node.op == "/":
                if self.free(node.right):
                    raise IndexRangeMismatch("free index in a denominator", node.line, node.col)
                return self.free(node.left), []
            return self._merge([self.free(node.left), self.free(node.right)], node)
        raise TypeError(node)

    def expand(self, node: Node) -> list:
        """All scalar instances of ``node``, one per assignment of its free indices."""
        free = self.free(node)
        ranges = [self.index_range(i, node) for i in free]
        out = []
        for values in product(*ranges):
            out.append(self.eval(node, dict(zip(free, values))))
        return out

    def expand_with(self, nodes: list, anchor: Node) -> list:
        """Joint expansion of several trees over the union of their free indices."""
        free: list = []
        for n in nodes:
            for i in self.free(n):
                if i not in free:
                    free.append(i)
        ranges = [self.index_range(i, anchor) for i in free]
        return [(dict(zip(free, values)), [self.eval(n, dict(zip(free, values))) for n in nodes])
                for values in product(*ranges)]

    def _summed(self, node: Node, env: dict, summed: list, body) -> Expr:
        if not summed:
            return body(env)
        total = ZERO
        ranges = [self.index_range(i, node) for i in summed]
        for values in product(*ranges):
            total = total + body({**env, **dict(zip(summed, values))})
        return total

    def name_of(self, node: Name, env: dict) -> str:
        parts = []
        for i in node.indices:
            if isinstance(i, int):
                parts.append(str(i))
            elif i in env:
                parts.append(str(env[i]))
            else:
                raise IndexRangeMismatch(f"index {i!r} has no value here", node.line, node.col)
        return node.name + "".join(parts)

    def index_value(self, arg: Node, env: dict) -> int:
        if isinstance(arg, Num):
            return arg.value
        if isinstance(arg, Name) and not arg.indices and arg.name in env:
            return env[arg.name]
        raise DslSyntaxError("expected an index", arg.line, arg.col)

    def eval(self, node: Node, env: dict) -> Expr:
        if isinstance(node, Num):
            return Expr.const(node.value)
        if isinstance(node, Name):
            return Expr.sym(self.scope.symbol(self.name_of(node, env), node))
        if isinstance(node, Neg):
            return -self.eval(node.operand, env)
        if isinstance(node, Pow):
            return self.eval(node.base, env) ** node.exp
        if isinstance(node, BinOp):
            if node.op == "+":
                return self.eval(node.left, env) + self.eval(node.right, env)
            if node.op == "-":
                return self.eval(node.left, env) - self.eval(node.right, env)
            if node.op == "/":
                den = self.eval(node.right, env)
                try:
                    return self.eval(node.left, env) * den.inverse()
                except ZeroDivisionError as exc:
                    raise DslError(str(exc), node.line, node.col) from None
            _, summed = self._free_summed(node)
            return self._summed(node, env, summed,
                                lambda e: self.eval(node.left, e) * self.eval(node.right, e))
        if isinstance(node, Call):
            _, summed = self._free_summed(node)
            return self._summed(node, env, summed, lambda e: self._call(node, e))
        raise TypeError(node)

    def _call(self, node: Call, env: dict) -> Expr:
        fn = node.fn
        if fn in ("d", "D"):
            if len(node.args) < 1:
                raise DslSyntaxError(f"{fn}() needs an argument", node.line, node.col)
            f = self.eval(node.args[0], env)
            for a in node.args[1:]:
                if not isinstance(a, Name):
                    raise DslSyntaxError("derivative variables must be names", a.line, a.col)
                v = self.scope.base_var(self.name_of(a, env), a)
                f = total_derivative(f, v)
            return f
        if fn == "delta":
            if len(node.args) != 2:
                raise IndexRangeMismatch("delta takes two indices", node.line, node.col)
            a, b = (self.index_value(x, env) for x in node.args)
            return ONE if a == b else ZERO
        if fn == "eps":
            vals = tuple(self.index_value(x, env) for x in node.args)
            for x in node.args:
                if isinstance(x, Name):
                    if len(self.index_range(x.name, x)) != len(node.args):
                        raise IndexRangeMismatch(
                            f"eps with {len(node.args)} slots used with index {x.name!r} "
                            f"of a different range", x.line, x.col)
            return Expr.const(_levi_civita(vals))
        if fn in self.tf.tensors:
            diag = self.tf.tensors[fn]
            if len(node.args) != 2:
                raise IndexRangeMismatch(f"tensor {fn} takes two indices", node.line, node.col)
            lo = None
            for x in node.args:
                if isinstance(x, Name):
                    r = self.index_range(x.name, x)
                    if len(r) != len(diag):
                        raise IndexRangeMismatch(f"tensor {fn} has size {len(diag)}, index "
                                                 f"{x.name!r} ranges over {len(r)} values", x.line, x.col)
                    lo = r[0]
            lo = 0 if lo is None else lo
            a, b = (self.index_value(x, env) for x in node.args)
            return Expr.const(diag[a - lo]) if a == b else ZERO
        raise UndeclaredName(f"unknown function {fn!r}", node.line, node.col)


class Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.pos = 0
        self.tf = TheoryFile()

    # token helpers
    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def error(self, msg: str, tok: Token | None = None):
        tok = tok or self.tok
        found = tok.text or "end of input"
        raise DslSyntaxError(f"{msg}, found {found!r}", tok.line, tok.col)

    def accept(self, kind: str, text: str | None = None) -> Token | None:
        t = self.tok
        if t.kind == kind and (text is None or t.text == text):
            self.pos += 1
            return t
        return None

    def expect(self, kind: str, text: str | None = None) -> Token:
        t = self.accept(kind, text)
        if t is None:
            self.error(f"expected {text or kind}")
        return t

    def keyword(self, word: str) -> Token:
        return self.expect("ident", word)

    def at_keyword(self, word: str) -> bool:
        return self.tok.kind == "ident" and self.tok.text == word

    # file level
    def parse(self) -> TheoryFile:
        while self.tok.kind != "eof":
            t = self.tok
            if t.kind != "ident" or t.text not in KEYWORDS:
                self.error("expected a declaration (" + ", ".join(sorted(KEYWORDS)) + ")")
            getattr(self, f"decl_{t.text}")()
        return self.tf

    def _check_new(self, name: str, tok: Token) -> None:
        tf = self.tf
        taken = set(tf.params) | set(tf.functions)
        for b in tf.bundles.values():
            taken |= set(b.base) | set(b.fiber)
        if name in taken:
            raise DslError(f"name {name!r} declared twice", tok.line, tok.col)

    def name_item(self) -> list:
        """IDENT or IDENT[idx, ...] expanded over the declared ranges."""
        t = self.expect("ident")
        if not self.accept("["):
            return [t.text]
        idx = []
        while True:
            i = self.tok
            if self.accept("num"):
                idx.append([i.text])
            else:
                i = self.expect("ident")
                if i.text not in self.tf.ranges:
                    raise UndeclaredName(f"undeclared index {i.text!r}", i.line, i.col)
                lo, hi = self.tf.ranges[i.text]
                idx.append([str(v) for v in range(lo, hi + 1)])
            if not self.accept(","):
                break
        self.expect("]")
        return [t.text + "".join(vals) for vals in product(*idx)]

    def name_list(self, stop: tuple = (";",)) -> list:
        names = []
        while self.tok.kind not in stop and not (self.tok.kind == "ident" and self.tok.text in ("on",)):
            names.extend(self.name_item())
            self.accept(",")
        return names

    def decl_range(self):
        self.keyword("range")
        names = []
        while not self.accept("="):
            names.append(self.expect("ident").text)
            self.accept(",")
        lo = self.signed_int()
        self.expect("dots")
        hi = self.signed_int()
        self.expect(";")
        if hi < lo:
            self.error("empty index range")
        for n in names:
            self.tf.ranges[n] = (lo, hi)

    def signed_int(self) -> int:
        neg = self.accept("-") is not None
        v = int(self.expect("num").text)
        return -v if neg else v

    def rational(self) -> Fraction:
        neg = self.accept("-") is not None
        v = Fraction(int(self.expect("num").text))
        if self.accept("/"):
            v /= int(self.expect("num").text)
        return -v if neg else v

    def decl_tensor(self):
        self.keyword("tensor")
        name = self.expect("ident")
        self.expect("=")
        self.keyword("diag")
        self.expect("(")
        vals = [self.rational()]
        while self.accept(","):
            vals.append(self.rational())
        self.expect(")")
        self.expect(";")
        self.tf.tensors[name.text] = tuple(vals)

    def decl_bundle(self):
        self.keyword("bundle")
        name = self.expect("ident")
        self.expect("{")
        self.keyword("base")
        self.expect(":")
        base = self.name_list()
        self.expect(";")
        self.keyword("fiber")
        self.expect(":")
        fiber = self.name_list()
        self.expect(";")
        self.expect("}")
        for n in fiber:
            if n in self.tf.params or n in self.tf.functions:
                raise DslError(f"name {n!r} declared twice", name.line, name.col)
        try:
            self.tf.bundles[name.text] = BundleSpec(tuple(base), tuple(fiber), name.text)
        except ValueError as exc:
            raise DslError(str(exc), name.line, name.col) from None

    def decl_params(self):
        t = self.keyword("params")
        self.accept(":")
        names = self.name_list()
        self.expect(";")
        for n in names:
            self._check_new(n, t)
        self.tf.params = self.tf.params + tuple(names)

    def decl_functions(self):
        t = self.keyword("functions")
        self.accept(":")
        names = self.name_list()
        self.keyword("on")
        args = self.name_list()
        self.expect(";")
        for n in names:
            self._check_new(n, t)
            self.tf.functions[n] = tuple(args)

    def bundle_ref(self) -> BundleSpec:
        t = self.expect("ident")
        if t.text not in self.tf.bundles:
            raise UndeclaredName(f"undeclared bundle {t.text!r}", t.line, t.col)
        return self.tf.bundles[t.text]

    def decl_system(self):
        self.keyword("system")
        name = self.expect("ident")
        self.keyword("on")
        bundle = self.bundle_ref()
        order = -1
        if self.at_keyword("order"):
            self.keyword("order")
            order = int(self.expect("num").text)
        self.expect("{")
        ex = _Expander(self.tf, _Scope(self.tf, bundle))
        eqs = []
        while not self.accept("}"):
            self.keyword("eq")
            self.expect(":")
            node = self.expr()
            self.expect(";")
            eqs.extend(ex.expand(node))
        try:
            self.tf.systems[name.text] = PdeSystem(bundle, tuple(eqs), order, name.text)
        except ValueError as exc:
            raise DslError(str(exc), name.line, name.col) from None

    def decl_corr(self):
        self.keyword("corr")
        name = self.expect("ident")
        self.keyword("from")
        src = self.bundle_ref()
        self.keyword("to")
        dst = self.bundle_ref()
        self.expect("{")
        self.keyword("base")
        self.expect(":")
        base = self.base_spec()
        self.expect(";")
        ex = _Expander(self.tf, _Scope(self.tf, src))
        comps: dict = {}
        while not self.accept("}"):
            self.keyword("map")
            self.expect(":")
            target = self.primary()
            if not isinstance(target, Name):
                self.error("expected a target fiber variable")
            self.expect("=")
            node = self.expr()
            self.expect(";")
            free_t = [i for i in target.indices if isinstance(i, str)]
            if not set(ex.free(node)) <= set(free_t):
                raise IndexRangeMismatch("map target and expression have different free indices",
                                         target.line, target.col)
            ranges = [ex.index_range(i, target) for i in free_t]
            for values in product(*ranges):
                env = dict(zip(free_t, values))
                tname = ex.name_of(target, env)
                if tname not in dst.fiber:
                    raise UndeclaredName(f"{tname!r} is not a fiber variable of {dst.name!r}",
                                         target.line, target.col)
                comps[tname] = ex.eval(node, env)
        missing = [f for f in dst.fiber if f not in comps]
        if missing:
            raise DslError(f"correspondence {name.text!r} does not define {', '.join(missing)}",
                           name.line, name.col)
        try:
            self.tf.corrs[name.text] = Correspondence(name.text, src, dst, base,
                                                      tuple(comps[f] for f in dst.fiber))
        except Exception as exc:
            raise DslError(str(exc), name.line, name.col) from None

    def base_spec(self) -> BaseCorrespondence:
        t = self.expect("ident")
        if t.text == "identity":
            return BaseCorrespondence("identity")
        if t.text == "project":
            self.expect("(")
            self.keyword("drop")
            names = self.name_list((")",))
            self.expect(")")
            return BaseCorrespondence("projection", tuple(names))
        if t.text == "section":
            self.expect("(")
            fixed = []
            while True:
                v = self.expect("ident").text
                self.expect("=")
                fixed.append((v, self.rational()))
                if not self.accept(","):
                    break
            self.expect(")")
            return BaseCorrespondence("section", (), tuple(fixed))
        self.error("expected identity, project(...) or section(...)", t)

    def decl_gens(self):
        self.keyword("gens")
        name = self.expect("ident")
        self.keyword("on")
        bundle = self.bundle_ref()
        order = None
        if self.at_keyword("order"):
            self.keyword("order")
            order = int(self.expect("num").text)
        self.expect("{")
        ex = _Expander(self.tf, _Scope(self.tf, bundle))
        gens = []
        seen = set()
        while not self.accept("}"):
            anchor = self.keyword("gen")
            self.expect(":")
            pairs = []
            while True:
                v = self.expr()
                self.expect(":")
                c = self.expr()
                pairs.append((v, c))
                if not self.accept(","):
                    break
            self.expect(";")
            nodes = [n for pair in pairs for n in pair]
            for env, vals in ex.expand_with(nodes, Name(anchor.line, anchor.col, "gen", ())):
                coeffs = []
                for (vnode, _), v, c in zip(pairs, vals[0::2], vals[1::2]):
                    if len(v.terms) != 1 or list(v.terms.values())[0] != 1:
                        raise DslError("generator slot must be a single jet coordinate", vnode.line, vnode.col)
                    (m,) = v.terms
                    if len(m) != 1 or m[0][1] != 1 or m[0][0].kind != JET:
                        raise DslError("generator slot must be a single jet coordinate", vnode.line, vnode.col)
                    # a template may name one symmetric coordinate several times; count it once
                    if (m[0][0], c) not in coeffs:
                        coeffs.append((m[0][0], c))
                try:
                    g = LinearGenerator(tuple(coeffs))
                except ValueError:
                    continue
                if g not in seen:
                    seen.add(g)
                    gens.append(g)
        top = max((g.order for g in gens), default=0)
        self.tf.gens[name.text] = GeneratorSet(name.text, bundle, top if order is None else order, tuple(gens))

    def decl_section(self):
        self.keyword("section")
        name = self.expect("ident")
        self.keyword("on")
        bundle = self.bundle_ref()
        self.expect("{")
        ex = _Expander(self.tf, _Scope(self.tf, bundle))
        comps: dict = {}
        binds: dict = {}
        while not self.accept("}"):
            is_bind = self.at_keyword("bind")
            if is_bind:
                self.keyword("bind")
            target = self.primary()
            if not isinstance(target, Name):
                self.error("expected a variable name")
            self.expect("=")
            node = self.expr()
            self.expect(";")
            free_t = [i for i in target.indices if isinstance(i, str)]
            if not set(ex.free(node)) <= set(free_t):
                raise IndexRangeMismatch("left and right side have different free indices",
                                         target.line, target.col)
            for values in product(*[ex.index_range(i, target) for i in free_t]):
                env = dict(zip(free_t, values))
                tname = ex.name_of(target, env)
                val = ex.eval(node, env)
                if val.has_jets():
                    raise DslError("section components must not contain jet coordinates",
                                   target.line, target.col)
                if is_bind:
                    if tname not in self.tf.functions:
                        raise UndeclaredName(f"{tname!r} is not a declared function", target.line, target.col)
                    binds[tname] = val
                else:
                    if tname not in bundle.fiber:
                        raise UndeclaredName(f"{tname!r} is not a fiber variable of {bundle.name!r}",
                                             target.line, target.col)
                    comps[tname] = val
        missing = [f for f in bundle.fiber if f not in comps]
        if missing:
            raise DslError(f"section {name.text!r} does not define {', '.join(missing)}", name.line, name.col)
        self.tf.sections[name.text] = Section(name.text, bundle,
                                              tuple((f, comps[f]) for f in bundle.fiber),
                                              tuple(sorted(binds.items())))

    # expressions
    def expr(self) -> Node:
        left = self.term()
        while self.tok.kind in ("+", "-"):
            op = self.tok
            self.pos += 1
            left = BinOp(op.line, op.col, op.kind, left, self.term())
        return left

    def term(self) -> Node:
        left = self.unary()
        while self.tok.kind in ("*", "/"):
            op = self.tok
            self.pos += 1
            left = BinOp(op.line, op.col, op.kind, left, self.unary())
        return left

    def unary(self) -> Node:
        t = self.accept("-")
        if t:
            return Neg(t.line, t.col, self.unary())
        if self.accept("+"):
            return self.unary()
        return self.power()

    def power(self) -> Node:
        base = self.primary()
        t = self.accept("^")
        if t:
            if self.accept("("):
                e = self.signed_int()
                self.expect(")")
            else:
                e = self.signed_int()
            return Pow(t.line, t.col, base, e)
        return base

    def primary(self) -> Node:
        t = self.tok
        if self.accept("num"):
            return Num(t.line, t.col, int(t.text))
        if self.accept("("):
            e = self.expr()
            self.expect(")")
            return e
        if self.accept("ident"):
            if self.accept("("):
                args = []
                if not self.accept(")"):
                    args.append(self.expr())
                    while self.accept(","):
                        args.append(self.expr())
                    self.expect(")")
                return Call(t.line, t.col, t.text, tuple(args))
            idx = []
            if self.accept("["):
                while True:
                    i = self.tok
                    if self.accept("num"):
                        idx.append(int(i.text))
                    else:
                        i = self.expect("ident")
                        if i.text not in self.tf.ranges:
                            raise UndeclaredName(f"undeclared index {i.text!r}", i.line, i.col)
                        idx.append(i.text)
                    if not self.accept(","):
                        break
                self.expect("]")
            return Name(t.line, t.col, t.text, tuple(idx))
        self.error("expected an expression")


def parse(text: str) -> TheoryFile:
    return Parser(text).parse()


def parse_file(path) -> TheoryFile:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())


def parse_expressions(text: str, tf: TheoryFile, bundle: BundleSpec | None) -> list:
    """Parse a standalone expression (free indices expand) against a theory file."""
    p = Parser(text)
    p.tf = tf
    node = p.expr()
    if p.tok.kind != "eof":
        p.error("unexpected trailing input")
    return _Expander(tf, _Scope(tf, bundle)).expand(node)


def parse_assignment(text: str, tf: TheoryFile, bundle: BundleSpec | None) -> dict:
    """``"u1=0, d(u1,x1)=2/3"`` -> {Symbol: Fraction}."""
    p = Parser(text)
    p.tf = tf
    ex = _Expander(tf, _Scope(tf, bundle))
    out = {}
    while p.tok.kind != "eof":
        node = p.expr()
        p.expect("=")
        val = p.rational()
        for e in ex.expand(node):
            if len(e.terms) != 1 or list(e.terms.values())[0] != 1:
                raise DslError("left side of an assignment must be a single symbol", node.line, node.col)
            (m,) = e.terms
            if len(m) != 1 or m[0][1] != 1:
                raise DslError("left side of an assignment must be a single symbol", node.line, node.col)
            out[m[0][0]] = val
        if not p.accept(","):
            break
    if p.tok.kind != "eof":
        p.error("unexpected trailing input")
    return out


# printing

def _names(names: Iterable[str]) -> str:
    return " ".join(names)


def to_text(tf: TheoryFile) -> str:
    """Render a theory file; parsing the result yields an equal TheoryFile."""
    out = []
    for n, (lo, hi) in tf.ranges.items():
        out.append(f"range {n} = {lo}..{hi};")
    for n, diag in tf.tensors.items():
        out.append(f"tensor {n} = diag({', '.join(str(v) for v in diag)});")
    for b in tf.bundles.values():
        out.append(f"bundle {b.name} {{ base: {_names(b.base)}; fiber: {_names(b.fiber)}; }}")
    if tf.params:
        out.append(f"params {_names(tf.params)};")
    for n, args in tf.functions.items():
        out.append(f"functions {n} on {_names(args)};")
    for s in tf.systems.values():
        out.append(f"system {s.name} on {s.bundle.name} order {s.order} {{")
        for e in s.equations:
            out.append(f"  eq: {format_expr(e, dsl=True)};")
        out.append("}")
    for c in tf.corrs.values():
        out.append(f"corr {c.name} from {c.source.name} to {c.target.name} {{")
        out.append(f"  base: {c.base.describe()};")
        for f, e in zip(c.target.fiber, c.components):
            out.append(f"  map: {f} = {format_expr(e, dsl=True)};")
        out.append("}")
    for g in tf.gens.values():
        out.append(f"gens {g.name} on {g.bundle.name} order {g.order} {{")
        for gen in g.generators:
            pairs = ", ".join(f"{format_expr(Expr.sym(s), dsl=True)} : {format_expr(c, dsl=True)}"
                              for s, c in gen.coefficients)
            out.append(f"  gen: {pairs};")
        out.append("}")
    for s in tf.sections.values():
        out.append(f"section {s.name} on {s.bundle.name} {{")
        for f, e in s.components:
            out.append(f"  {f} = {format_expr(e, dsl=True)};")
        for f, e in s.bindings:
            out.append(f"  bind {f} = {format_expr(e, dsl=True)};")
        out.append("}")
    return "\n".join(out) + "\n"
