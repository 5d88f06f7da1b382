"""PDE systems: prolongation, solved form, reduction, integrability conditions, completion."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import Inconsistent, MissingBaseFunc, NotSolvable
from .expr import (COORD, FUNC, JET, PARAM, ZERO, Expr, Symbol, collect, coord,
                   partial, substitute, total_derivative)
from .jetgeom import BundleSpec, jet_coords_upto


@dataclass(frozen=True)
class PdeSystem:
    """Equations Phi^h = 0 on J^order of a bundle."""

    bundle: BundleSpec
    equations: tuple
    order: int = -1
    name: str = ""

    def __post_init__(self):
        eqs = tuple(self.equations)
        object.__setattr__(self, "equations", eqs)
        present = max((e.max_order() for e in eqs), default=0)
        if self.order < 0:
            object.__setattr__(self, "order", max(present, 0))
        elif present > self.order:
            raise ValueError(f"system {self.name!r} has jets of order {present} > declared order {self.order}")
        for e in eqs:
            for s in e.jets():
                if s.name not in self.bundle.fiber or any(v not in self.bundle.base for v in s.idx):
                    raise ValueError(f"{s} is not a coordinate of bundle {self.bundle.name!r}")

    def with_equations(self, equations, order: int | None = None, name: str | None = None) -> "PdeSystem":
        return PdeSystem(self.bundle, tuple(equations), self.order if order is None else order,
                         self.name if name is None else name)

    def __len__(self) -> int:
        return len(self.equations)


def dedupe(exprs: Iterable[Expr]) -> list:
    """Drop zeros and repeated canonical forms, keeping first occurrences."""
    seen = set()
    out = []
    for e in exprs:
        if e.is_zero or e in seen:
            continue
        seen.add(e)
        out.append(e)
    return out


# ranking

@dataclass(frozen=True)
class Ranking:
    """Orders jet coordinates: block, total order, base-variable counts by priority, dependent."""

    priority: tuple
    deps: tuple
    blocks: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "priority", tuple(self.priority))
        object.__setattr__(self, "deps", tuple(self.deps))
        object.__setattr__(self, "blocks", tuple(tuple(b) for b in self.blocks))
        object.__setattr__(self, "_dep_rank", {d: len(self.deps) - i for i, d in enumerate(self.deps)})
        nb = len(self.blocks)
        object.__setattr__(self, "_block", {d: nb - i for i, b in enumerate(self.blocks) for d in b})

    @classmethod
    def for_bundle(cls, bundle: BundleSpec, priority: Sequence[str] | None = None) -> "Ranking":
        prio = tuple(priority) if priority else bundle.base
        if sorted(prio) != sorted(bundle.base):
            raise ValueError(f"ranking order {list(prio)} must be a permutation of {list(bundle.base)}")
        return cls(prio, bundle.fiber)

    def key(self, s: Symbol) -> tuple:
        return (self._block.get(s.name, 0), s.order,
                tuple(s.idx.count(v) for v in self.priority), self._dep_rank.get(s.name, 0))

    def leader(self, f: Expr) -> Symbol | None:
        js = f.jets()
        return max(js, key=self.key) if js else None

    def describe(self) -> dict:
        out = {"priority": list(self.priority), "dependents": list(self.deps)}
        if self.blocks:
            out["blocks"] = [list(b) for b in self.blocks]
        return out


def _ranking(sys_or_bundle, ranking: Ranking | None) -> Ranking:
    if ranking is not None:
        return ranking
    bundle = sys_or_bundle.bundle if isinstance(sys_or_bundle, PdeSystem) else sys_or_bundle
    return Ranking.for_bundle(bundle)


def monic(f: Expr, ranking: Ranking | None = None) -> Expr:
    """Scale ``f`` so that its leading coefficient is 1 (up to parameters)."""
    if f.is_zero:
        return f
    lead = ranking.leader(f) if ranking is not None else None
    if lead is not None:
        parts = collect(f, lead)
        coef = parts[max(parts)]
        if len(coef.terms) == 1:
            (m, c), = coef.terms.items()
            if all(s.kind == PARAM for s, _ in m):
                return f * coef.inverse()
    top = max(f.terms, key=lambda m: (sum(e for s, e in m if s.kind == JET), m))
    return f.scale(1 / f.terms[top])


# prolongation

def prolong(sys: PdeSystem, l: int) -> PdeSystem:
    """All total derivatives D_alpha Phi^h with |alpha| <= l, deduplicated."""
    if l < 0:
        raise ValueError("prolongation order must be nonnegative")
    if l == 0:
        return sys
    base = sys.bundle.base
    pos = {v: i for i, v in enumerate(base)}
    level = [(e, -1) for e in sys.equations]
    out = list(sys.equations)
    for _ in range(l):
        nxt = []
        for e, last in level:
            for v in base[max(last, 0):] if last >= 0 else base:
                nxt.append((total_derivative(e, v), pos[v]))
        # keep one derivative per multi-index by only differentiating in non-decreasing order
        level = nxt
        out.extend(e for e, _ in nxt)
    return PdeSystem(sys.bundle, tuple(dedupe(out)), sys.order + l, sys.name)


# solved form

@dataclass(frozen=True)
class OrthonomicSystem:
    """Triangular rewrite rules leader -> rhs, plus jet-free relations set aside."""

    rules: tuple
    assumptions: tuple
    ranking: Ranking
    mapping: dict = field(compare=False, repr=False, default=None)

    def __post_init__(self):
        object.__setattr__(self, "mapping", dict(self.rules))

    @property
    def leaders(self) -> list:
        return [l for l, _ in self.rules]

    def equations(self) -> list:
        return [Expr.sym(l) - r for l, r in self.rules]

    def __len__(self) -> int:
        return len(self.rules)


def _isolate(r: Expr, leader: Symbol, eq: Expr) -> Expr:
    parts = collect(r, leader)
    if max(parts) > 1:
        raise NotSolvable(eq, leader, "leader occurs nonlinearly")
    coef = parts[1]
    if coef.has_jets() or any(s.kind in (FUNC, COORD) for s in coef.symbols()):
        raise NotSolvable(eq, leader, f"coefficient {coef} is not a constant")
    try:
        inv = coef.inverse()
    except ZeroDivisionError:
        raise NotSolvable(eq, leader, f"coefficient {coef} is not invertible") from None
    return -(parts.get(0, ZERO) * inv)


def solved_form(equations, ranking: Ranking | None = None) -> OrthonomicSystem:
    """Autoreduce equations into rules, each solved for its maximal jet under ``ranking``."""
    if isinstance(equations, PdeSystem):
        ranking = _ranking(equations, ranking)
        equations = equations.equations
    if ranking is None:
        raise ValueError("a ranking is required when passing bare equations")
    rules: dict = {}
    users: dict = {}  # symbol -> set of leaders whose rhs mention it
    assumptions: list = []
    for eq in equations:
        r = substitute(eq, rules) if rules else eq
        if r.is_zero:
            continue
        if not r.has_jets():
            if r.is_constant:
                raise Inconsistent(eq, r.constant_value)
            a = monic(r)
            if a not in assumptions:
                assumptions.append(a)
            continue
        leader = ranking.leader(r)
        rhs = _isolate(r, leader, eq)
        for l in sorted(users.pop(leader, ()), key=ranking.key):
            old = rules[l]
            new = substitute(old, {leader: rhs})
            rules[l] = new
            for s in old.symbols():
                if s not in new.symbols():
                    users.get(s, set()).discard(l)
            for s in new.symbols():
                users.setdefault(s, set()).add(l)
        rules[leader] = rhs
        for s in rhs.symbols():
            users.setdefault(s, set()).add(leader)
    ordered = tuple(sorted(rules.items(), key=lambda lr: ranking.key(lr[0]), reverse=True))
    return OrthonomicSystem(ordered, tuple(assumptions), ranking)


def reduce(f: Expr, ortho: OrthonomicSystem, working_order: int | None = None,
           bundle: BundleSpec | None = None) -> Expr:
    """Normal form of ``f``; with ``working_order`` the rules are first closed
    under total derivatives up to that jet order."""
    if working_order is not None:
        if bundle is None:
            raise ValueError("bundle required to extend rules by derivatives")
        ortho = extend_rules(ortho, bundle, working_order)
    if not ortho.rules:
        return f
    return substitute(f, ortho.mapping)


def extend_rules(ortho: OrthonomicSystem, bundle: BundleSpec, order: int) -> OrthonomicSystem:
    """Solved form of the rules together with their total derivatives up to ``order``."""
    eqs = ortho.equations()
    if not eqs:
        return ortho
    top = max(e.max_order() for e in eqs)
    if top >= order:
        return ortho
    sys = PdeSystem(bundle, tuple(eqs), top)
    pro = prolong(sys, order - top)
    return solved_form(list(pro.equations) + list(ortho.assumptions), ortho.ranking)


# integrability conditions and completion

def split_conditions(conds: Iterable[Expr]) -> tuple:
    """Separate jet conditions from relations among given functions and parameters."""
    jets, assumptions = [], []
    for c in conds:
        (jets if c.has_jets() else assumptions).append(c)
    return jets, assumptions


def integrability_conditions(sys: PdeSystem, ranking: Ranking | None = None) -> list:
    """Constraints of order <= k that only become visible after one prolongation.

    Both the system and its first prolongation are brought to solved form under a
    ranking graded by order; every rule of the prolonged form with leader of order
    <= k, and every jet-free relation, is reduced modulo the unprolonged form.
    The nonzero remainders are returned monic, deduplicated and sorted.
    """
    ranking = _ranking(sys, ranking)
    ortho = solved_form(sys, ranking)
    ortho_p = solved_form(prolong(sys, 1).equations, ranking)
    candidates = [Expr.sym(l) - r for l, r in ortho_p.rules if l.order <= sys.order]
    known = set(ortho.assumptions)
    candidates += [a for a in ortho_p.assumptions if a not in known]
    out = []
    for c in candidates:
        r = reduce(c, ortho)
        if not r.is_zero:
            out.append(monic(r, ranking))
    return sorted(dedupe(out), key=lambda e: (ranking.key(ranking.leader(e)) if e.has_jets() else (),
                                              e.sort_key()), reverse=True)


@dataclass(frozen=True)
class CompletionResult:
    system: PdeSystem
    trail: tuple
    status: str
    assumptions: tuple = ()
    detail: str = ""

    @property
    def iterations(self) -> int:
        return len(self.trail)


def complete(sys: PdeSystem, max_iter: int = 5, ranking: Ranking | None = None) -> CompletionResult:
    """Adjoin integrability conditions until none arise, a contradiction appears, or the cap hits.

    Status is one of ``completed``, ``inconsistent``, ``iteration_cap`` or
    ``not_solvable`` (an equation became nonlinear in every usable leader).
    """
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")
    ranking = _ranking(sys, ranking)
    current = sys
    trail: list = []
    assumptions: list = []
    for it in range(max_iter + 1):
        try:
            conds = integrability_conditions(current, ranking)
        except Inconsistent as exc:
            return CompletionResult(current, tuple(trail), "inconsistent", tuple(assumptions), str(exc))
        except NotSolvable as exc:
            return CompletionResult(current, tuple(trail), "not_solvable", tuple(assumptions), str(exc))
        jets, assum = split_conditions(conds)
        for a in assum:
            if a not in assumptions:
                assumptions.append(a)
        if not jets:
            return CompletionResult(current, tuple(trail), "completed", tuple(assumptions))
        if it == max_iter:
            break
        trail.append(tuple(jets))
        current = current.with_equations(current.equations + tuple(jets))
    return CompletionResult(current, tuple(trail), "iteration_cap", tuple(assumptions))


def parametric_jets(sys: PdeSystem, ranking: Ranking | None = None) -> list:
    """Jet coordinates of order <= k that are not leaders of the solved form."""
    ortho = solved_form(sys, _ranking(sys, ranking))
    leaders = set(ortho.leaders)
    return [s for s in jet_coords_upto(sys.bundle, sys.order) if s not in leaders]


# solutions

def _section_jet(poly: Expr, sigma: tuple) -> Expr:
    for v in sigma:
        poly = partial(poly, coord(v))
    return poly


def jet_of_section(section: Mapping[str, Expr], symbols: Iterable[Symbol],
                   bindings: Mapping[str, Expr] | None = None) -> dict:
    """Values of jet coordinates (and bound functions) along a polynomial section."""
    bindings = bindings or {}
    out = {}
    for s in symbols:
        if s.kind == JET and s.name in section:
            out[s] = _section_jet(section[s.name], s.idx)
        elif s.kind == FUNC and s.name in bindings:
            out[s] = _section_jet(bindings[s.name], s.idx)
    return out


@dataclass(frozen=True)
class VerifyResult:
    ok: bool
    residuals: tuple

    def __bool__(self) -> bool:
        return self.ok


def verify_solution(sys: PdeSystem, section: Mapping[str, Expr], l: int = 0,
                    bindings: Mapping[str, Expr] | None = None,
                    point: Mapping[str, Fraction] | None = None) -> VerifyResult:
    """Substitute j^{k+l}(section) into prolong(sys, l).

    Without ``point`` the residuals must vanish identically; with ``point`` they
    are evaluated at that base point, which checks a truncated series to the
    order the prolongation reaches.
    """
    missing = [f for f in sys.bundle.fiber if f not in section]
    if missing:
        raise ValueError(f"section does not define {', '.join(missing)}")
    pro = prolong(sys, l)
    residuals = []
    for eq in pro.equations:
        r = substitute(eq, jet_of_section(section, eq.symbols(), bindings))
        funcs = r.funcs()
        if funcs:
            raise MissingBaseFunc(r, funcs)
        if point:
            r = substitute(r, {coord(v): Expr.const(Fraction(c)) for v, c in point.items()})
        residuals.append(r)
    return VerifyResult(all(r.is_zero for r in residuals), tuple(residuals))
