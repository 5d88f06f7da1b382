"""Correspondences between theories: pullback, intersection, shared structure, solution transfer."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .errors import BundleMismatch, NotSolvable
from .expr import (COORD, JET, PARAM, ZERO, Expr, Symbol, collect, coord, format_expr,
                   substitute, total_derivative)
from .integrability import (FI_AFTER_COMPLETION, FORMALLY_INTEGRABLE, INCONCLUSIVE, INCONSISTENT,
                            FiOptions, FiReport, check_formal_integrability)
from .jetgeom import BundleSpec
from .system import (PdeSystem, Ranking, complete, dedupe, extend_rules, jet_of_section,
                     prolong, reduce, solved_form)


@dataclass(frozen=True)
class BaseCorrespondence:
    """Adapted-coordinate base map: identity, projection dropping variables, or constant section."""

    kind: str
    dropped: tuple = ()
    fixed: tuple = ()  # ((target base var, Fraction), ...)

    def __post_init__(self):
        if self.kind not in ("identity", "projection", "section"):
            raise ValueError(f"unknown base correspondence {self.kind!r}")
        object.__setattr__(self, "dropped", tuple(self.dropped))
        object.__setattr__(self, "fixed", tuple((v, Fraction(c)) for v, c in self.fixed))

    def check(self, source: BundleSpec, target: BundleSpec) -> None:
        if self.kind == "identity":
            ok = source.base == target.base
        elif self.kind == "projection":
            ok = tuple(v for v in source.base if v not in self.dropped) == target.base and \
                all(v in source.base for v in self.dropped)
        else:
            extra = {v for v, _ in self.fixed}
            ok = tuple(v for v in target.base if v not in extra) == source.base and \
                extra <= set(target.base)
        if not ok:
            raise BundleMismatch(f"{self.describe()} does not map base {list(source.base)} "
                                 f"to {list(target.base)}")

    def describe(self) -> str:
        if self.kind == "identity":
            return "identity"
        if self.kind == "projection":
            return f"project(drop {' '.join(self.dropped)})"
        inner = ", ".join(f"{v}={c}" for v, c in self.fixed)
        return f"section({inner})"


@dataclass(frozen=True)
class Correspondence:
    """Differential operator from J^n(source) to the target fiber, one component per target fiber variable."""

    name: str
    source: BundleSpec
    target: BundleSpec
    base: BaseCorrespondence
    components: tuple

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        self.base.check(self.source, self.target)
        if len(self.components) != self.target.e:
            raise ValueError(f"correspondence {self.name!r} needs {self.target.e} components")
        for c in self.components:
            for s in c.jets():
                if s.name not in self.source.fiber:
                    raise BundleMismatch(f"{s} is not a jet of {self.source.name!r}")

    @property
    def order(self) -> int:
        return max((c.max_order() for c in self.components), default=0) if self.components else 0

    def component(self, fiber_var: str) -> Expr:
        return self.components[self.target.fiber.index(fiber_var)]


def identity_correspondence(bundle: BundleSpec, name: str = "identity") -> Correspondence:
    return Correspondence(name, bundle, bundle, BaseCorrespondence("identity"),
                          tuple(Expr.sym(Symbol(JET, f)) for f in bundle.fiber))


def _pullback_mapping(corr: Correspondence, symbols) -> dict:
    fixed = dict(corr.base.fixed)
    mapping = {}
    for s in symbols:
        if s.kind == JET:
            if any(v in fixed for v in s.idx):
                mapping[s] = ZERO
                continue
            d = corr.component(s.name)
            for v in s.idx:
                d = total_derivative(d, v)
            mapping[s] = d
        elif s.kind == COORD and s.name in fixed:
            mapping[s] = Expr.const(fixed[s.name])
    return mapping


def pullback_equation(corr: Correspondence, sysF: PdeSystem) -> PdeSystem:
    """Replace every target jet w^h_beta by D_beta of the h-th component.

    Derivatives transverse to a constant section vanish and the fixed
    coordinates take their assigned values.  Zero equations are kept so the
    result lines up with the target equations one to one.
    """
    if sysF.bundle.base != corr.target.base or sysF.bundle.fiber != corr.target.fiber:
        raise BundleMismatch(f"system {sysF.name!r} does not live on the target of {corr.name!r}")
    out = []
    for eq in sysF.equations:
        out.append(substitute(eq, _pullback_mapping(corr, eq.symbols())))
    order = corr.order + sysF.order
    return PdeSystem(corr.source, tuple(out), order, f"{corr.name}*{sysF.name}")


@dataclass(frozen=True)
class IntersectionResult:
    N: int
    K: int
    L: int
    ell: int
    joint: PdeSystem
    pulled_back: PdeSystem
    prolonged_E: PdeSystem


def intersection_orders(k: int, n: int, l: int) -> tuple:
    N = max(k, n + l)
    K, L = N - k, N - n
    return N, K, L, L - l


def intersect(sysE: PdeSystem, corr: Correspondence, sysF: PdeSystem) -> IntersectionResult:
    """Joint system p^K(E) together with the pullback of p^ell(F) on J^N(source)."""
    if sysE.bundle.base != corr.source.base or sysE.bundle.fiber != corr.source.fiber:
        raise BundleMismatch(f"system {sysE.name!r} does not live on the source of {corr.name!r}")
    N, K, L, ell = intersection_orders(sysE.order, corr.order, sysF.order)
    pro_e = prolong(sysE, K)
    pulled = pullback_equation(corr, prolong(sysF, ell))
    joint = PdeSystem(sysE.bundle, tuple(dedupe(pro_e.equations + pulled.equations)), N,
                      f"{sysE.name}&{sysF.name}")
    return IntersectionResult(N, K, L, ell, joint, pulled, pro_e)


def joint_kernel(inter: IntersectionResult, ranking: Ranking | None = None):
    """Solved form of the joint system: the equations it reduces to, plus relations among given functions."""
    return solved_form(inter.joint, ranking)


# assumptions on given functions

def assumption_rule(relation: Expr) -> tuple:
    """Solve a relation among given functions for its lowest-order function.

    Returns (function symbol, replacement); the chosen function must occur
    linearly with a parameter-monomial coefficient.
    """
    funcs = sorted(relation.funcs(), key=lambda f: (f.order, f.name, f.idx))
    for f in funcs:
        parts = collect(relation, f)
        if max(parts) != 1:
            continue
        coef = parts[1]
        if len(coef.terms) != 1 or any(s.kind != PARAM for s in coef.symbols()):
            continue
        rhs = -(parts.get(0, ZERO) * coef.inverse())
        if f in rhs.symbols():
            continue
        return f, rhs
    raise NotSolvable(relation, None, "no given function can be isolated")


def apply_assumptions(sys: PdeSystem, relations: Sequence[Expr]) -> PdeSystem:
    """Impose accepted relations by substituting them, with formal derivatives, into the equations."""
    rules = [assumption_rule(r) for r in relations]
    eqs = list(sys.equations)
    for f, rhs in rules:
        new = []
        for e in eqs:
            mapping = {}
            for s in e.funcs():
                if s.name == f.name and s.args == f.args and len(s.idx) >= len(f.idx):
                    extra = list(s.idx)
                    for v in f.idx:
                        extra.remove(v)
                    d = rhs
                    for v in extra:
                        d = total_derivative(d, v)
                    mapping[s] = d
            new.append(substitute(e, mapping) if mapping else e)
        eqs = new
    return sys.with_equations(dedupe(eqs))


# shared structure

SHARE = "share_structure"
SHARE_UNDER = "share_structure_under_assumptions"
NO_SHARE = "no_shared_structure"


@dataclass
class SharedReport:
    verdict: str
    reason: str
    intersection: IntersectionResult
    accepted: tuple
    fi: FiReport | None
    assumption_candidates: tuple = ()

    @property
    def positive(self) -> bool:
        return self.verdict in (SHARE, SHARE_UNDER)

    def to_dict(self) -> dict:
        it = self.intersection
        return {
            "verdict": self.verdict,
            "reason": self.reason,
            "orders": {"N": it.N, "K": it.K, "L": it.L, "ell": it.ell},
            "pulled_back": [format_expr(e) for e in it.pulled_back.equations],
            "joint_size": len(it.joint.equations),
            "accepted_assumptions": [format_expr(a) for a in self.accepted],
            "assumption_candidates": [format_expr(a) for a in self.assumption_candidates],
            "formal_integrability": self.fi.to_dict() if self.fi else None,
        }


def shared_structure(sysE: PdeSystem, corr: Correspondence, sysF: PdeSystem,
                     opts: FiOptions | None = None, accept: Sequence[Expr] = ()) -> SharedReport:
    """Intersect, impose accepted assumptions, complete and test formal integrability."""
    opts = opts or FiOptions()
    inter = intersect(sysE, corr, sysF)
    joint = apply_assumptions(inter.joint, accept) if accept else inter.joint
    fi = check_formal_integrability(joint, opts)
    candidates = tuple(fi.assumptions)
    if fi.verdict in (FORMALLY_INTEGRABLE, FI_AFTER_COMPLETION):
        if accept or candidates:
            verdict, reason = SHARE_UNDER, "formally integrable given the listed relations"
        else:
            verdict, reason = SHARE, "formally integrable at generic points"
        if fi.exceptional_points:
            reason += "; exceptional points listed"
    elif fi.verdict == INCONCLUSIVE:
        verdict, reason = INCONCLUSIVE, fi.reason
    elif fi.verdict == INCONSISTENT:
        verdict, reason = NO_SHARE, f"inconsistent: {fi.reason}"
    else:
        verdict, reason = NO_SHARE, f"not formally integrable: {fi.reason}"
    return SharedReport(verdict, reason, inter, tuple(accept), fi, candidates)


# embeddings and transfer

def equations_subsume(a: PdeSystem, b: PdeSystem, order: int | None = None, max_iter: int = 5,
                      ranking: Ranking | None = None) -> bool:
    """True iff every equation of ``a`` reduces to zero modulo completed ``b``."""
    if a.bundle.base != b.bundle.base or a.bundle.fiber != b.bundle.fiber:
        raise BundleMismatch("systems live on different bundles")
    ranking = ranking or Ranking.for_bundle(b.bundle)
    comp = complete(b, max_iter, ranking)
    if comp.status == "not_solvable":
        raise NotSolvable(comp.detail)
    if comp.status == "inconsistent":
        return True
    order = max(a.order, b.order) if order is None else order
    ortho = extend_rules(solved_form(comp.system, ranking), b.bundle, order)
    return all(reduce(e, ortho).is_zero for e in a.equations)


def transfer_solution(corr: Correspondence, section: Mapping[str, Expr],
                      bindings: Mapping[str, Expr] | None = None,
                      at: Mapping[str, Fraction] | None = None) -> dict:
    """Push a polynomial section of the source forward through the correspondence.

    For a projection the dropped variables are evaluated at ``at`` (default 0),
    which is exact when the transferred section does not depend on them.
    """
    out = {}
    for h, comp in zip(corr.target.fiber, corr.components):
        val = substitute(comp, jet_of_section(section, comp.symbols(), bindings))
        if corr.base.kind == "projection":
            at = at or {}
            val = substitute(val, {coord(v): Expr.const(Fraction(at.get(v, 0))) for v in corr.base.dropped})
        out[h] = val
    return out
