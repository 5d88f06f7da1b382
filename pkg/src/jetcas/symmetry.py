"""Linear symmetry actions on jet coordinates: invariant forms and quotient equations."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import NotExpressible
from .expr import JET, ZERO, Expr, Symbol, partial
from .jetgeom import BundleSpec, jet_coords_upto
from .linalg import bareiss_rank, nullspace
from .system import PdeSystem, Ranking, prolong, reduce, solved_form


@dataclass(frozen=True)
class LinearGenerator:
    """Vector field sum_v c_v d/dv on jet space; coefficients are Exprs (constants for discovery)."""

    coefficients: tuple  # ((Symbol, Expr), ...) sorted by symbol

    def __post_init__(self):
        merged: dict = {}
        for s, c in self.coefficients:
            if s.kind != JET:
                raise ValueError(f"generator component {s} is not a jet coordinate")
            merged[s] = merged.get(s, ZERO) + Expr.coerce(c)
        items = tuple(sorted((s, c) for s, c in merged.items() if not c.is_zero))
        if not items:
            raise ValueError("a generator needs at least one nonzero coefficient")
        object.__setattr__(self, "coefficients", items)

    @property
    def order(self) -> int:
        return max(s.order for s, _ in self.coefficients)

    @property
    def is_constant(self) -> bool:
        return all(c.is_constant for _, c in self.coefficients)

    def apply(self, f: Expr) -> Expr:
        out = ZERO
        for s, c in self.coefficients:
            d = partial(f, s)
            if d:
                out = out + c * d
        return out


@dataclass(frozen=True)
class GeneratorSet:
    name: str
    bundle: BundleSpec
    order: int
    generators: tuple


def generator_matrix(gens: Sequence[LinearGenerator], coords: Sequence[Symbol]) -> list:
    pos = {c: i for i, c in enumerate(coords)}
    rows = []
    for g in gens:
        if not g.is_constant:
            raise ValueError("invariant discovery needs constant-coefficient generators")
        row = [Fraction(0)] * len(coords)
        for s, c in g.coefficients:
            if s not in pos:
                raise ValueError(f"generator acts on {s}, outside the requested jet order")
            row[pos[s]] = c.constant_value
        rows.append(row)
    return rows


def invariant_basis(gens: Sequence[LinearGenerator], bundle: BundleSpec, order: int) -> list:
    """Basis of the linear forms in u^j_sigma (|sigma| <= order) annihilated by every generator."""
    coords = jet_coords_upto(bundle, order)
    rows = generator_matrix(gens, coords)
    basis = nullspace(rows, len(coords))
    forms = []
    for v in basis:
        f = Expr._raw({((c, 1),): x for c, x in zip(coords, v) if x})
        forms.append(f)
    assert len(forms) == len(coords) - bareiss_rank(rows) if rows else len(forms) == len(coords)
    return forms


def check_invariant(candidate: Expr, gens: Sequence[LinearGenerator]) -> bool:
    """X(candidate) = 0 for every generator X."""
    return all(g.apply(candidate).is_zero for g in gens)


def quotient_rewrite(sys: PdeSystem, invariants: Sequence[tuple], target: BundleSpec) -> PdeSystem:
    """Rewrite ``sys`` in the named invariant forms and their total derivatives.

    The definitions F_a - I_a = 0 are prolonged to the system order and solved
    under a ranking that puts every original jet above every invariant jet, so
    reduction eliminates the original coordinates wherever possible.
    """
    names = [n for n, _ in invariants]
    if tuple(names) != target.fiber:
        raise ValueError("invariant names must match the target fiber variables")
    if target.base != sys.bundle.base:
        raise ValueError("quotient bundle must share the base of the system")
    n = max(f.max_order() for _, f in invariants)
    combined = BundleSpec(sys.bundle.base, sys.bundle.fiber + target.fiber, f"{sys.bundle.name}+{target.name}")
    defs = PdeSystem(combined, tuple(Expr.sym(Symbol(JET, name)) - f for name, f in invariants), n)
    defs = prolong(defs, max(sys.order - n, 0))
    ranking = Ranking(sys.bundle.base, combined.fiber, (sys.bundle.fiber, target.fiber))
    ortho = solved_form(defs, ranking)
    out = []
    source = set(sys.bundle.fiber)
    for eq in sys.equations:
        r = reduce(eq, ortho)
        leftover = [s for s in r.jets() if s.name in source]
        if leftover:
            raise NotExpressible(eq, r)
        out.append(r)
    return PdeSystem(target, tuple(out), -1, f"{sys.name}/invariants")
