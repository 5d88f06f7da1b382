"""Symbol matrices of PDE systems, generic ranks, g-dimensions, vector-bundle and quasi-regular tests."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations
from math import factorial
from typing import Mapping, Sequence

from .errors import UnboundSymbol
from .expr import JET, ZERO, Expr, Symbol, _mono_drop, evaluate, total_derivative
from .jetgeom import BundleSpec, dim_sym, dim_sym_restricted, enumerate_jet_coords, multi_indices
from .linalg import bareiss_rank
from .system import PdeSystem, Ranking, jet_coords_upto, solved_form

DEFAULT_SEED = 42
DEFAULT_TRIALS = 5
VALUE_BOUND = 997


@dataclass(frozen=True)
class SymbolMatrix:
    """Rows (h, alpha) by columns a^j_sigma, entries d(D_alpha Phi^h)/d u^j_sigma."""

    columns: tuple
    rows: tuple
    entries: tuple
    l: int = 0
    j: int = 0

    @property
    def shape(self) -> tuple:
        return (len(self.rows), len(self.columns))

    def symbols(self) -> list:
        return sorted({s for row in self.entries for e in row for s in e.symbols()})

    def nonzero_rows(self) -> int:
        return sum(1 for row in self.entries if any(not e.is_zero for e in row))


def _coefficients(f: Expr, cols: set) -> dict:
    """Linear coefficients of ``f`` with respect to each column variable."""
    acc: dict = {}
    for m, c in f.terms.items():
        for pos, (s, e) in enumerate(m):
            if s in cols:
                d = acc.setdefault(s, {})
                rest = _mono_drop(m, pos)
                n = d.get(rest, 0) + c * e
                if n:
                    d[rest] = n
                else:
                    del d[rest]
    return {s: Expr._raw(t) for s, t in acc.items() if t}


def _restricted_bundle(bundle: BundleSpec, base_order: Sequence[str] | None) -> BundleSpec:
    if base_order is None:
        return bundle
    if sorted(base_order) != sorted(bundle.base):
        raise ValueError(f"{list(base_order)} is not a permutation of {list(bundle.base)}")
    return BundleSpec(tuple(base_order), bundle.fiber, bundle.name)


def prolonged_symbol_matrix(sys: PdeSystem, l: int, j: int | None = None,
                            base_order: Sequence[str] | None = None) -> SymbolMatrix:
    """Matrix of d(D_alpha Phi^h)/d u^j_sigma, |alpha| = l, |sigma| = k + l.

    With ``j`` the columns are restricted to sigma with every index at position
    >= j + 1 of ``base_order`` (default: the bundle's base order).
    """
    if l < 0:
        raise ValueError("l must be nonnegative")
    bundle = _restricted_bundle(sys.bundle, base_order)
    cols = enumerate_jet_coords(bundle, sys.order + l, j)
    colset = set(cols)
    rows, entries = [], []
    alphas = multi_indices(sys.bundle.base, l)
    for h, eq in enumerate(sys.equations):
        for alpha in alphas:
            d = eq
            for v in alpha:
                d = total_derivative(d, v)
            coeffs = _coefficients(d, colset)
            rows.append((h, alpha))
            entries.append(tuple(coeffs.get(c, ZERO) for c in cols))
    expected = sys.bundle.e * dim_sym_restricted(sys.bundle.m, sys.order + l, j or 0)
    assert len(cols) == expected, "column count disagrees with the closed form"
    return SymbolMatrix(tuple(cols), tuple(rows), tuple(entries), l, j or 0)


def symbol_matrix(sys: PdeSystem) -> SymbolMatrix:
    return prolonged_symbol_matrix(sys, 0)


def restricted_symbol_matrix(sys: PdeSystem, l: int, j: int,
                             base_order: Sequence[str] | None = None) -> SymbolMatrix:
    if not 0 <= j <= sys.bundle.m - 1:
        raise ValueError(f"restriction j={j} outside 0..{sys.bundle.m - 1}")
    return prolonged_symbol_matrix(sys, l, j, base_order)


# evaluation and rank

@dataclass(frozen=True)
class EvalStrategy:
    """How free symbols in matrix entries are turned into numbers.

    ``generic``: random nonzero rationals, several trials, maximum rank wins.
    ``at_point``: the given assignment; with ``fill`` any symbol it leaves
    unbound receives generic values instead of raising UnboundSymbol.
    """

    mode: str = "generic"
    seed: int = DEFAULT_SEED
    trials: int = DEFAULT_TRIALS
    assignment: Mapping = field(default_factory=dict)
    fill: bool = False

    def __post_init__(self):
        if self.mode not in ("generic", "at_point"):
            raise ValueError(f"unknown evaluation mode {self.mode!r}")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")

    @classmethod
    def generic(cls, seed: int = DEFAULT_SEED, trials: int = DEFAULT_TRIALS) -> "EvalStrategy":
        return cls("generic", seed, trials)

    @classmethod
    def at_point(cls, assignment: Mapping, fill: bool = False, seed: int = DEFAULT_SEED,
                 trials: int = DEFAULT_TRIALS) -> "EvalStrategy":
        return cls("at_point", seed, trials, dict(assignment), fill)

    def describe(self) -> dict:
        out = {"mode": self.mode, "seed": self.seed, "trials": self.trials,
               "value_range": [1, VALUE_BOUND]}
        if self.mode == "at_point":
            out["assignment"] = {str(k): str(v) for k, v in sorted(self.assignment.items())}
            out["fill_unbound"] = self.fill
        return out


def trial_rng(seed: int, trial: int) -> random.Random:
    """Independent generator per trial index, so trials can run in any order."""
    return random.Random(seed * 1_000_003 + trial)


def random_rational(rng: random.Random) -> Fraction:
    num = rng.randint(1, VALUE_BOUND)
    den = rng.randint(1, VALUE_BOUND)
    return Fraction(num if rng.random() < 0.5 else -num, den)


def random_values(symbols: Sequence[Symbol], rng: random.Random) -> dict:
    return {s: random_rational(rng) for s in sorted(symbols)}


@dataclass(frozen=True)
class RankResult:
    rank: int
    trial_ranks: tuple
    strategy: EvalStrategy

    def __int__(self) -> int:
        return self.rank


def evaluate_matrix(mat: SymbolMatrix, values: Mapping) -> list:
    return [[evaluate(e, values) if e.terms else Fraction(0) for e in row] for row in mat.entries]


def rank(mat: SymbolMatrix, strat: EvalStrategy | None = None) -> RankResult:
    """Exact rank of the evaluated matrix (maximum over trials in generic mode)."""
    strat = strat or EvalStrategy.generic()
    syms = mat.symbols()
    if strat.mode == "at_point":
        unbound = [s for s in syms if s not in strat.assignment]
        if unbound and not strat.fill:
            raise UnboundSymbol(unbound[0])
        if not unbound:
            r = bareiss_rank(evaluate_matrix(mat, strat.assignment))
            return RankResult(r, (r,), strat)
    else:
        unbound = syms
    if not syms:
        r = bareiss_rank(evaluate_matrix(mat, {}))
        return RankResult(r, (r,), strat)
    ranks = []
    for t in range(strat.trials):
        values = dict(strat.assignment) if strat.mode == "at_point" else {}
        values.update(random_values(unbound, trial_rng(strat.seed, t)))
        ranks.append(bareiss_rank(evaluate_matrix(mat, values)))
    return RankResult(max(ranks), tuple(ranks), strat)


# g-dimensions

def g_dimension(sys: PdeSystem, l: int, strat: EvalStrategy | None = None) -> int:
    """dim g^{k+l} = e * dim S^{k+l} - rank sigma^l."""
    b = sys.bundle
    return b.e * dim_sym(b.m, sys.order + l) - rank(prolonged_symbol_matrix(sys, l), strat).rank


def restricted_g_dimension(sys: PdeSystem, j: int, strat: EvalStrategy | None = None,
                           base_order: Sequence[str] | None = None) -> int:
    b = sys.bundle
    mat = restricted_symbol_matrix(sys, 0, j, base_order)
    return b.e * dim_sym_restricted(b.m, sys.order, j) - rank(mat, strat).rank


@dataclass(frozen=True)
class QuasiRegularResult:
    holds: bool
    lhs: int
    rhs: int
    per_j: tuple
    base_order: tuple
    searched: bool = False

    def to_dict(self) -> dict:
        return {"holds": self.holds, "lhs": self.lhs, "rhs": self.rhs,
                "per_j": [dict(p) for p in self.per_j], "base_order": list(self.base_order),
                "permutation_search": self.searched}


def _quasi_regular_in(sys: PdeSystem, strat, order: tuple, g_k: int, g_k1: int) -> QuasiRegularResult:
    b = sys.bundle
    per_j = []
    total = g_k
    for j in range(1, b.m):
        mat = restricted_symbol_matrix(sys, 0, j, order)
        r = rank(mat, strat).rank
        dim = b.e * dim_sym_restricted(b.m, sys.order, j) - r
        per_j.append({"j": j, "columns": len(mat.columns), "rank": r, "dim": dim})
        total += dim
    return QuasiRegularResult(g_k1 == total, g_k1, total, tuple(per_j), order)


def quasi_regular_check(sys: PdeSystem, strat: EvalStrategy | None = None,
                        search: bool = True) -> QuasiRegularResult:
    """Test dim g^{k+1} = dim g^k + sum_j dim g^{k,j}; optionally try other base orders."""
    g_k = g_dimension(sys, 0, strat)
    g_k1 = g_dimension(sys, 1, strat)
    first = _quasi_regular_in(sys, strat, sys.bundle.base, g_k, g_k1)
    if first.holds or not search or factorial(sys.bundle.m) > 720:
        return first
    for order in permutations(sys.bundle.base):
        if order == sys.bundle.base:
            continue
        res = _quasi_regular_in(sys, strat, order, g_k, g_k1)
        if res.holds:
            return QuasiRegularResult(True, res.lhs, res.rhs, res.per_j, order, True)
    return QuasiRegularResult(False, first.lhs, first.rhs, first.per_j, first.base_order, True)


# vector-bundle test

@dataclass(frozen=True)
class VectorBundleResult:
    constant_rank: bool
    generic_ranks: dict
    witnesses: tuple
    samples: int
    on_shell: bool

    def to_dict(self) -> dict:
        return {"constant_rank": self.constant_rank, "generic_ranks": dict(self.generic_ranks),
                "witnesses": [dict(w) for w in self.witnesses], "samples": self.samples,
                "on_shell": self.on_shell}


def _symbol_family(sys: PdeSystem) -> dict:
    mats = {"sigma": symbol_matrix(sys), "sigma1": prolonged_symbol_matrix(sys, 1)}
    for j in range(1, sys.bundle.m):
        mats[f"restricted_{j}"] = restricted_symbol_matrix(sys, 0, j)
    return mats


def _aux_symbols(sys: PdeSystem, mats: dict) -> list:
    syms = set()
    for e in sys.equations:
        syms |= e.symbols()
    for m in mats.values():
        syms.update(m.symbols())
    return sorted(s for s in syms if s.kind != JET)


def vector_bundle_check(sys: PdeSystem, samples: int = 5, strat: EvalStrategy | None = None,
                        ranking: Ranking | None = None, on_shell: bool = True) -> VectorBundleResult:
    """Compare symbol ranks at sampled points of R^k with their generic values.

    Points are drawn on the solution manifold: parametric jets get random values
    and leaders follow from the solved form.  One extra candidate sets every
    parametric jet that occurs in a symbol entry to zero, which exposes the
    degenerate points of quasi-linear systems.  The rank of sigma and sigma^1
    decides ``constant_rank``; every point where any rank (restricted ones
    included) drops is returned as a witness.  With ``on_shell=False`` the
    equations are ignored and the entry variables are sampled freely.
    """
    strat = strat or EvalStrategy.generic()
    mats = _symbol_family(sys)
    generic = {name: rank(m, strat).rank for name, m in mats.items()}
    entry_jets = sorted({s for m in mats.values() for s in m.symbols() if s.kind == JET})
    aux = _aux_symbols(sys, mats)
    ortho = solved_form(sys, ranking) if on_shell else None
    coords = jet_coords_upto(sys.bundle, sys.order)
    free = [s for s in coords if ortho is None or s not in ortho.mapping]
    entry_set = set(entry_jets)

    def point(rng, zero: bool) -> dict:
        vals = random_values(aux, rng)
        for s in free:
            vals[s] = Fraction(0) if zero and s in entry_set else random_rational(rng)
        if ortho is not None:
            for lead, rhs in reversed(ortho.rules):
                vals[lead] = evaluate(rhs, vals)
        return vals

    witnesses = []
    constant = True
    cases = [(False, t) for t in range(samples)] + [(True, samples)]
    for zero, t in cases:
        vals = point(trial_rng(strat.seed + 7919, t), zero)
        ranks = {name: rank(m, EvalStrategy.at_point(vals, fill=True, seed=strat.seed)).rank
                 for name, m in mats.items()}
        drops = {n: r for n, r in ranks.items() if r != generic[n]}
        if drops:
            if "sigma" in drops or "sigma1" in drops:
                constant = False
            witnesses.append({"point": {str(s): str(vals[s]) for s in entry_jets},
                              "ranks": ranks, "special": zero})
    return VectorBundleResult(constant, generic, tuple(witnesses), samples, ortho is not None)
