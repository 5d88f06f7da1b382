"""Formal-integrability verdicts: surjectivity, vector-bundle and quasi-regular conditions."""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import Inconsistent, NotSolvable
from .expr import format_expr
from .symbol import (EvalStrategy, QuasiRegularResult, VectorBundleResult, g_dimension,
                     prolonged_symbol_matrix, quasi_regular_check, rank, symbol_matrix,
                     vector_bundle_check)
from .system import (PdeSystem, Ranking, complete, integrability_conditions, parametric_jets,
                     prolong, split_conditions)

FORMALLY_INTEGRABLE = "formally_integrable"
FI_AFTER_COMPLETION = "fi_after_completion"
NOT_FI = "not_fi"
INCONSISTENT = "inconsistent"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class FiOptions:
    max_iter: int = 5
    strat: EvalStrategy = field(default_factory=EvalStrategy.generic)
    samples: int = 5
    ranking: Ranking | None = None
    search_permutations: bool = True
    max_prolong: int = 2


@dataclass
class FiReport:
    verdict: str
    reason: str = ""
    surjective: bool | None = None
    initial_conditions: tuple = ()
    conditions_trail: tuple = ()
    completion_status: str = ""
    completed_system: PdeSystem | None = None
    assumptions: tuple = ()
    g_dims: dict = field(default_factory=dict)
    symbol_ranks: dict = field(default_factory=dict)
    vector_bundle: VectorBundleResult | None = None
    quasi_regular: QuasiRegularResult | None = None
    exceptional_points: tuple = ()
    involutive_order: int | None = None
    notes: tuple = ()

    @property
    def positive(self) -> bool:
        return self.verdict in (FORMALLY_INTEGRABLE, FI_AFTER_COMPLETION)

    def to_dict(self) -> dict:
        out = {
            "verdict": self.verdict,
            "reason": self.reason,
            "surjective": self.surjective,
            "initial_conditions": [format_expr(c) for c in self.initial_conditions],
            "conditions_trail": [[format_expr(c) for c in batch] for batch in self.conditions_trail],
            "completion_status": self.completion_status,
            "assumption_candidates": [format_expr(a) for a in self.assumptions],
            "g_dims": {str(k): v for k, v in sorted(self.g_dims.items())},
            "symbol_ranks": dict(self.symbol_ranks),
            "vector_bundle": self.vector_bundle.to_dict() if self.vector_bundle else None,
            "quasi_regular": self.quasi_regular.to_dict() if self.quasi_regular else None,
            "exceptional_points": [dict(p) for p in self.exceptional_points],
            "involutive_order": self.involutive_order,
            "notes": list(self.notes),
        }
        if self.completed_system is not None:
            out["completed_system"] = [format_expr(e) for e in self.completed_system.equations]
        return out


def _symbol_data(sys: PdeSystem, opts: FiOptions, report: FiReport) -> None:
    k = sys.order
    strat = opts.strat
    report.symbol_ranks = {"sigma": rank(symbol_matrix(sys), strat).rank,
                           "sigma1": rank(prolonged_symbol_matrix(sys, 1), strat).rank}
    report.g_dims = {k: g_dimension(sys, 0, strat), k + 1: g_dimension(sys, 1, strat)}
    try:
        vb = vector_bundle_check(sys, opts.samples, strat, opts.ranking)
    except NotSolvable:
        vb = vector_bundle_check(sys, opts.samples, strat, opts.ranking, on_shell=False)
        report.notes += ("solved form unavailable; symbol ranks sampled off the solution manifold",)
    report.vector_bundle = vb
    report.exceptional_points = vb.witnesses
    report.quasi_regular = quasi_regular_check(sys, strat, opts.search_permutations)


def _finite_criterion(sys: PdeSystem, opts: FiOptions, report: FiReport, positive: str,
                      reason: str = "") -> None:
    """Surjectivity is known at order k; test the symbol, prolonging while it is not involutive.

    If g^{k+r} admits a quasi-regular basis and every projection R^{k+l+1} -> R^{k+l}
    (l <= r) is onto with g^{k+l+1} a vector bundle, R^k is formally integrable.
    """
    current = sys
    for r in range(opts.max_prolong + 1):
        if r:
            current = prolong(sys, r)
            try:
                jets, _ = split_conditions(integrability_conditions(current, opts.ranking))
            except (NotSolvable, Inconsistent) as exc:
                report.verdict, report.reason = INCONCLUSIVE, f"prolongation {r}: {exc}"
                return
            if jets:
                report.verdict = NOT_FI
                report.reason = f"surjectivity fails from order {current.order}"
                report.notes += (f"conditions at order {current.order}: "
                                 + ", ".join(format_expr(c) for c in jets[:6]),)
                return
        data = FiReport(verdict=INCONCLUSIVE)
        _symbol_data(current, opts, data)
        if r == 0:
            report.symbol_ranks, report.g_dims = data.symbol_ranks, data.g_dims
            report.vector_bundle, report.exceptional_points = data.vector_bundle, data.exceptional_points
            report.quasi_regular = data.quasi_regular
            report.notes += data.notes
        else:
            report.g_dims.update(data.g_dims)
        if not data.vector_bundle.constant_rank:
            report.verdict = NOT_FI
            report.reason = "vector_bundle" + (f" at order {current.order}" if r else "")
            return
        if data.quasi_regular.holds:
            report.verdict, report.reason = positive, reason
            report.involutive_order = current.order
            if r:
                report.quasi_regular = data.quasi_regular
                report.notes += (f"symbol involutive after {r} prolongation(s)",)
            return
    report.verdict = INCONCLUSIVE
    report.reason = f"no quasi-regular basis up to order {current.order}"


def check_formal_integrability(sys: PdeSystem, opts: FiOptions | None = None) -> FiReport:
    """Assemble the three finite conditions into a verdict.

    A system whose first prolongation adds no constraint on R^k is tested
    directly.  Otherwise it is completed; if the completed system still has
    free jet coordinates up to order k it is tested in place of the original
    (verdict ``fi_after_completion``).  A completion that pins every jet
    coordinate leaves only isolated points and is reported as ``not_fi``.
    """
    opts = opts or FiOptions()
    report = FiReport(verdict=INCONCLUSIVE)
    try:
        conds = integrability_conditions(sys, opts.ranking)
    except Inconsistent as exc:
        report.verdict, report.reason = INCONSISTENT, str(exc)
        return report
    except NotSolvable as exc:
        report.reason = f"not_solvable: {exc}"
        report.completion_status = "not_solvable"
        _symbol_data(sys, opts, report)
        return report
    jets, assum = split_conditions(conds)
    report.initial_conditions = tuple(jets)
    report.surjective = not jets
    report.assumptions = tuple(assum)
    if not jets:
        _finite_criterion(sys, opts, report, FORMALLY_INTEGRABLE)
        return report

    comp = complete(sys, opts.max_iter, opts.ranking)
    report.conditions_trail = comp.trail
    report.completion_status = comp.status
    report.completed_system = comp.system
    report.assumptions = tuple(dict.fromkeys(report.assumptions + comp.assumptions))
    if comp.status == "inconsistent":
        report.verdict, report.reason = INCONSISTENT, comp.detail
        return report
    if comp.status != "completed":
        report.verdict = INCONCLUSIVE
        report.reason = comp.status + (f": {comp.detail}" if comp.detail else "")
        return report
    if not parametric_jets(comp.system, opts.ranking):
        report.verdict = NOT_FI
        report.reason = "surjectivity: completion fixes every jet coordinate up to the system order"
        _symbol_data(comp.system, opts, report)
        return report
    _finite_criterion(comp.system, opts, report, FI_AFTER_COMPLETION,
                      "surjectivity restored by the condition trail")
    return report
