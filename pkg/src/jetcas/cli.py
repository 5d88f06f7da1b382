"""Command-line front end: parse a theory file, run one analysis, report as text or JSON."""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from importlib import resources
from importlib.metadata import PackageNotFoundError, version

from .correspondence import (intersect, joint_kernel, pullback_equation, shared_structure,
                             transfer_solution)
from .dsl import TheoryFile, parse, parse_assignment, parse_expressions
from .errors import JetcasError, NotSolvable
from .expr import Expr, format_expr
from .integrability import FiOptions, check_formal_integrability
from .symbol import EvalStrategy, prolonged_symbol_matrix, rank
from .symmetry import check_invariant, invariant_basis, quotient_rewrite
from .system import Ranking, complete, integrability_conditions, prolong, split_conditions, verify_solution

COMMANDS = ("prolong", "symbol", "rank", "check-fi", "conditions", "intersect", "shared",
            "invariants", "quotient", "verify", "transfer")


class UsageError(JetcasError):
    pass


def tool_version() -> str:
    try:
        return version("artifact")
    except PackageNotFoundError:
        return "0+unknown"


def fixture_names() -> list:
    root = resources.files("jetcas") / "fixtures"
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".jet"))


def fixture_text(name: str) -> str:
    return (resources.files("jetcas") / "fixtures" / f"{name}.jet").read_text(encoding="utf-8")


def _wanted(args) -> list:
    """(table, name) pairs the command will look up; used to pick a bundled theory."""
    out = []
    for attr, table in (("system", "systems"), ("left", "systems"), ("right", "systems"),
                        ("corr", "corrs"), ("section", "sections"), ("gens", "gens")):
        val = getattr(args, attr, None)
        if val:
            out.append((table, val))
    return out


def load_theory(args) -> tuple:
    """Return (TheoryFile, source text, origin label)."""
    if args.file:
        with open(args.file, encoding="utf-8") as fh:
            text = fh.read()
        return parse(text), text, args.file
    names = [args.theory] if args.theory else fixture_names()
    wanted = _wanted(args)
    for name in names:
        if name not in fixture_names():
            raise UsageError(f"no bundled theory {name!r} (available: {', '.join(fixture_names())})")
        text = fixture_text(name)
        tf = parse(text)
        if args.theory or (wanted and all(n in getattr(tf, t) for t, n in wanted)):
            return tf, text, f"bundled:{name}"
    raise UsageError("no bundled theory declares " + ", ".join(n for _, n in wanted)
                     + "; pass --file or --theory")


def _need(args, *attrs):
    for a in attrs:
        if getattr(args, a) in (None, ""):
            raise UsageError(f"{args.command} needs --{a.replace('_', '-')}")


def _strategy(args, tf: TheoryFile, bundle) -> EvalStrategy:
    if args.at:
        return EvalStrategy.at_point(parse_assignment(args.at, tf, bundle), fill=args.fill,
                                     seed=args.seed, trials=args.trials)
    return EvalStrategy.generic(args.seed, args.trials)


def _ranking(args, bundle):
    if not args.rank_order:
        return None
    return Ranking.for_bundle(bundle, [v.strip() for v in args.rank_order.split(",") if v.strip()])


def _fi_options(args, bundle) -> FiOptions:
    return FiOptions(max_iter=args.max_iter, strat=EvalStrategy.generic(args.seed, args.trials),
                     ranking=_ranking(args, bundle))


def _eqs(sys_) -> list:
    return [format_expr(e) for e in sys_.equations]


# command handlers return (result dict, positive flag, text lines)

def cmd_prolong(args, tf):
    _need(args, "system")
    s = tf.system(args.system)
    p = prolong(s, args.level)
    return {"system": s.name, "level": args.level, "order": p.order, "count": len(p.equations),
            "equations": _eqs(p)}, True, [f"prolong({s.name}, {args.level}): order {p.order}, "
                                          f"{len(p.equations)} equations"] + _eqs(p)


def cmd_symbol(args, tf):
    _need(args, "system")
    s = tf.system(args.system)
    mat = prolonged_symbol_matrix(s, args.level, args.restrict)
    entries = [[format_expr(e) for e in row] for row in mat.entries]
    res = {"system": s.name, "level": args.level, "restrict": args.restrict,
           "shape": list(mat.shape), "columns": [format_expr_sym(c) for c in mat.columns],
           "nonzero_rows": mat.nonzero_rows(), "entries": entries}
    lines = [f"symbol of {s.name}, level {args.level}"
             + (f", restricted j={args.restrict}" if args.restrict is not None else "")
             + f": {mat.shape[0]}x{mat.shape[1]} ({mat.nonzero_rows()} nonzero rows)",
             "columns: " + " ".join(res["columns"])]
    lines += ["  [" + ", ".join(r) + "]" for r in entries if any(x != "0" for x in r)]
    return res, True, lines


def format_expr_sym(sym) -> str:
    return format_expr(Expr.sym(sym))


def cmd_rank(args, tf):
    _need(args, "system")
    s = tf.system(args.system)
    strat = _strategy(args, tf, s.bundle)
    mat = prolonged_symbol_matrix(s, args.level, args.restrict)
    r = rank(mat, strat)
    res = {"system": s.name, "level": args.level, "restrict": args.restrict, "shape": list(mat.shape),
           "rank": r.rank, "trial_ranks": list(r.trial_ranks), "kernel_dim": mat.shape[1] - r.rank,
           "strategy": strat.describe()}
    return res, True, [f"rank {r.rank} of {mat.shape[0]}x{mat.shape[1]} "
                       f"(kernel dimension {mat.shape[1] - r.rank}, {strat.mode})"]


def _fi_lines(rep) -> list:
    lines = [f"verdict: {rep.verdict}" + (f" ({rep.reason})" if rep.reason else "")]
    if rep.g_dims:
        lines.append("g dims: " + ", ".join(f"g^{k}={v}" for k, v in sorted(rep.g_dims.items())))
    if rep.symbol_ranks:
        lines.append("symbol ranks: " + ", ".join(f"{k}={v}" for k, v in rep.symbol_ranks.items()))
    for i, batch in enumerate(rep.conditions_trail, 1):
        lines.append(f"conditions round {i}: " + ", ".join(format_expr(c) for c in batch))
    if rep.quasi_regular:
        q = rep.quasi_regular
        lines.append(f"quasi-regular: {q.lhs} vs {q.rhs} in order {' '.join(q.base_order)}"
                     + (" (holds)" if q.holds else " (fails)"))
    for p in rep.exceptional_points:
        lines.append(f"exceptional point: {p}")
    for a in rep.assumptions:
        lines.append(f"assumption candidate: {format_expr(a)} = 0")
    lines += [f"note: {n}" for n in rep.notes]
    return lines


def cmd_check_fi(args, tf):
    _need(args, "system")
    s = tf.system(args.system)
    rep = check_formal_integrability(s, _fi_options(args, s.bundle))
    return rep.to_dict(), rep.positive, _fi_lines(rep)


def cmd_conditions(args, tf):
    _need(args, "system")
    s = tf.system(args.system)
    ranking = _ranking(args, s.bundle)
    jets, assum = split_conditions(integrability_conditions(s, ranking))
    comp = complete(s, args.max_iter, ranking)
    res = {"system": s.name, "conditions": [format_expr(c) for c in jets],
           "assumption_candidates": [format_expr(a) for a in assum],
           "completion": {"status": comp.status, "iterations": comp.iterations,
                          "trail": [[format_expr(c) for c in b] for b in comp.trail],
                          "detail": comp.detail, "system": _eqs(comp.system)}}
    lines = ["conditions: " + (", ".join(res["conditions"]) or "none"),
             f"completion: {comp.status} after {comp.iterations} round(s)"]
    lines += [f"assumption candidate: {a} = 0" for a in res["assumption_candidates"]]
    return res, comp.status == "completed", lines


def cmd_intersect(args, tf):
    _need(args, "left", "corr", "right")
    it = intersect(tf.system(args.left), tf.corr(args.corr), tf.system(args.right))
    res = {"orders": {"N": it.N, "K": it.K, "L": it.L, "ell": it.ell},
           "pulled_back": _eqs(it.pulled_back), "joint": _eqs(it.joint)}
    lines = [f"N={it.N} K={it.K} L={it.L} ell={it.ell}", "pulled back:"]
    lines += ["  " + e for e in res["pulled_back"]]
    lines.append(f"joint system: {len(it.joint.equations)} equations")
    try:
        ker = joint_kernel(it, _ranking(args, it.joint.bundle))
    except NotSolvable as exc:
        res["kernel"] = None
        lines.append(f"no solved form: {exc}")
    else:
        res["kernel"] = [format_expr(e) for e in ker.equations()]
        res["relations"] = [format_expr(a) for a in ker.assumptions]
        lines.append("reduces to:")
        lines += ["  " + e for e in res["kernel"]]
        lines += [f"  relation: {a} = 0" for a in res["relations"]]
    return res, True, lines


def cmd_shared(args, tf):
    _need(args, "left", "corr", "right")
    left = tf.system(args.left)
    accept = []
    for text in args.accept_assumption:
        accept += parse_expressions(text, tf, left.bundle)
    rep = shared_structure(left, tf.corr(args.corr), tf.system(args.right),
                           _fi_options(args, left.bundle), accept)
    lines = [f"verdict: {rep.verdict} ({rep.reason})"]
    lines += [f"accepted: {format_expr(a)} = 0" for a in rep.accepted]
    if rep.fi:
        lines += _fi_lines(rep.fi)[1:]
    return rep.to_dict(), rep.positive, lines


def cmd_invariants(args, tf):
    _need(args, "gens")
    g = tf.generator_set(args.gens)
    order = args.level if args.level else g.order
    forms = invariant_basis(g.generators, g.bundle, order)
    assert all(check_invariant(f, g.generators) for f in forms)
    res = {"gens": g.name, "order": order, "count": len(forms), "forms": [format_expr(f) for f in forms]}
    return res, True, [f"{len(forms)} invariant linear forms up to order {order}"] + res["forms"]


def cmd_quotient(args, tf):
    _need(args, "system", "corr")
    s, c = tf.system(args.system), tf.corr(args.corr)
    q = quotient_rewrite(s, list(zip(c.target.fiber, c.components)), c.target)
    back = pullback_equation(c, q)
    ok = [format_expr(a - b) for a, b in zip(back.equations, s.equations)]
    res = {"system": s.name, "corr": c.name, "quotient": _eqs(q),
           "back_substitution_exact": all(d == "0" for d in ok)}
    if args.right:
        res["matches"] = {"system": args.right,
                          "equal": _eqs(tf.system(args.right)) == _eqs(q)}
    return res, res["back_substitution_exact"], ["quotient equations:"] + ["  " + e for e in _eqs(q)]


def _section(args, tf):
    sec = tf.section(args.section)
    return sec, sec.as_dict(), sec.bindings_dict()


def cmd_verify(args, tf):
    _need(args, "system", "section")
    s = tf.system(args.system)
    sec, comps, binds = _section(args, tf)
    point = parse_assignment(args.at, tf, s.bundle) if args.at else None
    if point:
        point = {k.name: v for k, v in point.items()}
    vr = verify_solution(s, comps, args.level, binds, point)
    res = {"system": s.name, "section": sec.name, "level": args.level, "ok": vr.ok,
           "residuals": [format_expr(r) for r in vr.residuals]}
    lines = [f"{sec.name} {'solves' if vr.ok else 'does not solve'} {s.name} (prolongation {args.level})"]
    lines += ["residual: " + r for r in res["residuals"] if r != "0"]
    return res, vr.ok, lines


def cmd_transfer(args, tf):
    _need(args, "corr", "section")
    c = tf.corr(args.corr)
    sec, comps, binds = _section(args, tf)
    at = parse_assignment(args.at, tf, c.source) if args.at else None
    if at:
        at = {k.name: v for k, v in at.items()}
    out = transfer_solution(c, comps, binds, at)
    res = {"corr": c.name, "section": sec.name,
           "transferred": {k: format_expr(v) for k, v in out.items()}}
    lines = [f"{k} = {v}" for k, v in res["transferred"].items()]
    positive = True
    if args.right:
        vr = verify_solution(tf.system(args.right), out, 0, binds)
        res["verified_against"] = {"system": args.right, "ok": vr.ok}
        positive = vr.ok
        lines.append(f"{'solves' if vr.ok else 'does not solve'} {args.right}")
    return res, positive, lines


HANDLERS = {
    "prolong": cmd_prolong, "symbol": cmd_symbol, "rank": cmd_rank, "check-fi": cmd_check_fi,
    "conditions": cmd_conditions, "intersect": cmd_intersect, "shared": cmd_shared,
    "invariants": cmd_invariants, "quotient": cmd_quotient, "verify": cmd_verify,
    "transfer": cmd_transfer,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="jetcas", description="Formal integrability of polynomial PDE systems.")
    ap.add_argument("command", choices=COMMANDS)
    src = ap.add_mutually_exclusive_group()
    src.add_argument("--file", help="theory file to load")
    src.add_argument("--theory", help="bundled theory name (" + ", ".join(fixture_names()) + ")")
    ap.add_argument("--system")
    ap.add_argument("--corr")
    ap.add_argument("--left")
    ap.add_argument("--right")
    ap.add_argument("--section")
    ap.add_argument("--gens")
    ap.add_argument("--level", type=int, default=0)
    ap.add_argument("--restrict", type=int, default=None)
    ap.add_argument("--at", help='point assignment, e.g. "u1=0,u2=0"')
    ap.add_argument("--fill", action="store_true", help="give symbols left free by --at random values")
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--trials", type=int, default=5)
    ap.add_argument("--max-iter", type=int, default=5)
    ap.add_argument("--rank-order", help="base-variable priority, e.g. t,x1,x2,x3")
    ap.add_argument("--json", action="store_true")
    ap.add_argument("--accept-assumption", action="append", default=[], metavar="EXPR")
    return ap


def _settings(args) -> dict:
    keys = ("file", "theory", "system", "corr", "left", "right", "section", "gens", "level", "restrict",
            "at", "fill", "seed", "trials", "max_iter", "rank_order", "accept_assumption")
    return {k: getattr(args, k) for k in keys}


def run(argv=None, out=sys.stdout, err=sys.stderr) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        tf, text, origin = load_theory(args)
        result, positive, lines = HANDLERS[args.command](args, tf)
    except (JetcasError, ValueError, OSError) as exc:
        print(f"jetcas: error: {exc}", file=err)
        return 2
    if args.json:
        report = {
            "command": args.command,
            "input_digest": "sha256:" + hashlib.sha256(text.encode("utf-8")).hexdigest(),
            "settings": _settings(args),
            "result": result,
            "provenance": {"tool": "jetcas", "version": tool_version(), "source": origin,
                           "seed": args.seed, "trials": args.trials,
                           "ranking": args.rank_order or "declaration order"},
        }
        out.write(json.dumps(report, sort_keys=True, indent=2) + "\n")
    else:
        out.write("\n".join(lines) + "\n")
    return 0 if positive else 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
