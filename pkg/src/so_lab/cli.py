"""Command-line entry point.

Exit codes: 0 success / all checks pass, 1 a check failed, 2 usage or
input error, 3 enumeration budget exhausted.  Reports produced by the
check subcommands carry no volatile fields, so identical invocations
with identical seeds print byte-identical JSON.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import formulas as fm
from . import formula_space as fs
from . import structures as st
from . import types_omitting as to
from . import ultra, workbench
from .errors import BudgetExceededError, SoLabError


def _load_structure(path):
    return st.FiniteStructure.from_json(Path(path).read_text())


def _load_family(path):
    """A directory of structure files (sorted by name) or one JSON array."""
    p = Path(path)
    if p.is_dir():
        files = sorted(p.glob("*.json"))
        if not files:
            raise SoLabError(f"no *.json structure files in {path}")
        return [(f.name, st.FiniteStructure.from_json(f.read_text())) for f in files]
    data = json.loads(p.read_text())
    if not isinstance(data, list):
        raise SoLabError(f"{path} is neither a directory nor a JSON array")
    return [(f"{path}[{i}]", st.FiniteStructure.from_json_dict(d))
            for i, d in enumerate(data)]


def _formula_from_args(args):
    if getattr(args, "builtin", None):
        return workbench.builtin(args.builtin).formula
    if getattr(args, "formula", None):
        return fm.parse(args.formula)
    raise SoLabError("provide --formula or --builtin")


def _emit(args, report, text_lines):
    if args.format == "json":
        print(json.dumps(report, indent=2, sort_keys=False))
    else:
        for line in text_lines:
            print(line)


def _cmd_parse(args):
    f = fm.parse(args.formula)
    free = fm.free_fo_variables(f)
    report = {
        "command": "parse",
        "formula": fm.print_formula(f),
        "free_variables": list(free),
        "hierarchy": str(fm.classify(f)),
    }
    _emit(args, report, [report["formula"],
                         f"free variables: {', '.join(free) or '(none)'}",
                         f"hierarchy: {report['hierarchy']}"])
    return 0


def _cmd_classify(args):
    label = str(fm.classify(fm.parse(args.formula)))
    _emit(args, {"command": "classify", "label": label}, [label])
    return 0


def _cmd_prenex(args):
    f = fm.parse(args.formula)
    g = fm.prenex_so(f)
    report = {
        "command": "prenex",
        "input": fm.print_formula(f),
        "prenex": fm.print_formula(g),
        "label": str(fm.classify(g)),
    }
    _emit(args, report, [report["prenex"], f"hierarchy: {report['label']}"])
    return 0


def _cmd_eval(args):
    A = _load_structure(args.structure)
    f = _formula_from_args(args)
    if args.semantics == "fo":
        value = st.eval_fo(A, f)
    else:
        value = st.eval_so_full(A, f, budget=args.budget)
    report = {"command": "eval", "structure": args.structure,
              "semantics": args.semantics, "result": value}
    _emit(args, report, ["true" if value else "false"])
    return 0


def _cmd_ultraproduct(args):
    family = [A for _, A in _load_family(args.family)]
    U = ultra.Ultrafilter.parse(args.ultrafilter, len(family), args.cols)
    result = ultra.ultraproduct(family, U)
    report = {
        "command": "ultraproduct",
        "ultrafilter": U.literal(),
        "explicit": result.explicit,
        "quotient": result.quotient.to_json_dict(),
        "class_representatives": [list(r) for r in result.class_representatives],
    }
    _emit(args, report, [json.dumps(report["quotient"]),
                         f"classes: {report['class_representatives']}"])
    return 0


def _cmd_henkin_eval(args):
    family = [A for _, A in _load_family(args.family)]
    U = ultra.Ultrafilter.parse(args.ultrafilter, len(family), args.cols)
    f = _formula_from_args(args)
    M = ultra.henkin_model(family, U, args.arity_bound)
    value = ultra.henkin_eval(M, f)
    report = {"command": "henkin-eval", "ultrafilter": U.literal(),
              "arity_bound": args.arity_bound, "result": value}
    _emit(args, report, ["true" if value else "false"])
    return 0


def _cmd_separate(args):
    named_k = _load_family(args.k)
    named_l = _load_family(args.l)
    K = [A for _, A in named_k]
    L = [A for _, A in named_l]
    sig = K[0].sig
    fragment = fs.Fragment.from_strings(json.loads(Path(args.fragment).read_text()), sig)

    def vectors_with_witnesses(named):
        out = {}
        for name, A in named:
            v = fs.theory_vector(A, fragment, budget=args.budget)
            out.setdefault(v.as_string(), name)
        return [{"bits": bits, "witness": witness}
                for bits, witness in sorted(out.items())]

    kv = vectors_with_witnesses(named_k)
    lv = vectors_with_witnesses(named_l)
    separator = fs.find_separating_formula(K, L, fragment, budget=args.budget)
    distance = fs.set_distance(fs.vector_set(K, fragment, budget=args.budget),
                               fs.vector_set(L, fragment, budget=args.budget))
    report = {
        "command": "separate",
        "k_vectors": kv,
        "l_vectors": lv,
        "distance": str(distance),
        "separator": fm.print_formula(separator) if separator else None,
    }
    lines = [f"K vectors: " + ", ".join(f"{e['bits']} ({e['witness']})" for e in kv),
             f"L vectors: " + ", ".join(f"{e['bits']} ({e['witness']})" for e in lv),
             f"distance: {report['distance']}",
             f"separator: {report['separator'] or '(none: vector sets meet)'}"]
    _emit(args, report, lines)
    return 0 if separator is not None else 1


def _cmd_types(args):
    A = _load_structure(args.structure)
    ctx = to.TypeContext.from_json(Path(args.context).read_text())
    table = to.realized_types(A, ctx, budget=args.budget)
    entries = sorted(
        ({"type": p.as_string(),
          "witness": [sorted(list(t) for t in rel) for rel in witness]}
         for p, witness in table.items()),
        key=lambda e: e["type"],
    )
    report = {"command": "types", "structure": args.structure,
              "context": ctx.to_json_dict(), "realized": entries}
    _emit(args, report,
          [f"{e['type']}  witness {e['witness']}" for e in entries])
    return 0


def _cmd_insep(args):
    Ks = [A for _, A in _load_family(args.k)]
    Ls = [A for _, A in _load_family(args.l)]
    rep = workbench.principal_insep_search(Ks, Ls, args.arity_bound)
    report = {"command": "insep", **rep.to_json_dict()}
    if rep.witness is None:
        lines = [f"refutation: no witness among {rep.pairs_searched} pairs",
                 rep.note]
    else:
        ki, li, mapping = rep.witness
        lines = [f"witness: K[{ki}] ~ L[{li}] via {list(mapping)}"]
    _emit(args, report, lines)
    return 0


_CHECKS = {
    "los": lambda args: workbench.los_suite(args.trials, args.seed),
    "fubini": lambda args: workbench.fubini_suite(args.trials, args.seed),
    "metric": lambda args: workbench.metric_suite(args.trials, args.seed),
    "omission": lambda args: workbench.omission_suite(args.trials, args.seed),
}


def _cmd_check(args):
    report = _CHECKS[args.what](args)
    ok = report["pass"]
    lines = [f"{report['check']}: {'pass' if ok else 'FAIL'}"
             + (f" ({len(report['failures'])} failures)" if not ok else "")]
    _emit(args, report, lines)
    return 0 if ok else 1


def _cmd_demo(args):
    params = {}
    for item in args.param or []:
        key, _, value = item.partition("=")
        params[key] = value
    if args.seed is not None:
        params.setdefault("seed", args.seed)
    if args.trials is not None:
        params.setdefault("trials", args.trials)
    report = workbench.demo(args.name, params)
    lines = []
    for check in report["checks"]:
        status = "pass" if check["pass"] else "FAIL"
        lines.append(f"[{status}] {check['name']}: expected {check['expected']!r},"
                     f" got {check['actual']!r}")
    lines.append(f"demo {report['demo']}: {'pass' if report['pass'] else 'FAIL'}"
                 f" in {report['runtime_ms']} ms")
    _emit(args, report, lines)
    return 0 if report["pass"] else 1


def build_parser():
    parser = argparse.ArgumentParser(
        prog="so-lab",
        description="Second-order logic workbench over finite structures.",
    )

    def common(sub):
        sub.add_argument("--format", choices=("text", "json"), default="text")
        sub.add_argument("--seed", type=int, default=42)
        sub.add_argument("--budget", type=int, default=st.DEFAULT_RELATION_BUDGET,
                         help="cap on candidate relations per quantifier")
        return sub

    subs = parser.add_subparsers(dest="command", required=True)

    p = common(subs.add_parser("parse", help="parse a formula and report its shape"))
    p.add_argument("--formula", required=True)
    p.set_defaults(func=_cmd_parse)

    p = common(subs.add_parser(
        "classify",
        help="alternation class of the relation-quantifier prefix (Sigma/Pi hierarchy)"))
    p.add_argument("--formula", required=True)
    p.set_defaults(func=_cmd_classify)

    p = common(subs.add_parser(
        "prenex",
        help="pull relation quantifiers to a prefix (arity raising past"
             " individual quantifiers)"))
    p.add_argument("--formula", required=True)
    p.set_defaults(func=_cmd_prenex)

    p = common(subs.add_parser(
        "eval", help="truth in one structure under full or first-order semantics"))
    p.add_argument("--structure", required=True)
    p.add_argument("--formula")
    p.add_argument("--builtin")
    p.add_argument("--semantics", choices=("full", "fo"), default="full")
    p.set_defaults(func=_cmd_eval)

    p = common(subs.add_parser(
        "ultraproduct", help="quotient of a family by a principal ultrafilter"))
    p.add_argument("--family", required=True)
    p.add_argument("--ultrafilter", required=True,
                   help='"principal:i", or "principal:i x principal:j"'
                        " with --cols for a row-major grid")
    p.add_argument("--cols", type=int, default=None,
                   help="column count when the family is a flattened grid")
    p.set_defaults(func=_cmd_ultraproduct)

    p = common(subs.add_parser(
        "henkin-eval",
        help="truth with relation quantifiers ranging over the decomposable"
             " relations of an ultraproduct (Henkin semantics)"))
    p.add_argument("--family", required=True)
    p.add_argument("--ultrafilter", required=True)
    p.add_argument("--cols", type=int, default=None,
                   help="column count when the family is a flattened grid")
    p.add_argument("--formula")
    p.add_argument("--builtin")
    p.add_argument("--arity-bound", type=int, default=2)
    p.set_defaults(func=_cmd_henkin_eval)

    p = common(subs.add_parser(
        "check",
        help="seeded verification suites: los (transfer to ultraproducts),"
             " fubini (iterated products), metric (separation vs vector-set"
             " distance), omission (axiomatization by type omission)"))
    p.add_argument("what", choices=tuple(_CHECKS))
    p.add_argument("--trials", type=int, default=None)
    p.set_defaults(func=_cmd_check_dispatch)

    p = common(subs.add_parser(
        "separate",
        help="search for a Boolean combination over a fragment separating"
             " two structure classes"))
    p.add_argument("--k", required=True, help="directory or JSON array of structures")
    p.add_argument("--l", required=True)
    p.add_argument("--fragment", required=True, help="JSON array of formula strings")
    p.set_defaults(func=_cmd_separate)

    p = common(subs.add_parser(
        "types", help="realized complete types of a structure in a type context"))
    p.add_argument("--structure", required=True)
    p.add_argument("--context", required=True, help="JSON type-context file")
    p.set_defaults(func=_cmd_types)

    p = common(subs.add_parser(
        "insep",
        help="principal-scale inseparability: exhaustive isomorphism search"
             " between two families"))
    p.add_argument("--k", required=True)
    p.add_argument("--l", required=True)
    p.add_argument("--arity-bound", type=int, default=2)
    p.set_defaults(func=_cmd_insep)

    p = common(subs.add_parser("demo", help="run a named end-to-end scenario"))
    p.add_argument("name", choices=("np_example", "infinity", "los_suite",
                                    "fubini_suite", "separation"))
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--param", action="append", help="extra key=value parameter")
    p.set_defaults(func=_cmd_demo)

    return parser


_DEFAULT_TRIALS = {"los": 1000, "fubini": 50, "metric": 100, "omission": 20}


def _cmd_check_dispatch(args):
    if args.trials is None:
        args.trials = _DEFAULT_TRIALS[args.what]
    return _cmd_check(args)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except BudgetExceededError as exc:
        print(f"budget exhausted: {exc}", file=sys.stderr)
        return 3
    except (SoLabError, OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
