"""Command-line driver.

Exit codes: 0 every verdict is as expected, 1 input error, 2 a verdict is
Unknown (or otherwise differs from expectation), 3 Dependent where
independence was expected.
"""

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

from .constructions import (CaseError, CaseSpec, canonical_chain, case_library,
                            derivable_from_smaller, full_case,
                            lingering_tail_tableau, induct_injective_rho,
                            induct_injective_s, induct_surjective_r, library_lookup,
                            rank3_case, separation_on_bridge)
from .graph import ChainOfLoops, GraphError, instantiate_admissible, verify_admissible
from .independence import ALL_RULES, InputError
from .parameters import ParameterError, ParameterQuadruple, classify_range, from_grdm
from .report import exit_code, run_case, table_text, write_outputs
from .series import (DivisorError, TableauError, all_tableaux, column_start_bridges,
                     standard_tableau)

EXIT_OK, EXIT_INPUT, EXIT_UNKNOWN, EXIT_DEPENDENT = 0, 1, 2, 3
INPUT_ERRORS = (CaseError, GraphError, InputError, ParameterError, TableauError, DivisorError,
                OSError, json.JSONDecodeError, KeyError, ValueError)

BATTERIES = {
    "canonical": lambda: [canonical_chain(m, 3)[0] for m in range(2, 7)],
    "rank3": lambda: [rank3_case(rho) for rho in range(4)],
    "slopes": lambda: [full_case(3, 2), library_lookup("edge", r=4), library_lookup("rank5")],
    "library": case_library,
}


class UsageError(Exception):
    pass


def _params(args):
    """Parameters from ``--r --s --rho --m`` or ``--g --r --d --m``; None if absent."""
    m = args.m if args.m is not None else 3
    if args.g is not None and args.d is not None:
        if args.r is None:
            raise UsageError("--g/--d need --r")
        return from_grdm(args.g, args.r, args.d, m)
    if args.r is not None and args.s is not None:
        return ParameterQuadruple(args.r, args.s, args.rho or 0, m)
    return None


def _lib_params(args):
    return {k: getattr(args, k) for k in ("m", "r", "s", "rho", "g")}


def resolve_case(args):
    if getattr(args, "library", None):
        return library_lookup(args.library, **_lib_params(args))
    if getattr(args, "tableau", None):
        return CaseSpec.from_files(args.tableau, args.sidecar, args.m)
    p = _params(args)
    if p is None:
        raise UsageError("give --library, --tableau, or parameters (--r --s [--rho] --m)")
    return full_case(p.r, p.s, p.rho, p.m)


def _load_lengths(path):
    with open(path, encoding="utf-8") as fh:
        return ChainOfLoops.from_json(json.load(fh))


def _rules(args):
    if not args.rules:
        return ALL_RULES
    rules = tuple(x.strip().upper() for x in args.rules.split(",") if x.strip())
    bad = [x for x in rules if x not in ALL_RULES]
    if bad:
        raise UsageError(f"unknown rules {bad}; choose from {','.join(ALL_RULES)}")
    return rules


def _check_long(case, args):
    if case.expensive and not args.allow_long:
        raise UsageError(f"{case.name} is flagged expensive; pass --allow-long to run it")


# -- commands ---------------------------------------------------------------------

def cmd_verify(args):
    case = resolve_case(args)
    _check_long(case, args)
    G = _load_lengths(args.lengths) if args.lengths else None
    if G is not None and G.g != case.parameters.g:
        raise UsageError(f"lengths file has g={G.g}, case has g={case.parameters.g}")
    rep, _ = run_case(case, seed=args.seed, rules=_rules(args), budget=args.budget,
                      terse=args.terse, G=G)
    if args.out:
        write_outputs([rep], args.out)
    if args.terse:
        print(f"{rep.case['name']}: {rep.verdict} ({rep.seconds:.3f} s)")
    else:
        print(rep.dumps())
    return exit_code([rep])


def _structural(case, op, src):
    """Invariants that hold for every image case without running the certifier."""
    p = case.parameters
    out = {"tableau_valid": True, "size": len(case.A),
           "target_size": classify_range(p).target_size}
    out["size_ok"] = out["size"] == out["target_size"]
    if op == "r+":
        vals, ok = separation_on_bridge(case, p.m, p.s, src.parameters.r)
        out["separation"] = {"values": vals, "ok": ok}
    return out


def cmd_induct(args):
    if args.derive:
        p = None if args.library or args.tableau else _params(args)
        p = p or resolve_case(args).parameters
        sources = derivable_from_smaller(p)
        out = {"parameters": p.as_dict(),
               "sources": [{"op": op, "parameters": q.as_dict()} for op, q in sources]}
        print(json.dumps(out, indent=2))
        if not sources:
            print(f"{p} cannot be derived from any case of smaller genus", file=sys.stderr)
            return EXIT_INPUT
        return EXIT_OK
    if not args.op:
        raise UsageError("induct needs --op rho+|s+|r+ (or --derive)")
    src = resolve_case(args)
    p = src.parameters
    step = {"rho+": induct_injective_rho, "s+": induct_injective_s,
            "r+": induct_surjective_r}[args.op]
    results = []
    reports = []
    case = src
    for _ in range(args.count):
        prev, case = case, step(case)
        entry = {"case": case.name, "parameters": case.parameters.as_dict(),
                 "structure": _structural(case, args.op, prev)}
        if args.recheck:
            rep, _ = run_case(case, seed=args.seed, rules=_rules(args), budget=args.budget,
                              terse=args.terse)
            entry["verdict"] = rep.verdict
            entry["seconds"] = rep.seconds
            reports.append(rep)
        results.append(entry)
    print(json.dumps({"parameters": p.as_dict(), "op": args.op, "images": results}, indent=2))
    if args.out and reports:
        write_outputs(reports, args.out)
    if not all(e["structure"]["size_ok"] and e["structure"].get("separation", {"ok": True})["ok"]
               for e in results):
        return EXIT_UNKNOWN
    return exit_code(reports)


def _batch_cases(args):
    cases = []
    if args.batch:
        with open(args.batch, encoding="utf-8") as fh:
            entries = json.load(fh)
        if not isinstance(entries, list):
            raise UsageError("batch file must hold a JSON list")
        for e in entries:
            if "library" in e:
                params = {k: e.get(k) for k in ("m", "r", "s", "rho", "g")}
                cases.append(library_lookup(e["library"], **params))
            elif "tableau" in e:
                cases.append(CaseSpec.from_files(e["tableau"], e.get("sidecar"), e.get("m")))
            else:
                p = ParameterQuadruple(e["r"], e["s"], e.get("rho", 0), e.get("m", 3))
                cases.append(full_case(p.r, p.s, p.rho, p.m))
    if args.battery:
        if args.battery not in BATTERIES:
            raise UsageError(f"unknown battery {args.battery!r}; choose from {sorted(BATTERIES)}")
        cases += BATTERIES[args.battery]()
    if args.library:
        cases += [library_lookup(name, **_lib_params(args)) for name in args.library.split(",")]
    skipped = [c.name for c in cases if c.expensive and not args.allow_long]
    cases = [c for c in cases if not c.expensive or args.allow_long]
    return cases, skipped


def _worker(job):
    case, seed, rules, budget, terse = job
    rep, _ = run_case(case, seed=seed, rules=rules, budget=budget, terse=terse)
    return rep


def workers():
    n = os.cpu_count() or 1
    cap = os.environ.get("TROPRANK_THREADS")
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            raise UsageError(f"TROPRANK_THREADS must be an integer, got {cap!r}")
    return n


def cmd_report(args):
    cases, skipped = _batch_cases(args)
    rules = _rules(args)
    jobs = [(c, args.seed, rules, args.budget, args.terse) for c in cases]
    n = min(workers(), max(len(jobs), 1))
    if n <= 1:
        reports = [_worker(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=n) as pool:
            reports = list(pool.map(_worker, jobs))
    for name in skipped:
        print(f"skipped {name} (expensive; pass --allow-long)", file=sys.stderr)
    print(table_text(reports), end="")
    if args.out:
        paths = write_outputs(reports, args.out, figures=not args.no_figures)
        print(f"wrote {paths['json']} and {paths['csv']}", file=sys.stderr)
    return exit_code(reports)


def cmd_enumerate(args):
    p = _params(args)
    if p is None:
        raise UsageError("enumerate needs --r --s [--rho] or --g --r --d")
    tabs = all_tableaux(p.r, p.s, p.rho)
    if args.terse:
        print(json.dumps({"parameters": p.as_dict(), "count": len(tabs)}))
    else:
        print("\n".join(t.to_text() for t in tabs), end="")
        print(f"{len(tabs)} tableaux for {p}", file=sys.stderr)
    return EXIT_OK


def cmd_lengths(args):
    p = _params(args)
    if args.library:
        case = library_lookup(args.library, **_lib_params(args))
        p, lb = case.parameters, case.long_bridges
    else:
        if p is None:
            raise UsageError("lengths needs parameters or --library")
        t = standard_tableau(p) if p.rho == 0 else lingering_tail_tableau(p.r, p.s, p.rho)
        lb = column_start_bridges(t)
    if args.lengths:
        G = _load_lengths(args.lengths)
        ok, problems = verify_admissible(G, p)
        print(json.dumps({"parameters": p.as_dict(), "admissible": ok, "problems": problems},
                         indent=2))
        return EXIT_OK if ok else EXIT_INPUT
    G = instantiate_admissible(p, lb)
    print(json.dumps(dict(G.to_json(), parameters=p.as_dict()), indent=2))
    return EXIT_OK


# -- argument parsing -------------------------------------------------------------

def _add_params(sp):
    sp.add_argument("--library", help="library case name (canonical, wide, edge, rank3, "
                    "rank4, rank5, example, or an exact case name)")
    for flag in ("m", "r", "s", "rho", "g", "d"):
        sp.add_argument(f"--{flag}", type=int)


def _add_run(sp):
    sp.add_argument("--seed", type=int, default=0, help="seed for generic chip positions")
    sp.add_argument("--rules", help="comma separated subset of C1..C7")
    sp.add_argument("--budget", type=int, default=200, help="dependence search iterations")
    sp.add_argument("--terse", action="store_true", help="truncate the rule trace")
    sp.add_argument("--allow-long", action="store_true", help="run cases flagged expensive")
    sp.add_argument("--out", help="directory for JSON, CSV and PNG output")


def build_parser():
    ap = argparse.ArgumentParser(prog="troprank", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("verify", help="certify one case")
    _add_params(sp)
    _add_run(sp)
    sp.add_argument("--tableau", help="tableau file (rows of integers, optional 'linger:' line)")
    sp.add_argument("--sidecar", help="JSON with A, m, long_bridges")
    sp.add_argument("--lengths", help="edge-length JSON overriding the instantiated graph")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("induct", help="apply an inductive transformation")
    _add_params(sp)
    _add_run(sp)
    sp.add_argument("--tableau")
    sp.add_argument("--sidecar")
    sp.add_argument("--op", choices=("rho+", "s+", "r+"))
    sp.add_argument("--count", type=int, default=1)
    sp.add_argument("--recheck", action="store_true", help="run the certifier on each image")
    sp.add_argument("--derive", action="store_true",
                    help="list smaller-genus cases that induct to this one")
    sp.set_defaults(func=cmd_induct)

    sp = sub.add_parser("report", help="run a batch of cases")
    _add_params(sp)
    _add_run(sp)
    sp.add_argument("--batch", help="JSON list of case entries")
    sp.add_argument("--battery", help=f"named battery: {', '.join(sorted(BATTERIES))}")
    sp.add_argument("--no-figures", action="store_true")
    sp.set_defaults(func=cmd_report)

    sp = sub.add_parser("enumerate", help="list tableaux for given parameters")
    _add_params(sp)
    sp.add_argument("--terse", action="store_true", help="print only the count")
    sp.set_defaults(func=cmd_enumerate)

    sp = sub.add_parser("lengths", help="emit or validate edge lengths")
    _add_params(sp)
    sp.add_argument("--lengths", help="file to validate instead of emitting")
    sp.set_defaults(func=cmd_lengths)
    return ap


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad usage; 2 is reserved for Unknown verdicts
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
