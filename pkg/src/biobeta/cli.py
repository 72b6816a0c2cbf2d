"""Command-line entry point: ``biobeta <verb> FILE [options]``.

Exit codes: 0 success, 1 semantic rejection, 2 I/O or parse failure.
"""

from __future__ import annotations

import argparse
import sys

from .kappa import show_kappa, translate
from .parser import ParseError, parse_membrane, parse_spec_with_diagnostics, parse_term
from .proteins import RuleError
from .query import QueryError, parse_query
from .reduction import (
    DEFAULT_DEPTH, DEFAULT_STATE_CAP, ReactiveSystem, StateCapExceeded, StepError,
)
from .terms import occurring_actions
from .wellformed import TypeCheckError, self_bond_lints, typecheck, wf_check

OK, REJECTED, FAILED = 0, 1, 2


class _Exit(Exception):
    def __init__(self, code, message=""):
        super().__init__(message)
        self.code = code


def _read(path):
    try:
        with open(path, encoding="utf-8") as f:
            return f.read()
    except OSError as e:
        raise _Exit(FAILED, f"error: cannot read {path}: {e.strerror}") from None


def _load_spec(path, out):
    text = _read(path)
    spec, diags = parse_spec_with_diagnostics(text, validate=False)
    if spec is None:
        for d in diags:
            print(f"{path}:{d}", file=out)
        raise _Exit(FAILED)
    return spec


def _load_terms(path, args, out):
    """``[(label, term)]`` from a spec (its systems) or a term file."""
    if path.endswith(".biot"):
        text = _read(path)
        try:
            return [("term", parse_term(text))]
        except ParseError as e:
            try:
                return [("membrane", parse_membrane(text))]
            except ParseError:
                print(f"{path}:{e.diagnostic}", file=out)
                raise _Exit(FAILED) from None
    spec = _load_spec(path, out)
    if args.system:
        if args.system not in spec.systems:
            raise _Exit(FAILED, f"error: no system named {args.system}")
        return [(args.system, spec.systems[args.system])]
    return list(spec.systems.items())


def _system(args, out):
    spec = _load_spec(args.file, out)
    try:
        rs = ReactiveSystem(spec, strict_fuse=args.strict_fuse, audit=not args.no_audit)
    except RuleError as e:
        raise _Exit(REJECTED, f"error: {e}") from None
    name = args.system or ("Main" if "Main" in spec.systems else None)
    if name is None or name not in spec.systems:
        raise _Exit(FAILED, f"error: no system named {args.system or 'Main'}")
    try:
        typecheck(spec.systems[name])
    except TypeCheckError as e:
        raise _Exit(REJECTED, f"error: system {name} is ill-formed: {e}") from None
    return rs, rs.initial(name)


# --- verbs -----------------------------------------------------------------

def cmd_check(args, out):
    worst = OK
    for label, term in _load_terms(args.file, args, out):
        print(f"system: {label}", file=out)
        try:
            j = typecheck(term)
        except TypeCheckError as e:
            worst = REJECTED
            print("verdict: ill-formed", file=out)
            print(f"error: {e}", file=out)
            for line in str(wf_check(term)).splitlines():
                print(line, file=out)
        else:
            print("verdict: well-formed", file=out)
            print(f"gamma1: {', '.join(sorted(j.gamma1))}", file=out)
            print(f"gamma2: {', '.join(sorted(j.gamma2))}", file=out)
            print("tau: {" + ", ".join(str(a) for a in sorted(j.tau)) + "}", file=out)
            print("act: {" + ", ".join(str(a) for a in sorted(occurring_actions(term))) + "}",
                  file=out)
        for lint in self_bond_lints(term):
            print(f"lint: {lint}", file=out)
        print(file=out)
    return worst


def cmd_validate(args, out):
    spec = _load_spec(args.file, out)
    _, diags = parse_spec_with_diagnostics(_read(args.file), validate=True)
    for d in diags:
        print(f"{args.file}:{d}", file=out)
    if any(d.severity == "error" for d in diags):
        return REJECTED
    print(f"{len(spec.protein_rules)} rules ok, {len(spec.pinch_configs)} pinch ok, "
          f"{len(spec.fuse_configs)} fuse ok", file=out)
    print(f"{len(spec.systems)} systems well-formed", file=out)
    return OK


def cmd_enumerate(args, out):
    rs, state = _system(args, out)
    print(state.text(), file=out)
    for r in rs.enabled(state):
        print(f"[{r.ordinal}] {r.describe()}", file=out)
    return OK


def cmd_run(args, out):
    rs, state = _system(args, out)
    try:
        trace = rs.run(state, args.strategy, args.max_steps, args.seed)
    except StepError as e:
        raise _Exit(REJECTED, f"error: {e}") from None
    text = trace.serialize()
    if args.out:
        try:
            with open(args.out, "w", encoding="utf-8") as f:
                f.write(text)
        except OSError as e:
            raise _Exit(FAILED, f"error: cannot write {args.out}: {e.strerror}") from None
        print(f"{len(trace)} steps written to {args.out}", file=out)
    else:
        out.write(text)
    return OK


def cmd_reach(args, out):
    try:
        query = parse_query(args.pattern)
    except QueryError as e:
        raise _Exit(FAILED, f"error: {e}") from None
    rs, state = _system(args, out)
    try:
        res = rs.reachable(state, depth=args.depth, state_cap=args.state_cap, goal=query.holds)
    except StateCapExceeded as e:
        print(f"state cap exceeded after {len(e.partial)} states", file=out)
        return REJECTED
    if res.found is None:
        print(f"not reachable within depth {args.depth} ({len(res)} states explored)", file=out)
        return REJECTED
    print(f"reachable at depth {res.depth[res.found]} ({len(res)} states explored)", file=out)
    out.write(res.witness(res.found).serialize())
    return OK


def cmd_translate(args, out):
    for label, term in _load_terms(args.file, args, out):
        print(f"{label}: {show_kappa(translate(term))}", file=out)
        for lint in self_bond_lints(term):
            print(f"lint: {lint} (rejected by the flat calculus)", file=sys.stderr)
    return OK


def cmd_repl(args, out, inp=None):
    inp = inp or sys.stdin
    rs, state = _system(args, out)
    def chooser(s, redexes):
        print(s.text(), file=out)
        for r in redexes:
            print(f"  [{r.ordinal}] {r.describe()}", file=out)
        while True:
            print("> ", end="", file=out, flush=True)
            line = inp.readline()
            if not line or line.strip() in ("q", "quit"):
                return None
            try:
                k = int(line.strip())
            except ValueError:
                print("enter an ordinal or q", file=out)
                continue
            if 0 <= k < len(redexes):
                return k
            print(f"ordinal out of range 0..{len(redexes) - 1}", file=out)

    trace = rs.run(state, "interactive", args.max_steps, chooser=chooser)
    print(trace.final.text(), file=out)
    if not rs.enabled(trace.final):
        print("no redexes", file=out)
    return OK


# --- argument parsing ----------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="biobeta", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="verb", required=True)

    def verb(name, fn, help_, system=True, engine=False):
        p = sub.add_parser(name, help=help_)
        p.add_argument("file")
        if system:
            p.add_argument("--system", help="named system (default: all, or Main)")
        if engine:
            p.add_argument("--strict-fuse", action="store_true",
                           help="add name-containment conditions to fuse introduction")
            p.add_argument("--no-audit", action="store_true", help="skip subject-reduction checks")
        p.set_defaults(fn=fn)
        return p

    verb("check", cmd_check, "type-check systems or a term file")
    verb("validate", cmd_validate, "validate rules, configurations and systems", system=False)
    verb("enumerate", cmd_enumerate, "list enabled redexes", engine=True)
    p = verb("run", cmd_run, "run a strategy and write a trace", engine=True)
    p.add_argument("--strategy", choices=("first", "random"), default="first")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-steps", type=int, default=64)
    p.add_argument("--out", help="trace file (default: standard output)")
    p = verb("reach", cmd_reach, "search for a state matching a pattern", engine=True)
    p.add_argument("--pattern", required=True)
    p.add_argument("--depth", type=int, default=DEFAULT_DEPTH)
    p.add_argument("--state-cap", type=int, default=DEFAULT_STATE_CAP)
    verb("translate", cmd_translate, "print the flat-calculus translation")
    p = verb("repl", cmd_repl, "step interactively", engine=True)
    p.add_argument("--max-steps", type=int, default=1000)
    return ap


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args, out)
    except _Exit as e:
        if str(e):
            print(str(e), file=out if e.code == REJECTED else sys.stderr)
        return e.code


if __name__ == "__main__":
    sys.exit(main())
