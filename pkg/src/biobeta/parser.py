"""Recursive-descent parser for terms (``.biot``) and specification files (``.biob``)."""

from __future__ import annotations

import re
from dataclasses import dataclass

from .model import (
    ANTIMONOTONE, MONOTONE, FuseConfig, PinchConfig, ProteinRule, Specification, WideSolution,
    group_of,
)
from .terms import (
    APOLAR, POLAR, CoFuse, CoPinch, Empty, Fuse, Nu, Par, Pinch, Protein, Signature,
    SignatureError, Site, Star, Zero, Cell, check_signature, occurring_actions,
)


@dataclass(frozen=True)
class Diagnostic:
    severity: str
    start: int
    end: int
    line: int
    column: int
    message: str
    section: str = ""

    def __str__(self):
        where = f" [{self.section}]" if self.section else ""
        return f"{self.line}:{self.column}: {self.severity}{where}: {self.message}"


class ParseError(Exception):
    def __init__(self, diagnostic: Diagnostic):
        super().__init__(str(diagnostic))
        self.diagnostic = diagnostic


class SpecError(Exception):
    def __init__(self, diagnostics: list[Diagnostic]):
        super().__init__("\n".join(str(d) for d in diagnostics))
        self.diagnostics = diagnostics


_TOKEN = re.compile(r"""
    (?P<ws>\s+|\#[^\n]*)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*'?)
  | (?P<int>\d+)
  | (?P<punct>->|<>|[<>|;()\[\]*,.:!={}])
""", re.VERBOSE)

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


@dataclass(frozen=True)
class Token:
    kind: str  # ident | int | punct | eof
    text: str
    start: int
    end: int


def _line_col(text: str, offset: int) -> tuple[int, int]:
    line = text.count("\n", 0, offset) + 1
    col = offset - (text.rfind("\n", 0, offset) + 1) + 1
    return line, col


def tokenize(text: str) -> list[Token]:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            line, col = _line_col(text, pos)
            raise ParseError(Diagnostic("error", pos, pos + 1, line, col,
                                        f"unexpected character {text[pos]!r}"))
        kind = m.lastgroup
        if kind != "ws":
            out.append(Token(kind, m.group(), m.start(), m.end()))
        pos = m.end()
    out.append(Token("eof", "", len(text), len(text)))
    return out


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = tokenize(text)
        self.i = 0
        self.section = ""
        # (protein, start, end, in_membrane) for signature diagnostics
        self.occurrences: list[tuple[Protein, int, int, bool]] = []

    # -- token helpers

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, text: str, k: int = 0) -> bool:
        t = self.peek(k) if k else self.tok
        return t.kind != "eof" and t.text == text

    def error(self, msg: str, tok: Token | None = None) -> ParseError:
        tok = tok or self.tok
        line, col = _line_col(self.text, tok.start)
        return ParseError(Diagnostic("error", tok.start, max(tok.end, tok.start + 1), line, col,
                                     msg, self.section))

    def next(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def expect(self, text: str) -> Token:
        if not self.at(text):
            found = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")
        return self.next()

    def name(self, what: str = "name") -> str:
        t = self.tok
        if t.kind != "ident" or not _IDENT.match(t.text):
            raise self.error(f"expected {what}")
        self.i += 1
        return t.text

    # -- terms

    def system(self):
        t = self.tok
        if t.text == "new" and self.peek().kind == "ident":
            self.next()
            names = [self.name()]
            while self.at(","):
                self.next()
                names.append(self.name())
            self.expect(".")
            body = self.system()
            for n in reversed(names):
                body = Nu(n, body)
            return body
        if self._prefix_ahead("p"):
            n = self._prefix_head()
            return Pinch(n, self.system())
        if self._prefix_ahead("f"):
            n = self._prefix_head()
            cell = self.atom()
            if not isinstance(cell, Cell):
                raise self.error("a fuse prefix must wrap a compartment", t)
            return Fuse(n, cell.membrane, cell.body)
        return self.par()

    def _prefix_ahead(self, letter: str) -> bool:
        return (self.tok.kind == "ident" and self.tok.text == letter and self.at("(", 1)
                and self.peek(2).kind == "ident" and self.at(")", 3) and self.at(":", 4))

    def _prefix_head(self) -> str:
        self.next()
        self.expect("(")
        n = self.name()
        self.expect(")")
        self.expect(":")
        return n

    def par(self):
        left = self.unit()
        while self.at("*"):
            self.next()
            left = Par(left, self.unit())
        return left

    def unit(self):
        t = self.tok
        if (t.text == "new" and self.peek().kind == "ident") or self._prefix_ahead("p"):
            return self.system()
        if self._prefix_ahead("f"):
            return self.system()
        return self.atom()

    def atom(self):
        t = self.tok
        if t.text == "<>":
            self.next()
            return Empty()
        if t.text == "(":
            self.next()
            body = self.system()
            self.expect(")")
            return body
        if t.text == "[":
            self.next()
            mem = self.membrane()
            self.expect("]")
            self.expect("(")
            body = self.system()
            self.expect(")")
            return Cell(mem, body)
        if t.kind == "ident":
            return self.protein(membrane=False)
        raise self.error(f"expected a system, found {t.text or 'end of input'!r}")

    def membrane(self):
        left = self.munit()
        while self.at(","):
            self.next()
            left = Star(left, self.munit())
        return left

    def munit(self):
        t = self.tok
        if t.text == "p'" and self.at("(", 1):
            self.next()
            self.expect("(")
            n = self.name()
            self.expect(")")
            self.expect(":")
            return CoPinch(n, self.membrane())
        if t.text == "f'" and self.at("(", 1):
            self.next()
            self.expect("(")
            n = self.name()
            self.expect(")")
            return CoFuse(n)
        if t.kind == "int" and t.text == "0":
            self.next()
            return Zero()
        if t.text == "(":
            self.next()
            body = self.membrane()
            self.expect(")")
            return body
        if t.kind == "ident":
            return self.protein(membrane=True)
        raise self.error(f"expected a membrane, found {t.text or 'end of input'!r}")

    def protein(self, membrane: bool) -> Protein:
        start = self.tok
        name = self.name("protein name")
        self.expect("(")
        sites: dict[int, Site] = {}
        while True:
            idx_tok = self.tok
            if idx_tok.kind != "int":
                raise self.error("expected a site index")
            self.next()
            idx = int(idx_tok.text)
            if self.at("!"):
                self.next()
                site = Site("b", self.name("bond name"))
            elif self.tok.kind == "ident" and self.tok.text in ("v", "h"):
                site = Site(self.next().text)
            else:
                raise self.error("expected 'v', 'h' or '!name' after site index")
            if idx in sites:
                raise self.error(f"site {idx} given twice", idx_tok)
            sites[idx] = site
            if self.at(","):
                self.next()
                continue
            break
        end = self.expect(")")
        if sorted(sites) != list(range(1, len(sites) + 1)):
            raise self.error(f"sites of {name} must be numbered 1..{len(sites)}", start)
        prot = Protein(name, tuple(sites[i] for i in range(1, len(sites) + 1)))
        self.occurrences.append((prot, start.start, end.end, membrane))
        return prot

    # -- wide solutions and spec statements

    def wide(self) -> WideSolution:
        restricted: list[str] = []
        if self.at("new"):
            self.next()
            restricted.append(self.name())
            while self.at(","):
                self.next()
                restricted.append(self.name())
            self.expect(".")
        if self.at("<>"):
            self.next()
            return WideSolution((), (), tuple(restricted))
        self.expect("<")
        sys_groups = [] if self.at("|") else self._zone(membrane=False)
        self.expect("|")
        mem_groups = [] if self.at(">") else self._zone(membrane=True)
        self.expect(">")
        return WideSolution(tuple(sys_groups), tuple(mem_groups), tuple(restricted))

    def _zone(self, membrane: bool):
        groups = [self._group(membrane)]
        while self.at(";"):
            self.next()
            groups.append(self._group(membrane))
        return groups

    def _group(self, membrane: bool):
        term = self.membrane() if membrane else self.system()
        try:
            return group_of(term)
        except ValueError:
            raise self.error("rule groups may contain only proteins") from None

    def end(self):
        if self.tok.kind != "eof":
            raise self.error(f"unexpected {self.tok.text!r}")


def parse_term(text: str):
    """Parse a system term; raises ParseError carrying a positioned Diagnostic."""
    p = _Parser(text)
    t = p.system()
    p.end()
    return t


def parse_membrane(text: str):
    p = _Parser(text)
    t = p.membrane()
    p.end()
    return t


def parse_wide(text: str) -> WideSolution:
    p = _Parser(text)
    ws = p.wide()
    p.end()
    return ws


_STATEMENTS = ("signature", "rule", "pinch", "fuse", "system")


class _SpecParser(_Parser):
    def __init__(self, text: str):
        super().__init__(text)
        self.diagnostics: list[Diagnostic] = []
        self.entries: list[tuple[str, str, int]] = []
        self.rules: list[tuple[ProteinRule, Token]] = []
        self.pinches: list[tuple[PinchConfig, Token]] = []
        self.fuses: list[tuple[FuseConfig, Token]] = []
        self.systems: list[tuple[str, object, Token]] = []
        self.spans: dict[int, list] = {}

    def diag(self, msg: str, start: int, end: int, severity: str = "error", section: str = ""):
        line, col = _line_col(self.text, start)
        self.diagnostics.append(Diagnostic(severity, start, end, line, col, msg,
                                           section or self.section))

    def run(self):
        while self.tok.kind != "eof":
            head = self.tok
            mark = len(self.occurrences)
            try:
                self.statement()
            except ParseError as e:
                self.diagnostics.append(e.diagnostic)
                self.recover()
            self.spans[head.start] = self.occurrences[mark:]

    def recover(self):
        if self.tok.kind != "eof":
            self.next()
        while self.tok.kind != "eof" and self.tok.text not in _STATEMENTS:
            self.next()

    def statement(self):
        t = self.tok
        if t.text == "signature":
            self.section = "signature"
            self.next()
            self.expect("{")
            while not self.at("}"):
                if self.tok.text not in (POLAR, APOLAR):
                    raise self.error("expected 'polar' or 'apolar'")
                polarity = self.next().text
                while True:
                    name_tok = self.tok
                    name = self.name("protein name")
                    self.expect(":")
                    if self.tok.kind != "int":
                        raise self.error("expected an arity")
                    arity = int(self.next().text)
                    if arity < 1:
                        self.diag(f"arity of {name} must be positive", name_tok.start, name_tok.end)
                    elif any(e[0] == name for e in self.entries):
                        self.diag(f"protein {name} declared twice", name_tok.start, name_tok.end)
                    else:
                        self.entries.append((name, polarity, arity))
                    if not self.at(","):
                        break
                    self.next()
                self.expect(";")
            self.next()
        elif t.text == "rule":
            self.section = "rule"
            self.next()
            rid = self.name("rule id")
            self.section = f"rule {rid}"
            keyword = None
            if self.tok.text in ("mono", "anti"):
                keyword = self.next().text
            self.expect(":")
            lhs = self.wide()
            self.expect("->")
            rhs = self.wide()
            self.expect(";")
            self.rules.append((self._make_rule(rid, keyword, lhs, rhs, t), t))
        elif t.text == "pinch":
            self.section = "pinch"
            self.next()
            cid = self.name("configuration id")
            self.section = f"pinch {cid}"
            self.expect(":")
            parts = self._fields([("P", False), ("P'", False), ("S", True), ("S'", True), ("Q", False)])
            self.pinches.append((PinchConfig(cid, *parts), t))
        elif t.text == "fuse":
            self.section = "fuse"
            self.next()
            cid = self.name("configuration id")
            self.section = f"fuse {cid}"
            self.expect(":")
            parts = self._fields([("P", False), ("S", True), ("R", False), ("T", True), ("Q", False)])
            self.fuses.append((FuseConfig(cid, *parts), t))
        elif t.text == "system":
            self.section = "system"
            self.next()
            name = self.name("system name")
            self.section = f"system {name}"
            self.expect("=")
            term = self.system()
            self.expect(";")
            self.systems.append((name, term, t))
        else:
            self.section = ""
            raise self.error(f"expected one of {', '.join(_STATEMENTS)}")

    def _fields(self, fields):
        parts = []
        for label, membrane in fields:
            tok = self.tok
            if tok.text != label:
                raise self.error(f"expected field {label}")
            self.next()
            self.expect("=")
            term = self.membrane() if membrane else self.system()
            try:
                group_of(term)
            except ValueError:
                raise self.error(f"field {label} must be an action-free protein composition",
                                 tok) from None
            self.expect(";")
            parts.append(term)
        return parts

    def _make_rule(self, rid, keyword, lhs, rhs, tok):
        if keyword is None:
            if rhs.restricted and not lhs.restricted:
                keyword = "mono"
            elif lhs.restricted and not rhs.restricted:
                keyword = "anti"
            else:
                raise self.error("cannot infer rule direction; write 'mono' or 'anti'", tok)
        if keyword == "mono":
            if lhs.restricted:
                raise self.error("a monotone rule restricts names on its right-hand side only", tok)
            return ProteinRule(rid, MONOTONE, lhs, rhs)
        if rhs.restricted:
            raise self.error("an anti-monotone rule restricts names on its left-hand side only", tok)
        return ProteinRule(rid, ANTIMONOTONE, rhs, lhs)


def parse_spec_with_diagnostics(text: str, *, validate: bool = True):
    """Parse a spec file, collecting every diagnostic instead of stopping at the first.

    Returns ``(spec, diagnostics)``; ``spec`` is None when any error was found.
    """
    try:
        p = _SpecParser(text)
    except ParseError as e:
        return None, [e.diagnostic]
    p.run()
    signature = Signature(tuple(p.entries))

    # signature conformance of every protein occurrence, one report per section
    reported = set()
    for occs in p.spans.values():
        for prot, start, end, membrane in occs:
            try:
                check_signature(prot, signature, membrane=membrane)
            except SignatureError as e:
                key = (str(e), _section_at(p, start))
                if key not in reported:
                    reported.add(key)
                    p.diag(key[0], start, end, section=key[1])

    def dedupe(items, what, key=lambda x: x[0].id):
        seen = set()
        for item in items:
            k = key(item)
            tok = item[-1]
            if k in seen:
                p.diag(f"duplicate {what} id {k}", tok.start, tok.end, section=f"{what} {k}")
            seen.add(k)

    dedupe(p.rules, "rule")
    dedupe(p.pinches, "pinch")
    dedupe(p.fuses, "fuse")
    dedupe(p.systems, "system", key=lambda x: x[0])

    spec = Specification(
        signature,
        [r for r, _ in p.rules],
        [c for c, _ in p.pinches],
        [c for c, _ in p.fuses],
        {name: term for name, term, _ in p.systems},
    )
    if validate and not any(d.severity == "error" for d in p.diagnostics):
        from .proteins import RuleError, validate_rule
        from .wellformed import TypeCheckError, typecheck

        for rule, tok in p.rules:
            try:
                validate_rule(rule)
            except RuleError as e:
                p.diag(str(e), tok.start, tok.end, section=f"rule {rule.id}")
        for cfgs, kind in ((p.pinches, "pinch"), (p.fuses, "fuse")):
            for cfg, tok in cfgs:
                parts = [getattr(cfg, f) for f in cfg.__dataclass_fields__ if f != "id"]
                if any(occurring_actions(x) for x in parts):
                    p.diag("configuration parts must be action-free", tok.start, tok.end,
                           section=f"{kind} {cfg.id}")
        for name, term, tok in p.systems:
            try:
                typecheck(term)
            except TypeCheckError as e:
                p.diag(f"ill-formed: {e}", tok.start, tok.end, section=f"system {name}")

    diags = sorted(p.diagnostics, key=lambda d: d.start)
    if any(d.severity == "error" for d in diags):
        return None, diags
    return spec, diags


def _section_at(p: _SpecParser, offset: int) -> str:
    best, label = -1, ""
    for items, what in ((p.rules, "rule"), (p.pinches, "pinch"), (p.fuses, "fuse")):
        for item, tok in items:
            if best < tok.start <= offset:
                best, label = tok.start, f"{what} {item.id}"
    for name, _, tok in p.systems:
        if best < tok.start <= offset:
            best, label = tok.start, f"system {name}"
    return label


def parse_spec(text: str, *, validate: bool = True) -> Specification:
    spec, diags = parse_spec_with_diagnostics(text, validate=validate)
    if spec is None:
        raise SpecError(diags)
    return spec
