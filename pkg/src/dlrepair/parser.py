"""Text grammars for programs, fact databases and tuples.

This is the only place raw text becomes model values, and the only place
model values become text again.  Grammar summary:

* one statement per ``.``; ``%`` starts a line comment
* rule:       ``head :- lit, lit, ... .`` with head ``name(t1,...,tk)`` or
  bare ``name`` for arity 0
* body literal: relational atom, ``!``-negated relational atom, ``t1 = t2``
  or ``t1 != t2``
* directive:  ``@answer name.`` (otherwise the first rule's head is the
  answer predicate)
* fact:       ``name(c1,...,ck).`` with constants only
* variables match ``[A-Z][A-Za-z0-9_]*``; constants match
  ``[a-z0-9][A-Za-z0-9_]*`` or a double-quoted string
* constants starting with ``_`` are reserved for internally generated fresh
  constants and are rejected in user input; ``parse_fact`` can opt in to
  them so machine-produced repair output round-trips

Constants in rule heads are desugared into equality atoms over fresh
variables, so parsed rules always satisfy the model invariants.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .model import (
    ArityMismatch,
    Comparison,
    Fact,
    Instance,
    Program,
    RelLiteral,
    Rule,
    Term,
    const,
    is_fresh_constant,
    ungrounded_vars,
    var,
)

_BARE_CONST_RE = re.compile(r"[a-z0-9][A-Za-z0-9_]*\Z")
_VAR_RE = re.compile(r"[A-Z][A-Za-z0-9_]*\Z")


class SourceError(ValueError):
    """A problem in the input text; positions are 1-based."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.message = message
        self.line = line
        self.column = column


class UnsafeRule(SourceError):
    """Some variable of the rule occurs in no positive body literal and is
    not forced by equality atoms."""


class NegatedIdb(SourceError):
    """A negative literal names an intensional (derived) symbol."""


class UndefinedIdb(SourceError):
    """An intensional symbol has no defining rule."""


class VariableInFact(SourceError):
    """A fact statement contains a variable."""


@dataclass(frozen=True, slots=True)
class _Token:
    kind: str
    value: str
    line: int
    column: int


_PUNCT = {
    "(": "LPAREN",
    ")": "RPAREN",
    ",": "COMMA",
    ".": "DOT",
    "!": "BANG",
    "=": "EQ",
    "@": "AT",
}


def _tokenize(text: str, allow_fresh: bool) -> list[_Token]:
    tokens: list[_Token] = []
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if c.isspace():
            i += 1
            col += 1
            continue
        if c == "%":
            while i < n and text[i] != "\n":
                i += 1
            continue
        start_line, start_col = line, col
        if c == ":":
            if text[i : i + 2] == ":-":
                tokens.append(_Token("IF", ":-", start_line, start_col))
                i += 2
                col += 2
                continue
            raise SourceError("expected ':-'", start_line, start_col)
        if c == "!":
            if text[i : i + 2] == "!=":
                tokens.append(_Token("NEQ", "!=", start_line, start_col))
                i += 2
                col += 2
                continue
            tokens.append(_Token("BANG", "!", start_line, start_col))
            i += 1
            col += 1
            continue
        if c in _PUNCT:
            tokens.append(_Token(_PUNCT[c], c, start_line, start_col))
            i += 1
            col += 1
            continue
        if c == '"':
            i += 1
            col += 1
            chars: list[str] = []
            while i < n and text[i] != '"':
                if text[i] == "\n":
                    raise SourceError("unterminated string", start_line, start_col)
                if text[i] == "\\" and i + 1 < n:
                    chars.append(text[i + 1])
                    i += 2
                    col += 2
                    continue
                chars.append(text[i])
                i += 1
                col += 1
            if i >= n:
                raise SourceError("unterminated string", start_line, start_col)
            i += 1
            col += 1
            value = "".join(chars)
            if value.startswith("_"):
                raise SourceError("constants starting with '_' are reserved", start_line, start_col)
            tokens.append(_Token("STRING", value, start_line, start_col))
            continue
        if c.isalnum() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            if word.startswith("_") and not (allow_fresh and is_fresh_constant(word)):
                raise SourceError("names starting with '_' are reserved", start_line, start_col)
            tokens.append(_Token("IDENT", word, start_line, start_col))
            col += j - i
            i = j
            continue
        raise SourceError(f"unexpected character {c!r}", start_line, start_col)
    tokens.append(_Token("EOF", "", line, col))
    return tokens


class _Parser:
    def __init__(self, text: str, allow_fresh: bool = False):
        self.tokens = _tokenize(text, allow_fresh)
        self.pos = 0

    def peek(self, ahead: int = 0) -> _Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def next(self) -> _Token:
        tok = self.tokens[self.pos]
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def expect(self, kind: str, what: str) -> _Token:
        tok = self.next()
        if tok.kind != kind:
            raise SourceError(f"expected {what}, found {tok.value or 'end of input'!r}", tok.line, tok.column)
        return tok

    def term(self) -> tuple[Term, _Token]:
        tok = self.next()
        if tok.kind == "STRING":
            return const(tok.value), tok
        if tok.kind == "IDENT":
            if _VAR_RE.match(tok.value):
                return var(tok.value), tok
            return const(tok.value), tok
        raise SourceError(f"expected a term, found {tok.value or 'end of input'!r}", tok.line, tok.column)

    def term_list(self) -> tuple[list[Term], list[_Token]]:
        terms: list[Term] = []
        toks: list[_Token] = []
        self.expect("LPAREN", "'('")
        if self.peek().kind == "RPAREN":
            self.next()
            return terms, toks
        while True:
            t, tok = self.term()
            terms.append(t)
            toks.append(tok)
            nxt = self.next()
            if nxt.kind == "RPAREN":
                return terms, toks
            if nxt.kind != "COMMA":
                raise SourceError("expected ',' or ')'", nxt.line, nxt.column)

    def atom(self) -> tuple[str, list[Term], _Token]:
        tok = self.expect("IDENT", "a relation name")
        if self.peek().kind == "LPAREN":
            terms, _ = self.term_list()
            return tok.value, terms, tok
        return tok.value, [], tok


def _body_literal(p: _Parser) -> tuple:
    """Returns ("rel", RelLiteral, token) or ("cmp", Comparison, token)."""
    tok = p.peek()
    if tok.kind == "BANG":
        p.next()
        name, terms, name_tok = p.atom()
        return "rel", RelLiteral(name, tuple(terms), positive=False), name_tok
    if tok.kind == "IDENT" and p.peek(1).kind == "LPAREN":
        name, terms, name_tok = p.atom()
        return "rel", RelLiteral(name, tuple(terms), positive=True), name_tok
    if tok.kind == "IDENT" and p.peek(1).kind not in ("EQ", "NEQ"):
        name, terms, name_tok = p.atom()
        return "rel", RelLiteral(name, tuple(terms), positive=True), name_tok
    left, left_tok = p.term()
    op_tok = p.next()
    if op_tok.kind == "EQ":
        op = "eq"
    elif op_tok.kind == "NEQ":
        op = "neq"
    else:
        raise SourceError("expected '=' or '!='", op_tok.line, op_tok.column)
    right, _ = p.term()
    return "cmp", Comparison(op, left, right), left_tok


def _desugar_head(terms: list[Term], used: set[str]) -> tuple[tuple[Term, ...], list[Comparison]]:
    """Replace head constants with fresh variables bound by equality atoms."""
    head: list[Term] = []
    extra: list[Comparison] = []
    counter = 0
    for t in terms:
        if t.is_variable:
            head.append(t)
            continue
        while f"X{counter}" in used:
            counter += 1
        fresh = var(f"X{counter}")
        used.add(fresh.name)
        head.append(fresh)
        extra.append(Comparison("eq", fresh, t))
    return tuple(head), extra


def parse_program(text: str) -> Program:
    p = _Parser(text)
    rules: list[Rule] = []
    rule_tokens: list[tuple[_Token, list[tuple[RelLiteral, _Token]]]] = []
    answer: str | None = None
    answer_tok: _Token | None = None
    arities: dict[str, int] = {}

    def see_arity(symbol: str, arity: int, tok: _Token) -> None:
        known = arities.setdefault(symbol, arity)
        if known != arity:
            raise ArityMismatch(
                f"line {tok.line}, column {tok.column}: "
                f"{symbol} used with arity {arity}, previously {known}"
            )

    while p.peek().kind != "EOF":
        if p.peek().kind == "AT":
            at = p.next()
            word = p.expect("IDENT", "a directive name")
            if word.value != "answer":
                raise SourceError(f"unknown directive @{word.value}", word.line, word.column)
            if answer is not None:
                raise SourceError("duplicate @answer directive", at.line, at.column)
            name_tok = p.expect("IDENT", "a relation name")
            answer, answer_tok = name_tok.value, name_tok
            p.expect("DOT", "'.'")
            continue
        head_tok = p.peek()
        head_name, head_terms, _ = p.atom()
        used_vars = {t.name for t in head_terms if t.is_variable}
        p.expect("IF", "':-'")
        body: list = []
        rel_spans: list[tuple[RelLiteral, _Token]] = []
        while True:
            kind, lit, tok = _body_literal(p)
            body.append(lit)
            if kind == "rel":
                rel_spans.append((lit, tok))
                see_arity(lit.relation, len(lit.args), tok)
            nxt = p.next()
            if nxt.kind == "DOT":
                break
            if nxt.kind != "COMMA":
                raise SourceError("expected ',' or '.'", nxt.line, nxt.column)
        for lit in body:
            if isinstance(lit, RelLiteral):
                used_vars.update(t.name for t in lit.args if t.is_variable)
            else:
                for t in (lit.left, lit.right):
                    if t.is_variable:
                        used_vars.add(t.name)
        head_args, extra = _desugar_head(head_terms, used_vars)
        see_arity(head_name, len(head_args), head_tok)
        rule = Rule(head_name, head_args, tuple(extra) + tuple(body))
        rules.append(rule)
        rule_tokens.append((head_tok, rel_spans))

    if not rules:
        tok = p.peek()
        raise SourceError("empty program", tok.line, tok.column)
    if answer is None:
        answer = rules[0].head
    heads = {r.head for r in rules}
    if answer not in heads:
        assert answer_tok is not None
        raise UndefinedIdb(f"answer predicate {answer} has no defining rule", answer_tok.line, answer_tok.column)
    for rule, (head_tok, rel_spans) in zip(rules, rule_tokens):
        for lit, tok in rel_spans:
            if not lit.positive and lit.relation in heads:
                raise NegatedIdb(f"negated intensional symbol {lit.relation}", tok.line, tok.column)
        missing = rule.free_vars - rule.body_vars
        if missing:
            raise UnsafeRule(
                f"head variable {sorted(missing)[0]} does not occur in the body",
                head_tok.line,
                head_tok.column,
            )
        loose = ungrounded_vars(rule)
        if loose:
            raise UnsafeRule(
                f"variable {sorted(loose)[0]} occurs in no positive literal",
                head_tok.line,
                head_tok.column,
            )
    schema = {sym: arity for sym, arity in arities.items() if sym not in heads}
    return Program(tuple(rules), answer, schema)


def parse_instance(text: str) -> Instance:
    p = _Parser(text)
    facts: set[Fact] = set()
    arities: dict[str, int] = {}
    while p.peek().kind != "EOF":
        name, terms, name_tok = p.atom()
        args: list[str] = []
        for t in terms:
            if t.is_variable:
                raise VariableInFact(f"variable {t.name} in fact", name_tok.line, name_tok.column)
            args.append(t.name)
        known = arities.setdefault(name, len(args))
        if known != len(args):
            raise ArityMismatch(
                f"line {name_tok.line}, column {name_tok.column}: "
                f"{name} used with arity {len(args)}, previously {known}"
            )
        p.expect("DOT", "'.'")
        facts.add(Fact(name, tuple(args)))
    return Instance(frozenset(facts))


def parse_tuple(text: str) -> tuple[str, ...]:
    p = _Parser(text)
    p.expect("LPAREN", "'('")
    values: list[str] = []
    if p.peek().kind == "RPAREN":
        p.next()
    else:
        while True:
            t, tok = p.term()
            if t.is_variable:
                raise SourceError("variables are not allowed in a tuple", tok.line, tok.column)
            values.append(t.name)
            nxt = p.next()
            if nxt.kind == "RPAREN":
                break
            if nxt.kind != "COMMA":
                raise SourceError("expected ',' or ')'", nxt.line, nxt.column)
    p.expect("EOF", "end of input")
    return tuple(values)


def parse_fact(text: str, allow_fresh: bool = False) -> Fact:
    """Parse a single fact like ``r(a,b)`` (no trailing dot).

    ``allow_fresh`` admits machine-generated fresh constants (``_c0`` ...),
    which the file grammars reject; it is used to round-trip repair output.
    """
    p = _Parser(text, allow_fresh=allow_fresh)
    name, terms, name_tok = p.atom()
    args: list[str] = []
    for t in terms:
        if t.is_variable:
            raise VariableInFact(f"variable {t.name} in fact", name_tok.line, name_tok.column)
        args.append(t.name)
    p.expect("EOF", "end of input")
    return Fact(name, tuple(args))


# ---------------------------------------------------------------------------
# Rendering (the inverse direction of the same grammar)


def render_constant(name: str) -> str:
    if _BARE_CONST_RE.match(name) or is_fresh_constant(name):
        return name
    escaped = name.replace("\\", "\\\\").replace('"', '\\"')
    return f'"{escaped}"'


def render_term(term: Term) -> str:
    return term.name if term.is_variable else render_constant(term.name)


def render_fact(fact: Fact) -> str:
    if not fact.args:
        return fact.relation
    return f"{fact.relation}({','.join(render_constant(a) for a in fact.args)})"


def render_literal(lit) -> str:
    if isinstance(lit, Comparison):
        op = "=" if lit.op == "eq" else "!="
        return f"{render_term(lit.left)} {op} {render_term(lit.right)}"
    args = f"({','.join(render_term(t) for t in lit.args)})" if lit.args else ""
    return f"{'' if lit.positive else '!'}{lit.relation}{args}"


def render_rule(rule: Rule) -> str:
    head = rule.head
    if rule.head_args:
        head += f"({','.join(render_term(t) for t in rule.head_args)})"
    return f"{head} :- {', '.join(render_literal(lit) for lit in rule.body)}."


def render_program(program: Program) -> str:
    lines = [f"@answer {program.answer}."]
    lines.extend(render_rule(r) for r in program.rules)
    return "\n".join(lines) + "\n"


def render_instance(instance: Instance) -> str:
    return "".join(f"{render_fact(f)}.\n" for f in instance)


def render_tuple(values: tuple[str, ...]) -> str:
    return f"({','.join(render_constant(v) for v in values)})"
