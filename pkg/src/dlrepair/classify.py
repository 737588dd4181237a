"""Syntactic fragment detection.

Solvers route on these flags to the cheapest correct algorithm, and the CLI
reports them.  Everything is computed from the rule syntax alone; consistent
variable renaming never changes a flag.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

from .model import Comparison, Program, Rule


@dataclass(frozen=True, slots=True)
class QueryClass:
    is_cq: bool
    is_ucq: bool
    has_negation: bool
    has_comparisons: bool
    is_recursive: bool
    is_semipositive_datalog: bool
    is_positive_datalog: bool
    self_join_free: bool
    projection_free: bool
    join_free: bool
    selection_free: bool

    def as_dict(self) -> dict[str, bool]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def _is_recursive(program: Program) -> bool:
    idb = program.idb
    edges: dict[str, set[str]] = {sym: set() for sym in idb}
    for r in program.rules:
        for lit in r.relational_literals():
            if lit.relation in idb:
                edges[r.head].add(lit.relation)
    # Depth-first cycle detection over the head-dependency graph.
    WHITE, GRAY, BLACK = 0, 1, 2
    color = {sym: WHITE for sym in idb}

    def visit(sym: str) -> bool:
        color[sym] = GRAY
        for nxt in edges[sym]:
            if color[nxt] == GRAY:
                return True
            if color[nxt] == WHITE and visit(nxt):
                return True
        color[sym] = BLACK
        return False

    return any(color[sym] == WHITE and visit(sym) for sym in idb)


def _selection_free_rule(rule: Rule) -> bool:
    head_vars = [t.name for t in rule.head_args]
    if len(head_vars) != len(set(head_vars)):
        return False
    for lit in rule.body:
        if isinstance(lit, Comparison):
            if lit.op == "eq":
                return False
            if not (lit.left.is_variable and lit.right.is_variable):
                return False
            continue
        names = [t.name for t in lit.args]
        if any(not t.is_variable for t in lit.args):
            return False
        if len(names) != len(set(names)):
            return False
    return True


def classify(program: Program) -> QueryClass:
    idb = program.idb
    rules = program.rules

    has_negation = any(not lit.positive for r in rules for lit in r.relational_literals())
    has_comparisons = any(isinstance(lit, Comparison) for r in rules for lit in r.body)
    has_neq = any(
        isinstance(lit, Comparison) and lit.op == "neq" for r in rules for lit in r.body
    )
    recursive = _is_recursive(program)

    bodies_extensional = all(
        lit.relation not in idb for r in rules for lit in r.relational_literals()
    )
    is_ucq = bodies_extensional and all(r.head == program.answer for r in rules)
    is_cq = is_ucq and len(rules) == 1 and not has_negation and not has_neq

    self_join_free = True
    for r in rules:
        seen: set[str] = set()
        for lit in r.relational_literals():
            if lit.relation in idb:
                continue
            if lit.relation in seen:
                self_join_free = False
            seen.add(lit.relation)

    projection_free = all(not r.bound_vars for r in rules)
    join_free = all(len(r.relational_literals()) == 1 for r in rules)
    selection_free = all(_selection_free_rule(r) for r in rules)

    return QueryClass(
        is_cq=is_cq,
        is_ucq=is_ucq,
        has_negation=has_negation,
        has_comparisons=has_comparisons,
        is_recursive=recursive,
        is_semipositive_datalog=all(
            lit.positive or lit.relation not in idb for r in rules for lit in r.relational_literals()
        ),
        is_positive_datalog=not has_negation and not has_neq,
        self_join_free=self_join_free,
        projection_free=projection_free,
        join_free=join_free,
        selection_free=selection_free,
    )
