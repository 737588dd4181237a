"""Satisfiability deciders and the repair-existence decision.

A non-recursive query with negated atoms is satisfiable iff one of its rules
is, which reduces to an equality-closure check plus a clash test between the
ground positive and ground negated atoms.  A positive datalog program is
satisfiable iff it fires on the full instance over its own constants plus
one fresh constant.  Repair existence reduces to satisfiability of the
query specialised to the target tuple: the specialised query holds on some
instance J exactly when the update turning the input instance into J is a
repair, so the input instance is irrelevant to existence.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .classify import classify
from .engine import eval_datalog
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
    fresh_constants,
)


class NotUcq(ValueError):
    """The program is recursive or uses derived symbols in rule bodies."""


class NotPositiveDatalog(ValueError):
    """The program contains negation or inequality atoms."""


class Unsupported(ValueError):
    """No decision procedure is implemented for this fragment."""


@dataclass(frozen=True)
class SatResult:
    satisfiable: bool
    witness: Instance | None = None


# ---------------------------------------------------------------------------
# Equality closure


class _UnionFind:
    def __init__(self) -> None:
        self.parent: dict[tuple[str, str], tuple[str, str]] = {}

    def find(self, node: tuple[str, str]) -> tuple[str, str]:
        self.parent.setdefault(node, node)
        root = node
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[node] != root:
            self.parent[node], node = root, self.parent[node]
        return root

    def union(self, a: tuple[str, str], b: tuple[str, str]) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[ra] = rb


def _node(term: Term) -> tuple[str, str]:
    return ("v" if term.is_variable else "k", term.name)


def sat_cqneg(rule: Rule) -> SatResult:
    """Satisfiability of a single rule whose body holds only extensional
    literals and comparisons.

    Compute the equality closure of the rule's equality atoms; reject if it
    merges two distinct constants or contradicts an inequality atom.  Each
    class is instantiated by its constant if it has one, else by a distinct
    fresh constant; the rule is satisfiable iff no ground positive atom
    coincides with a ground negated atom, and the ground positive atoms then
    form a witness instance.
    """
    uf = _UnionFind()
    for term in _rule_terms(rule):
        uf.find(_node(term))
    for cmp_ in rule.comparisons():
        if cmp_.op == "eq":
            uf.union(_node(cmp_.left), _node(cmp_.right))

    # One constant per class at most.
    class_const: dict[tuple[str, str], str] = {}
    for node in list(uf.parent):
        kind, name = node
        if kind != "k":
            continue
        root = uf.find(node)
        if root in class_const and class_const[root] != name:
            return SatResult(False)
        class_const[root] = name

    for cmp_ in rule.comparisons():
        if cmp_.op == "neq" and uf.find(_node(cmp_.left)) == uf.find(_node(cmp_.right)):
            return SatResult(False)

    # Instantiate classes: constants stay, the rest get distinct fresh
    # constants numbered by first appearance in the body.
    value: dict[tuple[str, str], str] = {}
    counter = itertools.count()
    for term in _rule_terms(rule):
        root = uf.find(_node(term))
        if root in value:
            continue
        if root in class_const:
            value[root] = class_const[root]
        else:
            value[root] = f"_c{next(counter)}"

    def ground(lit: RelLiteral) -> Fact:
        return Fact(lit.relation, tuple(value[uf.find(_node(t))] for t in lit.args))

    positives = {ground(lit) for lit in rule.relational_literals() if lit.positive}
    negatives = {ground(lit) for lit in rule.relational_literals() if not lit.positive}
    if positives & negatives:
        return SatResult(False)
    return SatResult(True, Instance(frozenset(positives)))


def _rule_terms(rule: Rule):
    for lit in rule.body:
        if isinstance(lit, RelLiteral):
            yield from lit.args
        else:
            yield lit.left
            yield lit.right


def sat_ucqneg(program: Program) -> SatResult:
    """Satisfiability of a union: the first satisfiable rule wins."""
    if not classify(program).is_ucq:
        raise NotUcq("satisfiability by rule-wise closure needs a non-recursive query")
    for rule in program.rules:
        result = sat_cqneg(rule)
        if result.satisfiable:
            return result
    return SatResult(False)


def full_instance(program: Program, extra: tuple[str, ...] = ()) -> Instance:
    """All facts over the program's constants, the extras, and one fresh
    constant, for every extensional symbol."""
    domain = sorted(program.constants() | set(extra) | {fresh_constants(1)[0]})
    facts = [
        Fact(sym, args)
        for sym, arity in sorted(program.schema.items())
        for args in itertools.product(domain, repeat=arity)
    ]
    return Instance(frozenset(facts))


def sat_datalog_positive(program: Program) -> SatResult:
    """A positive program is monotone, so it is satisfiable iff it fires on
    the full instance over its own constants plus one fresh constant."""
    if not classify(program).is_positive_datalog:
        raise NotPositiveDatalog("program contains negation or inequality atoms")
    witness = full_instance(program)
    answers = eval_datalog(program, witness)[program.answer]
    if answers.tuples:
        return SatResult(True, witness)
    return SatResult(False)


# ---------------------------------------------------------------------------
# Repair existence


def _select_symbol(program: Program) -> str:
    used = set(program.arities) | {program.answer}
    base = "goal"
    if base not in used:
        return base
    for i in itertools.count():
        name = f"{base}{i}"
        if name not in used:
            return name


def specialize(program: Program, target: tuple[str, ...]) -> Program:
    """The Boolean query that holds iff the target is in the answer: each
    answer rule gets equality atoms pinning its head variables to the target
    constants.  Repeated head variables simply contribute two equalities."""
    if len(target) != program.arity:
        raise ArityMismatch(f"target has length {len(target)}, answer arity is {program.arity}")
    goal = _select_symbol(program)
    rules = []
    for rule in program.rules:
        if rule.head != program.answer:
            rules.append(rule)
            continue
        pins = tuple(
            Comparison("eq", term, const(value)) for term, value in zip(rule.head_args, target)
        )
        rules.append(Rule(goal, (), rule.body + pins))
    return Program(tuple(rules), goal, dict(program.schema))


def ma_dec(program: Program, instance: Instance, target: tuple[str, ...]) -> bool:
    """Does any repair exist for this query and target?

    The instance is irrelevant to existence (any satisfying instance J
    induces the repair Ins = J \\ I, Del = I \\ J); it is accepted for
    interface uniformity.
    """
    del instance
    flags = classify(program)
    boolean = specialize(program, target)
    if flags.is_ucq:
        return sat_ucqneg(boolean).satisfiable
    if flags.is_positive_datalog:
        return sat_datalog_positive(boolean).satisfiable
    raise Unsupported("repair existence for recursive programs with negation is not decided here")
