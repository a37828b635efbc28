"""Fuzzy-logic formulas over proposition ids.

Grammar (case-insensitive keywords, NOT binds tightest, then AND, then OR,
all left-associative):

    expr   := term ("OR" term)*
    term   := factor ("AND" factor)*
    factor := "NOT" factor | "(" expr ")" | identifier

Identifiers are node ids (P1, P1.2, ...) or the assumption variable PA.
Evaluation uses the product relaxation: A AND B = A*B, A OR B = A+B-A*B,
NOT A = 1-A. Repeated variables are evaluated by plain substitution, which
diverges from exact probability semantics; read-once formulas are exact.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Mapping

from .errors import FormulaParseError, UnboundVariable

ASSUMPTION_VAR = "PA"

_IDENT_RE = re.compile(r"^(PA|P\d+(\.\d+)*)$", re.IGNORECASE)
_TOKEN_RE = re.compile(r"\(|\)|[A-Za-z][A-Za-z0-9_.]*")


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Not:
    child: "FormulaNode"


@dataclass(frozen=True)
class And:
    left: "FormulaNode"
    right: "FormulaNode"


@dataclass(frozen=True)
class Or:
    left: "FormulaNode"
    right: "FormulaNode"


FormulaNode = Var | Not | And | Or


def _tokenize(text: str) -> list[str]:
    tokens = []
    pos = 0
    for match in _TOKEN_RE.finditer(text):
        gap = text[pos:match.start()]
        if gap.strip():
            raise FormulaParseError(
                f"unknown token {gap.strip()!r}", position=len(tokens) + 1)
        tokens.append(match.group())
        pos = match.end()
    if text[pos:].strip():
        raise FormulaParseError(
            f"unknown token {text[pos:].strip()!r}", position=len(tokens) + 1)
    return tokens


class _Parser:
    def __init__(self, tokens: list[str]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> str | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self) -> str:
        tok = self.peek()
        if tok is None:
            raise FormulaParseError("unexpected end of formula",
                                    position=self.pos + 1)
        self.pos += 1
        return tok

    def expr(self) -> FormulaNode:
        node = self.term()
        while self.peek() is not None and self.peek().upper() == "OR":
            self.take()
            node = Or(node, self.term())
        return node

    def term(self) -> FormulaNode:
        node = self.factor()
        while self.peek() is not None and self.peek().upper() == "AND":
            self.take()
            node = And(node, self.factor())
        return node

    def factor(self) -> FormulaNode:
        tok = self.peek()
        if tok is None:
            raise FormulaParseError("unexpected end of formula",
                                    position=self.pos + 1)
        upper = tok.upper()
        if upper == "NOT":
            self.take()
            return Not(self.factor())
        if tok == "(":
            self.take()
            node = self.expr()
            closing = self.peek()
            if closing != ")":
                raise FormulaParseError("expected ')'", position=self.pos + 1)
            self.take()
            return node
        if upper in ("AND", "OR") or tok == ")":
            raise FormulaParseError(f"unexpected token {tok!r}",
                                    position=self.pos + 1)
        if not _IDENT_RE.match(tok):
            raise FormulaParseError(f"invalid identifier {tok!r}",
                                    position=self.pos + 1)
        self.take()
        # Identifiers are canonicalized to upper case (P1, PA).
        return Var(tok.upper())


def parse_formula(text: str) -> FormulaNode:
    tokens = _tokenize(text)
    if not tokens:
        raise FormulaParseError("empty formula", position=1)
    parser = _Parser(tokens)
    node = parser.expr()
    if parser.peek() is not None:
        raise FormulaParseError(f"trailing token {parser.peek()!r}",
                                position=parser.pos + 1)
    return node


def formula_vars(ast: FormulaNode) -> set[str]:
    if isinstance(ast, Var):
        return {ast.name}
    if isinstance(ast, Not):
        return formula_vars(ast.child)
    return formula_vars(ast.left) | formula_vars(ast.right)


def formula_to_text(ast: FormulaNode) -> str:
    """Deterministic fully-parenthesized rendering; reparses to the same AST."""
    if isinstance(ast, Var):
        return ast.name
    if isinstance(ast, Not):
        return f"NOT {formula_to_text(ast.child)}"
    op = "AND" if isinstance(ast, And) else "OR"
    return f"({formula_to_text(ast.left)} {op} {formula_to_text(ast.right)})"


def eval_formula(ast: FormulaNode, assignment: Mapping[str, float]) -> float:
    """Fuzzy value in [0, 1] by structural recursion over the AST."""
    if isinstance(ast, Var):
        try:
            return float(assignment[ast.name])
        except KeyError:
            raise UnboundVariable(f"no value bound for {ast.name}") from None
    if isinstance(ast, Not):
        return 1.0 - eval_formula(ast.child, assignment)
    left = eval_formula(ast.left, assignment)
    right = eval_formula(ast.right, assignment)
    if isinstance(ast, And):
        return left * right
    return left + right - left * right


def eval_formula_gradient(ast: FormulaNode, assignment: Mapping[str, float]
                          ) -> tuple[float, dict[str, float]]:
    """Value and exact partial derivatives at the point, by the chain rule.

    AND: d(ab) = a'b + ab'; OR: d(a+b-ab) = a' + b' - (a'b + ab');
    NOT: d(1-a) = -a'. Repeated variables accumulate across occurrences.
    """
    if isinstance(ast, Var):
        try:
            value = float(assignment[ast.name])
        except KeyError:
            raise UnboundVariable(f"no value bound for {ast.name}") from None
        return value, {ast.name: 1.0}
    if isinstance(ast, Not):
        value, grad = eval_formula_gradient(ast.child, assignment)
        return 1.0 - value, {k: -g for k, g in grad.items()}
    lv, lg = eval_formula_gradient(ast.left, assignment)
    rv, rg = eval_formula_gradient(ast.right, assignment)
    grad: dict[str, float] = {}
    if isinstance(ast, And):
        for k, g in lg.items():
            grad[k] = grad.get(k, 0.0) + g * rv
        for k, g in rg.items():
            grad[k] = grad.get(k, 0.0) + g * lv
        return lv * rv, grad
    for k, g in lg.items():
        grad[k] = grad.get(k, 0.0) + g * (1.0 - rv)
    for k, g in rg.items():
        grad[k] = grad.get(k, 0.0) + g * (1.0 - lv)
    return lv + rv - lv * rv, grad


def exact_boolean_probability(ast: FormulaNode,
                              marginals: Mapping[str, float]) -> float:
    """Probability of the Boolean formula under independent Bernoulli inputs,
    by exhaustive enumeration of all assignments. Independent oracle for the
    fuzzy relaxation; the two agree exactly on read-once formulas.
    """
    names = sorted(formula_vars(ast))
    total = 0.0
    for bits in _assignments(len(names)):
        world = {name: bool(b) for name, b in zip(names, bits)}
        if _eval_bool(ast, world):
            weight = 1.0
            for name in names:
                p = float(marginals[name])
                weight *= p if world[name] else (1.0 - p)
            total += weight
    return total


def _assignments(k: int) -> Iterator[tuple[int, ...]]:
    for index in range(2 ** k):
        yield tuple((index >> j) & 1 for j in range(k))


def _eval_bool(ast: FormulaNode, world: Mapping[str, bool]) -> bool:
    if isinstance(ast, Var):
        return world[ast.name]
    if isinstance(ast, Not):
        return not _eval_bool(ast.child, world)
    if isinstance(ast, And):
        return _eval_bool(ast.left, world) and _eval_bool(ast.right, world)
    return _eval_bool(ast.left, world) or _eval_bool(ast.right, world)
