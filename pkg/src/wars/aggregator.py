"""Aggregator expressions: terms built from constants, variables, sums, products.

An aggregator combines the weights of a reduction step's successors into the
weight of the step.  Expressions are immutable trees; evaluation is pure.  The
distinguished variable ``X`` only occurs in loop polynomials, never in rule
aggregators.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

from .semiring import INF, LiteralError, NatInf, Product, RealInf, Semiring


class AggregatorError(Exception):
    pass


class ArityError(AggregatorError):
    """A variable index exceeds the number of supplied arguments."""


@dataclass(frozen=True)
class Const:
    value: object


@dataclass(frozen=True)
class Var:
    index: int

    def __post_init__(self):
        if self.index < 1:
            raise AggregatorError("variable indices start at 1")


@dataclass(frozen=True)
class SumNode:
    terms: tuple

    def __post_init__(self):
        if not self.terms:
            raise AggregatorError("empty sum")


@dataclass(frozen=True)
class ProdNode:
    factors: tuple

    def __post_init__(self):
        if not self.factors:
            raise AggregatorError("empty product")


@dataclass(frozen=True)
class XVar:
    """The distinguished polynomial variable of loop analysis."""


class CountableSum:
    """A sum over countably many generated terms, available programmatically.

    ``term(i)`` yields the i-th summand expression (i from 0) or None once the
    stream is exhausted.  ``var_bound`` is the supremum of variable indices the
    generator can mention; INF when unbounded.
    """

    def __init__(self, term: Callable[[int], object], var_bound=INF):
        self.term = term
        self.var_bound = var_bound

    def __repr__(self) -> str:
        return "CountableSum(...)"


X = XVar()


def max_var(expr):
    """Supremum of variable indices mentioned; 0 when no variable occurs."""
    if isinstance(expr, (Const, XVar)):
        return 0
    if isinstance(expr, Var):
        return expr.index
    if isinstance(expr, SumNode):
        return max(max_var(e) for e in expr.terms)
    if isinstance(expr, ProdNode):
        return max(max_var(e) for e in expr.factors)
    if isinstance(expr, CountableSum):
        return expr.var_bound
    raise AggregatorError(f"not an aggregator expression: {expr!r}")


def mentions_x(expr) -> bool:
    if isinstance(expr, XVar):
        return True
    if isinstance(expr, SumNode):
        return any(mentions_x(e) for e in expr.terms)
    if isinstance(expr, ProdNode):
        return any(mentions_x(e) for e in expr.factors)
    return False


def evaluate(expr, desc: Semiring, args: Sequence, truncation: int = 64):
    """Evaluate an aggregator over ``desc`` at the argument vector.

    Returns (value, exact).  Finite expressions evaluate exactly; a countable
    sum is cut off after ``truncation`` generated terms and any term whose
    variables exceed the argument vector is skipped, so the result is always
    below the untruncated value.
    """
    if truncation < 1:
        raise ValueError("truncation must be >= 1")
    mv = max_var(expr)
    if mv is not INF and mv > len(args) and not isinstance(expr, CountableSum):
        raise ArityError(
            f"aggregator mentions v{mv} but only {len(args)} arguments were supplied"
        )
    return _eval(expr, desc, args, truncation)


def _eval(expr, desc, args, truncation):
    if isinstance(expr, Const):
        desc.require(expr.value)
        return expr.value, True
    if isinstance(expr, Var):
        if expr.index > len(args):
            raise ArityError(
                f"aggregator mentions v{expr.index} but only {len(args)} arguments were supplied"
            )
        return args[expr.index - 1], True
    if isinstance(expr, XVar):
        raise AggregatorError("X is only meaningful inside loop polynomials")
    if isinstance(expr, SumNode):
        acc, exact = None, True
        for term in expr.terms:
            v, e = _eval(term, desc, args, truncation)
            exact = exact and e
            acc = v if acc is None else desc.plus(acc, v)
        return acc, exact
    if isinstance(expr, ProdNode):
        acc, exact = None, True
        for factor in expr.factors:
            v, e = _eval(factor, desc, args, truncation)
            exact = exact and e
            acc = v if acc is None else desc.times(acc, v)
        return acc, exact
    if isinstance(expr, CountableSum):
        acc = desc.zero
        clean = True  # no skipped terms, every summand evaluated exactly
        exact = False
        for i in range(truncation):
            term = expr.term(i)
            if term is None:
                exact = clean
                break
            mv = max_var(term)
            if mv is not INF and mv > len(args):
                clean = False
                continue
            v, e = _eval(term, desc, args, truncation)
            clean = clean and e
            acc = desc.plus(acc, v)
            if acc == desc.top:
                # Everything that could follow is absorbed by the maximum.
                exact = True
                break
        return acc, exact
    raise AggregatorError(f"not an aggregator expression: {expr!r}")


def substitute_x(expr, inner):
    """Replace every X leaf by ``inner``; all other nodes are unchanged."""
    if isinstance(expr, XVar):
        return inner
    if isinstance(expr, SumNode):
        return SumNode(tuple(substitute_x(e, inner) for e in expr.terms))
    if isinstance(expr, ProdNode):
        return ProdNode(tuple(substitute_x(e, inner) for e in expr.factors))
    return expr


def fold_constants(expr, desc: Semiring):
    """Collapse constant-only subtrees so the result mentions X and constants only."""
    if isinstance(expr, SumNode):
        kids = [fold_constants(e, desc) for e in expr.terms]
        if all(isinstance(k, Const) for k in kids):
            acc = kids[0].value
            for k in kids[1:]:
                acc = desc.plus(acc, k.value)
            return Const(acc)
        return SumNode(tuple(kids))
    if isinstance(expr, ProdNode):
        kids = [fold_constants(e, desc) for e in expr.factors]
        if all(isinstance(k, Const) for k in kids):
            acc = kids[0].value
            for k in kids[1:]:
                acc = desc.times(acc, k.value)
            return Const(acc)
        return ProdNode(tuple(kids))
    return expr


_AFFINE_PROBES = (0, 1, 2, 5)


def _affine_capable(desc: Semiring) -> bool:
    if isinstance(desc, (NatInf, RealInf)):
        return True
    if isinstance(desc, Product):
        return all(_affine_capable(c) for c in desc.components)
    return False


def extract_affine(expr, desc: Semiring) -> Optional[tuple]:
    """Rewrite an X-polynomial to the form c*X + d if possible.

    Works for the additive counting carriers (and products of them), where
    distributivity lets sums and constant-scaled products of affine forms stay
    affine.  Returns (c, d) or None; a successful extraction is re-checked by
    evaluating both forms on a few probe points.
    """
    if not _affine_capable(desc):
        return None
    form = _affine_form(expr, desc)
    if form is None:
        return None
    c, d = form
    for n in _AFFINE_PROBES:
        x = desc.from_count(n)
        direct, _ = evaluate(substitute_x(expr, Const(x)), desc, [])
        linear = desc.plus(desc.times(c, x), d)
        if direct != linear:
            return None
    return c, d


def _affine_form(expr, desc):
    if isinstance(expr, Const):
        return desc.zero, expr.value
    if isinstance(expr, XVar):
        return desc.one, desc.zero
    if isinstance(expr, Var):
        return None
    if isinstance(expr, SumNode):
        c, d = desc.zero, desc.zero
        for term in expr.terms:
            f = _affine_form(term, desc)
            if f is None:
                return None
            c, d = desc.plus(c, f[0]), desc.plus(d, f[1])
        return c, d
    if isinstance(expr, ProdNode):
        acc = _affine_form(expr.factors[0], desc)
        if acc is None:
            return None
        for factor in expr.factors[1:]:
            f = _affine_form(factor, desc)
            if f is None:
                return None
            (c1, d1), (c2, d2) = acc, f
            if c1 == desc.zero:
                acc = desc.times(d1, c2), desc.times(d1, d2)
            elif c2 == desc.zero:
                acc = desc.times(c1, d2), desc.times(d1, d2)
            else:
                return None
        return acc
    return None


_TOKEN = re.compile(
    r"\s*(?:(?P<var>v\d+)|(?P<x>X)|(?P<op>[+*()])"
    r"|(?P<braced>\{[^{}]*\})|(?P<sigma>SIGMA\*)"
    r"|(?P<word>true|false|-?inf)|(?P<num>-?\d+(?:\.\d+|/\d+)?))"
)


class ParseError(AggregatorError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class _Parser:
    """Recursive-descent parser for the aggregator grammar.

    expr := term ('+' term)* ; term := factor ('*' factor)* ;
    factor := literal | vN | X | '(' expr ')'.  Parenthesized groups that
    contain a top-level comma are tuple literals instead of grouping.
    """

    def __init__(self, text: str, desc: Semiring):
        self.text = text
        self.desc = desc
        self.pos = 0

    def _skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def _peek(self) -> str:
        self._skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def parse(self):
        expr = self.expr()
        self._skip_ws()
        if self.pos != len(self.text):
            raise ParseError("trailing input", self.pos)
        return expr

    def expr(self):
        terms = [self.term()]
        while self._peek() == "+":
            self.pos += 1
            terms.append(self.term())
        return terms[0] if len(terms) == 1 else SumNode(tuple(terms))

    def term(self):
        factors = [self.factor()]
        while self._peek() == "*":
            self.pos += 1
            factors.append(self.factor())
        return factors[0] if len(factors) == 1 else ProdNode(tuple(factors))

    def factor(self):
        self._skip_ws()
        if self.pos >= len(self.text):
            raise ParseError("unexpected end of input", self.pos)
        ch = self.text[self.pos]
        if ch == "(":
            end = self._matching_paren(self.pos)
            inner = self.text[self.pos + 1 : end]
            if self._has_top_level_comma(inner):
                literal = self.text[self.pos : end + 1]
                self.pos = end + 1
                return self._const(literal)
            self.pos += 1
            expr = self.expr()
            if self._peek() != ")":
                raise ParseError("expected ')'", self.pos)
            self.pos += 1
            return expr
        m = _TOKEN.match(self.text, self.pos)
        if not m:
            raise ParseError(f"unexpected character {ch!r}", self.pos)
        self.pos = m.end()
        if m.group("var"):
            return Var(int(m.group("var")[1:]))
        if m.group("x"):
            return X
        if m.group("op"):
            raise ParseError(f"unexpected operator {m.group('op')!r}", m.start())
        return self._const(m.group(0).strip())

    def _const(self, literal: str):
        try:
            return Const(self.desc.parse_literal(literal))
        except LiteralError as exc:
            raise ParseError(str(exc), self.pos) from exc

    def _matching_paren(self, start: int) -> int:
        depth = 0
        for i in range(start, len(self.text)):
            if self.text[i] == "(":
                depth += 1
            elif self.text[i] == ")":
                depth -= 1
                if depth == 0:
                    return i
        raise ParseError("unbalanced '('", start)

    @staticmethod
    def _has_top_level_comma(inner: str) -> bool:
        depth = 0
        for ch in inner:
            if ch in "({":
                depth += 1
            elif ch in ")}":
                depth -= 1
            elif ch == "," and depth == 0:
                return True
        return False


def parse_expr(text: str, desc: Semiring):
    """Parse the textual aggregator syntax over the given carrier."""
    return _Parser(text, desc).parse()


def format_expr(expr, desc: Semiring) -> str:
    """Print an expression so that parsing it back restores the same tree."""
    if isinstance(expr, Const):
        return desc.format_literal(expr.value)
    if isinstance(expr, Var):
        return f"v{expr.index}"
    if isinstance(expr, XVar):
        return "X"
    if isinstance(expr, SumNode):
        return " + ".join(_wrap(t, desc, in_sum=True) for t in expr.terms)
    if isinstance(expr, ProdNode):
        return " * ".join(_wrap(f, desc, in_sum=False) for f in expr.factors)
    if isinstance(expr, CountableSum):
        return "<countable sum>"
    raise AggregatorError(f"not an aggregator expression: {expr!r}")


def _wrap(expr, desc, in_sum: bool) -> str:
    text = format_expr(expr, desc)
    if isinstance(expr, SumNode) or (isinstance(expr, ProdNode) and not in_sum):
        return f"({text})"
    return text
