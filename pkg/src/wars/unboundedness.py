"""Unboundedness via increasing loops.

A finite reduction tree whose root and some other leaf carry the same object
describes a loop.  Evaluating the tree with that leaf as a variable X gives a
polynomial; if applying it always gains at least a fixed increment t whose
infinite self-sum is the semiring maximum, iterating the loop drives the
object's weight to the maximum.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from . import aggregator as agg
from .aggregator import Const, CountableSum, ProdNode, SumNode, Var, X, XVar
from .evaluator import ReductionTree, enumerate_trees, weight_lower_bound
from .semiring import NatInf, RealInf, Semiring
from .system import SystemHandle

CERTIFIED = "certified"
CANDIDATE = "candidate"


class UnboundednessError(Exception):
    pass


class UncertifiedWitnessError(UnboundednessError):
    pass


@dataclass
class LoopWitness:
    """A loop tree with its designated leaf, polynomial, and increment."""

    tree: ReductionTree
    leaf_path: tuple
    polynomial: object
    status: str = CANDIDATE
    t: object = None

    @property
    def root(self):
        return self.tree.label

    def trace(self) -> list[str]:
        """Rule tags along the path from the root to the designated leaf."""
        tags, node = [], self.tree
        for idx in self.leaf_path:
            tags.append(node.rule_tag)
            node = node.children[idx]
        return tags


@dataclass
class UnboundednessReport:
    object_label: str
    t_literal: str
    polynomial: str
    trace: list[str]
    method: str = "increasing-loop"
    cross_check: dict | None = None


def find_loops(
    sys: SystemHandle,
    start,
    max_depth: int,
    rule_budget: int = 8,
    count_cap: int = 200_000,
    max_witnesses: int = 16,
) -> list[tuple[ReductionTree, tuple]]:
    """Trees rooted at a start object with some deeper leaf equal to the root.

    Smallest depth first, deterministic order, deduplicated by the rule-tag
    path from the root to the repeated leaf.  Returns (tree, leaf path) pairs.
    """
    if max_depth < 1:
        raise ValueError("max_depth must be >= 1")
    # Object ids may themselves be tuples, so only list/set mean a start set.
    starts = list(start) if isinstance(start, (list, set)) else [start]

    candidates = []
    for s in starts:
        for index, tree in enumerate(
            enumerate_trees(sys, s, max_depth, rule_budget, count_cap)
        ):
            for path in _loop_leaves(tree):
                candidates.append((tree.depth(), index, tree, path))

    candidates.sort(key=lambda item: (item[0], item[1], item[3]))
    out, seen = [], set()
    for _, _, tree, path in candidates:
        key = (tree.label, _tag_path(tree, path))
        if key in seen:
            continue
        seen.add(key)
        out.append((tree, path))
        if len(out) >= max_witnesses:
            break
    return out


def _loop_leaves(tree: ReductionTree):
    root_label = tree.label

    def walk(node, path):
        if not node.children:
            if path and node.label == root_label:
                yield path
            return
        for i, child in enumerate(node.children):
            yield from walk(child, path + (i,))

    yield from walk(tree, ())


def _tag_path(tree: ReductionTree, path: tuple) -> tuple:
    tags, node = [], tree
    for idx in path:
        tags.append(node.rule_tag)
        node = node.children[idx]
    return tuple(tags)


def induced_polynomial(sys: SystemHandle, tree: ReductionTree, leaf_path: tuple):
    """Tree weight as an expression in X, with the designated leaf as X.

    Other normal-form leaves contribute their weights, other leaves the
    semiring minimum; aggregators are applied symbolically and constant
    subtrees are folded, so the result mentions X and constants only.
    """
    desc = sys.semiring
    if _node_at(tree, leaf_path).children:
        raise UnboundednessError("the designated node is not a leaf")

    def build(node, remaining):
        if remaining == ():
            return X
        if not node.children:
            if sys.is_normal_form(node.label):
                return Const(sys.nf_weight(node.label))
            return Const(desc.zero)
        rule = sys.find_rule(node.label, node.rule_tag)
        child_exprs = []
        for i, child in enumerate(node.children):
            sub = remaining[1:] if remaining and remaining[0] == i else None
            child_exprs.append(build(child, sub if sub is not None else _OFF_PATH))
        return _apply_aggregator(rule.aggregator, child_exprs, desc)

    expr = build(tree, leaf_path)
    return agg.fold_constants(expr, desc)


_OFF_PATH = ("off",)


def _node_at(tree, path):
    node = tree
    for idx in path:
        node = node.children[idx]
    return node


def _apply_aggregator(expr, child_exprs, desc, truncation: int = 64):
    """Substitute child expressions for the rule variables."""
    if isinstance(expr, Const):
        return expr
    if isinstance(expr, Var):
        if expr.index > len(child_exprs):
            return Const(desc.zero)
        return child_exprs[expr.index - 1]
    if isinstance(expr, SumNode):
        return SumNode(
            tuple(_apply_aggregator(e, child_exprs, desc, truncation) for e in expr.terms)
        )
    if isinstance(expr, ProdNode):
        return ProdNode(
            tuple(_apply_aggregator(e, child_exprs, desc, truncation) for e in expr.factors)
        )
    if isinstance(expr, CountableSum):
        terms = []
        for i in range(truncation):
            term = expr.term(i)
            if term is None:
                break
            mv = agg.max_var(term)
            if isinstance(mv, int) and mv <= len(child_exprs):
                terms.append(_apply_aggregator(term, child_exprs, desc, truncation))
        if not terms:
            return Const(desc.zero)
        return SumNode(tuple(terms))
    raise UnboundednessError(f"cannot substitute into {expr!r}")


def _poly_at(polynomial, desc, s):
    value, _ = agg.evaluate(agg.substitute_x(polynomial, Const(s)), desc, [])
    return value


def certify_loop(desc: Semiring, polynomial) -> Optional[tuple]:
    """Search for an increment t that the polynomial always gains.

    Certification requires the infinite self-sum of t to be the maximum and
    the polynomial to dominate s plus t for every s.  The universal condition
    is decided exactly via affine extraction over the counting carriers and by
    exhaustion over the two-element boolean carrier; elsewhere it is probed on
    a finite value set, which yields only a candidate.
    """
    if not _mentions_only_x(polynomial):
        raise UnboundednessError("loop polynomials mention X and constants only")

    candidates = []
    affine = agg.extract_affine(polynomial, desc)
    if affine is not None:
        candidates.append(affine[1])
    candidates.append(desc.one)

    seen = []
    for t in candidates:
        if any(t == prev for prev in seen):
            continue
        seen.append(t)
        if t == desc.zero or desc.omega_sum(t) != desc.top:
            continue
        if t == desc.top and desc.kind != "boolean":
            continue

        if affine is not None and isinstance(desc, (NatInf, RealInf)):
            c, d = affine
            if desc.leq(desc.one, c) and desc.leq(t, d):
                return t, CERTIFIED
            continue
        if desc.kind == "boolean":
            if all(
                desc.leq(desc.plus(s, t), _poly_at(polynomial, desc, s))
                for s in (False, True)
            ):
                return t, CERTIFIED
            continue
        if all(
            desc.leq(desc.plus(s, t), _poly_at(polynomial, desc, s))
            for s in desc.probe_values()
        ):
            return t, CANDIDATE
    return None


def _mentions_only_x(expr) -> bool:
    if isinstance(expr, (Const, XVar)):
        return True
    if isinstance(expr, SumNode):
        return all(_mentions_only_x(e) for e in expr.terms)
    if isinstance(expr, ProdNode):
        return all(_mentions_only_x(e) for e in expr.factors)
    return False


def analyze_loop(sys: SystemHandle, tree: ReductionTree, leaf_path: tuple) -> LoopWitness:
    """Build the witness for one loop candidate: polynomial plus certification."""
    polynomial = induced_polynomial(sys, tree, leaf_path)
    witness = LoopWitness(tree, leaf_path, polynomial)
    result = certify_loop(sys.semiring, polynomial)
    if result is not None:
        witness.t, witness.status = result
    return witness


def conclude_unbounded(
    sys: SystemHandle,
    witness: LoopWitness,
    k_max: int = 5,
    rule_budget: int = 64,
    branch_trunc: int = 64,
    visit_cap: int = 100_000,
) -> UnboundednessReport:
    """Turn a certified loop into an unboundedness verdict for its root.

    Cross-checks the evaluator: the depth-indexed lower bound at multiples of
    the loop depth must climb at least as fast as the accumulated increments.
    """
    if witness.status != CERTIFIED:
        raise UncertifiedWitnessError(
            "only a certified loop witness proves unboundedness"
        )
    desc = sys.semiring
    a = witness.root
    loop_depth = witness.tree.depth()

    values = []
    accumulated = desc.zero
    previous = desc.zero
    for k in range(1, k_max + 1):
        bound = weight_lower_bound(
            sys, a, k * loop_depth, rule_budget, branch_trunc, visit_cap
        )
        accumulated = desc.plus(accumulated, witness.t)
        if not desc.leq(previous, bound.value):
            raise UnboundednessError(
                f"lower bound dropped between loop iterations at k={k}"
            )
        if not desc.leq(accumulated, bound.value):
            raise UnboundednessError(
                f"lower bound does not cover {k} accumulated increments"
            )
        previous = bound.value
        values.append(desc.format_literal(bound.value))

    return UnboundednessReport(
        object_label=sys.format_object(a),
        t_literal=desc.format_literal(witness.t),
        polynomial=agg.format_expr(witness.polynomial, desc),
        trace=witness.trace(),
        cross_check={"iteration_values": values, "loop_depth": loop_depth},
    )
