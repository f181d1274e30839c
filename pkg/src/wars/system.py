"""Weighted sequence reduction systems: rules, handles, and the file loader.

A system maps each object to the reduction rules that apply to it; each rule
carries an ordered successor sequence and the aggregator that combines the
successor weights.  Normal forms (objects without rules) carry their own
weight.  Handles are immutable; successor enumeration is deterministic.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from typing import Callable, Optional

from . import aggregator as agg
from .semiring import Semiring, descriptor_from_spec


class SystemError_(Exception):
    """Base class for system-level failures."""


class UnknownObjectError(SystemError_):
    pass


class NotNormalFormError(SystemError_):
    pass


class SystemFormatError(SystemError_):
    """The explicit-system file is malformed."""


@dataclass(frozen=True)
class RuleInstance:
    """One reduction step: lhs rewrites to the ordered sequence rhs.

    ``rhs_complete`` is False when rhs is a finite prefix of an infinite
    successor sequence.  The aggregator may mention at most ``len(rhs)``
    variables when the sequence is complete.
    """

    lhs: object
    rhs: tuple
    aggregator: object
    tag: str
    rhs_complete: bool = True

    def __post_init__(self):
        if not self.rhs:
            raise SystemError_(f"rule {self.tag}: empty successor sequence")
        if agg.mentions_x(self.aggregator):
            raise SystemError_(f"rule {self.tag}: rule aggregators cannot mention X")
        mv = agg.max_var(self.aggregator)
        if self.rhs_complete and isinstance(mv, int) and mv > len(self.rhs):
            raise SystemError_(
                f"rule {self.tag}: aggregator mentions v{mv} but rhs has "
                f"{len(self.rhs)} entries"
            )


@dataclass
class Flags:
    """Three-valued structural metadata: True asserted, False refuted, None unknown."""

    deterministic: Optional[bool] = None
    finitely_nondeterministic: Optional[bool] = None
    finitely_branching: Optional[bool] = None
    terminating: Optional[bool] = None


class SystemHandle:
    """A weighted sequence reduction system.

    ``successors_fn(a, budget)`` returns up to ``budget`` rules for ``a`` in a
    fixed enumeration order together with a completeness flag.  ``nf_weight_fn``
    is defined exactly on the normal forms.
    """

    def __init__(
        self,
        name: str,
        semiring: Semiring,
        successors_fn: Callable[[object, int], tuple],
        nf_weight_fn: Callable[[object], object],
        flags: Flags | None = None,
        parse_object_fn: Callable[[str], object] | None = None,
        format_object_fn: Callable[[object], str] | None = None,
        enumerate_objects_fn: Callable[[], tuple] | None = None,
        enumerate_nfs_fn: Callable[[], tuple] | None = None,
        sample_objects_fn: Callable[[object, int], list] | None = None,
        aggregators_finite_no_top: Optional[bool] = None,
    ):
        self.name = name
        self.semiring = semiring
        self._successors = successors_fn
        self._nf_weight = nf_weight_fn
        self.flags = flags or Flags()
        self._parse_object = parse_object_fn
        self._format_object = format_object_fn
        self._enumerate_objects = enumerate_objects_fn
        self._enumerate_nfs = enumerate_nfs_fn
        self._sample_objects = sample_objects_fn
        self.aggregators_finite_no_top = aggregators_finite_no_top

    def successors(self, a, rule_budget: int = 64) -> tuple[list[RuleInstance], bool]:
        """Up to ``rule_budget`` rules applicable to ``a``, plus completeness."""
        if rule_budget < 1:
            raise ValueError("rule_budget must be >= 1")
        rules, complete = self._successors(a, rule_budget)
        return list(rules), complete

    def is_normal_form(self, a) -> bool:
        rules, complete = self.successors(a, 1)
        return not rules and complete

    def nf_weight(self, a):
        if not self.is_normal_form(a):
            raise NotNormalFormError(f"{self.format_object(a)} is not a normal form")
        return self._nf_weight(a)

    def find_rule(self, a, tag: str, max_budget: int = 65536) -> RuleInstance:
        budget = 64
        while True:
            rules, complete = self.successors(a, budget)
            for r in rules:
                if r.tag == tag:
                    return r
            if complete or budget >= max_budget:
                raise SystemError_(
                    f"no rule tagged {tag!r} for {self.format_object(a)}"
                )
            budget *= 8

    def enumerate_objects(self) -> Optional[tuple[list, bool]]:
        """All objects plus a completeness flag, or None for open families."""
        if self._enumerate_objects is None:
            return None
        objs, complete = self._enumerate_objects()
        return list(objs), complete

    def enumerate_nfs(self) -> Optional[tuple[list, bool]]:
        if self._enumerate_nfs is not None:
            nfs, complete = self._enumerate_nfs()
            return list(nfs), complete
        enum = self.enumerate_objects()
        if enum is None:
            return None
        objs, complete = enum
        return [a for a in objs if self.is_normal_form(a)], complete

    def sample_objects(self, rng, count: int) -> list:
        if self._sample_objects is not None:
            return self._sample_objects(rng, count)
        enum = self.enumerate_objects()
        if enum is not None:
            return enum[0][:count]
        raise SystemError_(f"system {self.name} has no object sampler")

    def parse_object(self, text: str):
        if self._parse_object is None:
            raise SystemError_(f"system {self.name} has no object syntax")
        return self._parse_object(text)

    def format_object(self, a) -> str:
        if self._format_object is not None:
            return self._format_object(a)
        return str(a)

    def __repr__(self) -> str:
        return f"<system {self.name} over {self.semiring.kind}>"


def cplx_wrap(base: SystemHandle) -> SystemHandle:
    """Reweigh a system so that weights count reduction steps.

    Every rule keeps its successor sequence but aggregates as one plus the sum
    of the successor weights; every normal form weighs zero.  The weight of an
    object is then the supremum of the step counts reachable from it.
    """
    from .semiring import NAT_INF

    def successors(a, budget):
        rules, complete = base._successors(a, budget)
        wrapped = []
        for r in rules:
            parts = (agg.Const(1),) + tuple(agg.Var(i + 1) for i in range(len(r.rhs)))
            wrapped.append(
                RuleInstance(r.lhs, r.rhs, agg.SumNode(parts), r.tag, r.rhs_complete)
            )
        return wrapped, complete

    return SystemHandle(
        name=f"cplx({base.name})",
        semiring=NAT_INF,
        successors_fn=successors,
        nf_weight_fn=lambda a: 0,
        flags=Flags(
            deterministic=base.flags.deterministic,
            finitely_nondeterministic=base.flags.finitely_nondeterministic,
            finitely_branching=base.flags.finitely_branching,
            terminating=base.flags.terminating,
        ),
        parse_object_fn=base._parse_object,
        format_object_fn=base._format_object,
        enumerate_objects_fn=base._enumerate_objects,
        enumerate_nfs_fn=base._enumerate_nfs,
        sample_objects_fn=base._sample_objects,
        aggregators_finite_no_top=base.flags.finitely_branching,
    )


def load_explicit(source: str) -> SystemHandle:
    """Load a finite explicit system from JSON text or a file path.

    Format: ``{"semiring": {...}, "rules": [{"lhs", "rhs", "agg", "tag"}],
    "nf": {label: literal}}``.  Objects are implicit (every mentioned label);
    a label with a normal-form weight must have no rules, and every rule-less
    label must have one.
    """
    text = source
    if not source.lstrip().startswith("{") and os.path.exists(source):
        with open(source, "r", encoding="utf-8") as fh:
            text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SystemFormatError(f"invalid JSON: {exc}") from exc

    if "semiring" not in data:
        raise SystemFormatError("missing 'semiring' entry")
    desc = descriptor_from_spec(data["semiring"])

    rules_by_lhs: dict[str, list[RuleInstance]] = {}
    objects: set[str] = set()
    for i, spec in enumerate(data.get("rules", [])):
        lhs = spec.get("lhs")
        rhs = spec.get("rhs")
        if not isinstance(lhs, str) or not isinstance(rhs, list) or not rhs:
            raise SystemFormatError(f"rule {i}: needs a string lhs and a non-empty rhs")
        tag = spec.get("tag", f"r{i}")
        try:
            expr = agg.parse_expr(spec.get("agg", ""), desc)
        except agg.AggregatorError as exc:
            raise SystemFormatError(f"rule {tag}: {exc}") from exc
        try:
            rule = RuleInstance(lhs, tuple(rhs), expr, tag)
        except SystemError_ as exc:
            raise SystemFormatError(str(exc)) from exc
        if any(r.tag == tag for r in rules_by_lhs.get(lhs, [])):
            raise SystemFormatError(f"duplicate rule tag {tag!r} for {lhs!r}")
        rules_by_lhs.setdefault(lhs, []).append(rule)
        objects.add(lhs)
        objects.update(rhs)

    nf_weights = {}
    for label, literal in data.get("nf", {}).items():
        if label in rules_by_lhs:
            raise SystemFormatError(
                f"{label!r} has rules but also a normal-form weight"
            )
        nf_weights[label] = desc.parse_literal(str(literal))
        objects.add(label)

    for label in sorted(objects):
        if label not in rules_by_lhs and label not in nf_weights:
            raise SystemFormatError(
                f"{label!r} is a normal form but has no weight in 'nf'"
            )

    def successors(a, budget):
        if a not in objects:
            raise UnknownObjectError(f"unknown object {a!r}")
        rules = rules_by_lhs.get(a, [])
        return rules[:budget], budget >= len(rules)

    deterministic = all(len(rs) <= 1 for rs in rules_by_lhs.values())
    terminating = not _has_cycle(rules_by_lhs)

    def parse_object(textual: str):
        label = textual.strip()
        if label not in objects:
            raise UnknownObjectError(f"unknown object {label!r}")
        return label

    return SystemHandle(
        name="explicit",
        semiring=desc,
        successors_fn=successors,
        nf_weight_fn=lambda a: nf_weights[a],
        flags=Flags(
            deterministic=deterministic,
            finitely_nondeterministic=True,
            finitely_branching=True,
            terminating=terminating,
        ),
        parse_object_fn=parse_object,
        format_object_fn=str,
        enumerate_objects_fn=lambda: (sorted(objects), True),
        enumerate_nfs_fn=lambda: (sorted(nf_weights), True),
        aggregators_finite_no_top=all(
            not _mentions_top(r.aggregator, desc)
            for rs in rules_by_lhs.values()
            for r in rs
        ),
    )


def _mentions_top(expr, desc) -> bool:
    if isinstance(expr, agg.Const):
        return expr.value == desc.top
    if isinstance(expr, agg.SumNode):
        return any(_mentions_top(e, desc) for e in expr.terms)
    if isinstance(expr, agg.ProdNode):
        return any(_mentions_top(e, desc) for e in expr.factors)
    return False


def _has_cycle(rules_by_lhs: dict[str, list[RuleInstance]]) -> bool:
    edges = {
        lhs: sorted({b for r in rs for b in r.rhs})
        for lhs, rs in rules_by_lhs.items()
    }
    WHITE, GREY, BLACK = 0, 1, 2
    color = {}

    def visit(node) -> bool:
        color[node] = GREY
        for succ in edges.get(node, []):
            c = color.get(succ, WHITE)
            if c == GREY:
                return True
            if c == WHITE and visit(succ):
                return True
        color[node] = BLACK
        return False

    return any(
        color.get(node, WHITE) == WHITE and visit(node) for node in sorted(edges)
    )
