"""Boundedness provers: sufficient conditions and the interpretation method.

A system is bounded when no object's weight reaches the semiring maximum.
Three routes are implemented: a top-valued normal form disproves boundedness
outright; universally bounded normal forms with selective aggregators prove
it; terminating well-behaved systems over extremal semirings prove it; and an
embedding that dominates the normal forms and every rule step certifies an
explicit upper-bound map.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Optional

from . import aggregator as agg
from .aggregator import evaluate
from .semiring import INF, NatInf, Semiring, Tropical
from .system import SystemHandle

BOUNDED_CERTIFIED = "bounded_certified"
BOUNDED_SAMPLED = "bounded_sampled"
UNBOUNDED = "unbounded"
UNKNOWN = "unknown"


class BoundednessError(Exception):
    pass


class PreconditionError(BoundednessError):
    pass


class EmbeddingDomainError(BoundednessError):
    """The embedding is undefined on a touched object."""


class UnsupportedAggregatorError(BoundednessError):
    pass


@dataclass
class BoundednessReport:
    verdict: str
    method: str
    details: dict = field(default_factory=dict)
    sample_count: int = 0
    witness: object = None
    bound_map: Optional[dict] = None

    def certified(self) -> bool:
        return self.verdict == BOUNDED_CERTIFIED


class Embedding:
    """A map from objects to non-maximal semiring values."""

    def __init__(self, fn: Callable[[object], object], name: str = "custom"):
        self._fn = fn
        self.name = name

    def __call__(self, obj):
        try:
            return self._fn(obj)
        except (KeyError, TypeError, ValueError) as exc:
            raise EmbeddingDomainError(
                f"embedding {self.name} undefined on {obj!r}: {exc}"
            ) from exc

    @staticmethod
    def from_table(table: dict, name: str = "table") -> "Embedding":
        values = dict(table)
        return Embedding(lambda obj: values[obj], name)

    @staticmethod
    def from_json(data: dict, sys: SystemHandle, name: str = "file") -> "Embedding":
        table = {
            sys.parse_object(label): sys.semiring.parse_literal(str(literal))
            for label, literal in data.items()
        }
        return Embedding.from_table(table, name)

    def __repr__(self) -> str:
        return f"<embedding {self.name}>"


def _trs_embedding(term):
    # Recursive interpretation dominating the step-count weighting of the
    # addition rewrite system: successor adds one, addition doubles its first
    # argument's share and adds one.
    if term[0] == "0":
        return 0
    if term[0] == "s":
        return _trs_embedding(term[1]) + 1
    return 2 * _trs_embedding(term[1]) + _trs_embedding(term[2]) + 1


def _zwalk_embedding(n: int):
    if n % 2 == 0:
        return (abs(n) // 2, True)
    return (INF, False)


_BUILTIN_EMBEDDINGS = {
    "walk3n": lambda: Embedding(lambda n: Fraction(3 * n), "walk3n"),
    "trs_add": lambda: Embedding(_trs_embedding, "trs_add"),
    "zwalk_case": lambda: Embedding(_zwalk_embedding, "zwalk_case"),
}


def builtin_embedding(name: str) -> Embedding:
    factory = _BUILTIN_EMBEDDINGS.get(name)
    if factory is None:
        raise BoundednessError(
            f"unknown embedding {name!r}; available: {', '.join(sorted(_BUILTIN_EMBEDDINGS))}"
        )
    return factory()


def check_nf_top(sys: SystemHandle, nfs: Optional[Iterable] = None) -> Optional[BoundednessReport]:
    """Report unboundedness if some normal form weighs the maximum."""
    desc = sys.semiring
    if nfs is None:
        enum = sys.enumerate_nfs()
        if enum is None:
            return None
        nfs = enum[0]
    for a in nfs:
        if sys.nf_weight(a) == desc.top:
            return BoundednessReport(
                verdict=UNBOUNDED,
                method="top-valued-normal-form",
                details={"normal_form": sys.format_object(a)},
                witness=a,
            )
    return None


def _syntactically_selective(expr, desc: Semiring) -> bool:
    if isinstance(expr, agg.Var):
        return True
    if isinstance(expr, agg.Const):
        return False
    if isinstance(expr, agg.SumNode):
        return desc.plus_is_selective and all(
            _syntactically_selective(e, desc) for e in expr.terms
        )
    if isinstance(expr, agg.ProdNode):
        return desc.times_is_selective and all(
            _syntactically_selective(e, desc) for e in expr.factors
        )
    return False


def check_sufficient_selective(sys: SystemHandle, bound) -> BoundednessReport:
    """Bounded when normal forms stay below a common non-top bound and every
    aggregator provably returns one of its arguments."""
    desc = sys.semiring
    if bound == desc.top:
        raise PreconditionError("the universal bound must not be the maximum")
    desc.require(bound)

    details = {}
    nf_enum = sys.enumerate_nfs()
    if nf_enum is None:
        return BoundednessReport(UNKNOWN, "selective-bounded", {"normal_forms": "not enumerable"})
    nfs, nfs_complete = nf_enum
    for a in nfs:
        if not desc.leq(sys.nf_weight(a), bound):
            return BoundednessReport(
                UNKNOWN,
                "selective-bounded",
                {"violating_normal_form": sys.format_object(a)},
                witness=a,
            )
    details["normal_forms_checked"] = len(nfs)

    obj_enum = sys.enumerate_objects()
    if obj_enum is not None:
        objects, objects_complete = obj_enum
    else:
        # No complete universe: probe the aggregators on sampled objects.
        try:
            objects = sys.sample_objects(random.Random(0), 64)
        except Exception:
            objects = list(nfs)
        objects_complete = False

    checked_rules = 0
    for a in objects:
        rules, complete = sys.successors(a)
        if not complete:
            objects_complete = False
        for r in rules:
            checked_rules += 1
            if not _syntactically_selective(r.aggregator, desc):
                return BoundednessReport(
                    UNKNOWN,
                    "selective-bounded",
                    {"non_selective_rule": r.tag},
                    witness=r,
                )
    details["rules_checked"] = checked_rules

    complete = nfs_complete and objects_complete and obj_enum is not None
    count = len(nfs) + checked_rules
    return BoundednessReport(
        BOUNDED_CERTIFIED if complete else BOUNDED_SAMPLED,
        "selective-bounded",
        details,
        sample_count=0 if complete else count,
    )


def _aggregator_finite_no_top(expr, desc) -> bool:
    if isinstance(expr, agg.CountableSum):
        return False
    if isinstance(expr, agg.Const):
        return expr.value != desc.top
    if isinstance(expr, agg.SumNode):
        return all(_aggregator_finite_no_top(e, desc) for e in expr.terms)
    if isinstance(expr, agg.ProdNode):
        return all(_aggregator_finite_no_top(e, desc) for e in expr.factors)
    return True


def check_sufficient_extremal(sys: SystemHandle) -> BoundednessReport:
    """Bounded when the system is terminating, finitely non-deterministic and
    finitely branching, the semiring is extremal, no normal form weighs top,
    and every aggregator is finite without a top constant."""
    desc = sys.semiring
    details = {}
    missing = []

    for label, flag in (
        ("terminating", sys.flags.terminating),
        ("finitely_nondeterministic", sys.flags.finitely_nondeterministic),
        ("finitely_branching", sys.flags.finitely_branching),
    ):
        if flag is True:
            details[label] = "asserted"
        else:
            details[label] = "refuted" if flag is False else "unknown"
            missing.append(label)

    if desc.has_extremal_property:
        details["extremal_semiring"] = "yes"
    else:
        details["extremal_semiring"] = "no"
        missing.append("extremal_semiring")

    nf_enum = sys.enumerate_nfs()
    if nf_enum is None or not nf_enum[1]:
        details["normal_form_weights"] = "not fully enumerable"
        missing.append("normal_form_weights")
    else:
        bad = [a for a in nf_enum[0] if sys.nf_weight(a) == desc.top]
        if bad:
            details["normal_form_weights"] = (
                f"top-valued: {sys.format_object(bad[0])}"
            )
            missing.append("normal_form_weights")
        else:
            details["normal_form_weights"] = f"checked {len(nf_enum[0])}, none top"

    agg_ok = sys.aggregators_finite_no_top
    obj_enum = sys.enumerate_objects()
    if obj_enum is not None and obj_enum[1]:
        agg_ok = all(
            _aggregator_finite_no_top(r.aggregator, desc)
            for a in obj_enum[0]
            for r in sys.successors(a)[0]
        )
    if agg_ok is True:
        details["aggregators"] = "finite, no top constant"
    else:
        details["aggregators"] = "refuted" if agg_ok is False else "unknown"
        missing.append("aggregators")

    if missing:
        return BoundednessReport(
            UNKNOWN, "extremal-bounded", dict(details, missing=missing)
        )
    return BoundednessReport(BOUNDED_CERTIFIED, "extremal-bounded", details)


def verify_embedding(
    sys: SystemHandle,
    embedding: Embedding,
    instances="all",
    rule_budget: int = 64,
    branch_trunc: int = 64,
) -> BoundednessReport:
    """Check the interpretation-method inequalities on the given instances.

    For every supplied normal form the embedding must dominate its weight; for
    every rule of a supplied object it must dominate the aggregator applied to
    the embedded successors; and no touched object may embed to the maximum.
    ``instances="all"`` uses the complete object enumeration and yields a
    certificate; any other iterable yields a sampled verdict that reports how
    many instances were verified.
    """
    desc = sys.semiring
    exhaustive = isinstance(instances, str) and instances == "all"
    if exhaustive:
        enum = sys.enumerate_objects()
        if enum is None or not enum[1]:
            raise PreconditionError(
                f"system {sys.name} has no complete object enumeration; pass instances"
            )
        objects = enum[0]
    else:
        objects = list(instances)

    def embed(obj):
        value = embedding(obj)
        desc.require(value)
        if value == desc.top:
            return value, False
        return value, True

    checked = 0
    bound_map = {}
    for a in objects:
        ea, ok = embed(a)
        bound_map[a] = ea
        if not ok:
            return BoundednessReport(
                UNKNOWN,
                "interpretation-method",
                {"top_valued_embedding": sys.format_object(a)},
                witness=a,
            )
        rules, complete = sys.successors(a, rule_budget)
        if not rules and complete:
            checked += 1
            if not desc.leq(sys.nf_weight(a), ea):
                return BoundednessReport(
                    UNKNOWN,
                    "interpretation-method",
                    {
                        "violated_normal_form": sys.format_object(a),
                        "weight": desc.format_literal(sys.nf_weight(a)),
                        "embedding": desc.format_literal(ea),
                    },
                    witness=a,
                )
            continue
        if exhaustive and not complete:
            raise PreconditionError(
                f"rule enumeration for {sys.format_object(a)} is not complete"
            )
        for r in rules:
            checked += 1
            args = []
            for b in r.rhs:
                eb, ok = embed(b)
                bound_map.setdefault(b, eb)
                if not ok:
                    return BoundednessReport(
                        UNKNOWN,
                        "interpretation-method",
                        {"top_valued_embedding": sys.format_object(b)},
                        witness=b,
                    )
                args.append(eb)
            step, _ = evaluate(r.aggregator, desc, args, branch_trunc)
            if not desc.leq(step, ea):
                return BoundednessReport(
                    UNKNOWN,
                    "interpretation-method",
                    {
                        "violated_rule": r.tag,
                        "lhs": sys.format_object(a),
                        "aggregated": desc.format_literal(step),
                        "embedding": desc.format_literal(ea),
                    },
                    witness=r,
                )

    if exhaustive:
        return BoundednessReport(
            BOUNDED_CERTIFIED,
            "interpretation-method",
            {"instances_checked": checked},
            bound_map=bound_map,
        )
    return BoundednessReport(
        BOUNDED_SAMPLED,
        "interpretation-method",
        {"instances_checked": checked, "note": "verified on supplied instances only"},
        sample_count=checked,
        bound_map=bound_map,
    )


def _multi_affine(expr, desc, arity: int):
    """Affine form (coeffs per variable, constant) of a rule aggregator, or None."""
    zero, one = desc.zero, desc.one
    if isinstance(expr, agg.Const):
        return [zero] * arity, expr.value
    if isinstance(expr, agg.Var):
        coeffs = [zero] * arity
        coeffs[expr.index - 1] = one
        return coeffs, zero
    if isinstance(expr, agg.SumNode):
        coeffs, const = [zero] * arity, zero
        for term in expr.terms:
            f = _multi_affine(term, desc, arity)
            if f is None:
                return None
            coeffs = [desc.plus(a, b) for a, b in zip(coeffs, f[0])]
            const = desc.plus(const, f[1])
        return coeffs, const
    if isinstance(expr, agg.ProdNode):
        acc = _multi_affine(expr.factors[0], desc, arity)
        if acc is None:
            return None
        for factor in expr.factors[1:]:
            f = _multi_affine(factor, desc, arity)
            if f is None:
                return None
            left_linear = any(c != zero for c in acc[0])
            right_linear = any(c != zero for c in f[0])
            if left_linear and right_linear:
                return None
            if left_linear:
                scale = f[1]
                acc = [desc.times(c, scale) for c in acc[0]], desc.times(acc[1], scale)
            else:
                scale = acc[1]
                acc = [desc.times(scale, c) for c in f[0]], desc.times(scale, f[1])
        return acc
    return None


def search_affine_embedding(
    sys: SystemHandle, coeff_cap: int, rule_budget: int = 64
) -> Optional[Embedding]:
    """Enumerate finite value tables up to ``coeff_cap`` and return the first
    that verifies exhaustively; None when no table within the cap works."""
    desc = sys.semiring
    if not isinstance(desc, (NatInf, Tropical)):
        raise PreconditionError(
            "affine embedding search works over the counting or tropical carriers"
        )
    enum = sys.enumerate_objects()
    if enum is None or not enum[1]:
        raise PreconditionError("affine embedding search needs a finite explicit system")
    objects = sorted(enum[0], key=str)

    rules_of = {}
    for a in objects:
        rules, complete = sys.successors(a, rule_budget)
        if not complete:
            raise PreconditionError("affine embedding search needs complete rule lists")
        rules_of[a] = rules
        for r in rules:
            if _multi_affine(r.aggregator, desc, len(r.rhs)) is None:
                raise UnsupportedAggregatorError(
                    f"rule {r.tag}: aggregator is not affine in its variables"
                )

    nf_weight = {
        a: sys.nf_weight(a) for a in objects if not rules_of[a]
    }

    for combo in itertools.product(range(coeff_cap + 1), repeat=len(objects)):
        table = dict(zip(objects, combo))
        ok = True
        for a in objects:
            ea = table[a]
            if ea == desc.top:
                ok = False
                break
            if not rules_of[a]:
                if not desc.leq(nf_weight[a], ea):
                    ok = False
                    break
                continue
            for r in rules_of[a]:
                step, _ = evaluate(r.aggregator, desc, [table[b] for b in r.rhs])
                if not desc.leq(step, ea):
                    ok = False
                    break
            if not ok:
                break
        if ok:
            return Embedding.from_table(table, f"affine<={coeff_cap}")
    return None
