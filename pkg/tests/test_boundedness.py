"""Boundedness checks: top-valued normal forms, selective and extremal
sufficient conditions, embedding verification, and the affine search."""

from __future__ import annotations

import json
from fractions import Fraction

import pytest

from wars.aggregator import evaluate
from wars.boundedness import (
    BOUNDED_CERTIFIED,
    BOUNDED_SAMPLED,
    UNBOUNDED,
    UNKNOWN,
    Embedding,
    PreconditionError,
    UnsupportedAggregatorError,
    builtin_embedding,
    check_nf_top,
    check_sufficient_extremal,
    check_sufficient_selective,
    search_affine_embedding,
    verify_embedding,
)
from wars.builtins import builtin, ground_terms
from wars.evaluator import weight_lower_bound
from wars.semiring import INF
from wars.system import load_explicit


def explicit(spec: dict):
    return load_explicit(json.dumps(spec))


BOTTLENECK_NET = explicit(
    {
        "semiring": {"kind": "bottleneck"},
        "rules": [
            {"lhs": "src", "rhs": ["mid", "alt"], "agg": "v1 + v2", "tag": "fan"},
            {"lhs": "mid", "rhs": ["snk"], "agg": "v1", "tag": "fwd"},
            {"lhs": "alt", "rhs": ["snk", "snk"], "agg": "v1 * v2", "tag": "both"},
        ],
        "nf": {"snk": "5"},
    }
)

CHAIN = explicit(
    {
        "semiring": {"kind": "nat_inf"},
        "rules": [
            {"lhs": "a", "rhs": ["b"], "agg": "1 + v1", "tag": "ab"},
            {"lhs": "b", "rhs": ["c"], "agg": "1 + v1", "tag": "bc"},
        ],
        "nf": {"c": "2"},
    }
)


class TestCheckNfTop:
    def test_infinite_normal_form_is_a_witness(self):
        sys_ = explicit(
            {
                "semiring": {"kind": "nat_inf"},
                "rules": [{"lhs": "a", "rhs": ["b"], "agg": "v1"}],
                "nf": {"b": "inf"},
            }
        )
        report = check_nf_top(sys_)
        assert report is not None and report.verdict == UNBOUNDED
        assert report.witness == "b"

    def test_finite_weights_are_silent(self):
        assert check_nf_top(CHAIN) is None

    def test_finite_cost_table_is_silent(self):
        assert check_nf_top(builtin("boolform", finite_costs=True)) is None

    def test_default_cost_table_has_top_atoms(self):
        report = check_nf_top(builtin("boolform"))
        assert report is not None and report.verdict == UNBOUNDED


class TestSelectiveCondition:
    def test_constant_free_bottleneck_certifies(self):
        report = check_sufficient_selective(BOTTLENECK_NET, 5)
        assert report.verdict == BOUNDED_CERTIFIED

    def test_step_counting_is_not_selective(self):
        report = check_sufficient_selective(CHAIN, 100)
        assert report.verdict == UNKNOWN
        assert "non_selective_rule" in report.details

    def test_single_normal_form_with_its_own_bound(self):
        sys_ = explicit(
            {
                "semiring": {"kind": "bottleneck"},
                "rules": [{"lhs": "a", "rhs": ["b"], "agg": "v1"}],
                "nf": {"b": "3"},
            }
        )
        report = check_sufficient_selective(sys_, 3)
        assert report.verdict == BOUNDED_CERTIFIED

    def test_top_bound_rejected(self):
        with pytest.raises(PreconditionError):
            check_sufficient_selective(BOTTLENECK_NET, INF)

    def test_violating_normal_form_reported(self):
        report = check_sufficient_selective(BOTTLENECK_NET, 4)
        assert report.verdict == UNKNOWN
        assert report.details["violating_normal_form"] == "snk"

    def test_open_family_rules_are_sampled(self):
        # No complete object enumeration: the walk's aggregator is probed on
        # sampled objects and correctly fails the syntactic test.
        walk = builtin("walk_termprob")
        report = check_sufficient_selective(walk, Fraction(1))
        assert report.verdict == UNKNOWN
        assert "non_selective_rule" in report.details


class TestExtremalCondition:
    def test_finite_cost_formulas_certify(self):
        report = check_sufficient_extremal(builtin("boolform", finite_costs=True))
        assert report.verdict == BOUNDED_CERTIFIED

    def test_unbounded_fanout_blocks(self):
        report = check_sufficient_extremal(builtin("na_system"))
        assert report.verdict == UNKNOWN
        assert "finitely_nondeterministic" in report.details["missing"]
        assert report.details["finitely_nondeterministic"] == "refuted"

    def test_non_terminating_scheduler_blocks(self):
        report = check_sufficient_extremal(builtin("os_size"))
        assert report.verdict == UNKNOWN
        assert "terminating" in report.details["missing"]

    def test_top_constant_blocks(self):
        sys_ = explicit(
            {
                "semiring": {"kind": "nat_inf"},
                "rules": [{"lhs": "a", "rhs": ["b"], "agg": "inf + v1"}],
                "nf": {"b": "0"},
            }
        )
        report = check_sufficient_extremal(sys_)
        assert report.verdict == UNKNOWN
        assert "aggregators" in report.details["missing"]

    def test_terminating_chain_certifies(self):
        report = check_sufficient_extremal(CHAIN)
        assert report.verdict == BOUNDED_CERTIFIED


class TestVerifyEmbedding:
    def test_walk_triple_slope(self):
        walk = builtin("walk_expected")
        e = builtin_embedding("walk3n")
        report = verify_embedding(walk, e, range(0, 1001))
        assert report.verdict == BOUNDED_SAMPLED
        assert report.sample_count == 1001
        # Both sides of the step inequality agree exactly on every instance.
        for n in range(1, 1001):
            rule = walk.successors(n)[0][0]
            step, _ = evaluate(
                rule.aggregator, walk.semiring, [e(n - 1), e(n + 1)]
            )
            assert step == e(n) == 3 * n

    def test_walk_bound_dominates_iteration(self):
        walk = builtin("walk_expected")
        for k in range(0, 21):
            bound = weight_lower_bound(walk, k, 12)
            assert walk.semiring.leq(bound.value, Fraction(3 * k))

    def test_addition_terms_certify(self):
        trs = builtin("addition_trs", max_size=8)
        e = builtin_embedding("trs_add")
        report = verify_embedding(trs, e)
        assert report.verdict == BOUNDED_CERTIFIED
        assert report.bound_map is not None

    def test_addition_bound_dominates_iteration(self):
        trs = builtin("addition_trs", max_size=8)
        report = verify_embedding(trs, builtin_embedding("trs_add"))
        assert report.certified()
        sampled = ground_terms(8)[::11]
        for t in sampled:
            for depth in (0, 4, 12):
                w = weight_lower_bound(trs, t, depth).value
                assert trs.semiring.leq(w, report.bound_map[t])

    def test_addition_root_steps_are_tight(self):
        # Root rewrites of the first schema meet their bound with equality.
        trs = builtin("addition_trs", max_size=8)
        e = builtin_embedding("trs_add")
        seen = 0
        for t in ground_terms(8):
            if t[0] != "plus" or t[1][0] != "s":
                continue
            lhs_value = e(t)
            rule = next(r for r in trs.successors(t)[0] if r.tag == "plus_s@")
            step, _ = evaluate(rule.aggregator, trs.semiring, [e(rule.rhs[0])])
            assert step == lhs_value == 2 * e(t[1][1]) + e(t[2]) + 3
            seen += 1
        assert seen > 0

    def test_case_split_embedding_samples(self):
        zwalk = builtin("z_walk_safety")
        e = builtin_embedding("zwalk_case")
        report = verify_embedding(zwalk, e, range(-100, 101))
        assert report.verdict == BOUNDED_SAMPLED
        assert report.sample_count == 201
        # The odd case pins (inf, false) on both sides; that tuple is not the
        # maximum (inf, true), so it is accepted.
        assert e(7) == (INF, False)
        assert e(7) != zwalk.semiring.top

    def test_violation_is_reported_with_instance(self):
        walk = builtin("walk_expected")
        too_small = Embedding(lambda n: Fraction(2 * n), "walk2n")
        report = verify_embedding(walk, too_small, range(0, 50))
        assert report.verdict == UNKNOWN
        assert "violated_rule" in report.details

    def test_top_valued_embedding_rejected(self):
        report = verify_embedding(
            CHAIN, Embedding.from_table({"a": INF, "b": 3, "c": 2}), ["a"]
        )
        assert report.verdict == UNKNOWN
        assert "top_valued_embedding" in report.details

    def test_exhaustive_needs_enumeration(self):
        walk = builtin("walk_expected")
        with pytest.raises(PreconditionError):
            verify_embedding(walk, builtin_embedding("walk3n"))

    def test_undefined_embedding_raises(self):
        from wars.boundedness import EmbeddingDomainError

        partial = Embedding.from_table({"a": 4, "b": 3})  # no entry for "c"
        with pytest.raises(EmbeddingDomainError, match="undefined"):
            verify_embedding(CHAIN, partial)

    def test_certified_bound_dominates_every_level(self):
        e = search_affine_embedding(CHAIN, 6)
        report = verify_embedding(CHAIN, e)
        assert report.certified()
        for a in CHAIN.enumerate_objects()[0]:
            for depth in range(13):
                w = weight_lower_bound(CHAIN, a, depth).value
                assert CHAIN.semiring.leq(w, report.bound_map[a])


class TestSearchAffineEmbedding:
    def test_minimal_single_step(self):
        sys_ = explicit(
            {
                "semiring": {"kind": "nat_inf"},
                "rules": [{"lhs": "a", "rhs": ["b"], "agg": "1 + v1"}],
                "nf": {"b": "0"},
            }
        )
        e = search_affine_embedding(sys_, 4)
        assert e is not None
        assert (e("a"), e("b")) == (1, 0)

    def test_self_loop_has_no_finite_embedding(self):
        sys_ = explicit(
            {
                "semiring": {"kind": "nat_inf"},
                "rules": [{"lhs": "a", "rhs": ["a"], "agg": "1 + v1"}],
                "nf": {},
            }
        )
        assert search_affine_embedding(sys_, 8) is None

    def test_chain_back_substitution(self):
        e = search_affine_embedding(CHAIN, 6)
        assert e is not None
        assert {x: e(x) for x in "abc"} == {"a": 4, "b": 3, "c": 2}

    def test_output_reverifies(self):
        e = search_affine_embedding(CHAIN, 6)
        assert verify_embedding(CHAIN, e).certified()

    def test_non_affine_aggregator_rejected(self):
        sys_ = explicit(
            {
                "semiring": {"kind": "nat_inf"},
                "rules": [{"lhs": "a", "rhs": ["b", "b"], "agg": "v1 * v2"}],
                "nf": {"b": "2"},
            }
        )
        with pytest.raises(UnsupportedAggregatorError):
            search_affine_embedding(sys_, 4)

    def test_wrong_carrier_rejected(self):
        with pytest.raises(PreconditionError):
            search_affine_embedding(BOTTLENECK_NET, 4)


def test_unknown_builtin_embedding():
    with pytest.raises(Exception, match="unknown embedding"):
        builtin_embedding("nope")
