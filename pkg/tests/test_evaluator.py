"""Tree weighing, truncation, value iteration, fixpoints, and the tree oracle."""

from __future__ import annotations

import json
from fractions import Fraction

import pytest

from system_gen import random_system
from wars.builtins import builtin
from wars.evaluator import (
    LOWER_BOUND,
    STABILIZED,
    ReductionTree,
    StructuralTreeError,
    VisitCapExceeded,
    enumerate_trees,
    evaluate_to_fixpoint,
    iterate_lower_bounds,
    tree_weight,
    truncate,
    weight_lower_bound,
    weight_profile,
)
from wars.semiring import ALL_WORDS
from wars.system import load_explicit


def leaf(label):
    return ReductionTree(label)


FORMULA_SYSTEM = load_explicit(
    json.dumps(
        {
            "semiring": {"kind": "arctic"},
            "rules": [
                {"lhs": "psi", "rhs": ["Ra", "PabPbb"], "agg": "v1 * v2", "tag": "and"},
                {"lhs": "PabPbb", "rhs": ["Pab", "Pbb"], "agg": "v1 + v2", "tag": "or"},
            ],
            "nf": {"Ra": "2", "Pab": "7", "Pbb": "10"},
        }
    )
)

FORMULA_TREE = ReductionTree(
    "psi",
    "and",
    (
        leaf("Ra"),
        ReductionTree("PabPbb", "or", (leaf("Pab"), leaf("Pbb"))),
    ),
)


def walk_tree():
    # Root 2 fully expanded for two levels; leaves 2 and 4 stay unexplored.
    walk = builtin("walk_termprob")
    return walk, ReductionTree(
        2,
        "step",
        (
            ReductionTree(1, "step", (leaf(0), leaf(2))),
            ReductionTree(3, "step", (leaf(2), leaf(4))),
        ),
    )


class TestTreeWeight:
    def test_formula_tree(self):
        assert tree_weight(FORMULA_SYSTEM, FORMULA_TREE) == 12

    def test_single_normal_form(self):
        walk = builtin("walk_termprob")
        assert tree_weight(walk, leaf(0)) == 1

    def test_two_level_walk(self):
        walk, tree = walk_tree()
        assert tree_weight(walk, tree) == Fraction(4, 9)

    def test_child_mismatch_names_node(self):
        walk = builtin("walk_termprob")
        bad = ReductionTree(2, "step", (leaf(1), leaf(9)))
        with pytest.raises(StructuralTreeError, match="2"):
            tree_weight(walk, bad)

    def test_nonempty_leafless_non_nf_weighs_zero(self):
        walk = builtin("walk_termprob")
        assert tree_weight(walk, leaf(7)) == 0


class TestTruncate:
    def test_to_root(self):
        _, tree = walk_tree()
        assert truncate(tree, 0) == leaf(2)

    def test_one_level_loses_the_normal_form(self):
        walk, tree = walk_tree()
        cut = truncate(tree, 1)
        # Both depth-1 leaves reduce further, so they weigh the minimum.
        assert tree_weight(walk, cut) == 0

    def test_full_depth_is_identity(self):
        _, tree = walk_tree()
        assert truncate(tree, tree.depth()) == tree

    def test_truncation_never_increases_weight(self):
        walk, tree = walk_tree()
        weights = [tree_weight(walk, truncate(tree, n)) for n in range(tree.depth() + 1)]
        for lo, hi in zip(weights, weights[1:]):
            assert walk.semiring.leq(lo, hi)


class TestWeightLowerBound:
    def test_walk_two_steps(self):
        walk = builtin("walk_termprob")
        bound = weight_lower_bound(walk, 2, 2)
        assert bound.value == Fraction(4, 9)
        assert bound.status == LOWER_BOUND

    def test_normal_form_at_any_depth(self):
        walk = builtin("walk_termprob")
        for depth in (0, 3, 10):
            assert weight_lower_bound(walk, 0, depth).value == 1

    def test_unbounded_fanout_growth(self):
        na = builtin("na_system")
        for n in (1, 5, 12):
            bound = weight_lower_bound(na, "a", n + 1, rule_budget=n + 1)
            assert bound.value >= n

    def test_depth_monotone(self):
        walk = builtin("walk_termprob")
        values = weight_profile(walk, 2, 12)
        for lo, hi in zip(values, values[1:]):
            assert walk.semiring.leq(lo, hi)

    def test_budget_monotone(self):
        na = builtin("na_system")
        values = [
            weight_lower_bound(na, "a", 6, rule_budget=b).value for b in (1, 2, 4, 8)
        ]
        for lo, hi in zip(values, values[1:]):
            assert lo <= hi

    def test_visit_cap_carries_partial(self):
        walk = builtin("walk_termprob")
        with pytest.raises(VisitCapExceeded) as err:
            weight_lower_bound(walk, 2, 30, visit_cap=5)
        partial = err.value.partial
        assert partial.status == LOWER_BOUND
        assert walk.semiring.leq(partial.value, Fraction(1))

    def test_geometric_branch_truncation(self):
        geo = builtin("geometric_walk")
        bound = weight_lower_bound(geo, 1, 1)
        # One step: only the jump straight to the normal form contributes.
        assert bound.value == Fraction(1, 2)

    def test_branch_truncation_monotone(self):
        geo = builtin("geometric_walk")
        values = [
            weight_lower_bound(geo, 1, 3, branch_trunc=k).value
            for k in (1, 2, 4, 8, 16)
        ]
        for lo, hi in zip(values, values[1:]):
            assert lo <= hi


class TestFixpoint:
    def test_ski_rental_minimum(self):
        ski = builtin("ski_rental", y=3)
        result = evaluate_to_fixpoint(ski, ("loop", 5), 64)
        assert result.value == 3
        assert result.status == STABILIZED

    def test_explicit_chain(self):
        sys_ = load_explicit(
            json.dumps(
                {
                    "semiring": {"kind": "nat_inf"},
                    "rules": [{"lhs": "a", "rhs": ["b"], "agg": "v1"}],
                    "nf": {"b": "7"},
                }
            )
        )
        result = evaluate_to_fixpoint(sys_, "a", 16)
        assert result.value == 7 and result.status == STABILIZED

    def test_walk_approaches_one_without_stabilizing(self):
        walk = builtin("walk_termprob")
        result = evaluate_to_fixpoint(walk, 1, 200)
        assert result.status == LOWER_BOUND
        assert result.value > Fraction(999, 1000)
        assert result.value < 1

    def test_normal_form_stabilizes_at_depth_zero(self):
        walk = builtin("walk_termprob")
        result = evaluate_to_fixpoint(walk, 0, 0)
        assert result.value == 1 and result.status == STABILIZED


class TestEnumerateTrees:
    def test_normal_form_has_one_tree(self):
        walk = builtin("walk_termprob")
        assert list(enumerate_trees(walk, 0, 5)) == [leaf(0)]

    def test_branching_pair(self):
        sys_ = load_explicit(
            json.dumps(
                {
                    "semiring": {"kind": "nat_inf"},
                    "rules": [
                        {"lhs": "a", "rhs": ["b"], "agg": "v1", "tag": "left"},
                        {"lhs": "a", "rhs": ["c"], "agg": "v1", "tag": "right"},
                    ],
                    "nf": {"b": "1", "c": "2"},
                }
            )
        )
        trees = list(enumerate_trees(sys_, "a", 1))
        assert trees == [
            leaf("a"),
            ReductionTree("a", "left", (leaf("b"),)),
            ReductionTree("a", "right", (leaf("c"),)),
        ]

    def test_formula_tree_is_enumerated(self):
        trees = list(enumerate_trees(FORMULA_SYSTEM, "psi", 2))
        assert FORMULA_TREE in trees

    def test_trees_are_unique(self):
        for seed in range(6):
            sys_ = random_system(seed)
            for a in sys_.enumerate_objects()[0]:
                trees = list(enumerate_trees(sys_, a, 3))
                assert len(trees) == len(set(trees))


def oracle_join(sys_, a, depth):
    weights = [tree_weight(sys_, t) for t in enumerate_trees(sys_, a, depth)]
    return sys_.semiring.join(weights)


def test_truncation_weights_never_increase_on_random_trees():
    for seed in range(8):
        sys_ = random_system(seed)
        desc = sys_.semiring
        for a in sys_.enumerate_objects()[0][:3]:
            for tree in list(enumerate_trees(sys_, a, 3))[:40]:
                full = tree_weight(sys_, tree)
                for n in range(tree.depth() + 1):
                    cut = tree_weight(sys_, truncate(tree, n))
                    assert desc.leq(cut, full)


class TestOracleEquivalence:
    def test_small_random_systems(self):
        # Value iteration against brute-force enumeration over all objects
        # and depths; the acceptance suite runs the full 200-system version.
        for seed in range(30):
            sys_ = random_system(seed)
            for a in sys_.enumerate_objects()[0]:
                for depth in range(5):
                    iterated = weight_lower_bound(sys_, a, depth).value
                    assert iterated == oracle_join(sys_, a, depth), (
                        f"seed {seed}, object {a}, depth {depth}"
                    )

    def test_iterate_lower_bounds_matches(self):
        walk = builtin("walk_termprob")
        lazy = list(iterate_lower_bounds(walk, 2, 8))
        assert lazy == weight_profile(walk, 2, 8)

    def test_product_carrier(self):
        sys_ = load_explicit(
            json.dumps(
                {
                    "semiring": {
                        "kind": "product",
                        "components": [{"kind": "nat_inf"}, {"kind": "boolean"}],
                    },
                    "rules": [
                        {"lhs": "a", "rhs": ["b", "c"], "agg": "(1,true) + v1 * v2", "tag": "r0"},
                        {"lhs": "a", "rhs": ["b"], "agg": "v1", "tag": "r1"},
                        {"lhs": "b", "rhs": ["c", "c"], "agg": "(2,false) + v1 + v2", "tag": "r2"},
                        {"lhs": "b", "rhs": ["a"], "agg": "(1,false) + v1", "tag": "r3"},
                    ],
                    "nf": {"c": "(1,true)"},
                }
            )
        )
        for a in sys_.enumerate_objects()[0]:
            for depth in range(5):
                assert weight_lower_bound(sys_, a, depth).value == oracle_join(
                    sys_, a, depth
                )

    def test_language_carrier(self):
        sys_ = builtin("bitstring_prefixes")
        for a in ("0", "1", "*"):
            for depth in range(6):
                assert weight_lower_bound(sys_, a, depth).value == oracle_join(
                    sys_, a, depth
                )


class TestSchedulerWeights:
    def test_service_orders_accumulate(self):
        # Deeper exploration reveals every short service order.
        fair = builtin("os_fair")
        start = fair.parse_object("idle()")
        value = weight_lower_bound(fair, start, 16).value
        for word in ("", "P1", "P2", "P1P1", "P1P2", "P2P1", "P2P2"):
            assert word in value

    def test_expected_steps_approach_three(self):
        walk = builtin("walk_expected")
        value = weight_lower_bound(walk, 1, 200).value
        assert Fraction(29, 10) < value < 3


class TestBitstreamWeights:
    def test_distinct_weight_counts(self):
        sys_ = builtin("bitstring_prefixes")
        for depth in range(1, 5):
            weights = set()
            for root in ("0", "1"):
                for tree in enumerate_trees(sys_, root, depth):
                    weights.add(tree_weight(sys_, tree))
            assert len(weights) == 2 ** depth

    def test_weights_are_prefix_sets(self):
        sys_ = builtin("bitstring_prefixes")
        deep = max(
            enumerate_trees(sys_, "0", 4),
            key=lambda t: t.depth(),
        )
        w = tree_weight(sys_, deep)
        assert w is not ALL_WORDS
        for word in w:
            for i in range(len(word) + 1):
                assert word[:i] in w
