"""Seeded generator of small explicit systems for oracle comparisons."""

from __future__ import annotations

import json
import random

from wars.system import SystemHandle, load_explicit

KINDS = ("nat_inf", "tropical", "boolean")


def _literal(rng: random.Random, kind: str) -> str:
    if kind == "boolean":
        return rng.choice(["true", "false"])
    if rng.random() < 0.05:
        return "inf"
    return str(rng.randrange(0, 4))


def _expr(rng: random.Random, arity: int, kind: str) -> str:
    def factor(depth):
        roll = rng.random()
        if roll < 0.5 and arity:
            return f"v{rng.randrange(1, arity + 1)}"
        if roll < 0.75 or depth >= 2:
            return _literal(rng, kind)
        return "(" + expr(depth + 1) + ")"

    def term(depth):
        count = 2 if rng.random() < 0.3 else 1
        return " * ".join(factor(depth) for _ in range(count))

    def expr(depth):
        count = 2 if rng.random() < 0.4 else 1
        return " + ".join(term(depth) for _ in range(count))

    return expr(0)


def _tree_counts(rules: list[dict], objects: set[str], depth: int) -> int:
    """Largest number of reduction trees any object admits up to ``depth``."""
    by_lhs: dict[str, list] = {}
    for r in rules:
        by_lhs.setdefault(r["lhs"], []).append(r["rhs"])
    counts = {obj: 1 for obj in objects}
    worst = 1
    for _ in range(depth):
        counts = {
            obj: 1
            + sum(
                _product(counts[b] for b in rhs) for rhs in by_lhs.get(obj, [])
            )
            for obj in objects
        }
        worst = max(worst, max(counts.values()))
    return worst


def _product(values) -> int:
    out = 1
    for v in values:
        out *= v
    return out


def random_system_json(seed: int, max_trees: int = 10_000, oracle_depth: int = 4) -> dict:
    """A small explicit system; explosive drafts are deterministically redrawn
    so brute-force tree enumeration up to ``oracle_depth`` stays feasible."""
    attempt = seed
    while True:
        rng = random.Random(attempt)
        kind = KINDS[seed % len(KINDS)]
        names = [f"a{i}" for i in range(rng.randrange(3, 7))]

        rules = []
        for obj in names:
            for j in range(rng.choices([0, 1, 2, 3], weights=[35, 30, 20, 15])[0]):
                length = rng.choices([1, 2, 3], weights=[50, 30, 20])[0]
                rhs = [rng.choice(names) for _ in range(length)]
                rules.append(
                    {
                        "lhs": obj,
                        "rhs": rhs,
                        "agg": _expr(rng, length, kind),
                        "tag": f"{obj}r{j}",
                    }
                )

        mentioned = {r["lhs"] for r in rules} | {b for r in rules for b in r["rhs"]}
        if not mentioned:
            mentioned = {names[0]}
        if _tree_counts(rules, mentioned, oracle_depth) <= max_trees:
            ruled = {r["lhs"] for r in rules}
            nf = {obj: _literal(rng, kind) for obj in sorted(mentioned - ruled)}
            return {"semiring": {"kind": kind}, "rules": rules, "nf": nf}
        attempt = attempt * 7919 + 1


def random_system(seed: int) -> SystemHandle:
    return load_explicit(json.dumps(random_system_json(seed)))
