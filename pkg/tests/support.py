"""Shared helpers: fixture paths, random graphs, and constrained instance families."""

from __future__ import annotations

import random
from fractions import Fraction
from pathlib import Path

from suffcause import Dag, ResponseTable, Scm, facts_from_scm
from suffcause.covsign import Flag, RepFacts

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

# Monotone-in-both rows for a two-parent table, bit c = output at config c
# with bit0 = E1, bit1 = E2.
ROW_CONST0 = 0
ROW_AND = 8
ROW_E1 = 10
ROW_E2 = 12
ROW_OR = 14
ROW_CONST1 = 15
MONOTONE_PAIR_ROWS = (ROW_CONST0, ROW_AND, ROW_E1, ROW_E2, ROW_OR, ROW_CONST1)


def fixture(name: str) -> str:
    return str(FIXTURES / f"{name}.model")


def random_dag(rng: random.Random, n_nodes: int, edge_prob: float = 0.4) -> Dag:
    nodes = [f"X{i}" for i in range(n_nodes)]
    edges = [
        (nodes[i], nodes[j])
        for i in range(n_nodes)
        for j in range(i + 1, n_nodes)
        if rng.random() < edge_prob
    ]
    return Dag(nodes, edges)


def random_fraction(rng: random.Random, max_den: int = 8) -> Fraction:
    den = rng.randint(2, max_den)
    num = rng.randint(1, den - 1)
    return Fraction(num, den)


# -- structures for the two-parent covariance rule set -----------------------

def _pair_graph(correlated: bool) -> Dag:
    if correlated:
        return Dag(["C", "E1", "E2", "D"], [("C", "E1"), ("C", "E2"), ("E1", "D"), ("E2", "D")])
    return Dag(["E1", "E2", "D"], [("E1", "D"), ("E2", "D")])


def _pair_structure(rng: random.Random, kind: str, d_table: ResponseTable) -> Scm:
    """kind: 'ind' (independent roots), 'same' or 'opp' (common cause)."""
    if kind == "ind":
        g = _pair_graph(False)
        return Scm(g, {
            "E1": ResponseTable.bernoulli("E1", random_fraction(rng)),
            "E2": ResponseTable.bernoulli("E2", random_fraction(rng)),
            "D": d_table,
        })
    g = _pair_graph(True)
    # child rows over one parent C: 0 const0, 2 nondecreasing, 1 nonincreasing, 3 const1
    up_rows = (0, 2, 3)
    down_rows = (0, 1, 3)
    def child(name: str, rows: tuple[int, ...]) -> ResponseTable:
        k = rng.randint(1, 3)
        chosen = tuple(rng.sample(rows, k))
        weights = [rng.randint(1, 8) for _ in chosen]
        total = sum(weights)
        return ResponseTable(name, ("C",), chosen, tuple(Fraction(w, total) for w in weights))
    e2_rows = up_rows if kind == "same" else down_rows
    return Scm(g, {
        "C": ResponseTable.bernoulli("C", random_fraction(rng)),
        "E1": child("E1", up_rows),
        "E2": child("E2", e2_rows),
        "D": d_table,
    })


def _random_pair_table(rng: random.Random, pool: tuple[int, ...]) -> ResponseTable:
    k = rng.randint(1, min(3, len(pool)))
    rows = tuple(rng.sample(pool, k))
    weights = [rng.randint(1, 8) for _ in rows]
    total = sum(weights)
    return ResponseTable("D", ("E1", "E2"), rows, tuple(Fraction(w, total) for w in weights))


def _product_pair_table(rng: random.Random, with_background: bool) -> ResponseTable:
    """D = (u1 and E1) or (u2 and E2) [or u0], with independent latent bits.

    Gives exactly independent co-cause events for the single-cause slots.
    """
    p = random_fraction(rng)
    q = random_fraction(rng)
    rows = [ROW_CONST0, ROW_E1, ROW_E2, ROW_OR]
    probs = [(1 - p) * (1 - q), p * (1 - q), (1 - p) * q, p * q]
    if with_background:
        r = random_fraction(rng)
        rows.append(ROW_CONST1)
        probs = [x * (1 - r) for x in probs] + [r]
    return ResponseTable("D", ("E1", "E2"), tuple(rows), tuple(probs))


CASE_RULES = (
    "no_background_d1",
    "no_background_d0",
    "lone_cause_certain_d1",
    "lone_cause_certain_d0",
    "lone_cause_absent_d1",
    "lone_cause_absent_d0",
    "no_synergy_d1",
    "no_synergy_d0",
)


def _case_candidate(rng: random.Random, rule: str) -> Scm:
    no_bg = (ROW_CONST0, ROW_AND, ROW_E1, ROW_E2, ROW_OR)
    certain = (ROW_E1, ROW_OR, ROW_CONST1)
    absent = (ROW_CONST0, ROW_AND, ROW_E2, ROW_CONST1)
    no_syn = (ROW_CONST0, ROW_E1, ROW_E2, ROW_OR, ROW_CONST1)
    if rule == "no_background_d1":
        return _pair_structure(rng, rng.choice(["ind", "same", "opp"]), _random_pair_table(rng, no_bg))
    if rule == "no_background_d0":
        which = rng.choice(["product", "a1_empty", "a2_empty", "a1_one"])
        if which == "product":
            table = _product_pair_table(rng, with_background=False)
        elif which == "a1_empty":
            table = _random_pair_table(rng, (ROW_CONST0, ROW_AND, ROW_E2))
        elif which == "a2_empty":
            table = _random_pair_table(rng, (ROW_CONST0, ROW_AND, ROW_E1))
        else:
            table = _random_pair_table(rng, (ROW_E1, ROW_OR))
        return _pair_structure(rng, "ind", table)
    if rule == "lone_cause_certain_d1":
        return _pair_structure(rng, rng.choice(["ind", "opp"]), _random_pair_table(rng, certain))
    if rule == "lone_cause_certain_d0":
        return _pair_structure(rng, rng.choice(["ind", "same", "opp"]), _random_pair_table(rng, certain))
    if rule == "lone_cause_absent_d1":
        return _pair_structure(rng, rng.choice(["ind", "same"]), _random_pair_table(rng, absent))
    if rule == "lone_cause_absent_d0":
        # the zero-stratum rule carries an independence premise
        return _pair_structure(rng, "ind", _random_pair_table(rng, absent))
    if rule == "no_synergy_d1":
        return _pair_structure(rng, rng.choice(["ind", "opp"]), _random_pair_table(rng, no_syn))
    if rule == "no_synergy_d0":
        which = rng.choice(["product", "a1_one", "a2_one", "a1_empty", "a2_empty"])
        table = {
            "product": lambda: _product_pair_table(rng, with_background=False),
            "a1_one": lambda: _random_pair_table(rng, (ROW_E1, ROW_OR, ROW_CONST1)),
            "a2_one": lambda: _random_pair_table(rng, (ROW_E2, ROW_OR, ROW_CONST1)),
            "a1_empty": lambda: _random_pair_table(rng, (ROW_CONST0, ROW_E2, ROW_CONST1)),
            "a2_empty": lambda: _random_pair_table(rng, (ROW_CONST0, ROW_E1, ROW_CONST1)),
        }[which]()
        return _pair_structure(rng, "ind", table)
    raise ValueError(rule)


def _case_premises_hold(rule: str, facts: RepFacts) -> bool:
    if rule == "no_background_d1":
        return facts.a0 is Flag.ZERO
    if rule == "no_background_d0":
        return facts.a0 is Flag.ZERO and facts.a1_a2_indep and facts.e_indep
    if rule == "lone_cause_certain_d1":
        return (facts.a1 is Flag.ONE or facts.a2 is Flag.ONE) and facts.e_cov.allows_le0()
    if rule == "lone_cause_certain_d0":
        return facts.a1 is Flag.ONE or facts.a2 is Flag.ONE
    if rule == "lone_cause_absent_d1":
        return (facts.a1 is Flag.ZERO or facts.a2 is Flag.ZERO) and facts.e_cov.allows_ge0()
    if rule == "lone_cause_absent_d0":
        return (
            (facts.a1 is Flag.ZERO or facts.a2 is Flag.ZERO)
            and facts.e_cov.allows_ge0() and facts.e_indep
        )
    if rule == "no_synergy_d1":
        return facts.a3 is Flag.ZERO and facts.e_cov.allows_le0()
    if rule == "no_synergy_d0":
        return (
            facts.a3 is Flag.ZERO and facts.a1_a2_indep and facts.e_indep
            and (facts.a0_a1_indep or facts.a0_a2_indep)
        )
    raise ValueError(rule)


def case_instances(rule: str, count: int, seed: int):
    """Yield ``count`` models whose oracle-established facts satisfy the case.

    Each yielded pair is (scm, facts); the joint distribution is guaranteed
    to put positive mass on both strata of D.
    """
    from suffcause import conditional_covariance, joint_distribution
    from suffcause.oracle import ConditioningError

    rng = random.Random(seed)
    produced = 0
    attempts = 0
    while produced < count:
        attempts += 1
        if attempts > count * 400:
            raise RuntimeError(f"could not build {count} instances for {rule}")
        scm = _case_candidate(rng, rule)
        facts = facts_from_scm(scm, "D", "E1", "E2")
        if not _case_premises_hold(rule, facts):
            continue
        dist = joint_distribution(scm)
        try:
            conditional_covariance(dist, "E1", "E2", {"D": 1})
            conditional_covariance(dist, "E1", "E2", {"D": 0})
        except ConditioningError:
            continue
        produced += 1
        yield scm, facts
