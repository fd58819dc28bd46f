"""Graph expansion, stratum conditioning, and oracle soundness of stratum claims."""

import random
from fractions import Fraction

import pytest

from suffcause import (
    Dag,
    Representation,
    ResponseTable,
    Scm,
    canonical_representation,
    conditional_independent,
    conj,
    expand,
    expanded_distribution,
    find_unblocked_path,
    joint_distribution,
    marginalize,
    stratum_conditioning_set,
    stratum_independent,
)

from support import random_fraction

half = Fraction(1, 2)


def roots(names, rng=None):
    if rng is None:
        return {n: ResponseTable.bernoulli(n, half) for n in names}
    return {n: ResponseTable.bernoulli(n, random_fraction(rng)) for n in names}


def pairs_model(rng=None):
    g = Dag(["E1", "E2", "E3", "E4", "D"], [(p, "D") for p in ("E1", "E2", "E3", "E4")])
    m = Scm(g, {**roots(("E1", "E2", "E3", "E4"), rng),
                "D": ResponseTable.deterministic(
                    "D", ("E1", "E2", "E3", "E4"), lambda a, b, c, d: (a & b) | (c & d))})
    rep = Representation("D", (conj("E1", "E2"), conj("E3", "E4")))
    return m, rep


def overlap_model(rng=None):
    g = Dag(["E1", "E2", "A", "D"], [("E1", "D"), ("E2", "D"), ("A", "D")])
    m = Scm(g, {**roots(("E1", "E2", "A"), rng),
                "D": ResponseTable.deterministic(
                    "D", ("E1", "E2", "A"), lambda e1, e2, a: (e1 & e2) | (a & (1 - e2)))})
    rep = Representation("D", (conj("E1", "E2"), conj("A", "~E2")))
    return m, rep


class TestExpand:
    def test_disjoint_pairs_structure(self):
        m, rep = pairs_model()
        exp = expand(m, "D", rep)
        assert exp.and_nodes == ("E1E2", "E3E4")
        assert exp.exogenous is None
        assert exp.dag.parents("D") == ("E1E2", "E3E4")
        assert exp.dag.parents("E1E2") == ("E1", "E2")

    def test_overlap_structure_with_complement_edge(self):
        m, rep = overlap_model()
        exp = expand(m, "D", rep)
        assert exp.and_nodes == ("E1E2", "A~E2")
        assert exp.dag.parents("A~E2") == ("E2", "A")
        assert exp.dag.signs[("E2", "A~E2")] == "-"
        assert exp.dag.signs[("A", "A~E2")] == "+"

    def test_single_term_chain(self):
        # the conjunction label "E" is taken by the base node, so the AND
        # node falls back to M0 and the chain is E -> M0 -> D
        g = Dag(["E", "D"], [("E", "D")])
        m = Scm(g, {"E": ResponseTable.bernoulli("E", half),
                    "D": ResponseTable.deterministic("D", ("E",), lambda e: e)})
        exp = expand(m, "D", Representation("D", (conj("E"),)))
        assert exp.and_nodes == ("M0",)
        assert exp.dag.edges == (("E", "M0"), ("M0", "D"))

    def test_rejects_nondeterminative_rep(self):
        m, _ = pairs_model()
        with pytest.raises(ValueError, match="not determinative"):
            expand(m, "D", Representation("D", (conj("E1", "E2"),)))

    def test_state_bound_terms_add_exogenous_chain(self):
        g = Dag(["E", "D"], [("E", "D")])
        table = ResponseTable("D", ("E",), (3, 2, 1, 0), (Fraction(1, 4),) * 4)
        m = Scm(g, {"E": ResponseTable.bernoulli("E", half), "D": table})
        rep = canonical_representation(table)
        exp = expand(m, "D", rep)
        assert exp.exogenous == "U"
        assert exp.cocause_nodes == ("A0", "A1", "A2")
        assert exp.and_nodes == ("A0", "A1E", "A2~E")
        assert exp.dag.parents("A0") == ("U",)
        assert exp.dag.parents("A1E") == ("E", "A1")
        assert exp.dag.parents("D") == ("A0", "A1E", "A2~E")

    def test_name_collision_falls_back(self):
        # a base node already named A0 pushes the co-cause to its fallback name
        g = Dag(["E", "A0", "D"], [("E", "D"), ("A0", "D")])
        table = ResponseTable("D", ("E", "A0"), (12, 0), (half, half))
        m = Scm(g, {"E": ResponseTable.bernoulli("E", half),
                    "A0": ResponseTable.bernoulli("A0", half), "D": table})
        rep = canonical_representation(table)
        exp = expand(m, "D", rep)
        assert exp.cocause_nodes == ("cocause0",)
        assert all(n not in ("E", "A0", "D") or n in m.graph.nodes for n in exp.dag.nodes)

    def test_marginalizing_auxiliaries_recovers_base_structure(self):
        for build in (pairs_model, overlap_model):
            m, rep = build()
            exp = expand(m, "D", rep)
            back = marginalize(exp.dag, exp.auxiliary_nodes)
            assert back.nodes == m.graph.nodes
            assert back.edges == m.graph.edges


class TestStratumConditioning:
    def test_stratum_sets(self):
        m, rep = pairs_model()
        exp = expand(m, "D", rep)
        assert stratum_conditioning_set(exp, 0) == {"D", "E1E2", "E3E4"}
        assert stratum_conditioning_set(exp, 1) == {"D"}
        with pytest.raises(ValueError, match="stratum"):
            stratum_conditioning_set(exp, 2)

    def test_disjoint_pairs_verdicts(self):
        m, rep = pairs_model()
        exp = expand(m, "D", rep)
        for x in ("E1", "E2"):
            for y in ("E3", "E4"):
                assert stratum_independent(exp, x, y, (), 0)
        assert not stratum_independent(exp, "E1", "E3", (), 1)
        assert not stratum_independent(exp, "E1", "E2", (), 0)

    def test_overlap_verdicts_and_witness(self):
        m, rep = overlap_model()
        exp = expand(m, "D", rep)
        assert not stratum_independent(exp, "E1", "A", (), 0)
        assert not stratum_independent(exp, "E1", "E2", (), 0)
        assert not stratum_independent(exp, "E2", "A", (), 0)
        w = find_unblocked_path(exp.dag, "E1", "A", stratum_conditioning_set(exp, 0))
        assert w is not None and w.nodes == ("E1", "E1E2", "E2", "A~E2", "A")

    def test_redundant_term_obscures_independence(self):
        g1 = Dag(["A", "B", "E", "F", "D"], [(p, "D") for p in "ABEF"])
        m1 = Scm(g1, {**roots("ABEF"),
                      "D": ResponseTable.deterministic(
                          "D", ("A", "B", "E", "F"), lambda a, b, e, f: (a & b) | (e & f))})
        exp1 = expand(m1, "D", Representation("D", (conj("A", "B"), conj("E", "F"))))
        assert stratum_independent(exp1, "A", "E", (), 0)

        g2 = Dag(["A", "B", "E", "F", "Q", "D"],
                 [("B", "Q"), ("E", "Q")] + [(p, "D") for p in ("A", "B", "E", "F", "Q")])
        m2 = Scm(g2, {**roots("ABEF"),
                      "Q": ResponseTable.deterministic("Q", ("B", "E"), lambda b, e: b & e),
                      "D": ResponseTable.deterministic(
                          "D", ("A", "B", "E", "F", "Q"),
                          lambda a, b, e, f, q: (a & b) | (a & q) | (e & f))})
        rep2 = Representation("D", (conj("A", "B"), conj("A", "Q"), conj("E", "F")))
        exp2 = expand(m2, "D", rep2)
        assert stratum_conditioning_set(exp2, 0) == {"D", "AB", "AQ", "EF"}
        assert not stratum_independent(exp2, "A", "E", (), 0)


class TestOracleSoundness:
    def test_expanded_distribution_matches_base_marginal(self):
        m, rep = pairs_model()
        exp = expand(m, "D", rep)
        base_cols = list(m.graph.nodes)
        assert expanded_distribution(m, exp).marginal(base_cols) == \
            joint_distribution(m).marginal(base_cols)

    def test_true_verdicts_hold_exactly_for_random_parameterizations(self):
        rng = random.Random(515)
        for _ in range(25):
            m, rep = pairs_model(rng)
            exp = expand(m, "D", rep)
            dist = expanded_distribution(m, exp)
            if dist.restrict({"D": 0}).mass() == 0:
                continue
            assert conditional_independent(dist, "E1", "E3", (), {"D": 0})
            assert conditional_independent(dist, "E1", "E4", (), {"D": 0})

    def test_false_verdict_is_not_a_dependence_claim_but_can_be_dependence(self):
        # some parameterization of the overlapping model shows real dependence
        rng = random.Random(99)
        found = False
        for _ in range(40):
            m, rep = overlap_model(rng)
            exp = expand(m, "D", rep)
            dist = expanded_distribution(m, exp)
            if dist.restrict({"D": 0}).mass() == 0:
                continue
            if not conditional_independent(dist, "E1", "A", (), {"D": 0}):
                found = True
                break
        assert found

    def test_random_representations_stratum_soundness(self):
        # every true stratum verdict on randomly parameterized canonical
        # expansions is confirmed exactly by the oracle, in both strata
        rng = random.Random(31337)
        checked = 0
        seed = 0
        while checked < 60:
            seed += 1
            k = rng.randint(1, 5)
            rows = tuple(rng.sample(range(16), k))
            weights = [rng.randint(1, 4) for _ in rows]
            total = sum(weights)
            table = ResponseTable("D", ("E1", "E2"), rows,
                                  tuple(Fraction(w, total) for w in weights))
            g = Dag(["E1", "E2", "D"], [("E1", "D"), ("E2", "D")])
            m = Scm(g, {"E1": ResponseTable.bernoulli("E1", random_fraction(rng)),
                        "E2": ResponseTable.bernoulli("E2", random_fraction(rng)),
                        "D": table})
            rep = canonical_representation(table)
            if not rep.terms:
                continue
            exp = expand(m, "D", rep)
            dist = expanded_distribution(m, exp)
            queryable = [n for n in exp.dag.nodes if n != "D"]
            for stratum in (0, 1):
                if dist.restrict({"D": stratum}).mass() == 0:
                    continue
                for i, x in enumerate(queryable):
                    for y in queryable[i + 1:]:
                        cond = stratum_conditioning_set(exp, stratum)
                        if x in cond or y in cond:
                            continue
                        if stratum_independent(exp, x, y, (), stratum):
                            assert conditional_independent(
                                dist, x, y, (), {"D": stratum}), (rows, x, y, stratum)
            checked += 1

    def test_cocauses_independent_of_parents(self):
        # co-cause indicators are functions of the target's response term only
        rng = random.Random(808)
        for seed in range(30):
            k = rng.randint(1, 6)
            rows = tuple(rng.sample(range(16), k))
            weights = [rng.randint(1, 5) for _ in rows]
            total = sum(weights)
            table = ResponseTable("D", ("E1", "E2"), rows,
                                  tuple(Fraction(w, total) for w in weights))
            g = Dag(["E1", "E2", "D"], [("E1", "D"), ("E2", "D")])
            m = Scm(g, {"E1": ResponseTable.bernoulli("E1", random_fraction(rng)),
                        "E2": ResponseTable.bernoulli("E2", random_fraction(rng)),
                        "D": table})
            rep = canonical_representation(table)
            if not rep.terms:
                continue
            exp = expand(m, "D", rep)
            dist = expanded_distribution(m, exp)
            for a in exp.cocause_nodes:
                for parent in ("E1", "E2"):
                    assert conditional_independent(dist, a, parent)
