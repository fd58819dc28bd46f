"""Model-file parsing, validation diagnostics, and canonical round trips."""

from fractions import Fraction

import pytest

from suffcause import ModelError, load_model, parse_model, serialize_model

from support import FIXTURES, fixture

MINIMAL = """
node A
node B
edge A B
"""


class TestParsing:
    def test_minimal_two_node_model(self):
        m = parse_model(MINIMAL)
        assert m.dag.nodes == ("A", "B")
        assert m.dag.edges == (("A", "B"),)
        assert not m.fully_specified

    def test_comments_and_blank_lines(self):
        m = parse_model("# heading\nnode A\n\nnode B # trailing\nedge A B +\n")
        assert m.dag.signs == {("A", "B"): "+"}

    def test_equation_parsing(self):
        text = MINIMAL + "equation B states 2\nstate 0 prob 1/3 bits 01\nstate 1 prob 2/3 bits 11\n"
        m = parse_model(text)
        t = m.tables["B"]
        assert t.rows == (2, 3)
        assert t.probs == (Fraction(1, 3), Fraction(2, 3))

    def test_representation_parsing(self):
        text = (MINIMAL
                + "equation B states 1\nstate 0 prob 1 bits 01\n"
                + "represent B term one A\n")
        m = parse_model(text)
        assert m.representations["B"].terms[0].render() == "A"


class TestDiagnostics:
    def assert_problem(self, text, needle):
        with pytest.raises(ModelError) as exc:
            parse_model(text)
        assert needle in str(exc.value)

    def test_bad_probability_sum_names_the_node(self):
        text = MINIMAL + "equation B states 2\nstate 0 prob 1/2 bits 01\nstate 1 prob 5/8 bits 11\n"
        self.assert_problem(text, "B: state probabilities sum to 9/8")

    def test_wrong_bit_width(self):
        self.assert_problem(MINIMAL + "equation B states 1\nstate 0 prob 1 bits 0111\n",
                            "needs 2 bits")

    def test_state_index_out_of_order(self):
        text = MINIMAL + "equation B states 2\nstate 1 prob 1/2 bits 01\nstate 0 prob 1/2 bits 11\n"
        self.assert_problem(text, "out of order")

    def test_unknown_directive_and_line_numbers(self):
        with pytest.raises(ModelError) as exc:
            parse_model("node A\nfrobnicate B\n")
        assert exc.value.problems[0][0] == 2

    def test_cycle_reported(self):
        self.assert_problem("node A\nnode B\nedge A B\nedge B A\n", "cycle")

    def test_sign_contradicting_equation(self):
        text = "node A\nnode B\nedge A B -\nequation B states 1\nstate 0 prob 1 bits 01\n"
        self.assert_problem(text, "contradicts")

    def test_foreign_representation_literal(self):
        text = (MINIMAL
                + "equation B states 1\nstate 0 prob 1 bits 01\n"
                + "represent B term one C\n")
        self.assert_problem(text, "not a parent")

    def test_nondeterminative_representation(self):
        text = ("node A\nnode B\nnode D\nedge A D\nedge B D\n"
                + "equation D states 1\nstate 0 prob 1 bits 0111\n"
                + "represent D term one A B\n")
        self.assert_problem(text, "not determinative")

    def test_bad_assertions(self):
        self.assert_problem(MINIMAL + "assert cov-sign A B ~0\n", "bad relation")
        self.assert_problem(MINIMAL + "assert no-synergism A B\n", "expects 3")
        self.assert_problem(MINIMAL + "assert independent A Z\n", "unknown node")

    def test_multiple_problems_collected(self):
        with pytest.raises(ModelError) as exc:
            parse_model("node A\nnode A\nfrobnicate\n")
        assert len(exc.value.problems) >= 2


class TestRoundTrip:
    def test_fixture_round_trips(self):
        for path in sorted(FIXTURES.glob("*.model")):
            text = path.read_text()
            m = parse_model(text)
            again = serialize_model(m)
            assert parse_model(again) == m
            assert serialize_model(parse_model(again)) == again

    def test_fixtures_parse_expected_shapes(self):
        null = load_model(fixture("coaggregation_null"))
        assert all(s == "+" for s in null.dag.signs.values())
        assert len(null.dag.signs) == len(null.dag.edges)
        assert {a.kind for a in null.assertions} == {"no-synergism"}

        pairs = load_model(fixture("pairs_disjoint"))
        assert pairs.fully_specified
        assert pairs.representations["D"].render() == "E1*E2 v E3*E4"
