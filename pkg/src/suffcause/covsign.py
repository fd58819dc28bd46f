"""Sign inference for conditional covariances.

The core rule set covers a binary node D with exactly two positively
monotone parents and a representation D = A0 v A1*E1 v A2*E2 v A3*E1*E2:
knowing which co-causes are degenerate (identically zero or one), which
pieces are independent, and the sign of the marginal Cov(E1, E2) yields
stratum-specific sign conclusions for Cov(E1, E2 | D). Transfer rules then
push such a conclusion outward to proxies F and G of the two parents when
the graph separates them strongly enough. Every emitted conclusion carries
its full premise list and is designed to be re-checked by the exact oracle.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from . import oracle
from .causes import CoCauseKind, canonical_representation
from .graph import Dag, common_causes, d_separated, directed_paths
from .scm import (
    DEFAULT_WORLD_BUDGET,
    ResponseTable,
    Scm,
    complement_parent,
    dedupe_states,
    joint_distribution,
)
from .signs import Sign, detect_monotonic_effect, monotonically_associated, sign_along


class Flag(Enum):
    ZERO = "zero"
    ONE = "one"
    NEITHER = "neither"


class CovFact(Enum):
    LE0 = "<=0"
    GE0 = ">=0"
    EQ0 = "=0"
    UNKNOWN = "unknown"

    def allows_le0(self) -> bool:
        return self in (CovFact.LE0, CovFact.EQ0)

    def allows_ge0(self) -> bool:
        return self in (CovFact.GE0, CovFact.EQ0)

    def flipped(self) -> "CovFact":
        if self is CovFact.LE0:
            return CovFact.GE0
        if self is CovFact.GE0:
            return CovFact.LE0
        return self


class Relation(Enum):
    LE0 = "<=0"
    GE0 = ">=0"
    EQ0 = "=0"
    SIGN_EQUALS = "sign-equals"

    def flipped(self) -> "Relation":
        if self is Relation.LE0:
            return Relation.GE0
        if self is Relation.GE0:
            return Relation.LE0
        return self


@dataclass(frozen=True)
class CovQuantity:
    """A conditional covariance: Cov(x, y | given=stratum, extra)."""

    x: str
    y: str
    given: str
    stratum: int
    extra: tuple[tuple[str, int], ...] = ()

    def render(self) -> str:
        cond = [f"{self.given}={self.stratum}"] + [f"{k}={v}" for k, v in self.extra]
        return f"Cov({self.x},{self.y} | {','.join(cond)})"


@dataclass(frozen=True)
class SignConclusion:
    """One emitted claim with its rule identifier and premise provenance."""

    quantity: CovQuantity
    relation: Relation
    rule: str
    premises: tuple[str, ...]
    other: CovQuantity | None = None

    def render(self) -> str:
        if self.relation is Relation.SIGN_EQUALS:
            assert self.other is not None
            return f"sign({self.quantity.render()}) = sign({self.other.render()})"
        return f"{self.quantity.render()} {self.relation.value}"


@dataclass(frozen=True)
class RepFacts:
    """Established facts about a two-parent representation of ``target``.

    Boolean fields mean "established", not merely "not known false"; the
    ``sources`` map records how each fact was established (oracle,
    structural, or assertion).
    """

    target: str
    e1: str
    e2: str
    a0: Flag = Flag.NEITHER
    a1: Flag = Flag.NEITHER
    a2: Flag = Flag.NEITHER
    a3: Flag = Flag.NEITHER
    e_indep: bool = False
    a1_a2_indep: bool = False
    a0_a1_indep: bool = False
    a0_a2_indep: bool = False
    e_cov: CovFact = CovFact.UNKNOWN
    sources: Mapping[str, str] = field(default_factory=dict)

    def source(self, fact: str) -> str:
        return self.sources.get(fact, "assertion")

    def describe(self, fact: str, value: str) -> str:
        return f"{fact}={value} ({self.source(fact)})"


def cocause_state_sets(
    table: ResponseTable, e1: str, e2: str
) -> dict[str, frozenset[int] | None]:
    """Canonical co-cause state sets keyed a0..a3; None encodes "all states".

    The table must have exactly the parents {e1, e2} and a representation
    free of complemented literals (guaranteed under positive monotonicity).
    """
    if set(table.parents) != {e1, e2} or len(table.parents) != 2:
        raise ValueError(
            f"{table.node}: expected exactly the parents {{{e1}, {e2}}}, got {table.parents}"
        )
    rep = canonical_representation(table)
    slots: dict[str, frozenset[int] | None] = {
        "a0": frozenset(), "a1": frozenset(), "a2": frozenset(), "a3": frozenset()
    }
    key_for = {
        frozenset(): "a0",
        frozenset({e1}): "a1",
        frozenset({e2}): "a2",
        frozenset({e1, e2}): "a3",
    }
    for term in rep.terms:
        if any(l.complemented for l in term.literals):
            raise ValueError(
                f"{table.node}: canonical term {term.render()} uses a complement; "
                "the two-parent rule set needs positive monotone effects"
            )
        key = key_for[frozenset(l.base for l in term.literals)]
        if term.cocause.kind is CoCauseKind.ONE:
            slots[key] = None
        else:
            slots[key] = frozenset(term.cocause.states)
    return slots


def _flag(states: frozenset[int] | None) -> Flag:
    if states is None:
        return Flag.ONE
    if not states:
        return Flag.ZERO
    return Flag.NEITHER


def _sets_independent(
    a: frozenset[int] | None, b: frozenset[int] | None, probs: Sequence[Fraction]
) -> bool:
    universe = frozenset(range(len(probs)))
    sa = universe if a is None else a
    sb = universe if b is None else b
    pa = sum((probs[i] for i in sa), Fraction(0))
    pb = sum((probs[i] for i in sb), Fraction(0))
    pab = sum((probs[i] for i in sa & sb), Fraction(0))
    return pab == pa * pb


def facts_from_scm(
    model: Scm,
    d: str,
    e1: str,
    e2: str,
    negative: tuple[bool, bool] = (False, False),
    budget: int = DEFAULT_WORLD_BUDGET,
) -> RepFacts:
    """Establish representation facts exactly from a fully specified model.

    ``negative`` marks parents whose monotone effect is negative; the facts
    are then computed in the frame where those parents are complemented, and
    conclusions drawn from them must be flipped back accordingly (see
    ``pair_conclusions_signed``).
    """
    parents = model.graph.parents(d)
    if set(parents) != {e1, e2} or len(parents) != 2:
        raise ValueError(
            f"{d} must have exactly the parents {{{e1}, {e2}}} (marginalize other parents first); "
            f"got {parents}"
        )
    table = dedupe_states(model.tables[d])
    for (p, neg) in zip((e1, e2), negative):
        if neg:
            table = complement_parent(table, p)
    for p in (e1, e2):
        if detect_monotonic_effect(table, p) is not Sign.POSITIVE:
            raise ValueError(
                f"{d}: parent {p} lacks the required positive monotone effect"
                f"{' after complementing' if negative[(e1, e2).index(p)] else ''}"
            )

    slots = cocause_state_sets(table, e1, e2)
    probs = table.probs
    dist = joint_distribution(model, budget)
    cov = oracle.conditional_covariance(dist, e1, e2)
    if sum(negative) % 2 == 1:
        cov = -cov
    e_cov = CovFact.EQ0 if cov == 0 else (CovFact.LE0 if cov < 0 else CovFact.GE0)
    facts = RepFacts(
        target=d,
        e1=e1,
        e2=e2,
        a0=_flag(slots["a0"]),
        a1=_flag(slots["a1"]),
        a2=_flag(slots["a2"]),
        a3=_flag(slots["a3"]),
        e_indep=oracle.conditional_independent(dist, e1, e2),
        a1_a2_indep=_sets_independent(slots["a1"], slots["a2"], probs),
        a0_a1_indep=_sets_independent(slots["a0"], slots["a1"], probs),
        a0_a2_indep=_sets_independent(slots["a0"], slots["a2"], probs),
        e_cov=e_cov,
        sources={k: "oracle" for k in (
            "a0", "a1", "a2", "a3", "e_indep", "a1_a2_indep", "a0_a1_indep", "a0_a2_indep", "e_cov"
        )},
    )
    return facts


def pair_conclusions(facts: RepFacts) -> tuple[SignConclusion, ...]:
    """All stratum sign conclusions licensed by the established facts.

    Cases whose side conditions are not established are suppressed, never
    guessed. Both parents are assumed positively monotone (the facts
    builders enforce this).
    """
    d1 = CovQuantity(facts.e1, facts.e2, facts.target, 1)
    d0 = CovQuantity(facts.e1, facts.e2, facts.target, 0)
    monotone = (
        f"monotone({facts.e1})=+",
        f"monotone({facts.e2})=+",
    )
    out: list[SignConclusion] = []

    def emit(quantity: CovQuantity, relation: Relation, rule: str, *premises: str) -> None:
        out.append(SignConclusion(quantity, relation, rule, monotone + premises))

    if facts.a0 is Flag.ZERO:
        emit(d1, Relation.LE0, "no_background_d1", facts.describe("a0", "zero"))
        if facts.a1_a2_indep and facts.e_indep:
            emit(
                d0, Relation.LE0, "no_background_d0",
                facts.describe("a0", "zero"),
                facts.describe("a1_a2_indep", "true"),
                facts.describe("e_indep", "true"),
            )
    if facts.a1 is Flag.ONE or facts.a2 is Flag.ONE:
        which = "a1" if facts.a1 is Flag.ONE else "a2"
        if facts.e_cov.allows_le0():
            emit(
                d1, Relation.LE0, "lone_cause_certain_d1",
                facts.describe(which, "one"), facts.describe("e_cov", facts.e_cov.value),
            )
        emit(d0, Relation.EQ0, "lone_cause_certain_d0", facts.describe(which, "one"))
    if facts.a1 is Flag.ZERO or facts.a2 is Flag.ZERO:
        which = "a1" if facts.a1 is Flag.ZERO else "a2"
        if facts.e_cov.allows_ge0():
            emit(
                d1, Relation.GE0, "lone_cause_absent_d1",
                facts.describe(which, "zero"), facts.describe("e_cov", facts.e_cov.value),
            )
            # The zero-stratum claim needs independent parents: with a
            # positively correlated pair and the lone-cause slot empty, the
            # zero stratum can keep a strictly positive covariance (see the
            # frozen counterexample in the tests).
            if facts.e_indep:
                emit(
                    d0, Relation.LE0, "lone_cause_absent_d0",
                    facts.describe(which, "zero"),
                    facts.describe("e_indep", "true"),
                    facts.describe("e_cov", facts.e_cov.value),
                )
    if facts.a3 is Flag.ZERO:
        if facts.e_cov.allows_le0():
            emit(
                d1, Relation.LE0, "no_synergy_d1",
                facts.describe("a3", "zero"), facts.describe("e_cov", facts.e_cov.value),
            )
        if facts.a1_a2_indep and facts.e_indep and (facts.a0_a1_indep or facts.a0_a2_indep):
            which = "a0_a1_indep" if facts.a0_a1_indep else "a0_a2_indep"
            emit(
                d0, Relation.EQ0, "no_synergy_d0",
                facts.describe("a3", "zero"),
                facts.describe("a1_a2_indep", "true"),
                facts.describe("e_indep", "true"),
                facts.describe(which, "true"),
            )
    return tuple(out)


def pair_conclusions_signed(
    facts: RepFacts, negative: tuple[bool, bool] = (False, False)
) -> tuple[SignConclusion, ...]:
    """Rule set extended to negatively monotone parents by relabeling.

    ``facts`` must describe the representation in the complemented frame
    (every negative parent replaced by its complement); each conclusion's
    relation is flipped once per complemented parent to speak about the
    original variables again.
    """
    base = pair_conclusions(facts)
    flips = sum(negative) % 2
    if flips == 0 and not any(negative):
        return base
    note = f"polarity=({'-' if negative[0] else '+'},{'-' if negative[1] else '+'})"
    out = []
    for c in base:
        relation = c.relation.flipped() if flips else c.relation
        out.append(replace(c, relation=relation, premises=c.premises + (note,)))
    return tuple(out)


@dataclass(frozen=True)
class PremiseCheck:
    name: str
    holds: bool
    source: str = "structural"
    detail: str = ""


@dataclass(frozen=True)
class TransferPremises:
    """Premise report for transferring a parent-pair conclusion to proxies."""

    rule: str
    f: str
    g: str
    e1: str
    e2: str
    d: str
    q: tuple[str, ...]
    checks: tuple[PremiseCheck, ...]
    q_same_sign: bool = True
    q_opposite_sign: bool = True

    @property
    def satisfied(self) -> bool:
        return all(c.holds for c in self.checks)

    def failures(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.checks if not c.holds)


def _cov_nonneg_check(
    g: Dag, a: str, b: str, name: str, asserted: CovFact | None
) -> PremiseCheck:
    sign = monotonically_associated(g, a, b)
    if sign in (Sign.POSITIVE, Sign.ZERO):
        return PremiseCheck(name, True, "structural", f"association {sign.value}")
    if asserted is not None and asserted.allows_ge0():
        return PremiseCheck(name, True, "assertion", f"asserted {asserted.value}")
    return PremiseCheck(name, False, "structural", f"association {sign.value}")


def check_transfer_premises_direct(
    graph: Dag,
    f: str,
    g: str,
    e1: str,
    e2: str,
    d: str,
    cov_f_e1: CovFact | None = None,
    cov_g_e2: CovFact | None = None,
) -> TransferPremises:
    """Premises for the direct transfer: sign(Cov(F,G|D)) = sign(Cov(E1,E2|D)).

    Needs F and G separated given {E1, E2, D}, each proxy separated from the
    other side given its own parent, and nonnegative marginal covariance of
    each proxy with its parent (established structurally or by assertion).
    """
    graph.require(f, g, e1, e2, d)
    if e1 not in graph.parents(d) or e2 not in graph.parents(d):
        raise ValueError(f"{e1} and {e2} must be parents of {d}")
    checks = (
        PremiseCheck("f_g_separated", d_separated(graph, f, g, {e1, e2, d})),
        PremiseCheck("f_separated_from_e2_d", d_separated(graph, f, {e2, d}, {e1})),
        PremiseCheck("g_separated_from_e1_d", d_separated(graph, g, {e1, d}, {e2})),
        _cov_nonneg_check(graph, f, e1, "cov_f_e1_nonneg", cov_f_e1),
        _cov_nonneg_check(graph, g, e2, "cov_g_e2_nonneg", cov_g_e2),
    )
    return TransferPremises("proxy-direct", f, g, e1, e2, d, (), checks)


def _q_structurally_independent(graph: Dag, q: Sequence[str]) -> bool:
    for i in range(len(q)):
        for j in range(i + 1, len(q)):
            a, b = q[i], q[j]
            if a in graph.ancestors(b) or b in graph.ancestors(a):
                return False
            if graph.ancestors(a) & graph.ancestors(b):
                return False
    return True


def _q_path_sign_flags(graph: Dag, q: Sequence[str], f: str, g: str) -> tuple[bool, bool]:
    same_ok = True
    opposite_ok = True
    for qi in q:
        to_f = {sign_along(graph, p) for p in directed_paths(graph, qi, f)}
        to_g = {sign_along(graph, p) for p in directed_paths(graph, qi, g)}
        if Sign.UNDEFINED in to_f | to_g:
            return (False, False)
        if not to_f or not to_g:
            continue
        single = len(to_f) == 1 and len(to_g) == 1
        same_ok = same_ok and single and to_f == to_g
        opposite_ok = opposite_ok and single and (next(iter(to_f)) * next(iter(to_g)) is Sign.NEGATIVE)
    return (same_ok, opposite_ok)


def expectation_monotone_premise(
    graph: Dag, f: str, e: str, d: str, q: Iterable[str] = ()
) -> tuple[bool, str]:
    """Sufficient structural conditions for E[f | e, d, q] nondecreasing in e.

    Route one: f is separated from d given q plus e, and f is positively
    monotonically associated with e. Route two: f descends from both e and
    d, shares no common cause with e, and every directed path from e to f
    that avoids d is positive.
    """
    qs = tuple(q)
    graph.require(f, e, d, *qs)
    if f == e:
        return (True, "identity")
    if f != d and f not in set(qs) and d_separated(graph, f, d, set(qs) | {e}):
        if monotonically_associated(graph, f, e) in (Sign.POSITIVE, Sign.ZERO):
            return (True, "separated-and-associated")
    if f in graph.descendants(e) and f in graph.descendants(d) and not common_causes(graph, f, e):
        signs = {sign_along(graph, p) for p in directed_paths(graph, e, f, avoid=(d,))}
        if signs <= {Sign.POSITIVE}:
            return (True, "positive-paths-outside-target")
    return (False, "")


def check_transfer_premises_shared(
    graph: Dag,
    f: str,
    g: str,
    e1: str,
    e2: str,
    d: str,
    q: Iterable[str] = (),
) -> TransferPremises:
    """Premises for the transfer that tolerates shared causes of the proxies.

    ``q`` collects the declared common causes of F and G; they must be
    mutually structurally independent (no edges, no shared ancestors),
    separated from the parent pair given D and from D marginally. Direction
    of the transferred sign is gated by whether each q member's directed
    paths to F and to G agree or oppose in sign.
    """
    qs = tuple(q)
    graph.require(f, g, e1, e2, d, *qs)
    if e1 not in graph.parents(d) or e2 not in graph.parents(d):
        raise ValueError(f"{e1} and {e2} must be parents of {d}")
    cond = set(qs) | {d}
    mono_f, route_f = expectation_monotone_premise(graph, f, e1, d, qs)
    mono_g, route_g = expectation_monotone_premise(graph, g, e2, d, qs)
    checks = (
        PremiseCheck("f_g_separated_given_q", d_separated(graph, f, g, {e1, e2} | cond)),
        PremiseCheck("f_separated_from_e2", d_separated(graph, f, e2, {e1} | cond)),
        PremiseCheck("g_separated_from_e1", d_separated(graph, g, e1, {e2} | cond)),
        PremiseCheck("q_separated_from_pair", d_separated(graph, qs, {e1, e2}, {d})),
        PremiseCheck("q_separated_from_target", d_separated(graph, qs, d)),
        PremiseCheck("q_mutually_independent", _q_structurally_independent(graph, qs)),
        PremiseCheck("f_expectation_monotone", mono_f, "structural", route_f),
        PremiseCheck("g_expectation_monotone", mono_g, "structural", route_g),
    )
    same_ok, opposite_ok = _q_path_sign_flags(graph, qs, f, g)
    return TransferPremises("proxy-shared", f, g, e1, e2, d, qs, checks, same_ok, opposite_ok)


def transfer_sign(premises: TransferPremises, inner: SignConclusion) -> tuple[SignConclusion, ...]:
    """Push a parent-pair conclusion out to the proxies.

    The direct rule yields sign equality plus the inner relation verbatim;
    the shared-cause rule transfers ">=0" under sign-agreeing q paths and
    "<=0" under sign-opposing ones. Raises unless every premise holds.
    """
    if not premises.satisfied:
        raise ValueError(f"transfer premises not verified: {', '.join(premises.failures())}")
    iq = inner.quantity
    if {iq.x, iq.y} != {premises.e1, premises.e2} or iq.given != premises.d:
        raise ValueError(
            f"inner conclusion {iq.render()} does not describe the parent pair "
            f"({premises.e1}, {premises.e2}) given {premises.d}"
        )
    if inner.relation is Relation.SIGN_EQUALS:
        raise ValueError("inner conclusion must be a resolved relation, not a sign equality")
    outer = CovQuantity(premises.f, premises.g, premises.d, iq.stratum, iq.extra)
    prem = tuple(c.name for c in premises.checks) + (f"inner:{inner.rule}:{inner.relation.value}",)

    if premises.rule == "proxy-direct":
        return (
            SignConclusion(outer, Relation.SIGN_EQUALS, "proxy-direct", prem, other=iq),
            SignConclusion(outer, inner.relation, f"proxy-direct+{inner.rule}", prem, other=iq),
        )

    prem = prem + (
        f"q_same_sign={str(premises.q_same_sign).lower()}",
        f"q_opposite_sign={str(premises.q_opposite_sign).lower()}",
    )
    if inner.relation is Relation.GE0 and premises.q_same_sign:
        return (SignConclusion(outer, Relation.GE0, f"proxy-shared+{inner.rule}", prem, other=iq),)
    if inner.relation is Relation.LE0 and premises.q_opposite_sign:
        return (SignConclusion(outer, Relation.LE0, f"proxy-shared+{inner.rule}", prem, other=iq),)
    if inner.relation is Relation.EQ0:
        if premises.q_same_sign and premises.q_opposite_sign:
            return (SignConclusion(outer, Relation.EQ0, f"proxy-shared+{inner.rule}", prem, other=iq),)
        if premises.q_same_sign:
            return (SignConclusion(outer, Relation.GE0, f"proxy-shared+{inner.rule}", prem, other=iq),)
        if premises.q_opposite_sign:
            return (SignConclusion(outer, Relation.LE0, f"proxy-shared+{inner.rule}", prem, other=iq),)
    raise ValueError(
        f"no transferable direction: inner {inner.relation.value} with "
        f"q_same_sign={premises.q_same_sign}, q_opposite_sign={premises.q_opposite_sign}"
    )
