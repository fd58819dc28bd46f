"""Sufficient-cause algebra over response tables and over plain events.

A conjunction pairs parent literals with an optional co-cause: an event on
the exogenous response states that completes the literals into a sufficient
cause. Sufficiency, minimality, determinativeness and nonredundancy are all
decided by exact indicator-set comparisons; the indicator sets are packed
into Python integers (one bit per (state, parent-configuration) atom).

A second, lighter surface works on named boolean events given as truth-table
bitmasks. It covers questions about derived events (an event defined as a
function of other events) that cannot be phrased as parent literals of a
response table.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations, product
from typing import Iterable, Mapping, Sequence

from .scm import ResponseTable


class CoCauseKind(Enum):
    ONE = "one"
    ZERO = "zero"
    STATES = "states"


@dataclass(frozen=True)
class CoCause:
    """Event on the response states that completes a conjunction.

    ``ONE`` places no restriction, ``ZERO`` is the impossible event, and
    ``STATES`` is the disjunction of the listed state indices.
    """

    kind: CoCauseKind
    states: tuple[int, ...] = ()

    def __post_init__(self):
        if self.kind is CoCauseKind.STATES:
            if not self.states:
                raise ValueError("a state-disjunction co-cause needs at least one state")
            ordered = tuple(sorted(set(self.states)))
            object.__setattr__(self, "states", ordered)
        elif self.states:
            raise ValueError(f"{self.kind.value} co-cause cannot carry states")

    @classmethod
    def one(cls) -> "CoCause":
        return cls(CoCauseKind.ONE)

    @classmethod
    def zero(cls) -> "CoCause":
        return cls(CoCauseKind.ZERO)

    @classmethod
    def of_states(cls, states: Iterable[int], n_states: int | None = None) -> "CoCause":
        """Build a state disjunction, normalizing full/empty sets when N is known."""
        ordered = tuple(sorted(set(states)))
        if n_states is not None:
            if any(not 0 <= s < n_states for s in ordered):
                raise ValueError(f"state indices {ordered} out of range for {n_states} states")
            if len(ordered) == n_states:
                return cls.one()
            if not ordered:
                return cls.zero()
        return cls(CoCauseKind.STATES, ordered)

    def render(self) -> str:
        if self.kind is CoCauseKind.ONE:
            return ""
        if self.kind is CoCauseKind.ZERO:
            return "{}"
        return "{" + ",".join(str(s) for s in self.states) + "}"


@dataclass(frozen=True, order=True)
class Literal:
    """A parent or its complement."""

    base: str
    complemented: bool = False

    def render(self) -> str:
        return ("~" + self.base) if self.complemented else self.base

    @classmethod
    def parse(cls, text: str) -> "Literal":
        if text.startswith("~"):
            return cls(text[1:], True)
        return cls(text)


@dataclass(frozen=True)
class Conjunction:
    """A product of parent literals and one co-cause.

    Literals are kept sorted by name; a parent may appear at most once and
    never with both polarities.
    """

    literals: tuple[Literal, ...] = ()
    cocause: CoCause = field(default_factory=CoCause.one)

    def __post_init__(self):
        ordered = tuple(sorted(self.literals))
        bases = [l.base for l in ordered]
        if len(set(bases)) != len(bases):
            raise ValueError(f"conjunction repeats a parent: {bases}")
        object.__setattr__(self, "literals", ordered)

    def bases(self) -> tuple[str, ...]:
        return tuple(l.base for l in self.literals)

    def render(self) -> str:
        head = self.cocause.render()
        body = "*".join(l.render() for l in self.literals)
        if head and body:
            return f"{head}*{body}"
        if head:
            return head
        return body if body else "TRUE"


def conj(*literals: str | Literal, states: Iterable[int] | None = None) -> Conjunction:
    """Convenience constructor: ``conj("E1", "~E2", states=(0, 2))``."""
    lits = tuple(l if isinstance(l, Literal) else Literal.parse(l) for l in literals)
    cocause = CoCause.one() if states is None else CoCause(CoCauseKind.STATES, tuple(states))
    return Conjunction(lits, cocause)


@dataclass(frozen=True)
class Representation:
    """A determinative list of (co-cause, conjunction) terms for one node."""

    target: str
    terms: tuple[Conjunction, ...]

    def render(self) -> str:
        if not self.terms:
            return "FALSE"
        return " v ".join(t.render() for t in self.terms)


# -- indicator masks over (state, configuration) atoms -----------------------

def _literal_config_mask(table: ResponseTable, literals: Sequence[Literal]) -> int:
    """Bitmask over parent configurations satisfying every literal."""
    mask = 0
    for c in range(table.n_configs):
        ok = True
        for lit in literals:
            bit = (c >> table.parent_index(lit.base)) & 1
            if bit == (1 if lit.complemented else 0):
                ok = False
                break
        if ok:
            mask |= 1 << c
    return mask


def _table_mask(table: ResponseTable) -> int:
    """Indicator of output 1, one block of configurations per state."""
    mask = 0
    for j, row in enumerate(table.rows):
        mask |= row << (j * table.n_configs)
    return mask


def _conjunction_mask(table: ResponseTable, c: Conjunction) -> int:
    for lit in c.literals:
        table.parent_index(lit.base)  # raises on a foreign literal
    config_mask = _literal_config_mask(table, c.literals)
    if c.cocause.kind is CoCauseKind.ZERO:
        return 0
    if c.cocause.kind is CoCauseKind.ONE:
        states: Iterable[int] = range(table.n_states)
    else:
        for s in c.cocause.states:
            if not 0 <= s < table.n_states:
                raise ValueError(f"co-cause state {s} out of range for {table.n_states} states")
        states = c.cocause.states
    mask = 0
    for j in states:
        mask |= config_mask << (j * table.n_configs)
    return mask


def _covers(target: int, mask: int) -> bool:
    return mask & target == mask


def _single_drops(c: Conjunction) -> list[Conjunction]:
    """Conjunctions obtained by removing one literal or the state restriction."""
    out = []
    if c.cocause.kind is CoCauseKind.STATES:
        out.append(Conjunction(c.literals, CoCause.one()))
    for i in range(len(c.literals)):
        out.append(Conjunction(c.literals[:i] + c.literals[i + 1:], c.cocause))
    return out


def is_sufficient(table: ResponseTable, c: Conjunction) -> bool:
    """Every (state, configuration) satisfying the conjunction outputs 1."""
    return _covers(_table_mask(table), _conjunction_mask(table, c))


def is_minimal_sufficient(table: ResponseTable, c: Conjunction) -> bool:
    """Sufficient, and no single-element weakening stays sufficient.

    Dropping conjuncts only grows the satisfying set, so checking single
    drops decides minimality over all proper sub-conjunctions.
    """
    target = _table_mask(table)
    if not _covers(target, _conjunction_mask(table, c)):
        return False
    for weaker in _single_drops(c):
        if _covers(target, _conjunction_mask(table, weaker)):
            return False
    return True


def is_determinative(table: ResponseTable, terms: Sequence[Conjunction]) -> bool:
    """The node is 1 exactly when some term is 1, over all states and configs."""
    union = 0
    for t in terms:
        union |= _conjunction_mask(table, t)
    return union == _table_mask(table)


def is_nonredundant(table: ResponseTable, terms: Sequence[Conjunction]) -> bool:
    """No single term can be dropped while staying determinative."""
    if not is_determinative(table, terms):
        raise ValueError("term list is not determinative")
    masks = [_conjunction_mask(table, t) for t in terms]
    target = _table_mask(table)
    for i in range(len(masks)):
        union = 0
        for j, m in enumerate(masks):
            if j != i:
                union |= m
        if union == target:
            return False
    return True


def _canonical_term_key(table: ResponseTable, c: Conjunction) -> tuple:
    lits = tuple(sorted((table.parent_index(l.base), l.complemented) for l in c.literals))
    return (len(lits), lits, c.cocause.states)


def reduce_to_minimal(table: ResponseTable, c: Conjunction) -> Conjunction:
    """Drop unnecessary conjuncts until the conjunction is minimal sufficient.

    Drops are attempted from the back of the canonical order (the state
    restriction first, then literals from the highest parent index down), so
    earlier literals are preferred when several reductions exist.
    """
    target = _table_mask(table)
    if not _covers(target, _conjunction_mask(table, c)):
        raise ValueError("conjunction is not sufficient")
    current = c
    if current.cocause.kind is CoCauseKind.STATES:
        weaker = Conjunction(current.literals, CoCause.one())
        if _covers(target, _conjunction_mask(table, weaker)):
            current = weaker
    lits = sorted(current.literals, key=lambda l: table.parent_index(l.base))
    for lit in reversed(lits):
        trial = Conjunction(tuple(l for l in current.literals if l != lit), current.cocause)
        if _covers(target, _conjunction_mask(table, trial)):
            current = trial
    return current


def reduce_to_nonredundant(
    table: ResponseTable, terms: Sequence[Conjunction]
) -> list[Conjunction]:
    """Drop redundant terms until no single term can be removed.

    Candidates are tried from the back of the canonical term order; the
    survivors keep their input order.
    """
    terms = list(terms)
    if not is_determinative(table, terms):
        raise ValueError("term list is not determinative")
    target = _table_mask(table)
    masks = {id(t): _conjunction_mask(table, t) for t in terms}
    kept = list(terms)
    for t in sorted(terms, key=lambda t: _canonical_term_key(table, t), reverse=True):
        union = 0
        for other in kept:
            if other is not t:
                union |= masks[id(other)]
        if union == target:
            kept = [k for k in kept if k is not t]
    return kept


def canonical_representation(table: ResponseTable) -> Representation:
    """The co-cause construction: for every conjunction of parent literals,
    attach the disjunction of response states completing it into a minimal
    sufficient cause.

    A conjunction that is minimal sufficient on its own gets the
    unrestricted co-cause; a conjunction no state can complete is omitted.
    The input table must already have distinct rows (see ``dedupe_states``).
    """
    if len(set(table.rows)) != len(table.rows):
        raise ValueError("canonical_representation needs deduplicated states; call dedupe_states first")

    terms: list[Conjunction] = []
    for polarity in product((None, False, True), repeat=table.n_parents):
        literals = tuple(
            Literal(p, comp)
            for p, comp in zip(table.parents, polarity)
            if comp is not None
        )
        bare = Conjunction(literals, CoCause.one())
        if is_minimal_sufficient(table, bare):
            terms.append(bare)
            continue
        states = [
            j for j in range(table.n_states)
            if is_minimal_sufficient(table, Conjunction(literals, CoCause.of_states((j,))))
        ]
        if states:
            terms.append(Conjunction(literals, CoCause.of_states(states, table.n_states)))
    terms.sort(key=lambda t: _canonical_term_key(table, t))
    return Representation(table.node, tuple(terms))


def validate_representation(table: ResponseTable, rep: Representation) -> None:
    """Raise unless the representation is determinative for the table."""
    if rep.target != table.node:
        raise ValueError(f"representation targets {rep.target!r}, table is for {table.node!r}")
    if not is_determinative(table, rep.terms):
        raise ValueError(f"representation for {table.node!r} is not determinative")


# -- boolean events over a finite base --------------------------------------

class EventSpace:
    """Named boolean events as truth-table bitmasks over free base events.

    Bit ``a`` of a mask is the event's value on the base assignment whose
    i-th bit is the value of the i-th base event. Masks combine with the
    ordinary integer operators ``&``, ``|`` and :meth:`invert`.
    """

    def __init__(self, *base: str):
        if not base:
            raise ValueError("an event space needs at least one base event")
        if len(set(base)) != len(base):
            raise ValueError("duplicate base event names")
        self.base = tuple(base)
        self.n_assignments = 1 << len(base)
        self.all = (1 << self.n_assignments) - 1

    def var(self, name: str) -> int:
        i = self.base.index(name)
        mask = 0
        for a in range(self.n_assignments):
            if (a >> i) & 1:
                mask |= 1 << a
        return mask

    def vars(self) -> tuple[int, ...]:
        return tuple(self.var(n) for n in self.base)

    def invert(self, mask: int) -> int:
        return self.all ^ mask


def event_sufficient(target: int, events: Sequence[int]) -> bool:
    """The joint occurrence of ``events`` forces ``target``."""
    m = _conj_mask(events)
    return m & target == m


def _conj_mask(events: Sequence[int]) -> int:
    m = -1
    for e in events:
        m &= e
    return m


def event_minimal_sufficient(target: int, events: Sequence[int]) -> bool:
    if not event_sufficient(target, events):
        return False
    for i in range(len(events)):
        if event_sufficient(target, [e for j, e in enumerate(events) if j != i]):
            return False
    return True


def event_determinative(target: int, terms: Sequence[Sequence[int]]) -> bool:
    union = 0
    for term in terms:
        union |= _conj_mask(term)
    return union == target


def event_nonredundant(target: int, terms: Sequence[Sequence[int]]) -> bool:
    if not event_determinative(target, terms):
        raise ValueError("term list is not determinative")
    masks = [_conj_mask(t) for t in terms]
    for i in range(len(masks)):
        union = 0
        for j, m in enumerate(masks):
            if j != i:
                union |= m
        if union == target:
            return False
    return True


def event_reduce_nonredundant(
    target: int, terms: Sequence[Sequence[int]]
) -> list[Sequence[int]]:
    """Drop redundant event conjunctions, preferring to keep earlier terms."""
    terms = list(terms)
    if not event_determinative(target, terms):
        raise ValueError("term list is not determinative")
    masks = [_conj_mask(t) for t in terms]
    keep = [True] * len(terms)
    for i in reversed(range(len(terms))):
        union = 0
        for j, m in enumerate(masks):
            if j != i and keep[j]:
                union |= m
        if union == target:
            keep[i] = False
    return [t for t, k in zip(terms, keep) if k]


def enumerate_msc_over_events(
    target: int, candidates: Mapping[str, int]
) -> list[tuple[str, ...]]:
    """All minimal sufficient conjunctions of the named candidate events.

    Exhaustive over subsets, without complements; the result is ordered by
    (size, names).
    """
    if not candidates:
        raise ValueError("no candidate events given")
    names = sorted(candidates)
    found: list[tuple[str, ...]] = []
    for size in range(1, len(names) + 1):
        for subset in combinations(names, size):
            if event_minimal_sufficient(target, [candidates[n] for n in subset]):
                found.append(subset)
    return found
