"""Monotonic effects, edge and path signs, and qualitative covariance claims.

An edge carries a "+" when the child's equation is nondecreasing in that
parent for every response state and every setting of the other parents, and
a "-" for nonincreasing. Path signs multiply; monotone association of two
nodes then yields a sign claim about their exact covariance.
"""

from __future__ import annotations

from enum import Enum
from typing import Iterable

from .causes import canonical_representation
from .graph import Dag, GraphError, Path, common_causes, directed_paths
from .scm import ResponseTable


class Sign(Enum):
    POSITIVE = "+"
    NEGATIVE = "-"
    ZERO = "0"
    UNDEFINED = "?"

    def __mul__(self, other: "Sign") -> "Sign":
        if Sign.UNDEFINED in (self, other):
            return Sign.UNDEFINED
        if Sign.ZERO in (self, other):
            return Sign.ZERO
        return Sign.POSITIVE if self is other else Sign.NEGATIVE

    @classmethod
    def of_edge(cls, label: str | None) -> "Sign":
        if label == "+":
            return cls.POSITIVE
        if label == "-":
            return cls.NEGATIVE
        return cls.UNDEFINED


def _direction_holds(table: ResponseTable, parent: str, nondecreasing: bool) -> bool:
    i = table.parent_index(parent)
    bit = 1 << i
    for row in table.rows:
        for c in range(table.n_configs):
            if c & bit:
                continue
            low = (row >> c) & 1
            high = (row >> (c | bit)) & 1
            if nondecreasing and high < low:
                return False
            if not nondecreasing and high > low:
                return False
    return True


def is_constant_in(table: ResponseTable, parent: str) -> bool:
    """The output never depends on this parent, in any state."""
    return _direction_holds(table, parent, True) and _direction_holds(table, parent, False)


def detect_monotonic_effect(table: ResponseTable, parent: str) -> Sign:
    """Sign of the parent's monotonic effect, checked row by row.

    A parent the output never depends on satisfies both directions
    vacuously and is reported POSITIVE; use ``is_constant_in`` to flag the
    degenerate case. ZERO is never returned.
    """
    up = _direction_holds(table, parent, True)
    down = _direction_holds(table, parent, False)
    if up:
        return Sign.POSITIVE
    if down:
        return Sign.NEGATIVE
    return Sign.UNDEFINED


def monotonic_effect_via_canonical(table: ResponseTable, parent: str) -> Sign:
    """Same verdict, read off the canonical representation.

    Positive when no canonical conjunction contains the parent's complement;
    negative when none contains the parent plain. Must agree with
    ``detect_monotonic_effect``; the equivalence is enforced by tests.
    """
    table.parent_index(parent)
    rep = canonical_representation(table)
    has_plain = any(
        lit.base == parent and not lit.complemented
        for term in rep.terms for lit in term.literals
    )
    has_complement = any(
        lit.base == parent and lit.complemented
        for term in rep.terms for lit in term.literals
    )
    if not has_complement:
        return Sign.POSITIVE
    if not has_plain:
        return Sign.NEGATIVE
    return Sign.UNDEFINED


def path_sign(g: Dag, path: Path) -> Sign:
    """Product of the edge signs along a directed path."""
    if not path.is_directed:
        raise GraphError(f"path {path} is not directed")
    out = Sign.POSITIVE
    for a, b in zip(path.nodes, path.nodes[1:]):
        out = out * Sign.of_edge(g.sign(a, b))
    return out


def sign_along(g: Dag, nodes: Iterable[str]) -> Sign:
    """Product of edge signs along a directed node sequence."""
    out = Sign.POSITIVE
    pairs = list(nodes)
    for a, b in zip(pairs, pairs[1:]):
        out = out * Sign.of_edge(g.signs.get((a, b)))
    return out


def directional_effect_holds(table: ResponseTable, parent: str, sign: str) -> bool:
    """Whether a declared edge sign is consistent with the equation."""
    if sign not in ("+", "-"):
        raise ValueError(f"invalid sign {sign!r}")
    return _direction_holds(table, parent, nondecreasing=(sign == "+"))


def monotonically_associated(g: Dag, x: str, y: str) -> Sign:
    """Monotone association of two nodes on a signed graph.

    POSITIVE: every directed path between them is positive and, for every
    common cause, its paths to ``x`` (avoiding ``y``) all carry the same
    sign as its paths to ``y`` (avoiding ``x``). NEGATIVE: the directed
    paths are all negative and each common cause's two path groups carry
    opposite signs. ZERO: no directed paths and no common causes at all, so
    the exact covariance is zero. UNDEFINED otherwise.
    """
    g.require(x, y)
    if x == y:
        raise GraphError("association of a node with itself is not defined")

    between = [sign_along(g, p) for p in directed_paths(g, x, y)]
    between += [sign_along(g, p) for p in directed_paths(g, y, x)]
    causes = common_causes(g, x, y)
    if not between and not causes:
        return Sign.ZERO

    positive_ok = all(s is Sign.POSITIVE for s in between)
    negative_ok = all(s is Sign.NEGATIVE for s in between)
    for c in causes:
        to_x = {sign_along(g, p) for p in directed_paths(g, c, x, avoid=(y,))}
        to_y = {sign_along(g, p) for p in directed_paths(g, c, y, avoid=(x,))}
        if Sign.UNDEFINED in to_x | to_y:
            return Sign.UNDEFINED
        same = len(to_x | to_y) == 1
        opposite = (
            len(to_x) == 1 and len(to_y) == 1
            and next(iter(to_x)) * next(iter(to_y)) is Sign.NEGATIVE
        )
        positive_ok = positive_ok and same
        negative_ok = negative_ok and opposite
    if positive_ok and not negative_ok:
        return Sign.POSITIVE
    if negative_ok and not positive_ok:
        return Sign.NEGATIVE
    if positive_ok and negative_ok:
        # Both clauses vacuous is the ZERO case above; both holding with
        # evidence present cannot happen.
        return Sign.ZERO
    return Sign.UNDEFINED


def qualitative_cov_sign(g: Dag, x: str, y: str) -> Sign:
    """Qualitative claim about Cov(x, y) from monotone association.

    POSITIVE means "Cov >= 0", NEGATIVE means "Cov <= 0", ZERO means the
    covariance is exactly zero (the nodes are structurally independent),
    and UNDEFINED means no claim is made.
    """
    return monotonically_associated(g, x, y)
