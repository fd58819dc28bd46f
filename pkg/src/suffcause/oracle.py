"""Exact brute-force ground truth and seeded random model generation.

Everything here is rational arithmetic on enumerated supports: conditional
covariances, conditional independence and claim verification carry no
tolerance at all. The generator draws response tables under structural
constraints by rejection sampling with post-checks, so accepted models can
be re-audited independently.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import TYPE_CHECKING, Iterable, Mapping, Sequence

from .causes import Literal, canonical_representation
from .graph import Dag
from .scm import ExactDistribution, ResponseTable, Scm

if TYPE_CHECKING:  # pragma: no cover
    from .covsign import SignConclusion


class ConditioningError(ValueError):
    """Conditioning event has zero probability."""


class GenerationError(RuntimeError):
    """The constrained generator ran out of attempts."""


def _columns(x: str | Iterable[str]) -> tuple[str, ...]:
    return (x,) if isinstance(x, str) else tuple(x)


def conditional_covariance(
    dist: ExactDistribution, x: str, y: str, given: Mapping[str, int] | None = None
) -> Fraction:
    """Exact Cov(x, y | given): E[xy] - E[x]E[y] on the restricted support."""
    sub = dist.restrict(given or {})
    mass = sub.mass()
    if mass == 0:
        raise ConditioningError(f"conditioning event {dict(given or {})} has probability 0")
    ix, iy = sub.column(x), sub.column(y)
    exy = sum((Fraction(v[ix] * v[iy]) * p for v, p in sub.rows), Fraction(0)) / mass
    ex = sum((Fraction(v[ix]) * p for v, p in sub.rows), Fraction(0)) / mass
    ey = sum((Fraction(v[iy]) * p for v, p in sub.rows), Fraction(0)) / mass
    return exy - ex * ey


def conditional_independent(
    dist: ExactDistribution,
    x: str | Iterable[str],
    y: str | Iterable[str],
    z: Iterable[str] = (),
    stratum: Mapping[str, int] | None = None,
) -> bool:
    """Exact factorization check of x against y given z.

    The check runs inside every positive-probability assignment of ``z``
    (restricted to ``stratum`` when given); zero-probability strata are
    skipped by construction.
    """
    xs, ys, zs = _columns(x), _columns(y), tuple(z)
    base = dist.restrict(stratum or {})
    groups: dict[tuple[int, ...], list[tuple[tuple[int, ...], Fraction]]] = {}
    zi = [base.column(c) for c in zs]
    for vals, p in base.rows:
        if p == 0:
            continue
        groups.setdefault(tuple(vals[i] for i in zi), []).append((vals, p))

    xi = [base.column(c) for c in xs]
    yi = [base.column(c) for c in ys]
    for rows in groups.values():
        mass = sum((p for _, p in rows), Fraction(0))
        joint: dict[tuple, Fraction] = {}
        mx: dict[tuple, Fraction] = {}
        my: dict[tuple, Fraction] = {}
        for vals, p in rows:
            kx = tuple(vals[i] for i in xi)
            ky = tuple(vals[i] for i in yi)
            joint[kx + ky] = joint.get(kx + ky, Fraction(0)) + p
            mx[kx] = mx.get(kx, Fraction(0)) + p
            my[ky] = my.get(ky, Fraction(0)) + p
        for kx, px in mx.items():
            for ky, py in my.items():
                if joint.get(kx + ky, Fraction(0)) * mass != px * py:
                    return False
    return True


def verify_claim(dist: ExactDistribution, claim: "SignConclusion") -> bool:
    """Exact check of one covariance-sign conclusion against a distribution.

    Sign-equality claims hold in the transfer sense: the outer covariance is
    a nonnegative multiple of the inner one, so a strictly signed inner
    forces the weak inequality and an exactly-zero inner forces exact zero.
    """
    from .covsign import Relation

    q = claim.quantity
    given = dict(q.extra)
    given[q.given] = q.stratum
    cov = conditional_covariance(dist, q.x, q.y, given)
    if claim.relation is Relation.LE0:
        return cov <= 0
    if claim.relation is Relation.GE0:
        return cov >= 0
    if claim.relation is Relation.EQ0:
        return cov == 0
    if claim.relation is Relation.SIGN_EQUALS:
        if claim.other is None:
            raise ValueError("sign-equality claim without a reference quantity")
        o = claim.other
        other_given = dict(o.extra)
        other_given[o.given] = o.stratum
        inner = conditional_covariance(dist, o.x, o.y, other_given)
        if inner > 0:
            return cov >= 0
        if inner < 0:
            return cov <= 0
        return cov == 0
    raise ValueError(f"unknown relation {claim.relation!r}")


@dataclass(frozen=True)
class InstanceConstraints:
    """Structural requirements for generated models.

    ``monotone`` lists per-node (parent, sign) requirements enforced row by
    row; ``forbidden_terms`` lists per-node literal tuples whose canonical
    co-cause must come out identically zero (the term must be absent);
    ``allowed_rows`` restricts a node's response rows outright.
    """

    monotone: Mapping[str, tuple[tuple[str, str], ...]] = field(default_factory=dict)
    forbidden_terms: Mapping[str, tuple[tuple[Literal, ...], ...]] = field(default_factory=dict)
    allowed_rows: Mapping[str, tuple[int, ...]] = field(default_factory=dict)
    states: tuple[int, int] = (1, 3)
    max_weight: int = 8
    max_tries: int = 500


def _row_monotone(row: int, n_configs: int, bit: int, sign: str) -> bool:
    for c in range(n_configs):
        if c & bit:
            continue
        low = (row >> c) & 1
        high = (row >> (c | bit)) & 1
        if sign == "+" and high < low:
            return False
        if sign == "-" and high > low:
            return False
    return True


def _monotone_close(row: int, n_configs: int, requirements: Sequence[tuple[int, str]]) -> int:
    """Force row-level monotonicity by closing upward along each constraint."""
    for bit, sign in requirements:
        for c in range(n_configs):
            if c & bit:
                if sign == "+":
                    row |= ((row >> (c ^ bit)) & 1) << c
                else:
                    row |= ((row >> c) & 1) << (c ^ bit)
    return row


def _candidate_rows(
    table_parents: Sequence[str],
    requirements: Sequence[tuple[str, str]],
    allowed: Sequence[int] | None,
) -> list[int] | None:
    """Explicit candidate list when the row space is small enough."""
    m = len(table_parents)
    if allowed is None and m > 3:
        return None
    n_configs = 1 << m
    pool = allowed if allowed is not None else range(1 << n_configs)
    bits = [(1 << table_parents.index(p), s) for p, s in requirements]
    return [r for r in pool if all(_row_monotone(r, n_configs, b, s) for b, s in bits)]


def random_instance(g: Dag, constraints: InstanceConstraints, seed: int) -> Scm:
    """Draw one model satisfying the constraints, deterministically per seed.

    Rows are sampled (distinct per node) and rejected until every row-level
    and canonical-term constraint passes; probabilities are small random
    rationals. Raises ``GenerationError`` after ``max_tries`` rejections.
    """
    rng = random.Random(seed)
    tables: dict[str, ResponseTable] = {}
    lo, hi = constraints.states
    for node in g.nodes:
        parents = g.parents(node)
        m = len(parents)
        n_configs = 1 << m
        requirements = tuple(constraints.monotone.get(node, ()))
        for p, s in requirements:
            if p not in parents:
                raise ValueError(f"{node}: monotonicity constraint on non-parent {p!r}")
            if s not in ("+", "-"):
                raise ValueError(f"{node}: invalid sign {s!r}")
        allowed = constraints.allowed_rows.get(node)
        candidates = _candidate_rows(parents, requirements, allowed)
        if candidates is not None and not candidates:
            raise GenerationError(f"{node}: no rows satisfy the constraints")
        forbidden = [frozenset(t) for t in constraints.forbidden_terms.get(node, ())]

        for attempt in range(constraints.max_tries):
            if candidates is not None:
                n = rng.randint(lo, max(lo, min(hi, len(candidates))))
                n = min(n, len(candidates))
                rows = tuple(rng.sample(candidates, n))
            else:
                closing = [(1 << parents.index(p), s) for p, s in requirements]
                picked: list[int] = []
                for _ in range(50):
                    row = _monotone_close(rng.getrandbits(n_configs), n_configs, closing)
                    if row not in picked:
                        picked.append(row)
                    if len(picked) >= rng.randint(lo, hi):
                        break
                rows = tuple(picked)
                if not rows:
                    continue
            weights = [rng.randint(1, constraints.max_weight) for _ in rows]
            total = sum(weights)
            table = ResponseTable(node, parents, rows, tuple(Fraction(w, total) for w in weights))
            if forbidden:
                rep = canonical_representation(table)
                bad = any(frozenset(term.literals) in forbidden for term in rep.terms)
                if bad:
                    continue
            tables[node] = table
            break
        else:
            raise GenerationError(f"{node}: no acceptable table after {constraints.max_tries} tries")
    return Scm(g, tables)
