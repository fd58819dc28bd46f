"""Binary structural equations as finite response-function tables.

Each node's mechanism is a table: the exogenous term takes one of N
"response states", and every state fixes a boolean function of the parent
configuration. A state is canonically encoded as an integer whose bit ``c``
is the output on parent configuration ``c``; configuration ``c`` itself
packs parent values with bit ``i`` holding the value of the i-th parent in
declaration order. All probability is exact rational arithmetic; floats are
never used on this path.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Callable, Iterable, Mapping, Sequence

from .graph import Dag

DEFAULT_WORLD_BUDGET = 1 << 24


class BudgetExceededError(RuntimeError):
    """Enumeration would visit more weighted worlds than allowed."""


def config_index(values: Sequence[int]) -> int:
    """Pack parent values (declaration order) into a configuration index."""
    c = 0
    for i, v in enumerate(values):
        if v not in (0, 1):
            raise ValueError(f"parent values must be bits, got {v!r}")
        c |= v << i
    return c


@dataclass(frozen=True)
class ResponseTable:
    """One node's structural equation over canonical response states."""

    node: str
    parents: tuple[str, ...]
    rows: tuple[int, ...]
    probs: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.rows) == 0:
            raise ValueError(f"{self.node}: a table needs at least one response state")
        if len(self.rows) != len(self.probs):
            raise ValueError(f"{self.node}: {len(self.rows)} rows but {len(self.probs)} probabilities")
        limit = 1 << self.n_configs
        for r in self.rows:
            if not 0 <= r < limit:
                raise ValueError(f"{self.node}: row {r} out of range for {self.n_parents} parents")
        for p in self.probs:
            if not isinstance(p, Fraction):
                raise ValueError(f"{self.node}: probabilities must be Fractions, got {p!r}")
            if p < 0:
                raise ValueError(f"{self.node}: negative state probability {p}")
        if sum(self.probs, Fraction(0)) != 1:
            raise ValueError(f"{self.node}: state probabilities sum to {sum(self.probs, Fraction(0))}, not 1")

    @property
    def n_parents(self) -> int:
        return len(self.parents)

    @property
    def n_configs(self) -> int:
        return 1 << len(self.parents)

    @property
    def n_states(self) -> int:
        return len(self.rows)

    def output(self, state: int, config: int) -> int:
        """Table lookup: the node's value in ``state`` under parent ``config``."""
        if not 0 <= state < self.n_states:
            raise ValueError(f"{self.node}: state index {state} out of range")
        if not 0 <= config < self.n_configs:
            raise ValueError(f"{self.node}: parent configuration {config} out of range")
        return (self.rows[state] >> config) & 1

    def parent_index(self, parent: str) -> int:
        try:
            return self.parents.index(parent)
        except ValueError:
            raise ValueError(f"{parent!r} is not a parent of {self.node!r}") from None

    @classmethod
    def deterministic(cls, node: str, parents: Sequence[str], fn: Callable[..., int]) -> "ResponseTable":
        """Single-state table computed from a boolean function of the parents."""
        parents = tuple(parents)
        row = 0
        for c in range(1 << len(parents)):
            bits = [(c >> i) & 1 for i in range(len(parents))]
            if fn(*bits):
                row |= 1 << c
        return cls(node, parents, (row,), (Fraction(1),))

    @classmethod
    def constant(cls, node: str, value: int) -> "ResponseTable":
        return cls(node, (), ((1 if value else 0),), (Fraction(1),))

    @classmethod
    def bernoulli(cls, node: str, p: Fraction) -> "ResponseTable":
        """Root node that is 1 with probability ``p``."""
        p = Fraction(p)
        if p == 1:
            return cls(node, (), (1,), (Fraction(1),))
        if p == 0:
            return cls(node, (), (0,), (Fraction(1),))
        return cls(node, (), (1, 0), (p, 1 - p))


def eval_node(table: ResponseTable, state: int, config: int) -> int:
    """Functional alias for :meth:`ResponseTable.output`."""
    return table.output(state, config)


def dedupe_states(table: ResponseTable) -> ResponseTable:
    """Merge identical rows, summing their probabilities.

    Keeps first-occurrence row order; zero-probability rows survive as long
    as their row value is distinct, so the row set is unchanged as a set.
    """
    order: list[int] = []
    mass: dict[int, Fraction] = {}
    for row, p in zip(table.rows, table.probs):
        if row not in mass:
            order.append(row)
            mass[row] = p
        else:
            mass[row] += p
    return ResponseTable(table.node, table.parents, tuple(order), tuple(mass[r] for r in order))


def complement_parent(table: ResponseTable, parent: str) -> ResponseTable:
    """Reexpress the equation in terms of the complement of one parent."""
    i = table.parent_index(parent)
    bit = 1 << i
    new_rows = []
    for row in table.rows:
        flipped = 0
        for c in range(table.n_configs):
            if (row >> (c ^ bit)) & 1:
                flipped |= 1 << c
        new_rows.append(flipped)
    return ResponseTable(table.node, table.parents, tuple(new_rows), table.probs)


@dataclass(frozen=True)
class Scm:
    """A causal model: a DAG plus one response table per node.

    Response states of distinct nodes are mutually independent by
    construction; the joint distribution is their product pushed through the
    tables in topological order.
    """

    graph: Dag
    tables: Mapping[str, ResponseTable]

    def __post_init__(self):
        object.__setattr__(self, "tables", dict(self.tables))
        missing = [n for n in self.graph.nodes if n not in self.tables]
        if missing:
            raise ValueError(f"missing equations for {missing}")
        extra = [n for n in self.tables if n not in self.graph]
        if extra:
            raise ValueError(f"equations for unknown nodes {extra}")
        for n in self.graph.nodes:
            t = self.tables[n]
            if t.node != n:
                raise ValueError(f"table for {n!r} is labeled {t.node!r}")
            if t.parents != self.graph.parents(n):
                raise ValueError(
                    f"{n}: table parents {t.parents} do not match graph parents {self.graph.parents(n)}"
                )

    def evaluate(self, states: Mapping[str, int]) -> dict[str, int]:
        """Node values determined by one response state per node."""
        values: dict[str, int] = {}
        for n in self.graph.topological():
            t = self.tables[n]
            c = config_index([values[p] for p in t.parents])
            values[n] = t.output(states[n], c)
        return values

    def world_count(self) -> int:
        count = 1
        for n in self.graph.nodes:
            count *= self.tables[n].n_states
        return count


class ExactDistribution:
    """An exact finite distribution as a column table of rational masses."""

    __slots__ = ("columns", "rows", "_index")

    def __init__(self, columns: Iterable[str], rows: Iterable[tuple[tuple[int, ...], Fraction]]):
        self.columns = tuple(columns)
        self.rows = tuple(rows)
        self._index = {c: i for i, c in enumerate(self.columns)}
        if len(self._index) != len(self.columns):
            raise ValueError("duplicate column names")

    def column(self, name: str) -> int:
        if name not in self._index:
            raise KeyError(f"unknown column {name!r}")
        return self._index[name]

    def mass(self) -> Fraction:
        return sum((p for _, p in self.rows), Fraction(0))

    def restrict(self, assignment: Mapping[str, int]) -> "ExactDistribution":
        """Sub-distribution matching ``assignment`` (mass is not renormalized)."""
        idx = [(self.column(k), v) for k, v in assignment.items()]
        kept = [(vals, p) for vals, p in self.rows if all(vals[i] == v for i, v in idx)]
        return ExactDistribution(self.columns, kept)

    def marginal(self, columns: Sequence[str]) -> dict[tuple[int, ...], Fraction]:
        idx = [self.column(c) for c in columns]
        out: dict[tuple[int, ...], Fraction] = {}
        for vals, p in self.rows:
            key = tuple(vals[i] for i in idx)
            out[key] = out.get(key, Fraction(0)) + p
        return out

    def mean(self, column: str) -> Fraction:
        """Expected value of a column, normalized by total mass."""
        i = self.column(column)
        total = self.mass()
        if total == 0:
            raise ZeroDivisionError("mean of an empty distribution")
        return sum((Fraction(vals[i]) * p for vals, p in self.rows), Fraction(0)) / total

    def with_columns(
        self, names: Sequence[str], derive: Callable[[Mapping[str, int]], Sequence[int]]
    ) -> "ExactDistribution":
        """Append derived columns computed per support row."""
        new_rows = []
        for vals, p in self.rows:
            env = dict(zip(self.columns, vals))
            extra = tuple(derive(env))
            if len(extra) != len(names):
                raise ValueError("derived row width does not match new column names")
            new_rows.append((vals + extra, p))
        return ExactDistribution(self.columns + tuple(names), new_rows)


def state_column(node: str) -> str:
    """Column name carrying a node's response-state index."""
    return f"{node}.state"


def joint_distribution(model: Scm, budget: int = DEFAULT_WORLD_BUDGET) -> ExactDistribution:
    """Exact joint over node values and response states, by enumeration.

    Every combination of positive-probability response states is visited
    once; node values are the deterministic consequence of the states. The
    weighted world count must stay within ``budget``.
    """
    count = model.world_count()
    if count > budget:
        raise BudgetExceededError(f"{count} worlds exceed the budget of {budget}")

    nodes = model.graph.nodes
    topo = model.graph.topological()
    columns = tuple(nodes) + tuple(state_column(n) for n in nodes)
    tables = [model.tables[n] for n in nodes]
    supports = [
        [(j, p) for j, p in enumerate(t.probs) if p > 0]
        for t in tables
    ]

    rows: list[tuple[tuple[int, ...], Fraction]] = []
    for combo in product(*supports):
        prob = Fraction(1)
        states: dict[str, int] = {}
        for n, (j, p) in zip(nodes, combo):
            prob *= p
            states[n] = j
        values: dict[str, int] = {}
        for n in topo:
            t = model.tables[n]
            c = config_index([values[p] for p in t.parents])
            values[n] = t.output(states[n], c)
        rows.append((tuple(values[n] for n in nodes) + tuple(states[n] for n in nodes), prob))
    return ExactDistribution(columns, rows)


def substitute(model: Scm, w: str | Iterable[str]) -> Scm:
    """The model induced on ``marginalize(graph, w)`` by equation substitution.

    Every absorbed node's mechanism is folded into the unique retained node
    it feeds; the combined exogenous term enumerates the product of the
    member states. Requires the marginalization to be legal, which also
    guarantees the absorbed nodes partition cleanly among retained nodes.
    """
    from .graph import marginalize as marginalize_graph

    ws = frozenset((w,) if isinstance(w, str) else w)
    g2 = marginalize_graph(model.graph, ws)

    tables: dict[str, ResponseTable] = {}
    for v in g2.nodes:
        absorbed = [
            u for u in model.graph.nodes
            if u in ws and _feeds_through(model.graph, u, v, ws)
        ]
        if not absorbed:
            old = model.tables[v]
            if old.parents == g2.parents(v):
                tables[v] = old
                continue
        members = absorbed + [v]
        member_order = [n for n in model.graph.topological() if n in members]
        inputs = g2.parents(v)
        state_axes = [range(model.tables[n].n_states) for n in members]
        new_rows: list[int] = []
        new_probs: list[Fraction] = []
        for combo in product(*state_axes):
            states = dict(zip(members, combo))
            prob = Fraction(1)
            for n in members:
                prob *= model.tables[n].probs[states[n]]
            row = 0
            for c in range(1 << len(inputs)):
                env = {p: (c >> i) & 1 for i, p in enumerate(inputs)}
                for n in member_order:
                    t = model.tables[n]
                    cfg = config_index([env[p] for p in t.parents])
                    env[n] = t.output(states[n], cfg)
                if env[v]:
                    row |= 1 << c
            new_rows.append(row)
            new_probs.append(prob)
        tables[v] = ResponseTable(v, inputs, tuple(new_rows), tuple(new_probs))
    return Scm(g2, tables)


def _feeds_through(g: Dag, u: str, v: str, ws: frozenset[str]) -> bool:
    """Directed path u -> ... -> v whose interior stays inside ``ws``."""
    stack = [u]
    seen = {u}
    while stack:
        n = stack.pop()
        for c in g.children(n):
            if c == v:
                return True
            if c in ws and c not in seen:
                seen.add(c)
                stack.append(c)
    return False
