"""Directed acyclic graph core: paths, d-separation, marginalization.

Nodes are case-sensitive strings. Declaration order is preserved and drives
every deterministic iteration downstream (truth-table indexing, witness
search, report ordering). A ``Dag`` is immutable after construction; all
queries are pure, so instances can be shared freely across threads.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Mapping


class GraphError(ValueError):
    """Raised for structural problems with a graph or a graph query."""


def _as_names(x: str | Iterable[str]) -> tuple[str, ...]:
    if isinstance(x, str):
        return (x,)
    return tuple(x)


class Dag:
    """A finite directed acyclic graph with optionally signed edges.

    Edge signs are stored here ("+" or "-") but only given meaning by the
    sign-propagation layer; the graph itself treats them as labels.
    """

    __slots__ = ("nodes", "edges", "signs", "_index", "_parents", "_children", "_adjacent", "_topo")

    def __init__(
        self,
        nodes: Iterable[str],
        edges: Iterable[tuple[str, str]] = (),
        signs: Mapping[tuple[str, str], str] | None = None,
    ):
        node_list = tuple(nodes)
        if len(set(node_list)) != len(node_list):
            raise GraphError("duplicate node names")
        index = {n: i for i, n in enumerate(node_list)}

        edge_list = list(edges)
        seen = set()
        for a, b in edge_list:
            if a not in index or b not in index:
                raise GraphError(f"edge ({a!r}, {b!r}) references an unknown node")
            if a == b:
                raise GraphError(f"self-loop on {a!r}")
            if (a, b) in seen:
                raise GraphError(f"duplicate edge ({a!r}, {b!r})")
            seen.add((a, b))
        edge_list.sort(key=lambda e: (index[e[0]], index[e[1]]))

        sign_map: dict[tuple[str, str], str] = {}
        for edge, s in (signs or {}).items():
            if tuple(edge) not in seen:
                raise GraphError(f"sign declared for missing edge {edge!r}")
            if s not in ("+", "-"):
                raise GraphError(f"invalid edge sign {s!r} (expected '+' or '-')")
            sign_map[tuple(edge)] = s

        parents: dict[str, list[str]] = {n: [] for n in node_list}
        children: dict[str, list[str]] = {n: [] for n in node_list}
        for a, b in edge_list:
            parents[b].append(a)
            children[a].append(b)
        for n in node_list:
            parents[n].sort(key=index.__getitem__)
            children[n].sort(key=index.__getitem__)

        # Kahn's algorithm; also the cycle check.
        degree = {n: len(parents[n]) for n in node_list}
        ready = deque(n for n in node_list if degree[n] == 0)
        topo: list[str] = []
        while ready:
            n = ready.popleft()
            topo.append(n)
            for c in children[n]:
                degree[c] -= 1
                if degree[c] == 0:
                    ready.append(c)
        if len(topo) != len(node_list):
            raise GraphError("graph contains a directed cycle")

        self.nodes = node_list
        self.edges = tuple(edge_list)
        self.signs = dict(sign_map)
        self._index = index
        self._parents = {n: tuple(parents[n]) for n in node_list}
        self._children = {n: tuple(children[n]) for n in node_list}
        self._adjacent = {
            n: tuple(sorted(set(parents[n]) | set(children[n]), key=index.__getitem__))
            for n in node_list
        }
        self._topo = tuple(topo)

    @classmethod
    def from_edges(
        cls,
        edges: Iterable[tuple[str, str]],
        nodes: Iterable[str] = (),
        signs: Mapping[tuple[str, str], str] | None = None,
    ) -> "Dag":
        """Build a graph from an edge list; node order is first appearance."""
        order: list[str] = list(nodes)
        known = set(order)
        edge_list = list(edges)
        for a, b in edge_list:
            for n in (a, b):
                if n not in known:
                    known.add(n)
                    order.append(n)
        return cls(order, edge_list, signs)

    def __contains__(self, node: str) -> bool:
        return node in self._index

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Dag):
            return NotImplemented
        return self.nodes == other.nodes and self.edges == other.edges and self.signs == other.signs

    def __hash__(self):
        return hash((self.nodes, self.edges, tuple(sorted(self.signs.items()))))

    def __repr__(self) -> str:
        return f"Dag(nodes={list(self.nodes)!r}, edges={list(self.edges)!r})"

    def require(self, *names: str) -> None:
        for n in names:
            if n not in self._index:
                raise GraphError(f"unknown node {n!r}")

    def index(self, node: str) -> int:
        self.require(node)
        return self._index[node]

    def has_edge(self, a: str, b: str) -> bool:
        return b in self._children.get(a, ())

    def sign(self, a: str, b: str) -> str | None:
        if not self.has_edge(a, b):
            raise GraphError(f"no edge ({a!r}, {b!r})")
        return self.signs.get((a, b))

    def parents(self, node: str) -> tuple[str, ...]:
        self.require(node)
        return self._parents[node]

    def children(self, node: str) -> tuple[str, ...]:
        self.require(node)
        return self._children[node]

    def adjacent(self, node: str) -> tuple[str, ...]:
        self.require(node)
        return self._adjacent[node]

    def topological(self) -> tuple[str, ...]:
        return self._topo

    def ancestors(self, node: str) -> frozenset[str]:
        """Nodes with a directed path into ``node``; excludes ``node`` itself."""
        self.require(node)
        out: set[str] = set()
        stack = list(self._parents[node])
        while stack:
            n = stack.pop()
            if n not in out:
                out.add(n)
                stack.extend(self._parents[n])
        return frozenset(out)

    def descendants(self, node: str) -> frozenset[str]:
        """Nodes reachable from ``node`` by a directed path; excludes ``node``."""
        self.require(node)
        out: set[str] = set()
        stack = list(self._children[node])
        while stack:
            n = stack.pop()
            if n not in out:
                out.add(n)
                stack.extend(self._children[n])
        return frozenset(out)


@dataclass(frozen=True)
class Path:
    """A simple path: adjacent nodes plus the direction of each step.

    ``forward[i]`` is True when the edge between ``nodes[i]`` and
    ``nodes[i + 1]`` points toward ``nodes[i + 1]``.
    """

    nodes: tuple[str, ...]
    forward: tuple[bool, ...]

    @classmethod
    def through(cls, g: Dag, nodes: Iterable[str]) -> "Path":
        seq = tuple(nodes)
        if len(seq) < 2:
            raise GraphError("a path needs at least two nodes")
        if len(set(seq)) != len(seq):
            raise GraphError("path repeats a node")
        steps = []
        for a, b in zip(seq, seq[1:]):
            if g.has_edge(a, b):
                steps.append(True)
            elif g.has_edge(b, a):
                steps.append(False)
            else:
                raise GraphError(f"{a!r} and {b!r} are not adjacent")
        return cls(seq, tuple(steps))

    @property
    def is_directed(self) -> bool:
        return all(self.forward)

    def __str__(self) -> str:
        parts = [self.nodes[0]]
        for step, node in zip(self.forward, self.nodes[1:]):
            parts.append(" -> " if step else " <- ")
            parts.append(node)
        return "".join(parts)


def _node_set(g: Dag, x: str | Iterable[str]) -> frozenset[str]:
    names = _as_names(x)
    g.require(*names)
    return frozenset(names)


def _check_disjoint(*sets: frozenset[str]) -> None:
    for a, b in combinations(sets, 2):
        overlap = a & b
        if overlap:
            raise GraphError(f"query sets overlap on {sorted(overlap)}")


def d_separated(
    g: Dag,
    x: str | Iterable[str],
    y: str | Iterable[str],
    z: str | Iterable[str] = (),
) -> bool:
    """Whether every path between ``x`` and ``y`` is blocked given ``z``.

    A path is blocked when it carries a non-collider that is conditioned on,
    or a collider with no conditioned descendant (itself included). Uses the
    linear-time active-trail reachability formulation; agreement with the
    literal per-path definition is enforced by the test suite.
    """
    xs, ys, zs = _node_set(g, x), _node_set(g, y), _node_set(g, z)
    _check_disjoint(xs, ys, zs)

    anc_z: set[str] = set(zs)
    for n in zs:
        anc_z |= g.ancestors(n)

    queue: deque[tuple[bool, str]] = deque((True, s) for s in xs)
    seen: set[tuple[bool, str]] = set()
    while queue:
        state = queue.popleft()
        if state in seen:
            continue
        seen.add(state)
        up, v = state
        if v in ys:
            return False
        if up and v not in zs:
            for p in g.parents(v):
                queue.append((True, p))
            for c in g.children(v):
                queue.append((False, c))
        elif not up:
            if v not in zs:
                for c in g.children(v):
                    queue.append((False, c))
            if v in anc_z:
                for p in g.parents(v):
                    queue.append((True, p))
    return True


def path_blocked(g: Dag, path: Path, z: str | Iterable[str] = ()) -> bool:
    """Literal blocking test for one path, applied node by node."""
    zs = _node_set(g, z)
    touches_z = _descendant_touches(g, zs)
    for i in range(1, len(path.nodes) - 1):
        v = path.nodes[i]
        collider = path.forward[i - 1] and not path.forward[i]
        if collider:
            if not touches_z[v]:
                return True
        elif v in zs:
            return True
    return False


def _descendant_touches(g: Dag, zs: frozenset[str]) -> dict[str, bool]:
    """For each node: is the node itself or any descendant inside ``zs``?"""
    marked = {n: n in zs for n in g.nodes}
    for n in reversed(g.topological()):
        if not marked[n] and any(marked[c] for c in g.children(n)):
            marked[n] = True
    return marked


def find_unblocked_path(
    g: Dag,
    x: str | Iterable[str],
    y: str | Iterable[str],
    z: str | Iterable[str] = (),
) -> Path | None:
    """First unblocked simple path between ``x`` and ``y`` given ``z``.

    Deterministic witness search: sources and neighbors are explored in node
    declaration order. Returns None exactly when ``d_separated`` holds.
    """
    xs, ys, zs = _node_set(g, x), _node_set(g, y), _node_set(g, z)
    _check_disjoint(xs, ys, zs)
    touches_z = _descendant_touches(g, zs)

    def extend(trail: list[str], on_trail: set[str]) -> list[str] | None:
        v = trail[-1]
        for w in g.adjacent(v):
            if w in on_trail:
                continue
            if len(trail) >= 2:
                u = trail[-2]
                collider = g.has_edge(u, v) and g.has_edge(w, v)
                if collider:
                    if not touches_z[v]:
                        continue
                elif v in zs:
                    continue
            if w in ys:
                return trail + [w]
            on_trail.add(w)
            trail.append(w)
            found = extend(trail, on_trail)
            if found is not None:
                return found
            trail.pop()
            on_trail.remove(w)
        return None

    for s in g.nodes:
        if s not in xs:
            continue
        found = extend([s], {s})
        if found is not None:
            return Path.through(g, found)
    return None


def _reaches(g: Dag, src: str, dst: str, avoid: frozenset[str]) -> bool:
    """Directed reachability from ``src`` to ``dst`` avoiding ``avoid``."""
    if src in avoid:
        return False
    stack = [src]
    seen = {src}
    while stack:
        n = stack.pop()
        if n == dst:
            return True
        for c in g.children(n):
            if c not in seen and c not in avoid:
                seen.add(c)
                stack.append(c)
    return False


def common_causes(g: Dag, x: str, y: str) -> tuple[str, ...]:
    """Nodes with a directed path to ``x`` avoiding ``y`` and one to ``y`` avoiding ``x``."""
    g.require(x, y)
    out = []
    for c in g.nodes:
        if c in (x, y):
            continue
        if _reaches(g, c, x, frozenset((y,))) and _reaches(g, c, y, frozenset((x,))):
            out.append(c)
    return tuple(out)


def directed_paths(
    g: Dag, a: str, b: str, avoid: str | Iterable[str] = ()
) -> list[tuple[str, ...]]:
    """All directed simple paths from ``a`` to ``b`` skipping ``avoid`` nodes."""
    g.require(a, b)
    avoid_set = _node_set(g, avoid)
    if a in avoid_set or b in avoid_set or a == b:
        return []
    out: list[tuple[str, ...]] = []

    def walk(trail: list[str]) -> None:
        for c in g.children(trail[-1]):
            if c in avoid_set or c in trail:
                continue
            if c == b:
                out.append(tuple(trail) + (b,))
            else:
                trail.append(c)
                walk(trail)
                trail.pop()

    walk([a])
    return out


def can_marginalize(g: Dag, w: str | Iterable[str]) -> bool:
    """True when no node of ``w`` is a common cause of two retained nodes."""
    ws = _node_set(g, w)
    retained = [n for n in g.nodes if n not in ws]
    for c in ws:
        for a, b in combinations(retained, 2):
            if _reaches(g, c, a, frozenset((b,))) and _reaches(g, c, b, frozenset((a,))):
                return False
    return True


def marginalize(g: Dag, w: str | Iterable[str]) -> Dag:
    """Contract the graph over ``w``: keep an edge a -> b when some directed
    path a -> ... -> b runs entirely through ``w``-interior nodes.

    A contracted edge keeps a sign only when every contracted path agrees on
    the product of its edge signs.
    """
    ws = _node_set(g, w)
    if not can_marginalize(g, ws):
        raise GraphError(f"cannot marginalize: a node of {sorted(ws)} is a common cause of retained nodes")
    retained = [n for n in g.nodes if n not in ws]
    retained_set = set(retained)

    sign_value = {"+": 1, "-": -1}
    edges: list[tuple[str, str]] = []
    signs: dict[tuple[str, str], str] = {}
    for a in retained:
        collected: dict[str, set[int | None]] = {}

        def walk(node: str, acc: int | None) -> None:
            for c in g.children(node):
                s = g.signs.get((node, c))
                step = None if (acc is None or s is None) else acc * sign_value[s]
                if c in retained_set:
                    collected.setdefault(c, set()).add(step)
                elif c in ws:
                    walk(c, step)

        walk(a, 1)
        for b in retained:
            if b in collected:
                edges.append((a, b))
                path_signs = collected[b]
                if path_signs == {1}:
                    signs[(a, b)] = "+"
                elif path_signs == {-1}:
                    signs[(a, b)] = "-"
    return Dag(retained, edges, signs)
