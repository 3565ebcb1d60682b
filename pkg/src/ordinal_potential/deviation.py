"""Deviation graphs, strongly connected components and condensation.

Vertices are flat profile indices.  An edge ``a -> a'`` exists for every
unilateral deviation of a single player (the *deviator*) and carries that
player's utility gain ``u_i(a') - u_i(a)``.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np

from .game import Game, profile_from_index


class InvariantViolation(RuntimeError):
    """An internal consistency check failed; indicates a bug, not bad input."""


@dataclass(frozen=True, eq=False)
class DeviationGraph:
    """Weighted directed graph stored as parallel edge arrays.

    Edges are grouped by tail vertex.  ``deviators`` is ``-1`` for graphs
    that were not built from a game (see :meth:`from_edges`).
    """

    num_vertices: int
    tails: np.ndarray
    heads: np.ndarray
    weights: np.ndarray
    deviators: np.ndarray
    action_counts: tuple[int, ...] | None = None

    @classmethod
    def from_edges(cls, num_vertices, edges):
        """Build a graph from ``(tail, head, weight)`` triples."""
        edges = list(edges)
        tails = np.array([e[0] for e in edges], dtype=np.int64)
        heads = np.array([e[1] for e in edges], dtype=np.int64)
        weights = np.array([e[2] for e in edges], dtype=np.float64)
        if len(edges) and (
            tails.min() < 0 or heads.min() < 0
            or max(tails.max(), heads.max()) >= num_vertices
        ):
            raise ValueError("edge endpoint outside the vertex range")
        return _grouped(
            num_vertices, tails, heads, weights,
            np.full(len(edges), -1, dtype=np.int64), None,
        )

    @property
    def num_edges(self) -> int:
        return int(self.tails.size)

    def edges(self):
        """Iterate over ``(tail, head, weight, deviator)`` tuples."""
        for t, h, w, d in zip(self.tails, self.heads, self.weights, self.deviators):
            yield int(t), int(h), float(w), int(d)

    def subgraph(self, mask) -> "DeviationGraph":
        mask = np.asarray(mask, dtype=bool)
        return DeviationGraph(
            self.num_vertices, self.tails[mask], self.heads[mask],
            self.weights[mask], self.deviators[mask], self.action_counts,
        )

    def successors(self) -> list[np.ndarray]:
        """Adjacency lists (head arrays) indexed by tail vertex."""
        bounds = np.searchsorted(self.tails, np.arange(self.num_vertices + 1))
        return [self.heads[bounds[v]:bounds[v + 1]] for v in range(self.num_vertices)]


def _grouped(num_vertices, tails, heads, weights, deviators, action_counts):
    order = np.lexsort((heads, tails))
    return DeviationGraph(
        int(num_vertices), tails[order], heads[order], weights[order],
        deviators[order], action_counts,
    )


def build_deviation_graph(game: Game) -> DeviationGraph:
    """Full deviation graph: one edge per ordered unilateral deviation pair."""
    counts = game.action_counts
    size = game.num_profiles
    vertices = np.arange(size, dtype=np.int64)
    tails, heads, weights, deviators = [], [], [], []
    for player, k in enumerate(counts):
        if k == 1:
            continue
        stride = math.prod(counts[player + 1:])
        own = (vertices // stride) % k
        for alt in range(k):
            src = vertices[own != alt]
            dst = src + (alt - own[own != alt]) * stride
            u = game.utilities[player]
            tails.append(src)
            heads.append(dst)
            weights.append(u[dst] - u[src])
            deviators.append(np.full(src.size, player, dtype=np.int64))
    if tails:
        cat = np.concatenate
        return _grouped(size, cat(tails), cat(heads), cat(weights), cat(deviators), counts)
    empty_i = np.empty(0, dtype=np.int64)
    return DeviationGraph(size, empty_i, empty_i, np.empty(0), empty_i, counts)


def expected_edge_count(action_counts) -> int:
    return math.prod(action_counts) * sum(k - 1 for k in action_counts)


def nonnegative_subgraph(graph: DeviationGraph) -> DeviationGraph:
    return graph.subgraph(graph.weights >= 0)


def strongly_connected_components(graph: DeviationGraph) -> np.ndarray:
    """Label every vertex with its strongly connected component.

    Iterative Tarjan, linear in ``|V| + |E|``.  Labels are renumbered so that
    component ids increase with the lowest vertex index they contain.
    """
    n = graph.num_vertices
    adjacency = graph.successors()
    index = np.full(n, -1, dtype=np.int64)
    lowlink = np.zeros(n, dtype=np.int64)
    on_stack = np.zeros(n, dtype=bool)
    raw = np.full(n, -1, dtype=np.int64)
    stack: list[int] = []
    counter = 0
    found = 0

    for root in range(n):
        if index[root] >= 0:
            continue
        index[root] = lowlink[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        work = [(root, 0)]
        while work:
            v, pos = work[-1]
            succ = adjacency[v]
            if pos < len(succ):
                work[-1] = (v, pos + 1)
                w = int(succ[pos])
                if index[w] < 0:
                    index[w] = lowlink[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, 0))
                elif on_stack[w]:
                    lowlink[v] = min(lowlink[v], index[w])
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                lowlink[parent] = min(lowlink[parent], lowlink[v])
            if lowlink[v] == index[v]:
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    raw[w] = found
                    if w == v:
                        break
                found += 1

    # relabel by lowest member vertex: first occurrence in vertex order
    relabel = np.full(found, -1, dtype=np.int64)
    next_id = 0
    for v in range(n):
        if relabel[raw[v]] < 0:
            relabel[raw[v]] = next_id
            next_id += 1
    return relabel[raw]


@dataclass(frozen=True, eq=False)
class Condensation:
    """Quotient DAG of a graph by its strongly connected components.

    ``dag_tails``/``dag_heads``/``dag_weights`` hold one edge per ordered pair
    of components joined by at least one original edge, weighted by the
    largest such edge.  ``internal_max_weight[c]`` is the largest weight of an
    edge inside component ``c`` (0 when there is none).
    """

    component_of: np.ndarray
    components: list[np.ndarray]
    dag_tails: np.ndarray
    dag_heads: np.ndarray
    dag_weights: np.ndarray
    internal_max_weight: np.ndarray
    _incoming: list = field(default=None, repr=False)

    @property
    def num_components(self) -> int:
        return len(self.components)

    @property
    def dag_edges(self):
        return [
            (int(t), int(h), float(w))
            for t, h, w in zip(self.dag_tails, self.dag_heads, self.dag_weights)
        ]

    def incoming(self) -> list[list[tuple[int, float]]]:
        """``(tail component, weight)`` pairs grouped by head component."""
        if self._incoming is None:
            grouped = [[] for _ in range(self.num_components)]
            for t, h, w in zip(self.dag_tails, self.dag_heads, self.dag_weights):
                grouped[h].append((int(t), float(w)))
            object.__setattr__(self, "_incoming", grouped)
        return self._incoming


def condense(graph: DeviationGraph, component_of=None) -> Condensation:
    if component_of is None:
        component_of = strongly_connected_components(graph)
    k = int(component_of.max()) + 1 if component_of.size else 0
    members = [[] for _ in range(k)]
    for v, c in enumerate(component_of):
        members[c].append(v)
    components = [np.array(m, dtype=np.int64) for m in members]

    src = component_of[graph.tails]
    dst = component_of[graph.heads]
    internal = src == dst
    internal_max = np.zeros(k)
    if internal.any():
        internal_max = np.full(k, -np.inf)
        np.maximum.at(internal_max, src[internal], graph.weights[internal])
        internal_max[np.isneginf(internal_max)] = 0.0

    best: dict[tuple[int, int], float] = {}
    crossing = ~internal
    for c, d, w in zip(src[crossing], dst[crossing], graph.weights[crossing]):
        key = (int(c), int(d))
        if key not in best or w > best[key]:
            best[key] = float(w)
    keys = sorted(best)
    return Condensation(
        component_of=component_of,
        components=components,
        dag_tails=np.array([c for c, _ in keys], dtype=np.int64),
        dag_heads=np.array([d for _, d in keys], dtype=np.int64),
        dag_weights=np.array([best[key] for key in keys], dtype=np.float64),
        internal_max_weight=internal_max,
    )


def topological_sort(condensation: Condensation, reverse_tiebreak: bool = False) -> list[int]:
    """Kahn's algorithm; among ready components the lowest id goes first.

    With ``reverse_tiebreak`` the highest ready id goes first instead.
    """
    k = condensation.num_components
    indegree = np.zeros(k, dtype=np.int64)
    np.add.at(indegree, condensation.dag_heads, 1)
    out = [[] for _ in range(k)]
    for t, h in zip(condensation.dag_tails, condensation.dag_heads):
        out[t].append(int(h))
    sign = -1 if reverse_tiebreak else 1
    ready = [sign * c for c in range(k) if indegree[c] == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        c = sign * heapq.heappop(ready)
        order.append(c)
        for h in out[c]:
            indegree[h] -= 1
            if indegree[h] == 0:
                heapq.heappush(ready, sign * h)
    if len(order) != k:
        raise InvariantViolation(
            f"condensation has a cycle: sorted {len(order)} of {k} components"
        )
    return order


def nonnegative_condensation(game: Game) -> tuple[DeviationGraph, Condensation]:
    graph = nonnegative_subgraph(build_deviation_graph(game))
    return graph, condense(graph)


def admits_ordinal_potential(game: Game) -> bool:
    """True iff no edge inside an SCC of the nonnegative graph has positive weight.

    Equivalent to the absence of weak improvement cycles.
    """
    _, cond = nonnegative_condensation(game)
    return bool(np.all(cond.internal_max_weight == 0))


def _best_response_mask(game: Game, strict: bool) -> np.ndarray:
    ok = np.ones(game.action_counts, dtype=bool)
    for player, k in enumerate(game.action_counts):
        u = game.payoff_tensor(player)
        top = u.max(axis=player, keepdims=True)
        at_top = u == top
        if strict and k > 1:
            unique = at_top.sum(axis=player, keepdims=True) == 1
            at_top = at_top & unique
        ok &= at_top
    return ok.reshape(-1)


def pure_nash(game: Game, strict: bool = False) -> set[tuple[int, ...]]:
    """Pure Nash equilibria; ``strict=True`` demands strictly worse deviations."""
    mask = _best_response_mask(game, strict)
    return {profile_from_index(i, game.action_counts) for i in np.flatnonzero(mask)}


def strict_nash(game: Game) -> set[tuple[int, ...]]:
    return pure_nash(game, strict=True)


def strictly_dominated_actions(game: Game, player: int) -> set[int]:
    """Actions beaten by a single alternative against every opponent profile."""
    u = np.moveaxis(game.payoff_tensor(player), player, 0)
    k = u.shape[0]
    flat = u.reshape(k, -1)
    dominated = set()
    for action in range(k):
        for alt in range(k):
            if alt != action and np.all(flat[alt] > flat[action]):
                dominated.add(action)
                break
    return dominated


def to_dot(graph: DeviationGraph, action_counts=None) -> str:
    """Graphviz rendering; vertices are labelled with profile tuples."""
    counts = action_counts or graph.action_counts
    lines = ["digraph deviation {"]
    for v in range(graph.num_vertices):
        label = str(profile_from_index(v, counts)) if counts else str(v)
        lines.append(f'  {v} [label="{label}"];')
    for t, h, w, _ in graph.edges():
        lines.append(f'  {t} -> {h} [label="{w:g}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
