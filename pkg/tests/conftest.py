import itertools

import numpy as np
import pytest

from ordinal_potential import DeviationGraph, bimatrix_game, make_game

ACCEPTANCE_LINES = []


def record(criterion, passed, detail=""):
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {criterion}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def h_family(h):
    return bimatrix_game([[h, 0], [0, 1]], [[0, 1], [1, 0]])


def coordination_game():
    return bimatrix_game(
        [[3, 2, 1], [0, 2, 1], [0, 0, 1]],
        [[3, 0, 0], [2, 2, 0], [1, 1, 1]],
    )


def voorneveld_nolde_game():
    return bimatrix_game(
        [[0, 1, 0], [1, 0, 0], [0, 0, 1]],
        [[1, 2, 0], [1, 0, 0], [0, 0, 1]],
    )


# a->b:1, a->c:3, b->c:2, b->d:4, c->d:5, d->e:1 with a..e = 0..4
CHAIN_EDGES = [(0, 1, 1), (0, 2, 3), (1, 2, 2), (1, 3, 4), (2, 3, 5), (3, 4, 1)]


def chain_graph():
    return DeviationGraph.from_edges(5, CHAIN_EDGES)


def constant_game(shape=(2, 2), value=7.0):
    size = int(np.prod(shape))
    return make_game(len(shape), shape, [[value] * size] * len(shape))


@pytest.fixture
def fig2():
    return coordination_game()


@pytest.fixture
def fig3():
    return voorneveld_nolde_game()


# ---------------------------------------------------------------- oracles
# These work directly from the definitions on nested python structures and
# share no code with the package.

def brute_edges(game):
    """All unilateral deviations as (tail profile, head profile, weight)."""
    counts = game.action_counts
    table = {p: [game.utility(i, p) for i in range(game.num_players)]
             for p in itertools.product(*(range(k) for k in counts))}
    edges = []
    for p in table:
        for i, k in enumerate(counts):
            for alt in range(k):
                if alt != p[i]:
                    q = p[:i] + (alt,) + p[i + 1:]
                    edges.append((p, q, table[q][i] - table[p][i]))
    return edges


def simple_cycles(vertices, edges):
    """Every simple directed cycle as a list of edge weights (DFS enumeration)."""
    out_edges = {v: [] for v in vertices}
    for t, h, w in edges:
        out_edges[t].append((h, w))
    order = {v: i for i, v in enumerate(vertices)}
    cycles = []

    def dfs(start, v, visited, weights):
        for h, w in out_edges[v]:
            if h == start:
                cycles.append(weights + [w])
            elif h not in visited and order[h] > order[start]:
                visited.add(h)
                dfs(start, h, visited, weights + [w])
                visited.discard(h)

    for s in vertices:
        dfs(s, s, {s}, [])
    return cycles


def has_weak_improvement_cycle(game):
    edges = [(t, h, w) for t, h, w in brute_edges(game) if w >= 0]
    vertices = sorted({e[0] for e in brute_edges(game)} | {e[1] for e in edges})
    return any(sum(ws) > 0 for ws in simple_cycles(vertices, edges))


def brute_dominated(game, player):
    counts = game.action_counts
    others = [range(k) for j, k in enumerate(counts) if j != player]
    out = set()
    for a in range(counts[player]):
        for b in range(counts[player]):
            if a == b:
                continue
            if all(
                game.utility(player, rest[:player] + (b,) + rest[player:])
                > game.utility(player, rest[:player] + (a,) + rest[player:])
                for rest in itertools.product(*others)
            ):
                out.add(a)
    return out


def brute_expectations(game, policy):
    """Per player: expected payoff of each action, and overall expected payoff."""
    counts = game.action_counts
    n = len(counts)
    per_action, overall = [], []
    for i in range(n):
        vals = np.zeros(counts[i])
        for k in range(counts[i]):
            for prof in itertools.product(*(range(c) for c in counts)):
                if prof[i] != k:
                    continue
                prob = 1.0
                for j in range(n):
                    if j != i:
                        prob *= policy[j][prof[j]]
                vals[k] += game.utility(i, prof) * prob
        total = 0.0
        for prof in itertools.product(*(range(c) for c in counts)):
            prob = np.prod([policy[j][prof[j]] for j in range(n)])
            total += game.utility(i, prof) * prob
        per_action.append(vals)
        overall.append(total)
    return per_action, overall


def brute_field(game, policy):
    per_action, overall = brute_expectations(game, policy)
    return [np.asarray(policy[i]) * (per_action[i] - overall[i]) for i in range(len(overall))]


def mixed_games(count, seed=0):
    """Random games cycling through 2x2, 3x3 and 4x4x4 shapes."""
    from ordinal_potential import random_game

    shapes = [(2, 2), (3, 3), (4, 4, 4)]
    return [random_game(shapes[i % 3], seed * 100_000 + i) for i in range(count)]
