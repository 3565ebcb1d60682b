"""Potentialization: an ordinal potential built on the condensation of the
nonnegative deviation graph, and checks of its structural guarantees."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .deviation import (
    admits_ordinal_potential,
    Condensation,
    DeviationGraph,
    build_deviation_graph,
    condense,
    nonnegative_subgraph,
    pure_nash,
    strict_nash,
    strictly_dominated_actions,
    topological_sort,
)
from .game import Game, common_interest_game, profile_from_index, profile_index


@dataclass(frozen=True, eq=False)
class PotentialFunction:
    """Potential values per profile together with the condensation behind them."""

    values: np.ndarray
    component_values: np.ndarray
    condensation: Condensation
    order: list[int]

    @property
    def component_of(self) -> np.ndarray:
        return self.condensation.component_of


def propagate(condensation: Condensation, order) -> np.ndarray:
    """Longest-path values over the condensation DAG, sources pinned to 0."""
    incoming = condensation.incoming()
    values = np.zeros(condensation.num_components)
    for c in order:
        preds = incoming[c]
        if preds:
            values[c] = max(values[t] + w for t, w in preds)
    return values


def graph_potential(graph: DeviationGraph, reverse_tiebreak: bool = False) -> PotentialFunction:
    """Potential of an arbitrary nonnegative weighted digraph.

    The graph is condensed, its components are visited in topological order
    and each receives the best ``predecessor value + edge weight``.
    """
    cond = condense(graph)
    order = topological_sort(cond, reverse_tiebreak=reverse_tiebreak)
    comp_values = propagate(cond, order)
    values = comp_values[cond.component_of]
    return PotentialFunction(values, comp_values, cond, order)


def compute_potential(game: Game, reverse_tiebreak: bool = False) -> PotentialFunction:
    return graph_potential(
        nonnegative_subgraph(build_deviation_graph(game)), reverse_tiebreak
    )


def potentialized_game(game: Game, phi: PotentialFunction | None = None) -> Game:
    """Common-interest game in which every player receives the potential."""
    if phi is None:
        phi = compute_potential(game)
    return common_interest_game(game.action_counts, phi.values)


@dataclass
class CheckResult:
    name: str
    passed: bool
    witness: dict | None = None

    def to_dict(self):
        return {"name": self.name, "passed": self.passed, "witness": self.witness}


@dataclass
class Report:
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name) -> CheckResult:
        for check in self.checks:
            if check.name == name:
                return check
        raise KeyError(name)

    def to_dict(self):
        return {"passed": self.passed, "checks": [c.to_dict() for c in self.checks]}


def _edge_witness(graph, e, **extra):
    return {
        "tail": int(graph.tails[e]),
        "head": int(graph.heads[e]),
        "weight": float(graph.weights[e]),
        "deviator": int(graph.deviators[e]),
        **extra,
    }


def verify_graph_potential(graph: DeviationGraph, values) -> Report:
    """Check ``values`` against a full weighted graph.

    1. constant on every SCC of the nonnegative subgraph;
    2. rises by at least its weight along each nonnegative edge that
       joins two different SCCs;
    3. minimal: sources are 0, every other component attains its value
       through some incoming condensation edge;
    4. ordinal: strict increase along an edge iff the edge weight is positive.
    """
    values = np.asarray(values, dtype=np.float64)
    nonneg = nonnegative_subgraph(graph)
    cond = condense(nonneg)
    report = Report()

    witness = None
    for c, members in enumerate(cond.components):
        vals = values[members]
        if np.any(vals != vals[0]):
            j = int(np.flatnonzero(vals != vals[0])[0])
            witness = {"component": c, "vertices": [int(members[0]), int(members[j])],
                       "values": [float(vals[0]), float(vals[j])]}
            break
    report.checks.append(CheckResult("scc_constancy", witness is None, witness))

    crossing = cond.component_of[nonneg.tails] != cond.component_of[nonneg.heads]
    slack = values[nonneg.heads] - values[nonneg.tails] - nonneg.weights
    bad = np.flatnonzero((slack < 0) & crossing)
    report.checks.append(CheckResult(
        "edge_slack", bad.size == 0,
        _edge_witness(nonneg, bad[0], slack=float(slack[bad[0]])) if bad.size else None,
    ))

    comp_values = np.array([values[m[0]] for m in cond.components])
    witness = None
    for c, preds in enumerate(cond.incoming()):
        if not preds:
            if comp_values[c] != 0:
                witness = {"component": c, "value": float(comp_values[c]), "source": True}
                break
        elif not any(comp_values[t] + w == comp_values[c] for t, w in preds):
            best = max(comp_values[t] + w for t, w in preds)
            witness = {"component": c, "value": float(comp_values[c]),
                       "best_incoming": float(best), "source": False}
            break
    report.checks.append(CheckResult("bellman_minimality", witness is None, witness))

    diff = values[graph.heads] - values[graph.tails]
    bad = np.flatnonzero((diff > 0) != (graph.weights > 0))
    report.checks.append(CheckResult(
        "ordinal_potential", bad.size == 0,
        _edge_witness(graph, bad[0], potential_difference=float(diff[bad[0]]))
        if bad.size else None,
    ))
    return report


def verify_potential(game: Game, phi: PotentialFunction) -> Report:
    return verify_graph_potential(build_deviation_graph(game), phi.values)


def check_proposition(game: Game, potentialized: Game | None = None) -> Report:
    """Strict equilibria survive; no surviving equilibrium uses a strictly dominated action.

    The second check can fail: when a dominated profile and its improving
    deviation lie in one strongly connected component the potential is flat
    between them.  The witness records the dominating action and whether it
    shares the component (``same_component``) when the potential is computed
    here.
    """
    phi = None
    if potentialized is None:
        phi = compute_potential(game)
        potentialized = potentialized_game(game, phi)
    new_nash = pure_nash(potentialized)
    report = Report()

    lost = sorted(strict_nash(game) - new_nash)
    report.checks.append(CheckResult(
        "strict_nash_preserved", not lost,
        {"profile": list(lost[0])} if lost else None,
    ))

    dominated = [strictly_dominated_actions(game, i) for i in range(game.num_players)]
    witness = None
    for profile in sorted(new_nash):
        for player, action in enumerate(profile):
            if action in dominated[player]:
                witness = {"profile": list(profile), "player": player, "action": action}
                break
        if witness:
            break
    if witness and phi is not None:
        witness.update(_dominance_detail(game, phi, witness))
    report.checks.append(CheckResult("no_dominated_in_nash", witness is None, witness))
    return report


def _dominance_detail(game, phi, witness):
    counts = game.action_counts
    player, action = witness["player"], witness["action"]
    u = np.moveaxis(game.payoff_tensor(player), player, 0).reshape(counts[player], -1)
    profile = list(witness["profile"])
    here = phi.component_of[profile_index(profile, counts)]
    for alt in range(counts[player]):
        if alt != action and np.all(u[alt] > u[action]):
            profile[player] = alt
            there = phi.component_of[profile_index(profile, counts)]
            return {"dominating_action": alt, "same_component": bool(here == there)}
    return {}


def potential_report(game: Game, phi: PotentialFunction) -> dict:
    """JSON-ready summary used by the command line interface."""
    return {
        "action_counts": list(game.action_counts),
        "potential": [float(v) for v in phi.values],
        "component_of": [int(c) for c in phi.component_of],
        "component_values": [float(v) for v in phi.component_values],
        "topological_order": [int(c) for c in phi.order],
        "condensation_edges": [list(e) for e in phi.condensation.dag_edges],
        "admits_ordinal_potential": admits_ordinal_potential(game),
        "verification": verify_potential(game, phi).to_dict(),
        "profiles": [list(profile_from_index(i, game.action_counts))
                     for i in range(game.num_profiles)],
    }
