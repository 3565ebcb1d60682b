"""Replicator dynamics integrated with classical RK4.

The integrator works on a batch of games of equal shape at once: every
state array carries a leading batch axis, and finished instances are
dropped from the batch as the run proceeds.  :func:`simulate` is the
single-game entry point and runs through the same code path.
"""

from __future__ import annotations

import string
from dataclasses import dataclass, field

import numpy as np

from .game import Game, GameValidationError

SIMPLEX_TOL = 1e-9
RENORM_TOL = 1e-12


class NumericalFailure(ArithmeticError):
    """Integration left the simplex in a way that cannot be repaired."""


@dataclass(frozen=True, eq=False)
class Policy:
    """One probability vector per player."""

    per_player: tuple[np.ndarray, ...]

    def __post_init__(self):
        vectors = tuple(np.asarray(p, dtype=np.float64).copy() for p in self.per_player)
        for player, p in enumerate(vectors):
            if p.ndim != 1 or p.size == 0:
                raise GameValidationError(f"policy of player {player} must be a nonempty vector")
            if np.any(p < 0) or np.any(p > 1) or abs(p.sum() - 1) > SIMPLEX_TOL:
                raise GameValidationError(
                    f"policy of player {player} is not a probability vector: {p}"
                )
            p.setflags(write=False)
        object.__setattr__(self, "per_player", vectors)

    @property
    def action_counts(self) -> tuple[int, ...]:
        return tuple(p.size for p in self.per_player)

    def joint(self) -> np.ndarray:
        """Product distribution over flat profile indices."""
        out = np.ones(1)
        for p in self.per_player:
            out = np.multiply.outer(out, p).reshape(-1)
        return out

    def __getitem__(self, player):
        return self.per_player[player]

    def __len__(self):
        return len(self.per_player)

    def to_list(self):
        return [p.tolist() for p in self.per_player]

    @classmethod
    def uniform(cls, action_counts):
        return cls(tuple(np.full(k, 1.0 / k) for k in action_counts))

    @classmethod
    def vertex(cls, profile, action_counts):
        vectors = []
        for a, k in zip(profile, action_counts):
            v = np.zeros(k)
            v[a] = 1.0
            vectors.append(v)
        return cls(tuple(vectors))


@dataclass(frozen=True)
class SimulationConfig:
    step_size: float = 1e-2
    beta_threshold: float = 1e-9
    patience_steps: int = 1000
    max_steps: int = 100_000

    def __post_init__(self):
        for name in ("step_size", "beta_threshold", "patience_steps", "max_steps"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")


@dataclass
class SimulationTrace:
    """Outcome of one replicator run.

    ``beta[t - 1]`` and ``rho[t - 1]`` belong to step ``t``; ``policies`` is
    sampled every ``policy_steps`` (step 0 is the start policy).
    """

    beta: np.ndarray
    rho: np.ndarray
    converged: bool
    steps_run: int
    final_policy: Policy
    policy_steps: list[int] = field(default_factory=list)
    policies: list[Policy] = field(default_factory=list)


def _check_policy(game: Game, policy) -> Policy:
    if not isinstance(policy, Policy):
        policy = Policy(tuple(policy))
    if policy.action_counts != game.action_counts:
        raise GameValidationError(
            f"policy shape {policy.action_counts} does not match game {game.action_counts}"
        )
    return policy


class _Kernel:
    """Contractions of batched payoff tensors against per-player policies.

    ``utilities`` has shape ``(B, n, k_0, ..., k_{n-1})``.
    """

    def __init__(self, action_counts):
        self.n = len(action_counts)
        letters = string.ascii_lowercase[: self.n]
        # per player: opponents contracted one at a time, last axis first
        self.plans = []
        for i in range(self.n):
            plan = []
            axes = letters
            for j in reversed(range(self.n)):
                if j == i:
                    continue
                reduced = axes.replace(letters[j], "")
                plan.append((j, f"z{axes},z{letters[j]}->z{reduced}"))
                axes = reduced
            self.plans.append(plan)

    def action_values(self, utilities, policies):
        """Expected payoff of each own action against the others' mixtures."""
        out = []
        for i, plan in enumerate(self.plans):
            tensor = utilities[:, i]
            for j, spec in plan:
                tensor = np.einsum(spec, tensor, policies[j], optimize=False)
            out.append(tensor)
        return out

    def field(self, utilities, policies):
        values = self.action_values(utilities, policies)
        out = []
        for p, v in zip(policies, values):
            mean = np.einsum("zk,zk->z", p, v)
            out.append(p * (v - mean[:, None]))
        return out

    def mean_reward(self, utilities, policies):
        """Average over players of each player's expected utility."""
        values = self.action_values(utilities, policies)
        total = sum(np.einsum("zk,zk->z", p, v) for p, v in zip(policies, values))
        return total / self.n

    def rk4(self, utilities, policies, h):
        k1 = self.field(utilities, policies)
        k2 = self.field(utilities, [p + 0.5 * h * d for p, d in zip(policies, k1)])
        k3 = self.field(utilities, [p + 0.5 * h * d for p, d in zip(policies, k2)])
        k4 = self.field(utilities, [p + h * d for p, d in zip(policies, k3)])
        raw = [
            p + (h / 6.0) * (a + 2.0 * b + 2.0 * c + d)
            for p, a, b, c, d in zip(policies, k1, k2, k3, k4)
        ]
        return raw


def repair(policies, context=""):
    """Clamp negative mass to zero and renormalize each player's vector.

    Rows that needed no clamping and whose mass is within ``RENORM_TOL`` of
    one are left untouched, so rest points stay bit-exact.
    """
    out = []
    for player, p in enumerate(policies):
        clamped = p < 0
        p = np.where(clamped, 0.0, p)
        total = p.sum(axis=-1, keepdims=True)
        if np.any(~(total > 0)):
            raise NumericalFailure(f"policy of player {player} collapsed to zero mass {context}")
        fix = clamped.any(axis=-1, keepdims=True) | (np.abs(total - 1.0) > RENORM_TOL)
        out.append(np.where(fix, p / total, p))
    return out


def _batched_utilities(games) -> np.ndarray:
    shape = games[0].action_counts
    for g in games:
        if g.action_counts != shape:
            raise GameValidationError("all games in a batch must share one shape")
    return np.stack([g.utilities.reshape((g.num_players,) + shape) for g in games])


def replicator_field(game: Game, policy) -> list[np.ndarray]:
    """Time derivative of every player's mixed strategy."""
    policy = _check_policy(game, policy)
    kernel = _Kernel(game.action_counts)
    batch = [p[None, :] for p in policy.per_player]
    return [d[0] for d in kernel.field(_batched_utilities([game]), batch)]


def rk4_step(game: Game, policy, h: float) -> Policy:
    """One classical RK4 step of size ``h`` followed by simplex repair."""
    policy = _check_policy(game, policy)
    kernel = _Kernel(game.action_counts)
    batch = [p[None, :] for p in policy.per_player]
    raw = kernel.rk4(_batched_utilities([game]), batch, h)
    return Policy(tuple(p[0] for p in repair(raw, f"(step size {h})")))


def random_policy(action_counts, seed=None) -> Policy:
    """Uniform draw from each player's simplex via normalized exponentials."""
    rng = np.random.Generator(np.random.PCG64(seed))
    vectors = []
    for k in action_counts:
        e = rng.standard_exponential(int(k))
        vectors.append(e / e.sum())
    return Policy(tuple(vectors))


def simulate_many(
    games,
    starts,
    config: SimulationConfig = SimulationConfig(),
    reward_games=None,
    budgets=None,
    record_stride: int | None = None,
) -> list[SimulationTrace]:
    """Run replicator dynamics on several same-shaped games side by side.

    Parameters
    ----------
    games : sequence of Game
        Games whose dynamics are integrated.
    starts : sequence of Policy
        Start policy per game.
    config : SimulationConfig
    reward_games : sequence of Game, optional
        Games against which the average reward is measured; defaults to
        ``games``.
    budgets : sequence of int, optional
        Per-game step limits, each capped at ``config.max_steps``.
    record_stride : int, optional
        Keep every ``record_stride``-th policy; ``None`` keeps only the last.
    """
    games = list(games)
    if not games:
        return []
    starts = [_check_policy(g, s) for g, s in zip(games, starts)]
    if len(starts) != len(games):
        raise ValueError("need one start policy per game")
    reward_games = games if reward_games is None else list(reward_games)
    size = len(games)
    if budgets is None:
        budgets = np.full(size, config.max_steps, dtype=np.int64)
    else:
        budgets = np.minimum(np.asarray(budgets, dtype=np.int64), config.max_steps)
    if np.any(budgets < 1):
        raise ValueError("step budgets must be >= 1")

    kernel = _Kernel(games[0].action_counts)
    utilities = _batched_utilities(games)
    rewards = _batched_utilities(reward_games)
    if rewards.shape != utilities.shape:
        raise GameValidationError("reward games must match the simulated games in shape")
    n = kernel.n
    state = [np.stack([s.per_player[i] for s in starts]) for i in range(n)]

    horizon = int(budgets.max())
    beta_all = np.zeros((size, horizon))
    rho_all = np.zeros((size, horizon))
    steps = np.zeros(size, dtype=np.int64)
    converged = np.zeros(size, dtype=bool)
    finals: list = [None] * size
    recorded: list[tuple[list[int], list[Policy]]] = [([], []) for _ in range(size)]
    if record_stride:
        for b in range(size):
            recorded[b][0].append(0)
            recorded[b][1].append(starts[b])

    active = np.arange(size)
    quiet = np.zeros(size, dtype=np.int64)
    h = config.step_size
    t = 0
    while active.size:
        t += 1
        new = repair(kernel.rk4(utilities, state, h), f"at step {t}")
        beta = np.max(
            np.stack([np.linalg.norm(a - b, axis=1) for a, b in zip(new, state)]), axis=0
        )
        rho = kernel.mean_reward(rewards, new)
        beta_all[active, t - 1] = beta
        rho_all[active, t - 1] = rho
        state = new
        quiet = np.where(beta <= config.beta_threshold, quiet + 1, 0)

        if record_stride and t % record_stride == 0:
            for j, b in enumerate(active):
                recorded[b][0].append(t)
                recorded[b][1].append(Policy(tuple(p[j] for p in state)))

        done_converged = quiet > config.patience_steps
        done = done_converged | (budgets[active] <= t)
        if done.any():
            for j in np.flatnonzero(done):
                b = active[j]
                steps[b] = t
                converged[b] = done_converged[j]
                finals[b] = Policy(tuple(p[j] for p in state))
            keep = ~done
            active = active[keep]
            quiet = quiet[keep]
            state = [p[keep] for p in state]
            utilities = utilities[keep]
            rewards = rewards[keep]

    traces = []
    for b in range(size):
        traces.append(SimulationTrace(
            beta=beta_all[b, : steps[b]].copy(),
            rho=rho_all[b, : steps[b]].copy(),
            converged=bool(converged[b]),
            steps_run=int(steps[b]),
            final_policy=finals[b],
            policy_steps=recorded[b][0],
            policies=recorded[b][1],
        ))
    return traces


def simulate(
    game: Game,
    start,
    config: SimulationConfig = SimulationConfig(),
    reward_game: Game | None = None,
    max_steps: int | None = None,
    record_stride: int | None = 10,
) -> SimulationTrace:
    """Integrate until the policy has been still for ``patience_steps`` steps.

    A step counts as still when the largest per-player Euclidean move is at
    most ``beta_threshold``.  The run is declared converged once more than
    ``patience_steps`` consecutive still steps have been seen and stops at
    ``max_steps`` (or ``config.max_steps``) otherwise.
    """
    budgets = None if max_steps is None else [max_steps]
    return simulate_many(
        [game], [start], config,
        reward_games=None if reward_game is None else [reward_game],
        budgets=budgets, record_stride=record_stride,
    )[0]
