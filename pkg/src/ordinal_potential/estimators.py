"""scikit-learn style wrappers around potentialization and replicator runs."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .deviation import admits_ordinal_potential
from .game import Game, common_interest_game, normalize_rewards
from .potential import compute_potential, verify_potential
from .replicator import SimulationConfig, random_policy, simulate
from .validation import check_game, check_policy, check_same_shape


class Potentializer(TransformerMixin, BaseEstimator):
    """Replace every player's utility by an ordinal potential of the game.

    Parameters
    ----------
    tiebreak : {"lowest", "highest"}
        Which ready component the topological sort visits first.  The
        resulting potential does not depend on it.
    normalize : bool
        Rescale the transformed game jointly to [0, 1].

    Attributes
    ----------
    potential_ : PotentialFunction
    n_components_ : int
        Number of strongly connected components of the nonnegative
        deviation graph.
    admits_ordinal_potential_ : bool
        Whether the fitted game already was an ordinal potential game.
    action_counts_ : tuple of int
    """

    def __init__(self, tiebreak="lowest", normalize=False):
        self.tiebreak = tiebreak
        self.normalize = normalize

    def fit(self, X, y=None):
        if self.tiebreak not in ("lowest", "highest"):
            raise ValueError(f"tiebreak must be 'lowest' or 'highest', got {self.tiebreak!r}")
        game = check_game(X)
        self.potential_ = compute_potential(game, reverse_tiebreak=self.tiebreak == "highest")
        self.n_components_ = self.potential_.condensation.num_components
        self.admits_ordinal_potential_ = admits_ordinal_potential(game)
        self.action_counts_ = game.action_counts
        self._fitted_game = game
        return self

    def transform(self, X) -> Game:
        check_is_fitted(self, "potential_")
        game = check_game(X)
        check_same_shape(self._fitted_game, game)
        if game != self._fitted_game:
            raise ValueError("transform expects the game the potentializer was fitted on")
        out = common_interest_game(game.action_counts, self.potential_.values)
        return normalize_rewards(out) if self.normalize else out

    def verify(self):
        """Structured report of the potential's guarantees on the fitted game."""
        check_is_fitted(self, "potential_")
        return verify_potential(self._fitted_game, self.potential_)


class ReplicatorDynamics(BaseEstimator):
    """Simulated learning on a game via the replicator equation.

    ``fit`` integrates from ``start`` (or a uniformly random policy drawn
    with ``random_state``) until the policy settles or ``max_steps`` is hit.
    """

    def __init__(
        self,
        step_size=1e-2,
        beta_threshold=1e-9,
        patience_steps=1000,
        max_steps=100_000,
        normalize=True,
        random_state=None,
        record_stride=10,
    ):
        self.step_size = step_size
        self.beta_threshold = beta_threshold
        self.patience_steps = patience_steps
        self.max_steps = max_steps
        self.normalize = normalize
        self.random_state = random_state
        self.record_stride = record_stride

    def _config(self):
        return SimulationConfig(
            step_size=self.step_size,
            beta_threshold=self.beta_threshold,
            patience_steps=self.patience_steps,
            max_steps=self.max_steps,
        )

    def fit(self, X, y=None, reward_game=None, start=None):
        """Run the dynamics on ``X``; ``reward_game`` is where rewards are measured."""
        game = check_game(X)
        reward = game if reward_game is None else check_game(reward_game)
        check_same_shape(game, reward, "reward game")
        if self.normalize:
            game, reward = normalize_rewards(game), normalize_rewards(reward)
        if start is None:
            start = random_policy(game.action_counts, self.random_state)
        start = check_policy(start, game.action_counts)
        self.trace_ = simulate(
            game, start, self._config(), reward_game=reward,
            record_stride=self.record_stride,
        )
        self.converged_ = self.trace_.converged
        self.n_steps_ = self.trace_.steps_run
        self.policy_ = self.trace_.final_policy
        return self

    def predict_proba(self, X=None):
        """Final mixed strategy of every player."""
        check_is_fitted(self, "policy_")
        return [np.array(p) for p in self.policy_.per_player]

    def predict(self, X=None):
        """Most likely action of every player under the final policy."""
        return tuple(int(np.argmax(p)) for p in self.predict_proba())

    def score(self, X=None, y=None):
        """Average reward at the final step."""
        check_is_fitted(self, "trace_")
        return float(self.trace_.rho[-1])
