"""Coercion of loosely typed inputs into games and policies."""

from __future__ import annotations

from collections.abc import Mapping
from pathlib import Path

import numpy as np

from .game import Game, GameValidationError, game_from_dict, load_game, make_game
from .replicator import Policy


def check_game(X) -> Game:
    """Return ``X`` as a :class:`Game`.

    Accepts a :class:`Game`, a mapping in the JSON file layout, a path to a
    game file, or an array of shape ``(n, k_0, ..., k_{n-1})`` holding one
    payoff tensor per player.
    """
    if isinstance(X, Game):
        return X
    if isinstance(X, Mapping):
        return game_from_dict(X)
    if isinstance(X, (str, Path)):
        return load_game(X)
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim < 2 or arr.shape[0] != arr.ndim - 1:
        raise GameValidationError(
            "array input must have shape (n, k_0, ..., k_{n-1}); got " f"{arr.shape}"
        )
    n = arr.shape[0]
    return make_game(n, arr.shape[1:], arr.reshape(n, -1))


def check_same_shape(game: Game, other: Game, what: str = "game") -> None:
    if game.action_counts != other.action_counts:
        raise GameValidationError(
            f"{what} has shape {other.action_counts}, expected {game.action_counts}"
        )


def check_policy(policy, action_counts) -> Policy:
    """Return ``policy`` as a :class:`Policy` matching ``action_counts``."""
    if not isinstance(policy, Policy):
        policy = Policy(tuple(policy))
    if policy.action_counts != tuple(action_counts):
        raise GameValidationError(
            f"policy shape {policy.action_counts} does not match {tuple(action_counts)}"
        )
    return policy
