"""Finite normal-form games stored as flat utility tensors.

Joint action profiles are indexed in mixed radix with player 0 as the most
significant digit, which is the C-order layout of a numpy array of shape
``action_counts``.  The same layout is used by the JSON file format.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

#: Bit generator used for every random draw in the package.
RNG_ALGORITHM = "PCG64"


class GameValidationError(ValueError):
    """Raised when a game, profile or policy violates its invariants."""


@dataclass(frozen=True, eq=False)
class Game:
    """A finite game in normal form.

    Attributes
    ----------
    num_players : int
    action_counts : tuple of int
        Number of actions of each player.
    utilities : ndarray of shape (num_players, num_profiles)
        Row ``i`` is the flat utility tensor of player ``i``.  Read-only.
    """

    num_players: int
    action_counts: tuple[int, ...]
    utilities: np.ndarray

    @property
    def num_profiles(self) -> int:
        return int(self.utilities.shape[1])

    @property
    def shape(self) -> tuple[int, ...]:
        return self.action_counts

    def payoff_tensor(self, player: int) -> np.ndarray:
        """Utility of ``player`` as an array of shape ``action_counts``."""
        return self.utilities[player].reshape(self.action_counts)

    def utility(self, player: int, profile: Sequence[int]) -> float:
        return float(self.utilities[player, profile_index(profile, self.action_counts)])

    def profiles(self):
        """Iterate over all joint action profiles in index order."""
        for index in range(self.num_profiles):
            yield profile_from_index(index, self.action_counts)

    def to_dict(self) -> dict:
        return {
            "num_players": self.num_players,
            "action_counts": list(self.action_counts),
            "utilities": [[float(x) for x in row] for row in self.utilities],
        }

    def __eq__(self, other):
        if not isinstance(other, Game):
            return NotImplemented
        return (
            self.action_counts == other.action_counts
            and np.array_equal(self.utilities, other.utilities)
        )

    def __repr__(self):
        dims = "x".join(str(k) for k in self.action_counts)
        return f"Game({dims}, num_players={self.num_players})"


def make_game(num_players, action_counts, utilities) -> Game:
    """Validate the inputs and build a :class:`Game`.

    ``utilities`` holds one flat tensor per player (any nested sequence or
    array whose rows flatten to ``prod(action_counts)`` entries).  Values are
    stored as float64 without any other modification.
    """
    num_players = int(num_players)
    if num_players < 1:
        raise GameValidationError(f"num_players must be >= 1, got {num_players}")
    action_counts = tuple(int(k) for k in action_counts)
    if len(action_counts) != num_players:
        raise GameValidationError(
            f"action_counts has {len(action_counts)} entries for {num_players} players"
        )
    for player, k in enumerate(action_counts):
        if k < 1:
            raise GameValidationError(f"player {player} has {k} actions; need >= 1")
    size = math.prod(action_counts)

    if len(utilities) != num_players:
        raise GameValidationError(
            f"expected {num_players} utility tensors, got {len(utilities)}"
        )
    rows = []
    for player, tensor in enumerate(utilities):
        row = np.asarray(tensor, dtype=np.float64).reshape(-1)
        if row.size != size:
            raise GameValidationError(
                f"utility tensor of player {player} has length {row.size}, expected {size}"
            )
        bad = np.flatnonzero(~np.isfinite(row))
        if bad.size:
            raise GameValidationError(
                f"utility tensor of player {player} has non-finite value at index {bad[0]}"
            )
        rows.append(row)
    table = np.array(rows, dtype=np.float64).reshape(num_players, size)
    table.setflags(write=False)
    return Game(num_players, action_counts, table)


def common_interest_game(action_counts, values) -> Game:
    """Game in which every player receives ``values``."""
    values = np.asarray(values, dtype=np.float64).reshape(-1)
    n = len(action_counts)
    return make_game(n, action_counts, [values] * n)


def bimatrix_game(row_payoffs, col_payoffs) -> Game:
    """Two-player game from row and column payoff matrices."""
    row = np.asarray(row_payoffs, dtype=np.float64)
    col = np.asarray(col_payoffs, dtype=np.float64)
    if row.shape != col.shape or row.ndim != 2:
        raise GameValidationError(
            f"payoff matrices must share a 2-d shape, got {row.shape} and {col.shape}"
        )
    return make_game(2, row.shape, [row.ravel(), col.ravel()])


def profile_index(profile: Sequence[int], action_counts: Sequence[int]) -> int:
    """Flat index of ``profile``; player 0 is the most significant digit."""
    if len(profile) != len(action_counts):
        raise GameValidationError(
            f"profile {tuple(profile)} has wrong length for {len(action_counts)} players"
        )
    index = 0
    for player, (action, k) in enumerate(zip(profile, action_counts)):
        action = int(action)
        if not 0 <= action < k:
            raise GameValidationError(
                f"action {action} of player {player} out of range [0, {k})"
            )
        index = index * k + action
    return index


def profile_from_index(index: int, action_counts: Sequence[int]) -> tuple[int, ...]:
    """Inverse of :func:`profile_index`."""
    size = math.prod(action_counts)
    index = int(index)
    if not 0 <= index < size:
        raise GameValidationError(f"profile index {index} out of range [0, {size})")
    actions = []
    for k in reversed(action_counts):
        index, action = divmod(index, k)
        actions.append(action)
    return tuple(reversed(actions))


def random_game(action_counts, seed=None) -> Game:
    """Draw every utility independently and uniformly from ``{1, ..., |A|}``.

    ``|A|`` is the number of joint action profiles.  Draws use a PCG64
    generator seeded with ``seed``.
    """
    action_counts = tuple(int(k) for k in action_counts)
    if not action_counts:
        raise GameValidationError("action_counts must be nonempty")
    size = math.prod(action_counts)
    rng = np.random.Generator(np.random.PCG64(seed))
    draws = rng.integers(1, size, size=(len(action_counts), size), endpoint=True)
    return make_game(len(action_counts), action_counts, draws.astype(np.float64))


def normalize_rewards(game: Game) -> Game:
    """Jointly rescale all utilities to [0, 1]; a constant game maps to zeros."""
    low = game.utilities.min()
    high = game.utilities.max()
    if low < high:
        scaled = (game.utilities - low) / (high - low)
    else:
        scaled = np.zeros_like(game.utilities)
    return make_game(game.num_players, game.action_counts, scaled)


def load_game(path) -> Game:
    with open(path) as fh:
        data = json.load(fh)
    return game_from_dict(data)


def game_from_dict(data: dict) -> Game:
    try:
        return make_game(data["num_players"], data["action_counts"], data["utilities"])
    except KeyError as exc:
        raise GameValidationError(f"game file is missing key {exc.args[0]!r}") from None


def save_game(game: Game, path) -> None:
    Path(path).write_text(json.dumps(game.to_dict(), indent=2) + "\n")
