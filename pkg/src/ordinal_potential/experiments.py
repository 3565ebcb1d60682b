"""Paired learning experiments on random games.

Each pair runs the replicator dynamics first on the normalized
potentialized game until it settles, then on the normalized original game
for at most the same number of steps.  Average reward is always measured
against the normalized original game.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .game import RNG_ALGORITHM, Game, normalize_rewards, random_game
from .potential import potentialized_game
from .replicator import (
    NumericalFailure,
    SimulationConfig,
    random_policy,
    simulate_many,
)

log = logging.getLogger(__name__)

GAME_STREAM, START_STREAM, ORIGINAL_START_STREAM = 0, 1, 2


def derive_seed(master_seed: int, index: int, stream: int) -> int:
    """64-bit seed for game ``index`` and ``stream``, independent of run order."""
    seq = np.random.SeedSequence([int(master_seed), int(index), int(stream)])
    return int(seq.generate_state(1, np.uint64)[0])


def parse_shape(text: str) -> tuple[int, ...]:
    """``"10x10"`` -> ``(10, 10)``."""
    try:
        shape = tuple(int(part) for part in text.lower().split("x"))
    except ValueError:
        raise ValueError(f"bad shape {text!r}; expected e.g. 10x10 or 4x4x4") from None
    if not shape or min(shape) < 1:
        raise ValueError(f"bad shape {text!r}")
    return shape


@dataclass
class ExperimentSpec:
    shape: tuple[int, ...]
    num_games: int = 100
    master_seed: int = 0
    sim_config: SimulationConfig = field(default_factory=SimulationConfig)
    independent_starts: bool = False
    batch_size: int = 100

    def __post_init__(self):
        self.shape = tuple(int(k) for k in self.shape)
        if self.num_games < 1:
            raise ValueError(f"num_games must be >= 1, got {self.num_games}")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")

    def to_dict(self):
        return {
            "shape": list(self.shape),
            "num_games": self.num_games,
            "master_seed": self.master_seed,
            "sim_config": asdict(self.sim_config),
            "independent_starts": self.independent_starts,
            "rng": RNG_ALGORITHM,
        }


@dataclass
class PairedResult:
    game_seed: int | None
    start_seed: int | None
    potentialized_converged: bool
    potentialized_steps: int
    original_converged: bool
    original_steps: int
    beta_potentialized: np.ndarray = field(repr=False)
    beta_original: np.ndarray = field(repr=False)
    rho_potentialized: np.ndarray = field(repr=False)
    rho_original: np.ndarray = field(repr=False)
    original_start_seed: int | None = None
    index: int | None = None
    shape: tuple[int, ...] | None = None

    @property
    def final_rho_potentialized(self) -> float:
        return float(self.rho_potentialized[-1])

    @property
    def final_rho_original(self) -> float:
        return float(self.rho_original[-1])

    def summary(self) -> dict:
        return {
            "index": self.index,
            "shape": None if self.shape is None else list(self.shape),
            "game_seed": self.game_seed,
            "start_seed": self.start_seed,
            "original_start_seed": self.original_start_seed,
            "potentialized_converged": self.potentialized_converged,
            "potentialized_steps": self.potentialized_steps,
            "original_converged": self.original_converged,
            "original_steps": self.original_steps,
            "final_rho_potentialized": self.final_rho_potentialized,
            "final_rho_original": self.final_rho_original,
        }


def run_pairs(games, starts, config=SimulationConfig(), original_starts=None):
    """Paired runs for several same-shaped games, batched per arm."""
    games = list(games)
    starts = list(starts)
    original_starts = starts if original_starts is None else list(original_starts)
    originals = [normalize_rewards(g) for g in games]
    surrogates = [normalize_rewards(potentialized_game(g)) for g in games]

    pot = simulate_many(surrogates, starts, config, reward_games=originals)
    budgets = [trace.steps_run for trace in pot]
    orig = simulate_many(originals, original_starts, config, budgets=budgets)
    return [
        PairedResult(
            game_seed=None, start_seed=None,
            potentialized_converged=p.converged, potentialized_steps=p.steps_run,
            original_converged=o.converged, original_steps=o.steps_run,
            beta_potentialized=p.beta, beta_original=o.beta,
            rho_potentialized=p.rho, rho_original=o.rho,
            shape=g.action_counts,
        )
        for g, p, o in zip(games, pot, orig)
    ]


def run_paired(
    shape=None,
    game_seed=None,
    start_seed=None,
    config: SimulationConfig = SimulationConfig(),
    *,
    game: Game | None = None,
    start=None,
    independent_starts: bool = False,
    original_start_seed=None,
) -> PairedResult:
    """Generate (or take) one game and run both arms on it.

    Both arms share the start policy unless ``independent_starts`` is set,
    in which case the original arm draws its own from ``original_start_seed``.
    """
    if game is None:
        game = random_game(shape, game_seed)
    shape = game.action_counts
    if start is None:
        start = random_policy(shape, start_seed)
    original_start = None
    if independent_starts:
        original_start = [random_policy(shape, original_start_seed)]
    result = run_pairs([game], [start], config, original_start)[0]
    result.game_seed = game_seed
    result.start_seed = start_seed
    result.original_start_seed = original_start_seed if independent_starts else None
    return result


def _seeds(spec: ExperimentSpec, index: int):
    game_seed = derive_seed(spec.master_seed, index, GAME_STREAM)
    start_seed = derive_seed(spec.master_seed, index, START_STREAM)
    orig_seed = (derive_seed(spec.master_seed, index, ORIGINAL_START_STREAM)
                 if spec.independent_starts else None)
    return game_seed, start_seed, orig_seed


def _run_batch(spec: ExperimentSpec, indices):
    seeds = [_seeds(spec, i) for i in indices]
    games = [random_game(spec.shape, g) for g, _, _ in seeds]
    starts = [random_policy(spec.shape, s) for _, s, _ in seeds]
    orig_starts = None
    if spec.independent_starts:
        orig_starts = [random_policy(spec.shape, o) for _, _, o in seeds]
    results = run_pairs(games, starts, spec.sim_config, orig_starts)
    for i, (g, s, o), r in zip(indices, seeds, results):
        r.index, r.game_seed, r.start_seed, r.original_start_seed = i, g, s, o
    return results


def run_experiment(spec: ExperimentSpec):
    """Run every pair of ``spec``; returns ``(summary, results, failures)``.

    Games are simulated in batches.  A numerical failure inside a batch
    triggers a rerun of that batch one game at a time so the failing games
    can be recorded and excluded.
    """
    results, failures = [], []
    for lo in range(0, spec.num_games, spec.batch_size):
        indices = list(range(lo, min(lo + spec.batch_size, spec.num_games)))
        try:
            results.extend(_run_batch(spec, indices))
        except NumericalFailure:
            log.warning("numerical failure in batch %d..%d; isolating", indices[0], indices[-1])
            for i in indices:
                try:
                    results.extend(_run_batch(spec, [i]))
                except NumericalFailure as exc:
                    g, s, _ = _seeds(spec, i)
                    failures.append({"index": i, "game_seed": g, "start_seed": s,
                                     "error": str(exc)})
        log.info("finished %d/%d games", min(lo + spec.batch_size, spec.num_games),
                 spec.num_games)
    if not results:
        raise NumericalFailure("every game failed; nothing to aggregate")
    summary = aggregate(results)
    summary["spec"] = spec.to_dict()
    summary["excluded"] = failures
    return summary, results, failures


def _pad(series, horizon, fill):
    out = np.full(horizon, fill, dtype=np.float64)
    out[: series.size] = series
    return out


def curves(results, hold_final_rho: bool = True):
    """Per-step mean and standard deviation of both observables for both arms.

    Shorter runs are padded up to the longest potentialized run: policy
    variability with 0 and average reward with the run's last value (or
    with NaN, ignored by the statistics, when ``hold_final_rho`` is off).
    """
    if not results:
        raise ValueError("need at least one result")
    horizon = max(r.potentialized_steps for r in results)
    out = {"step": np.arange(1, horizon + 1)}
    for arm in ("potentialized", "original"):
        beta = np.stack([_pad(getattr(r, f"beta_{arm}"), horizon, 0.0) for r in results])
        rho = np.stack([
            _pad(getattr(r, f"rho_{arm}"), horizon,
                 getattr(r, f"rho_{arm}")[-1] if hold_final_rho else np.nan)
            for r in results
        ])
        out[f"{arm}_beta_mean"] = beta.mean(axis=0)
        out[f"{arm}_beta_std"] = beta.std(axis=0)
        out[f"{arm}_rho_mean"] = np.nanmean(rho, axis=0)
        out[f"{arm}_rho_std"] = np.nanstd(rho, axis=0)
    return out


def beta_below_fraction(curve, after_step: int = 100) -> float:
    """Share of steps past ``after_step`` where the potentialized mean
    policy variability is below the original one."""
    mask = curve["step"] > after_step
    if not mask.any():
        return float("nan")
    below = curve["potentialized_beta_mean"][mask] < curve["original_beta_mean"][mask]
    return float(below.mean())


def aggregate(results, hold_final_rho: bool = True) -> dict:
    """Convergence rates, final mean rewards and their ratio."""
    results = list(results)
    if not results:
        raise ValueError("cannot aggregate an empty result list")
    if len({r.shape for r in results}) != 1:
        raise ValueError("results mix games of different shapes")
    curve = curves(results, hold_final_rho)
    rho_pot = float(np.mean([r.final_rho_potentialized for r in results]))
    rho_orig = float(np.mean([r.final_rho_original for r in results]))
    return {
        "num_results": len(results),
        "potentialized_convergence_rate": float(np.mean(
            [r.potentialized_converged for r in results])),
        "original_convergence_rate": float(np.mean([r.original_converged for r in results])),
        "final_rho_potentialized": rho_pot,
        "final_rho_original": rho_orig,
        "final_rho_ratio": rho_pot / rho_orig if rho_orig != 0 else float("nan"),
        "horizon": int(curve["step"][-1]),
        "beta_below_fraction_after_100": beta_below_fraction(curve),
        "matched_horizon_ok": all(
            r.original_steps <= r.potentialized_steps for r in results),
        "_curves": curve,
    }


def write_outputs(out_dir, summary: dict, results, per_game_curves: bool = False) -> Path:
    """Write ``summary.json``, ``curves.csv`` and ``results.jsonl`` to ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    curve = summary.get("_curves") or curves(results)
    public = {k: v for k, v in summary.items() if not k.startswith("_")}
    (out / "summary.json").write_text(json.dumps(public, indent=2, sort_keys=True) + "\n")

    columns = list(curve)
    with open(out / "curves.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in zip(*(curve[c] for c in columns)):
            writer.writerow([int(row[0])] + [repr(float(x)) for x in row[1:]])

    with open(out / "results.jsonl", "w") as fh:
        for r in sorted(results, key=lambda r: (r.index is None, r.index)):
            fh.write(json.dumps(r.summary(), sort_keys=True) + "\n")

    if per_game_curves:
        runs = out / "runs"
        runs.mkdir(exist_ok=True)
        for r in results:
            name = f"game_{r.index:05d}.csv" if r.index is not None else "game.csv"
            with open(runs / name, "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["step", "arm", "beta", "rho"])
                for arm in ("potentialized", "original"):
                    beta = getattr(r, f"beta_{arm}")
                    rho = getattr(r, f"rho_{arm}")
                    for t, (b, p) in enumerate(zip(beta, rho), start=1):
                        writer.writerow([t, arm, repr(float(b)), repr(float(p))])
    return out
