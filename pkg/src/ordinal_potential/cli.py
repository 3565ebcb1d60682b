"""Command line entry point: ``ordinal-potential <command> ...``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from .deviation import build_deviation_graph, nonnegative_subgraph, to_dot
from .experiments import ExperimentSpec, parse_shape, run_experiment, write_outputs
from .game import GameValidationError, load_game, normalize_rewards, random_game, save_game
from .potential import compute_potential, potential_report, potentialized_game
from .replicator import SimulationConfig, random_policy, simulate
from .validation import check_same_shape


def _sidecar(path: Path, suffix: str) -> Path:
    return path.with_name(path.stem + suffix)


def cmd_potentialize(args):
    path = Path(args.game)
    game = load_game(path)
    phi = compute_potential(game)
    out = Path(args.out) if args.out else _sidecar(path, ".potentialized.json")
    report = Path(args.report) if args.report else _sidecar(path, ".report.json")
    save_game(potentialized_game(game, phi), out)
    report.write_text(json.dumps(potential_report(game, phi), indent=2) + "\n")
    print(f"wrote {out} and {report}")


def cmd_simulate(args):
    path = Path(args.game)
    game = load_game(path)
    reward = load_game(args.reward_game) if args.reward_game else game
    check_same_shape(game, reward, "reward game")
    if not args.no_normalize:
        game, reward = normalize_rewards(game), normalize_rewards(reward)
    config = SimulationConfig(step_size=args.step_size, max_steps=args.steps)
    start = random_policy(game.action_counts, args.seed)
    trace = simulate(game, start, config, reward_game=reward, record_stride=None)

    out_dir = Path(args.out) if args.out else path.parent
    out_dir.mkdir(parents=True, exist_ok=True)
    trace_path = out_dir / (path.stem + ".trace.csv")
    with open(trace_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step", "beta", "rho"])
        for t, (b, r) in enumerate(zip(trace.beta, trace.rho), start=1):
            writer.writerow([t, repr(float(b)), repr(float(r))])
    policy_path = out_dir / (path.stem + ".policy.json")
    policy_path.write_text(json.dumps({
        "start_policy": start.to_list(),
        "final_policy": trace.final_policy.to_list(),
        "converged": trace.converged,
        "steps_run": trace.steps_run,
        "seed": args.seed,
    }, indent=2) + "\n")
    state = "converged" if trace.converged else "did not converge"
    print(f"{state} after {trace.steps_run} steps; wrote {trace_path} and {policy_path}")


def cmd_experiment(args):
    spec = ExperimentSpec(
        shape=parse_shape(args.shape),
        num_games=args.games,
        master_seed=args.seed,
        sim_config=SimulationConfig(max_steps=args.max_steps),
        independent_starts=args.independent_starts,
        batch_size=args.batch_size,
    )
    summary, results, _ = run_experiment(spec)
    out = write_outputs(args.out, summary, results, per_game_curves=args.per_game_csv)
    print(
        f"potentialized converged {summary['potentialized_convergence_rate']:.1%}, "
        f"original {summary['original_convergence_rate']:.1%}, "
        f"final reward ratio {summary['final_rho_ratio']:.3f}; results in {out}"
    )


def cmd_random(args):
    game = random_game(parse_shape(args.shape), args.seed)
    save_game(game, args.out)
    print(f"wrote {args.out}")


def cmd_dot(args):
    graph = build_deviation_graph(load_game(args.game))
    if args.nonnegative:
        graph = nonnegative_subgraph(graph)
    text = to_dot(graph)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ordinal-potential", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("potentialize", help="potentialize a game file")
    p.add_argument("game")
    p.add_argument("--out", help="potentialized game path")
    p.add_argument("--report", help="report path")
    p.set_defaults(func=cmd_potentialize)

    p = sub.add_parser("simulate", help="run replicator dynamics on a game file")
    p.add_argument("game")
    p.add_argument("--reward-game", help="game whose rewards are reported")
    p.add_argument("--seed", type=int, default=0, help="start policy seed")
    p.add_argument("--steps", type=int, default=100_000, help="maximum RK4 steps")
    p.add_argument("--step-size", type=float, default=1e-2)
    p.add_argument("--no-normalize", action="store_true",
                   help="skip rescaling rewards to [0, 1]")
    p.add_argument("--out", help="output directory (default: next to the game)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("experiment", help="paired original/potentialized runs")
    p.add_argument("--shape", required=True, help="e.g. 10x10 or 4x4x4")
    p.add_argument("--games", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--independent-starts", action="store_true")
    p.add_argument("--max-steps", type=int, default=100_000)
    p.add_argument("--batch-size", type=int, default=100)
    p.add_argument("--per-game-csv", action="store_true")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("random", help="write a random game file")
    p.add_argument("--shape", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_random)

    p = sub.add_parser("dot", help="export a deviation graph in DOT format")
    p.add_argument("game")
    p.add_argument("--nonnegative", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_dot)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        args.func(args)
    except (GameValidationError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
