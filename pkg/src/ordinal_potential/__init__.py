"""Approximate any finite normal-form game by an ordinal potential game and
compare replicator learning on the original and approximated games."""

from .deviation import (
    Condensation,
    DeviationGraph,
    InvariantViolation,
    admits_ordinal_potential,
    build_deviation_graph,
    condense,
    nonnegative_subgraph,
    pure_nash,
    strict_nash,
    strictly_dominated_actions,
    strongly_connected_components,
    topological_sort,
)
from .estimators import Potentializer, ReplicatorDynamics
from .experiments import (
    ExperimentSpec,
    PairedResult,
    aggregate,
    run_experiment,
    run_paired,
)
from .game import (
    Game,
    GameValidationError,
    bimatrix_game,
    common_interest_game,
    make_game,
    normalize_rewards,
    profile_from_index,
    profile_index,
    random_game,
)
from .potential import (
    PotentialFunction,
    check_proposition,
    compute_potential,
    graph_potential,
    potentialized_game,
    verify_potential,
)
from .replicator import (
    NumericalFailure,
    Policy,
    SimulationConfig,
    SimulationTrace,
    random_policy,
    replicator_field,
    rk4_step,
    simulate,
)

__version__ = "0.1.0"
