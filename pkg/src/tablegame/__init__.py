"""Integer feasibility of rational polytopes as a game on integer tables
with fixed margins: encoding, moves, reductions, the 2-way game, exact
action projection, baselines, and IO."""

from .encoder import (
    EncodedInstance,
    RationalLinearSystem,
    compute_bound_U,
    decode_solution,
    encode_plane_sum,
    full_encode,
    reduce_coefficients,
)
from .errors import (
    BudgetExhausted,
    EncodingInfeasibleError,
    IllegalMoveError,
    InvalidInputError,
    InvalidWitnessError,
    MarginMismatchError,
    ProjectionInfeasibleError,
    TableGameError,
)
from .game import (
    GameConfig,
    GameState,
    TableGameEnv,
    Transition,
    generate_instance,
    generate_solvable_instance,
    is_legal,
    is_terminal,
    step,
)
from .moves import (
    TermOrder,
    enumerate_actions_2way,
    enumerate_circuits_2way,
    enumerate_liftings,
    lift_move,
    slice_embed,
    term_compare,
)
from .projection import ProjectionProblem, brute_force_project, project_action
from .reduction import (
    IfpResult,
    enumerate_fiber_2way,
    ifp_solve,
    reduce_table_2way,
    reduce_to_sink,
    replay_path,
)
from .solvers import BfsResult, bfs_solve, greedy_rollout, greedy_step
from .tables import (
    Margins3,
    check_real_feasibility,
    margins_of,
    northwest_corner,
    project_axes,
    project_xz,
    project_yz,
    slice_xy,
)

__version__ = "0.1.0"
