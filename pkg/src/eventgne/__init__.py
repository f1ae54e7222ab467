"""Motion segmentation of event-camera data as a sequential multi-player game.

Each player picks a confidence per event; its objective rewards a sharp
image of its events warped by their common least-squares velocity. Players
solve in order, each restricted to events the earlier ones left unclaimed.
"""

from .errors import (
    DegenerateMotionError,
    DegenerateSelectionError,
    EventDataError,
    EventGNEError,
    LevelInfeasibleError,
    OracleSizeError,
    SceneSpecError,
    SolverError,
)
from .events import (
    NOISE_LABEL,
    Circle,
    EventSet,
    SceneSpec,
    filter_time_window,
    load_events,
    random_circle_scene,
    save_events,
    synthesize,
    two_circle_scene,
)
from .imaging import (
    ModelParams,
    WarpedImage,
    entropy,
    exact_objective_batch,
    image_of_warped_events,
    objective,
    objective_gradient,
    objective_terms,
    variance_penalty,
)
from .kinematics import RelaxParams, Theta, estimate_theta, heaviside, heaviside_relaxed, warp
from .solver import (
    EquilibriumResult,
    GAConfig,
    LevelConstraint,
    RefineConfig,
    brute_force_oracle,
    ga_minimize,
    refine,
    solve_level,
    solve_nlevel,
    verify_equilibrium,
)

__version__ = "0.1.0"
