"""Gaze-driven marking menus: geometry, selection engine, synthetic-gaze
experiment harness, and a WebSocket session service."""

from ._kernel import BACKEND
from .analysis import (
    CellSummary,
    DispersionSummary,
    dispersion,
    no_significant_decrease,
    summarize,
    two_proportion_z,
    welch_t,
)
from .engine import (
    BACK_TAKEN,
    CANCELLED,
    DWELL_PROGRESS,
    LEAF_SELECTED,
    LEVEL_SELECTED,
    MENU_OPENED,
    ZONE_ENTERED,
    ZONE_EXITED,
    AnchorView,
    GazeSample,
    Mode,
    Session,
    SessionConfig,
    SessionEvent,
    SessionState,
    Technique,
    open_session,
)
from .errors import (
    ConfigurationError,
    InfeasiblePathRequest,
    LayoutError,
    SessionStateError,
)
from .geometry import LayoutParams, LayoutViolation, validate_layout
from .harness import (
    CellKey,
    ExperimentConfig,
    TrialRecord,
    read_trials_jsonl,
    run_experiment,
    run_trial,
)
from .menu import (
    ItemPath,
    MenuItem,
    MenuSpec,
    back_index,
    build_menu,
    classify_bends,
    path_pool_size,
    sample_target_paths,
)
from .synth import (
    Expertise,
    Fixation,
    FixationDwells,
    NoiseProfile,
    SampleStream,
    Scanpath,
    ScreenResult,
    nine_point_screen,
    plan_scanpath,
    saccade_duration_ms,
    synthesize,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BACK_TAKEN",
    "CANCELLED",
    "DWELL_PROGRESS",
    "LEAF_SELECTED",
    "LEVEL_SELECTED",
    "MENU_OPENED",
    "ZONE_ENTERED",
    "ZONE_EXITED",
    "AnchorView",
    "CellKey",
    "CellSummary",
    "ConfigurationError",
    "DispersionSummary",
    "Expertise",
    "ExperimentConfig",
    "Fixation",
    "FixationDwells",
    "GazeSample",
    "InfeasiblePathRequest",
    "ItemPath",
    "LayoutError",
    "LayoutParams",
    "LayoutViolation",
    "MenuItem",
    "MenuSpec",
    "Mode",
    "NoiseProfile",
    "SampleStream",
    "Scanpath",
    "ScreenResult",
    "Session",
    "SessionConfig",
    "SessionEvent",
    "SessionState",
    "SessionStateError",
    "Technique",
    "TrialRecord",
    "back_index",
    "build_menu",
    "classify_bends",
    "dispersion",
    "nine_point_screen",
    "no_significant_decrease",
    "open_session",
    "path_pool_size",
    "plan_scanpath",
    "read_trials_jsonl",
    "run_experiment",
    "run_trial",
    "saccade_duration_ms",
    "sample_target_paths",
    "summarize",
    "synthesize",
    "two_proportion_z",
    "validate_layout",
    "welch_t",
    "__version__",
]
