"""Jump-driven SDEs: model specs, the Euler engine, paths and the model zoo."""

from .engine import DIVERGENCE_GUARD, run, time_grid
from .model import LipschitzBounds, ModelSpec
from .paths import PathRecord, exit_time, first_jump_time, integrate, integrate_truncated
from .zoo import REGISTRY, frame_kappa, make_model

__all__ = [
    "DIVERGENCE_GUARD", "run", "time_grid", "LipschitzBounds", "ModelSpec", "PathRecord",
    "exit_time", "first_jump_time", "integrate", "integrate_truncated", "REGISTRY",
    "frame_kappa", "make_model",
]
