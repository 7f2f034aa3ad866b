"""Strategy extraction from symbolic game trajectories."""

from ._stratx import (
    StratxError,
    __version__,
    align,
    align_matrix,
    discover,
    environments,
    extract,
    parse_spec,
    play,
    run_experiment,
    vocabulary,
)

__all__ = [
    "StratxError",
    "__version__",
    "align",
    "align_matrix",
    "discover",
    "environments",
    "extract",
    "parse_spec",
    "play",
    "run_experiment",
    "vocabulary",
]
