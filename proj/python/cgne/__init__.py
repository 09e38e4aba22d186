"""Snow-crystal automaton toolkit.

Thin wrapper over the C++ core. Frames are (T, side, side) uint8 arrays in
wedge coordinates, row i and column j.
"""

from ._core import (
    BoundaryMode,
    DegenerateRun,
    Error,
    FormatError,
    InvalidArgument,
    InvariantViolation,
    LcaParams,
    MorphologySample,
    RunConfig,
    SolverError,
    SymmetryViolation,
    Trajectory,
    TrajectorySource,
    TruncationError,
    UnderpopulatedBin,
    WedgeEdges,
    cli,
    decode_trajectory,
    default_params,
    default_run_config,
    downsample,
    encode_trajectory,
    ewd,
    features,
    read_trajectory,
    reconstruct,
    run,
    trajectory_file_size,
    uniform_edges,
    w2,
    write_trajectory,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
