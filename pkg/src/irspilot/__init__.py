"""Pilot design and noiseless channel recovery for IRS-assisted multiuser uplink."""

from ._accel import USE_NUMBA
from .airsim import RxBlock, synthesize_rx
from .channel_model import (
    ChannelRealization,
    GeometryConfig,
    SystemDims,
    effective_channels,
    make_rng,
    path_loss_linear,
    place_users,
    sample_channels,
    true_lambdas,
)
from .config import ConfigError, ExperimentConfig, load_config, parse_config
from .estimator import (
    EstimationResult,
    oracle_phase3_ls,
    reconstruct_channels,
    run_benchmark,
    run_three_phase,
)
from .numerics import RankDeficiencyError, dft_matrix, numerical_rank, pinv_solve
from .scheduler import (
    Phase3Plan,
    PilotLengths,
    PilotSchedule,
    assemble_schedule,
    benchmark_schedule,
    build_index_sets,
    dump_schedule,
    min_pilot_lengths,
    parse_schedule,
)

__version__ = "0.1.0"
