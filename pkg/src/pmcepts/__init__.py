"""PAPR reduction for OFDM by partial transmit sequences.

Phase-factor searches: exhaustive (OPTS), iterative flipping (IPTS),
cross-entropy (CE) and parametric minimum cross-entropy (PMCE), plus a
Monte-Carlo harness for CCDF and search-count experiments.
"""
from .errors import (
    BudgetError,
    ConfigurationError,
    DegenerateInputError,
    InputSizeError,
    LambdaSolverError,
    PreconditionError,
    PtsError,
)
from .harness import (
    CcdfCurve,
    CcdfResult,
    ExperimentConfig,
    SearchStats,
    run_ccdf,
    run_search_count,
    seed_stream,
    simulate_symbol,
)
from .ofdm import PaprValue, idft_oversampled, modulate_qpsk, papr, random_qpsk_block
from .optimizers import (
    OptResult,
    PmceConfig,
    ce_optimize,
    elite_gamma,
    ipts,
    opts_exhaustive,
    pmce_optimize,
    smooth,
    solve_lambda,
    update_p,
)
from .pts import Partition, SubblockSet, combine, make_partition, objective, split_and_transform

__version__ = "0.1.0"
