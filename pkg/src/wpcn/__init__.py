"""Max-min throughput and time allocation for a two-user wireless-powered network.

Two energy-harvesting users X and Y charge from an energy node, exchange
their messages and transmit jointly (STBC or distributed beamforming) to a
destination node, which may also jointly decode the overheard exchange.
"""

from .channel import (
    ChannelSet,
    CoefficientSet,
    Geometry,
    SystemParams,
    coefficients,
    harvested_energy,
    path_loss_gain,
    unit_instance,
)
from .rates import (
    ContractError,
    Direction,
    RatePair,
    Scheme,
    TimeAllocation,
    benchmark_rates,
    common_throughput,
    cooperative_rates,
    exchange_rates,
    joint_rates,
)
from .solver import (
    SolveResult,
    SolverConfig,
    solve,
    solve_dtb_jd,
    solve_dtb_njd,
    solve_noncoop,
    solve_relay,
    solve_stbc_jd,
    solve_stbc_njd,
)
from .oracle import oracle_grid

__all__ = [
    "ChannelSet", "CoefficientSet", "Geometry", "SystemParams", "coefficients",
    "harvested_energy", "path_loss_gain", "unit_instance",
    "ContractError", "Direction", "RatePair", "Scheme", "TimeAllocation",
    "benchmark_rates", "common_throughput", "cooperative_rates", "exchange_rates",
    "joint_rates",
    "SolveResult", "SolverConfig", "solve", "solve_dtb_jd", "solve_dtb_njd",
    "solve_noncoop", "solve_relay", "solve_stbc_jd", "solve_stbc_njd",
    "oracle_grid",
]
