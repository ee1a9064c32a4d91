"""Python surface of the battery arbitrage laboratory.

The heavy lifting lives in the native module `_agentlab`; this package
re-exports it. Build the native module first (see README) and make sure its
directory is on sys.path / PYTHONPATH.
"""

from _agentlab import (  # noqa: F401
    AgentlabError,
    BatteryConfig,
    DpSolution,
    PriceModel,
    __version__,
    analyze_runs,
    complexity_rho,
    expected_reward,
    sample_price_path,
    scan,
    simulate,
    solve_dp,
)

__all__ = [
    "AgentlabError",
    "BatteryConfig",
    "DpSolution",
    "PriceModel",
    "__version__",
    "analyze_runs",
    "complexity_rho",
    "expected_reward",
    "sample_price_path",
    "scan",
    "simulate",
    "solve_dp",
]
