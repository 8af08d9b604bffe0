"""Deterministic multi-agent simulator for deadline-constrained IaaS task
scheduling: asynchronous VM recommendation with READY/BUSY leasing, a
three-intention rescheduling cycle under uncertain events, four centralized
baseline schedulers, and a seeded metrics harness."""

from .harness import compare, run_simulation, sweep
from .kernel import Kernel, RngStream, RngStreams
from .metrics import RunMetrics, compute_metrics
from .scenario import ScenarioConfig, generate_scenario

__all__ = [
    "Kernel", "RngStream", "RngStreams",
    "RunMetrics", "compute_metrics",
    "ScenarioConfig", "generate_scenario",
    "run_simulation", "sweep", "compare",
]
