"""Run orchestration: build a world from a config, execute it under the chosen
scheduler, inject uncertain events, and emit metrics rows.

Runs with a nonzero event probability first execute a no-event twin of the same
seed to estimate the horizon; event fire times are then drawn uniformly over
(0, horizon) so events land during execution for every scheduler.
"""

import csv
import io
from dataclasses import dataclass

from . import rescheduling
from .agents import HostAgent, SuperviseAgent, UserAgent
from .baselines import CentralScheduler, ResponseCostModel
from .bdi import AgentRuntime
from .kernel import Kernel, RngStreams
from .metrics import RunMetrics, compute_metrics
from .model import SimWorld
from .rescheduling import UncertainEvent
from .scenario import ScenarioConfig, generate_scenario
from .tracelog import TraceLog

CSV_COLUMNS = ("config_hash", "scheduler", "axis", "axis_value", "seed",
               "makespan", "utilization_variance", "success_rate",
               "total_tasks", "successful_tasks", "vm_count")


@dataclass
class RunResult:
    config: ScenarioConfig
    metrics: RunMetrics
    world: SimWorld
    trace: TraceLog
    events: list[UncertainEvent]
    final_time: float
    runtime: AgentRuntime | None = None


def _execute(config: ScenarioConfig, events: list[UncertainEvent],
             trace: TraceLog) -> RunResult:
    streams = RngStreams(config.seed)
    world = generate_scenario(config, streams.scenario)
    kernel = Kernel()
    runtime = None
    if config.scheduler == "ara":
        runtime = AgentRuntime(kernel, latency=config.latency, trace=trace)
        supervise = SuperviseAgent(runtime, theta=config.theta,
                                   lease_timeout=config.lease_timeout)
        runtime.register(supervise)
        host_agents = {}
        for host in world.datacenter.hosts:
            agent = HostAgent(runtime, host, world, supervise.id,
                              collect_timeout=config.collect_timeout)
            runtime.register(agent)
            host_agents[host.host_id] = agent
        user_agents = {}
        for req in world.users:
            agent = UserAgent(runtime, world.batches[req.user_id], world,
                              supervise.id, retry_period=config.retry_period,
                              collect_timeout=config.collect_timeout)
            runtime.register(agent)
            user_agents[req.user_id] = agent
        for agent in host_agents.values():
            agent.start()
        for req in world.users:
            agent = user_agents[req.user_id]
            kernel.schedule(req.arrival, agent.start, kind="arrival")
        for event in events:
            if event.target_kind == "user":
                target = user_agents[event.target_id]
                kernel.schedule(event.fire_at,
                                lambda e=event, t=target: t.on_user_event(e),
                                kind="uncertain-event")
            else:
                host = host_agents[world.host_of_vm[event.target_id]]
                kernel.schedule(event.fire_at,
                                lambda e=event, t=host: t.on_vm_event(e),
                                kind="uncertain-event")
    else:
        cost = ResponseCostModel(per_pair_cost=config.realloc_cost_per_pair,
                                 enabled=config.realloc_cost_enabled)
        driver = CentralScheduler(config.scheduler, world, kernel, cost=cost,
                                  minmin_interval=config.minmin_interval,
                                  trace=trace)
        driver.start()
        for event in events:
            kernel.schedule(event.fire_at,
                            lambda e=event: driver.on_event(e),
                            kind="uncertain-event")
    final_time = kernel.run_until_quiescent(config.time_limit)
    metrics = compute_metrics(world)
    return RunResult(config, metrics, world, trace, events, final_time,
                     runtime=runtime)


def run_simulation(config: ScenarioConfig, collect_trace: bool = False,
                   events: list[UncertainEvent] | None = None,
                   horizon: float | None = None) -> RunResult:
    """One full run. With event_probability > 0 (and no explicit event list),
    a no-event twin of the same seed supplies the horizon for event times;
    callers sweeping several probabilities can pass that horizon in once."""
    if events is None and config.events is not None:
        events = [UncertainEvent.from_json(e) for e in config.events]
    if events is None:
        events = []
        if config.event_probability > 0.0:
            if horizon is None:
                probe = _execute(config.replaced(event_probability=0.0), [],
                                 TraceLog(enabled=False))
                horizon = probe.metrics.makespan
            if horizon <= 0.0:
                horizon = max(1.0, config.arrival_window[1])
            streams = RngStreams(config.seed)
            world = generate_scenario(config, streams.scenario)
            events = rescheduling.generate_events(
                world.users, list(world.vms.values()),
                config.event_probability, streams.events, horizon)
    return _execute(config, events, TraceLog(enabled=collect_trace))


def result_row(result: RunResult, axis: str = "", axis_value="") -> dict:
    m = result.metrics
    return {
        "config_hash": result.config.config_hash(),
        "scheduler": result.config.scheduler,
        "axis": axis,
        "axis_value": axis_value,
        "seed": result.config.seed,
        "makespan": repr(m.makespan),
        "utilization_variance": repr(m.utilization_variance),
        "success_rate": repr(m.success_rate),
        "total_tasks": m.total_tasks,
        "successful_tasks": m.successful_tasks,
        "vm_count": m.vm_count,
    }


AXES = ("theta", "hosts", "probability")


def sweep(config: ScenarioConfig, axis: str, values: list, reps: int = 1,
          collect_trace: bool = False) -> list[dict]:
    """One run per (axis value, repetition seed); rows in (value, seed) order."""
    if axis not in AXES:
        raise ValueError(f"axis must be one of {AXES}")
    if not values:
        raise ValueError("sweep requires at least one axis value")
    rows = []
    for value in values:
        for rep in range(reps):
            seed = config.seed + rep
            if axis == "theta":
                cfg = config.replaced(theta=int(value), seed=seed)
            elif axis == "hosts":
                cfg = config.replaced(hosts=int(value), seed=seed)
            else:
                cfg = config.replaced(event_probability=float(value), seed=seed)
            result = run_simulation(cfg, collect_trace=collect_trace)
            rows.append(result_row(result, axis=axis, axis_value=value))
    rows.sort(key=lambda r: (float(r["axis_value"]), r["seed"]))
    return rows


def compare(config: ScenarioConfig, schedulers: list[str],
            probabilities: list[float], reps: int = 1) -> list[dict]:
    """Grid of scheduler x event probability x repetition seed."""
    rows = []
    for scheduler in schedulers:
        for p in probabilities:
            for rep in range(reps):
                cfg = config.replaced(scheduler=scheduler,
                                      event_probability=float(p),
                                      seed=config.seed + rep)
                result = run_simulation(cfg)
                rows.append(result_row(result, axis="probability", axis_value=p))
    rows.sort(key=lambda r: (r["scheduler"], float(r["axis_value"]), r["seed"]))
    return rows


def write_csv(rows: list[dict], path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        writer.writerows(rows)


def csv_bytes(rows: list[dict]) -> bytes:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS)
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue().encode()
