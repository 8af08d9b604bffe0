"""Scenario configuration and generation.

Default ranges follow the experiment settings this simulator reproduces:
hosts carry 10-20 VMs (cpu 500-2500 MIPS, ram 1250-1740 MB, storage 4-10 GB,
bandwidth 1000-2000 MB/s); users submit 5-10 tasks (workload 10000-40000 MI,
ram 800-1200 MB, storage 1-8 GB, bandwidth 100-500 MB/s). Deadlines are either
a uniform range or unbounded. Generation draws in a fixed order from the
scenario RNG stream, so a seed pins the world bit-exactly.
"""

import hashlib
import json
import math
import random
from dataclasses import asdict, dataclass, fields

from .model import Datacenter, Host, SimWorld, TaskSpec, UserRequest, VmDescriptor

UNBOUNDED = "unbounded"
SCHEDULERS = ("ara", "mct", "met", "min_min", "round_robin")


class ConfigError(Exception):
    """Invalid scenario configuration (bad range, unknown field, bad value)."""


@dataclass
class ScenarioConfig:
    seed: int = 1
    hosts: int = 10
    vms_per_host: tuple[int, int] = (10, 20)
    users: int = 10000
    tasks_per_user: tuple[int, int] = (5, 10)
    vm_cpu: tuple[float, float] = (500.0, 2500.0)
    vm_ram: tuple[float, float] = (1250.0, 1740.0)
    vm_storage: tuple[float, float] = (4.0, 10.0)
    vm_bandwidth: tuple[float, float] = (1000.0, 2000.0)
    task_workload: tuple[float, float] = (10000.0, 40000.0)
    task_ram: tuple[float, float] = (800.0, 1200.0)
    task_storage: tuple[float, float] = (1.0, 8.0)
    task_bandwidth: tuple[float, float] = (100.0, 500.0)
    deadline: tuple[float, float] | None = None     # None = unbounded
    theta: int = 5
    arrival_window: tuple[float, float] = (0.0, 100.0)
    scheduler: str = "ara"
    event_probability: float = 0.0
    latency: float = 0.01
    retry_period: float = 5.0
    collect_timeout: float = 1.0
    lease_timeout: float = 10.0
    minmin_interval: float = 10.0
    realloc_cost_per_pair: float = 0.0005
    realloc_cost_enabled: bool = True
    time_limit: float = 1e9
    events: tuple | None = None   # pinned event list for bit-exact replay

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        for name in ("vms_per_host", "tasks_per_user", "vm_cpu", "vm_ram",
                     "vm_storage", "vm_bandwidth", "task_workload", "task_ram",
                     "task_storage", "task_bandwidth", "arrival_window"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ConfigError(f"{name}: min {lo} > max {hi}")
        if self.deadline is not None:
            lo, hi = self.deadline
            if lo > hi or lo <= 0:
                raise ConfigError(f"deadline: bad range [{lo}, {hi}]")
        if self.scheduler not in SCHEDULERS:
            raise ConfigError(f"scheduler must be one of {SCHEDULERS}")
        if not 0.0 <= self.event_probability <= 1.0:
            raise ConfigError("event_probability must lie in [0, 1]")
        if self.hosts < 1 or self.users < 1 or self.theta < 1:
            raise ConfigError("hosts, users, and theta must be positive")
        if self.latency < 0 or self.realloc_cost_per_pair < 0:
            raise ConfigError("latency and realloc cost cannot be negative")
        for name in ("retry_period", "collect_timeout", "lease_timeout",
                     "minmin_interval", "time_limit"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if self.events is not None:
            for entry in self.events:
                if not isinstance(entry, dict) or "mutation" not in entry:
                    raise ConfigError("events entries must be event objects")

    def to_dict(self) -> dict:
        out = asdict(self)
        out["deadline"] = UNBOUNDED if self.deadline is None else list(self.deadline)
        for key, value in out.items():
            if isinstance(value, tuple):
                out[key] = list(value)
        if out["events"] is None:
            out.pop("events")
        return out

    @classmethod
    def from_dict(cls, raw: dict) -> "ScenarioConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        kwargs = dict(raw)
        if "deadline" in kwargs:
            if kwargs["deadline"] == UNBOUNDED or kwargs["deadline"] is None:
                kwargs["deadline"] = None
            else:
                kwargs["deadline"] = tuple(float(x) for x in kwargs["deadline"])
        for key, value in list(kwargs.items()):
            if isinstance(value, list):
                kwargs[key] = tuple(value)
        try:
            return cls(**kwargs)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_json(cls, path: str) -> "ScenarioConfig":
        try:
            with open(path) as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("config file must hold a JSON object")
        return cls.from_dict(raw)

    def config_hash(self) -> str:
        """Stable digest of everything except the seed, so repetition rows of
        one sweep share a hash."""
        payload = self.to_dict()
        payload.pop("seed")
        blob = json.dumps(payload, sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()[:12]

    def replaced(self, **changes) -> "ScenarioConfig":
        payload = {f.name: getattr(self, f.name) for f in fields(self)}
        payload.update(changes)
        return ScenarioConfig(**payload)


def generate_scenario(config: ScenarioConfig, rng: random.Random) -> SimWorld:
    """Draw the datacenter and the user stream; deterministic per (seed, config)."""
    hosts = []
    for i in range(config.hosts):
        host_id = f"h{i:03d}"
        vm_count = rng.randint(*config.vms_per_host)
        vms = []
        for k in range(vm_count):
            vms.append(VmDescriptor(
                vm_id=f"{host_id}v{k:02d}",
                host_id=host_id,
                cpu=rng.uniform(*config.vm_cpu),
                ram=rng.uniform(*config.vm_ram),
                storage=rng.uniform(*config.vm_storage),
                bandwidth=rng.uniform(*config.vm_bandwidth),
            ))
        hosts.append(Host(host_id, vms))
    users = []
    for n in range(config.users):
        user_id = f"u{n:05d}"
        task_count = rng.randint(*config.tasks_per_user)
        tasks = []
        for p in range(task_count):
            tasks.append(TaskSpec(
                task_id=f"{user_id}t{p}",
                workload=rng.uniform(*config.task_workload),
                ram=rng.uniform(*config.task_ram),
                storage=rng.uniform(*config.task_storage),
                bandwidth=rng.uniform(*config.task_bandwidth),
            ))
        deadline = math.inf if config.deadline is None else rng.uniform(*config.deadline)
        arrival = rng.uniform(*config.arrival_window)
        users.append(UserRequest(user_id, tasks, deadline, arrival=arrival))
    return SimWorld.build(Datacenter(hosts), users)
