"""Domain model of the IaaS environment: datacenter, hosts, VMs, user batches,
reservations, and the completion-time arithmetic used by every scheduler.

Placement is whole-batch: a user's task set goes to exactly one VM and runs
sequentially in submission order. Capacity fields (ram/storage/bandwidth) are
rating constraints compared against per-task maxima; only CPU time-shares.
"""

from dataclasses import dataclass, field
from enum import Enum

EPS = 1e-9
MI_EPS = 1e-6    # workload slack (MI) treated as zero; ~1e3 x float error at run scale


class RequestStatus(str, Enum):
    PENDING = "PENDING"
    SCHEDULED = "SCHEDULED"
    EXECUTING = "EXECUTING"
    COMPLETED = "COMPLETED"
    FAILED = "FAILED"


class LeaseFlag(str, Enum):
    READY = "READY"
    BUSY = "BUSY"


@dataclass
class LeaseState:
    """READY/BUSY label guarding a VM against concurrent recommendation."""

    state: LeaseFlag = LeaseFlag.READY
    holder: str | None = None
    leased_at: float = 0.0

    def acquire(self, holder: str, now: float) -> None:
        assert self.state is LeaseFlag.READY, "lease already held"
        self.state = LeaseFlag.BUSY
        self.holder = holder
        self.leased_at = now

    def release(self) -> None:
        self.state = LeaseFlag.READY
        self.holder = None


@dataclass
class TaskSpec:
    task_id: str
    workload: float        # MI
    ram: float             # MB
    storage: float         # GB
    bandwidth: float       # MB/s

    def __post_init__(self):
        if self.workload <= 0:
            raise ValueError(f"task {self.task_id}: workload must be positive")
        if min(self.ram, self.storage, self.bandwidth) < 0:
            raise ValueError(f"task {self.task_id}: negative resource requirement")


@dataclass
class UserRequest:
    user_id: str
    tasks: list[TaskSpec]
    deadline: float        # seconds; may be inf ("unbounded")
    arrival: float = 0.0
    status: RequestStatus = RequestStatus.PENDING

    def __post_init__(self):
        if not self.tasks:
            raise ValueError(f"user {self.user_id}: empty task batch")
        if self.deadline <= 0:
            raise ValueError(f"user {self.user_id}: deadline must be positive")


@dataclass
class Reservation:
    """Contract binding one user's batch (or its remainder) to one VM over an interval.

    per_task_finish holds cumulative finish times for the covered tasks, computed
    with the VM's cpu at contract time; the last element equals `end`. A released
    reservation keeps its executed prefix in the ledger for utilization accounting.
    """

    user_id: str
    vm_id: str
    start: float
    end: float
    task_indices: list[int]
    per_task_finish: list[float]
    deadline_at_formation: float
    released_at: float | None = None

    @property
    def effective_end(self) -> float:
        return self.end if self.released_at is None else self.released_at

    def busy_time(self) -> float:
        return max(0.0, self.effective_end - self.start)

    def active_at(self, tau: float) -> bool:
        return self.released_at is None and self.effective_end > tau


@dataclass
class VmDescriptor:
    vm_id: str
    host_id: str
    cpu: float             # MIPS
    ram: float             # MB
    storage: float         # GB
    bandwidth: float       # MB/s
    reservations: list[Reservation] = field(default_factory=list)

    def __post_init__(self):
        if min(self.cpu, self.ram, self.storage, self.bandwidth) <= 0:
            raise ValueError(f"vm {self.vm_id}: capacities must be strictly positive")


@dataclass
class Host:
    host_id: str
    vms: list[VmDescriptor]

    def vm(self, vm_id: str) -> VmDescriptor | None:
        for vm in self.vms:
            if vm.vm_id == vm_id:
                return vm
        return None


@dataclass
class Datacenter:
    hosts: list[Host]

    def __post_init__(self):
        seen = set()
        for host in self.hosts:
            if host.host_id in seen:
                raise ValueError(f"duplicate host id {host.host_id}")
            seen.add(host.host_id)

    def all_vms(self) -> list[VmDescriptor]:
        return [vm for host in self.hosts for vm in host.vms]

    def vm(self, vm_id: str) -> VmDescriptor | None:
        for host in self.hosts:
            vm = host.vm(vm_id)
            if vm is not None:
                return vm
        return None


@dataclass(frozen=True)
class Requirements:
    """Aggregate view of a batch (or its remainder) as the schedulers consume it."""

    user_id: str
    total_workload: float
    max_ram: float
    max_storage: float
    max_bandwidth: float
    deadline: float
    workloads: tuple[float, ...]
    task_indices: tuple[int, ...]


def batch_requirements(req: UserRequest) -> Requirements:
    return Requirements(
        user_id=req.user_id,
        total_workload=sum(t.workload for t in req.tasks),
        max_ram=max(t.ram for t in req.tasks),
        max_storage=max(t.storage for t in req.tasks),
        max_bandwidth=max(t.bandwidth for t in req.tasks),
        deadline=req.deadline,
        workloads=tuple(t.workload for t in req.tasks),
        task_indices=tuple(range(len(req.tasks))),
    )


def available_time(vm: VmDescriptor, tau: float,
                   exclude: Reservation | None = None) -> float:
    """Next time the VM can start new work: max(tau, end of last reservation).

    `exclude` ignores one reservation, used when re-quoting a batch on its own
    VM as if its unconsumed remainder were already released.
    """
    at = tau
    for res in vm.reservations:
        if res is exclude:
            continue
        if res.effective_end > at:
            at = res.effective_end
    return at


def expected_completion(vm: VmDescriptor, total_workload: float, tau: float) -> float:
    """available_time plus the batch's summed workload at this VM's cpu."""
    return available_time(vm, tau) + total_workload / vm.cpu


def execution_time(vm: VmDescriptor, total_workload: float) -> float:
    return total_workload / vm.cpu


def capacity_feasible(vm: VmDescriptor, reqs: Requirements) -> bool:
    return (vm.ram >= reqs.max_ram
            and vm.storage >= reqs.max_storage
            and vm.bandwidth >= reqs.max_bandwidth)


def feasible(vm: VmDescriptor, reqs: Requirements, tau: float) -> bool:
    """Capacity maxima fit and the expected completion meets the deadline."""
    return (capacity_feasible(vm, reqs)
            and expected_completion(vm, reqs.total_workload, tau) <= reqs.deadline)


class OverlapError(Exception):
    """A reservation would double-book a VM (invariant defense, not a recoverable state)."""


def reserve(vm: VmDescriptor, reqs: Requirements, start: float,
            deadline_at_formation: float | None = None) -> Reservation:
    """Append a contract for the given workloads starting at `start`.

    per_task_finish[p] = start + cumulative workload through p divided by cpu.
    Rejects any overlap with an existing active interval.
    """
    duration = sum(reqs.workloads) / vm.cpu
    end = start + duration
    for res in vm.reservations:
        if res.start < end - EPS and start < res.effective_end - EPS:
            raise OverlapError(
                f"vm {vm.vm_id}: [{start}, {end}] overlaps [{res.start}, {res.effective_end}]")
    finishes = []
    acc = start
    for wl in reqs.workloads:
        acc += wl / vm.cpu
        finishes.append(acc)
    reservation = Reservation(
        user_id=reqs.user_id,
        vm_id=vm.vm_id,
        start=start,
        end=end,
        task_indices=list(reqs.task_indices),
        per_task_finish=finishes,
        deadline_at_formation=(reqs.deadline if deadline_at_formation is None
                               else deadline_at_formation),
    )
    vm.reservations.append(reservation)
    vm.reservations.sort(key=lambda r: r.start)
    return reservation


@dataclass
class BatchState:
    """Runtime execution state of one user batch.

    Progress is tracked as a completed fraction per task so that workload
    inflation scales only the not-yet-executed remainder. Between checkpoints
    the VM's cpu and the task workloads are constant, so pouring cpu * dt MI
    into the remaining tasks reproduces the contract timeline exactly.
    """

    request: UserRequest
    fractions: list[float] = field(init=False)
    finishes: list[float | None] = field(init=False)
    successes: list[bool] = field(init=False)
    reservation: Reservation | None = None
    last_checkpoint: float = 0.0
    completion_entry: int | None = None

    def __post_init__(self):
        n = len(self.request.tasks)
        self.fractions = [0.0] * n
        self.finishes = [None] * n
        self.successes = [False] * n

    @property
    def terminal(self) -> bool:
        return self.request.status in (RequestStatus.COMPLETED, RequestStatus.FAILED)

    def incomplete_indices(self) -> list[int]:
        return [i for i in range(len(self.fractions))
                if self.remaining_workload(i) > MI_EPS]

    def remaining_workload(self, i: int) -> float:
        return self.request.tasks[i].workload * (1.0 - self.fractions[i])

    def all_done(self) -> bool:
        return not self.incomplete_indices()

    def remaining_requirements(self) -> Requirements:
        """Aggregate view of the work still to execute, at current ground truth."""
        idx = self.incomplete_indices()
        tasks = self.request.tasks
        return Requirements(
            user_id=self.request.user_id,
            total_workload=sum(self.remaining_workload(i) for i in idx),
            max_ram=max((tasks[i].ram for i in idx), default=0.0),
            max_storage=max((tasks[i].storage for i in idx), default=0.0),
            max_bandwidth=max((tasks[i].bandwidth for i in idx), default=0.0),
            deadline=self.request.deadline,
            workloads=tuple(self.remaining_workload(i) for i in idx),
            task_indices=tuple(idx),
        )


def checkpoint(batch: BatchState, vm: VmDescriptor, tau: float) -> list[int]:
    """Advance execution progress up to time tau; returns indices of newly finished tasks.

    Work accrues at vm.cpu within the reservation's written interval, poured
    sequentially into the remaining tasks. Task success is judged against the
    deadline in force now, so callers must checkpoint BEFORE mutating ground
    truth (deadline changes at most once per batch).
    """
    res = batch.reservation
    newly_done: list[int] = []
    if res is None or batch.terminal:
        batch.last_checkpoint = max(batch.last_checkpoint, tau)
        return newly_done
    lo = max(batch.last_checkpoint, res.start)
    hi = min(tau, res.effective_end)
    batch.last_checkpoint = max(batch.last_checkpoint, tau)
    if hi <= lo + EPS:
        return newly_done
    if batch.request.status is RequestStatus.SCHEDULED:
        batch.request.status = RequestStatus.EXECUTING
    budget = vm.cpu * (hi - lo)
    cursor = lo
    for i in batch.incomplete_indices():
        need = batch.remaining_workload(i)
        if need <= budget + MI_EPS:
            budget -= need
            cursor += need / vm.cpu
            batch.fractions[i] = 1.0
            batch.finishes[i] = cursor
            batch.successes[i] = cursor <= batch.request.deadline
            newly_done.append(i)
        else:
            batch.fractions[i] += budget / batch.request.tasks[i].workload
            budget = 0.0
            break
    if batch.all_done():
        batch.request.status = RequestStatus.COMPLETED
    return newly_done


def release_remainder(batch: BatchState, vm: VmDescriptor, tau: float) -> None:
    """Checkpoint at tau and truncate the active reservation's unconsumed tail.
    A reservation released before it started leaves no executed time and is
    dropped from the ledger entirely."""
    res = batch.reservation
    if res is None:
        return
    checkpoint(batch, vm, tau)
    res.released_at = max(res.start, min(res.end, tau))
    if res.released_at <= res.start + EPS:
        vm.reservations.remove(res)
    batch.reservation = None


def assert_no_overlap(vm: VmDescriptor) -> None:
    """Test-build invariant: pairwise-disjoint executed/active intervals per VM."""
    spans = sorted((r.start, r.effective_end) for r in vm.reservations)
    for (s1, e1), (s2, e2) in zip(spans, spans[1:]):
        if s2 < e1 - EPS:
            raise OverlapError(f"vm {vm.vm_id}: [{s1},{e1}] overlaps [{s2},{e2}]")


@dataclass
class SimWorld:
    """Ground truth shared by the run: the datacenter plus per-batch runtime state.

    Agents mutate only what they own (hosts: their VMs' ledgers and execution
    progress; users: request status and lifecycle), but contract replacement is
    committed atomically inside one kernel step so a batch never holds two
    active reservations.
    """

    datacenter: Datacenter
    users: list[UserRequest]
    batches: dict[str, BatchState]
    vms: dict[str, VmDescriptor]
    host_of_vm: dict[str, str]

    @staticmethod
    def build(datacenter: Datacenter, users: list[UserRequest]) -> "SimWorld":
        vms = {vm.vm_id: vm for host in datacenter.hosts for vm in host.vms}
        if len(vms) != sum(len(h.vms) for h in datacenter.hosts):
            raise ValueError("duplicate vm ids across hosts")
        return SimWorld(
            datacenter=datacenter,
            users=users,
            batches={u.user_id: BatchState(u) for u in users},
            vms=vms,
            host_of_vm={vm.vm_id: host.host_id
                        for host in datacenter.hosts for vm in host.vms},
        )

    def fresh_requirements(self, batch: BatchState, now: float) -> Requirements:
        """Checkpoint progress up to now, then take the remaining-work view."""
        if batch.reservation is not None:
            checkpoint(batch, self.vms[batch.reservation.vm_id], now)
        return batch.remaining_requirements()

    def any_capacity_feasible(self, reqs: Requirements) -> bool:
        return any(capacity_feasible(vm, reqs) for vm in self.vms.values())
