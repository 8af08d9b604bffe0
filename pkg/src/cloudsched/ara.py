"""Supervise-side machinery for the asynchronous recommendation protocol:
the VM registry with READY/BUSY leasing, priority-ordered recommendation,
and the user-side best-proposal selection rule.

The registry holds snapshots synchronized by host agents, which lag ground
truth by in-flight messages; hosts re-check against ground truth before
committing, so a stale snapshot costs at worst one declined round.
"""

from dataclasses import dataclass, field, replace

from .model import (LeaseFlag, LeaseState, Requirements, VmDescriptor,
                    available_time)
from .tracelog import NULL_TRACE, TraceLog


@dataclass(frozen=True)
class VmSnapshot:
    vm_id: str
    host_agent: str
    cpu: float
    ram: float
    storage: float
    bandwidth: float
    available_time: float

    @staticmethod
    def of(vm: VmDescriptor, host_agent: str, tau: float) -> "VmSnapshot":
        return VmSnapshot(vm.vm_id, host_agent, vm.cpu, vm.ram, vm.storage,
                          vm.bandwidth, available_time(vm, tau))


def snapshot_feasible(snap: VmSnapshot, reqs: Requirements, tau: float) -> bool:
    completion = max(tau, snap.available_time) + reqs.total_workload / snap.cpu
    return (snap.ram >= reqs.max_ram
            and snap.storage >= reqs.max_storage
            and snap.bandwidth >= reqs.max_bandwidth
            and completion <= reqs.deadline)


@dataclass
class RegistryEntry:
    snapshot: VmSnapshot
    lease: LeaseState = field(default_factory=LeaseState)
    conversation: str | None = None


@dataclass
class Recommendation:
    conversation_id: str
    user_id: str
    vm_refs: list[VmSnapshot]
    theta: int = 0


@dataclass(frozen=True)
class HostProposal:
    user_id: str
    vm_id: str
    start: float
    completion: float


class VmRegistry:
    """Belief store of the supervise agent: per-VM snapshot plus lease label,
    priority-indexed by available time ascending (earlier = higher priority)."""

    def __init__(self, trace: TraceLog | None = None):
        self.entries: dict[str, RegistryEntry] = {}
        self.trace = trace if trace is not None else NULL_TRACE
        self._order: list[str] = []
        self._dirty = True

    def sync(self, snapshot: VmSnapshot) -> None:
        """Replace (or create, on first sync) a VM's snapshot; the lease label is
        orthogonal to snapshot data and is preserved."""
        entry = self.entries.get(snapshot.vm_id)
        if entry is None:
            self.entries[snapshot.vm_id] = RegistryEntry(snapshot)
        else:
            entry.snapshot = snapshot
        self._dirty = True

    def ordered_ids(self) -> list[str]:
        if self._dirty:
            self._order = sorted(
                self.entries, key=lambda v: (self.entries[v].snapshot.available_time, v))
            self._dirty = False
        return self._order

    def ready_count(self) -> int:
        return sum(1 for e in self.entries.values() if e.lease.state is LeaseFlag.READY)

    def recommend(self, reqs: Requirements, theta: int, tau: float,
                  conversation_id: str) -> Recommendation:
        """Scan from highest priority, collecting READY VMs whose snapshot meets
        the requirements; each collected VM is leased BUSY to this conversation.
        Stops at theta collected or when the index is exhausted; an empty result
        is a normal outcome (the user retries)."""
        if theta < 1:
            raise ValueError("theta must be >= 1")
        collected: list[VmSnapshot] = []
        for vm_id in self.ordered_ids():
            if len(collected) >= theta:
                break
            entry = self.entries[vm_id]
            if entry.lease.state is not LeaseFlag.READY:
                continue
            if not snapshot_feasible(entry.snapshot, reqs, tau):
                continue
            entry.lease.acquire(reqs.user_id, tau)
            entry.conversation = conversation_id
            self.trace.emit(tau, "supervise", "lease", vm=vm_id, state="BUSY",
                            holder=reqs.user_id, conversation=conversation_id)
            collected.append(entry.snapshot)
        return Recommendation(conversation_id, reqs.user_id, collected, theta)

    def finalize(self, conversation_id: str, tau: float) -> int:
        """Release every lease held under this conversation back to READY.
        Idempotent: a second finalize for the same conversation is a no-op.
        Returns the number of leases released."""
        released = 0
        for vm_id, entry in self.entries.items():
            if entry.conversation == conversation_id:
                entry.lease.release()
                entry.conversation = None
                released += 1
                self.trace.emit(tau, "supervise", "lease", vm=vm_id, state="READY",
                                conversation=conversation_id)
        return released


def select_best(proposals: list[HostProposal]) -> HostProposal:
    """Earliest expected completion wins; ties broken by lower vm_id."""
    if not proposals:
        raise ValueError("select_best requires a non-empty proposal list")
    return min(proposals, key=lambda p: (p.completion, p.vm_id))


def make_proposal(vm: VmDescriptor | None, reqs: Requirements, tau: float,
                  exclude=None) -> HostProposal | None:
    """Host-side quote against ground truth (not the registry snapshot).
    Returns None to decline: unknown VM, capacity shortfall, or a completion
    past the deadline after the snapshot went stale. `exclude` lets a re-quote
    on the batch's own VM ignore its current reservation."""
    if vm is None:
        return None
    start = available_time(vm, tau, exclude=exclude)
    completion = start + reqs.total_workload / vm.cpu
    if not (vm.ram >= reqs.max_ram and vm.storage >= reqs.max_storage
            and vm.bandwidth >= reqs.max_bandwidth and completion <= reqs.deadline):
        return None
    return HostProposal(reqs.user_id, vm.vm_id, start, completion)


def refresh_available_time(snapshot: VmSnapshot, at: float) -> VmSnapshot:
    return replace(snapshot, available_time=at)
