"""Uncertain events and contract validity.

Three mutation kinds, each hitting at most one target once per run:
  - TaskInflate: every requirement field of a batch's unfinished tasks grows
    by a per-field factor in [1.10, 1.50]; executed fractions are kept, so
    only the un-executed remainder inflates.
  - DeadlineCut: the batch deadline drops by 100..1000 s, floored at the clock.
  - VmDegrade: every capacity field of a VM shrinks by a per-field factor in
    [0.50, 0.90]; the timelines of all reservations on that VM are rebuilt at
    the new cpu (in-progress work continues from the event instant, queued
    work shifts later), which is what makes downstream contracts checkable.

A workload inflation leaves the written reservation interval too small for the
work, and a deadline cut may strand the written end past the deadline; either
way validate_contract turns false and the owning agent's rescheduling desire
fires. Capacity degradation repairs the timeline first, so a degraded-but-slack
contract stays valid and triggers nothing.
"""

import random
from dataclasses import dataclass, field

from . import model
from .model import BatchState, Reservation, UserRequest, VmDescriptor

TASK_INFLATE_RANGE = (1.10, 1.50)
VM_DEGRADE_RANGE = (0.50, 0.90)
DEADLINE_CUT_RANGE = (100.0, 1000.0)

TASK_FIELDS = ("workload", "ram", "storage", "bandwidth")
VM_FIELDS = ("cpu", "ram", "storage", "bandwidth")


@dataclass(frozen=True)
class TaskInflate:
    factors: dict[str, float]


@dataclass(frozen=True)
class DeadlineCut:
    delta: float


@dataclass(frozen=True)
class VmDegrade:
    factors: dict[str, float]


@dataclass(frozen=True)
class UncertainEvent:
    event_id: int
    fire_at: float
    target_kind: str                    # "user" | "vm"
    target_id: str
    mutation: TaskInflate | DeadlineCut | VmDegrade

    def to_json(self) -> dict:
        body: dict = {"event_id": self.event_id, "fire_at": self.fire_at,
                      "target_kind": self.target_kind, "target_id": self.target_id}
        if isinstance(self.mutation, TaskInflate):
            body["mutation"] = {"kind": "task_inflate", "factors": self.mutation.factors}
        elif isinstance(self.mutation, DeadlineCut):
            body["mutation"] = {"kind": "deadline_cut", "delta": self.mutation.delta}
        else:
            body["mutation"] = {"kind": "vm_degrade", "factors": self.mutation.factors}
        return body

    @staticmethod
    def from_json(body: dict) -> "UncertainEvent":
        m = body["mutation"]
        if m["kind"] == "task_inflate":
            mutation: TaskInflate | DeadlineCut | VmDegrade = TaskInflate(dict(m["factors"]))
        elif m["kind"] == "deadline_cut":
            mutation = DeadlineCut(float(m["delta"]))
        elif m["kind"] == "vm_degrade":
            mutation = VmDegrade(dict(m["factors"]))
        else:
            raise ValueError(f"unknown mutation kind {m['kind']!r}")
        return UncertainEvent(int(body["event_id"]), float(body["fire_at"]),
                              body["target_kind"], body["target_id"], mutation)


def generate_events(users: list[UserRequest], vms: list[VmDescriptor],
                    probability: float, rng: random.Random,
                    horizon: float) -> list[UncertainEvent]:
    """Draw at most one event per batch and per VM, each independently selected
    with the given probability; fire times are uniform over (0, horizon).

    Every target consumes the same draws whether or not it is selected, so on
    a fixed seed the event set at a higher probability is a superset of the
    set at a lower one (raising p never reshuffles the surviving events).
    """
    if not 0.0 <= probability <= 1.0:
        raise ValueError("probability must lie in [0, 1]")
    events: list[UncertainEvent] = []
    next_id = 0
    for req in users:
        selected = rng.random() < probability
        fire_at = rng.uniform(0.0, horizon)
        inflate = rng.random() < 0.5
        factors = {f: rng.uniform(*TASK_INFLATE_RANGE) for f in TASK_FIELDS}
        delta = rng.uniform(*DEADLINE_CUT_RANGE)
        if selected:
            mutation: TaskInflate | DeadlineCut = \
                TaskInflate(factors) if inflate else DeadlineCut(delta)
            events.append(UncertainEvent(next_id, fire_at, "user",
                                         req.user_id, mutation))
            next_id += 1
    for vm in vms:
        selected = rng.random() < probability
        fire_at = rng.uniform(0.0, horizon)
        factors = {f: rng.uniform(*VM_DEGRADE_RANGE) for f in VM_FIELDS}
        if selected:
            events.append(UncertainEvent(next_id, fire_at, "vm", vm.vm_id,
                                         VmDegrade(factors)))
            next_id += 1
    events.sort(key=lambda e: (e.fire_at, e.event_id))
    return events


def validate_contract(batch: BatchState, vm: VmDescriptor, now: float) -> bool:
    """True iff the written contract still delivers: the VM's capacities cover the
    remaining tasks, the written end meets the current deadline, and the remaining
    workload physically fits the remaining reserved interval at current cpu."""
    res = batch.reservation
    if res is None:
        return False
    reqs = batch.remaining_requirements()
    if not reqs.task_indices:
        return True
    if not model.capacity_feasible(vm, reqs):
        return False
    if res.end > batch.request.deadline:
        return False
    window = res.end - max(now, res.start)
    return reqs.total_workload <= vm.cpu * window + 1e-6 * max(1.0, reqs.total_workload)


def apply_user_event(batch: BatchState, vm: VmDescriptor | None,
                     event: UncertainEvent, now: float) -> bool:
    """Mutate a batch's ground truth. Progress is checkpointed first so that tasks
    finished before the event keep their outcome under the pre-event deadline.
    Returns False when the target batch is already terminal (vacuous event)."""
    if batch.terminal:
        return False
    if vm is not None:
        model.checkpoint(batch, vm, now)
        if batch.terminal:
            return False
    mutation = event.mutation
    if isinstance(mutation, TaskInflate):
        for i in batch.incomplete_indices():
            task = batch.request.tasks[i]
            task.workload *= mutation.factors["workload"]
            task.ram *= mutation.factors["ram"]
            task.storage *= mutation.factors["storage"]
            task.bandwidth *= mutation.factors["bandwidth"]
    elif isinstance(mutation, DeadlineCut):
        batch.request.deadline = max(now, batch.request.deadline - mutation.delta)
    else:
        raise ValueError(f"event {event.event_id} targets a user but mutates a VM")
    return True


def apply_vm_degrade(vm: VmDescriptor, event: UncertainEvent,
                     batches_by_user: dict[str, BatchState],
                     now: float) -> list[BatchState]:
    """Scale the VM's capacities down and rebuild every touched reservation
    timeline at the new cpu. Returns the affected batches (reservation active at
    or after the event), in ascending user id, for the owner to re-validate."""
    mutation = event.mutation
    assert isinstance(mutation, VmDegrade)
    affected: list[BatchState] = []
    live: list[tuple[Reservation, BatchState]] = []
    for res in sorted(vm.reservations, key=lambda r: (r.start, r.user_id)):
        if res.released_at is not None or res.effective_end <= now:
            continue
        batch = batches_by_user.get(res.user_id)
        if batch is None or batch.reservation is not res:
            continue
        model.checkpoint(batch, vm, now)
        if not batch.terminal:
            live.append((res, batch))

    vm.cpu *= mutation.factors["cpu"]
    vm.ram *= mutation.factors["ram"]
    vm.storage *= mutation.factors["storage"]
    vm.bandwidth *= mutation.factors["bandwidth"]

    cursor = now
    for res, batch in live:
        reqs = batch.remaining_requirements()
        if res.start < now:
            # in progress: executed prefix [start, now] is kept, remainder re-timed
            start, resume = res.start, now
        else:
            start = max(res.start, cursor)
            resume = start
        finishes = []
        acc = resume
        for wl in reqs.workloads:
            acc += wl / vm.cpu
            finishes.append(acc)
        res.start = start
        res.end = finishes[-1] if finishes else resume
        res.task_indices = list(reqs.task_indices)
        res.per_task_finish = finishes
        cursor = res.end
        affected.append(batch)
    return affected


@dataclass
class RescheduleCycle:
    """One user's pursuit of a replacement contract after an uncertain event:
    intentions run i1 (same VM) then i2 (same host) then i3 (global) within a
    pass, and passes repeat until resolved or the deadline passes."""

    user_id: str
    triggering_event: int
    current_intention: str = "i1"
    attempts: int = 0
    passes: int = 0
