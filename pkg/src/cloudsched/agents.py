"""User, host, and supervise agents wired to the recommendation protocol and
the three-intention rescheduling cycle.

Scheduling round (one user batch):
  user --REQUEST(requirements)--> supervise --INFORM(recommendation)--> user
  user --REQUEST(propose vm)--> each recommended host --PROPOSE/REJECT--> user
  user --ACCEPT(best)--> winning host --INFORM(contract)/FAILURE--> user
  user --INFORM(outcome)--> supervise (releases the BUSY leases)

Rescheduling after an uncertain event invalidates a contract:
  i1 re-quote the same VM, i2 another VM in the same host, i3 a full new round
  through the supervise agent; passes repeat every retry period until the
  contract is valid again or the deadline passes. A degraded VM is handled
  host-side first: the host offers replacement slots to affected users in
  ascending user id, falling back to the user's own cycle when its search fails.
"""

from dataclasses import dataclass

from . import model, rescheduling
from .ara import (HostProposal, Recommendation, VmRegistry, VmSnapshot,
                  make_proposal, select_best)
from .bdi import (ACCEPT, FAILURE, HOST, INFORM, PROPOSE, REJECT, REQUEST,
                  SUPERVISE, USER, Agent, AgentId, AgentMessage, AgentRuntime,
                  Intention, ResultListener, deliberate)
from .model import (BatchState, Host, Requirements, RequestStatus, SimWorld,
                    capacity_feasible)
from .rescheduling import RescheduleCycle, validate_contract


@dataclass
class ScheduleRequest:
    """User-to-host: quote for my remaining work on this VM (or, for purpose
    "samehost", on any sibling of it)."""
    user_id: str
    vm_id: str
    purpose: str            # "propose" | "requote" | "samehost"


@dataclass
class AcceptBody:
    user_id: str
    vm_id: str


@dataclass
class RoundOutcome:
    conversation: str
    accepted_vm: str | None


@dataclass
class ContractInfo:
    user_id: str
    vm_id: str
    start: float
    end: float


@dataclass
class ReplacementOffer:
    proposal: HostProposal
    event_id: int


@dataclass
class RescueFailed:
    event_id: int


@dataclass
class SlotExpired:
    vm_id: str


@dataclass
class ReleaseNotice:
    vm_id: str


class SuperviseAgent(Agent):
    """Keeps the VM registry synchronized and serves recommendation requests,
    leasing each recommended VM BUSY until the round concludes or the lease
    expires (the liveness patch for users that never report an outcome)."""

    def __init__(self, runtime: AgentRuntime, theta: int, lease_timeout: float):
        super().__init__(AgentId(SUPERVISE, "sa"), runtime)
        self.registry = VmRegistry(trace=runtime.trace)
        self.theta = theta
        self.lease_timeout = lease_timeout
        self._lease_timers: dict[str, int] = {}
        self.add_desire("recommend-vms", priority=1)
        self.add_desire("balance-utilization", priority=2)

    def handle_message(self, msg: AgentMessage) -> None:
        body = msg.body
        if msg.performative == REQUEST and isinstance(body, Requirements):
            rec = self.registry.recommend(body, self.theta, self.now,
                                          msg.conversation_id)
            if rec.vm_refs:
                self._lease_timers[rec.conversation_id] = self.runtime.kernel.schedule(
                    self.now + self.lease_timeout,
                    lambda: self._lease_expired(rec.conversation_id),
                    kind="lease-expiry")
            self.send(AgentMessage(msg.conversation_id, self.id, msg.sender,
                                   INFORM, rec, reply=True))
        elif msg.performative == INFORM and isinstance(body, VmSnapshot):
            self.registry.sync(body)
        elif msg.performative == INFORM and isinstance(body, RoundOutcome):
            timer = self._lease_timers.pop(body.conversation, None)
            if timer is not None:
                self.runtime.kernel.cancel(timer)
            self.registry.finalize(body.conversation, self.now)

    def _lease_expired(self, conversation: str) -> None:
        self._lease_timers.pop(conversation, None)
        released = self.registry.finalize(conversation, self.now)
        if released:
            self.runtime.trace.emit(self.now, str(self.id), "lease_expired",
                                    conversation=conversation, released=released)


class HostAgent(Agent):
    """Owns one host's VMs: quotes and commits contracts against ground truth,
    executes reservations (checkpoint + completion entries), synchronizes VM
    snapshots with the supervise agent, and rescues batches stranded by a
    capacity degradation of one of its VMs."""

    def __init__(self, runtime: AgentRuntime, host: Host, world: SimWorld,
                 supervise: AgentId, collect_timeout: float = 1.0):
        super().__init__(AgentId(HOST, host.host_id), runtime)
        self.host = host
        self.world = world
        self.supervise = supervise
        self.collect_timeout = collect_timeout
        self._seq = 0
        self._rescue_queue: list[tuple[str, int]] = []   # (user_id, event_id)
        self._rescue_busy = False
        self.add_desire("provide-slots", priority=1)
        self.add_desire("rescue-allocated", priority=0)

    def _next_conv(self, tag: str) -> str:
        self._seq += 1
        return f"{self.id.name}:{tag}:{self._seq}"

    def start(self) -> None:
        for vm in self.host.vms:
            self.sync_vm(vm)

    def sync_vm(self, vm: model.VmDescriptor) -> None:
        snap = VmSnapshot.of(vm, self.host.host_id, self.now)
        self.update_belief(f"vm:{vm.vm_id}",
                           (vm.cpu, vm.ram, vm.storage, vm.bandwidth,
                            snap.available_time))
        self.send(AgentMessage(self._next_conv("sync"), self.id, self.supervise,
                               INFORM, snap))

    # -- inbound protocol ---------------------------------------------------

    def handle_message(self, msg: AgentMessage) -> None:
        body = msg.body
        if msg.performative == REQUEST and isinstance(body, ScheduleRequest):
            proposal = self._quote(body)
            if proposal is None:
                self.send(AgentMessage(msg.conversation_id, self.id, msg.sender,
                                       REJECT, None, reply=True))
            else:
                self.send(AgentMessage(msg.conversation_id, self.id, msg.sender,
                                       PROPOSE, proposal, reply=True))
        elif msg.performative == ACCEPT and isinstance(body, AcceptBody):
            reservation = self.commit_contract(body.user_id, body.vm_id)
            if reservation is None:
                self.send(AgentMessage(msg.conversation_id, self.id, msg.sender,
                                       FAILURE, None, reply=True))
            else:
                info = ContractInfo(body.user_id, reservation.vm_id,
                                    reservation.start, reservation.end)
                self.send(AgentMessage(msg.conversation_id, self.id, msg.sender,
                                       INFORM, info, reply=True))
        elif msg.performative == INFORM and isinstance(body, ReleaseNotice):
            vm = self.host.vm(body.vm_id)
            if vm is not None:
                self.sync_vm(vm)
        elif msg.performative == REJECT:
            pass   # declined proposal: nothing was held for it

    # -- quoting and committing ----------------------------------------------

    def _quote(self, req: ScheduleRequest) -> HostProposal | None:
        batch = self.world.batches.get(req.user_id)
        if batch is None or batch.terminal:
            return None
        reqs = self.world.fresh_requirements(batch, self.now)
        if batch.terminal or not reqs.task_indices:
            return None
        if req.purpose == "samehost":
            return self._best_sibling(reqs, exclude_vm=req.vm_id)
        vm = self.host.vm(req.vm_id)
        exclude = None
        if (batch.reservation is not None and vm is not None
                and batch.reservation.vm_id == vm.vm_id):
            exclude = batch.reservation
        return make_proposal(vm, reqs, self.now, exclude=exclude)

    def _best_sibling(self, reqs: Requirements,
                      exclude_vm: str) -> HostProposal | None:
        best: HostProposal | None = None
        for vm in self.host.vms:
            if vm.vm_id == exclude_vm:
                continue
            proposal = make_proposal(vm, reqs, self.now)
            if proposal is None:
                continue
            if best is None or (proposal.completion, proposal.vm_id) < \
                    (best.completion, best.vm_id):
                best = proposal
        return best

    def commit_contract(self, user_id: str, vm_id: str) -> model.Reservation | None:
        """Re-check ground truth and commit; replacement releases the old
        interval atomically with the new reservation."""
        vm = self.host.vm(vm_id)
        batch = self.world.batches.get(user_id)
        if vm is None or batch is None or batch.terminal:
            return None
        reqs = self.world.fresh_requirements(batch, self.now)
        if batch.terminal or not reqs.task_indices:
            return None
        old = batch.reservation
        exclude = old if (old is not None and old.vm_id == vm.vm_id) else None
        start = model.available_time(vm, self.now, exclude=exclude)
        completion = start + reqs.total_workload / vm.cpu
        if not capacity_feasible(vm, reqs) or completion > reqs.deadline:
            return None
        if old is not None:
            old_vm = self.world.vms[old.vm_id]
            model.release_remainder(batch, old_vm, self.now)
            if old_vm.host_id == self.host.host_id:
                if old_vm.vm_id != vm.vm_id:
                    self.sync_vm(old_vm)
            else:
                self.send(AgentMessage(self._next_conv("rel"), self.id,
                                       AgentId(HOST, old_vm.host_id), INFORM,
                                       ReleaseNotice(old_vm.vm_id)))
        reservation = model.reserve(vm, reqs, start)
        batch.reservation = reservation
        batch.request.status = RequestStatus.SCHEDULED
        if batch.completion_entry is not None:
            self.runtime.kernel.cancel(batch.completion_entry)
        batch.completion_entry = self.runtime.kernel.schedule(
            reservation.end, lambda: self._on_slot_end(batch), kind="completion")
        self.sync_vm(vm)
        self.runtime.trace.emit(self.now, str(self.id), "contract",
                                user=user_id, vm=vm.vm_id,
                                start=reservation.start, end=reservation.end,
                                deadline=reqs.deadline)
        return reservation

    def _on_slot_end(self, batch: BatchState) -> None:
        res = batch.reservation
        if res is None or batch.terminal:
            return
        vm = self.world.vms[res.vm_id]
        model.checkpoint(batch, vm, res.end)
        batch.completion_entry = None
        if batch.request.status is RequestStatus.COMPLETED:
            self.runtime.trace.emit(self.now, str(self.id), "completed",
                                    user=batch.request.user_id, vm=res.vm_id)
        else:
            # written slot expired with work left (un-repaired inflation);
            # nudge the owner in case its cycle is not already hunting
            self.runtime.trace.emit(self.now, str(self.id), "slot_expired",
                                    user=batch.request.user_id, vm=res.vm_id)
            self.send(AgentMessage(self._next_conv("exp"), self.id,
                                   AgentId(USER, batch.request.user_id),
                                   INFORM, SlotExpired(res.vm_id)))

    # -- degraded-VM rescue ---------------------------------------------------

    def on_vm_event(self, event: rescheduling.UncertainEvent) -> None:
        vm = self.host.vm(event.target_id)
        if vm is None:
            return
        affected = rescheduling.apply_vm_degrade(vm, event, self.world.batches,
                                                 self.now)
        self.update_belief(f"vm:{vm.vm_id}",
                           (vm.cpu, vm.ram, vm.storage, vm.bandwidth,
                            model.available_time(vm, self.now)))
        self.runtime.trace.emit(self.now, str(self.id), "event",
                                event=event.event_id, target=vm.vm_id,
                                mutation="VmDegrade", affected=len(affected))
        for batch in affected:
            if batch.completion_entry is not None:
                self.runtime.kernel.cancel(batch.completion_entry)
            if batch.reservation is not None:
                batch.completion_entry = self.runtime.kernel.schedule(
                    batch.reservation.end, lambda b=batch: self._on_slot_end(b),
                    kind="completion")
        self.sync_vm(vm)
        invalid = [b for b in affected
                   if not validate_contract(b, vm, self.now)]
        if invalid:
            self.desires["rescue-allocated"].active = True
            for batch in sorted(invalid, key=lambda b: b.request.user_id):
                self._rescue_queue.append((batch.request.user_id, event.event_id))
            if not self._rescue_busy:
                self._rescue_next()

    def _rescue_next(self) -> None:
        self._rescue_busy = True
        while self._rescue_queue:
            user_id, event_id = self._rescue_queue.pop(0)
            batch = self.world.batches.get(user_id)
            if batch is None or batch.terminal or batch.reservation is None:
                continue
            res = batch.reservation
            vm = self.world.vms[res.vm_id]
            model.checkpoint(batch, vm, self.now)
            if batch.terminal or validate_contract(batch, vm, self.now):
                continue
            reqs = batch.remaining_requirements()
            offer = self._best_sibling(reqs, exclude_vm=res.vm_id)
            user = AgentId(USER, user_id)
            if offer is None:
                self.send(AgentMessage(self._next_conv("nof"), self.id, user,
                                       INFORM, RescueFailed(event_id)))
                continue
            conv = self._next_conv("rescue")
            self.runtime.trace.emit(self.now, str(self.id), "rescue_offer",
                                    user=user_id, vm=offer.vm_id, event=event_id)
            self.send(
                AgentMessage(conv, self.id, user, PROPOSE,
                             ReplacementOffer(offer, event_id)),
                ResultListener(
                    conv, self.now + self.collect_timeout,
                    on_result=lambda m, u=user_id, e=event_id: self._rescue_reply(u, e, m),
                    on_timeout=lambda u=user_id, e=event_id: self._rescue_reply(u, e, None)))
            return
        self._rescue_busy = False
        self.desires["rescue-allocated"].active = False

    def _rescue_reply(self, user_id: str, event_id: int,
                      msg: AgentMessage | None) -> None:
        batch = self.world.batches.get(user_id)
        user = AgentId(USER, user_id)
        if msg is not None and msg.performative == ACCEPT and batch is not None \
                and not batch.terminal:
            reservation = self.commit_contract(user_id, msg.body.vm_id)
            if reservation is not None:
                self.send(AgentMessage(self._next_conv("ok"), self.id, user,
                                       INFORM,
                                       ContractInfo(user_id, reservation.vm_id,
                                                    reservation.start,
                                                    reservation.end)))
            else:
                self.send(AgentMessage(self._next_conv("nok"), self.id, user,
                                       INFORM, RescueFailed(event_id)))
        elif msg is None:
            self.send(AgentMessage(self._next_conv("nok"), self.id, user,
                                   INFORM, RescueFailed(event_id)))
        # an explicit REJECT means the user already chose to run its own cycle
        self._rescue_next()


class _RoundState:
    """Bookkeeping for one in-flight recommendation round."""

    def __init__(self, conversation: str, rec: Recommendation, done):
        self.conversation = conversation
        self.rec = rec
        self.pending = len(rec.vm_refs)
        self.proposals: list[tuple[HostProposal, AgentId]] = []
        self.done = done


class UserAgent(Agent):
    """Drives one batch from submission to completion: recommendation rounds
    for the initial contract, then a rescheduling cycle whenever an uncertain
    event invalidates it."""

    def __init__(self, runtime: AgentRuntime, batch: BatchState, world: SimWorld,
                 supervise: AgentId, retry_period: float = 5.0,
                 collect_timeout: float = 1.0):
        super().__init__(AgentId(USER, batch.request.user_id), runtime)
        self.batch = batch
        self.world = world
        self.supervise = supervise
        self.retry_period = retry_period
        self.collect_timeout = collect_timeout
        self._round = 0
        self._cycle: RescheduleCycle | None = None
        self._current_intention: Intention | None = None
        self._retry_entry: int | None = None
        self._last_event_id = -1
        self.add_desire("schedule-batch", priority=1, intentions=[
            Intention("ara-round", self._plan_initial_round, priority=1)])
        self.add_desire("reschedule", priority=0, intentions=[
            Intention("i1", self._i1_same_vm, priority=1),
            Intention("i2", self._i2_same_host, priority=2),
            Intention("i3", self._i3_global, priority=3),
        ])
        self.beliefs.on_change("request_state", self._on_request_change)

    # -- lifecycle ------------------------------------------------------------

    @property
    def request(self):
        return self.batch.request

    def _fingerprint(self):
        return (self.request.deadline,
                tuple((t.workload, t.ram, t.storage, t.bandwidth)
                      for t in self.request.tasks))

    def start(self) -> None:
        self.beliefs.set("request_state", self._fingerprint())
        if self.batch.terminal or self.batch.reservation is not None:
            return
        self.desires["schedule-batch"].active = True
        intent = deliberate(self)
        if intent is not None:
            intent.plan()

    def _plan_initial_round(self) -> None:
        self._start_round(self._initial_done)

    def _initial_done(self, ok: bool) -> None:
        if ok or self.batch.terminal or self.batch.reservation is not None:
            self.desires["schedule-batch"].active = False
            return
        reqs = self.world.fresh_requirements(self.batch, self.now)
        if self.now >= self.request.deadline or \
                not self.world.any_capacity_feasible(reqs):
            self._fail_batch()
            self.desires["schedule-batch"].active = False
            return
        self._retry_entry = self.runtime.kernel.schedule(
            self.now + self.retry_period, self._initial_retry, kind="round-retry")

    def _initial_retry(self) -> None:
        self._retry_entry = None
        if self.batch.terminal or self.batch.reservation is not None:
            self.desires["schedule-batch"].active = False
            return
        self._start_round(self._initial_done)

    def _fail_batch(self) -> None:
        batch = self.batch
        if batch.terminal:
            return
        res = batch.reservation
        if res is not None:
            vm = self.world.vms[res.vm_id]
            model.release_remainder(batch, vm, self.now)
            self.send(AgentMessage(f"{self.id.name}:rel:{self._round}", self.id,
                                   AgentId(HOST, vm.host_id), INFORM,
                                   ReleaseNotice(vm.vm_id)))
        if batch.completion_entry is not None:
            self.runtime.kernel.cancel(batch.completion_entry)
            batch.completion_entry = None
        batch.request.status = RequestStatus.FAILED
        self.runtime.trace.emit(self.now, str(self.id), "failed",
                                user=self.request.user_id,
                                unfinished=len(batch.incomplete_indices()))

    # -- recommendation round --------------------------------------------------

    def _start_round(self, done) -> None:
        if self.batch.terminal:
            done(False)
            return
        reqs = self.world.fresh_requirements(self.batch, self.now)
        if not reqs.task_indices:
            done(True)
            return
        self._round += 1
        conv = f"{self.id.name}#r{self._round}"
        self.send(
            AgentMessage(conv, self.id, self.supervise, REQUEST, reqs),
            ResultListener(conv, self.now + self.collect_timeout,
                           on_result=lambda m: self._on_recommendation(conv, m, done),
                           on_timeout=lambda: done(False)))

    def _on_recommendation(self, conv: str, msg: AgentMessage, done) -> None:
        if msg.performative != INFORM or not isinstance(msg.body, Recommendation):
            done(False)
            return
        rec = msg.body
        if self.batch.terminal:
            if rec.vm_refs:
                self._send_outcome(conv, None)
            done(False)
            return
        if not rec.vm_refs:
            done(False)
            return
        state = _RoundState(conv, rec, done)
        for idx, snap in enumerate(rec.vm_refs):
            sub = f"{conv}:{idx}"
            host = AgentId(HOST, snap.host_agent)
            self.send(
                AgentMessage(sub, self.id, host, REQUEST,
                             ScheduleRequest(self.request.user_id, snap.vm_id,
                                             "propose")),
                ResultListener(sub, self.now + self.collect_timeout,
                               on_result=lambda m: self._collect(state, m),
                               on_timeout=lambda: self._collect(state, None)))

    def _collect(self, state: _RoundState, msg: AgentMessage | None) -> None:
        state.pending -= 1
        if msg is not None and msg.performative == PROPOSE and \
                isinstance(msg.body, HostProposal):
            state.proposals.append((msg.body, msg.sender))
        if state.pending == 0:
            self._decide(state)

    def _decide(self, state: _RoundState) -> None:
        if self.batch.terminal:
            self._send_outcome(state.conversation, None)
            state.done(False)
            return
        recommended = [s.vm_id for s in state.rec.vm_refs]
        if not state.proposals:
            self.runtime.trace.emit(self.now, str(self.id), "round",
                                    conversation=state.conversation,
                                    theta=state.rec.theta,
                                    recommended=recommended, proposals=[],
                                    chosen=None)
            self._send_outcome(state.conversation, None)
            state.done(False)
            return
        best = select_best([p for p, _ in state.proposals])
        best_host = next(h for p, h in state.proposals if p is best)
        self.runtime.trace.emit(
            self.now, str(self.id), "round",
            conversation=state.conversation, theta=state.rec.theta,
            recommended=recommended,
            proposals=[[p.vm_id, p.completion] for p, _ in state.proposals],
            chosen=best.vm_id)
        for proposal, host in state.proposals:
            if proposal is not best:
                self.send(AgentMessage(state.conversation, self.id, host,
                                       REJECT, proposal))
        conv = f"{state.conversation}:acc"
        self.send(
            AgentMessage(conv, self.id, best_host, ACCEPT,
                         AcceptBody(self.request.user_id, best.vm_id)),
            ResultListener(conv, self.now + self.collect_timeout,
                           on_result=lambda m: self._accept_reply(state, m),
                           on_timeout=lambda: self._accept_reply(state, None)))

    def _accept_reply(self, state: _RoundState, msg: AgentMessage | None) -> None:
        if msg is not None and msg.performative == INFORM and \
                isinstance(msg.body, ContractInfo):
            self._send_outcome(state.conversation, msg.body.vm_id)
            state.done(True)
        else:
            self._send_outcome(state.conversation, None)
            state.done(False)

    def _send_outcome(self, conversation: str, accepted_vm: str | None) -> None:
        self.send(AgentMessage(f"{conversation}:out", self.id, self.supervise,
                               INFORM, RoundOutcome(conversation, accepted_vm)))

    # -- uncertain events and the rescheduling cycle ---------------------------

    def on_user_event(self, event: rescheduling.UncertainEvent) -> None:
        batch = self.batch
        vm = None
        if batch.reservation is not None:
            vm = self.world.vms[batch.reservation.vm_id]
        self._last_event_id = event.event_id
        applied = rescheduling.apply_user_event(batch, vm, event, self.now)
        self.runtime.trace.emit(self.now, str(self.id), "event",
                                event=event.event_id,
                                target=self.request.user_id,
                                mutation=type(event.mutation).__name__,
                                vacuous=not applied)
        if applied:
            self.update_belief("request_state", self._fingerprint())

    def _on_request_change(self, key, old, new) -> None:
        batch = self.batch
        if batch.terminal or batch.reservation is None:
            return
        vm = self.world.vms[batch.reservation.vm_id]
        if not validate_contract(batch, vm, self.now):
            self._begin_cycle(self._last_event_id)

    def _begin_cycle(self, event_id: int) -> None:
        if self._cycle is not None or self.batch.terminal:
            return
        self._cycle = RescheduleCycle(self.request.user_id, event_id)
        self.desires["reschedule"].active = True
        if self.request.status in (RequestStatus.SCHEDULED, RequestStatus.EXECUTING):
            self.request.status = RequestStatus.PENDING
        for intention in self.intentions["reschedule"]:
            intention.exhausted = False
        self.runtime.trace.emit(self.now, str(self.id), "cycle_start",
                                event=event_id)
        self._cycle_step()

    def _cycle_step(self) -> None:
        cycle = self._cycle
        if cycle is None:
            return
        batch = self.batch
        if batch.terminal:
            self._end_cycle(batch.request.status is RequestStatus.COMPLETED)
            return
        if self.now >= self.request.deadline:
            self._fail_batch()
            self._end_cycle(False)
            return
        if batch.reservation is not None:
            vm = self.world.vms[batch.reservation.vm_id]
            model.checkpoint(batch, vm, self.now)
            if batch.terminal:
                self._end_cycle(True)
                return
            if validate_contract(batch, vm, self.now):
                self._end_cycle(True)
                return
        intention = deliberate(self)
        if intention is None:
            for item in self.intentions["reschedule"]:
                item.exhausted = False
            cycle.passes += 1
            reqs = self.world.fresh_requirements(batch, self.now)
            if not self.world.any_capacity_feasible(reqs) and \
                    self.request.deadline == float("inf"):
                self._fail_batch()
                self._end_cycle(False)
                return
            self._retry_entry = self.runtime.kernel.schedule(
                self.now + self.retry_period, self._cycle_step, kind="cycle-retry")
            return
        self._current_intention = intention
        cycle.current_intention = intention.name
        cycle.attempts += 1
        self.runtime.trace.emit(self.now, str(self.id), "cycle_attempt",
                                event=cycle.triggering_event,
                                pass_index=cycle.passes,
                                intention=intention.name)
        intention.plan()

    def _intention_done(self, ok: bool) -> None:
        if self._cycle is None:
            return
        intention = self._current_intention
        if intention is not None:
            intention.running = False
            if not ok:
                intention.exhausted = True
        self._current_intention = None
        if ok:
            self._end_cycle(True)
        else:
            self._cycle_step()

    def _end_cycle(self, resolved: bool) -> None:
        cycle = self._cycle
        if cycle is None:
            return
        self.desires["reschedule"].active = False
        for intention in self.intentions["reschedule"]:
            intention.exhausted = False
            intention.running = False
        if self._retry_entry is not None:
            self.runtime.kernel.cancel(self._retry_entry)
            self._retry_entry = None
        self.runtime.trace.emit(self.now, str(self.id), "cycle_end",
                                event=cycle.triggering_event,
                                resolved=resolved, attempts=cycle.attempts,
                                passes=cycle.passes)
        self._cycle = None

    # intentions ---------------------------------------------------------------

    def _i1_same_vm(self) -> None:
        res = self.batch.reservation
        if res is None:
            self._intention_done(False)
            return
        self._direct_negotiation(res.vm_id, "requote")

    def _i2_same_host(self) -> None:
        res = self.batch.reservation
        if res is None:
            self._intention_done(False)
            return
        self._direct_negotiation(res.vm_id, "samehost")

    def _i3_global(self) -> None:
        self._start_round(self._intention_done)

    def _direct_negotiation(self, vm_id: str, purpose: str) -> None:
        host = AgentId(HOST, self.world.host_of_vm[vm_id])
        self._round += 1
        conv = f"{self.id.name}#{purpose}{self._round}"
        self.send(
            AgentMessage(conv, self.id, host, REQUEST,
                         ScheduleRequest(self.request.user_id, vm_id, purpose)),
            ResultListener(conv, self.now + self.collect_timeout,
                           on_result=lambda m: self._direct_proposal(host, m),
                           on_timeout=lambda: self._intention_done(False)))

    def _direct_proposal(self, host: AgentId, msg: AgentMessage) -> None:
        if self._cycle is None:
            return   # resolved out-of-band while the quote was in flight
        if msg.performative != PROPOSE or not isinstance(msg.body, HostProposal):
            self._intention_done(False)
            return
        proposal = msg.body
        self._round += 1
        conv = f"{self.id.name}#acc{self._round}"
        self.send(
            AgentMessage(conv, self.id, host, ACCEPT,
                         AcceptBody(self.request.user_id, proposal.vm_id)),
            ResultListener(conv, self.now + self.collect_timeout,
                           on_result=lambda m: self._intention_done(
                               m.performative == INFORM),
                           on_timeout=lambda: self._intention_done(False)))

    # host-initiated rescue ------------------------------------------------------

    def handle_message(self, msg: AgentMessage) -> None:
        body = msg.body
        if msg.performative == PROPOSE and isinstance(body, ReplacementOffer):
            self._on_replacement_offer(msg)
        elif msg.performative == INFORM and isinstance(body, ContractInfo):
            batch = self.batch
            if self._cycle is not None and batch.reservation is not None:
                vm = self.world.vms[batch.reservation.vm_id]
                if validate_contract(batch, vm, self.now):
                    self._end_cycle(True)
        elif msg.performative == INFORM and isinstance(body, RescueFailed):
            if not self.batch.terminal:
                self._begin_cycle(body.event_id)
        elif msg.performative == INFORM and isinstance(body, SlotExpired):
            if not self.batch.terminal and self._cycle is None:
                self._begin_cycle(self._last_event_id)
        elif msg.performative == REJECT:
            pass

    def _on_replacement_offer(self, msg: AgentMessage) -> None:
        offer: ReplacementOffer = msg.body
        batch = self.batch
        if batch.terminal:
            self.send(AgentMessage(msg.conversation_id, self.id, msg.sender,
                                   REJECT, None, reply=True))
            return
        if offer.proposal.completion <= self.request.deadline:
            self.send(AgentMessage(msg.conversation_id, self.id, msg.sender,
                                   ACCEPT,
                                   AcceptBody(self.request.user_id,
                                              offer.proposal.vm_id),
                                   reply=True))
        else:
            self.send(AgentMessage(msg.conversation_id, self.id, msg.sender,
                                   REJECT, None, reply=True))
            self._begin_cycle(offer.event_id)
