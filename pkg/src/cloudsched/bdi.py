"""Minimal belief-desire-intention runtime with asynchronous mailbox messaging.

Agents never block on a reply: send_async registers a per-conversation result
listener and returns immediately, so an agent with an outstanding request still
handles every other inbound message in arrival order. Exactly one of
on_result/on_timeout fires per listener.
"""

from dataclasses import dataclass
from typing import Any, Callable, Optional

from .kernel import Kernel
from .tracelog import NULL_TRACE, TraceLog

USER = "USER"
HOST = "HOST"
SUPERVISE = "SUPERVISE"

REQUEST = "REQUEST"
PROPOSE = "PROPOSE"
ACCEPT = "ACCEPT"
REJECT = "REJECT"
INFORM = "INFORM"
FAILURE = "FAILURE"


@dataclass(frozen=True)
class AgentId:
    kind: str
    name: str

    def __str__(self):
        return f"{self.kind.lower()}:{self.name}"


@dataclass
class Belief:
    value: Any
    version: int = 0


class BeliefStore:
    """Versioned key/value knowledge; hooks fire once per value-changing write."""

    def __init__(self):
        self._entries: dict[str, Belief] = {}
        self._hooks: dict[str, list[Callable[[str, Any, Any], None]]] = {}

    def get(self, key: str, default: Any = None) -> Any:
        belief = self._entries.get(key)
        return default if belief is None else belief.value

    def version(self, key: str) -> int:
        belief = self._entries.get(key)
        return 0 if belief is None else belief.version

    def on_change(self, key: str, hook: Callable[[str, Any, Any], None]) -> None:
        self._hooks.setdefault(key, []).append(hook)

    def set(self, key: str, value: Any) -> bool:
        """Every write bumps the version; returns True iff the stored value
        changed, in which case the key's hooks fire exactly once."""
        belief = self._entries.get(key)
        if belief is None:
            self._entries[key] = Belief(value, 1)
            changed, old = True, None
        else:
            belief.version += 1
            changed, old = belief.value != value, belief.value
            belief.value = value
        if changed:
            for hook in self._hooks.get(key, []):
                hook(key, old, value)
        return changed


@dataclass
class Desire:
    name: str
    priority: int           # lower number = more urgent
    active: bool = False


@dataclass
class Intention:
    name: str
    plan: Callable[[], None]
    priority: int           # lower rank = tried first
    exhausted: bool = False
    running: bool = False


@dataclass
class AgentMessage:
    conversation_id: str
    sender: "AgentId"
    to: "AgentId"
    performative: str
    body: Any = None
    reply: bool = False    # replies route only through the sender's result listener


@dataclass
class ResultListener:
    conversation_id: str
    expires_at: float
    on_result: Callable[[AgentMessage], None]
    on_timeout: Callable[[], None]
    done: bool = False
    timer_id: int | None = None


class Agent:
    """Base agent: beliefs with change hooks, prioritized desires/intentions, mailbox."""

    def __init__(self, agent_id: AgentId, runtime: "AgentRuntime"):
        self.id = agent_id
        self.runtime = runtime
        self.beliefs = BeliefStore()
        self.desires: dict[str, Desire] = {}
        self.intentions: dict[str, list[Intention]] = {}

    @property
    def now(self) -> float:
        return self.runtime.kernel.now

    def add_desire(self, name: str, priority: int,
                   intentions: list[Intention] | None = None) -> Desire:
        if name in self.desires:
            raise ValueError(f"{self.id}: desire {name} already defined")
        desire = Desire(name, priority)
        self.desires[name] = desire
        self.intentions[name] = sorted(intentions or [], key=lambda i: i.priority)
        return desire

    def update_belief(self, key: str, value: Any) -> None:
        if self.beliefs.set(key, value):
            self.runtime.trace.emit(self.now, str(self.id), "belief",
                                    key=key, version=self.beliefs.version(key))

    def send(self, msg: AgentMessage, listener: ResultListener | None = None) -> None:
        self.runtime.send_async(msg, listener)

    def handle_message(self, msg: AgentMessage) -> None:
        raise NotImplementedError


def deliberate(agent: Agent) -> Optional[Intention]:
    """Select the lowest-rank not-yet-exhausted intention of the most urgent
    active desire; marks it running. Returns None when every plan is exhausted
    (caller resets the cycle) or no desire is active."""
    active = [d for d in agent.desires.values() if d.active]
    if not active:
        return None
    desire = min(active, key=lambda d: (d.priority, d.name))
    for intention in agent.intentions[desire.name]:
        if not intention.exhausted:
            intention.running = True
            agent.runtime.trace.emit(agent.now, str(agent.id), "intention",
                                     desire=desire.name, intention=intention.name)
            return intention
    return None


class AgentRuntime:
    """Mailbox router on top of the kernel: constant per-hop latency, result
    listeners with expiry, FAILURE bounce for unknown recipients."""

    def __init__(self, kernel: Kernel, latency: float = 0.01, trace: TraceLog | None = None):
        self.kernel = kernel
        self.latency = latency
        self.trace = trace if trace is not None else NULL_TRACE
        self.agents: dict[AgentId, Agent] = {}
        self._listeners: dict[tuple[AgentId, str], ResultListener] = {}
        self.drop_filter: Callable[[AgentMessage], bool] | None = None
        self.listeners_registered = 0
        self.listeners_resolved = 0
        self.listeners_timed_out = 0

    def register(self, agent: Agent) -> None:
        if agent.id in self.agents:
            raise ValueError(f"duplicate agent id {agent.id}")
        self.agents[agent.id] = agent

    def deregister(self, agent_id: AgentId) -> None:
        self.agents.pop(agent_id, None)

    def add_listener(self, owner: AgentId, listener: ResultListener) -> None:
        key = (owner, listener.conversation_id)
        self._listeners[key] = listener
        self.listeners_registered += 1
        listener.timer_id = self.kernel.schedule(
            listener.expires_at, lambda: self._expire(key), kind="listener-timeout")

    def _expire(self, key: tuple[AgentId, str]) -> None:
        listener = self._listeners.pop(key, None)
        if listener is None or listener.done:
            return
        listener.done = True
        self.listeners_timed_out += 1
        self.trace.emit(self.kernel.now, str(key[0]), "listener_timeout",
                        conversation=key[1])
        listener.on_timeout()

    def send_async(self, msg: AgentMessage, listener: ResultListener | None = None) -> None:
        """Enqueue delivery at now + latency; the sender continues immediately."""
        if listener is not None:
            self.add_listener(msg.sender, listener)
        if self.drop_filter is not None and self.drop_filter(msg):
            self.trace.emit(self.kernel.now, str(msg.sender), "drop",
                            to=str(msg.to), performative=msg.performative,
                            conversation=msg.conversation_id)
            return
        self.trace.emit(self.kernel.now, str(msg.sender), "send",
                        to=str(msg.to), performative=msg.performative,
                        conversation=msg.conversation_id)
        self.kernel.schedule(self.kernel.now + self.latency,
                             lambda: self._deliver(msg), kind="deliver")

    def _deliver(self, msg: AgentMessage) -> None:
        recipient = self.agents.get(msg.to)
        if recipient is None:
            bounce = AgentMessage(msg.conversation_id, msg.to, msg.sender,
                                  FAILURE, body={"reason": "unknown-recipient"},
                                  reply=True)
            self.trace.emit(self.kernel.now, str(msg.to), "bounce",
                            conversation=msg.conversation_id)
            self.kernel.schedule(self.kernel.now + self.latency,
                                 lambda: self._deliver(bounce), kind="deliver")
            return
        self.trace.emit(self.kernel.now, str(msg.to), "deliver",
                        sender=str(msg.sender), performative=msg.performative,
                        conversation=msg.conversation_id)
        key = (msg.to, msg.conversation_id)
        listener = self._listeners.get(key)
        if listener is not None:
            del self._listeners[key]
            if listener.done:
                return
            listener.done = True
            self.listeners_resolved += 1
            if listener.timer_id is not None:
                self.kernel.cancel(listener.timer_id)
            listener.on_result(msg)
            return
        if msg.reply:
            # reply arriving after its listener expired: discard
            self.trace.emit(self.kernel.now, str(msg.to), "late_reply",
                            conversation=msg.conversation_id)
            return
        recipient.handle_message(msg)
