"""Deterministic time-stepped engine, broadcast medium and baselines.

Every tick all agents decide from the records held at the start of the
tick.  Broadcasts then reach every agent inside the sender's radius (closed
ball, true positions at send time) within the same tick; receivers store the
records, update their potential neighbors and, for the event-triggered
controllers, answer newly found neighbors with a broadcast of their own.
Stored records steer motion from the next tick on.  Agents finally move
toward their target points, never overshooting them.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import controller as ctl
from . import geometry as geo
from . import partition as pt
from .density import DensityField, objective_H, two_peak_field

log = logging.getLogger(__name__)

CONTROLLERS = ("periodic", "etb-constant", "etb-variable", "self-triggered")

EIGHT_AGENT_POSITIONS = np.array([
    (11.8, 36.3), (1.1, 6.0), (11.7, 20.1), (15.3, 5.5),
    (11.6, 1.0), (7.5, 9.1), (17.0, 15.3), (13.5, 6.3),
])


class ContainmentViolation(RuntimeError):
    pass


@dataclass
class Scenario:
    Q: np.ndarray = field(default_factory=lambda: geo.rectangle(0.0, 0.0, 40.0, 40.0))
    density: DensityField = field(default_factory=two_peak_field)
    initial_positions: np.ndarray = field(default_factory=lambda: EIGHT_AGENT_POSITIONS.copy())
    s_max: float = 0.1
    dt: float = 1.0 / 60.0
    duration: float = 600.0
    controller: str = "etb-constant"
    K: int = geo.DEFAULT_CHORDS
    seed: int = 0
    dtb: float = 45.0 / 60.0
    taud: Optional[float] = None
    beta_min: Optional[float] = None
    h_stride: int = 60
    eps_move: Optional[float] = None
    clamp: bool = True

    def __post_init__(self):
        self.Q = geo.as_polygon(self.Q)
        self.initial_positions = np.asarray(self.initial_positions, dtype=float).reshape(-1, 2)
        if self.controller not in CONTROLLERS:
            raise ValueError(f"unknown controller {self.controller!r}; valid: {', '.join(CONTROLLERS)}")
        if not self.dt > 0:
            raise ValueError("time step must be positive")
        if self.duration < 0:
            raise ValueError("duration must be non-negative")
        if self.taud is None:
            self.taud = 10.0 * self.dt
        P = self.initial_positions
        if len(P) == 0:
            raise ValueError("scenario needs at least one agent")
        for p in P:
            if not geo.point_in_polygon(p, self.Q):
                raise ValueError(f"initial position {tuple(p)} outside the domain")
        if len({(float(x), float(y)) for x, y in P}) != len(P):
            raise ValueError("initial positions must be distinct")

    @property
    def n_steps(self):
        return int(round(self.duration / self.dt))

    @property
    def n_agents(self):
        return len(self.initial_positions)

    def env(self):
        return ctl.ControlEnv(self.Q, self.density, self.s_max, self.dt, self.K, self.eps_move)


@dataclass
class SimTrace:
    controller: str
    times: np.ndarray
    positions: np.ndarray          # (steps + 1, N, 2)
    speeds: np.ndarray             # speed used over [t_k, t_k+1)
    broadcast: np.ndarray          # (steps + 1, N) bool
    radius: np.ndarray             # broadcast radius, 0 if none
    receivers: list                # per step, per agent: tuple of ids
    msgs_step: np.ndarray          # messages counted at each step
    H_steps: np.ndarray
    H_values: np.ndarray

    @property
    def msgs_cum(self):
        return np.cumsum(self.msgs_step)

    @property
    def total_messages(self):
        return int(self.msgs_step.sum())


def deliver(broadcasts, positions):
    """Inboxes per agent; ``j``'s message reaches ``i != j`` iff ``|p_i - p_j| <= r_j``."""
    positions = np.asarray(positions, dtype=float).reshape(-1, 2)
    inboxes = [[] for _ in range(len(positions))]
    receivers = {}
    for msg in sorted(broadcasts, key=lambda m: m.sender):
        pj = positions[msg.sender]
        d = np.hypot(positions[:, 0] - pj[0], positions[:, 1] - pj[1])
        got = []
        for i in np.flatnonzero(d <= msg.radius):
            if i != msg.sender:
                inboxes[i].append(msg)
                got.append(int(i))
        receivers[msg.sender] = tuple(got)
    return inboxes, receivers


# ---------------------------------------------------------------------------
# networks: one object per controller family


class _BroadcastNetwork:
    """Agents driven by inbox-only controllers (event-triggered or periodic)."""

    oracle = False

    def __init__(self, scenario):
        self.scenario = scenario
        self.env = scenario.env()
        self.states = ctl.initial_states(scenario.initial_positions, scenario.Q)
        kind = scenario.controller
        if kind == "etb-constant":
            self._step = lambda s, t: ctl.step_constant(s, [], t, self.env)
        elif kind == "etb-variable":
            beta_min = scenario.beta_min
            if beta_min is None:
                beta_min = ctl.beta_floor(self.env, scenario.dtb)
            self._step = lambda s, t: ctl.step_variable(
                s, [], t, self.env, scenario.dtb, scenario.taud, beta_min)
        else:
            self._step = lambda s, t: periodic_controller(s, [], t, self.env)

    def decide(self, t, positions):
        decisions = [self._step(s, t) for s in self.states]
        if self.scenario.controller == "periodic":
            msgs = [d.broadcast for d in decisions]
            inboxes, receivers = deliver(msgs, positions)
            for s in self.states:
                periodic_receive(s, inboxes[s.id])
            return decisions, receivers
        return self._handshake(t, positions, decisions)

    def _handshake(self, t, positions, decisions):
        """Deliver this tick's broadcasts and let receivers answer newcomers.

        Records only affect motion from the next tick on; the replies to new
        potential neighbors are resolved inside the tick, each agent
        broadcasting at most once per tick.
        """
        receivers = {}
        pending = [d.broadcast for d in decisions if d.broadcast is not None]
        while pending:
            inboxes, got = deliver(pending, positions)
            receivers.update(got)
            pending = []
            for s in self.states:
                if not inboxes[s.id]:
                    continue
                msg = ctl.receive(s, inboxes[s.id], t, self.env)
                if msg is not None:
                    decisions[s.id] = decisions[s.id]._replace(
                        broadcast=msg, messages=1, speed_after=s.speed)
                    pending.append(msg)
        return decisions, receivers


def periodic_controller(state, inbox, now, env):
    """Broadcast every tick; plan with disks one tick old."""
    periodic_receive(state, inbox)
    ids, disks = ctl.fresh_disks(state, now, env)
    ev = ctl._plan(state, ids, disks, env)
    valid = ctl.condition_to_move(state.position, ev.target, env.eps_move)
    state.speed = env.s_max if valid else 0.0
    msg = ctl._broadcast(state, now, env)
    return ctl._decision(state, ev, msg, env)


def periodic_receive(state, inbox):
    """Store records; the potential neighbors are exactly this tick's senders."""
    senders = ctl._receive(state, inbox)
    if senders:
        state.potential_neighbors = set(senders)


class _SelfTriggeredNetwork:
    """Idealized request/response baseline.

    Agents know their exact Voronoi neighbors.  When an agent cannot certify
    progress it requests fresh records from all neighbors (one request plus
    one response per neighbor, delivered within the tick) and its own updated
    record reaches those neighbors with the request.  Agents are handled in
    id order inside a tick so every exchange sees the latest decisions.
    """

    oracle = True

    def __init__(self, scenario):
        self.scenario = scenario
        self.env = scenario.env()
        self.states = ctl.initial_states(scenario.initial_positions, scenario.Q)
        n = len(self.states)
        # tracked[i, j]: j has stayed a neighbor of i since i's record of j,
        # so any speed change of j was announced to i
        self.tracked = np.zeros((n, n), dtype=bool)
        for s in self.states:
            for j in s.memory:
                self.tracked[s.id, j] = True

    def _disks(self, s, ids, now):
        env = self.env
        disks = []
        for j in ids:
            rec = s.memory.get(j)
            if rec is None:
                return None
            rate = rec.speed if self.tracked[s.id, j] else env.s_max
            r = min(rate * (now - rec.time), env.diameter)
            disks.append(pt.UncertaintyDisk(np.asarray(rec.position), r))
        return disks

    def _exchange(self, s, nbrs, now, positions):
        for j in nbrs:
            o = self.states[j]
            s.memory[j] = ctl.AgentRecord(now, (float(positions[j, 0]), float(positions[j, 1])), o.speed)
            self.tracked[s.id, j] = True

    def _announce(self, s, nbrs, now):
        rec = s.record(now)
        s.self_broadcast = rec
        for j in nbrs:
            self.states[j].memory[s.id] = rec
            self.tracked[j, s.id] = True

    def decide(self, t, positions):
        env = self.env
        adj = pt.neighbor_matrix(positions, self.scenario.Q)
        self.tracked &= adj
        decisions = []
        receivers = {}
        for s in self.states:
            nbrs = sorted(np.flatnonzero(adj[s.id]).tolist())
            s.potential_neighbors = set(nbrs)
            disks = self._disks(s, nbrs, t)
            ev = None
            valid = False
            if disks is not None:
                ev = ctl._plan(s, nbrs, disks, env)
                valid = ctl.condition_to_move(s.position, ev.target, env.eps_move)
            moving = s.speed > 0
            if moving and valid:
                need = False
            elif moving:
                need = True
            elif disks is None or valid:
                need = True
            else:
                # stopped: ask only when stale information could be hiding progress
                need = ev.bound > env.eps_move
            msgs = 0
            if need:
                self._exchange(s, nbrs, t, positions)
                ev = ctl._plan(s, nbrs, self._disks(s, nbrs, t), env)
                s.speed = env.s_max if ctl.condition_to_move(s.position, ev.target, env.eps_move) else 0.0
                self._announce(s, nbrs, t)
                msgs = 1 + len(nbrs)
                receivers[s.id] = tuple(nbrs)
            u = ctl.control_input(s.position, ev.target, s.speed) if s.speed > 0 else np.zeros(2)
            decisions.append(ctl.ControlDecision(u, None, s.speed, ev.target, msgs))
        return decisions, receivers


def make_network(scenario):
    if scenario.controller == "self-triggered":
        return _SelfTriggeredNetwork(scenario)
    return _BroadcastNetwork(scenario)


# ---------------------------------------------------------------------------
# engine


def run(scenario, observer=None):
    """Simulate ``scenario``; ``observer(k, t, positions, net, decisions)`` sees every tick."""
    net = make_network(scenario)
    n = scenario.n_steps
    N = scenario.n_agents
    dt = scenario.dt
    Q = scenario.Q
    positions = scenario.initial_positions.copy()
    P = np.empty((n + 1, N, 2))
    speeds = np.zeros((n + 1, N))
    bcast = np.zeros((n + 1, N), dtype=bool)
    radius = np.zeros((n + 1, N))
    receivers = []
    msgs = np.zeros(n + 1, dtype=np.int64)
    H_steps = []
    H_values = []
    for k in range(n + 1):
        t = k * dt
        P[k] = positions
        if k % scenario.h_stride == 0 or k == n:
            H_steps.append(k)
            H_values.append(objective_H(positions, Q, scenario.density))
        if k == n:
            speeds[k] = [s.speed for s in net.states]
            receivers.append([() for _ in range(N)])
            break
        decisions, rec = net.decide(t, positions)
        row = [()] * N
        for i, d in enumerate(decisions):
            speeds[k, i] = d.speed_after
            msgs[k] += d.messages
            if d.broadcast is not None:
                bcast[k, i] = True
                radius[k, i] = d.broadcast.radius
            elif d.messages:
                bcast[k, i] = True
            if i in rec:
                row[i] = rec[i]
        receivers.append(row)
        if observer is not None:
            observer(k, t, positions, net, decisions)
        new = positions.copy()
        for i, d in enumerate(decisions):
            if d.speed_after > 0:
                gap = d.target - positions[i]
                dist = float(np.hypot(gap[0], gap[1]))
                step = min(d.speed_after * dt, dist) if scenario.clamp else d.speed_after * dt
                if dist > 0:
                    new[i] = positions[i] + gap * (step / dist)
        for i in range(N):
            if not geo.point_in_polygon(new[i], Q):
                raise ContainmentViolation(f"containment violation: agent {i} left the domain at t={t + dt:.6f}")
        positions = new
        for s in net.states:
            s.position = positions[s.id].copy()
        if k % 3600 == 0:
            log.info("%s t=%.0fs messages=%d", scenario.controller, t, int(msgs[:k + 1].sum()))
    times = np.arange(n + 1) * dt
    return SimTrace(scenario.controller, times, P, speeds, bcast, radius, receivers, msgs,
                    np.array(H_steps), np.array(H_values))


# ---------------------------------------------------------------------------
# metrics and serialization


def reduction(msgs_a, msgs_b):
    """Percent fewer messages in A than in B."""
    if msgs_b == 0:
        return 0.0 if msgs_a == 0 else -math.inf
    return 100.0 * (1.0 - msgs_a / msgs_b)


def compute_metrics(trace, reference=None):
    out = {
        "controller": trace.controller,
        "H_t": trace.times[trace.H_steps],
        "H": trace.H_values,
        "msgs_step": trace.msgs_step,
        "msgs_cum": trace.msgs_cum,
        "total": trace.total_messages,
        "H_final": float(trace.H_values[-1]),
    }
    if reference is not None:
        out["reduction"] = reduction(trace.total_messages, reference.total_messages)
    return out


TRACE_HEADER = "# etb-trace v1"


def _fmt(x):
    return repr(float(x))


def write_trace_csv(trace, path):
    N = trace.positions.shape[1]
    with open(path, "w", newline="\n") as fh:
        fh.write(TRACE_HEADER + "\n")
        fh.write("t,agent,x,y,speed,broadcast,radius,receivers\n")
        for k, t in enumerate(trace.times):
            for i in range(N):
                rec = ";".join(str(j) for j in trace.receivers[k][i])
                fh.write(f"{_fmt(t)},{i},{_fmt(trace.positions[k, i, 0])},{_fmt(trace.positions[k, i, 1])},"
                         f"{_fmt(trace.speeds[k, i])},{int(trace.broadcast[k, i])},"
                         f"{_fmt(trace.radius[k, i])},{rec}\n")


def write_metrics_csv(trace, path):
    H = dict(zip(trace.H_steps.tolist(), trace.H_values.tolist()))
    cum = trace.msgs_cum
    with open(path, "w", newline="\n") as fh:
        fh.write(TRACE_HEADER + "\n")
        fh.write("t,H,msgs_cum,msgs_step\n")
        for k, t in enumerate(trace.times):
            h = _fmt(H[k]) if k in H else ""
            fh.write(f"{_fmt(t)},{h},{int(cum[k])},{int(trace.msgs_step[k])}\n")


def read_trace_csv(path):
    """Rows of a trace file as arrays: times, positions, speeds, broadcast, radius, receivers."""
    with open(path) as fh:
        header = fh.readline().strip()
        if header != TRACE_HEADER:
            raise ValueError(f"{path}: not an etb trace (header {header!r})")
        cols = fh.readline().strip()
        if cols != "t,agent,x,y,speed,broadcast,radius,receivers":
            raise ValueError(f"{path}: unexpected columns {cols!r}")
        rows = [line.rstrip("\n").split(",") for line in fh if line.strip()]
    N = max(int(r[1]) for r in rows) + 1
    steps = len(rows) // N
    times = np.array([float(rows[k * N][0]) for k in range(steps)])
    pos = np.array([[float(r[2]), float(r[3])] for r in rows]).reshape(steps, N, 2)
    speed = np.array([float(r[4]) for r in rows]).reshape(steps, N)
    bc = np.array([int(r[5]) for r in rows], dtype=bool).reshape(steps, N)
    rad = np.array([float(r[6]) for r in rows]).reshape(steps, N)
    recv = [[tuple(int(x) for x in rows[k * N + i][7].split(";") if x) for i in range(N)]
            for k in range(steps)]
    return times, pos, speed, bc, rad, recv
