"""Per-agent event-triggered broadcast controller.

An agent keeps the last record received from every other agent, a set of
potential neighbors, and a snapshot of its memory taken at its own last
broadcast.  While stopped it plans with fresh disks (radius = promise times
age); while moving it plans with held disks that grow from its own last
broadcast at a reference speed, and only adopts new records when it
broadcasts again.
"""
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from . import geometry as geo
from . import partition as pt
from .density import DensityField


class AgentRecord(NamedTuple):
    time: float
    position: tuple
    speed: float


class BroadcastMsg(NamedTuple):
    sender: int
    record: AgentRecord
    radius: float


class ControlDecision(NamedTuple):
    velocity: np.ndarray
    broadcast: Optional[BroadcastMsg]
    speed_after: float
    target: np.ndarray
    messages: int = 0


@dataclass
class ControlEnv:
    """Quantities shared by every agent."""

    Q: np.ndarray
    field: DensityField
    s_max: float = 0.1
    dt: float = 1.0 / 60.0
    K: int = geo.DEFAULT_CHORDS
    eps_move: Optional[float] = None

    def __post_init__(self):
        self.Q = geo.as_polygon(self.Q)
        if self.eps_move is None:
            self.eps_move = self.s_max * self.dt / 2.0
        d = self.Q[:, None, :] - self.Q[None, :, :]
        self.diameter = float(np.sqrt((d ** 2).sum(-1)).max())


@dataclass
class AgentState:
    id: int
    position: np.ndarray
    speed: float = 0.0
    beta: float = 1.0
    memory: dict = field(default_factory=dict)
    self_broadcast: Optional[AgentRecord] = None
    potential_neighbors: set = field(default_factory=set)
    last_stop_time: float = -math.inf
    wait_until: float = -math.inf
    held: dict = field(default_factory=dict)
    peak_speed: dict = field(default_factory=dict)
    # diagnostics of the last planning pass
    used_ids: tuple = ()
    used_centers: np.ndarray = field(default_factory=lambda: np.zeros((0, 2)))
    used_radii: np.ndarray = field(default_factory=lambda: np.zeros(0))
    last_eval: Optional[pt.CellEvaluation] = None
    grew: bool = False

    def record(self, now):
        return AgentRecord(float(now), (float(self.position[0]), float(self.position[1])), float(self.speed))


def initial_states(positions, Q, rings=2):
    """Agents that know each other exactly at time 0.

    The potential neighbor set starts as the Voronoi neighbors plus their
    neighbors (``rings=2``).
    """
    positions = np.asarray(positions, dtype=float).reshape(-1, 2)
    nbrs = pt.voronoi_neighbors(positions, Q) if len(positions) > 1 else [set()]
    states = []
    for i, p in enumerate(positions):
        J = set(nbrs[i])
        frontier = set(J)
        for _ in range(rings - 1):
            frontier = set().union(*(nbrs[j] for j in frontier)) - {i} if frontier else set()
            J |= frontier
        J.discard(i)
        memory = {j: AgentRecord(0.0, (float(positions[j, 0]), float(positions[j, 1])), 0.0) for j in J}
        s = AgentState(i, p.copy(), memory=memory, potential_neighbors=J)
        s.self_broadcast = s.record(0.0)
        s.held = dict(memory)
        states.append(s)
    return states


# ---------------------------------------------------------------------------
# uncertainty


def uncertainty_now(record, now, cap=math.inf):
    """Disk grown from ``record`` at its promised speed."""
    if record is None:
        raise ValueError("no information")
    if now < record.time - 1e-12:
        raise ValueError("record is from the future")
    r = record.speed * max(now - record.time, 0.0)
    return pt.UncertaintyDisk(np.asarray(record.position, dtype=float), min(r, cap))


def uncertainty_held(record, t_self, now, s_ref, cap=math.inf):
    """Disk grown at the promise up to ``t_self`` and at ``s_ref`` after."""
    if record is None:
        raise ValueError("no information")
    if not (record.time <= t_self + 1e-12 and t_self <= now + 1e-12):
        raise ValueError("held uncertainty needs record time <= own broadcast time <= now")
    r = s_ref * max(now - t_self, 0.0) + record.speed * max(t_self - record.time, 0.0)
    return pt.UncertaintyDisk(np.asarray(record.position, dtype=float), min(r, cap))


# ---------------------------------------------------------------------------
# motion law


def centroid_bound(gc, dc, dual):
    """Radius of the two balls around the cell centroids that hold the true one."""
    if dc.mass <= 0.0:
        raise ValueError("degenerate dual cell")
    cr = geo.min_enclosing_circle(dual).radius
    ratio = min(max(gc.mass, 0.0) / dc.mass, 1.0)
    return 2.0 * cr * (1.0 - ratio)


def target_point(p, gc, dc, bnd):
    return geo.project_onto_lens(p, gc, dc, bnd)


def condition_to_move(p, m, eps_move):
    return float(np.hypot(p[0] - m[0], p[1] - m[1])) > eps_move


def control_input(p, m, s):
    if s == 0.0:
        return np.zeros(2)
    d = np.asarray(m, dtype=float) - np.asarray(p, dtype=float)
    n = float(np.hypot(d[0], d[1]))
    if n == 0.0:
        raise ValueError("moving agent already at its target")
    return s * d / n


def broadcast_radius(p, dual):
    return pt.exclusion_radius(p, dual)


# ---------------------------------------------------------------------------
# memory plumbing


def _receive(state, inbox):
    senders = []
    for msg in inbox:
        if msg.sender == state.id:
            continue
        state.memory[msg.sender] = msg.record
        prev = state.peak_speed.get(msg.sender, 0.0)
        state.peak_speed[msg.sender] = max(prev, msg.record.speed)
        senders.append(msg.sender)
    return senders


def update_potential_neighbors(state, received_from, now, env):
    """Prune/extend the potential neighbor set after a reception.

    Returns the new set; ``state.grew`` records whether it gained members.
    """
    state.grew = False
    if not received_from:
        return set(state.potential_neighbors)
    J = set(state.potential_neighbors)
    new = {j for j in received_from if j not in J and j != state.id}
    cand = sorted(J | new)
    if new:
        center = state.position
        own_r = 0.0
    else:
        sb = state.self_broadcast
        center = np.asarray(sb.position, dtype=float)
        own_r = min(sb.speed * max(now - sb.time, 0.0), env.diameter)
    disks = [uncertainty_now(state.memory[k], now, env.diameter) for k in cand]
    mask = pt.dg_neighbor_mask(center, disks, env.Q, env.K, own_radius=own_r)
    out = {k for k, keep in zip(cand, mask) if keep}
    state.grew = bool(out - J)
    return out


def receive(state, inbox, now, env):
    """Store records, update the potential neighbor set, and answer newcomers.

    Returns the reply broadcast when the set gained members and the agent
    has not broadcast at ``now`` yet, else None.
    """
    senders = _receive(state, inbox)
    state.potential_neighbors = update_potential_neighbors(state, senders, now, env)
    if state.grew and state.last_eval is not None and now != state.self_broadcast.time:
        return _broadcast(state, now, env)
    return None


def fresh_disks(state, now, env):
    ids = sorted(state.potential_neighbors)
    disks = [uncertainty_now(state.memory[j], now, env.diameter) for j in ids]
    return ids, disks


def held_disks(state, now, env, s_ref):
    t_self = state.self_broadcast.time
    ids = sorted(state.potential_neighbors)
    disks = []
    for j in ids:
        rec = state.held.get(j)
        if rec is None:
            rec = state.memory[j]
        disks.append(uncertainty_held(rec, max(t_self, rec.time), now, s_ref, env.diameter))
    return ids, disks


def _plan(state, ids, disks, env):
    centers = np.array([d.center for d in disks]).reshape(-1, 2)
    radii = np.array([d.radius for d in disks], dtype=float)
    ev = pt.evaluate(state.position, centers, radii, env.Q, env.field, env.K)
    state.used_ids = tuple(ids)
    state.used_centers = centers
    state.used_radii = radii
    state.last_eval = ev
    return ev


def _broadcast(state, now, env):
    r = broadcast_radius(state.position, state.last_eval.dual)
    if state.self_broadcast is None or state.speed > state.self_broadcast.speed:
        # a raised promise must reach everyone who may still plan with the old one
        for j in state.potential_neighbors:
            d = uncertainty_now(state.memory[j], now, env.diameter)
            r = max(r, math.hypot(state.position[0] - d.center[0], state.position[1] - d.center[1]) + d.radius)
    rec = state.record(now)
    state.self_broadcast = rec
    state.held = {j: state.memory[j] for j in state.potential_neighbors if j in state.memory}
    state.peak_speed = {j: state.memory[j].speed for j in state.held}
    return BroadcastMsg(state.id, rec, r)


def _decision(state, ev, msg, env):
    m = ev.target
    u = control_input(state.position, m, state.speed) if state.speed > 0 else np.zeros(2)
    return ControlDecision(u, msg, state.speed, m, 1 if msg is not None else 0)


# ---------------------------------------------------------------------------
# controllers


def step_constant(state, inbox, now, env):
    """One tick of the two-speed (stopped / full speed) controller."""
    senders = _receive(state, inbox)
    state.potential_neighbors = update_potential_neighbors(state, senders, now, env)
    moving = state.speed > 0
    if moving:
        ids, disks = held_disks(state, now, env, env.s_max)
    else:
        ids, disks = fresh_disks(state, now, env)
    ev = _plan(state, ids, disks, env)
    valid = condition_to_move(state.position, ev.target, env.eps_move)
    msg = None
    if not moving and valid:
        state.speed = env.s_max
        msg = _broadcast(state, now, env)
    elif moving and not valid:
        ids, disks = fresh_disks(state, now, env)
        ev = _plan(state, ids, disks, env)
        if not condition_to_move(state.position, ev.target, env.eps_move):
            state.speed = 0.0
            state.last_stop_time = now
        msg = _broadcast(state, now, env)
    if msg is None and state.grew and now != state.self_broadcast.time:
        msg = _broadcast(state, now, env)
    return _decision(state, ev, msg, env)


def reference_speed(state):
    """Largest of the own speed and every promise heard since the own broadcast."""
    s = state.speed
    for j in state.potential_neighbors:
        rec = state.held.get(j) or state.memory.get(j)
        if rec is not None:
            s = max(s, rec.speed)
        s = max(s, state.peak_speed.get(j, 0.0))
    return s


def beta_floor(env, dtb):
    """Smallest useful speed factor: covers the motion tolerance within one dwell target."""
    return env.eps_move / (env.s_max * dtb)


def step_variable(state, inbox, now, env, dtb, taud, beta_min=0.0):
    """One tick of the variable-speed controller (speed = beta * s_max).

    Halving never takes beta below ``beta_min``.
    """
    senders = _receive(state, inbox)
    state.potential_neighbors = update_potential_neighbors(state, senders, now, env)
    moving = state.speed > 0
    if moving:
        ids, disks = held_disks(state, now, env, reference_speed(state))
    else:
        ids, disks = fresh_disks(state, now, env)
    ev = _plan(state, ids, disks, env)
    valid = condition_to_move(state.position, ev.target, env.eps_move)
    msg = None
    if not moving and valid and now >= state.wait_until:
        state.speed = state.beta * env.s_max
        msg = _broadcast(state, now, env)
    elif moving and not valid:
        ids, disks = fresh_disks(state, now, env)
        ev = _plan(state, ids, disks, env)
        if now - state.self_broadcast.time < dtb:
            state.beta = max(state.beta / 2.0, beta_min)
        if condition_to_move(state.position, ev.target, env.eps_move):
            state.speed = state.beta * env.s_max
        else:
            state.speed = 0.0
            state.last_stop_time = now
            state.wait_until = now + taud
        msg = _broadcast(state, now, env)
    if msg is None and now != state.self_broadcast.time and (
            state.grew or state.speed > state.self_broadcast.speed):
        msg = _broadcast(state, now, env)
    decision = _decision(state, ev, msg, env)
    if now - state.self_broadcast.time > dtb and state.speed != 0.0:
        state.beta = min(2.0 * state.beta, 1.0)
        state.speed = state.beta * env.s_max
    return decision
