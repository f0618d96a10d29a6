"""Runtime and post-hoc invariant checks for simulation traces."""
import time
from collections import defaultdict

import numpy as np
from numba import njit

from . import controller as ctl
from . import geometry as geo
from . import partition as pt
from .density import mass_centroid

SLACK = 1e-9


def sample_grid(Q, n=100):
    """Cell-centred ``n x n`` grid over the bounding box of ``Q``, clipped to ``Q``."""
    x0, y0 = Q.min(axis=0)
    x1, y1 = Q.max(axis=0)
    xs = x0 + (np.arange(n) + 0.5) * (x1 - x0) / n
    ys = y0 + (np.arange(n) + 0.5) * (y1 - y0) / n
    X, Y = np.meshgrid(xs, ys)
    pts = np.column_stack([X.ravel(), Y.ravel()])
    return pts[geo.points_in_polygon(pts, Q)]


@njit(cache=True)
def _sandwich_counts(pts, positions, i, gv, dgv, tol):
    bad_g = 0
    bad_d = 0
    n = positions.shape[0]
    for k in range(pts.shape[0]):
        x = pts[k, 0]
        y = pts[k, 1]
        di = np.hypot(x - positions[i, 0], y - positions[i, 1])
        dmin = np.inf
        for j in range(n):
            if j != i:
                dmin = min(dmin, np.hypot(x - positions[j, 0], y - positions[j, 1]))
        if di > dmin + tol:
            if gv.shape[0] and geo._point_in_polygon(x, y, gv, geo.TOL):
                bad_g += 1
        elif di < dmin - tol:
            if not geo._point_in_polygon(x, y, dgv, geo.TOL):
                bad_d += 1
    return bad_g, bad_d


def sandwich_violations(i, positions, gv, dgv, pts, tol=SLACK):
    """Sample points breaking ``gv ⊆ V_i ⊆ dgv`` for the exact cell of ``i``."""
    positions = np.ascontiguousarray(positions, dtype=float)
    gv = np.ascontiguousarray(gv, dtype=float).reshape(-1, 2)
    dgv = np.ascontiguousarray(dgv, dtype=float).reshape(-1, 2)
    bg, bd = _sandwich_counts(np.ascontiguousarray(pts, dtype=float), positions, int(i), gv, dgv, tol)
    return int(bg), int(bd)


ALL_CHECKS = ("containment", "broadcast_sufficiency", "neighbors_in_potential_set", "promise_honesty",
              "broadcast_on_speed_change", "descent_sign", "sandwich")


class InvariantMonitor:
    """Observer for :func:`etbcov.sim.run` that counts invariant violations.

    Checks (any subset of :data:`ALL_CHECKS`, every tick unless noted):

    * ``containment``: true positions inside the disks each agent holds for
      its potential neighbors (fresh, held, and the set used for planning);
    * ``broadcast_sufficiency``: broadcasts reach every exact Voronoi neighbor;
    * ``neighbors_in_potential_set``: exact neighbors of a broadcasting agent
      are in its potential neighbor set;
    * ``promise_honesty``: displacement since the own last broadcast within
      the promise (event-triggered controllers);
    * ``broadcast_on_speed_change``: a broadcast whenever the speed rises or
      drops to zero (broadcast-driven controllers);
    * ``descent_sign``: moving agents head to targets on the descent side of
      the exact centroid;
    * ``sandwich``: every ``sandwich_every`` ticks, the planning cells bracket
      the exact Voronoi cell on a ``grid x grid`` sample.

    ``elapsed`` holds the seconds spent per check.
    """

    def __init__(self, scenario, checks=ALL_CHECKS, sandwich_every=10, grid=100):
        unknown = set(checks) - set(ALL_CHECKS)
        if unknown:
            raise ValueError(f"unknown checks {sorted(unknown)}")
        self.scenario = scenario
        self.checks = frozenset(checks)
        self.sandwich_every = sandwich_every
        self.pts = sample_grid(scenario.Q, grid) if "sandwich" in self.checks else None
        self.violations = defaultdict(list)
        self.counts = defaultdict(int)
        self.elapsed = defaultdict(float)
        self.prev_speed = None
        self.etb = scenario.controller.startswith("etb")

    def _flag(self, name, detail):
        self.violations[name].append(detail)

    def __call__(self, k, t, positions, net, decisions):
        on = self.checks
        if "containment" in on:
            t0 = time.perf_counter()
            self._containment(k, t, positions, net)
            self.elapsed["containment"] += time.perf_counter() - t0
        t0 = time.perf_counter()
        per_broadcast = on & {"broadcast_sufficiency", "neighbors_in_potential_set"}
        adj = None
        if per_broadcast and any(d.broadcast is not None for d in decisions):
            adj = pt.neighbor_matrix(positions, self.scenario.Q)
        for s, d in zip(net.states, decisions):
            i = s.id
            if d.broadcast is not None:
                self.counts["broadcasts"] += 1
            if adj is not None and d.broadcast is not None:
                nbrs = np.flatnonzero(adj[i])
                if "broadcast_sufficiency" in on:
                    far = [int(j) for j in nbrs
                           if np.hypot(*(positions[j] - positions[i])) > d.broadcast.radius + SLACK]
                    if far:
                        self._flag("broadcast_sufficiency", (k, i, far))
                if "neighbors_in_potential_set" in on:
                    missing = [int(j) for j in nbrs if int(j) not in s.potential_neighbors]
                    if missing:
                        self._flag("neighbors_in_potential_set", (k, i, missing))
            if "promise_honesty" in on and self.etb and s.self_broadcast is not None:
                sb = s.self_broadcast
                moved = float(np.hypot(positions[i, 0] - sb.position[0], positions[i, 1] - sb.position[1]))
                if moved > sb.speed * (t - sb.time) + SLACK:
                    self._flag("promise_honesty", (k, i, moved))
            if ("broadcast_on_speed_change" in on and self.prev_speed is not None
                    and self.scenario.controller != "self-triggered"):
                before = self.prev_speed[i]
                after = d.speed_after
                if (after > before or (after == 0 and before > 0)) and d.broadcast is None:
                    self._flag("broadcast_on_speed_change", (k, i, before, after))
        self.elapsed["protocol"] += time.perf_counter() - t0
        if "descent_sign" in on:
            t0 = time.perf_counter()
            for s, d in zip(net.states, decisions):
                if d.speed_after > 0:
                    i = s.id
                    self.counts["descent_checks"] += 1
                    cell = pt.voronoi_cell(i, positions, self.scenario.Q)
                    c = mass_centroid(cell, self.scenario.density).centroid
                    val = float(np.dot(positions[i] - c, positions[i] - d.target))
                    if val < -SLACK:
                        self._flag("descent_sign", (k, i, val))
            self.elapsed["descent_sign"] += time.perf_counter() - t0
        self.prev_speed = [d.speed_after for d in decisions]
        if "sandwich" in on and k % self.sandwich_every == 0:
            t0 = time.perf_counter()
            self._sandwich(k, positions, net)
            self.elapsed["sandwich"] += time.perf_counter() - t0

    def _containment(self, k, t, positions, net):
        env = net.env
        for s in net.states:
            sets = []
            if net.oracle:
                sets.append((s.used_ids, s.used_centers, s.used_radii))
            else:
                ids, disks = ctl.fresh_disks(s, t, env)
                sets.append((ids, [dk.center for dk in disks], [dk.radius for dk in disks]))
                if s.speed > 0 and self.scenario.controller != "periodic":
                    sref = env.s_max if self.scenario.controller == "etb-constant" else ctl.reference_speed(s)
                    ids, disks = ctl.held_disks(s, t, env, sref)
                    sets.append((ids, [dk.center for dk in disks], [dk.radius for dk in disks]))
                sets.append((s.used_ids, s.used_centers, s.used_radii))
            for ids, centers, radii in sets:
                if len(ids) == 0:
                    continue
                c = np.asarray(centers, dtype=float).reshape(-1, 2)
                gap = np.hypot(positions[list(ids), 0] - c[:, 0], positions[list(ids), 1] - c[:, 1])
                over = gap - np.asarray(radii, dtype=float)
                self.counts["containment_checks"] += len(ids)
                for j, o in zip(ids, over):
                    if o > SLACK:
                        self._flag("containment", (k, s.id, int(j), float(o)))

    def _sandwich(self, k, positions, net):
        for s in net.states:
            ev = s.last_eval
            if ev is None:
                continue
            self.counts["sandwich_checks"] += 1
            bg, bd = sandwich_violations(s.id, positions, ev.guaranteed, ev.dual, self.pts)
            if bg or bd:
                self._flag("sandwich", (k, s.id, bg, bd))

    def summary(self):
        """Violation count per enabled check."""
        return {name: len(self.violations.get(name, ())) for name in ALL_CHECKS if name in self.checks}


# ---------------------------------------------------------------------------
# post-hoc checks on a trace file


def check_trace(trace_rows, Q, etb=True):
    """Invariant violations recomputable from a written trace alone."""
    times, pos, speed, bc, rad, recv = trace_rows
    Q = geo.as_polygon(Q)
    out = defaultdict(int)
    steps, N, _ = pos.shape
    last = [None] * N
    for k in range(steps):
        for i in range(N):
            if not geo.point_in_polygon(pos[k, i], Q):
                out["outside_domain"] += 1
        if k == steps - 1:
            break
        nb = pt.voronoi_neighbors(pos[k], Q) if N > 1 else [set()]
        for i in range(N):
            if bc[k, i] and rad[k, i] > 0:
                d = np.hypot(pos[k, :, 0] - pos[k, i, 0], pos[k, :, 1] - pos[k, i, 1])
                inside = {j for j in range(N) if j != i and d[j] <= rad[k, i]}
                if inside != set(recv[k][i]):
                    out["receiver_set"] += 1
                if any(d[j] > rad[k, i] + SLACK for j in nb[i]):
                    out["broadcast_sufficiency"] += 1
            if etb:
                if k > 0:
                    before, after = speed[k - 1, i], speed[k, i]
                    if (after > before or (after == 0 and before > 0)) and not bc[k, i]:
                        out["broadcast_on_speed_change"] += 1
                if bc[k, i]:
                    last[i] = (times[k], pos[k, i].copy(), speed[k, i])
                elif last[i] is not None:
                    t0, p0, s0 = last[i]
                    if np.hypot(*(pos[k, i] - p0)) > s0 * (times[k] - t0) + SLACK:
                        out["promise_honesty"] += 1
    return dict(out)
