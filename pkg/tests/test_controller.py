import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from etbcov import controller as ctl
from etbcov import geometry as geo
from etbcov import partition as pt
from etbcov import sim
from etbcov.density import DensityField, MassCentroid, mass_centroid, two_peak_field
from strategies import points, uncertain_configurations

BOX = geo.rectangle(0, 0, 40, 40)


# ---------------------------------------------------------------------------
# uncertainty disks


def test_uncertainty_now_examples():
    d = ctl.uncertainty_now(ctl.AgentRecord(0.0, (5.0, 5.0), 0.1), 10.0)
    assert np.allclose(d.center, [5, 5]) and d.radius == pytest.approx(1.0)
    assert ctl.uncertainty_now(ctl.AgentRecord(0.0, (5.0, 5.0), 0.0), 1e6).radius == 0.0
    assert ctl.uncertainty_now(ctl.AgentRecord(3.0, (5.0, 5.0), 0.1), 3.0).radius == 0.0


def test_uncertainty_now_cap_and_errors():
    assert ctl.uncertainty_now(ctl.AgentRecord(0.0, (1.0, 1.0), 0.1), 1e6, cap=56.0).radius == 56.0
    with pytest.raises(ValueError, match="no information"):
        ctl.uncertainty_now(None, 1.0)
    with pytest.raises(ValueError):
        ctl.uncertainty_now(ctl.AgentRecord(2.0, (1.0, 1.0), 0.1), 1.0)


def test_uncertainty_held_examples():
    rec = ctl.AgentRecord(0.0, (1.0, 2.0), 0.0)
    assert ctl.uncertainty_held(rec, 5.0, 10.0, 0.1).radius == pytest.approx(0.5)
    with pytest.raises(ValueError):
        ctl.uncertainty_held(rec, 11.0, 10.0, 0.1)
    with pytest.raises(ValueError, match="no information"):
        ctl.uncertainty_held(None, 1.0, 2.0, 0.1)


@given(st.floats(0, 100), st.floats(0, 50), st.floats(0, 50), st.floats(0, 0.1), st.floats(0, 0.1))
def test_uncertainty_held_reductions(t0, a, b, promise, s_ref):
    rec = ctl.AgentRecord(t0, (3.0, 4.0), promise)
    now = t0 + a + b
    # no held interval: grows at the reference speed from the record
    assert ctl.uncertainty_held(rec, t0, now, s_ref).radius == pytest.approx(s_ref * (a + b), abs=1e-12)
    # reference equal to the promise: identical to the fresh disk
    held = ctl.uncertainty_held(rec, t0 + a, now, promise).radius
    assert held == pytest.approx(ctl.uncertainty_now(rec, now).radius, abs=1e-12)


# ---------------------------------------------------------------------------
# motion law


def test_centroid_bound_examples():
    mc = MassCentroid(10.0, (50.0, 50.0))
    assert ctl.centroid_bound(mc, mc, BOX) == 0.0
    empty = MassCentroid(0.0, (0.0, 0.0))
    assert ctl.centroid_bound(empty, mc, BOX) == pytest.approx(2 * 20 * math.sqrt(2))
    with pytest.raises(ValueError, match="degenerate dual cell"):
        ctl.centroid_bound(empty, empty, BOX)


def test_target_point_examples():
    c = np.array([20.0, 20.0])
    assert np.allclose(ctl.target_point((3.0, 4.0), c, c, 0.0), c)
    p = np.array([20.1, 20.0])
    m = ctl.target_point(p, c, c + [0.2, 0.0], 0.5)
    assert np.allclose(m, p)
    assert not ctl.condition_to_move(p, m, 1e-3)


@given(uncertain_configurations(max_agents=8))
def test_target_point_heads_toward_true_centroid(conf):
    truth, centers, radii, i = conf
    keep = [j for j in range(len(truth)) if j != i]
    ev = pt.evaluate(truth[i], centers[keep], radii[keep], BOX, two_peak_field())
    c = mass_centroid(pt.voronoi_cell(i, truth, BOX), two_peak_field()).centroid
    p, m = truth[i], ev.target
    if np.hypot(*(p - m)) < 1e-6:
        return
    # the lens is convex and holds c, so (p - c).(p - m) >= |p - m|^2
    assert np.dot(p - c, p - m) >= np.dot(p - m, p - m) - 1e-6


def test_condition_to_move_examples():
    eps = 0.1 / 60 / 2
    assert ctl.condition_to_move((0.0, 0.0), (1.0, 0.0), eps)
    assert not ctl.condition_to_move((2.0, 3.0), (2.0, 3.0), eps)
    assert not ctl.condition_to_move((0.0, 0.0), (eps / 2, 0.0), eps)


def test_control_input_examples():
    assert np.array_equal(ctl.control_input((1.0, 1.0), (1.0, 1.0), 0.0), [0.0, 0.0])
    assert np.allclose(ctl.control_input((0.0, 0.0), (3.0, 4.0), 0.1), [0.06, 0.08])
    with pytest.raises(ValueError):
        ctl.control_input((1.0, 1.0), (1.0, 1.0), 0.1)


@given(points(), points(), st.floats(0, 0.1))
def test_control_input_norm(p, m, s):
    if s > 0 and np.array_equal(p, m):
        return
    n = float(np.hypot(*ctl.control_input(p, m, s)))
    assert min(abs(n), abs(n - s)) <= 1e-12


# ---------------------------------------------------------------------------
# broadcast radius and potential neighbors


def test_broadcast_radius_isolated_center():
    assert ctl.broadcast_radius((20.0, 20.0), BOX) == pytest.approx(2 * 20 * math.sqrt(2))


@given(points(5, 35), st.floats(1, 20))
def test_broadcast_radius_shrinks_with_dual(p, cut):
    smaller = geo.clip_halfplane(BOX, geo.HalfPlane((1.0, 0.0), p[0] + cut))
    assert ctl.broadcast_radius(p, smaller) <= ctl.broadcast_radius(p, BOX) + 1e-12


def test_broadcast_radius_reaches_dual_neighbors_at_start():
    P = sim.EIGHT_AGENT_POSITIONS
    cells = [pt.dual_guaranteed_cell(P[k], [pt.UncertaintyDisk(P[j], 0.0) for j in range(len(P)) if j != k], BOX)
             for k in range(len(P))]
    for i in range(len(P)):
        r = ctl.broadcast_radius(P[i], cells[i])
        for j in range(len(P)):
            if j != i and pt.dg_neighbor(i, j, cells):
                assert np.hypot(*(P[j] - P[i])) <= r


def env():
    return ctl.ControlEnv(BOX, two_peak_field())


def test_raised_promise_reaches_whole_potential_set():
    P = sim.EIGHT_AGENT_POSITIONS
    s = ctl.initial_states(P, BOX)[0]
    e = env()
    far = max(s.potential_neighbors, key=lambda j: np.hypot(*(P[j] - P[0])))
    s.memory[far] = ctl.AgentRecord(0.0, tuple(P[far]), 0.05)
    ctl._plan(s, *ctl.fresh_disks(s, 10.0, e), e)
    plain = ctl.broadcast_radius(P[0], s.last_eval.dual)
    s.speed = 0.1
    r = ctl._broadcast(s, 10.0, e).radius
    assert r >= np.hypot(*(P[far] - P[0])) + 0.5 - 1e-12 and r >= plain
    # same promise again: the plain radius is enough
    assert ctl._broadcast(s, 10.0, e).radius == pytest.approx(plain)


def test_no_reception_keeps_potential_neighbors():
    s = ctl.initial_states(sim.EIGHT_AGENT_POSITIONS, BOX)[0]
    before = set(s.potential_neighbors)
    assert ctl.update_potential_neighbors(s, [], 5.0, env()) == before
    assert not s.grew


def test_reception_prunes_far_agent():
    P = np.array([[2.0, 2.0], [38.0, 38.0], [20.0, 20.0]])
    s = ctl.initial_states(P, BOX)[0]
    assert s.potential_neighbors == {1, 2}
    s.memory[1] = ctl.AgentRecord(1.0, (38.0, 38.0), 0.01)
    s.memory[2] = ctl.AgentRecord(1.0, (20.0, 20.0), 0.01)
    J = ctl.update_potential_neighbors(s, [1], 1.0, env())
    assert J == {2} == pt.voronoi_neighbors(P, BOX)[0]


def test_reception_from_newcomer_grows_set():
    P = np.array([[2.0, 2.0], [38.0, 38.0], [20.0, 20.0]])
    s = ctl.initial_states(P, BOX)[0]
    s.potential_neighbors = {2}
    del s.memory[1]
    ctl._receive(s, [ctl.BroadcastMsg(1, ctl.AgentRecord(0.0, (21.0, 2.0), 0.0), 50.0)])
    J = ctl.update_potential_neighbors(s, [1], 0.0, env())
    assert J == {1, 2} and s.grew


def test_two_agent_mutual_potential_neighbors():
    sc = sim.Scenario(initial_positions=[(5.0, 5.0), (12.0, 30.0)], duration=30.0)
    seen = []

    def observer(k, t, positions, net, decisions):
        a, b = net.states
        seen.append(1 in a.potential_neighbors and 0 in b.potential_neighbors)

    sim.run(sc, observer)
    assert all(seen)


def test_initial_states_know_two_rings():
    states = ctl.initial_states(sim.EIGHT_AGENT_POSITIONS, BOX)
    nb = pt.voronoi_neighbors(sim.EIGHT_AGENT_POSITIONS, BOX)
    for s in states:
        ring2 = set().union(*(nb[j] for j in nb[s.id])) - {s.id}
        assert s.potential_neighbors == nb[s.id] | ring2
        assert s.id not in s.potential_neighbors
        assert all(s.memory[j].speed == 0.0 for j in s.potential_neighbors)


# ---------------------------------------------------------------------------
# full controllers


def single_agent(start, controller="etb-constant", duration=25.0):
    sc = sim.Scenario(Q=geo.rectangle(0, 0, 4, 4), density=DensityField.uniform(1.0),
                      initial_positions=[start], duration=duration, controller=controller)
    return sim.run(sc)


def test_single_agent_at_centroid_never_moves():
    tr = single_agent((2.0, 2.0))
    assert tr.total_messages == 0
    assert np.allclose(tr.positions[-1], [[2.0, 2.0]])


@pytest.mark.parametrize("controller", ["etb-constant", "etb-variable"])
def test_single_agent_runs_straight_to_centroid(controller):
    tr = single_agent((1.0, 1.0), controller)
    assert tr.total_messages == 2
    assert np.allclose(tr.positions[-1, 0], [2.0, 2.0], atol=1e-12)
    # straight line: every sample on the diagonal
    assert np.allclose(tr.positions[:, 0, 0], tr.positions[:, 0, 1])
    steps = np.flatnonzero(tr.msgs_step)
    assert steps[0] == 0
    # arrival takes sqrt(2) m at 0.1 m/s
    assert steps[1] == math.ceil(math.sqrt(2) / 0.1 * 60 - 1e-9)


@pytest.fixture(scope="module")
def variable_run():
    sc = sim.Scenario(controller="etb-variable", duration=60.0)
    betas, speeds, events = [], [], []

    def observer(k, t, positions, net, decisions):
        for s, d in zip(net.states, decisions):
            betas.append(s.beta)
            speeds.append((s.speed, s.beta))
            events.append((k, s.id, d.speed_after, d.broadcast is not None))

    tr = sim.run(sc, observer)
    return tr, betas, speeds, events


def test_beta_stays_in_unit_interval(variable_run):
    _, betas, speeds, _ = variable_run
    floor = ctl.beta_floor(ctl.ControlEnv(BOX, two_peak_field()), 45 / 60)
    assert all(floor <= b <= 1.0 for b in betas)
    assert all(s <= b * 0.1 + 1e-15 for s, b in speeds)
    assert min(betas) < 1.0


def test_beta_floor_covers_tolerance_in_one_dwell():
    env = ctl.ControlEnv(BOX, two_peak_field())
    floor = ctl.beta_floor(env, 45 / 60)
    assert floor == pytest.approx(1 / 90)
    assert floor * env.s_max * 45 / 60 == pytest.approx(env.eps_move)


def test_halving_respects_floor():
    s = ctl.initial_states(sim.EIGHT_AGENT_POSITIONS, BOX)[0]
    e = env()
    floors = []
    for k in range(1, 400):
        ctl.step_variable(s, [], k / 60, e, 45 / 60, 10 / 60, beta_min=0.3)
        floors.append(s.beta)
    assert min(floors) >= 0.3


def test_speed_increase_and_stop_carry_broadcast(variable_run):
    _, _, _, events = variable_run
    prev = {}
    for k, i, speed, bc in events:
        before = prev.get(i, 0.0)
        if speed > before or (speed == 0.0 and before > 0.0):
            assert bc, (k, i)
        prev[i] = speed
