import numpy as np
from hypothesis import given, settings, strategies as st

from armagf import DiskGraphConfig, RandomWaypoint, WaypointConfig, disk_graph


@settings(max_examples=25, deadline=None)
@given(
    st.floats(min_value=0.0, max_value=50.0),
    st.integers(min_value=0, max_value=3),
    st.integers(min_value=0, max_value=2**16),
)
def test_waypoint_in_box_and_speed_bound(speed, pause, seed):
    cfg = WaypointConfig(box=(1000.0, 1000.0), speed=speed, pause=pause)
    wp = RandomWaypoint(20, cfg, seed=seed)
    prev = wp.positions.copy()
    for _ in range(40):
        pos = wp.step()
        assert np.all(pos >= 0.0) and np.all(pos[:, 0] <= 1000.0)
        assert np.all(pos[:, 1] <= 1000.0)
        step_len = np.hypot(*(pos - prev).T)
        assert np.all(step_len <= speed + 1e-9)
        prev = pos


def test_waypoint_speed_zero_is_static():
    wp = RandomWaypoint(10, WaypointConfig(speed=0.0), seed=1)
    p0 = wp.positions.copy()
    for _ in range(5):
        wp.step()
    assert np.array_equal(wp.positions, p0)


def test_waypoint_pause_holds_position():
    cfg = WaypointConfig(box=(10.0, 10.0), speed=100.0, pause=3)
    wp = RandomWaypoint(5, cfg, seed=2)
    wp.step()  # every node reaches its target in one step (speed >> box)
    arrived = wp.positions.copy()
    for _ in range(3):  # paused for 3 iterations
        wp.step()
        assert np.array_equal(wp.positions, arrived)
    wp.step()
    assert not np.array_equal(wp.positions, arrived)


def test_waypoint_deterministic():
    a = RandomWaypoint(15, WaypointConfig(speed=7.0), seed=42)
    b = RandomWaypoint(15, WaypointConfig(speed=7.0), seed=42)
    for _ in range(20):
        assert np.array_equal(a.step(), b.step())


def test_disk_graph_config():
    rng = np.random.default_rng(3)
    pos = rng.uniform(0, 500, (40, 2))
    g = DiskGraphConfig(range_m=120.0).graph(pos)
    assert g == disk_graph(pos, 120.0)


def test_disk_graph_exact_pairs_brute_force():
    rng = np.random.default_rng(9)
    pos = rng.uniform(0, 1000, (150, 2))
    g = disk_graph(pos, 180.0)
    have = {(i, j) for i, j, _ in g.edges}
    for i in range(150):
        for j in range(i + 1, 150):
            d = np.hypot(pos[i, 0] - pos[j, 0], pos[i, 1] - pos[j, 1])
            assert ((i, j) in have) == (d <= 180.0)
