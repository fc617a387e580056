"""Random waypoint mobility and disk-graph construction."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .graphs import Graph, disk_graph


@dataclass(frozen=True)
class DiskGraphConfig:
    """Communication range for position-induced graphs (meters)."""

    range_m: float = 180.0

    def graph(self, positions) -> Graph:
        return disk_graph(positions, self.range_m)


@dataclass(frozen=True)
class WaypointConfig:
    """Random waypoint parameters: constant speed toward uniform targets."""

    box: tuple[float, float] = (1000.0, 1000.0)
    speed: float = 5.0            # meters per iteration
    pause: int = 0                # iterations to wait at each waypoint

    def __post_init__(self):
        if self.speed < 0:
            raise InputError("speed must be >= 0")
        if self.pause < 0:
            raise InputError("pause must be >= 0")


class RandomWaypoint:
    """Mutable mobility state: each node moves toward its own waypoint.

    Per iteration every node advances at most ``speed`` meters; positions
    never leave the box (targets are inside it and motion is straight-line).
    """

    def __init__(self, n: int, config: WaypointConfig = WaypointConfig(), seed=0):
        self.config = config
        self.rng = np.random.default_rng(seed)
        box = np.asarray(config.box, dtype=float)
        self.positions = self.rng.uniform(0.0, 1.0, (n, 2)) * box
        self.targets = self.rng.uniform(0.0, 1.0, (n, 2)) * box
        self.pause_left = np.zeros(n, dtype=int)

    def _repick(self, mask: np.ndarray):
        count = int(mask.sum())
        if count:
            box = np.asarray(self.config.box, dtype=float)
            self.targets[mask] = self.rng.uniform(0.0, 1.0, (count, 2)) * box

    def step(self) -> np.ndarray:
        """Advance one iteration and return a copy of the positions."""
        speed = self.config.speed
        paused = self.pause_left > 0
        self.pause_left[paused] -= 1
        self._repick(paused & (self.pause_left == 0))
        moving = ~paused
        delta = self.targets - self.positions
        dist = np.hypot(delta[:, 0], delta[:, 1])
        arrive = moving & (dist <= speed)
        self.positions[arrive] = self.targets[arrive]
        if self.config.pause > 0:
            self.pause_left[arrive] = self.config.pause
        else:
            self._repick(arrive)
        go = moving & ~arrive & (dist > 0)
        if speed > 0 and go.any():
            self.positions[go] += speed * delta[go] / dist[go, None]
        return self.positions.copy()
