"""Undirected weighted graphs and the generators used by tests and experiments.

Nodes are indexed 0..n-1 internally; the text file format is 1-based (see io).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError


@dataclass(frozen=True)
class Graph:
    """Undirected weighted graph, optionally with 2-D node positions (meters)."""

    n: int
    edges: tuple[tuple[int, int, float], ...]
    positions: tuple[tuple[float, float], ...] | None = None

    def __post_init__(self):
        if self.n < 1:
            raise InputError("graph must have at least one node")
        seen = set()
        for i, j, w in self.edges:
            if i == j:
                raise InputError(f"self-loop at node {i}")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise InputError(f"edge ({i},{j}) out of range for n={self.n}")
            if not (w > 0 and np.isfinite(w)):
                raise InputError(f"edge ({i},{j}) has non-positive weight {w}")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise InputError(f"duplicate edge {key}")
            seen.add(key)
        if self.positions is not None and len(self.positions) != self.n:
            raise InputError("positions length must equal node count")

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def degree_vector(self) -> np.ndarray:
        """Weighted degree of every node."""
        d = np.zeros(self.n)
        for i, j, w in self.edges:
            d[i] += w
            d[j] += w
        return d

    def neighbor_sets(self) -> list[set[int]]:
        nb: list[set[int]] = [set() for _ in range(self.n)]
        for i, j, _ in self.edges:
            nb[i].add(j)
            nb[j].add(i)
        return nb

    def weight_matrix(self) -> np.ndarray:
        """Dense symmetric adjacency (weight) matrix."""
        w_mat = np.zeros((self.n, self.n))
        for i, j, w in self.edges:
            w_mat[i, j] = w
            w_mat[j, i] = w
        return w_mat


@dataclass(frozen=True)
class GraphSignal:
    """One real value per node, stamped with the round it belongs to."""

    values: tuple[float, ...]
    t: int = 0

    def __post_init__(self):
        if self.t < 0:
            raise InputError("timestamp must be a nonnegative round index")

    @classmethod
    def from_array(cls, x, t: int = 0) -> "GraphSignal":
        return cls(tuple(float(v) for v in np.asarray(x, dtype=float)), t)

    def to_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)


def normalize_edges(raw) -> tuple[tuple[int, int, float], ...]:
    """Canonicalize an edge iterable: i < j, sorted, floats."""
    out = []
    for e in raw:
        i, j, w = (e[0], e[1], e[2]) if len(e) == 3 else (e[0], e[1], 1.0)
        i, j = (int(i), int(j)) if i < j else (int(j), int(i))
        out.append((i, j, float(w)))
    return tuple(sorted(out))


def path_graph(n: int, weight: float = 1.0) -> Graph:
    return Graph(n, tuple((i, i + 1, weight) for i in range(n - 1)))


def cycle_graph(n: int, weight: float = 1.0) -> Graph:
    edges = [(i, i + 1, weight) for i in range(n - 1)] + [(0, n - 1, weight)]
    return Graph(n, normalize_edges(edges))


def complete_graph(n: int, weight: float = 1.0) -> Graph:
    edges = [(i, j, weight) for i in range(n) for j in range(i + 1, n)]
    return Graph(n, tuple(edges))


def disk_graph(positions: np.ndarray, radius: float) -> Graph:
    """Connect every pair of nodes within Euclidean ``radius`` (unit weights)."""
    pos = np.asarray(positions, dtype=float)
    n = pos.shape[0]
    diff = pos[:, None, :] - pos[None, :, :]
    d2 = np.einsum("ijk,ijk->ij", diff, diff)
    iu, ju = np.triu_indices(n, k=1)
    mask = d2[iu, ju] <= radius * radius
    edges = tuple((int(i), int(j), 1.0) for i, j in zip(iu[mask], ju[mask]))
    coords = tuple((float(x), float(y)) for x, y in pos)
    return Graph(n, edges, positions=coords)


def random_geometric_graph(n: int, radius: float, seed=0) -> Graph:
    """Uniform points in the unit square, disk connectivity."""
    rng = np.random.default_rng(seed)
    return disk_graph(rng.random((n, 2)), radius)


def random_weighted_graph(n: int, p: float, seed=0, weight_range=(0.5, 1.5)) -> Graph:
    """Erdos-Renyi topology with uniform random weights."""
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, k=1)
    mask = rng.random(len(iu)) < p
    w = rng.uniform(*weight_range, size=len(iu))
    edges = tuple(
        (int(i), int(j), float(wt)) for i, j, wt in zip(iu[mask], ju[mask], w[mask])
    )
    return Graph(n, edges)
