"""Dynamic k-nearest-neighbour communication topology.

Edges are directed and read as "pull": ``out_neighbors[i]`` lists the agents
whose information agent ``i`` reads this step.  Distance ties go to the lower
agent index, so the ordering is a strict total order on ``(distance, index)``
and the result never depends on previous steps.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .core import ConfigError


@njit(cache=True)
def initial_order(n):
    """Every agent's candidate list, all other agents by index."""
    order = np.empty((n, n - 1), dtype=np.int64)
    for i in range(n):
        c = 0
        for j in range(n):
            if j != i:
                order[i, c] = j
                c += 1
    return order


@njit(cache=True)
def sort_neighbors(pos, order, dm):
    """Re-sort each row of ``order`` in place by (squared distance, index).

    Insertion sort: from one step to the next the rows are almost sorted, so
    this costs close to O(N) per agent in a running simulation.  ``dm`` is an
    N x N scratch buffer that receives the squared distance matrix.
    """
    n = pos.shape[0]
    for i in range(n):
        xi = pos[i, 0]
        yi = pos[i, 1]
        for j in range(i + 1, n):
            dx = pos[j, 0] - xi
            dy = pos[j, 1] - yi
            v = dx * dx + dy * dy
            dm[i, j] = v
            dm[j, i] = v
    m = n - 1
    for i in range(n):
        row = order[i]
        drow = dm[i]
        prev = row[0]
        dp = drow[prev]
        for a in range(1, m):
            cur = row[a]
            dc = drow[cur]
            if dp < dc or (dp == dc and prev < cur):
                prev = cur
                dp = dc
                continue
            b = a - 1
            while b >= 0:
                pb = row[b]
                db = drow[pb]
                if db > dc or (db == dc and pb > cur):
                    row[b + 1] = pb
                    b -= 1
                else:
                    break
            row[b + 1] = cur
            prev = row[a]
            dp = drow[prev]


@dataclass(frozen=True)
class Topology:
    out_neighbors: tuple[tuple[int, ...], ...]

    def __len__(self):
        return len(self.out_neighbors)

    def __getitem__(self, i: int) -> tuple[int, ...]:
        return self.out_neighbors[i]

    def edges(self) -> set[tuple[int, int]]:
        return {(i, j) for i, row in enumerate(self.out_neighbors) for j in row}


def build_topology(positions, k_per_agent) -> Topology:
    """Directed kNN graph: agent ``i`` links to its ``k_i`` nearest other agents."""
    pos = np.ascontiguousarray(positions, dtype=np.float64).reshape(-1, 2)
    k = np.asarray(k_per_agent, dtype=np.int64)
    n = len(pos)
    if n < 2:
        raise ConfigError(f"topology needs N >= 2 agents, got {n}")
    if k.shape != (n,):
        raise ConfigError(f"expected {n} degrees, got shape {k.shape}")
    bad = np.flatnonzero((k < 1) | (k > n - 1))
    if bad.size:
        i = int(bad[0])
        raise ConfigError(f"agent {i}: k={int(k[i])} outside k in [1, N-1] = [1, {n - 1}]")
    order = initial_order(n)
    sort_neighbors(pos, order, np.empty((n, n)))
    return Topology(tuple(tuple(int(j) for j in order[i, : k[i]]) for i in range(n)))
