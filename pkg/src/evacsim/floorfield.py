"""Static floor field: shortest grid distance from every cell to an exit.

Distances are computed once per room over an 8-connected graph: orthogonal
steps cost 1, diagonal steps cost sqrt(2), and a diagonal step is allowed
only when both orthogonal cells it cuts between are free (no squeezing
through wall corners).  Movement during the simulation itself is purely
orthogonal; the diagonal metric only makes the distance field smoother.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .scenario import DIR_OFFSETS, Cell, Grid

NEG_INF = float("-inf")
SQRT2 = math.sqrt(2.0)

_DIAG_OFFSETS = ((-1, -1), (-1, 1), (1, -1), (1, 1))


@dataclass(frozen=True, eq=False)
class StaticField:
    """Distance-to-nearest-exit per cell.

    values is float64 (height, width): 0 on exits, +inf on walls and on
    cells with no path to any exit.
    """

    values: np.ndarray


def compute_sff(grid: Grid) -> StaticField:
    """Multi-source Dijkstra from all exit cells at once."""
    h, w = grid.height, grid.width
    walls = grid.walls
    dist = np.full((h, w), np.inf, dtype=np.float64)
    heap: list[tuple[float, int, int]] = []
    for i, j in sorted(grid.exits):
        dist[i, j] = 0.0
        heap.append((0.0, i, j))
    heapq.heapify(heap)

    while heap:
        d, i, j = heapq.heappop(heap)
        if d > dist[i, j]:
            continue
        for di, dj in DIR_OFFSETS:
            ni, nj = i + di, j + dj
            if 0 <= ni < h and 0 <= nj < w and not walls[ni, nj]:
                nd = d + 1.0
                if nd < dist[ni, nj]:
                    dist[ni, nj] = nd
                    heapq.heappush(heap, (nd, ni, nj))
        for di, dj in _DIAG_OFFSETS:
            ni, nj = i + di, j + dj
            if not (0 <= ni < h and 0 <= nj < w) or walls[ni, nj]:
                continue
            # corner rule: both cells the diagonal cuts between must be free
            if walls[i + di, j] or walls[i, j + dj]:
                continue
            nd = d + SQRT2
            if nd < dist[ni, nj]:
                dist[ni, nj] = nd
                heapq.heappush(heap, (nd, ni, nj))
    return StaticField(values=dist)


def delta_s(field: StaticField, cell: Cell, direction: int) -> float:
    """Distance gained by stepping from cell in direction: S[cell] - S[next].

    Positive toward the exit, in [-1, 1] for walkable neighbors.  Returns
    NEG_INF when the neighbor is out of bounds, a wall, or unreachable
    (infinite S), so callers can drop the direction outright.  The cell
    itself must be walkable with finite S.
    """
    i, j = cell
    di, dj = DIR_OFFSETS[direction]
    ni, nj = i + di, j + dj
    values = field.values
    if not (0 <= ni < values.shape[0] and 0 <= nj < values.shape[1]):
        return NEG_INF
    s_next = values[ni, nj]
    if not math.isfinite(s_next):
        return NEG_INF
    return float(values[i, j] - s_next)


def max_delta_s(field: StaticField, cell: Cell) -> float:
    """Best delta_s over the four directions; NEG_INF if every one is blocked."""
    return max(delta_s(field, cell, d) for d in range(4))
