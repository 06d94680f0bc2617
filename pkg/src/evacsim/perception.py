"""Sight rays and the kernel density of people ahead.

A pedestrian looking in one of the four directions sees r* cells: the run
of free cells before the first wall, capped at the sight radius r.  Other
people do not block sight.  The crowd ahead is summarised by a kernel
density estimate over the occupancy of those r* cells, so nearer people
weigh more than distant ones.
"""

from __future__ import annotations

import math

import numpy as np

from .scenario import DIR_OFFSETS, Cell, Grid

SQRT5 = math.sqrt(5.0)

# Epanechnikov-type kernel: phi(z) = (0.335 - 0.067 z^2) * 4.4742 inside
# |z| <= sqrt(5), zero outside.  The scale makes the peak ~1.4989.
_KERNEL_A = 0.335
_KERNEL_B = 0.067
_KERNEL_SCALE = 4.4742
_SUPPORT_SQ = 5.0


def kernel_phi(z: float) -> float:
    """Kernel weight at z.  Even, nonnegative, exactly 0 outside the support.

    Branches on z*z >= 5 so the boundary value is exactly 0.0 (the
    polynomial evaluated at float sqrt(5) would land a few ulp below zero).
    """
    zz = z * z
    if zz >= _SUPPORT_SQ:
        return 0.0
    return (_KERNEL_A - _KERNEL_B * zz) * _KERNEL_SCALE


def bandwidth(r_star: int) -> float:
    """Kernel bandwidth C(r*) = (r* + 1) / sqrt(5); grows with visibility."""
    return (r_star + 1) / SQRT5


def obstacle_distance(grid: Grid, cell: Cell, direction: int, r: int) -> int:
    """Free cells from cell along direction before the first wall, capped at r.

    Out-of-bounds terminates the ray like a wall.  0 means the adjacent
    cell is already blocked.
    """
    i, j = cell
    di, dj = DIR_OFFSETS[direction]
    h, w = grid.height, grid.width
    walls = grid.walls
    count = 0
    while count < r:
        i += di
        j += dj
        if not (0 <= i < h and 0 <= j < w) or walls[i, j]:
            break
        count += 1
    return count


def density(occupancy: np.ndarray, cell: Cell, direction: int, r_star: int) -> float:
    """Kernel density of people over the r* visible cells, clamped to [0, 1].

    D = (1/r*) * sum_{m=1..r*} phi(m / C(r*)) * occupancy[cell + m*dir]

    The raw sum can slightly exceed 1 when every visible cell is occupied
    (the kernel mass is normalised on the continuum, not on the lattice),
    so the result is clamped before it enters the transition exponent.
    Requires r_star >= 1 and all r* ray cells in bounds; use
    obstacle_distance to get a legal r*.
    """
    if r_star < 1:
        raise ValueError(f"r_star must be >= 1, got {r_star}")
    i, j = cell
    di, dj = DIR_OFFSETS[direction]
    c = bandwidth(r_star)
    total = 0.0
    for m in range(1, r_star + 1):
        f = occupancy[i + m * di, j + m * dj]
        if f:
            total += kernel_phi(m / c) * f
    d = total / r_star
    if d < 0.0:
        return 0.0
    return min(d, 1.0)
