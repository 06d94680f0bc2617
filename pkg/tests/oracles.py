"""Independent reference implementations for the test suite.

Deliberately written against the model definitions alone, with different
algorithms and data structures than the package (plain lists and
Gauss-Seidel relaxation instead of numpy and a heap), so agreement between
the two is meaningful evidence rather than a tautology.
"""

import math

SQRT2 = math.sqrt(2.0)
SQRT5 = math.sqrt(5.0)

_STEPS = (
    (-1, 0, 1.0),
    (1, 0, 1.0),
    (0, -1, 1.0),
    (0, 1, 1.0),
    (-1, -1, SQRT2),
    (-1, 1, SQRT2),
    (1, -1, SQRT2),
    (1, 1, SQRT2),
)


def sff_oracle(walls, exits):
    """Distance to the nearest exit by Gauss-Seidel relaxation.

    8-neighbor metric: orthogonal cost 1, diagonal cost sqrt(2), diagonals
    forbidden when either cell they cut between is a wall.  Returns a list
    of lists; walls and unreachable cells stay at +inf.
    """
    h, w = len(walls), len(walls[0])
    dist = [[math.inf] * w for _ in range(h)]
    for i, j in exits:
        dist[i][j] = 0.0
    changed = True
    while changed:
        changed = False
        for i in range(h):
            for j in range(w):
                if walls[i][j]:
                    continue
                best = dist[i][j]
                for di, dj, cost in _STEPS:
                    ni, nj = i + di, j + dj
                    if not (0 <= ni < h and 0 <= nj < w) or walls[ni][nj]:
                        continue
                    if di and dj and (walls[i + di][j] or walls[i][j + dj]):
                        continue
                    cand = dist[ni][nj] + cost
                    if cand < best:
                        best = cand
                        changed = True
                dist[i][j] = best
    return dist


def density_oracle(ray_occupancy, r_star):
    """Raw (unclamped) kernel density over one ray.

    ray_occupancy[m-1] is the occupancy of the cell at offset m, for
    m = 1..r_star.  Direct evaluation of the defining sum.
    """
    c = (r_star + 1) / SQRT5
    total = 0.0
    for m in range(1, r_star + 1):
        z = m / c
        if z * z < 5.0:
            total += (0.335 - 0.067 * (z * z)) * 4.4742 * ray_occupancy[m - 1]
    return total / r_star
