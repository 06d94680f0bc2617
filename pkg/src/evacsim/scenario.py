"""Scenario definition: room geometry, agents, model parameters, file I/O.

Scenario files are plain 7-bit ASCII with two sections separated by a blank
line.  The first section is one ``key = value`` pair per line and must give
exactly the keys k_S, k_P, k_W, r, mu, seed, max_steps.  The second section
is a rectangular character map of the room::

    k_S = 4
    k_P = 6
    k_W = 4
    r = 10
    mu = 0.0
    seed = 1
    max_steps = 1000

    #######
    #P....E
    #######

Map glyphs: ``#`` wall, ``.`` empty floor, ``E`` exit, ``P`` pedestrian.
Every cell is 0.4 m on a side.  The map must be wall-enclosed except at
exits; that (together with agent placement) is checked by :func:`validate`,
not by the parser, so that partially built rooms can still be loaded and
inspected.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

CELL_SIZE_M = 0.4

WALL_GLYPH = "#"
FLOOR_GLYPH = "."
EXIT_GLYPH = "E"
AGENT_GLYPH = "P"
_GLYPHS = frozenset((WALL_GLYPH, FLOOR_GLYPH, EXIT_GLYPH, AGENT_GLYPH))

# Movement directions, shared vocabulary for the whole package.  Row-major
# grid, row 0 at the top, so "up" decreases the row index.
UP, RIGHT, DOWN, LEFT = 0, 1, 2, 3
DIRECTIONS = (UP, RIGHT, DOWN, LEFT)
DIR_OFFSETS = ((-1, 0), (0, 1), (1, 0), (0, -1))
DIR_NAMES = ("up", "right", "down", "left")

PARAM_KEYS = ("k_S", "k_P", "k_W", "r", "mu", "seed", "max_steps")

Cell = tuple[int, int]


class ScenarioError(ValueError):
    """Malformed scenario text or an out-of-range parameter value.

    Carries the 1-based line (and column, when it makes sense) of the
    offending input so CLI error messages can point at the file.
    """

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.message = message
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f" (line {line}" + (f", column {column}" if column is not None else "") + ")"
        super().__init__(message + where)


@dataclass(frozen=True, eq=False)
class Grid:
    """Room geometry: wall matrix plus the set of exit cells.

    walls is a (height, width) uint8 array, 1 where movement is blocked.
    Exit cells are always free floor.  An exit-less grid can be built (it
    shows up while editing rooms) but fails scenario validation.
    """

    height: int
    width: int
    walls: np.ndarray
    exits: frozenset[Cell]

    def __post_init__(self):
        if self.walls.shape != (self.height, self.width):
            raise ValueError(f"walls shape {self.walls.shape} != {(self.height, self.width)}")
        for cell in self.exits:
            if not self.in_bounds(cell):
                raise ValueError(f"exit out of bounds at {cell}")
            if self.walls[cell]:
                raise ValueError(f"exit on wall at {cell}")

    def in_bounds(self, cell: Cell) -> bool:
        i, j = cell
        return 0 <= i < self.height and 0 <= j < self.width

    def is_wall(self, cell: Cell) -> bool:
        return self.in_bounds(cell) and bool(self.walls[cell])

    @cached_property
    def exit_mask(self) -> np.ndarray:
        mask = np.zeros((self.height, self.width), dtype=bool)
        for i, j in self.exits:
            mask[i, j] = True
        return mask

    def __eq__(self, other):
        if not isinstance(other, Grid):
            return NotImplemented
        return (
            self.height == other.height
            and self.width == other.width
            and np.array_equal(self.walls, other.walls)
            and self.exits == other.exits
        )


@dataclass(frozen=True)
class ModelParams:
    """Model parameters.

    k_s, k_p, k_w weight the distance gain, the people density ahead and
    the wall/obstacle penalty in the transition probabilities.  r is the
    sight radius in cells, mu the friction probability of an unresolved
    conflict, seed feeds the run's random generator, max_steps bounds the
    simulation loop.
    """

    k_s: float
    k_p: float
    k_w: float
    r: int
    mu: float
    seed: int
    max_steps: int

    def __post_init__(self):
        for name in ("k_s", "k_p", "k_w"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0.0):
                raise ValueError(f"{name} must be a finite nonnegative real, got {v!r}")
        if self.r < 1:
            raise ValueError(f"r must be >= 1, got {self.r}")
        if not (0.0 <= self.mu <= 1.0):
            raise ValueError(f"mu must be in [0, 1], got {self.mu}")
        if not (0 <= self.seed < 2**64):
            raise ValueError(f"seed must fit in 64 bits, got {self.seed}")
        if self.max_steps < 1:
            raise ValueError(f"max_steps must be >= 1, got {self.max_steps}")
        # sensitivity to people and walls below the distance sensitivity is
        # legal but usually a sign of a mistyped parameter set
        if self.k_p < self.k_s or self.k_w < self.k_s:
            warnings.warn(
                f"k_P ({self.k_p}) and k_W ({self.k_w}) are normally >= k_S ({self.k_s})",
                stacklevel=2,
            )


@dataclass(frozen=True)
class Scenario:
    """A parsed scenario: grid, initial agent cells (raster order), params."""

    grid: Grid
    initial_agents: tuple[Cell, ...]
    params: ModelParams


def _parse_param_value(key: str, raw: str, line_no: int):
    def err(msg):
        return ScenarioError(f"{key}: {msg}", line=line_no)

    if key in ("k_S", "k_P", "k_W", "mu"):
        try:
            v = float(raw)
        except ValueError:
            raise err(f"not a real number: {raw!r}") from None
        if not math.isfinite(v):
            raise err(f"must be finite, got {raw!r}")
        if v < 0.0:
            raise err(f"must be nonnegative, got {raw!r}")
        if key == "mu" and v > 1.0:
            raise err(f"must be in [0, 1], got {raw!r}")
        return v
    # r, seed, max_steps
    try:
        v = int(raw, 10)
    except ValueError:
        raise err(f"not an integer: {raw!r}") from None
    if key in ("r", "max_steps") and v < 1:
        raise err(f"must be >= 1, got {v}")
    if key == "seed" and not (0 <= v < 2**64):
        raise err(f"must fit in 64 bits, got {v}")
    return v


def parse_scenario(text: str) -> Scenario:
    """Parse scenario text into a Scenario.

    Raises ScenarioError with a 1-based line (and column for map glyph
    errors) on malformed input: bad syntax, unknown/duplicate/missing
    parameter keys, out-of-range values, ragged or empty maps.
    """
    if not text.isascii():
        raise ScenarioError("scenario file must be 7-bit ASCII")
    lines = text.split("\n")

    raw_params: dict[str, object] = {}
    n = 0
    while n < len(lines) and lines[n].strip() != "":
        line = lines[n]
        line_no = n + 1
        if "=" not in line:
            raise ScenarioError(f"expected 'key = value', got {line!r}", line=line_no)
        key, _, raw = line.partition("=")
        key = key.strip()
        raw = raw.strip()
        if key not in PARAM_KEYS:
            raise ScenarioError(f"unknown parameter key {key!r}", line=line_no)
        if key in raw_params:
            raise ScenarioError(f"duplicate parameter key {key!r}", line=line_no)
        raw_params[key] = _parse_param_value(key, raw, line_no)
        n += 1
    missing = [k for k in PARAM_KEYS if k not in raw_params]
    if missing:
        raise ScenarioError(f"missing parameter keys: {', '.join(missing)}")

    # skip the single blank separator, then collect map rows; trailing blank
    # lines are tolerated, interior ones are not
    n += 1
    rows: list[str] = []
    first_map_line = None
    blank_since = None
    for k in range(n, len(lines)):
        line = lines[k]
        if line.strip() == "":
            if blank_since is None:
                blank_since = k + 1
            continue
        if blank_since is not None and rows:
            raise ScenarioError("blank line inside map", line=blank_since)
        blank_since = None
        if first_map_line is None:
            first_map_line = k + 1
        rows.append(line)
        width = len(rows[0])
        if len(line) != width:
            raise ScenarioError(
                f"ragged map row: {len(line)} glyphs, expected {width}", line=k + 1
            )
        for col, ch in enumerate(line):
            if ch not in _GLYPHS:
                raise ScenarioError(
                    f"invalid map character {ch!r}", line=k + 1, column=col + 1
                )
    if not rows:
        raise ScenarioError("missing map section")

    height, width = len(rows), len(rows[0])
    walls = np.zeros((height, width), dtype=np.uint8)
    exits: set[Cell] = set()
    agents: list[Cell] = []
    for i, row in enumerate(rows):
        for j, ch in enumerate(row):
            if ch == WALL_GLYPH:
                walls[i, j] = 1
            elif ch == EXIT_GLYPH:
                exits.add((i, j))
            elif ch == AGENT_GLYPH:
                agents.append((i, j))

    grid = Grid(height=height, width=width, walls=walls, exits=frozenset(exits))
    params = ModelParams(
        k_s=raw_params["k_S"],
        k_p=raw_params["k_P"],
        k_w=raw_params["k_W"],
        r=raw_params["r"],
        mu=raw_params["mu"],
        seed=raw_params["seed"],
        max_steps=raw_params["max_steps"],
    )
    return Scenario(grid=grid, initial_agents=tuple(agents), params=params)


def serialize_scenario(scenario: Scenario) -> str:
    """Render a Scenario back to file text (parse . serialize is identity)."""
    p = scenario.params
    values = {
        "k_S": repr(p.k_s),
        "k_P": repr(p.k_p),
        "k_W": repr(p.k_w),
        "r": str(p.r),
        "mu": repr(p.mu),
        "seed": str(p.seed),
        "max_steps": str(p.max_steps),
    }
    out = [f"{key} = {values[key]}" for key in PARAM_KEYS]
    out.append("")
    grid = scenario.grid
    occupied = set(scenario.initial_agents)
    for i in range(grid.height):
        row = []
        for j in range(grid.width):
            if (i, j) in occupied:
                row.append(AGENT_GLYPH)
            elif (i, j) in grid.exits:
                row.append(EXIT_GLYPH)
            elif grid.walls[i, j]:
                row.append(WALL_GLYPH)
            else:
                row.append(FLOOR_GLYPH)
        out.append("".join(row))
    return "\n".join(out) + "\n"


def validate(scenario: Scenario, field: "np.ndarray | object") -> list[str]:
    """Check scenario invariants against the static field; return violations.

    `field` is the StaticField of the grid (or any object with a `.values`
    array, or the array itself).  Reported violations, one string each:
    missing exits, non-wall border cells that are not exits, agents out of
    bounds / on walls / duplicated, and agents with no path to an exit.
    """
    values = getattr(field, "values", field)
    grid = scenario.grid
    problems: list[str] = []

    if not grid.exits:
        problems.append("no exit cells")

    for i in range(grid.height):
        for j in range(grid.width):
            if i in (0, grid.height - 1) or j in (0, grid.width - 1):
                if not grid.walls[i, j] and (i, j) not in grid.exits:
                    problems.append(f"open border at ({i}, {j})")

    seen: set[Cell] = set()
    for cell in scenario.initial_agents:
        if not grid.in_bounds(cell):
            problems.append(f"agent out of bounds at {cell}")
            continue
        if cell in seen:
            problems.append(f"cell occupied twice at {cell}")
            continue
        seen.add(cell)
        if grid.walls[cell]:
            problems.append(f"agent on wall at {cell}")
        elif not np.isfinite(values[cell]):
            problems.append(f"unreachable agent at {cell}")
    return problems
