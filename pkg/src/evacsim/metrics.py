"""Run results, snapshots, the lateral spread metric, and CSV export."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from statistics import mean, median
from typing import IO, Iterable

import numpy as np

from .scenario import (
    AGENT_GLYPH,
    EXIT_GLYPH,
    FLOOR_GLYPH,
    WALL_GLYPH,
    Cell,
    Grid,
)

PGM_WALL = 0
PGM_AGENT = 64
PGM_EXIT = 128
PGM_FLOOR = 255


@dataclass(frozen=True)
class ExitAxis:
    """The line through the exit centroid, normal to the exit wall.

    axis names the grid coordinate whose deviation from `coordinate`
    measures lateral offset: exits stacked in one column sit on a vertical
    wall, so the axis is the horizontal line row == coordinate and
    axis == "row"; exits in one row give axis == "col".
    """

    axis: str
    coordinate: float


@dataclass(frozen=True)
class SpreadSample:
    step: int
    value: float


@dataclass
class SimulationResult:
    """Everything a finished run reports.

    curve holds (step, remaining) per step including step 0.  evac_time is
    the step at which the room emptied, or None if max_steps ran out first.
    snapshots are (step, occupancy copy) pairs for the requested steps;
    spread is per-step lateral spread when the room has a usable exit axis.
    captured holds --dump-distributions rows when requested.
    """

    curve: list[tuple[int, int]]
    evac_time: int | None
    snapshots: list[tuple[int, np.ndarray]] = field(default_factory=list)
    spread: list[SpreadSample] = field(default_factory=list)
    captured: list[tuple[int, Cell, np.ndarray, bool]] = field(default_factory=list)

    @property
    def complete(self) -> bool:
        return self.evac_time is not None


def exit_axis(grid: Grid) -> ExitAxis | None:
    """Axis for the spread metric, or None when exits span several walls."""
    if not grid.exits:
        return None
    rows = {i for i, _ in grid.exits}
    cols = {j for _, j in grid.exits}
    if len(cols) == 1:
        return ExitAxis(axis="row", coordinate=mean(i for i, _ in grid.exits))
    if len(rows) == 1:
        return ExitAxis(axis="col", coordinate=mean(j for _, j in grid.exits))
    return None


def spread_metric(state, axis: ExitAxis) -> float:
    """Mean absolute lateral offset of the remaining crowd from the exit axis.

    state needs an `agents` list of (id, (i, j)).  Undefined for an empty
    room; callers stop sampling once everyone is out.
    """
    if not state.agents:
        raise ValueError("spread is undefined for an empty room")
    pick = 0 if axis.axis == "row" else 1
    coords = np.array([cell[pick] for _, cell in state.agents], dtype=np.float64)
    return float(np.abs(coords - axis.coordinate).mean())


def render_snapshot(occupancy: np.ndarray, grid: Grid) -> tuple[str, bytes]:
    """ASCII and binary-PGM views of one occupancy matrix.

    ASCII uses the scenario glyphs; a pedestrian standing on an exit shows
    as a pedestrian.  The PGM is P5, maxval 255: wall 0, agent 64, exit
    128, floor 255.
    """
    exit_mask = grid.exit_mask
    lines = []
    for i in range(grid.height):
        row = []
        for j in range(grid.width):
            if occupancy[i, j]:
                row.append(AGENT_GLYPH)
            elif exit_mask[i, j]:
                row.append(EXIT_GLYPH)
            elif grid.walls[i, j]:
                row.append(WALL_GLYPH)
            else:
                row.append(FLOOR_GLYPH)
        lines.append("".join(row))
    text = "\n".join(lines) + "\n"

    gray = np.full((grid.height, grid.width), PGM_FLOOR, dtype=np.uint8)
    gray[grid.walls != 0] = PGM_WALL
    gray[exit_mask] = PGM_EXIT
    gray[occupancy != 0] = PGM_AGENT
    header = f"P5\n{grid.width} {grid.height}\n255\n".encode("ascii")
    return text, header + gray.tobytes()


def parse_snapshot(text: str) -> tuple[np.ndarray, np.ndarray]:
    """Inverse of the ASCII half of render_snapshot: (occupancy, walls)."""
    rows = [line for line in text.split("\n") if line != ""]
    h, w = len(rows), len(rows[0])
    occupancy = np.zeros((h, w), dtype=np.uint8)
    walls = np.zeros((h, w), dtype=np.uint8)
    for i, row in enumerate(rows):
        for j, ch in enumerate(row):
            if ch == AGENT_GLYPH:
                occupancy[i, j] = 1
            elif ch == WALL_GLYPH:
                walls[i, j] = 1
    return occupancy, walls


def export_csv(result: SimulationResult, stream: IO[str]) -> None:
    """Evacuation curve as CSV: step,remaining[,spread].

    The spread column appears only when the run recorded spread samples;
    steps without a sample (the room emptied) leave the field blank.
    """
    for (_, a), (_, b) in zip(result.curve, result.curve[1:]):
        if b > a:
            raise ValueError("evacuation curve must be non-increasing")
    writer = csv.writer(stream, lineterminator="\n")
    by_step = {s.step: s.value for s in result.spread}
    if by_step:
        writer.writerow(["step", "remaining", "spread"])
        for step, remaining in result.curve:
            v = by_step.get(step)
            writer.writerow([step, remaining, repr(v) if v is not None else ""])
    else:
        writer.writerow(["step", "remaining"])
        for step, remaining in result.curve:
            writer.writerow([step, remaining])


def summarize(evac_times: Iterable[int | None], max_steps: int) -> dict[str, float]:
    """Batch statistics over per-seed evacuation times.

    Incomplete runs count at max_steps, which makes the mean a lower
    bound; n_complete says how many actually finished.
    """
    evac_times = list(evac_times)
    bounded = [t if t is not None else max_steps for t in evac_times]
    if not bounded:
        raise ValueError("no runs to summarize")
    ordered = sorted(bounded)
    p95 = ordered[min(len(ordered) - 1, int(0.95 * (len(ordered) - 1) + 0.5))]
    return {
        "mean": mean(bounded),
        "median": median(bounded),
        "p95": float(p95),
        "min": float(ordered[0]),
        "max": float(ordered[-1]),
        "n": float(len(bounded)),
        "n_complete": float(sum(t is not None for t in evac_times)),
    }


def export_field_csv(values: np.ndarray, stream: IO[str]) -> None:
    """Static field as CSV, row-major, `inf` for unreachable cells."""
    writer = csv.writer(stream, lineterminator="\n")
    for row in values:
        writer.writerow([repr(float(v)) for v in row])
