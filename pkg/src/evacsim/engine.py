"""Per-step decision rules, conflict resolution, and the simulation loop.

Every step works on a frozen snapshot of the occupancy.  In agent-id order
each pedestrian draws a target from its transition distribution; a draw
landing on an occupied cell triggers a second draw in which the occupied
directions hand their probability mass to staying put (people are patient,
they do not shove).  Movers contending for the same cell are resolved per
target cell in raster order: with probability mu nobody gets it, otherwise
a uniformly chosen contender does.  All permitted moves then happen at
once, and whoever stands on an exit cell at the end of the step has left
the room.

Randomness discipline: the only generator method ever consumed is
rng.random(), in a fixed order (agents ascending, then conflict cells in
raster order), so equal seeds give bit-identical runs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .floorfield import StaticField, compute_sff
from .metrics import SimulationResult, SpreadSample, exit_axis, spread_metric
from .scenario import DIR_OFFSETS, Cell, Grid, ModelParams, Scenario
from .transition import TransitionDistribution, TransitionTables


@dataclass(frozen=True)
class Proposal:
    """One agent's intended cell for this step; target == source means stay."""

    agent: int
    source: Cell
    target: Cell


@dataclass
class SimulationState:
    """Mutable run state; step() returns a new one sharing the generator."""

    occupancy: np.ndarray
    agents: list[tuple[int, Cell]]
    step: int
    rng: np.random.Generator


def initial_state(scenario: Scenario) -> SimulationState:
    """State at step 0.  Agent ids follow the scenario's raster order."""
    grid = scenario.grid
    occ = np.zeros((grid.height, grid.width), dtype=np.uint8)
    for cell in scenario.initial_agents:
        occ[cell] = 1
    agents = list(enumerate(scenario.initial_agents))
    rng = np.random.Generator(np.random.PCG64(scenario.params.seed))
    return SimulationState(occupancy=occ, agents=agents, step=0, rng=rng)


def _draw_direction(p: np.ndarray, u: float) -> int:
    """Index d of the first cumulative bin containing u.

    Zero-probability directions have zero-width bins and can never come
    out.  If rounding leaves the total a hair under 1 and u lands past it,
    the last positive direction takes the draw.
    """
    acc = 0.0
    for d in range(4):
        acc += p[d]
        if u < acc:
            return d
    for d in (3, 2, 1, 0):
        if p[d] > 0.0:
            return d
    raise ValueError("cannot draw from an all-zero distribution")


def choose_target(
    agent: int,
    source: Cell,
    dist: TransitionDistribution,
    occupancy: np.ndarray,
    rng: np.random.Generator,
) -> Proposal:
    """Draw this agent's proposal against the frozen occupancy snapshot.

    norm_zero means motion is forbidden: stay, no randomness consumed.
    Otherwise one draw; if it hits an occupied cell, a second draw over
    {empty neighbors at original p, stay with the occupied mass}.
    """
    if dist.norm_zero:
        return Proposal(agent, source, source)
    p = dist.p
    i, j = source
    d = _draw_direction(p, rng.random())
    di, dj = DIR_OFFSETS[d]
    target = (i + di, j + dj)
    if not occupancy[target]:
        return Proposal(agent, source, target)

    masses = [0.0, 0.0, 0.0, 0.0]
    for dd in range(4):
        pd = p[dd]
        if pd <= 0.0:
            continue
        ddi, ddj = DIR_OFFSETS[dd]
        if not occupancy[i + ddi, j + ddj]:
            masses[dd] = pd
    u = rng.random()
    acc = 0.0
    for dd in range(4):
        acc += masses[dd]
        if u < acc:
            ddi, ddj = DIR_OFFSETS[dd]
            return Proposal(agent, source, (i + ddi, j + ddj))
    return Proposal(agent, source, source)


def resolve_conflicts(
    proposals: list[Proposal], mu: float, rng: np.random.Generator
) -> list[Proposal]:
    """Permitted moves after friction.

    Stay-proposals never conflict and are not returned.  Each contested
    target cell, visited in raster order, is dropped entirely with
    probability mu; otherwise one contender wins uniformly.  mu uses
    strict `u < mu`, so mu=0 always resolves and mu=1 never does.
    """
    by_target: dict[Cell, list[Proposal]] = {}
    for prop in proposals:
        if prop.target != prop.source:
            by_target.setdefault(prop.target, []).append(prop)
    allowed: list[Proposal] = []
    for target in sorted(by_target):
        group = by_target[target]
        if len(group) == 1:
            allowed.append(group[0])
            continue
        if rng.random() < mu:
            continue
        k = len(group)
        allowed.append(group[min(int(rng.random() * k), k - 1)])
    return allowed


def step(
    state: SimulationState,
    field: StaticField,
    grid: Grid,
    params: ModelParams,
    tables: TransitionTables | None = None,
) -> SimulationState:
    """Advance one step; returns the new state (occupancy copied, rng shared).

    Agents already standing on an exit (possible only by initial placement)
    propose to stay and are removed at the end of the step like everyone
    else who reaches a door.
    """
    if tables is None:
        tables = TransitionTables(field, grid, params)
    occ = state.occupancy
    exit_mask = grid.exit_mask
    w = grid.width
    cells_flat = np.fromiter(
        (i * w + j for _, (i, j) in state.agents), dtype=np.int64, count=len(state.agents)
    )
    p_rows, norm_zero = tables.distributions(occ, cells_flat)

    proposals: list[Proposal] = []
    for k, (aid, cell) in enumerate(state.agents):
        if exit_mask[cell]:
            proposals.append(Proposal(aid, cell, cell))
            continue
        dist = TransitionDistribution(p=p_rows[k], norm_zero=bool(norm_zero[k]))
        proposals.append(choose_target(aid, cell, dist, occ, state.rng))

    moves = resolve_conflicts(proposals, params.mu, state.rng)

    new_occ = occ.copy()
    moved: dict[int, Cell] = {}
    for prop in moves:
        new_occ[prop.source] = 0
    for prop in moves:
        new_occ[prop.target] = 1
        moved[prop.agent] = prop.target

    agents: list[tuple[int, Cell]] = []
    for aid, cell in state.agents:
        now = moved.get(aid, cell)
        if exit_mask[now]:
            new_occ[now] = 0
        else:
            agents.append((aid, now))
    # two winners on one cell cannot happen; a desync here means the
    # conflict grouping or the parallel move application is broken
    assert int(new_occ.sum()) == len(agents)
    return SimulationState(occupancy=new_occ, agents=agents, step=state.step + 1, rng=state.rng)


def run(
    scenario: Scenario,
    snapshot_steps: tuple[int, ...] = (),
    capture_step: int | None = None,
) -> SimulationResult:
    """Run a validated scenario to evacuation or max_steps.

    Records the evacuation curve, occupancy snapshots at the requested
    steps, and the lateral spread per step while the room still has people
    (when the exit geometry defines an axis).  capture_step dumps every
    agent's transition distribution as evaluated at that step, i.e. the one
    the draws at that step actually used.
    """
    grid = scenario.grid
    params = scenario.params
    field = compute_sff(grid)
    tables = TransitionTables(field, grid, params)
    state = initial_state(scenario)
    axis = exit_axis(grid)
    wanted = set(snapshot_steps)

    curve = [(0, len(state.agents))]
    snapshots: list[tuple[int, np.ndarray]] = []
    spread: list[SpreadSample] = []
    captured: list[tuple[int, Cell, np.ndarray, bool]] = []
    if 0 in wanted:
        snapshots.append((0, state.occupancy.copy()))
    if axis is not None and state.agents:
        spread.append(SpreadSample(0, spread_metric(state, axis)))

    w = grid.width
    while state.agents and state.step < params.max_steps:
        if capture_step is not None and state.step == capture_step:
            cells_flat = np.fromiter(
                (i * w + j for _, (i, j) in state.agents),
                dtype=np.int64,
                count=len(state.agents),
            )
            p_rows, norm_zero = tables.distributions(state.occupancy, cells_flat)
            for k, (aid, cell) in enumerate(state.agents):
                captured.append((aid, cell, p_rows[k].copy(), bool(norm_zero[k])))
        state = step(state, field, grid, params, tables)
        curve.append((state.step, len(state.agents)))
        if state.step in wanted:
            snapshots.append((state.step, state.occupancy.copy()))
        if axis is not None and state.agents:
            spread.append(SpreadSample(state.step, spread_metric(state, axis)))

    evac_time = state.step if not state.agents else None
    if evac_time is not None:
        # the empty room is absorbing, so later configured snapshots are
        # well-defined; an incomplete run gets no such padding
        for t in sorted(wanted):
            if t > state.step:
                snapshots.append((t, state.occupancy.copy()))
    return SimulationResult(
        curve=curve,
        evac_time=evac_time,
        snapshots=snapshots,
        spread=spread,
        captured=captured,
    )
