"""Command line runner: single scenarios, seed batches, parameter sweeps.

    evacsim run   --scenario room.txt --out results/ --seeds 1,2,3
    evacsim sweep --scenario room.txt --out results/ --sweep k_P=6,18 --seeds 1,2

Exit codes: 0 success, 2 scenario parse or usage error, 3 scenario
validation failure, 4 I/O failure.  Outputs are deterministic: the same
invocation writes byte-identical files, whatever --workers says.
"""

from __future__ import annotations

import argparse
import csv
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from statistics import mean

from .engine import run
from .floorfield import compute_sff
from .metrics import export_csv, export_field_csv, render_snapshot
from .scenario import (
    PARAM_KEYS,
    ModelParams,
    ScenarioError,
    _parse_param_value,
    parse_scenario,
    validate,
)

# default snapshot set; matches the standard six panels used for the big
# 300-person room so figures line up without extra flags
DEFAULT_SNAPSHOT_STEPS = (25, 65, 135, 165, 180, 225)

_KEY_TO_ATTR = {
    "k_S": "k_s",
    "k_P": "k_p",
    "k_W": "k_w",
    "r": "r",
    "mu": "mu",
    "seed": "seed",
    "max_steps": "max_steps",
}


@dataclass(frozen=True)
class RunConfig:
    """Everything one invocation needs besides the sweep grid."""

    scenario_path: str
    out_dir: str
    seeds: list[int] | None
    snapshot_steps: tuple[int, ...]
    overrides: tuple[tuple[str, str], ...]
    workers: int = 1
    dump_sff: bool = False
    dump_distributions: int | None = None


@dataclass(frozen=True)
class RunTask:
    """One (parameter value, seed) simulation, picklable for worker pools."""

    scenario_text: str
    overrides: tuple[tuple[str, str], ...]
    sweep_key: str | None
    sweep_value: str | None
    seed: int
    out_dir: str
    snapshot_steps: tuple[int, ...]
    capture_step: int | None


def _apply_overrides(params: ModelParams, pairs: tuple[tuple[str, str], ...]) -> ModelParams:
    for key, raw in pairs:
        params = replace(params, **{_KEY_TO_ATTR[key]: _parse_param_value(key, raw, 0)})
    return params


def _run_entry(task: RunTask):
    scenario = parse_scenario(task.scenario_text)
    params = _apply_overrides(scenario.params, task.overrides)
    if task.sweep_key is not None:
        params = _apply_overrides(params, ((task.sweep_key, task.sweep_value),))
    params = replace(params, seed=task.seed)
    scenario = replace(scenario, params=params)

    result = run(scenario, snapshot_steps=task.snapshot_steps, capture_step=task.capture_step)

    out = Path(task.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "curve.csv", "w", newline="") as f:
        export_csv(result, f)
    for t, occ in result.snapshots:
        text, pgm = render_snapshot(occ, scenario.grid)
        (out / f"snap_t{t}.txt").write_text(text)
        (out / f"snap_t{t}.pgm").write_bytes(pgm)
    if task.capture_step is not None:
        with open(out / f"distributions_t{task.capture_step}.csv", "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["agent", "row", "col", "p_up", "p_right", "p_down", "p_left", "norm_zero"])
            for aid, (i, j), p, norm_zero in result.captured:
                w.writerow([aid, i, j, *(repr(float(v)) for v in p), int(norm_zero)])

    spread_at = {s.step: s.value for s in result.spread if s.step in task.snapshot_steps}
    return task.sweep_value, task.seed, result.evac_time, spread_at


def _parse_int_list(raw: str, flag: str) -> list[int]:
    try:
        items = [int(part, 10) for part in raw.split(",") if part.strip() != ""]
    except ValueError:
        raise ScenarioError(f"{flag} expects a comma-separated integer list, got {raw!r}") from None
    if not items:
        raise ScenarioError(f"{flag} list is empty")
    return items


def _parse_set_flags(pairs: list[str]) -> tuple[tuple[str, str], ...]:
    out = []
    for pair in pairs:
        key, eq, raw = pair.partition("=")
        key = key.strip()
        if not eq or key not in PARAM_KEYS:
            raise ScenarioError(f"--set expects key=value with a known key, got {pair!r}")
        _parse_param_value(key, raw.strip(), 0)
        out.append((key, raw.strip()))
    return tuple(out)


def _execute(tasks: list[RunTask], workers: int):
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_run_entry, tasks))
    return [_run_entry(t) for t in tasks]


def _spread_columns(snapshot_steps: tuple[int, ...]) -> list[str]:
    return [f"spread_t{t}" for t in snapshot_steps]


def _aggregate_row(label_cells: list, rows: list[tuple], snapshot_steps: tuple[int, ...]):
    """Mean row over per-seed results: evac_time over completed runs only,
    complete as a fraction, spread per recorded step."""
    evac = [r[2] for r in rows if r[2] is not None]
    cells = label_cells + [
        "mean",
        repr(mean(evac)) if evac else "",
        repr(sum(r[2] is not None for r in rows) / len(rows)),
    ]
    for t in snapshot_steps:
        vals = [r[3][t] for r in rows if t in r[3]]
        cells.append(repr(mean(vals)) if vals else "")
    return cells


def _write_sff(scenario_text: str, out: Path) -> None:
    scenario = parse_scenario(scenario_text)
    field = compute_sff(scenario.grid)
    with open(out / "sff.csv", "w", newline="") as f:
        export_field_csv(field.values, f)


def _prepare(config: RunConfig):
    """Parse, override, and validate; returns (text, seeds) or (None, None)."""
    text = Path(config.scenario_path).read_text(encoding="ascii")
    scenario = parse_scenario(text)
    try:
        params = _apply_overrides(scenario.params, config.overrides)
    except ValueError as e:
        raise ScenarioError(str(e)) from None
    field = compute_sff(scenario.grid)
    problems = validate(replace(scenario, params=params), field)
    if problems:
        for p in problems:
            print(f"invalid scenario: {p}", file=sys.stderr)
        return None, None
    seeds = config.seeds if config.seeds is not None else [params.seed]
    for s in seeds:
        if not (0 <= s < 2**64):
            raise ScenarioError(f"seed must fit in 64 bits, got {s}")
    return text, seeds


def cmd_run(config: RunConfig) -> int:
    text, seeds = _prepare(config)
    if text is None:
        return 3
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    tasks = [
        RunTask(
            scenario_text=text,
            overrides=config.overrides,
            sweep_key=None,
            sweep_value=None,
            seed=seed,
            out_dir=str(out / f"s{seed}"),
            snapshot_steps=config.snapshot_steps,
            capture_step=config.dump_distributions,
        )
        for seed in seeds
    ]
    rows = _execute(tasks, config.workers)
    if config.dump_sff:
        _write_sff(text, out)
    if len(seeds) > 1:
        with open(out / "batch.csv", "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["seed", "evac_time", "complete", *_spread_columns(config.snapshot_steps)])
            for _, seed, evac_time, spread_at in rows:
                cells = [seed, evac_time if evac_time is not None else "",
                         int(evac_time is not None)]
                cells += [repr(spread_at[t]) if t in spread_at else ""
                          for t in config.snapshot_steps]
                w.writerow(cells)
            w.writerow(_aggregate_row([], rows, config.snapshot_steps))
    return 0


def cmd_sweep(config: RunConfig, param: str, values: list[str]) -> int:
    if param not in PARAM_KEYS:
        raise ScenarioError(f"--sweep key must be one of {', '.join(PARAM_KEYS)}, got {param!r}")
    if param == "seed":
        raise ScenarioError("cannot sweep seed; use --seeds")
    if not values:
        raise ScenarioError("--sweep value list is empty")
    for v in values:
        _parse_param_value(param, v, 0)

    text, seeds = _prepare(config)
    if text is None:
        return 3
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    tasks = [
        RunTask(
            scenario_text=text,
            overrides=config.overrides,
            sweep_key=param,
            sweep_value=value,
            seed=seed,
            out_dir=str(out / f"p{value}_s{seed}"),
            snapshot_steps=config.snapshot_steps,
            capture_step=config.dump_distributions,
        )
        for value in values
        for seed in seeds
    ]
    rows = _execute(tasks, config.workers)
    if config.dump_sff:
        _write_sff(text, out)
    with open(out / "aggregate.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["param", "value", "seed", "evac_time", "complete",
                    *_spread_columns(config.snapshot_steps)])
        for value in values:
            value_rows = [r for r in rows if r[0] == value]
            for _, seed, evac_time, spread_at in value_rows:
                cells = [param, value, seed, evac_time if evac_time is not None else "",
                         int(evac_time is not None)]
                cells += [repr(spread_at[t]) if t in spread_at else ""
                          for t in config.snapshot_steps]
                w.writerow(cells)
            w.writerow(_aggregate_row([param, value], value_rows, config.snapshot_steps))
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="evacsim",
        description="Floor-field pedestrian evacuation simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--scenario", required=True, help="scenario file path")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--seeds", help="comma-separated seeds (default: the scenario's seed)")
        p.add_argument("--snapshot-steps", metavar="LIST",
                       help="comma-separated steps to snapshot as txt + pgm "
                            "(default: 25,65,135,165,180,225; 'none' disables)")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a scenario parameter (repeatable)")
        p.add_argument("--workers", type=int, default=1, help="parallel worker processes")
        p.add_argument("--dump-sff", action="store_true",
                       help="write the static floor field as sff.csv")
        p.add_argument("--dump-distributions", type=int, metavar="STEP",
                       help="write per-agent transition distributions at STEP")

    p_run = sub.add_parser("run", help="run one scenario over one or more seeds")
    common(p_run)
    p_sweep = sub.add_parser("sweep", help="run a cartesian sweep of one parameter over seeds")
    common(p_sweep)
    p_sweep.add_argument("--sweep", required=True, metavar="KEY=V1,V2,...",
                         help="parameter values to sweep")
    return parser


def _config_from_args(args) -> RunConfig:
    if args.snapshot_steps is None:
        snaps = DEFAULT_SNAPSHOT_STEPS
    elif args.snapshot_steps.strip().lower() in ("", "none"):
        snaps = ()
    else:
        snaps = tuple(_parse_int_list(args.snapshot_steps, "--snapshot-steps"))
    return RunConfig(
        scenario_path=args.scenario,
        out_dir=args.out,
        seeds=_parse_int_list(args.seeds, "--seeds") if args.seeds else None,
        snapshot_steps=snaps,
        overrides=_parse_set_flags(args.set or []),
        workers=args.workers,
        dump_sff=args.dump_sff,
        dump_distributions=args.dump_distributions,
    )


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.workers < 1:
        print("--workers must be >= 1", file=sys.stderr)
        return 2
    try:
        config = _config_from_args(args)
        if args.command == "run":
            return cmd_run(config)
        key, _, raw_values = args.sweep.partition("=")
        values = [v.strip() for v in raw_values.split(",") if v.strip() != ""]
        return cmd_sweep(config, key.strip(), values)
    except ScenarioError as e:
        print(f"scenario error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"i/o error: {e}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
