"""Command-line front end.

Runs simulations and experiments described by a single JSON config.
Every run is deterministic for a fixed config and seed, and CSV
outputs are byte-identical across repeats.  Exit codes: 0 on success,
1 when an experiment reports FAIL, 2 on malformed configs or
non-conforming models.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from typing import Any, Sequence

import numpy as np

from .chain import (
    BallTarget,
    EmptyTarget,
    ExactPointTarget,
    HyperplaneTarget,
    PairDistanceTarget,
    TargetSet,
    hitting_estimate,
    simulate,
)
from .configurations import Configuration, RhoBall, distance_rho
from .lab import SuiteSizes, run_default_suite
from .measure import (
    AllInRegion,
    BallSet,
    BoxRegion,
    EmptySingleton,
    LayerSet,
    ProductOfDisjointBoxes,
    UnsupportedExactEvaluation,
    lp_measure_estimate,
    lp_measure_exact,
    sample_poisson_config,
)
from .paths import build_path, corridor_prob_lower_bound, is_valid_path, path_length_cap
from .rates import ContactModel, RateModel, validate_conditions


class ConfigError(Exception):
    """Anything wrong with the config document or CLI usage."""


def _require(mapping: dict, key: str, context: str) -> Any:
    if key not in mapping:
        raise ConfigError(f"missing key '{key}' in {context}")
    return mapping[key]


def load_config(path: str) -> dict:
    try:
        with open(path) as handle:
            config = json.load(handle)
    except OSError as err:
        raise ConfigError(f"cannot read config: {err}") from err
    except json.JSONDecodeError as err:
        raise ConfigError(f"config is not valid JSON: {err}") from err
    if not isinstance(config, dict):
        raise ConfigError("config must be a JSON object")
    return config


def build_model(config: dict) -> RateModel:
    section = _require(config, "model", "config")
    if not isinstance(section, dict):
        raise ConfigError("'model' must be an object")
    name = section.get("name", "contact")
    if name != "contact":
        raise ConfigError(f"unknown model '{name}' (only 'contact' is built in)")
    kwargs = {k: v for k, v in section.items() if k != "name"}
    kwargs.setdefault("dimension", config.get("dimension", 1))
    try:
        return ContactModel(**kwargs)
    except (TypeError, ValueError) as err:
        raise ConfigError(f"bad model parameters: {err}") from err


def _parse_configuration(raw: Any, context: str) -> Configuration:
    if raw is None:
        raw = []
    if not isinstance(raw, list):
        raise ConfigError(f"{context} must be a list of points")
    try:
        return Configuration(raw)
    except (TypeError, ValueError) as err:
        raise ConfigError(f"bad {context}: {err}") from err


def _parse_box(raw: Any, context: str) -> BoxRegion:
    if not isinstance(raw, dict):
        raise ConfigError(f"{context} must be an object with 'lower' and 'upper'")
    try:
        return BoxRegion(tuple(_require(raw, "lower", context)), tuple(_require(raw, "upper", context)))
    except (TypeError, ValueError) as err:
        raise ConfigError(f"bad {context}: {err}") from err


def _parse_target(raw: Any, context: str) -> TargetSet:
    if isinstance(raw, dict):
        raw = raw.get("pieces", [raw])
    if not isinstance(raw, list) or not raw:
        raise ConfigError(f"{context} must be a piece object or nonempty list of pieces")
    pieces = []
    for item in raw:
        if not isinstance(item, dict):
            raise ConfigError(f"every piece of {context} must be an object")
        kind = _require(item, "kind", context)
        try:
            if kind == "empty":
                pieces.append(EmptyTarget())
            elif kind == "ball":
                center = _parse_configuration(_require(item, "center", context), context)
                pieces.append(BallTarget(RhoBall(center, float(_require(item, "radius", context)))))
            elif kind == "exact_point":
                pieces.append(ExactPointTarget(tuple(_require(item, "point", context))))
            elif kind == "hyperplane":
                pieces.append(
                    HyperplaneTarget(int(_require(item, "axis", context)), float(_require(item, "value", context)))
                )
            elif kind == "pair_distance":
                pieces.append(PairDistanceTarget(float(_require(item, "distance", context))))
            else:
                raise ConfigError(f"unknown target kind '{kind}' in {context}")
        except (TypeError, ValueError) as err:
            raise ConfigError(f"bad piece in {context}: {err}") from err
    return TargetSet(tuple(pieces))


def _parse_layer_set(raw: Any, context: str) -> tuple[str, LayerSet, BoxRegion | None]:
    if not isinstance(raw, dict):
        raise ConfigError(f"{context} must be an object")
    set_id = str(raw.get("id", "set"))
    layer = int(_require(raw, "layer", context))
    shape_raw = _require(raw, "shape", context)
    kind = _require(shape_raw, "kind", context)
    window = _parse_box(raw["window"], f"{context}.window") if "window" in raw else None
    try:
        if kind == "empty":
            shape = EmptySingleton()
        elif kind == "all_in_region":
            shape = AllInRegion(_parse_box(shape_raw, f"{context}.shape"))
        elif kind == "product_boxes":
            boxes = tuple(
                _parse_box(b, f"{context}.shape.boxes") for b in _require(shape_raw, "boxes", context)
            )
            shape = ProductOfDisjointBoxes(boxes)
        elif kind == "ball":
            center = _parse_configuration(_require(shape_raw, "center", context), context)
            shape = BallSet(RhoBall(center, float(_require(shape_raw, "radius", context))))
        else:
            raise ConfigError(f"unknown shape kind '{kind}' in {context}")
        return set_id, LayerSet(layer, shape), window
    except (TypeError, ValueError) as err:
        raise ConfigError(f"bad {context}: {err}") from err


def _ensure_outdir(path: str) -> str:
    os.makedirs(path, exist_ok=True)
    return path


def _write_csv(path: str, columns: list[str], rows: list[dict]) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=columns, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


def _float_cell(value: float) -> str:
    return repr(float(value))


def _gate_model(model: RateModel, config: dict, seed: int, skip: bool) -> None:
    """Refuse to run experiments on models that fail the condition probes."""
    if skip:
        return
    section = config.get("validate", {})
    report = _run_validation(model, section, seed)
    if not report.passed:
        raise ConfigError("model fails the standing conditions:\n" + report.summary())


def _run_validation(model: RateModel, section: dict, seed: int):
    max_size = int(section.get("max_size", 12))
    trials = int(section.get("trial_states", 40))
    probes = int(section.get("probe_points", 16))
    intensity = float(section.get("intensity", 1.0))
    if "window" in section:
        window = _parse_box(section["window"], "validate.window")
    else:
        center = model.immigration_region.center
        reach = model.immigration_region.radius + model.interaction_radius
        window = BoxRegion(tuple(c - reach for c in center), tuple(c + reach for c in center))
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(1,)))
    states = [Configuration(), Configuration([model.immigration_region.center])]
    while len(states) < trials:
        state = sample_poisson_config(intensity, window, rng)
        if len(state) <= max_size:
            states.append(state)
    return validate_conditions(
        model, max_size, states, probe_points=probes,
        seed=np.random.SeedSequence(seed, spawn_key=(2,)),
    )


# --- subcommands ------------------------------------------------------


def _cmd_simulate(config: dict, model: RateModel, seed: int, outdir: str, workers: int) -> int:
    section = config.get("simulate", {})
    initial = _parse_configuration(section.get("initial"), "simulate.initial")
    max_steps = int(section.get("max_steps", 200))
    target = _parse_target(section["target"], "simulate.target") if section.get("target") else None
    trajectory = simulate(initial, model, target, max_steps, np.random.SeedSequence(seed, spawn_key=(3,)))
    dimension = model.dimension
    columns = ["step", "kind"] + [f"x{k}" for k in range(dimension)]
    rows = [
        {"step": e.step_index, "kind": e.kind, **{f"x{k}": _float_cell(c) for k, c in enumerate(e.point)}}
        for e in trajectory.events
    ]
    out = os.path.join(_ensure_outdir(outdir), "trajectory.csv")
    _write_csv(out, columns, rows)
    final = trajectory.final_state()
    print(
        f"simulate: {len(trajectory.events)} steps, terminal={trajectory.terminal_reason}, "
        f"final size={len(final)}, wrote {out}"
    )
    return 0


def _cmd_hitprob(config: dict, model: RateModel, seed: int, outdir: str, workers: int) -> int:
    section = config.get("hitprob")
    if not isinstance(section, dict):
        raise ConfigError("config needs a 'hitprob' section")
    initial = _parse_configuration(section.get("initial"), "hitprob.initial")
    target = _parse_target(_require(section, "target", "hitprob"), "hitprob.target")
    max_steps = int(section.get("max_steps", 500))
    replicas = int(section.get("replicas", 2_000))
    estimate = hitting_estimate(
        initial, target, model, max_steps, replicas,
        np.random.SeedSequence(seed, spawn_key=(4,)), workers,
    )
    out = os.path.join(_ensure_outdir(outdir), "hitprob.csv")
    _write_csv(
        out,
        ["start", "target", "max_steps", "replicas", "hits", "estimate", "ci_low", "ci_high", "seed"],
        [
            {
                "start": json.dumps(initial.to_coord_lists()),
                "target": target.label(),
                "max_steps": max_steps,
                "replicas": replicas,
                "hits": estimate.hits,
                "estimate": _float_cell(estimate.estimate),
                "ci_low": _float_cell(estimate.ci_low),
                "ci_high": _float_cell(estimate.ci_high),
                "seed": seed,
            }
        ],
    )
    print(
        f"hitprob: {estimate.hits}/{replicas} hits, estimate={estimate.estimate:.6g}, "
        f"wilson95=[{estimate.ci_low:.6g}, {estimate.ci_high:.6g}], wrote {out}"
    )
    return 0


def _cmd_path(config: dict, model: RateModel, seed: int, outdir: str, workers: int) -> int:
    section = config.get("path")
    if not isinstance(section, dict):
        raise ConfigError("config needs a 'path' section")
    goal = _parse_configuration(_require(section, "goal", "path"), "path.goal")
    radius = model.interaction_radius
    ball_radius = float(section.get("ball_radius", radius / 8.0))
    path = build_path(goal, radius, model.immigration_region.center)
    check = is_valid_path(path)
    if not check.valid:
        raise ConfigError(f"constructed path failed validation at vertex {check.violation_index}")
    cap = path_length_cap(goal, radius, model.immigration_region.center)
    bound = corridor_prob_lower_bound(path, ball_radius, model)
    out = os.path.join(_ensure_outdir(outdir), "path.jsonl")
    with open(out, "w") as handle:
        for vertex in path.vertices:
            handle.write(json.dumps(vertex.to_coord_lists()) + "\n")
    print(
        f"path: length={path.length} (cap {cap}), corridor bound at radius "
        f"{ball_radius!r}: {bound:.6g}, wrote {out}"
    )
    return 0


def _cmd_validate(config: dict, model: RateModel, seed: int, outdir: str, workers: int) -> int:
    report = _run_validation(model, config.get("validate", {}), seed)
    out = os.path.join(_ensure_outdir(outdir), "conditions.csv")
    _write_csv(out, ["condition", "name", "verdict", "witness", "detail"], report.to_csv_rows())
    print(report.summary())
    print(f"wrote {out}")
    return 0 if report.passed else 1


def _cmd_measure(config: dict, model: RateModel, seed: int, outdir: str, workers: int) -> int:
    section = config.get("measure")
    if not isinstance(section, dict):
        raise ConfigError("config needs a 'measure' section")
    samples = int(section.get("samples", 20_000))
    raw_sets = _require(section, "sets", "measure")
    if not isinstance(raw_sets, list) or not raw_sets:
        raise ConfigError("measure.sets must be a nonempty list")
    rows = []
    for index, raw in enumerate(raw_sets):
        set_id, layer_set, window = _parse_layer_set(raw, f"measure.sets[{index}]")
        try:
            value = lp_measure_exact(layer_set)
            method, std_error, used = "exact", 0.0, 0
        except UnsupportedExactEvaluation:
            if window is None:
                ball = layer_set.shape.ball
                pad = ball.radius
                center = ball.center
                window = BoxRegion(
                    tuple(min(p[k] for p in center) - pad for k in range(center.dimension)),
                    tuple(max(p[k] for p in center) + pad for k in range(center.dimension)),
                )
            estimate = lp_measure_estimate(
                layer_set.layer, window, layer_set.contains, samples,
                seed=np.random.SeedSequence(seed, spawn_key=(5, index)), workers=workers,
            )
            value, std_error, used, method = estimate.value, estimate.std_error, samples, "estimate"
        rows.append(
            {
                "set_id": set_id,
                "method": method,
                "value": _float_cell(value),
                "std_error": _float_cell(std_error),
                "samples": used,
                "seed": seed,
            }
        )
    out = os.path.join(_ensure_outdir(outdir), "measure.csv")
    _write_csv(out, ["set_id", "method", "value", "std_error", "samples", "seed"], rows)
    for row in rows:
        print(
            f"measure[{row['set_id']}]: {row['method']} value={row['value']}"
            + (f" +- {row['std_error']}" if row["method"] == "estimate" else "")
        )
    print(f"wrote {out}")
    return 0


def _cmd_lab(config: dict, model: RateModel, seed: int, outdir: str, workers: int) -> int:
    section = config.get("lab", {})
    defaults = SuiteSizes()
    sizes = SuiteSizes(
        max_steps=int(section.get("max_steps", defaults.max_steps)),
        replicas=int(section.get("replicas", defaults.replicas)),
        null_max_steps=int(section.get("null_max_steps", defaults.null_max_steps)),
        null_replicas=int(section.get("null_replicas", defaults.null_replicas)),
        preservation_draws=int(section.get("preservation_draws", defaults.preservation_draws)),
        pipeline_replicas=int(section.get("pipeline_replicas", defaults.pipeline_replicas)),
        pipeline_extra_steps=section.get("pipeline_extra_steps", defaults.pipeline_extra_steps),
        extinction_replicas=int(section.get("extinction_replicas", defaults.extinction_replicas)),
        extinction_max_steps=int(section.get("extinction_max_steps", defaults.extinction_max_steps)),
        measure_samples=int(section.get("measure_samples", defaults.measure_samples)),
        poisson_intensity=float(section.get("poisson_intensity", defaults.poisson_intensity)),
    )
    reports = run_default_suite(model, seed, sizes, workers)
    outdir = _ensure_outdir(outdir)
    all_passed = True
    for report in reports:
        out = os.path.join(outdir, f"lab_{report.experiment}.csv")
        report.write_csv(out)
        print(report.summary())
        print(f"wrote {out}")
        all_passed = all_passed and report.passed
    print("lab: PASS" if all_passed else "lab: FAIL")
    return 0 if all_passed else 1


def _cmd_metric(args: argparse.Namespace) -> int:
    def read_config(path: str) -> Configuration:
        try:
            with open(path) as handle:
                raw = json.load(handle)
        except (OSError, json.JSONDecodeError) as err:
            raise ConfigError(f"cannot read configuration file {path}: {err}") from err
        return _parse_configuration(raw, path)

    first = read_config(args.first)
    second = read_config(args.second)
    print(repr(distance_rho(first, second)))
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bdlab",
        description="Spatial birth-and-death jump chain toolbox.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config_command(name: str, help_text: str):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", required=True, help="path to the JSON config")
        cmd.add_argument("--seed", type=int, default=None, help="override the config seed")
        cmd.add_argument("--workers", type=int, default=None, help="worker cap (results independent of it)")
        cmd.add_argument("--out", default=None, help="output directory (default: config 'out' or ./out)")
        cmd.add_argument(
            "--skip-validation", action="store_true",
            help="skip the conformance gate on the model",
        )
        return cmd

    add_config_command("simulate", "run one trajectory and write its events")
    add_config_command("hitprob", "estimate a hitting probability with a Wilson interval")
    add_config_command("path", "build the constructive path to a goal configuration")
    add_config_command("validate", "probe the standing conditions on sampled states")
    add_config_command("measure", "evaluate reference-measure values for configured sets")
    add_config_command("lab", "run the default experiment suite")

    metric = sub.add_parser("metric", help="bottleneck distance between two configuration files")
    metric.add_argument("first")
    metric.add_argument("second")
    return parser


_HANDLERS = {
    "simulate": _cmd_simulate,
    "hitprob": _cmd_hitprob,
    "path": _cmd_path,
    "validate": _cmd_validate,
    "measure": _cmd_measure,
    "lab": _cmd_lab,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "metric":
            return _cmd_metric(args)
        config = load_config(args.config)
        model = build_model(config)
        seed = int(args.seed if args.seed is not None else config.get("seed", 0))
        workers = int(args.workers if args.workers is not None else config.get("workers", 1))
        if workers < 1:
            raise ConfigError("workers must be at least 1")
        outdir = args.out if args.out is not None else str(config.get("out", "out"))
        needs_gate = args.command in {"simulate", "hitprob", "lab"}
        if needs_gate:
            _gate_model(model, config, seed, args.skip_validation)
        return _HANDLERS[args.command](config, model, seed, outdir, workers)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
