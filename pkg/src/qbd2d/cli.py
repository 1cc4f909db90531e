"""Command-line interface for the two-queue drift toolkit.

Subcommands
-----------
validate    check a model's block shapes, sign pattern, and rate balance
drift       print the phase-process drift vector and both axis drift vectors
classify    run the drift-based stability test and report the verdict
efficiency  find the critical arrival rate of the scanned queue by bisection
table       sweep the fixed arrival rate over a grid of critical-rate solves
simulate    estimate a drift vector by Monte-Carlo uniformized stepping

Models come either from ``--builtin NAME`` (a named constructor with rate
flags) or ``--model PATH`` (a JSON block file).  Output is plain text, CSV,
or JSON lines; every record carries the model name, its parameters, and the
package version, and a fixed configuration and seed always reproduce
byte-identical output.

Exit codes: 0 on success, 2 when classification is inconclusive, and 1 when
the model is invalid or one of the three structural assumptions fails.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence, TextIO

import numpy as np

from . import __version__
from .ctmc import AssumptionViolation
from .efficiency import (
    ModelFamily,
    TableRow,
    additional_server_family,
    find_lambda_star,
    independent_pair_family,
    priority_setup_family,
    table_sweep,
)
from .model import (
    ModelError,
    QbdModel,
    build_additional_server,
    build_independent_pair,
    build_priority_setup,
    build_priority_setup_mapph,
    load_model,
    validate,
)
from .qbd import NullRecurrenceError
from .simulate import VARIANTS, SimState, empirical_drift
from .stability import Verdict, classify, drift_axis, drift_plus

COMMANDS = ("validate", "drift", "classify", "efficiency", "table", "simulate")
FORMATS = ("text", "csv", "jsonl")
BUILTINS = (
    "priority-setup",
    "priority-setup-mapph",
    "additional-server",
    "independent-pair",
)

_RATE_DEFAULTS: dict[str, float] = {
    "l1": 0.1,
    "l2": 0.1,
    "mu1": 1.0,
    "mu2": 1.0,
    "g1": 2.0,
    "g2": 2.0,
    "ph_order": 1,
}

TABLE_COLUMNS = ("fixed_rate", "lambda_star", "rho_star", "drift_residual")


@dataclass(frozen=True)
class RunConfig:
    """One fully-resolved invocation of the tool.

    Exactly one of ``builtin`` and ``model_path`` must be set.  ``params``
    holds the rate flags for builtin constructors; ``scan`` selects which
    queue's arrival rate the efficiency commands bisect over.
    """

    command: str
    builtin: str | None = None
    model_path: str | None = None
    params: Mapping[str, float] = field(default_factory=dict)
    scan: str = "l2"
    grid: tuple[float, float, float] | None = None
    output_format: str = "text"
    eps: float = 1e-9
    tol: float = 1e-8
    trunc: int = 40
    seed: int = 0
    variant: str = "plus"
    steps: int = 100_000
    trials: int = 200
    start: tuple[int, int, int] = (8, 8, 0)

    def __post_init__(self) -> None:
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        if (self.builtin is None) == (self.model_path is None):
            raise ValueError("exactly one of builtin and model_path must be set")
        if self.builtin is not None and self.builtin not in BUILTINS:
            raise ValueError(f"unknown builtin model {self.builtin!r}")
        if self.output_format not in FORMATS:
            raise ValueError(f"unknown output format {self.output_format!r}")
        if self.scan not in ("l1", "l2"):
            raise ValueError("scan must be 'l1' or 'l2'")
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown simulation variant {self.variant!r}")


def _rates(config: RunConfig) -> dict[str, float]:
    merged = dict(_RATE_DEFAULTS)
    merged.update(config.params)
    return merged


def _erlang(order: int, rate: float) -> tuple[np.ndarray, np.ndarray]:
    """Return the (matrix, entry-vector) pair of an Erlang-``order`` stage
    chain with overall mean ``1 / rate``."""

    stage = order * rate
    u = np.diag(np.full(order, -stage)) + np.diag(np.full(order - 1, stage), 1)
    beta = np.zeros((1, order))
    beta[0, 0] = 1.0
    return u, beta


def _mapph_model(
    lambda1: float,
    lambda2: float,
    mu1: float,
    mu2: float,
    gamma1: float,
    gamma2: float,
    ph_order: int,
) -> QbdModel:
    """Staged variant of the priority-setup model: Poisson arrivals with
    Erlang-``ph_order`` service and setup stages of unchanged means."""

    order = int(ph_order)
    if order < 1:
        raise ModelError("ph_order must be a positive integer")
    map1 = (np.array([[-lambda1]]), np.array([[lambda1]]))
    map2 = (np.array([[-lambda2]]), np.array([[lambda2]]))
    model = build_priority_setup_mapph(
        map1,
        map2,
        _erlang(order, mu1),
        _erlang(order, mu2),
        _erlang(order, gamma1),
        _erlang(order, gamma2),
    )
    return replace(
        model,
        params={
            "lambda1": lambda1,
            "lambda2": lambda2,
            "mu1": mu1,
            "mu2": mu2,
            "gamma1": gamma1,
            "gamma2": gamma2,
            "ph_order": order,
        },
    )


def _make_model(config: RunConfig) -> QbdModel:
    if config.model_path is not None:
        return load_model(config.model_path)
    p = _rates(config)
    if config.builtin == "priority-setup":
        model = build_priority_setup(p["l1"], p["l2"], p["mu1"], p["mu2"], p["g1"], p["g2"])
    elif config.builtin == "priority-setup-mapph":
        model = _mapph_model(
            p["l1"], p["l2"], p["mu1"], p["mu2"], p["g1"], p["g2"], int(p["ph_order"])
        )
    elif config.builtin == "additional-server":
        model = build_additional_server(p["l1"], p["l2"], p["mu1"], p["mu2"])
    else:
        model = build_independent_pair(p["l1"], p["l2"], p["mu1"], p["mu2"])
    return model


def _make_family(config: RunConfig) -> ModelFamily:
    p = _rates(config)
    scan = "lambda2" if config.scan == "l2" else "lambda1"
    if config.builtin == "priority-setup":
        return priority_setup_family(
            mu1=p["mu1"], mu2=p["mu2"], gamma1=p["g1"], gamma2=p["g2"],
            lambda1=p["l1"], lambda2=p["l2"], scan=scan,
        )
    if config.builtin == "priority-setup-mapph":
        fixed_name = "lambda1" if scan == "lambda2" else "lambda2"
        fixed = {
            "mu1": p["mu1"],
            "mu2": p["mu2"],
            "gamma1": p["g1"],
            "gamma2": p["g2"],
            "ph_order": int(p["ph_order"]),
            fixed_name: p["l1"] if scan == "lambda2" else p["l2"],
        }
        return ModelFamily(
            builder=_mapph_model,
            scanned=scan,
            fixed=fixed,
            service_means=(1.0 / p["mu1"], 1.0 / p["mu2"]),
            servers=1.0,
            name="priority-setup-mapph",
        )
    if config.builtin == "additional-server":
        return additional_server_family(
            mu1=p["mu1"], mu2=p["mu2"], lambda1=p["l1"], lambda2=p["l2"], scan=scan
        )
    if config.builtin == "independent-pair":
        return independent_pair_family(
            mu1=p["mu1"], mu2=p["mu2"], lambda1=p["l1"], lambda2=p["l2"], scan=scan
        )
    raise ValueError("efficiency commands need a builtin model family")


def _grid_points(grid: tuple[float, float, float]) -> list[float]:
    lo, hi, step = grid
    if step <= 0 or hi < lo:
        raise ValueError("grid must be lo:hi:step with step > 0 and hi >= lo")
    count = int(np.floor((hi - lo) / step + 1e-9)) + 1
    return [round(lo + i * step, 12) for i in range(count)]


def _fmt(value: float | None) -> str:
    if value is None:
        return ""
    return format(float(value), ".12g")


def _meta(config: RunConfig, model_name: str, params: Mapping[str, object]) -> dict:
    return {
        "model": model_name,
        "params": {key: params[key] for key in sorted(params)},
        "version": __version__,
    }


def _emit(
    config: RunConfig,
    meta: dict,
    records: list[dict],
    columns: Sequence[str],
    text_lines: list[str],
    stream: TextIO,
) -> None:
    if config.output_format == "text":
        params = " ".join(f"{k}={v}" for k, v in meta["params"].items())
        stream.write(f"# qbd2d {meta['version']} model={meta['model']} {params}".rstrip() + "\n")
        for line in text_lines:
            stream.write(line + "\n")
    elif config.output_format == "csv":
        for key, value in meta.items():
            if key == "params":
                value = " ".join(f"{k}={v}" for k, v in value.items())
            stream.write(f"# {key}={value}\n")
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(columns)
        for record in records:
            cells = []
            for column in columns:
                value = record.get(column)
                if value is None:
                    cells.append("")
                elif isinstance(value, float):
                    cells.append(_fmt(value))
                elif isinstance(value, (list, tuple)):
                    cells.append(json.dumps(value))
                else:
                    cells.append(str(value))
            writer.writerow(cells)
    else:
        for record in records:
            stream.write(json.dumps({**meta, **record}, sort_keys=False) + "\n")


def _vector_text(name: str, vector) -> str:
    if vector is None:
        return f"{name} = undefined"
    a1, a2 = tuple(vector)
    return f"{name} = ({_fmt(a1)}, {_fmt(a2)})"


def _run_validate(config: RunConfig, model: QbdModel, stream: TextIO) -> int:
    report = validate(model)
    record = {
        "ok": report.ok,
        "errors": list(report.errors),
        "warnings": list(report.warnings),
    }
    lines = [f"error: {msg}" for msg in report.errors]
    lines += [f"warning: {msg}" for msg in report.warnings]
    lines.append("ok" if report.ok else "invalid")
    _emit(config, _meta(config, model.name, model.params), [record],
          ("ok", "errors", "warnings"), lines, stream)
    return 0 if report.ok else 1


def _run_drift(config: RunConfig, model: QbdModel, stream: TextIO) -> int:
    a_plus = drift_plus(model)
    axis_vectors = {}
    for axis in (1, 2):
        try:
            axis_vectors[axis] = drift_axis(model, axis, levels=config.trunc)
        except NullRecurrenceError:
            axis_vectors[axis] = None
    record = {
        "a_plus": list(a_plus),
        "a_axis1": None if axis_vectors[1] is None else list(axis_vectors[1]),
        "a_axis2": None if axis_vectors[2] is None else list(axis_vectors[2]),
    }
    lines = [
        _vector_text("a_plus", a_plus),
        _vector_text("a_axis1", axis_vectors[1]),
        _vector_text("a_axis2", axis_vectors[2]),
    ]
    columns = ("a_plus", "a_axis1", "a_axis2")
    _emit(config, _meta(config, model.name, model.params), [record], columns, lines, stream)
    return 0


def _run_classify(config: RunConfig, model: QbdModel, stream: TextIO) -> int:
    result = classify(model, eps=config.eps, levels=config.trunc)
    record = {
        "verdict": result.verdict.value,
        "case": result.case_tag,
        "a_plus": list(result.a_plus),
        "a_axis1": None if result.a_axis1 is None else list(result.a_axis1),
        "a_axis2": None if result.a_axis2 is None else list(result.a_axis2),
    }
    lines = [result.describe(), _vector_text("a_plus", result.a_plus)]
    if result.a_axis1 is not None:
        lines.append(_vector_text("a_axis1", result.a_axis1))
    if result.a_axis2 is not None:
        lines.append(_vector_text("a_axis2", result.a_axis2))
    columns = ("verdict", "case", "a_plus", "a_axis1", "a_axis2")
    _emit(config, _meta(config, model.name, model.params), [record], columns, lines, stream)
    return 2 if result.verdict is Verdict.INCONCLUSIVE else 0


def _run_efficiency(config: RunConfig, stream: TextIO) -> int:
    family = _make_family(config)
    result = find_lambda_star(family, tol=config.tol)
    record = {
        "fixed_rate": family.fixed[family.fixed_arrival],
        "lambda_star": result.lambda_star,
        "rho_star": result.rho_star,
        "throughput": list(result.throughput_vector),
        "drift_at_root": result.drift_at_root,
    }
    lines = [
        f"lambda_star = {_fmt(result.lambda_star)}",
        f"rho_star = {_fmt(result.rho_star)}",
        _vector_text("throughput", result.throughput_vector),
        f"drift_at_root = {_fmt(result.drift_at_root)}",
    ]
    columns = ("fixed_rate", "lambda_star", "rho_star", "throughput", "drift_at_root")
    _emit(config, _meta(config, family.name, dict(family.fixed)), [record], columns, lines, stream)
    return 0


def _table_record(row: TableRow) -> dict:
    if row.result is None:
        return {
            "fixed_rate": row.fixed_rate,
            "lambda_star": None,
            "rho_star": None,
            "drift_residual": None,
            "error": row.error,
        }
    return {
        "fixed_rate": row.fixed_rate,
        "lambda_star": row.result.lambda_star,
        "rho_star": row.result.rho_star,
        "drift_residual": row.result.drift_at_root,
        "error": None,
    }


def _run_table(config: RunConfig, stream: TextIO) -> int:
    if config.grid is None:
        raise ValueError("the table command needs --grid lo:hi:step")
    family = _make_family(config)
    rows = table_sweep(family, _grid_points(config.grid), tol=config.tol)
    records = [_table_record(row) for row in rows]
    lines = ["fixed_rate  lambda_star  rho_star  drift_residual"]
    for record in records:
        if record["error"] is not None:
            lines.append(f"{record['fixed_rate']:<10.4g}  failed: {record['error']}")
        else:
            lines.append(
                f"{record['fixed_rate']:<10.4g}  {record['lambda_star']:<11.6f}"
                f"  {record['rho_star']:<8.6f}  {record['drift_residual']:.3e}"
            )
    _emit(config, _meta(config, family.name, dict(family.fixed)), records,
          TABLE_COLUMNS, lines, stream)
    return 0


def _run_simulate(config: RunConfig, model: QbdModel, stream: TextIO) -> int:
    state = SimState(*config.start)
    estimate = empirical_drift(
        model,
        state,
        variant=config.variant,
        k=config.steps,
        trials=config.trials,
        seed=config.seed,
    )
    record = {
        "variant": config.variant,
        "mean": list(estimate.mean),
        "stderr": list(estimate.stderr),
        "k": estimate.k,
        "trials": estimate.trials,
        "nu": estimate.nu,
        "seed": config.seed,
    }
    lines = [
        _vector_text("mean", estimate.mean),
        _vector_text("stderr", estimate.stderr),
        f"k = {estimate.k}",
        f"trials = {estimate.trials}",
        f"nu = {_fmt(estimate.nu)}",
    ]
    columns = ("variant", "mean", "stderr", "k", "trials", "nu", "seed")
    _emit(config, _meta(config, model.name, model.params), [record], columns, lines, stream)
    return 0


def run(config: RunConfig, stream: TextIO | None = None) -> int:
    """Execute one configured command and return the process exit code."""

    out = sys.stdout if stream is None else stream
    try:
        if config.command in ("efficiency", "table"):
            if config.builtin is None:
                raise ValueError("efficiency commands need a builtin model family")
            if config.command == "efficiency":
                return _run_efficiency(config, out)
            return _run_table(config, out)
        model = _make_model(config)
        if config.command == "validate":
            return _run_validate(config, model, out)
        if config.command == "drift":
            return _run_drift(config, model, out)
        if config.command == "classify":
            return _run_classify(config, model, out)
        return _run_simulate(config, model, out)
    except AssumptionViolation as exc:
        print(f"error: assumption {exc.assumption} violated: {exc}", file=sys.stderr)
        return 1
    except (ModelError, NullRecurrenceError, ArithmeticError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _parse_grid(text: str) -> tuple[float, float, float]:
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("grid must look like lo:hi:step")
    try:
        lo, hi, step = (float(part) for part in parts)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    return lo, hi, step


def _parse_start(text: str) -> tuple[int, int, int]:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("start must look like l1,l2,phase")
    try:
        l1, l2, phase = (int(part) for part in parts)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    return l1, l2, phase


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qbd2d",
        description="drift classification and critical-rate tables for "
        "two-queue quasi-birth-and-death models",
    )
    parser.add_argument("--version", action="version", version=f"qbd2d {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        sub = subparsers.add_parser(command)
        source = sub.add_mutually_exclusive_group(required=True)
        source.add_argument("--builtin", choices=BUILTINS, help="named model constructor")
        source.add_argument("--model", dest="model_path", help="path to a JSON model file")
        for flag in ("l1", "l2", "mu1", "mu2", "g1", "g2"):
            sub.add_argument(f"--{flag}", type=float, default=None, help=f"rate {flag}")
        sub.add_argument("--ph-order", type=int, default=None,
                         help="Erlang order for the staged-service builtin")
        sub.add_argument("--scan", choices=("l1", "l2"), default="l2",
                         help="which arrival rate the bisection scans")
        sub.add_argument("--grid", type=_parse_grid, default=None,
                         help="fixed-rate grid lo:hi:step for the table command")
        sub.add_argument("--eps", type=float, default=1e-9,
                         help="relative half-width of the zero band in classify")
        sub.add_argument("--tol", type=float, default=1e-8, help="bisection tolerance")
        sub.add_argument("--trunc", type=int, default=40,
                         help="truncation depth for axis-chain structure checks")
        sub.add_argument("--seed", type=int, default=0, help="simulation seed")
        sub.add_argument("--variant", choices=VARIANTS, default="plus",
                         help="which induced process to simulate")
        sub.add_argument("--steps", type=int, default=100_000,
                         help="uniformized steps per simulated trial")
        sub.add_argument("--trials", type=int, default=200,
                         help="independent simulated trials")
        sub.add_argument("--start", type=_parse_start, default=(8, 8, 0),
                         help="simulation start state l1,l2,phase")
        sub.add_argument("--format", dest="output_format", choices=FORMATS,
                         default="text", help="output format")
    return parser


def config_from_args(argv: Sequence[str] | None = None) -> RunConfig:
    args = build_parser().parse_args(argv)
    params = {}
    for flag in ("l1", "l2", "mu1", "mu2", "g1", "g2"):
        value = getattr(args, flag)
        if value is not None:
            params[flag] = value
    if args.ph_order is not None:
        params["ph_order"] = args.ph_order
    return RunConfig(
        command=args.command,
        builtin=args.builtin,
        model_path=args.model_path,
        params=params,
        scan=args.scan,
        grid=args.grid,
        output_format=args.output_format,
        eps=args.eps,
        tol=args.tol,
        trunc=args.trunc,
        seed=args.seed,
        variant=args.variant,
        steps=args.steps,
        trials=args.trials,
        start=args.start,
    )


def main(argv: Sequence[str] | None = None) -> int:
    try:
        config = config_from_args(argv)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
