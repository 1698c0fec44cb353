"""Command-line front end: TOML config ingestion and CSV/JSON emission.

Subcommands: rate, sweep, optimize, benchmark, simulate. Exit codes: 0 on
success, 1 on validation/compute/I-O errors, 2 on usage errors, 3 when a
rate/optimize run lands in the zero-key regime.
"""

import argparse
import csv
import json
import secrets
import sys
from dataclasses import dataclass, field, replace

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .core import (
    ArchitectureMismatchError,
    ArchitectureSpec,
    Conventions,
    RepeaterParams,
    Variant,
)
from .optimize import (
    Objective,
    SweepAxis,
    optimize_neg,
    optimize_spacing,
    sweep,
)
from .rates import RateReport, evaluate_point
from .simulate import SimConfig, analytic_reference, simulate_chain

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_ZERO_KEY = 3

PARAM_COLUMNS = ("L_tot", "L0", "L_att", "eta_c", "eps_g", "t0", "F0", "c",
                 "m", "n_eg", "R_source", "variant", "comm_ions", "mem_ions")
REPORT_COLUMNS = ("p_link", "P_success", "T_cycle", "R_raw", "Q",
                  "secret_fraction", "R_sec", "I_R", "R_rci", "R_plob")
CSV_COLUMNS = PARAM_COLUMNS + REPORT_COLUMNS
BENCHMARK_COLUMNS = ("L_tot", "n_eg_opt", "R_sec", "R_rci", "R_plob",
                     "beats_plob")


class ConfigError(ValueError):
    """Malformed or invalid run configuration."""


@dataclass
class RunConfig:
    """Fully validated run configuration."""

    params: RepeaterParams
    arch: ArchitectureSpec
    conventions: Conventions = Conventions()
    axes: list = field(default_factory=list)
    trials: int = 100_000
    seed: int | None = None
    workers: int = 1
    out_path: str | None = None
    out_format: str = "csv"


_FLOAT_PARAM_KEYS = ("L_tot", "L0", "L_att", "eta_c", "eps_g", "t0", "F0",
                     "c", "R_source")
_INT_PARAM_KEYS = ("m", "n_eg")


def _as_float(section: str, key: str, value) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"[{section}] {key} must be a number, got {value!r}")
    return float(value)


def _as_int(section: str, key: str, value) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"[{section}] {key} must be an integer, "
                          f"got {value!r}")
    return value


def _reject_unknown(section: str, table: dict, allowed: tuple) -> None:
    for key in table:
        if key not in allowed:
            raise ConfigError(f"unknown key {key!r} in [{section}] section")


def _parse_axis(entry: dict) -> SweepAxis:
    _reject_unknown("sweep.axis", entry,
                    ("name", "values", "start", "stop", "num", "scale"))
    if "name" not in entry:
        raise ConfigError("sweep axis needs a 'name' key")
    name = entry["name"]
    if "values" in entry:
        if any(k in entry for k in ("start", "stop", "num", "scale")):
            raise ConfigError(
                f"sweep axis {name!r}: give either 'values' or "
                "'start'/'stop'/'num', not both"
            )
        values = [_as_float("sweep.axis", "values", v)
                  for v in entry["values"]]
        return SweepAxis(name, tuple(values))
    for key in ("start", "stop", "num"):
        if key not in entry:
            raise ConfigError(f"sweep axis {name!r} needs {key!r} "
                              "(or an explicit 'values' list)")
    scale = entry.get("scale", "linear")
    num = _as_int("sweep.axis", "num", entry["num"])
    start = _as_float("sweep.axis", "start", entry["start"])
    stop = _as_float("sweep.axis", "stop", entry["stop"])
    if scale == "linear":
        return SweepAxis.linear(name, start, stop, num)
    if scale == "log":
        return SweepAxis.log(name, start, stop, num)
    raise ConfigError(f"sweep axis {name!r}: scale must be 'linear' or "
                      f"'log', got {scale!r}")


def parse_config(text: str) -> RunConfig:
    """Parse and validate a TOML run configuration."""
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config parse error: {exc}") from exc

    _reject_unknown("<top level>", doc, ("repeater", "architecture",
                                         "conventions", "sweep", "simulate",
                                         "output"))
    if "repeater" not in doc:
        raise ConfigError("config needs a [repeater] section")
    rep = doc["repeater"]
    _reject_unknown("repeater", rep, _FLOAT_PARAM_KEYS + _INT_PARAM_KEYS)
    for key in ("L_tot", "L0", "eta_c"):
        if key not in rep:
            raise ConfigError(f"[repeater] is missing required key {key!r}")
    kwargs = {k: _as_float("repeater", k, rep[k])
              for k in _FLOAT_PARAM_KEYS if k in rep}
    kwargs.update({k: _as_int("repeater", k, rep[k])
                   for k in _INT_PARAM_KEYS if k in rep})
    try:
        params = RepeaterParams(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"[repeater] {exc}") from exc

    arch_table = doc.get("architecture", {})
    _reject_unknown("architecture", arch_table,
                    ("variant", "comm_ions", "mem_ions"))
    try:
        if "variant" in arch_table:
            try:
                variant = Variant(arch_table["variant"])
            except ValueError:
                raise ConfigError(
                    f"[architecture] variant must be 'TypeI' or 'TypeII', "
                    f"got {arch_table['variant']!r}"
                ) from None
        else:
            variant = Variant.TYPE_I if params.m == 1 else Variant.TYPE_II
        comm = (_as_int("architecture", "comm_ions", arch_table["comm_ions"])
                if "comm_ions" in arch_table else params.m)
        mem = (_as_int("architecture", "mem_ions", arch_table["mem_ions"])
               if "mem_ions" in arch_table else 2)
        arch = ArchitectureSpec(variant, comm, mem)
    except ValueError as exc:
        raise ConfigError(f"[architecture] {exc}") from exc
    if arch.comm_ions != params.m:
        raise ConfigError(
            f"[architecture] comm_ions={arch.comm_ions} must equal "
            f"[repeater] m={params.m}"
        )

    conv_table = doc.get("conventions", {})
    _reject_unknown("conventions", conv_table,
                    ("type1_denominator", "type2_pairing",
                     "stations_include_endpoints"))
    try:
        conventions = Conventions(**conv_table)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[conventions] {exc}") from exc

    axes = []
    sweep_table = doc.get("sweep", {})
    _reject_unknown("sweep", sweep_table, ("axis",))
    for entry in sweep_table.get("axis", []):
        try:
            axes.append(_parse_axis(entry))
        except ValueError as exc:
            raise ConfigError(f"[sweep] {exc}") from exc

    sim_table = doc.get("simulate", {})
    _reject_unknown("simulate", sim_table, ("trials", "seed", "workers"))
    trials = _as_int("simulate", "trials", sim_table.get("trials", 100_000))
    seed = (_as_int("simulate", "seed", sim_table["seed"])
            if "seed" in sim_table else None)
    workers = _as_int("simulate", "workers", sim_table.get("workers", 1))

    out_table = doc.get("output", {})
    _reject_unknown("output", out_table, ("path", "format"))
    out_format = out_table.get("format", "csv")
    if out_format not in ("csv", "json"):
        raise ConfigError(f"[output] format must be 'csv' or 'json', "
                          f"got {out_format!r}")

    return RunConfig(
        params=params,
        arch=arch,
        conventions=conventions,
        axes=axes,
        trials=trials,
        seed=seed,
        workers=workers,
        out_path=out_table.get("path"),
        out_format=out_format,
    )


def fmt(value) -> str:
    """6 significant digits, scientific below 1e-3; fixed strings otherwise."""
    if value is None:
        return "n/a"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if value == 0:
        return "0"
    if abs(value) < 1e-3:
        return f"{value:.5e}"
    return f"{value:.6g}"


def params_to_dict(params: RepeaterParams, arch: ArchitectureSpec) -> dict:
    return {
        "L_tot": params.L_tot, "L0": params.L0, "L_att": params.L_att,
        "eta_c": params.eta_c, "eps_g": params.eps_g, "t0": params.t0,
        "F0": params.F0, "c": params.c, "m": params.m, "n_eg": params.n_eg,
        "R_source": params.R_source, "variant": arch.variant.value,
        "comm_ions": arch.comm_ions, "mem_ions": arch.mem_ions,
    }


def report_to_dict(report: RateReport) -> dict:
    return {name: getattr(report, name) for name in REPORT_COLUMNS}


def conventions_to_dict(conventions: Conventions) -> dict:
    return {
        "type1_denominator": conventions.type1_denominator,
        "type2_pairing": conventions.type2_pairing,
        "stations_include_endpoints": conventions.stations_include_endpoints,
    }


def _csv_cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def write_csv(stream, columns, rows) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_csv_cell(row[c]) for c in columns])


def _emit(cfg: RunConfig, columns, rows, json_doc) -> None:
    """Write rows as CSV or a document as JSON to the configured sink."""
    if cfg.out_path:
        with open(cfg.out_path, "w", encoding="utf-8", newline="") as fh:
            if cfg.out_format == "json":
                json.dump(json_doc, fh, indent=2)
                fh.write("\n")
            else:
                write_csv(fh, columns, rows)
    elif cfg.out_format == "json":
        json.dump(json_doc, sys.stdout, indent=2)
        sys.stdout.write("\n")
    else:
        write_csv(sys.stdout, columns, rows)


def _rate_row(params, arch, report) -> dict:
    row = params_to_dict(params, arch)
    row.update(report_to_dict(report))
    return row


def cmd_rate(cfg: RunConfig) -> int:
    report = evaluate_point(cfg.params, cfg.arch, cfg.conventions)
    for name in REPORT_COLUMNS:
        print(f"{name:<16} {fmt(getattr(report, name))}")
    if report.zero_key:
        print("zero_key         true")
    if cfg.out_path:
        doc = {
            "params": params_to_dict(cfg.params, cfg.arch),
            "conventions": conventions_to_dict(cfg.conventions),
            "report": report_to_dict(report),
        }
        _emit(cfg, CSV_COLUMNS,
              [_rate_row(cfg.params, cfg.arch, report)], doc)
    return EXIT_ZERO_KEY if report.zero_key else EXIT_OK


def cmd_sweep(cfg: RunConfig, n_max: int) -> int:
    if not cfg.axes:
        raise ConfigError("sweep needs at least one [[sweep.axis]] entry "
                          "in the config")
    rows = sweep(cfg.params, cfg.arch, cfg.axes, n_max=n_max,
                 conventions=cfg.conventions)
    table = [_rate_row(pt.params, cfg.arch, pt.report) for pt in rows]
    doc = {
        "conventions": conventions_to_dict(cfg.conventions),
        "rows": [
            {"params": params_to_dict(pt.params, cfg.arch),
             "n_eg_opt": pt.n_eg_opt,
             "report": report_to_dict(pt.report)}
            for pt in rows
        ],
    }
    _emit(cfg, CSV_COLUMNS, table, doc)
    return EXIT_OK


def cmd_optimize(cfg: RunConfig, objective: Objective, grid,
                 n_max: int) -> int:
    result = optimize_spacing(cfg.params, cfg.arch, grid,
                              objective=objective, n_max=n_max,
                              conventions=cfg.conventions)
    print(f"objective        {result.objective.value}")
    print(f"L0_opt           {fmt(result.L0_opt)}")
    print(f"n_eg_opt         {result.n_eg_opt}")
    print(f"objective_value  {fmt(result.objective_value)}")
    for name in REPORT_COLUMNS:
        print(f"{name:<16} {fmt(getattr(result.best_report, name))}")
    if result.best_report.zero_key:
        print("zero_key         true")
    if cfg.out_path:
        doc = {
            "objective": result.objective.value,
            "L0_opt": result.L0_opt,
            "n_eg_opt": result.n_eg_opt,
            "objective_value": result.objective_value,
            "params": params_to_dict(result.best_params, cfg.arch),
            "conventions": conventions_to_dict(cfg.conventions),
            "report": report_to_dict(result.best_report),
        }
        _emit(cfg, CSV_COLUMNS,
              [_rate_row(result.best_params, cfg.arch, result.best_report)],
              doc)
    return EXIT_ZERO_KEY if result.best_report.zero_key else EXIT_OK


def cmd_benchmark(cfg: RunConfig, start: float, stop: float, step: float,
                  n_max: int) -> int:
    if step <= 0 or stop < start:
        raise ConfigError("benchmark grid needs step > 0 and stop >= start")
    grid = []
    v = start
    while v <= stop + 1e-9:
        if v >= cfg.params.L0:
            grid.append(round(v, 9))
        v += step
    if not grid:
        raise ConfigError("benchmark grid has no points >= L0")
    rows = []
    for L_tot in grid:
        point = replace(cfg.params, L_tot=L_tot)
        n_opt, report = optimize_neg(point, cfg.arch, n_max, cfg.conventions)
        rows.append({
            "L_tot": L_tot,
            "n_eg_opt": n_opt,
            "R_sec": report.R_sec,
            "R_rci": report.R_rci,
            "R_plob": report.R_plob,
            "beats_plob": report.R_sec > report.R_plob,
        })
    doc = {"conventions": conventions_to_dict(cfg.conventions), "rows": rows}
    _emit(cfg, BENCHMARK_COLUMNS, rows, doc)
    return EXIT_OK


def cmd_simulate(cfg: RunConfig) -> int:
    seed = cfg.seed
    if seed is None:
        seed = secrets.randbits(64)
    sim_config = SimConfig(cfg.params, cfg.arch, cfg.trials, seed)
    estimate = simulate_chain(sim_config, cfg.conventions, cfg.workers)
    P, Q, R_raw = analytic_reference(cfg.params, cfg.arch, cfg.conventions)

    def zscore(analytic, est, se):
        if est is None:
            return None
        if se == 0:
            return 0.0 if est == analytic else None
        return (est - analytic) / se

    print(f"seed             {estimate.seed}")
    print(f"trials           {estimate.trials_used}")
    print(f"n_success        {estimate.n_success}")
    header = f"{'quantity':<12}{'analytic':>15}{'estimate':>15}" \
             f"{'std_err':>15}{'z':>10}"
    print(header)
    for name, analytic, est, se in (
        ("P_success", P, estimate.p_success_hat, estimate.p_success_se),
        ("Q", Q, estimate.qber_hat, estimate.qber_se),
        ("R_raw", R_raw, estimate.raw_rate_hat, estimate.raw_rate_se),
    ):
        z = zscore(analytic, est, se)
        print(f"{name:<12}{fmt(analytic):>15}{fmt(est):>15}"
              f"{fmt(se):>15}{fmt(z):>10}")
    if cfg.out_path:
        doc = {
            "params": params_to_dict(cfg.params, cfg.arch),
            "conventions": conventions_to_dict(cfg.conventions),
            "estimate": {
                "p_success_hat": estimate.p_success_hat,
                "p_success_se": estimate.p_success_se,
                "qber_hat": estimate.qber_hat,
                "qber_se": estimate.qber_se,
                "raw_rate_hat": estimate.raw_rate_hat,
                "raw_rate_se": estimate.raw_rate_se,
                "trials_used": estimate.trials_used,
                "n_success": estimate.n_success,
                "seed": estimate.seed,
            },
            "analytic": {"P_success": P, "Q": Q, "R_raw": R_raw},
        }
        with open(cfg.out_path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="TOML config path")
    common.add_argument("--out", help="output file path")
    common.add_argument("--format", choices=("csv", "json"),
                        help="output file format (default csv)")
    common.add_argument("--type1-denominator", choices=("2T", "T"),
                        help="sequential-architecture rate denominator")
    common.add_argument("--type2-pairing", choices=("full", "split"),
                        help="ion pairs per link in the simultaneous "
                             "architecture")
    common.add_argument("--stations-include-endpoints",
                        choices=("true", "false"),
                        help="count end nodes in the per-qubit metric")
    common.add_argument("--fiber-speed", type=float,
                        help="signal speed in fiber, km/s")
    common.add_argument("--n-max", type=int, default=100_000,
                        help="n_eg search bound")

    parser = argparse.ArgumentParser(
        prog="ionqkd",
        description="Key rates, optimization, and Monte Carlo simulation "
                    "for trapped-ion repeater chains",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("rate", parents=[common],
                   help="evaluate one parameter point")
    sub.add_parser("sweep", parents=[common],
                   help="evaluate the configured parameter grid")

    p_opt = sub.add_parser("optimize", parents=[common],
                           help="optimize repeater spacing and n_eg")
    p_opt.add_argument("--objective", choices=("rsec", "rsec-per-qubit"),
                       default="rsec")
    p_opt.add_argument("--l0-start", type=float)
    p_opt.add_argument("--l0-stop", type=float)
    p_opt.add_argument("--l0-step", type=float)

    p_bench = sub.add_parser("benchmark", parents=[common],
                             help="key rate vs the repeaterless bound "
                                  "over total distance")
    p_bench.add_argument("--ltot-start", type=float, default=50.0)
    p_bench.add_argument("--ltot-stop", type=float, default=300.0)
    p_bench.add_argument("--ltot-step", type=float, default=5.0)

    p_sim = sub.add_parser("simulate", parents=[common],
                           help="Monte Carlo run with analytic comparison")
    p_sim.add_argument("--trials", type=int)
    p_sim.add_argument("--seed", type=int)
    p_sim.add_argument("--workers", type=int)

    return parser


def _apply_overrides(cfg: RunConfig, args: argparse.Namespace) -> RunConfig:
    conv = cfg.conventions
    if args.type1_denominator:
        conv = replace(conv, type1_denominator=args.type1_denominator)
    if args.type2_pairing:
        conv = replace(conv, type2_pairing=args.type2_pairing)
    if args.stations_include_endpoints:
        conv = replace(
            conv,
            stations_include_endpoints=(
                args.stations_include_endpoints == "true"),
        )
    cfg.conventions = conv
    if args.fiber_speed is not None:
        cfg.params = replace(cfg.params, c=args.fiber_speed)
    if args.out:
        cfg.out_path = args.out
    if args.format:
        cfg.out_format = args.format
    if getattr(args, "trials", None) is not None:
        if args.trials < 1:
            raise ConfigError(f"--trials must be >= 1, got {args.trials}")
        cfg.trials = args.trials
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    if getattr(args, "workers", None) is not None:
        if args.workers < 1:
            raise ConfigError(f"--workers must be >= 1, got {args.workers}")
        cfg.workers = args.workers
    return cfg


def run_command(argv) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        with open(args.config, encoding="utf-8") as fh:
            cfg = parse_config(fh.read())
        cfg = _apply_overrides(cfg, args)
        if args.command == "rate":
            return cmd_rate(cfg)
        if args.command == "sweep":
            return cmd_sweep(cfg, args.n_max)
        if args.command == "optimize":
            grid = None
            given = (args.l0_start, args.l0_stop, args.l0_step)
            if any(v is not None for v in given):
                if any(v is None for v in given):
                    raise ConfigError(
                        "--l0-start/--l0-stop/--l0-step must be given "
                        "together"
                    )
                if args.l0_step <= 0 or args.l0_stop < args.l0_start:
                    raise ConfigError(
                        "spacing grid needs step > 0 and stop >= start"
                    )
                values, v = [], args.l0_start
                while v <= args.l0_stop + 1e-9:
                    values.append(round(v, 9))
                    v += args.l0_step
                grid = values
            return cmd_optimize(cfg, Objective(args.objective), grid,
                                args.n_max)
        if args.command == "benchmark":
            return cmd_benchmark(cfg, args.ltot_start, args.ltot_stop,
                                 args.ltot_step, args.n_max)
        if args.command == "simulate":
            return cmd_simulate(cfg)
        raise ConfigError(f"unknown command {args.command!r}")
    except (ConfigError, ArchitectureMismatchError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_ERROR


def main() -> None:
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()
