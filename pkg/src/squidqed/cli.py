"""Command-line interface: run, sweep, validate, plot.

Exit codes: 0 success, 1 validation/integration failure, 2 config
error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from datetime import datetime, timezone

from . import __version__
from .analysis import SWEEP_COLUMNS, SweepRecord, sweep, validation_battery
from .config import ConfigError, RunConfig, build_config, config_echo, parse_keyvalue_text
from .dynamics import IntegratorConvergenceError
from .protocol import ProtocolResult, run_protocol

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_IO = 3


def _load_config(args) -> RunConfig:
    entries: dict[str, str] = {}
    if args.config:
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                entries = parse_keyvalue_text(fh.read())
        except OSError as exc:
            raise ConfigError(f"cannot read config file {args.config!r}: {exc}") from exc
    for override in args.set or []:
        if "=" not in override:
            raise ConfigError(f"--set expects KEY=VALUE, got {override!r}")
        key, _, value = override.partition("=")
        entries[key.strip()] = value.strip()
    if args.output:
        entries["output_path"] = args.output
    if getattr(args, "format", None):
        entries["output_format"] = args.format
    return build_config(entries)


def _result_record(config: RunConfig, result: ProtocolResult) -> dict:
    cert = result.sequence.certificate
    return {
        "version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "config": config_echo(config),
        "regime": {
            "ratio_drive": result.regime.ratio_drive,
            "ratio_detuning": result.regime.ratio_detuning,
            "regime_ok": result.regime.regime_ok,
        },
        "timing_certificate": {
            "lam_t1": cert.lam_t1,
            "omega_t1_over_pi": cert.omega_t1_over_pi,
            "lam_t2": cert.lam_t2,
            "omega_prime_t2_over_two_pi": cert.omega_prime_t2_over_two_pi,
        },
        "fidelity_to_target": result.fidelity_to_target,
        "fidelity_phase_optimized": result.fidelity_phase_optimized,
        "entropy_ebits": result.entropy,
        "negativity": result.negativity,
        "norm_deviation": result.norm_deviation,
        "integrator": {
            name: {"dt": info.dt, "halvings": info.halvings,
                   "steps": info.steps, "infidelity": info.infidelity}
            for name, info in result.integrator.items()
        },
        "warnings": list(result.warnings),
    }


def _flatten(record: dict, prefix: str = "") -> dict[str, str]:
    flat: dict[str, str] = {}
    for key, value in record.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            flat.update(_flatten(value, f"{name}."))
        elif isinstance(value, list):
            flat[name] = ";".join(str(v) for v in value)
        elif value is None:
            flat[name] = ""
        elif isinstance(value, bool):
            flat[name] = "true" if value else "false"
        elif isinstance(value, float):
            flat[name] = repr(value)
        else:
            flat[name] = str(value)
    return flat


def _record_text(record: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(record, indent=2) + "\n"
    flat = _flatten(record)
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(flat.keys())
    writer.writerow(flat.values())
    return buf.getvalue()


def _write_output(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise _IOFailure(f"cannot write {path!r}: {exc}") from exc


class _IOFailure(Exception):
    pass


def cmd_run(args) -> int:
    config = _load_config(args)
    try:
        result = run_protocol(
            config.params,
            model=config.model,
            mode=config.mode,
            cfg=config.integrator,
            drive_on_window2=config.drive_on_window2,
            phase_optimized=config.phase_optimized,
        )
    except IntegratorConvergenceError as exc:
        print(f"error: integrator did not converge: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    record = _result_record(config, result)
    _write_output(_record_text(record, config.output_format), config.output_path)
    for warning in result.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    return EXIT_OK


def _parse_grid(specs: list[str]) -> dict[str, list]:
    grid: dict[str, list] = {}
    for spec in specs:
        if "=" not in spec:
            raise ConfigError(f"--grid expects KEY=V1,V2,..., got {spec!r}")
        key, _, values = spec.partition("=")
        key = key.strip()
        parsed = []
        for token in values.split(","):
            token = token.strip()
            if not token:
                continue
            try:
                parsed.append(int(token))
            except ValueError:
                try:
                    parsed.append(float(token))
                except ValueError as exc:
                    raise ConfigError(
                        f"--grid {key}: expected numbers, got {token!r}") from exc
        if not parsed:
            raise ConfigError(f"--grid {key}: no values")
        grid[key] = parsed
    if not grid:
        raise ConfigError("sweep requires at least one --grid KEY=V1,V2,...")
    return grid


def _sweep_rows(grid_names: list[str], records: list[SweepRecord]) -> list[dict[str, str]]:
    rows = []
    for rec in records:
        row: dict[str, str] = {}
        for name in grid_names:
            value = rec.point[name]
            row[name] = repr(value) if isinstance(value, float) else str(value)
        for col in SWEEP_COLUMNS:
            value = getattr(rec, col)
            if value is None:
                row[col] = ""
            elif isinstance(value, bool):
                row[col] = "true" if value else "false"
            elif isinstance(value, float):
                row[col] = repr(value)
            else:
                row[col] = str(value)
        rows.append(row)
    return rows


def cmd_sweep(args) -> int:
    config = _load_config(args)
    grid = _parse_grid(args.grid or [])
    records = sweep(
        grid,
        base=config.params,
        model=config.model,
        mode=config.mode,
        cfg=config.integrator,
        drive_on_window2=config.drive_on_window2,
        phase_optimized=config.phase_optimized,
    )
    names = list(grid.keys())
    rows = _sweep_rows(names, records)
    if config.output_format == "json":
        text = json.dumps(rows, indent=2) + "\n"
    else:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=names + list(SWEEP_COLUMNS))
        writer.writeheader()
        writer.writerows(rows)
        text = buf.getvalue()
    _write_output(text, config.output_path)
    if args.plot:
        from .plotting import render_rows

        ys = args.plot_y or ["fidelity"]
        render_rows(rows, x=args.plot_x or names[0], ys=ys, out_path=args.plot)
    failed = sum(1 for rec in records if rec.error is not None)
    if failed:
        print(f"warning: {failed} of {len(records)} sweep points failed "
              "(see the error column)", file=sys.stderr)
    return EXIT_OK if failed < len(records) else EXIT_FAILURE


def cmd_validate(args) -> int:
    config = _load_config(args)
    report = validation_battery(config.params)
    width = max(len(c.name) for c in report.checks)
    lines = []
    for check in report.checks:
        status = "PASS" if check.passed else "FAIL"
        lines.append(
            f"[{status}] {check.name:<{width}}  "
            f"measured={check.measured:.3e}  tolerance={check.tolerance:.1e}"
        )
    summary = "all checks passed" if report.all_passed else "CHECKS FAILED"
    text = "\n".join(lines) + f"\n{summary}\n"
    _write_output(text, config.output_path)
    return EXIT_OK if report.all_passed else EXIT_FAILURE


def cmd_plot(args) -> int:
    from .plotting import render_rows

    try:
        with open(args.table, "r", encoding="utf-8", newline="") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as exc:
        raise _IOFailure(f"cannot read {args.table!r}: {exc}") from exc
    if not rows:
        print("error: table has no data rows", file=sys.stderr)
        return EXIT_FAILURE
    x = args.x or list(rows[0].keys())[0]
    render_rows(rows, x=x, ys=args.y or ["fidelity"], out_path=args.output)
    return EXIT_OK


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key=value config file")
    parser.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override one config key (repeatable)")
    parser.add_argument("--output", help="write results to this path (default stdout)")
    parser.add_argument("--format", choices=("json", "csv"),
                        help="output format (default json)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="squidqed",
        description="Two driven SQUID qutrits in a thermal cavity: "
                    "pulse-sequence entanglement simulator.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run the protocol once and emit a record")
    _add_common(p_run)
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="run the protocol over a parameter grid")
    _add_common(p_sweep)
    p_sweep.add_argument("--grid", action="append", metavar="KEY=V1,V2,...",
                         help="sweep values for one parameter (repeatable)")
    p_sweep.add_argument("--plot", metavar="PATH",
                         help="also render a figure of the sweep to PATH")
    p_sweep.add_argument("--plot-x", help="x column for --plot (default: first grid key)")
    p_sweep.add_argument("--plot-y", action="append",
                         help="y column(s) for --plot (default: fidelity)")
    p_sweep.set_defaults(func=cmd_sweep)

    p_val = sub.add_parser("validate", help="run the built-in verification battery")
    _add_common(p_val)
    p_val.set_defaults(func=cmd_validate)

    p_plot = sub.add_parser("plot", help="render a figure from a sweep CSV")
    p_plot.add_argument("table", help="sweep CSV file")
    p_plot.add_argument("--output", required=True, help="figure output path (png/pdf)")
    p_plot.add_argument("--x", help="x column (default: first column)")
    p_plot.add_argument("--y", action="append", help="y column(s), repeatable")
    p_plot.set_defaults(func=cmd_plot)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except _IOFailure as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
