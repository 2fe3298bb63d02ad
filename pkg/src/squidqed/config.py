"""Flat key-value run configuration: parsing, validation, echo.

Schema (all keys optional; defaults in DEFAULTS):

    g                  coupling strength, frequency unit (float > 0)
    delta              detuning in units of g (float > 0)
    k                  window-1 timing multiplier (int >= 1;
                       default ceil(5 * delta^2 / g^2), which pins the
                       window-1 drive at 2*Omega/delta >= 10)
    k_prime            window-2 timing multiplier (int >= 1)
    nbar               mean thermal photon number (float >= 0)
    n_max              Fock cutoff (int >= 2)
    model              effective | full
    mode               as-published | physical-pulse
    dt_initial         integrator starting step (float > 0)
    tolerance          integrator endpoint-infidelity tolerance (float > 0)
    output_path        where to write the result record (default stdout)
    output_format      json | csv
    drive_on_window2   true | false (keep the drive on in window 2)
    phase_optimized    true | false (also report phase-optimized fidelity)

Config files are plain text, one `key = value` per line; `#` starts a
comment.  Unknown keys are rejected, never ignored: a silently dropped
typo in a physics config produces wrong science.
"""

from __future__ import annotations

from dataclasses import dataclass

from .dynamics import IntegratorConfig
from .hamiltonians import SystemParams
from .protocol import MODELS, MODES


class ConfigError(ValueError):
    """Malformed, unknown or invariant-violating configuration input."""


DEFAULTS: dict[str, str] = {
    "g": "1.0",
    "delta": "15.0",
    "k": "",                 # empty -> ceil(5 * delta^2 / g^2)
    "k_prime": "1",
    "nbar": "0.0",
    "n_max": "8",
    "model": "effective",
    "mode": "as-published",
    "dt_initial": "0.02",
    "tolerance": "1e-08",
    "output_path": "",
    "output_format": "json",
    "drive_on_window2": "true",
    "phase_optimized": "false",
}

OUTPUT_FORMATS = ("json", "csv")


@dataclass(frozen=True)
class RunConfig:
    params: SystemParams
    model: str
    mode: str
    integrator: IntegratorConfig
    output_path: str | None
    output_format: str
    drive_on_window2: bool
    phase_optimized: bool


def _parse_bool(key: str, raw: str) -> bool:
    low = raw.strip().lower()
    if low in ("true", "1", "yes", "on"):
        return True
    if low in ("false", "0", "no", "off"):
        return False
    raise ConfigError(f"key {key!r}: expected a boolean, got {raw!r}")


def _parse_float(key: str, raw: str) -> float:
    try:
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"key {key!r}: expected a number, got {raw!r}") from exc


def _parse_int(key: str, raw: str) -> int:
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"key {key!r}: expected an integer, got {raw!r}") from exc


def parse_keyvalue_text(text: str) -> dict[str, str]:
    """Parse `key = value` lines into a dict, rejecting unknown keys."""
    out: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, _, value = stripped.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in DEFAULTS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def build_config(entries: dict[str, str]) -> RunConfig:
    """Validate entries against the schema and construct a RunConfig."""
    for key in entries:
        if key not in DEFAULTS:
            raise ConfigError(f"unknown key {key!r}")
    merged = dict(DEFAULTS)
    merged.update({k: v for k, v in entries.items() if v != ""})

    model = merged["model"].strip()
    if model not in MODELS:
        raise ConfigError(f"key 'model': expected one of {MODELS}, got {model!r}")
    mode = merged["mode"].strip()
    if mode not in MODES:
        raise ConfigError(f"key 'mode': expected one of {MODES}, got {mode!r}")
    fmt = merged["output_format"].strip()
    if fmt not in OUTPUT_FORMATS:
        raise ConfigError(
            f"key 'output_format': expected one of {OUTPUT_FORMATS}, got {fmt!r}"
        )

    k_raw = merged["k"].strip()
    try:
        params = SystemParams(
            g=_parse_float("g", merged["g"]),
            delta=_parse_float("delta", merged["delta"]),
            k=_parse_int("k", k_raw) if k_raw else None,
            k_prime=_parse_int("k_prime", merged["k_prime"]),
            nbar=_parse_float("nbar", merged["nbar"]),
            n_max=_parse_int("n_max", merged["n_max"]),
        )
        integrator = IntegratorConfig(
            dt_initial=_parse_float("dt_initial", merged["dt_initial"]),
            tolerance=_parse_float("tolerance", merged["tolerance"]),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    return RunConfig(
        params=params,
        model=model,
        mode=mode,
        integrator=integrator,
        output_path=merged["output_path"] or None,
        output_format=fmt,
        drive_on_window2=_parse_bool("drive_on_window2", merged["drive_on_window2"]),
        phase_optimized=_parse_bool("phase_optimized", merged["phase_optimized"]),
    )


def parse_config(text: str) -> RunConfig:
    """Parse a config document; empty text yields all defaults."""
    return build_config(parse_keyvalue_text(text))


def config_echo(config: RunConfig) -> dict[str, str]:
    """Flat key-value image of a config; parse_config on it round-trips."""
    p = config.params
    return {
        "g": repr(p.g),
        "delta": repr(p.delta),
        "k": str(p.k),
        "k_prime": str(p.k_prime),
        "nbar": repr(p.nbar),
        "n_max": str(p.n_max),
        "model": config.model,
        "mode": config.mode,
        "dt_initial": repr(config.integrator.dt_initial),
        "tolerance": repr(config.integrator.tolerance),
        "output_path": config.output_path or "",
        "output_format": config.output_format,
        "drive_on_window2": "true" if config.drive_on_window2 else "false",
        "phase_optimized": "true" if config.phase_optimized else "false",
    }
