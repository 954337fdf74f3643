"""Flat dotted-key run configuration.

The format is deliberately plain: one ``key = value`` pair per line, ``#``
comments, no sections.  Example::

    seed = 7
    input.a = 0.6
    input.b = 0.8
    alice.gamma = 0.05
    detector.eta = 0.9

Unknown keys are an error (named in the message), as are missing required
keys and unparseable values.  ``input.a`` and ``input.b`` accept complex
literals ("0.8j", "0.6+0.0j").
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .adiabatic import PULSE_SHAPES, PulseSchedule, Side, SystemParams
from .cloner import InputQubit
from .protocol import (
    MATCHED_DRIVE_RATIO,
    DetectorParams,
    Mode,
    NodeConfig,
    ProtocolConfig,
)

__all__ = [
    "ConfigError",
    "RunSettings",
    "KEY_TABLE",
    "REQUIRED_KEYS",
    "values_from_text",
    "parse_config_text",
    "load_config",
    "settings_from_values",
    "example_config_text",
]


class ConfigError(ValueError):
    """Malformed, unknown, or missing configuration input."""


def _parse_int(s: str) -> int:
    return int(s, 0)


def _parse_float(s: str) -> float:
    v = float(s)
    if not math.isfinite(v):
        raise ValueError("value must be finite")
    return v


def _parse_complex(s: str) -> complex:
    v = complex(s.replace(" ", ""))
    if not (math.isfinite(v.real) and math.isfinite(v.imag)):
        raise ValueError("value must be finite")
    return v


def _parse_shape(s: str) -> str:
    if s not in PULSE_SHAPES:
        raise ValueError(f"expected one of {PULSE_SHAPES}")
    return s


def _node_keys(prefix: str, omega_max_default: float) -> dict:
    return {
        f"{prefix}.g": (_parse_float, 1.0),
        f"{prefix}.kappa": (_parse_float, 1.0),
        f"{prefix}.gamma": (_parse_float, 0.1),
        f"{prefix}.delta": (_parse_float, 0.0),
        f"{prefix}.epsilon": (_parse_float, 0.0),
        f"{prefix}.nu": (_parse_float, 0.0),
        f"{prefix}.omega_max": (_parse_float, omega_max_default),
        f"{prefix}.t_total": (_parse_float, 200.0),
        f"{prefix}.hold_fraction": (_parse_float, 0.25),
        f"{prefix}.shape": (_parse_shape, "sin2"),
    }


# key -> (parser, default); None default marks a required key.
# bob's drive default is sqrt(2) x alice's so the two emitted envelopes match.
KEY_TABLE: dict = {
    "seed": (_parse_int, None),
    "input.a": (_parse_complex, None),
    "input.b": (_parse_complex, None),
    "dt": (_parse_float, 0.05),
    "emission_floor": (_parse_float, 0.5),
    **_node_keys("alice", 20.0),
    **_node_keys("bob", 20.0 * MATCHED_DRIVE_RATIO),
    "detector.eta": (_parse_float, 1.0),
    "detector.dark_rate": (_parse_float, 0.0),
    "detector.window": (_parse_float, 10.0),
    "detector.mc_trials": (_parse_int, 0),
    "adiabaticity.max_excited": (_parse_float, 0.1),
}

REQUIRED_KEYS = tuple(k for k, (_, d) in KEY_TABLE.items() if d is None)


@dataclass(frozen=True)
class RunSettings:
    """Parsed configuration: the protocol config plus CLI-level knobs."""

    config: ProtocolConfig
    max_excited: float
    resolved: dict   # every key -> parsed value (JSON-friendly), for manifests
    input_norm_sq: float = 1.0   # |a|^2+|b|^2 of the raw values, before renormalizing


def _json_value(v):
    if isinstance(v, complex):
        return [v.real, v.imag]
    return v


def settings_from_values(values: dict, mode: Mode | str = Mode.ANALYTIC) -> RunSettings:
    """Build settings from raw string values keyed by dotted names.

    Unknown keys raise; absent optional keys take their defaults; required
    keys (seed, input.a, input.b) must be present.
    """
    unknown = sorted(set(values) - set(KEY_TABLE))
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")

    parsed = {}
    for key, (parser, default) in KEY_TABLE.items():
        if key in values:
            raw = values[key]
            try:
                parsed[key] = parser(raw) if isinstance(raw, str) else parser(str(raw))
            except ValueError as exc:
                raise ConfigError(f"bad value for {key!r}: {raw!r} ({exc})") from None
        else:
            parsed[key] = default

    missing = sorted(k for k in REQUIRED_KEYS if parsed[k] is None)
    if missing:
        raise ConfigError(f"missing required config key(s): {', '.join(missing)}")

    def node(prefix: str, side: Side) -> NodeConfig:
        return NodeConfig(
            SystemParams(
                side=side,
                g=parsed[f"{prefix}.g"],
                kappa=parsed[f"{prefix}.kappa"],
                gamma=parsed[f"{prefix}.gamma"],
                delta=parsed[f"{prefix}.delta"],
                epsilon=parsed[f"{prefix}.epsilon"],
                nu=parsed[f"{prefix}.nu"],
            ),
            PulseSchedule(
                omega_max=parsed[f"{prefix}.omega_max"],
                t_total=parsed[f"{prefix}.t_total"],
                hold_fraction=parsed[f"{prefix}.hold_fraction"],
                shape=parsed[f"{prefix}.shape"],
            ),
        )

    try:
        cfg = ProtocolConfig(
            input=InputQubit.normalized(parsed["input.a"], parsed["input.b"]),
            alice=node("alice", Side.ALICE),
            bob=node("bob", Side.BOB),
            mode=Mode(mode),
            detector=DetectorParams(
                eta=parsed["detector.eta"],
                dark_rate=parsed["detector.dark_rate"],
                window=parsed["detector.window"],
            ),
            seed=parsed["seed"],
            dt=parsed["dt"],
            emission_floor=parsed["emission_floor"],
            mc_trials=parsed["detector.mc_trials"],
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    raw_norm_sq = abs(parsed["input.a"]) ** 2 + abs(parsed["input.b"]) ** 2
    return RunSettings(
        config=cfg,
        max_excited=parsed["adiabaticity.max_excited"],
        resolved={k: _json_value(parsed[k]) for k in sorted(parsed)},
        input_norm_sq=raw_norm_sq,
    )


def values_from_text(text: str) -> dict:
    """Raw key -> string-value pairs from config text; syntax checks only."""
    values: dict = {}
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw_line!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not key or not value:
            raise ConfigError(f"line {lineno}: empty key or value in {raw_line!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        values[key] = value
    return values


def parse_config_text(text: str, mode: Mode | str = Mode.DYNAMIC) -> RunSettings:
    return settings_from_values(values_from_text(text), mode)


def load_config(path: str, mode: Mode | str = Mode.DYNAMIC) -> RunSettings:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from None
    return parse_config_text(text, mode)


def example_config_text() -> str:
    """A complete config with every key at its default (required ones filled)."""
    lines = [
        "# protocol run configuration: every optional key shown at its default",
        "seed = 1",
        "input.a = 0.6",
        "input.b = 0.8",
    ]
    for key, (_, default) in KEY_TABLE.items():
        if default is None:
            continue
        if isinstance(default, float):
            lines.append(f"{key} = {default!r}")
        else:
            lines.append(f"{key} = {default}")
    return "\n".join(lines) + "\n"
