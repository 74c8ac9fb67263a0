"""Run configuration: one experiment per TOML file, validated before any work.

Layout::

    experiment = "mlr-sweep"      # optional; must match the subcommand
    output = "sweep.csv"
    seed = 0                      # reserved, everything is deterministic
    tolerance = 1e-3              # verify: allowed drift under doubling

    [parameters]
    r0 = 1.1
    alpha = [2.0, 4.0]
    delta = [0.0, 0.5, 1.0]

Angles are in radians.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

EXPERIMENTS = ("typeone", "noon", "svetlichny", "mlr-chsh", "mlr-sweep")
TOP_LEVEL = {"experiment", "output", "seed", "tolerance", "parameters"}


class ConfigError(ValueError):
    def __init__(self, key: str, message: str):
        super().__init__(f"invalid config key '{key}': {message}")
        self.key = key


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _is_real(v) -> bool:
    return (isinstance(v, (int, float)) and not isinstance(v, bool)) and math.isfinite(v)


def _int_list(key, v, lo, hi=None):
    items = v if isinstance(v, list) else [v]
    if not items:
        raise ConfigError(key, "must not be empty")
    for x in items:
        if not _is_int(x):
            raise ConfigError(key, f"expected integers, got {x!r}")
        if x < lo or (hi is not None and x > hi):
            raise ConfigError(key, f"{x} outside [{lo}, {hi if hi is not None else 'inf'}]")
    return [int(x) for x in items]


def _real_list(key, v, lo, strict=False):
    items = v if isinstance(v, list) else [v]
    if not items:
        raise ConfigError(key, "must not be empty")
    for x in items:
        if not _is_real(x):
            raise ConfigError(key, f"expected finite numbers, got {x!r}")
        if x < lo or (strict and x == lo):
            raise ConfigError(key, f"{x} must be {'>' if strict else '>='} {lo}")
    return [float(x) for x in items]


def _int(key, v, lo, hi=None):
    if isinstance(v, list):
        raise ConfigError(key, "expected a single integer")
    return _int_list(key, v, lo, hi)[0]


def _phase(key, v):
    items = v if isinstance(v, list) else [v]
    out = []
    for x in items:
        if x == "optimal":
            out.append(x)
        elif _is_real(x):
            out.append(float(x))
        else:
            raise ConfigError(key, f"expected radians or \"optimal\", got {x!r}")
    return out


def _angles(key, v):
    if v == "optimize":
        return v
    if isinstance(v, list) and len(v) == 4 and all(_is_real(x) for x in v):
        return [float(x) for x in v]
    raise ConfigError(key, 'expected "optimize" or [theta, theta_p, phi, phi_p] in radians')


# per experiment: key -> (parser, default)
SCHEMAS = {
    "typeone": {
        "N": (lambda k, v: _int_list(k, v, 1, 40), None),
        "phase": (_phase, ["optimal"]),
        "cutoff": (lambda k, v: _int(k, v, 1, 200), None),
        "headroom": (lambda k, v: _int(k, v, 0, 400), None),
    },
    "noon": {
        "N": (lambda k, v: _int_list(k, v, 1, 20), None),
        "cutoff": (lambda k, v: _int(k, v, 1, 60), None),
    },
    "svetlichny": {
        "N": (lambda k, v: _int_list(k, v, 2, 60), None),
        "k": (lambda k, v: _int_list(k, v, 1, 59), None),
    },
    "mlr-chsh": {
        "r0": (lambda k, v: _real_list(k, v, 0.0, strict=True), [1.1]),
        "alpha": (lambda k, v: _real_list(k, v, 0.0), [0.0]),
        "cutoff": (lambda k, v: _int(k, v, 1, 120), 16),
        "ancilla_cutoff": (lambda k, v: _int(k, v, 1, 1000), None),
        "resolution": (lambda k, v: _int(k, v, 4, 512), 64),
        "angles": (_angles, "optimize"),
    },
    "mlr-sweep": {
        "r0": (lambda k, v: _real_list(k, v, 0.0, strict=True), [1.1]),
        "alpha": (lambda k, v: _real_list(k, v, 0.0), [0.0]),
        "delta": (lambda k, v: _real_list(k, v, 0.0), [0.0]),
        "cutoff": (lambda k, v: _int(k, v, 1, 120), 16),
        "ancilla_cutoff": (lambda k, v: _int(k, v, 1, 1000), None),
        "resolution": (lambda k, v: _int(k, v, 4, 512), 64),
        "angles": (_angles, "optimize"),
    },
}
REQUIRED = {"typeone": {"N"}, "noon": {"N"}, "svetlichny": {"N"}}


@dataclass(frozen=True)
class RunConfig:
    experiment: str
    parameters: dict = field(default_factory=dict)
    output: str | None = None
    seed: int = 0
    tolerance: float = 1e-3

    @classmethod
    def from_mapping(cls, raw: dict, experiment: str | None = None) -> "RunConfig":
        for key in raw:
            if key not in TOP_LEVEL:
                raise ConfigError(key, "unknown key")
        exp = raw.get("experiment", experiment)
        if exp not in EXPERIMENTS:
            raise ConfigError("experiment", f"must be one of {', '.join(EXPERIMENTS)}")
        if experiment is not None and exp != experiment:
            raise ConfigError("experiment", f"file is for '{exp}' but the command is '{experiment}'")
        seed = raw.get("seed", 0)
        if not _is_int(seed):
            raise ConfigError("seed", "expected an integer")
        tol = raw.get("tolerance", 1e-3)
        if not _is_real(tol) or tol <= 0:
            raise ConfigError("tolerance", "expected a positive number")
        output = raw.get("output")
        if output is not None and not isinstance(output, str):
            raise ConfigError("output", "expected a path string")
        params_raw = raw.get("parameters", {})
        if not isinstance(params_raw, dict):
            raise ConfigError("parameters", "expected a table")
        schema = SCHEMAS[exp]
        params = {}
        for key, value in params_raw.items():
            if key not in schema:
                raise ConfigError(f"parameters.{key}", f"unknown key for experiment '{exp}'")
            params[key] = schema[key][0](f"parameters.{key}", value)
        for key in REQUIRED.get(exp, ()):
            if key not in params:
                raise ConfigError(f"parameters.{key}", "required")
        for key, (_, default) in schema.items():
            params.setdefault(key, default)
        _cross_check(exp, params)
        return cls(exp, params, output, int(seed), float(tol))

    @classmethod
    def load(cls, path, experiment: str | None = None) -> "RunConfig":
        try:
            raw = tomllib.loads(Path(path).read_text())
        except OSError as exc:
            raise ConfigError("--config", str(exc)) from None
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError("--config", f"not valid TOML: {exc}") from None
        return cls.from_mapping(raw, experiment)

    def doubled(self) -> "RunConfig":
        """Same run with every cutoff and grid parameter doubled."""
        p = dict(self.parameters)
        for key in ("cutoff", "ancilla_cutoff", "resolution", "headroom"):
            if p.get(key) is not None:
                p[key] = 2 * p[key]
        if self.experiment in ("mlr-chsh", "mlr-sweep"):
            # the per-alpha default ancilla cutoff is scaled instead
            p["ancilla_factor"] = 2 * p.get("ancilla_factor", 1)
        if self.experiment == "typeone":
            p["headroom_factor"] = 2 * p.get("headroom_factor", 1)
        if self.experiment in ("typeone", "noon") and p.get("cutoff") is None:
            p["cutoff"] = 2 * max(p["N"])
        return RunConfig(self.experiment, p, self.output, self.seed, self.tolerance)


def _cross_check(exp: str, p: dict) -> None:
    if exp in ("typeone", "noon") and p["cutoff"] is not None and p["cutoff"] < max(p["N"]):
        raise ConfigError("parameters.cutoff", f"cutoff={p['cutoff']} is below N={max(p['N'])}")
    if exp == "svetlichny" and p["k"] is not None:
        for N in p["N"]:
            for k in p["k"]:
                if not 1 <= k <= N - 1:
                    raise ConfigError("parameters.k", f"k={k} outside 1..{N - 1} for N={N}")
