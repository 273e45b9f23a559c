"""Flat ``key = value`` configuration files and sweep range strings."""

from dataclasses import fields, replace

from .experiment import ExperimentConfig
from .params import SystemParams


class ConfigError(ValueError):
    pass


_PARAM_TYPES = {f.name: f.type for f in fields(SystemParams)}
_EXP_TYPES = {f.name: f.type for f in fields(ExperimentConfig) if f.name != "params"}


def parse_sweep(text):
    """``"n=10:10:50"`` -> ``("n", (10, 20, 30, 40, 50))``.

    The range is ``start:step:stop`` with ``stop`` included; a comma list
    (``"d=150,290"``) is also accepted.
    """
    axis, sep, rhs = text.partition("=")
    axis = axis.strip().lower()
    if not sep or axis not in ("n", "d"):
        raise ConfigError(f"bad sweep {text!r}; expected n=START:STEP:STOP or d=START:STEP:STOP")
    return axis, parse_values(rhs, integer=axis == "n")


def parse_values(text, integer=False):
    cast = int if integer else float
    text = text.strip()
    try:
        if ":" in text:
            start, step, stop = (float(x) for x in text.split(":"))
            if step <= 0 or stop < start:
                raise ConfigError(f"empty sweep range {text!r}")
            count = int(round((stop - start) / step)) + 1
            values = [round(start + i * step, 9) for i in range(count)]
        else:
            values = [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad sweep values {text!r}") from None
    if integer and any(v != int(v) for v in values):
        raise ConfigError(f"element counts must be integers: {text!r}")
    return tuple(cast(v) for v in values)


def _convert(key, raw, typ):
    if typ is bool:
        return raw.lower() in ("1", "true", "yes")
    if typ is tuple:
        return raw
    try:
        return typ(float(raw)) if typ is int else typ(raw)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {raw!r} as {typ.__name__}") from None


def read_config_file(path):
    """Parse ``path`` into a dict; ``#`` starts a comment."""
    values = {}
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    for lineno, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, raw = line.partition("=")
        key, raw = key.strip(), raw.strip()
        if not sep or not key:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        if key not in _PARAM_TYPES and key not in _EXP_TYPES:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        values[key] = raw
    return values


def build_config(values, **overrides):
    """ExperimentConfig from raw string ``values`` plus typed ``overrides``."""
    params = {k: _convert(k, v, _PARAM_TYPES[k]) for k, v in values.items() if k in _PARAM_TYPES}
    exp = {k: _convert(k, v, _EXP_TYPES[k]) for k, v in values.items() if k in _EXP_TYPES}
    exp.update({k: v for k, v in overrides.items() if v is not None})
    axis = exp.get("sweep_axis", "n")
    if isinstance(exp.get("sweep_values"), str):
        exp["sweep_values"] = parse_values(exp["sweep_values"], integer=axis == "n")
    try:
        cfg = ExperimentConfig(params=SystemParams(**params), **exp)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    return cfg


def load_config(path, **overrides):
    return build_config(read_config_file(path), **overrides)


def with_params(cfg, **changes):
    return replace(cfg, params=replace(cfg.params, **changes))
