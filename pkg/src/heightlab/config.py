"""Run configuration: precision, search bounds, and diagnostic envelopes.

Settings come from three layers with increasing priority: built-in
defaults, a key=value config file, and command-line flags.  The file
format is one `key = value` pair per line; blank lines and lines starting
with `#` are ignored.
"""

from dataclasses import dataclass, fields, replace

from .errors import InputError, ParseError

__all__ = ["Config", "load_config_file", "build_config"]


@dataclass(frozen=True)
class Config:
    precision: int = 50
    factor_bound: int = 10**6
    denominator_bound: int = 24
    additivity_envelope: float = 5.0
    seed: int = 0

    def __post_init__(self):
        if not isinstance(self.precision, int) or self.precision < 10:
            raise InputError("precision must be an integer of at least 10")
        for name in ("factor_bound", "denominator_bound"):
            value = getattr(self, name)
            if not isinstance(value, int) or value <= 0:
                raise InputError(f"{name} must be a positive integer")
        if self.additivity_envelope <= 0:
            raise InputError("additivity_envelope must be positive")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise InputError("seed must be a nonnegative integer")


_FIELD_TYPES = {f.name: f.type for f in fields(Config)}


def _coerce(key: str, raw: str):
    if key == "additivity_envelope":
        try:
            return float(raw)
        except ValueError as exc:
            raise ParseError(f"config value for {key} is not a number: {raw!r}") from exc
    try:
        return int(raw)
    except ValueError as exc:
        raise ParseError(f"config value for {key} is not an integer: {raw!r}") from exc


def load_config_file(path) -> dict:
    """Parse a key=value file into an override mapping."""
    try:
        with open(path, encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        raise ParseError(f"cannot read config file {path}: {exc}") from exc
    overrides = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ParseError(f"{path}:{lineno}: expected key = value")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        if key not in _FIELD_TYPES:
            raise ParseError(f"{path}:{lineno}: unknown config key {key!r}")
        overrides[key] = _coerce(key, raw.strip())
    return overrides


def build_config(config_path=None, **flag_overrides) -> Config:
    """Defaults, then the config file, then explicit flags."""
    config = Config()
    if config_path is not None:
        config = replace(config, **load_config_file(config_path))
    given = {k: v for k, v in flag_overrides.items() if v is not None}
    for key in given:
        if key not in _FIELD_TYPES:
            raise InputError(f"unknown config field {key!r}")
    if given:
        config = replace(config, **given)
    return config
