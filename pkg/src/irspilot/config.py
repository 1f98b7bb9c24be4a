"""Flat ``key = value`` experiment configuration."""

from dataclasses import dataclass, field, fields, replace

from .channel_model import GeometryConfig, SystemDims


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    dims: SystemDims = field(default_factory=lambda: SystemDims(K=8, M=64, N=32))
    geo: GeometryConfig = field(default_factory=GeometryConfig)
    seed: int = 0
    trials: int = 100
    noise_variance: float = 0.0
    output_path: str = None

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if self.noise_variance < 0:
            raise ConfigError("noise_variance must be non-negative")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must fit in an unsigned 64-bit integer")


_DIM_KEYS = ("K", "M", "N")
_GEO_KEYS = {f.name: f.type for f in fields(GeometryConfig)}
_TOP_KEYS = {"seed": int, "trials": int, "noise_variance": float, "output_path": str}


def _convert(key, text, lineno):
    if key in _DIM_KEYS or _TOP_KEYS.get(key) is int:
        conv = int
    elif key in _TOP_KEYS:
        conv = _TOP_KEYS[key]
    else:
        conv = float
    try:
        return conv(text)
    except ValueError:
        raise ConfigError(f"line {lineno}: bad value for {key}: {text!r}") from None


def parse_config(text):
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _DIM_KEYS and key not in _GEO_KEYS and key not in _TOP_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        values[key] = _convert(key, value, lineno)
    return build_config(values)


def build_config(values, base=None):
    """Overlay ``values`` (a flat dict) onto ``base`` or the defaults."""
    base = base or ExperimentConfig()
    try:
        dims = SystemDims(**{k: values.get(k, getattr(base.dims, k)) for k in _DIM_KEYS})
        geo = replace(base.geo, **{k: v for k, v in values.items() if k in _GEO_KEYS})
        top = {k: v for k, v in values.items() if k in _TOP_KEYS}
        return replace(base, dims=dims, geo=geo, **top)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
