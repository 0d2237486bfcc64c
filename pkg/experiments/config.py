"""
Run configuration: defaults, flat key=value files and command-line flags.

Precedence is flags > config file > defaults. A config file looks like

    # fine-tuning settings
    sampler=hmc
    L=10
    jacobian=on
"""

import logging
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Union

from models.chain import CdConfig, HmcConfig, OptimizerKind, SamplerKind, StochModel
from models.errors import DataFormatError, StructureError
from models.mlp import Mlp

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RunConfig:
    """Every tunable setting of the harness, with its default."""

    sampler: SamplerKind = SamplerKind.HMC
    L: float = 10.0
    dt: float = 0.01
    leapfrog: int = 10
    k: int = 1
    burn_in: int = 50
    jacobian: bool = True
    lr: float = 1e-4
    optimizer: OptimizerKind = OptimizerKind.ADAM
    epochs: int = 20
    train_epochs: int = 100
    batch_size: int = 0
    var_floor: float = 1e-6
    n_samples: int = 1000
    bins: int = 10
    train_fraction: float = 0.8
    seed: int = 0

    def cd_config(self) -> CdConfig:
        return CdConfig(self.k, self.burn_in, self.lr, self.epochs, self.batch_size, self.optimizer)

    def hmc_config(self) -> HmcConfig:
        return HmcConfig(self.dt, self.leapfrog)

    def stoch_model(self, mlp: Mlp) -> StochModel:
        return StochModel(mlp, self.L, self.var_floor, self.jacobian)

    def with_values(self, values: Mapping[str, Any]) -> "RunConfig":
        """Copy with raw (string or typed) values parsed and applied."""
        return replace(self, **{key: parse_value(key, value) for key, value in values.items()})

    def as_text(self) -> str:
        """key=value lines, the format load_config reads."""
        lines = []
        for key, value in asdict(self).items():
            lines.append(f"{key}={format_value(value)}")
        return "\n".join(lines) + "\n"


_TYPES = {f.name: f.type for f in fields(RunConfig)}


def format_value(value: Any) -> str:
    if isinstance(value, bool):
        return "on" if value else "off"
    if isinstance(value, (SamplerKind, OptimizerKind)):
        return value.value
    return str(value)


def parse_value(key: str, value: Any) -> Any:
    """
    Convert a raw value for `key` to its typed form.

    Raises:
        StructureError: Unknown key or a value that does not parse
    """
    if key not in _TYPES:
        raise StructureError(f"unknown config key '{key}'")
    kind = _TYPES[key]
    if not isinstance(value, str):
        return kind(value) if kind in (SamplerKind, OptimizerKind) else value
    text = value.strip()
    try:
        if kind is bool:
            if text.lower() in ("on", "true", "1", "yes"):
                return True
            if text.lower() in ("off", "false", "0", "no"):
                return False
            raise ValueError(text)
        if kind is int:
            return int(text)
        if kind is float:
            return float(text)
        return kind(text.lower())
    except ValueError:
        raise StructureError(f"bad value '{text}' for config key '{key}'")


def load_config(path: Union[str, Path]) -> Dict[str, Any]:
    """
    Parse a key=value config file into typed values.

    Raises:
        IOError: If the file cannot be read
        DataFormatError: Malformed line, unknown key or bad value, with its line number
    """
    try:
        with open(path) as f:
            lines = f.read().splitlines()
    except (IOError, OSError) as e:
        raise IOError(f"Failed to read {path}: {str(e)}")
    values: Dict[str, Any] = {}
    for number, line in enumerate(lines, start=1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        if "=" not in text:
            raise DataFormatError(str(path), number, "expected key=value")
        key, raw = (part.strip() for part in text.split("=", 1))
        try:
            values[key] = parse_value(key, raw)
        except StructureError as e:
            raise DataFormatError(str(path), number, str(e))
    return values


def resolve_config(config_path: Optional[Union[str, Path]] = None,
                   flags: Optional[Mapping[str, Any]] = None) -> RunConfig:
    """Defaults, overridden by the file, overridden by non-None flags."""
    config = RunConfig()
    if config_path:
        config = config.with_values(load_config(config_path))
        logger.info("loaded config from %s", config_path)
    overrides = {key: value for key, value in (flags or {}).items() if value is not None}
    return config.with_values(overrides)
