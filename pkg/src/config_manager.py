# src/config_manager.py

"""
Configuration Manager
---------------------
Loads `configs/config.yaml` and the per-problem profiles in `configs/problems/`,
and resolves the settings of one run by deep-merging, in order:

    general defaults → problem profile → its `paper_scale` block (if requested)
    → user config file → command-line flags

The merged mapping is validated into a `RunConfig`.
"""

import dataclasses
import typing
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Union

import yaml

from .custom_logger import deep_merge, log
from .errors import ArgumentError, ConfigError
from .optimizer import LBFGSConfig
from .problems import PROBLEM_IDS, is_discrete
from .problems import allen_cahn, burgers, schrodinger
from .refsolve import SpectralConfig

REFERENCE_KEYS = {
    "burgers-ct": set(burgers.REFERENCE_DEFAULTS),
    "burgers-dt": set(burgers.REFERENCE_DEFAULTS),
    "nls-ct": set(schrodinger.REFERENCE_DEFAULTS),
    "allen-cahn-dt": set(allen_cahn.REFERENCE_DEFAULTS),
}
SPECTRAL_DEFAULTS = {
    "nls-ct": schrodinger.REFERENCE_DEFAULTS,
    "allen-cahn-dt": allen_cahn.REFERENCE_DEFAULTS,
}

PAPER_SCALE_KEY = "paper_scale"


@dataclass
class NetworkSettings:
    hidden_layers: int = 4
    hidden_width: int = 20

    def __post_init__(self) -> None:
        if self.hidden_layers < 1 or self.hidden_width < 1:
            raise ConfigError("network.hidden_layers and network.hidden_width must be >= 1")


@dataclass
class DataSettings:
    n_u: int = 0
    n_f: int = 0
    n_0: int = 0
    n_b: int = 0
    n_n: int = 0
    noise: float = 0.0
    ic_fraction: float = 0.5

    def __post_init__(self) -> None:
        for name in ("n_u", "n_f", "n_0", "n_b", "n_n"):
            if getattr(self, name) < 0:
                raise ConfigError(f"data.{name} must be >= 0, got {getattr(self, name)}")
        if self.noise < 0.0:
            raise ConfigError(f"data.noise must be >= 0, got {self.noise}")
        if not 0.0 <= self.ic_fraction <= 1.0:
            raise ConfigError(f"data.ic_fraction must lie in [0, 1], got {self.ic_fraction}")

    def counts(self) -> Dict[str, int]:
        return {"n_u": self.n_u, "n_f": self.n_f, "n_0": self.n_0, "n_b": self.n_b, "n_n": self.n_n}


@dataclass
class SteppingSettings:
    """Discrete-time step: q Gauss–Legendre stages, step dt from the snapshot at t_start."""

    q: int = 100
    dt: float = 0.8
    t_start: float = 0.1
    steps: int = 1
    precision_bits: Optional[int] = None

    def __post_init__(self) -> None:
        if self.q < 1:
            raise ConfigError(f"stepping.q must be >= 1, got {self.q}")
        if not self.dt > 0.0:
            raise ConfigError(f"stepping.dt must be > 0, got {self.dt}")
        if self.t_start < 0.0:
            raise ConfigError(f"stepping.t_start must be >= 0, got {self.t_start}")
        if self.steps < 1:
            raise ConfigError(f"stepping.steps must be >= 1, got {self.steps}")
        if self.precision_bits is not None and self.precision_bits < 64:
            raise ConfigError(f"stepping.precision_bits must be >= 64, got {self.precision_bits}")


@dataclass
class RunConfig:
    """
    Fully resolved settings of one benchmark run.

    Attributes:
        problem (str): One of burgers-ct, nls-ct, burgers-dt, allen-cahn-dt.
        seed (int): Seeds the network initialization and (offset) the data sampling.
        output_directory (str): Where grids, summaries and checkpoints are written.
        cache_directory (Optional[str]): Tableau/reference cache; None disables caching.
        workers (int): Threads for loss evaluation.
        chunk_size (int): Lanes per graph evaluation.
        network, data, stepping, optimizer: Nested settings.
        reference (Dict[str, Any]): Reference-solver settings, keys depend on the problem.
    """

    problem: str
    seed: int = 1234
    output_directory: str = "results"
    cache_directory: Optional[str] = "cache"
    workers: int = 1
    chunk_size: int = 2048
    network: NetworkSettings = field(default_factory=NetworkSettings)
    data: DataSettings = field(default_factory=DataSettings)
    stepping: SteppingSettings = field(default_factory=SteppingSettings)
    optimizer: LBFGSConfig = field(default_factory=LBFGSConfig)
    reference: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.problem not in PROBLEM_IDS:
            raise ConfigError(f"unknown problem '{self.problem}'; choose one of {', '.join(PROBLEM_IDS)}")
        if self.seed < 0:
            raise ConfigError(f"seed must be >= 0, got {self.seed}")
        if self.workers < 1 or self.chunk_size < 1:
            raise ConfigError("workers and chunk_size must be >= 1")
        unknown = set(self.reference) - REFERENCE_KEYS[self.problem]
        if unknown:
            raise ConfigError(f"unknown reference settings for {self.problem}: {sorted(unknown)}")
        if self.problem in SPECTRAL_DEFAULTS:
            try:
                SpectralConfig(**{**SPECTRAL_DEFAULTS[self.problem], **self.reference})
            except (ArgumentError, TypeError) as e:
                raise ConfigError(f"invalid reference settings for {self.problem}: {e}") from e
        if self.discrete and self.data.n_n < 1:
            raise ConfigError(f"{self.problem} needs data.n_n >= 1")
        if self.problem == "nls-ct" and (self.data.n_0 < 1 or self.data.n_b < 1):
            raise ConfigError("nls-ct needs data.n_0 >= 1 and data.n_b >= 1")
        if self.problem == "burgers-ct" and self.data.n_u + self.data.n_f == 0:
            raise ConfigError("burgers-ct needs data.n_u or data.n_f > 0")

    @property
    def discrete(self) -> bool:
        return is_discrete(self.problem)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "RunConfig":
        """
        Validates a merged configuration mapping.

        Raises:
            ConfigError: Unknown keys, wrong types or violated invariants.
        """
        try:
            return _build(cls, data, "")
        except ArgumentError as e:
            raise ConfigError(str(e)) from e

    def to_dict(self) -> Dict[str, Any]:
        return dataclasses.asdict(self)


def _build(cls, data: Any, section: str):
    if not isinstance(data, Mapping):
        raise ConfigError(f"'{section or 'config'}' must be a mapping, got {type(data).__name__}")
    hints = typing.get_type_hints(cls)
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(data) - names
    if unknown:
        raise ConfigError(f"unknown keys in '{section or 'config'}': {sorted(unknown)}")
    values = {name: _coerce(hints[name], value, f"{section}{name}") for name, value in data.items()}
    return cls(**values)


def _coerce(kind: Any, value: Any, key: str) -> Any:
    if dataclasses.is_dataclass(kind):
        return _build(kind, value, f"{key}.")
    origin = typing.get_origin(kind)
    if origin is Union:
        options = [arg for arg in typing.get_args(kind) if arg is not type(None)]
        if value is None:
            return None
        return _coerce(options[0], value, key)
    if origin in (dict, Dict):
        if not isinstance(value, Mapping):
            raise ConfigError(f"'{key}' must be a mapping")
        return dict(value)
    if kind is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"'{key}' must be true or false, got {value!r}")
        return value
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"'{key}' must be an integer, got {value!r}")
        return value
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"'{key}' must be a number, got {value!r}")
        return float(value)
    if kind is str:
        if not isinstance(value, str):
            raise ConfigError(f"'{key}' must be a string, got {value!r}")
        return value
    return value


class ConfigManager:
    """
    Manages loading and accessing the general configuration and the problem profiles.
    """

    def __init__(self, config_path: str = "configs/config.yaml", problems_dir: str = "configs/problems") -> None:
        """
        Args:
            config_path (str): Path to the general configuration YAML file.
            problems_dir (str): Directory holding one `<problem-id>.yaml` profile per benchmark.
        """
        self.general_config = self.load_yaml(config_path)
        self.problems_dir = Path(problems_dir)
        self.problem_profiles: Dict[str, Dict[str, Any]] = {}
        self.load_problem_profiles()

    def load_yaml(self, path: Union[str, Path], required: bool = False) -> Dict[str, Any]:
        """
        Loads a YAML file and returns its content as a dictionary.

        Args:
            path (Union[str, Path]): Path to the YAML file.
            required (bool): Raise instead of falling back to an empty mapping.

        Returns:
            Dict[str, Any]: Parsed YAML content.

        Raises:
            ConfigError: `required` is set and the file is missing, unreadable or not a mapping.
        """
        try:
            with open(path, "r", encoding="utf-8") as file:
                data = yaml.safe_load(file) or {}
            if not isinstance(data, dict):
                raise ConfigError(f"{path} must contain a YAML mapping")
            log.debug(f"Loaded YAML configuration from {path}")
            return data
        except FileNotFoundError:
            if required:
                raise ConfigError(f"Configuration file not found: {path}")
            log.error(f"Configuration file not found: {path}")
            return {}
        except yaml.YAMLError as e:
            if required:
                raise ConfigError(f"Error parsing YAML file {path}: {e}") from e
            log.error(f"Error parsing YAML file {path}: {e}")
            return {}
        except ConfigError:
            if required:
                raise
            log.error(f"Ignoring {path}: not a YAML mapping")
            return {}

    def load_problem_profiles(self) -> None:
        """
        Loads every problem profile from the problems directory.
        """
        if not self.problems_dir.exists():
            log.warning(f"Problem profile directory does not exist: {self.problems_dir}")
            return

        for yaml_file in sorted(self.problems_dir.glob("*.yaml")):
            self.problem_profiles[yaml_file.stem] = self.load_yaml(yaml_file)
            log.debug(f"Loaded problem profile '{yaml_file.stem}'")

    def list_problems(self) -> List[str]:
        return [p for p in PROBLEM_IDS if p in self.problem_profiles]

    def get_general(self, key: str, default: Optional[Any] = None) -> Any:
        """
        Retrieves a value from the general configuration.

        Args:
            key (str): Configuration key in dot notation (e.g., "logging.console_log_level").
            default (Optional[Any]): Default value if the key is not found.

        Returns:
            Any: The configuration value or default.
        """
        return self._get_from_config(self.general_config, key, default)

    def _get_from_config(self, config: Dict[str, Any], key: str, default: Optional[Any] = None) -> Any:
        """
        Helper method to retrieve a value from a config dictionary using dot notation.
        """
        value = config
        try:
            for k in key.split("."):
                value = value[k]
            log.debug(f"Retrieved config '{key}': {value}")
            return value
        except (KeyError, TypeError):
            log.debug(f"Configuration key '{key}' not found. Using default: {default}")
            return default

    def resolve_run_config(
        self,
        problem: Optional[str] = None,
        paper_scale: bool = False,
        user_config: Optional[Union[str, Path]] = None,
        overrides: Optional[Mapping[str, Any]] = None,
    ) -> RunConfig:
        """
        Merges defaults, profile, paper-scale block, user file and flag overrides.

        Args:
            problem (Optional[str]): Problem id; falls back to `problem` in the user file.
            paper_scale (bool): Apply the profile's `paper_scale` block.
            user_config (Optional[Union[str, Path]]): User YAML file (same schema as a profile).
            overrides (Optional[Mapping[str, Any]]): Nested values from command-line flags.

        Returns:
            RunConfig: The validated configuration.

        Raises:
            ConfigError: No problem given, unknown profile, or invalid merged settings.
        """
        user = self.load_yaml(user_config, required=True) if user_config else {}
        problem = problem or user.get("problem")
        if not problem:
            raise ConfigError("no problem given (use --problem or set 'problem' in the config file)")
        if problem not in self.problem_profiles:
            raise ConfigError(f"no profile for problem '{problem}' in {self.problems_dir}")

        merged: Dict[str, Any] = deep_merge({}, self.get_general("defaults", {}) or {})
        cache = self.get_general("cache_directory", "cache")
        merged["cache_directory"] = cache
        profile = dict(self.problem_profiles[problem])
        scale_block = profile.pop(PAPER_SCALE_KEY, {}) or {}
        merged = deep_merge(merged, profile)
        if paper_scale:
            log.info(f"Applying paper-scale settings for {problem}")
            merged = deep_merge(merged, scale_block)
        user = {k: v for k, v in user.items() if k != PAPER_SCALE_KEY}
        merged = deep_merge(merged, user)
        merged = deep_merge(merged, overrides or {})
        merged["problem"] = problem
        config = RunConfig.from_dict(merged)
        log.debug(f"Resolved run configuration for {problem}: {config.to_dict()}")
        return config
