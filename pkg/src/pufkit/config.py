"""Configuration management for pufkit.

Values are layered, later layers winning:

1. ``DEFAULTS`` below (including the frozen calibrated population model);
2. an optional YAML config file (JSON files load too, JSON being a YAML subset);
3. ``PUFKIT_*`` environment variables, read from ``.env`` via python-dotenv;
4. explicit overrides from the command line (:meth:`Config.override`).
"""

import copy
import os
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import yaml
from dotenv import load_dotenv

from .exceptions import ConfigError

CONFIG_VERSION = 1

DEFAULTS: Dict[str, Any] = {
    'config_version': CONFIG_VERSION,
    'seed': 0,
    # Hidden-variable SRAM cell population, calibration v2.
    # 25C one-shot BER ~4.7%; presel(10) reference drifts to ~6.5% at 80C,
    # the -15C/25C/80C reference set stays below ~2.5% at every condition.
    'model': {
        'calibration': 'v2',
        'skew_mean': 0.0,
        'skew_sigma': 9.5,
        'temp_sigma': 0.058,
        'noise_sigma': 1.0,
        'noise_spread': 0.05,
        'reference_temperature_c': 25,
    },
    'enrollment': {
        'strategy': 'presel',
        'reference_condition': '25C',
        'other_conditions': ['-15C', '80C'],
        'presel_repeats': 10,
        'mv_repeats': 9,
        'debias': None,
    },
    'code': {
        'key_bits': 128,
        'target_pfail': 1e-6,
    },
    'catalog': {
        'ms': [6, 7],
        'extra': [[15, 7, 2]],
    },
    'montecarlo': {
        'trials': 1000,
        'chunk_size': 1000,
        'workers': 1,
    },
    'logging': {
        'level': 'INFO',
        'file': None,
        'format': 'simple',
    },
    'directories': {
        'server_dir': 'server',
    },
}

ENV_OVERRIDES: Dict[str, Tuple[str, type]] = {
    'PUFKIT_LOG_LEVEL': ('logging.level', str),
    'PUFKIT_LOG_FILE': ('logging.file', str),
    'PUFKIT_SERVER_DIR': ('directories.server_dir', str),
    'PUFKIT_WORKERS': ('montecarlo.workers', int),
}


def _deep_merge(base: Dict[str, Any], update: Dict[str, Any]) -> Dict[str, Any]:
    """Recursively merge ``update`` into a copy of ``base``."""
    merged = copy.deepcopy(base)
    for key, value in update.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


class Config:
    """Configuration loader and manager."""

    def __init__(self, config_path: Optional[str] = None, use_env: bool = True):
        """Initialize configuration.

        Args:
            config_path: Path to a YAML (or JSON) configuration file; the
                built-in defaults are used alone when omitted
            use_env: Whether ``PUFKIT_*`` environment variables (and
                ``.env``) are consulted

        Raises:
            ConfigError: If the file is missing, unparsable or invalid
        """
        self.config = copy.deepcopy(DEFAULTS)
        self.config_path = config_path

        if config_path is not None:
            self.config = _deep_merge(self.config, self._load_file(config_path))

        if use_env:
            load_dotenv()
            self._apply_env()

        self._validate()

    @staticmethod
    def _load_file(config_path: str) -> Dict[str, Any]:
        config_file = Path(config_path)
        if not config_file.exists():
            raise ConfigError(
                f"Configuration file not found: {config_path}\n"
                f"Copy config.example.yaml and adjust it."
            )

        try:
            with open(config_file, 'r', encoding='utf-8') as f:
                loaded = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise ConfigError(f"Cannot parse {config_path}: {e}") from e

        if not isinstance(loaded, dict):
            raise ConfigError(f"{config_path}: top level must be a mapping")

        version = loaded.get('config_version', CONFIG_VERSION)
        if version != CONFIG_VERSION:
            raise ConfigError(
                f"{config_path}: unsupported config_version {version!r} "
                f"(expected {CONFIG_VERSION})"
            )
        return loaded

    def _apply_env(self):
        """Copy recognised ``PUFKIT_*`` variables into the config tree."""
        for env_var, (key_path, cast) in ENV_OVERRIDES.items():
            raw = os.getenv(env_var)
            if raw is None or raw == '':
                continue
            try:
                self.set(key_path, cast(raw))
            except ValueError as e:
                raise ConfigError(f"{env_var}={raw!r} is not a valid {cast.__name__}") from e

    def _validate(self):
        """Validate required configuration fields and ranges."""
        required_fields = [
            'model.skew_sigma',
            'model.temp_sigma',
            'model.noise_sigma',
            'code.key_bits',
            'enrollment.reference_condition',
        ]

        for field_path in required_fields:
            if self.get(field_path) is None:
                raise ConfigError(
                    f"Required configuration field missing: {field_path}"
                )

        for field_path in ('model.skew_sigma', 'model.temp_sigma', 'model.noise_sigma'):
            if float(self.get(field_path)) <= 0:
                raise ConfigError(f"{field_path} must be positive")

        if self.get('code.key_bits') != 128:
            raise ConfigError("code.key_bits must be 128")

        target = float(self.get('code.target_pfail'))
        if not 0.0 < target < 1.0:
            raise ConfigError("code.target_pfail must lie in (0, 1)")

        if int(self.get('montecarlo.workers')) < 1:
            raise ConfigError("montecarlo.workers must be at least 1")

    def get(self, key_path: str, default: Any = None) -> Any:
        """Get configuration value by dot-notation path.

        Args:
            key_path: Dot-separated path (e.g., 'model.skew_sigma')
            default: Default value if key not found

        Returns:
            Configuration value

        Example:
            >>> config = Config()
            >>> config.get('code.key_bits')
            128
        """
        keys = key_path.split('.')
        value = self.config

        for key in keys:
            if isinstance(value, dict) and key in value:
                value = value[key]
            else:
                return default

        return value

    def set(self, key_path: str, value: Any):
        """Set a value by dot-notation path, creating parents as needed."""
        keys = key_path.split('.')
        node = self.config
        for key in keys[:-1]:
            node = node.setdefault(key, {})
        node[keys[-1]] = value

    def override(self, **overrides: Any) -> 'Config':
        """Apply command-line overrides; ``None`` values are ignored.

        Keyword names use ``__`` for nesting, e.g. ``model__skew_sigma=12``.

        Returns:
            self, re-validated
        """
        for name, value in overrides.items():
            if value is None:
                continue
            self.set(name.replace('__', '.'), value)
        self._validate()
        return self

    @property
    def population_params(self):
        """Population parameters of the simulated SRAM model."""
        from .puf.model import PopulationParams

        model = self.config['model']
        return PopulationParams(
            skew_mean=float(model['skew_mean']),
            skew_sigma=float(model['skew_sigma']),
            temp_sigma=float(model['temp_sigma']),
            noise_sigma=float(model['noise_sigma']),
            noise_spread=float(model.get('noise_spread', 0.0)),
            reference_temperature_c=float(model.get('reference_temperature_c', 25)),
        )

    @property
    def enrollment_plan_defaults(self) -> Dict[str, Any]:
        """Default enrollment plan settings.

        Returns:
            Dictionary with enrollment config
        """
        enrollment = self.config.get('enrollment', {})
        return {
            'strategy': enrollment.get('strategy', 'presel'),
            'reference_condition': enrollment.get('reference_condition', '25C'),
            'other_conditions': list(enrollment.get('other_conditions') or []),
            'presel_repeats': int(enrollment.get('presel_repeats', 10)),
            'mv_repeats': int(enrollment.get('mv_repeats', 9)),
            'debias': enrollment.get('debias'),
        }

    @property
    def catalog_spec(self) -> Dict[str, List]:
        """Field degrees and extra triples making up the code catalog."""
        catalog = self.config.get('catalog', {})
        return {
            'ms': [int(m) for m in catalog.get('ms', [6, 7])],
            'extra': [tuple(int(v) for v in triple) for triple in catalog.get('extra', [])],
        }

    @property
    def montecarlo_config(self) -> Dict[str, int]:
        """Monte Carlo campaign settings."""
        mc = self.config.get('montecarlo', {})
        return {
            'trials': int(mc.get('trials', 1000)),
            'chunk_size': int(mc.get('chunk_size', 1000)),
            'workers': int(mc.get('workers', 1)),
        }

    def __repr__(self) -> str:
        """String representation."""
        return (
            f"Config(calibration={self.get('model.calibration')}, "
            f"reference={self.get('enrollment.reference_condition')}, "
            f"target_pfail={self.get('code.target_pfail')})"
        )
