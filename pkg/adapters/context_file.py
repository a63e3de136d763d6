"""
CONFIGURATION LOADING
Context files (versioned key = value text) describe the group and the
endomorphism; config/settings.json carries engine defaults. Environment
variables (optionally from a .env file) override both.
"""

import copy
import json
import os
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple, Union

from dotenv import load_dotenv

from domain.entities import EndoSpec
from utils.helpers import ConfigError, merge_dicts, parse_bool, parse_int_list
from utils.logger import get_logger

logger = get_logger(__name__)

SUPPORTED_VERSIONS = (1,)
CONTEXT_KEYS = ('version', 'rank', 'matrix', 'moduli', 'max_depth', 'enum_cap', 'declared_pure',
                'iteration_bound', 'word_length_bound', 'purity_extras')

DEFAULT_SETTINGS: Dict[str, Any] = {
    'engine': {
        'iteration_bound': 96,
        'word_length_bound': 64,
        'companion_candidates': 27,
    },
    'oracle': {
        'window_radius': 20,
        'random_words': 200,
        'random_word_length': 8,
        'displacement_radius': 3,
    },
    'dynamics': {
        'relations_sample_bound': 1,
        'spectrum_level_bound': 2,
        'spectrum_shift_bound': 2,
    },
    'logging': {
        'level': 'WARNING',
        'log_to_file': False,
        'directory': 'logs',
    },
    'report': {
        'schema_version': 'endoalg-report/1',
    },
}


def parse_context_text(text: str, overrides: Optional[Mapping[str, Any]] = None,
                       defaults: Optional[Mapping[str, Any]] = None) -> EndoSpec:
    """
    Parse a context document. `defaults` fills the engine bounds the file leaves
    out; `overrides` (environment and CLI) replaces values after parsing.
    """
    defaults = defaults or {}
    values: Dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        if '=' not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split('=', 1))
        if key not in CONTEXT_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        values[key] = value

    version = _int(values, 'version', None)
    if version not in SUPPORTED_VERSIONS:
        raise ConfigError(f"unsupported context version {version}")
    if 'rank' not in values or 'matrix' not in values:
        raise ConfigError("context needs 'rank' and 'matrix'")

    rank = _int(values, 'rank', None)
    entries = parse_int_list(values['matrix'].replace(';', ' '))
    if rank is None or rank <= 0 or len(entries) != rank * rank:
        raise ConfigError(f"matrix needs {rank}x{rank} integers, got {len(entries)}")
    matrix = tuple(tuple(entries[r * rank:(r + 1) * rank]) for r in range(rank))
    moduli_text = values.get('moduli', '')
    moduli = tuple(parse_int_list(moduli_text)) if moduli_text else (0,) * rank

    fields: Dict[str, Any] = {
        'rank': rank,
        'matrix': matrix,
        'moduli': moduli,
        'max_depth': _int(values, 'max_depth', 24),
        'enum_cap': _int(values, 'enum_cap', 1_000_000),
        'declared_pure': parse_bool(values.get('declared_pure', 'false')),
        'iteration_bound': _int(values, 'iteration_bound', defaults.get('iteration_bound', 96)),
        'word_length_bound': _int(values, 'word_length_bound', defaults.get('word_length_bound', 64)),
        'purity_extras': _vectors(values.get('purity_extras', '')),
    }
    for key, value in (overrides or {}).items():
        if value is not None:
            fields[key] = int(value)
    return EndoSpec(**fields)


def _vectors(text: str) -> Tuple[Tuple[int, ...], ...]:
    """Semicolon-separated integer vectors, e.g. `1, -2; 0, 1`"""
    return tuple(tuple(parse_int_list(part)) for part in text.split(';') if part.strip())


def _int(values: Mapping[str, str], key: str, default: Optional[int]) -> Optional[int]:
    if key not in values:
        return default
    try:
        return int(values[key].replace('_', ''))
    except ValueError as e:
        raise ConfigError(f"{key} must be an integer, got {values[key]!r}") from e


def load_context(path: Union[str, Path], overrides: Optional[Mapping[str, Any]] = None,
                 defaults: Optional[Mapping[str, Any]] = None) -> EndoSpec:
    path = Path(path)
    try:
        text = path.read_text(encoding='utf-8')
    except OSError as e:
        raise ConfigError(f"cannot read context file {path}: {e}") from e
    spec = parse_context_text(text, overrides, defaults)
    logger.info("context loaded", path=str(path), rank=spec.rank, max_depth=spec.max_depth)
    return spec


def load_settings(path: Optional[Union[str, Path]] = None) -> Dict[str, Any]:
    """Defaults deep-merged with the settings file, when one exists"""
    if path is None:
        return copy.deepcopy(DEFAULT_SETTINGS)
    path = Path(path)
    if not path.exists():
        logger.warning("settings file missing, using defaults", path=str(path))
        return copy.deepcopy(DEFAULT_SETTINGS)
    try:
        with open(path, 'r', encoding='utf-8') as f:
            loaded = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read settings {path}: {e}") from e
    if not isinstance(loaded, dict):
        raise ConfigError(f"settings {path} must hold a JSON object")
    return merge_dicts(copy.deepcopy(DEFAULT_SETTINGS), loaded, deep=True)


def environment_overrides(dotenv_path: Optional[str] = None) -> Dict[str, Any]:
    """ENDO_* variables; a .env file fills in only what the environment lacks"""
    load_dotenv(dotenv_path, override=False)
    out: Dict[str, Any] = {}
    if os.getenv('ENDO_SETTINGS'):
        out['settings'] = os.getenv('ENDO_SETTINGS')
    for name, key in (('ENDO_MAX_DEPTH', 'max_depth'), ('ENDO_ENUM_CAP', 'enum_cap')):
        raw = os.getenv(name)
        if raw:
            try:
                out[key] = int(raw)
            except ValueError as e:
                raise ConfigError(f"{name} must be an integer, got {raw!r}") from e
    if os.getenv('ENDO_LOG_LEVEL'):
        out['log_level'] = os.getenv('ENDO_LOG_LEVEL').upper()
    return out
