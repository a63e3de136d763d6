"""
Error hierarchy and small shared utilities
"""

from typing import Any, Dict, List, Optional


# ========== EXCEPTION CLASSES ==========

class EndoAlgebraError(Exception):
    """Base class for every engine error"""
    pass


class ConfigError(EndoAlgebraError):
    """Invalid context or settings"""
    pass


class ParseError(EndoAlgebraError):
    """Malformed expression; `position` is a 0-based character offset"""

    def __init__(self, message: str, position: Optional[int] = None):
        self.position = position
        where = f" at position {position}" if position is not None else ""
        super().__init__(f"{message}{where}")


class CapExceeded(EndoAlgebraError):
    """A configured bound would be exceeded"""

    def __init__(self, bound: str, limit: int, requested: Any = None):
        self.bound = bound
        self.limit = limit
        self.requested = requested
        extra = f" (requested {requested})" if requested is not None else ""
        super().__init__(f"{bound} exceeded: limit {limit}{extra}")


class ZeroElement(EndoAlgebraError):
    """Valuation of the identity is infinite"""
    pass


class NotDiagonal(EndoAlgebraError):
    pass


class CompanionRetry(EndoAlgebraError):
    """Critical quantity is the identity for this companion"""
    pass


class CompanionExhausted(EndoAlgebraError):
    pass


class SaturatedValuation(EndoAlgebraError):
    """Valuation reached max_depth; no exponent can be certified"""
    pass


class OutOfDomain(EndoAlgebraError):
    pass


class DepthExhausted(EndoAlgebraError):
    pass


class PreconditionError(EndoAlgebraError):
    pass


class VerificationError(EndoAlgebraError):
    """An identity the engine relies on failed to verify"""
    pass


# Exit codes shared by the CLI
EXIT_OK = 0
EXIT_FALSE = 1
EXIT_USAGE = 2
EXIT_CAP = 3

CAP_ERRORS = (CapExceeded, DepthExhausted, CompanionExhausted, SaturatedValuation)


def exit_code_for(error: BaseException) -> int:
    if isinstance(error, CAP_ERRORS):
        return EXIT_CAP
    return EXIT_USAGE


# ========== DATA STRUCTURE UTILITIES ==========

def merge_dicts(
    dict1: Dict[str, Any],
    dict2: Dict[str, Any],
    deep: bool = False
) -> Dict[str, Any]:
    """
    Merge dictionaries (dict2 overwrites dict1)

    Args:
        dict1: First dictionary
        dict2: Second dictionary
        deep: Deep merge for nested dictionaries

    Returns:
        Merged dictionary
    """
    result = dict1.copy()
    if not deep:
        result.update(dict2)
        return result

    for key, value in dict2.items():
        if key in result and isinstance(result[key], dict) and isinstance(value, dict):
            result[key] = merge_dicts(result[key], value, deep=True)
        else:
            result[key] = value
    return result


def parse_bool(value: Any) -> bool:
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in ('1', 'true', 'yes', 'on'):
        return True
    if text in ('0', 'false', 'no', 'off', ''):
        return False
    raise ConfigError(f"not a boolean: {value!r}")


def parse_int_list(text: str) -> List[int]:
    """Integers separated by commas and/or whitespace"""
    parts = [p for p in text.replace(',', ' ').split() if p]
    try:
        return [int(p) for p in parts]
    except ValueError as e:
        raise ConfigError(f"not an integer list: {text!r}") from e

