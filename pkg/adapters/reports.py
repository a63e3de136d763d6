"""
REPORTS
Deterministic command reports rendered as JSON or indented text. Field order
is insertion order; values are exact (ints, strings, booleans). Timing is
only present when requested.
"""

import json
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from utils.helpers import EXIT_FALSE, EXIT_OK

SCHEMA_VERSION = 'endoalg-report/1'


@dataclass
class Report:
    command: str
    arguments: Dict[str, Any]
    context: Dict[str, Any]
    payload: Dict[str, Any] = field(default_factory=dict)
    verdicts: Dict[str, bool] = field(default_factory=dict)
    timing: Optional[Dict[str, Any]] = None
    schema_version: str = SCHEMA_VERSION

    @property
    def all_true(self) -> bool:
        return all(self.verdicts.values())

    @property
    def exit_code(self) -> int:
        return EXIT_OK if self.all_true else EXIT_FALSE

    def to_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {
            'schema': self.schema_version,
            'command': self.command,
            'arguments': self.arguments,
            'context': self.context,
            'result': self.payload,
            'verdicts': self.verdicts,
        }
        if self.timing is not None:
            out['timing'] = self.timing
        return _plain(out)


def _plain(value: Any) -> Any:
    """JSON-safe exact values"""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, (bool, int, str)) or value is None:
        return value
    return str(value)


def render_json(report: Report) -> str:
    return json.dumps(report.to_dict(), indent=2, ensure_ascii=False)


def render_text(report: Report) -> str:
    lines: List[str] = []
    _render_lines(report.to_dict(), 0, lines)
    return "\n".join(lines)


def _render_lines(value: Any, indent: int, lines: List[str]):
    pad = '  ' * indent
    if isinstance(value, dict):
        for key, item in value.items():
            if isinstance(item, (dict, list)) and item:
                lines.append(f"{pad}{key}:")
                _render_lines(item, indent + 1, lines)
            else:
                lines.append(f"{pad}{key}: {_scalar_text(item)}")
    elif isinstance(value, list):
        for item in value:
            if isinstance(item, (dict, list)) and item:
                lines.append(f"{pad}-")
                _render_lines(item, indent + 1, lines)
            else:
                lines.append(f"{pad}- {_scalar_text(item)}")


def _scalar_text(value: Any) -> str:
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if value is None:
        return 'null'
    if isinstance(value, (dict, list)):
        return '{}' if isinstance(value, dict) else '[]'
    return str(value)


def render(report: Report, as_json: bool) -> str:
    return render_json(report) if as_json else render_text(report)
