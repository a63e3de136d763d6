"""
Structured logging for the engine and the CLI
"""

import json
import logging
import os
import sys
from datetime import datetime
from typing import Any, Dict, Optional

_DEFAULTS: Dict[str, Any] = {
    'level': 'WARNING',
    'log_to_file': False,
    'directory': 'logs',
}
_LOGGERS: Dict[str, 'EnterpriseLogger'] = {}


class EnterpriseLogger:
    """Logger with `message | key=value` context and per-level counters"""

    def __init__(self, name: str, component: Optional[str] = None, log_level: Optional[str] = None,
                 log_to_file: Optional[bool] = None, directory: Optional[str] = None):
        self.name = name
        self.component = component or name
        self.logger = logging.getLogger(f"endoalg.{self.component}")
        self.metrics = {
            'info': 0,
            'warning': 0,
            'error': 0,
            'debug': 0
        }
        self.configure(
            log_level or _DEFAULTS['level'],
            _DEFAULTS['log_to_file'] if log_to_file is None else log_to_file,
            directory or _DEFAULTS['directory'],
        )

    def configure(self, log_level: str, log_to_file: bool, directory: str):
        """(Re)attach handlers; stdout stays free for reports"""
        self.logger.handlers.clear()

        level = getattr(logging, str(log_level).upper(), logging.WARNING)
        self.logger.setLevel(level)

        formatter = logging.Formatter(
            '%(asctime)s | %(levelname)-8s | %(name)-30s | %(message)s',
            datefmt='%Y-%m-%d %H:%M:%S'
        )

        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setLevel(level)
        console_handler.setFormatter(formatter)
        self.logger.addHandler(console_handler)

        if log_to_file:
            os.makedirs(directory, exist_ok=True)
            timestamp = datetime.now().strftime("%Y%m%d")
            log_file = os.path.join(directory, f"endoalg_{timestamp}.log")
            file_handler = logging.FileHandler(log_file)
            file_handler.setLevel(level)
            file_handler.setFormatter(formatter)
            self.logger.addHandler(file_handler)

        self.logger.propagate = False

    def _format_message(self, message: str, **kwargs) -> str:
        """Format message with optional context"""
        if kwargs:
            context_str = " ".join(f"{k}={v}" for k, v in kwargs.items())
            return f"{message} | {context_str}"
        return message

    def info(self, message: str, **kwargs):
        self.metrics['info'] += 1
        self.logger.info(self._format_message(message, **kwargs))

    def warning(self, message: str, **kwargs):
        self.metrics['warning'] += 1
        self.logger.warning(self._format_message(message, **kwargs))

    def error(self, message: str, **kwargs):
        self.metrics['error'] += 1
        self.logger.error(self._format_message(message, **kwargs))

    def debug(self, message: str, **kwargs):
        self.metrics['debug'] += 1
        if self.logger.isEnabledFor(logging.DEBUG):
            self.logger.debug(self._format_message(message, **kwargs))

    def performance(self, metrics: Dict[str, Any]):
        """Log a performance summary"""
        self.info(f"PERFORMANCE: {json.dumps(metrics, default=str)}")

    def get_metrics(self) -> Dict[str, int]:
        return self.metrics.copy()


def configure_logging(level: str = 'WARNING', log_to_file: bool = False, directory: str = 'logs'):
    """Set process-wide logging defaults and reconfigure existing loggers"""
    _DEFAULTS.update({'level': level, 'log_to_file': log_to_file, 'directory': directory})
    for instance in _LOGGERS.values():
        instance.configure(level, log_to_file, directory)


def get_logger(name: str) -> EnterpriseLogger:
    """Get a cached logger instance"""
    if name not in _LOGGERS:
        _LOGGERS[name] = EnterpriseLogger(name)
    return _LOGGERS[name]
