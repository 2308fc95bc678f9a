# File: src/custom_logger.py

import logging
from logging.handlers import RotatingFileHandler
from datetime import datetime
import yaml
from pathlib import Path
from typing import Dict, Any, Optional
from collections.abc import Mapping
import atexit

from rich.logging import RichHandler
from rich.traceback import install as rich_traceback_install
from rich.console import Console

rich_traceback_install(show_locals=False)
# Console output goes to stderr; stdout is reserved for run results.
console = Console(color_system="256", stderr=True)


def deep_merge(dict1: Dict[str, Any], dict2: Mapping[str, Any]) -> Dict[str, Any]:
    """
    Recursively merge two dictionaries.

    Args:
        dict1 (Dict[str, Any]): Base dictionary
        dict2 (Mapping[str, Any]): Dictionary to merge into base

    Returns:
        Dict[str, Any]: Merged dictionary
    """
    for k, v in dict2.items():
        if isinstance(v, Mapping):
            dict1[k] = deep_merge(dict(dict1.get(k) or {}), v)
        else:
            dict1[k] = v
    return dict1


class Logger:
    """
    Logger with Rich console output and rotating file logs for solver runs.
    """

    COLOR_MAP = {
        "DEBUG": "green",
        "INFO": "blue",
        "WARNING": "yellow",
        "ERROR": "red",
        "CRITICAL": "bold red",
    }

    DEFAULT_CONFIG = {
        "log_directory": "logs",
        "log_to_file": True,
        "max_log_size_kb": 1024,
        "backup_count": 5,
        "console_log_level": "INFO",
        "file_log_level": "DEBUG",
        "colorize": True,
        "noConsole": False,
    }

    def __init__(self, config_path: str = "configs/config.yaml") -> None:
        """
        Initialize the Logger from the `logging` block of a YAML file.

        Args:
            config_path (str): Path to the configuration YAML file
        """
        self.config = self.load_config(config_path)
        self.logger: logging.Logger = logging.getLogger("pinn_bench")
        self.logger.propagate = False
        self.console_handler: Optional[RichHandler] = None
        self._setup_logger()
        atexit.register(self.close)

    def load_config(self, config_path: str) -> Dict[str, Any]:
        """
        Load the `logging` block from a YAML file.

        Args:
            config_path (str): Path to the configuration file

        Returns:
            Dict[str, Any]: Logging settings merged over the defaults
        """
        path = Path(config_path)
        if not path.exists():
            return self.DEFAULT_CONFIG.copy()
        try:
            with path.open("r", encoding="utf-8") as f:
                config = yaml.safe_load(f) or {}
            return deep_merge(self.DEFAULT_CONFIG.copy(), config.get("logging") or {})
        except Exception as e:
            console.print(
                f"[bold red]Failed to load logging settings from {config_path}: {e}. Using defaults.[/bold red]"
            )
            return self.DEFAULT_CONFIG.copy()

    def _setup_logger(self) -> None:
        """Set up the logger with file and console handlers."""
        self.logger.setLevel(logging.DEBUG)
        if self.config.get("log_to_file", True):
            log_dir = Path(self.config.get("log_directory", "logs"))
            try:
                log_dir.mkdir(parents=True, exist_ok=True)
                timestamp = datetime.now().strftime("%Y-%m-%d_%H-%M-%S")
                self._setup_file_handler(log_dir / f"{timestamp}.log")
            except OSError as e:
                console.print(f"[yellow]File logging disabled: {e}[/yellow]")
        self._setup_console_handler()

    def _setup_file_handler(self, log_file: Path) -> None:
        """Set up the rotating file handler."""
        self.file_log_level = self._level(self.config.get("file_log_level"), logging.DEBUG)
        file_handler = RotatingFileHandler(
            str(log_file),
            maxBytes=self.config.get("max_log_size_kb", 1024) * 1024,
            backupCount=self.config.get("backup_count", 5),
        )
        file_handler.setLevel(self.file_log_level)
        file_handler.setFormatter(
            logging.Formatter(
                "%(asctime)s [%(levelname)s] %(threadName)s %(message)s",
                datefmt="%Y-%m-%d %H:%M:%S",
            )
        )
        self.logger.addHandler(file_handler)

    def _setup_console_handler(self) -> None:
        """Set up the Rich console handler."""
        if self.config.get("noConsole", False):
            return
        self.console_handler = RichHandler(
            console=console, show_path=False, markup=True, rich_tracebacks=True
        )
        self.console_handler.setLevel(
            self._level(self.config.get("console_log_level"), logging.INFO)
        )
        self.console_handler.setFormatter(logging.Formatter("%(message)s"))
        self.logger.addHandler(self.console_handler)

    @staticmethod
    def _level(name: Optional[str], default: int) -> int:
        return getattr(logging, str(name or "").upper(), default)

    def set_console_level(self, level: str) -> None:
        """Change the console verbosity (used by --log-level)."""
        if self.console_handler is not None:
            self.console_handler.setLevel(self._level(level, logging.INFO))

    def format_console_message(self, level: str, message: str) -> str:
        if self.config.get("colorize", True) and level in ("WARNING", "ERROR", "CRITICAL"):
            color = self.COLOR_MAP[level]
            return f"[{color}]{message}[/{color}]"
        return message

    def log_message(self, level: str, message: str) -> None:
        """
        Log a message at the specified level.

        Args:
            level (str): Log level name
            message (str): Message to log
        """
        log_level = getattr(logging, level)
        if self.logger.isEnabledFor(log_level):
            self.logger.log(log_level, self.format_console_message(level, message))

    def debug(self, message: str) -> None:
        self.log_message("DEBUG", message)

    def info(self, message: str) -> None:
        self.log_message("INFO", message)

    def warning(self, message: str) -> None:
        self.log_message("WARNING", message)

    def error(self, message: str) -> None:
        self.log_message("ERROR", message)

    def critical(self, message: str) -> None:
        self.log_message("CRITICAL", message)

    def close(self) -> None:
        """Close all handlers and clean up resources."""
        for handler in self.logger.handlers[:]:
            handler.close()
            self.logger.removeHandler(handler)


class SingletonLogger:
    """Singleton class to ensure only one Logger instance is created."""

    _instance: Optional[Logger] = None

    @classmethod
    def get_instance(cls) -> Logger:
        """
        Get or create the single Logger instance.

        Returns:
            Logger: The singleton Logger instance
        """
        if cls._instance is None:
            cls._instance = Logger()
        return cls._instance


log = SingletonLogger.get_instance()
