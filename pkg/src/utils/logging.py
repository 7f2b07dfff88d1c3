import logging
from typing import Optional, Any, Dict

from src.config.settings import LOG_FORMAT, LOG_LEVEL


class SimLogger:
    def __init__(self, name: str = "is_antisensing"):
        # Setup standard Python logging
        logging.basicConfig(
            level=getattr(logging, LOG_LEVEL.upper(), logging.INFO),
            format=LOG_FORMAT
        )
        self.logger = logging.getLogger(name)

    def log(self, event_type: str, message: str, extra: Optional[Dict[str, Any]] = None) -> None:
        """
        Log a simulation event through the standard Python logger

        Args:
            event_type: Type of the event ('error', 'info', 'warning', 'debug')
            message: The log message
            extra: Additional context rendered as key=value pairs
        """
        level = getattr(logging, event_type.upper(), logging.INFO)
        if not self.logger.isEnabledFor(level):
            return

        if extra:
            context = " ".join(f"{key}={extra[key]}" for key in sorted(extra))
            message = f"{message} | {context}"
        self.logger.log(level, f"[{event_type}] {message}")

    def set_level(self, level: str) -> None:
        self.logger.setLevel(getattr(logging, level.upper(), logging.INFO))

    def error(self, message: str, extra: Optional[Dict[str, Any]] = None) -> None:
        self.log("error", message, extra)

    def info(self, message: str, extra: Optional[Dict[str, Any]] = None) -> None:
        self.log("info", message, extra)

    def warning(self, message: str, extra: Optional[Dict[str, Any]] = None) -> None:
        self.log("warning", message, extra)

    def debug(self, message: str, extra: Optional[Dict[str, Any]] = None) -> None:
        self.log("debug", message, extra)

# Global logger instance
logger = SimLogger()
