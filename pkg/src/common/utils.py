"""
Common utilities: logging setup, run timing and number formatting.
"""

import logging
import sys
import time
from typing import List, Optional


class RunTimer:
    """
    Nanosecond run timer used to log how long numerical stages take.
    """

    def __init__(self, label: str):
        self.label = label
        self.logger = logging.getLogger(__name__)
        self.start_ns = 0
        self.elapsed_ns = 0

    @staticmethod
    def get_nanosecond_timestamp() -> int:
        """
        Get current timestamp in nanoseconds.
        """
        return time.perf_counter_ns()

    def __enter__(self) -> "RunTimer":
        self.start_ns = self.get_nanosecond_timestamp()
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        self.elapsed_ns = self.get_nanosecond_timestamp() - self.start_ns
        self.logger.info(f"{self.label} finished in {self.elapsed_ms:.1f} ms")

    @property
    def elapsed_ms(self) -> float:
        """Elapsed time in milliseconds."""
        return self.elapsed_ns / 1_000_000.0


class NumberFormat:
    """
    Locale-free text forms of floats and float lists.
    """

    @staticmethod
    def format_float(value: float) -> str:
        """
        Format a float with 17 significant digits ('.' decimal, round-trip exact).
        """
        return format(float(value), ".17g")

    @staticmethod
    def parse_float_list(text: str) -> List[float]:
        """
        Parse a comma separated list of floats, e.g. "0.5,1,2.5".
        """
        items = [item.strip() for item in text.split(",") if item.strip()]
        if not items:
            raise ValueError(f"empty list: {text!r}")
        return [float(item) for item in items]

    @staticmethod
    def parse_int_list(text: str) -> List[int]:
        """
        Parse a comma separated list of integers, e.g. "8,16,32".
        """
        items = [item.strip() for item in text.split(",") if item.strip()]
        if not items:
            raise ValueError(f"empty list: {text!r}")
        return [int(item) for item in items]


def setup_logging(log_level: str = "INFO", log_file: Optional[str] = None) -> None:
    """
    Setup logging configuration for the project.

    Log records go to stderr so that stdout carries only results.
    """
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if log_file:
        handlers.append(logging.FileHandler(log_file))

    logging.basicConfig(
        level=getattr(logging, log_level.upper()),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=handlers,
        force=True
    )
