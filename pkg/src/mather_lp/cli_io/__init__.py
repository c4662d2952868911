"""Configuration parsing, report emission and the ``mather-lp`` command line."""

from .config import RunConfig, load_config, parse_config
from .reports import write_curve, write_report

__all__ = ["RunConfig", "load_config", "parse_config", "write_curve", "write_report"]
