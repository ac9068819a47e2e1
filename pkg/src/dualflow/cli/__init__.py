"""Command-line surface, run configuration and artifact writers."""

from dualflow.cli.config import COMMANDS, RunConfig, load_config, read_ini
from dualflow.cli.io import profiles_frame, read_tensor_csv, tensor_frame, write_report, write_table, write_tensor_csv
from dualflow.cli.main import build_parser, main, run

__all__ = [
    "COMMANDS",
    "RunConfig",
    "load_config",
    "read_ini",
    "profiles_frame",
    "read_tensor_csv",
    "tensor_frame",
    "write_report",
    "write_table",
    "write_tensor_csv",
    "build_parser",
    "main",
    "run",
]
