"""
Utilities module for the Path Competition Simulator.
Console output, logging setup and display formatting.
"""

import logging
import sys
from typing import Any, Dict, Iterable, List, Optional

from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table

# Machine-readable documents go to stdout, everything human-facing to stderr.
err_console = Console(stderr=True)


def configure_logging(level: str = "INFO", log_file: Optional[str] = None) -> None:
    """Install a rich handler (and optionally a file handler) on the root logger."""
    handlers: List[logging.Handler] = [
        RichHandler(console=err_console, show_path=False, rich_tracebacks=True)
    ]
    if log_file:
        file_handler = logging.FileHandler(log_file)
        file_handler.setFormatter(
            logging.Formatter("%(asctime)s %(levelname)s %(name)s: %(message)s")
        )
        handlers.append(file_handler)
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format="%(message)s",
        datefmt="[%X]",
        handlers=handlers,
        force=True,
    )


def print_header(title: str) -> None:
    """Print a formatted header."""
    err_console.print(f"\n{title}", style="bold blue")
    err_console.print("=" * 60, style="blue")


def print_success(message: str) -> None:
    """Print a success message."""
    err_console.print(f"{message}", style="bold green")


def print_error(message: str) -> None:
    """Print an error message."""
    err_console.print(f"{message}", style="bold red")


def print_warning(message: str) -> None:
    """Print a warning message."""
    err_console.print(f"{message}", style="bold yellow")


def print_info(message: str) -> None:
    """Print an info message."""
    err_console.print(f"{message}", style="bold cyan")


def print_document(text: str) -> None:
    """Write a JSON document to standard output, unstyled."""
    sys.stdout.write(text)
    if not text.endswith("\n"):
        sys.stdout.write("\n")
    sys.stdout.flush()


def format_number(value: Any, digits: int = 6) -> str:
    """Format reals compactly for tables."""
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, complex):
        return f"{value.real:.{digits}g}{value.imag:+.{digits}g}j"
    if isinstance(value, float):
        return f"{value:.{digits}g}"
    return str(value)


def display_equilibrium(result: Dict[str, Any]) -> None:
    """Display an equilibrium result document in formatted tables."""
    if not result:
        print_warning("No result available")
        return

    table = Table(title="Equilibrium")
    table.add_column("Field", style="cyan", no_wrap=True)
    table.add_column("Value", style="magenta")
    table.add_row("Solver", str(result.get("solver")))
    table.add_row("Residual", format_number(result.get("residual", 0.0)))
    table.add_row("Unique in attributes", format_number(result.get("unique_in_attributes", True)))
    err_console.print(table)

    valuations = result.get("path_valuations", {})
    if valuations:
        paths_table = Table(title="Path Valuations")
        paths_table.add_column("Path", style="cyan")
        paths_table.add_column("v", style="magenta")
        for path_id, value in valuations.items():
            paths_table.add_row(path_id, format_number(value))
        err_console.print(paths_table)


def display_trace_summary(summary: Dict[str, Any]) -> None:
    """Display a dynamics trace summary."""
    table = Table(title="Dynamics")
    table.add_column("Metric", style="cyan", no_wrap=True)
    table.add_column("Value", style="magenta")
    for key in ("mode", "converged", "rounds", "final_residual"):
        if key in summary:
            table.add_row(key.replace("_", " ").title(), format_number(summary[key]))
    err_console.print(table)


def display_suite_reports(reports: Iterable[Dict[str, Any]]) -> None:
    """Display pass/fail counts of verification suites."""
    table = Table(title="Verification Suites")
    table.add_column("Suite", style="cyan")
    table.add_column("Passed", style="green")
    table.add_column("Failed", style="red")
    for report in reports:
        table.add_row(report["suite"], str(report["passed"]), str(report["failed"]))
    err_console.print(table)


def display_metrics_summary(summary_rows: List[Dict[str, Any]]) -> None:
    """Display aggregated experiment metrics (mean over samples)."""
    if not summary_rows:
        print_warning("No metrics available")
        return
    table = Table(title="Experiment Metrics (mean over samples)")
    columns = list(summary_rows[0].keys())
    for column in columns:
        table.add_column(column, style="cyan" if column in ("path_count", "tier") else "magenta")
    for row in summary_rows:
        table.add_row(*(format_number(row[column], 4) for column in columns))
    err_console.print(table)


def format_duration(seconds: float) -> str:
    """Format duration in a human-readable way."""
    if seconds < 1:
        return f"{seconds * 1000:.0f}ms"
    elif seconds < 60:
        return f"{seconds:.1f}s"
    elif seconds < 3600:
        minutes = seconds / 60
        return f"{minutes:.1f}m"
    else:
        hours = seconds / 3600
        return f"{hours:.1f}h"
