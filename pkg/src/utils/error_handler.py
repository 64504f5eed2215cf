"""
Error handling and logging system for the bipath arc code toolkit.

This module configures the package logger, classifies failures into error
categories with their exit codes, and tracks execution metrics per command.
"""

import logging
import logging.handlers
import os
import sys
import time
import traceback
from datetime import datetime
from pathlib import Path
from typing import Dict, Optional, List
from dataclasses import dataclass, field
from enum import Enum

PACKAGE_LOGGER = 'src'


class ErrorCategory(Enum):
    """Categories of errors for structured handling."""
    PARSE = "parse"
    USAGE = "usage"
    VALIDATION = "validation"
    CONSISTENCY = "consistency"
    CONFIGURATION = "configuration"
    SYSTEM = "system"
    UNKNOWN = "unknown"


EXIT_CODES: Dict[ErrorCategory, int] = {
    ErrorCategory.PARSE: 2,
    ErrorCategory.USAGE: 2,
    ErrorCategory.CONFIGURATION: 2,
    ErrorCategory.VALIDATION: 1,
    ErrorCategory.CONSISTENCY: 3,
    ErrorCategory.SYSTEM: 3,
    ErrorCategory.UNKNOWN: 3,
}


def exit_code_for(category: ErrorCategory) -> int:
    """Process exit status for an error category."""
    return EXIT_CODES[category]


@dataclass
class ExecutionMetrics:
    """Tracks performance metrics during execution."""
    start_time: float = field(default_factory=time.time)
    end_time: Optional[float] = None
    operations: Dict[str, int] = field(default_factory=dict)
    errors_encountered: List[str] = field(default_factory=list)
    verb: Optional[str] = None
    results_emitted: int = 0

    @property
    def execution_duration(self) -> float:
        """Calculate execution duration in seconds."""
        end = self.end_time or time.time()
        return end - self.start_time

    @property
    def total_operations(self) -> int:
        return sum(self.operations.values())

    def add_operation(self, name: str) -> None:
        """Record one library operation (decompose, slice, distance, ...)."""
        self.operations[name] = self.operations.get(name, 0) + 1

    def add_error(self, error_message: str) -> None:
        """Record an error encountered during execution."""
        self.errors_encountered.append(error_message)

    def finalize(self, results_emitted: Optional[int] = None) -> None:
        """Finalize metrics collection."""
        self.end_time = time.time()
        if results_emitted is not None:
            self.results_emitted = results_emitted


class ErrorHandler:
    """
    Logging setup, error classification and execution tracking.

    Log records go to stderr at the configured level so that stdout carries
    results only; with a log file path, a rotating file handler and a
    separate error log are added.
    """

    def __init__(self, log_level: str = "WARNING", log_file_path: Optional[str] = None):
        """
        Initialize the error handler with logging configuration.

        Args:
            log_level: Level name for the package logger
            log_file_path: Optional path to a rotating log file
        """
        self.log_level = log_level.upper()
        self.log_file_path = log_file_path
        self.error_log_path = log_file_path.replace('.log', '_errors.log') if log_file_path else None

        self.logger: logging.Logger = logging.getLogger(PACKAGE_LOGGER)
        self.execution_metrics = ExecutionMetrics()

        self._setup_logging()

    def _setup_logging(self) -> None:
        """Set up the package logger with stderr and optional rotating file handlers."""
        level = getattr(logging, self.log_level, logging.WARNING)
        self.logger.setLevel(level)
        self.logger.handlers.clear()
        self.logger.propagate = False

        detailed_formatter = logging.Formatter(
            '%(asctime)s - %(name)s - %(levelname)s - %(funcName)s:%(lineno)d - %(message)s',
            datefmt='%Y-%m-%d %H:%M:%S'
        )
        simple_formatter = logging.Formatter(
            '%(asctime)s - %(levelname)s - %(message)s',
            datefmt='%Y-%m-%d %H:%M:%S'
        )

        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setFormatter(simple_formatter)
        console_handler.setLevel(level)
        self.logger.addHandler(console_handler)

        if self.log_file_path:
            Path(self.log_file_path).parent.mkdir(parents=True, exist_ok=True)
            main_handler = logging.handlers.RotatingFileHandler(
                self.log_file_path,
                maxBytes=10*1024*1024,  # 10MB
                backupCount=5
            )
            main_handler.setFormatter(detailed_formatter)
            main_handler.setLevel(level)
            self.logger.addHandler(main_handler)

            error_handler = logging.handlers.RotatingFileHandler(
                self.error_log_path,
                maxBytes=5*1024*1024,  # 5MB
                backupCount=3
            )
            error_handler.setFormatter(detailed_formatter)
            error_handler.setLevel(logging.ERROR)
            self.logger.addHandler(error_handler)

    def categorize(self, error: Exception) -> ErrorCategory:
        """
        Classify an exception by its type.

        Args:
            error: The exception to classify

        Returns:
            ErrorCategory: Category deciding the exit code
        """
        # local imports keep the logging layer importable on its own
        from ..config.configuration_manager import ConfigurationError
        from ..core.bipath_core import BipathValidationError, CrossCheckError
        from ..core.distances import DistanceError
        from ..core.fibered import BifiltrationError, EmbeddingError, GridValidationError
        from ..core.field_linalg import FieldError, ShapeError
        from ..core.zigzag_core import DecompositionError, ZigzagError
        from ..formats.text_formats import ParseError

        if isinstance(error, ParseError):
            return ErrorCategory.PARSE
        if isinstance(error, ConfigurationError):
            return ErrorCategory.CONFIGURATION
        if isinstance(error, (CrossCheckError, DecompositionError)):
            return ErrorCategory.CONSISTENCY
        if isinstance(error, (BipathValidationError, ZigzagError, DistanceError, GridValidationError,
                              EmbeddingError, BifiltrationError, FieldError, ShapeError)):
            return ErrorCategory.VALIDATION
        if isinstance(error, (OSError, MemoryError)):
            return ErrorCategory.SYSTEM
        return ErrorCategory.UNKNOWN

    def log_execution_start(self, verb: str) -> None:
        """Log the start of a command execution."""
        self.execution_metrics = ExecutionMetrics(verb=verb)
        self.logger.info(f"Command '{verb}' started at {datetime.now().isoformat()}")
        self.logger.debug(
            f"System info: python {sys.version.split()[0]}, cwd {os.getcwd()}, pid {os.getpid()}"
        )

    def log_execution_success(self, results_emitted: int = 0) -> None:
        """
        Log successful completion of a command.

        Args:
            results_emitted: Number of result records written
        """
        self.execution_metrics.finalize(results_emitted)
        self.logger.info(
            f"Command '{self.execution_metrics.verb}' completed successfully. "
            f"Results: {results_emitted}, "
            f"Operations: {self.execution_metrics.total_operations}, "
            f"Execution time: {self.execution_metrics.execution_duration:.2f}s"
        )
        self._log_performance_metrics()

    def log_execution_failure(self, error: Exception,
                              error_category: ErrorCategory = ErrorCategory.UNKNOWN) -> None:
        """
        Log a failed command execution.

        Args:
            error: Exception that caused the failure
            error_category: Category of the error for structured handling
        """
        self.execution_metrics.finalize()
        self.execution_metrics.add_error(str(error))
        self.logger.error(
            f"Command '{self.execution_metrics.verb}' failed after "
            f"{self.execution_metrics.execution_duration:.2f}s. "
            f"Error category: {error_category.value}, Error: {error}"
        )
        if error_category in (ErrorCategory.CONSISTENCY, ErrorCategory.SYSTEM, ErrorCategory.UNKNOWN):
            self.logger.debug(f"Traceback: {traceback.format_exc()}")
        self._log_performance_metrics()

    def log_operation(self, name: str, detail: str = "") -> None:
        """Record a library operation for the execution metrics."""
        self.execution_metrics.add_operation(name)
        self.logger.debug(f"Operation: {name}{' - ' + detail if detail else ''}")

    def log_warning(self, message: str, category: ErrorCategory = ErrorCategory.UNKNOWN) -> None:
        """
        Log a warning message with categorization.

        Args:
            message: Warning message
            category: Category of the warning
        """
        self.logger.warning(f"[{category.value.upper()}] {message}")

    def log_debug(self, message: str) -> None:
        self.logger.debug(message)

    def _log_performance_metrics(self) -> None:
        """Log detailed performance metrics."""
        metrics_data = {
            'timestamp': datetime.now().isoformat(),
            'verb': self.execution_metrics.verb,
            'execution_duration_seconds': round(self.execution_metrics.execution_duration, 3),
            'total_operations': self.execution_metrics.total_operations,
            'operations': dict(self.execution_metrics.operations),
            'results_emitted': self.execution_metrics.results_emitted,
            'errors_count': len(self.execution_metrics.errors_encountered),
            'success': len(self.execution_metrics.errors_encountered) == 0
        }
        self.logger.info(f"Performance metrics: {metrics_data}")

    def get_execution_metrics(self) -> ExecutionMetrics:
        return self.execution_metrics
