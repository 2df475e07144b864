"""
Core utilities for the NP-LDA Workbench

This module contains fundamental components:
- config: Application configuration and settings
- logging: Structured logging utilities
- errors: Error taxonomy with machine-readable codes
- numerics: Normal CDF/quantile, binomial tails and seeded random streams
- linalg: SPD matrices, Cholesky solves and AR(1) covariances
- output: CSV writing
"""

from app.core.config import get_settings, reset_settings, Settings
from app.core.errors import NpLdaError, error_code
from app.core.logging import get_logger, setup_logging

__all__ = [
    # Configuration
    "get_settings",
    "reset_settings",
    "Settings",
    # Errors
    "NpLdaError",
    "error_code",
    # Logging
    "get_logger",
    "setup_logging",
]
