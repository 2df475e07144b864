"""
NP-LDA Workbench - Main Application Package

Neyman-Pearson linear discriminant analysis without sample splitting: the
eLDA and feLDA classifiers, the NP oracle and umbrella baselines, a seeded
Monte-Carlo harness and random-matrix diagnostics.
"""

__version__ = "1.0.0"
__description__ = "Neyman-Pearson LDA classifiers and simulation harness"

from app.core.config import get_settings
from app.core.logging import get_logger, setup_logging

__all__ = [
    "__version__",
    "get_settings",
    "get_logger",
    "setup_logging",
]
