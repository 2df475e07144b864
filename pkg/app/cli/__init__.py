"""
Command-line surface of the NP-LDA Workbench
"""
from app.cli.main import build_parser, main

__all__ = ["build_parser", "main"]
