"""
Subcommands of the NP-LDA command line

Importing this package registers every command with ``command_registry``.
"""
from app.cli.commands import (  # noqa: F401
    clt_check,
    lemma2_check,
    oracle,
    rmt_check,
    screen,
    simulate,
    umbrella,
)
