"""
rmt-check: numeric checks of the Marchenko-Pastur closed forms at one aspect ratio
"""
import argparse
import json
import sys
from pathlib import Path
from typing import Optional

import pandas as pd
from pydantic import Field
from rich.table import Table

from app.cli.base import BaseCommand, CommandRequest, command_registry
from app.core.output import write_frame
from app.ml.rmt import MpParams, mp_identity_report, mp_values_at_zero


class RmtCheckRequest(CommandRequest):
    r: float = Field(gt=0.0, lt=1.0)
    grid: int = Field(default=100, ge=5)
    out: Optional[Path] = None


@command_registry.register
class RmtCheckCommand(BaseCommand):
    name = "rmt-check"
    help = "check the self-consistent equations and derivative values of the MP transforms"
    request_model = RmtCheckRequest

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--r", type=float, required=True, help="aspect ratio p/n in (0, 1)")
        parser.add_argument("--grid", type=int, help="number of complex test points (default 100)")
        parser.add_argument("--out", help="optional CSV file for the check table")

    def execute(self, request: RmtCheckRequest) -> int:
        params = MpParams(request.r)
        values = mp_values_at_zero(request.r)
        checks = mp_identity_report(request.r, request.grid)

        summary = Table(title=f"Marchenko-Pastur values at 0, r={request.r}")
        summary.add_column("quantity")
        summary.add_column("value", justify="right")
        summary.add_row("lambda_minus", f"{params.lambda_minus:.10g}")
        summary.add_row("lambda_plus", f"{params.lambda_plus:.10g}")
        for key, value in vars(values).items():
            summary.add_row(key, f"{value:.10g}")
        self.console.print(summary)

        table = Table(title="identity checks")
        table.add_column("check")
        table.add_column("max error", justify="right")
        table.add_column("tolerance", justify="right")
        table.add_column("passed")
        for check in checks:
            table.add_row(check.name, f"{check.max_error:.3e}", f"{check.tolerance:.0e}", "yes" if check.passed else "NO")
        self.console.print(table)

        if request.out is not None:
            frame = pd.DataFrame(
                [
                    {"check": c.name, "max_error": c.max_error, "tolerance": c.tolerance, "passed": c.passed}
                    for c in checks
                ]
            )
            write_frame(frame, request.out)

        failed = [check.name for check in checks if not check.passed]
        if failed:
            self.logger.error("identity_checks_failed", checks=failed, r=request.r)
            print(json.dumps({"error": "identity_check_failed", "message": ", ".join(failed)}), file=sys.stderr)
            return 1
        return 0
