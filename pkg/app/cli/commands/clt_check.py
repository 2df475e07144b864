"""
clt-check: Monte-Carlo check of the Gaussian fluctuation of the eLDA threshold
"""
import argparse
from pathlib import Path
from typing import Optional

from pydantic import Field
from rich.table import Table

from app.cli.base import BaseCommand, CommandRequest, command_registry
from app.core.numerics import SeedSpec
from app.ml.classifiers import NpLevels
from app.ml.model import build_flat_beta_model, flat_beta_scale
from app.ml.rmt import VerificationRow, verify_theta_clt, write_verification_csv


class CltCheckRequest(CommandRequest):
    p: int = Field(ge=1)
    n0: int = Field(ge=2)
    n1: int = Field(ge=2)
    alpha: float = 0.05
    delta: float = 0.1
    reps: int = Field(default=2000, ge=2)
    delta_d: float = Field(default=4.0, gt=0.0)
    rho: float = Field(default=0.0, gt=-1.0, lt=1.0)
    seed: Optional[int] = Field(default=None, ge=0)
    workers: Optional[int] = Field(default=None, ge=1)
    out: Optional[Path] = None


def verification_table(title: str, rows) -> Table:
    table = Table(title=title)
    for column in ("quantity", "n", "p", "r", "median rel dev", "KS", "var Z"):
        table.add_column(column, justify="left" if column == "quantity" else "right")

    def fmt(value: Optional[float]) -> str:
        return "-" if value is None else f"{value:.4g}"

    for row in rows:
        table.add_row(
            row.quantity, str(row.n), str(row.p), f"{row.r:.4g}", fmt(row.median_rel_dev), fmt(row.ks_stat), fmt(row.var_z)
        )
    return table


@command_registry.register
class CltCheckCommand(BaseCommand):
    name = "clt-check"
    help = "KS distance of the standardized eLDA threshold error to N(0, 1)"
    request_model = CltCheckRequest

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--p", type=int, required=True)
        parser.add_argument("--n0", type=int, required=True)
        parser.add_argument("--n1", type=int, required=True)
        parser.add_argument("--alpha", type=float)
        parser.add_argument("--delta", type=float)
        parser.add_argument("--reps", type=int)
        parser.add_argument("--delta-d", dest="delta_d", type=float, help="Mahalanobis distance (default 4)")
        parser.add_argument("--rho", type=float, help="AR(1) correlation (default 0, identity covariance)")
        parser.add_argument("--seed", type=int)
        parser.add_argument("--workers", type=int)
        parser.add_argument("--out", help="optional verification CSV")

    def execute(self, request: CltCheckRequest) -> int:
        model = build_flat_beta_model(request.p, request.rho, flat_beta_scale(request.p, request.rho, request.delta_d))
        seed = SeedSpec(self.settings.base_seed if request.seed is None else request.seed)
        row: VerificationRow = verify_theta_clt(
            model,
            NpLevels(alpha=request.alpha, delta=request.delta),
            request.n0,
            request.n1,
            request.reps,
            seed,
            workers=request.workers or self.settings.workers,
        )
        self.console.print(verification_table("threshold CLT check", [row]))
        if request.out is not None:
            write_verification_csv([row], request.out)
        return 0
