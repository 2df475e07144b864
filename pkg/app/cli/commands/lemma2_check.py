"""
lemma2-check: concentration of the sample quadratic forms around their leading terms
"""
import argparse
from pathlib import Path
from typing import Optional

from pydantic import Field

from app.cli.base import BaseCommand, CommandRequest, command_registry
from app.cli.commands.clt_check import verification_table
from app.core.numerics import SeedSpec
from app.ml.model import build_flat_beta_model, flat_beta_scale
from app.ml.rmt import verify_lemma2, write_verification_csv


class Lemma2CheckRequest(CommandRequest):
    p: int = Field(ge=1)
    n0: int = Field(ge=2)
    n1: int = Field(ge=2)
    reps: int = Field(default=200, ge=1)
    delta_d: float = Field(default=4.0, gt=0.0)
    rho: float = Field(default=0.0, gt=-1.0, lt=1.0)
    seed: Optional[int] = Field(default=None, ge=0)
    workers: Optional[int] = Field(default=None, ge=1)
    out: Optional[Path] = None


@command_registry.register
class Lemma2CheckCommand(BaseCommand):
    name = "lemma2-check"
    help = "median relative deviation of the sample quadratic forms from their leading terms"
    request_model = Lemma2CheckRequest

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--p", type=int, required=True)
        parser.add_argument("--n0", type=int, required=True)
        parser.add_argument("--n1", type=int, required=True)
        parser.add_argument("--reps", type=int)
        parser.add_argument("--delta-d", dest="delta_d", type=float, help="Mahalanobis distance (default 4)")
        parser.add_argument("--rho", type=float, help="AR(1) correlation (default 0)")
        parser.add_argument("--seed", type=int)
        parser.add_argument("--workers", type=int)
        parser.add_argument("--out", help="optional verification CSV")

    def execute(self, request: Lemma2CheckRequest) -> int:
        model = build_flat_beta_model(request.p, request.rho, flat_beta_scale(request.p, request.rho, request.delta_d))
        seed = SeedSpec(self.settings.base_seed if request.seed is None else request.seed)
        rows = verify_lemma2(
            model, request.n0, request.n1, request.reps, seed, workers=request.workers or self.settings.workers
        )
        self.console.print(verification_table("quadratic form concentration", rows))
        if request.out is not None:
            write_verification_csv(rows, request.out)
        return 0
