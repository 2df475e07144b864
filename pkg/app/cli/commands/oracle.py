"""
oracle: NP oracle of a flat-β AR(1) model
"""
import argparse
from typing import Optional

from pydantic import Field, model_validator
from rich.table import Table

from app.cli.base import BaseCommand, CommandRequest, command_registry
from app.ml.model import (
    build_flat_beta_model,
    calibrate_flat_beta,
    oracle_classifier,
    oracle_type2,
    population_errors,
)


class OracleRequest(CommandRequest):
    p: int = Field(ge=1)
    rho: float = Field(default=0.5, gt=-1.0, lt=1.0)
    p0: Optional[int] = Field(default=None, ge=1)
    beta_scale: Optional[float] = None
    target_type2: Optional[float] = None
    alpha: float = 0.1

    @model_validator(mode="after")
    def one_design(self):
        if (self.beta_scale is None) == (self.target_type2 is None):
            raise ValueError("pass exactly one of --beta-scale and --target-type2")
        return self


@command_registry.register
class OracleCommand(BaseCommand):
    name = "oracle"
    help = "print the NP oracle threshold and errors of an AR(1) model"
    request_model = OracleRequest

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--p", type=int, required=True)
        parser.add_argument("--rho", type=float)
        parser.add_argument("--p0", type=int, help="number of nonzero β entries (default: all)")
        design = parser.add_mutually_exclusive_group(required=True)
        design.add_argument("--beta-scale", dest="beta_scale", type=float)
        design.add_argument("--target-type2", dest="target_type2", type=float)
        parser.add_argument("--alpha", type=float)

    def execute(self, request: OracleRequest) -> int:
        if request.target_type2 is not None:
            scale = calibrate_flat_beta(request.p, request.rho, request.alpha, request.target_type2)
            model = build_flat_beta_model(request.p, request.rho, scale)
        else:
            scale = request.beta_scale
            model = build_flat_beta_model(request.p, request.rho, scale, request.p0)

        clf = oracle_classifier(model, request.alpha)
        errors = population_errors(model, clf)

        table = Table(title=f"NP oracle, p={request.p}, rho={request.rho}, alpha={request.alpha}")
        table.add_column("quantity")
        table.add_column("value", justify="right")
        table.add_row("beta scale", f"{scale:.6g}")
        table.add_row("Mahalanobis distance", f"{model.delta_d:.6g}")
        table.add_row("threshold", f"{clf.threshold:.6g}")
        table.add_row("type I", f"{errors.type1:.6g}")
        table.add_row("type II", f"{oracle_type2(model, request.alpha):.6g}")
        self.console.print(table)
        return 0
