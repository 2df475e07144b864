"""
umbrella-k: order statistic and violation bound of the NP umbrella algorithm
"""
import argparse

from pydantic import Field
from rich.table import Table

from app.cli.base import BaseCommand, CommandRequest, command_registry
from app.ml.classifiers import NpLevels, umbrella_min_size, umbrella_order, umbrella_violation_bound


class UmbrellaRequest(CommandRequest):
    m: int = Field(ge=1)
    alpha: float
    delta: float


@command_registry.register
class UmbrellaCommand(BaseCommand):
    name = "umbrella-k"
    help = "smallest order statistic k* whose violation probability is at most delta"
    request_model = UmbrellaRequest

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--m", type=int, required=True, help="held-out class 0 count")
        parser.add_argument("--alpha", type=float, required=True)
        parser.add_argument("--delta", type=float, required=True)

    def execute(self, request: UmbrellaRequest) -> int:
        levels = NpLevels(alpha=request.alpha, delta=request.delta)
        k_star = umbrella_order(request.m, levels)

        table = Table(title=f"NP umbrella order, m={request.m}, alpha={levels.alpha}, delta={levels.delta}")
        table.add_column("quantity")
        table.add_column("value", justify="right")
        table.add_row("minimum held-out size", str(umbrella_min_size(levels.alpha, levels.delta)))
        if k_star is None:
            table.add_row("k*", "infeasible")
        else:
            table.add_row("k*", str(k_star))
            table.add_row("violation bound at k*", f"{umbrella_violation_bound(request.m, k_star, levels.alpha):.6g}")
            if k_star > 1:
                previous = umbrella_violation_bound(request.m, k_star - 1, levels.alpha)
                table.add_row("violation bound at k*-1", f"{previous:.6g}")
        self.console.print(table)
        return 0
