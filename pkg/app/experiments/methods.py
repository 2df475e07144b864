"""
Training methods available to the experiment runner

Each method turns one repetition's training data into a LinearClassifier. The
registry maps config method names to trainers the same way for every study.
"""
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional

from app.core.errors import InsufficientSamples, NpLdaError, error_code
from app.core.logging import get_logger
from app.core.numerics import SeedSpec
from app.experiments.records import RepetitionStatus
from app.ml.classifiers import NpLevels, elda_train, felda_train, umbrella_train
from app.ml.model import LdaModel, LinearClassifier, oracle_classifier
from app.ml.sampling import LabeledSample, SampleStats

logger = get_logger(__name__)


@dataclass(frozen=True, eq=False)
class TrainingContext:
    """Everything a method may use on one repetition"""

    model: LdaModel
    sample: LabeledSample
    stats: Optional[SampleStats]
    stats_error: Optional[NpLdaError]
    levels: NpLevels
    split_seed: SeedSpec
    split_frac: float

    def require_stats(self) -> SampleStats:
        if self.stats is None:
            raise self.stats_error
        return self.stats


Trainer = Callable[[TrainingContext], LinearClassifier]


@dataclass(frozen=True)
class TrainOutcome:
    status: str
    classifier: Optional[LinearClassifier] = None


class MethodRegistry:
    """Registry of trainers keyed by method name"""

    def __init__(self):
        self.trainers: Dict[str, Trainer] = {}

    def register(self, name: str, trainer: Trainer) -> None:
        self.trainers[name] = trainer

    def names(self) -> List[str]:
        return list(self.trainers)

    def train(self, name: str, ctx: TrainingContext) -> TrainOutcome:
        """Run one trainer; failures become a status instead of propagating"""
        if name not in self.trainers:
            raise ValueError(f"Unknown method: {name}")
        try:
            return TrainOutcome(RepetitionStatus.OK.value, self.trainers[name](ctx))
        except InsufficientSamples as exc:
            if name.startswith("umbrella"):
                return TrainOutcome(RepetitionStatus.INFEASIBLE.value)
            return TrainOutcome(exc.code)
        except NpLdaError as exc:
            logger.debug("method_failed", method=name, error=exc.code, message=exc.message)
            return TrainOutcome(exc.code)
        except Exception as exc:
            logger.error("method_crashed", method=name, error=str(exc))
            return TrainOutcome(error_code(exc))


def _umbrella_lda(ctx: TrainingContext) -> LinearClassifier:
    scored = umbrella_train(ctx.sample, ctx.levels, ctx.split_seed, ctx.split_frac)
    return scored.to_linear()


method_registry = MethodRegistry()
method_registry.register("elda", lambda ctx: elda_train(ctx.require_stats(), ctx.levels))
method_registry.register("felda", lambda ctx: felda_train(ctx.require_stats(), ctx.levels))
method_registry.register("umbrella_lda", _umbrella_lda)
method_registry.register("oracle", lambda ctx: oracle_classifier(ctx.model, ctx.levels.alpha))
