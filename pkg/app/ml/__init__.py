"""
Statistical core of the NP-LDA Workbench

Components:
- model.py: population LDA model, NP oracle, closed-form population errors
- sampling.py: Gaussian and multivariate t sampling, pooled sample statistics
- classifiers.py: eLDA, feLDA and the NP umbrella algorithm
- rmt.py: Marchenko-Pastur transforms and Monte-Carlo verification sweeps
- screening.py: t-test feature screening and repeated-split evaluation
"""

from app.ml.classifiers import NpLevels, elda_train, felda_train, umbrella_train
from app.ml.model import LdaModel, LinearClassifier, oracle_classifier, population_errors
from app.ml.sampling import LabeledSample, SampleStats, compute_stats

__all__ = [
    "NpLevels",
    "elda_train",
    "felda_train",
    "umbrella_train",
    "LdaModel",
    "LinearClassifier",
    "oracle_classifier",
    "population_errors",
    "LabeledSample",
    "SampleStats",
    "compute_stats",
]
