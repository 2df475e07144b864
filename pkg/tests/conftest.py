"""
Shared fixtures for the NP-LDA test suite
"""
import importlib
import io

import numpy as np
import pytest
from rich.console import Console

from app.core.config import reset_settings
from app.core.linalg import SpdMatrix, ar1_matrix
from app.ml.classifiers import NpLevels
from app.ml.model import LdaModel, build_flat_beta_model
from app.ml.sampling import LabeledSample


@pytest.fixture(autouse=True)
def fresh_settings(monkeypatch):
    """Each test sees the environment it sets, never a cached Settings"""
    for key in ("ENV", "DEBUG", "LOG_LEVEL", "LOG_FORMAT", "WORKERS", "BASE_SEED", "OUTPUT_DIR", "PARALLEL_BACKEND"):
        monkeypatch.delenv(key, raising=False)
    reset_settings()
    yield
    reset_settings()


@pytest.fixture(autouse=True)
def plain_structlog(monkeypatch):
    """Keep structlog on its defaults so capture_logs sees every event"""
    # app.cli re-exports the main function, so patch the module object itself
    monkeypatch.setattr(importlib.import_module("app.cli.main"), "setup_logging", lambda: None)


@pytest.fixture
def identity_model() -> LdaModel:
    """Σ = I₃, μ⁰ = 0, μ¹ = 1.2·1"""
    return LdaModel(mu0=np.zeros(3), mu1=np.full(3, 1.2), sigma=SpdMatrix(np.eye(3)))


@pytest.fixture
def ar_model() -> LdaModel:
    """AR(1) with ρ = 0.5 and β = 1.2·1₃"""
    return build_flat_beta_model(3, 0.5, 1.2)


@pytest.fixture
def ar3():
    return ar1_matrix(3, 0.5)


@pytest.fixture
def hand_sample() -> LabeledSample:
    """p = 1, class 0 = {0, 2}, class 1 = {1, 3}"""
    return LabeledSample(np.array([[0.0], [2.0]]), np.array([[1.0], [3.0]]))


@pytest.fixture
def levels() -> NpLevels:
    return NpLevels(alpha=0.05, delta=0.1)


@pytest.fixture
def console() -> Console:
    return Console(file=io.StringIO(), width=200, color_system=None)
