"""
Declarative experiment descriptions and the built-in simulation studies
"""
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from app.core.errors import ConfigError, InvalidLevel, UnknownExample
from app.core.numerics import check_level
from app.ml.classifiers import NpLevels
from app.ml.model import LdaModel, build_flat_beta_model, calibrate_flat_beta

MethodName = Literal["elda", "felda", "umbrella_lda", "oracle"]
AxisName = Literal["n0", "n1", "p"]

ALL_METHODS: List[str] = ["elda", "felda", "umbrella_lda", "oracle"]


@dataclass(frozen=True)
class GridPoint:
    index: int
    n0: int
    n1: int
    p: int
    axis: str

    @property
    def axis_value(self) -> int:
        return getattr(self, self.axis)


class ExperimentConfig(BaseModel):
    """
    One simulation study over a single varying axis

    The grids n0_grid, n1_grid and p_grid each hold one value or G values; the
    longer grids vary together. The sample size and the dimension never vary
    together.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    name: str
    p0: Optional[int] = Field(default=None, ge=1)
    rho: float = Field(default=0.5, gt=-1.0, lt=1.0)
    beta_scale: Optional[float] = None
    calibrate_target_type2: Optional[float] = None
    n0_grid: List[int] = Field(min_length=1)
    n1_grid: List[int] = Field(min_length=1)
    p_grid: List[int] = Field(min_length=1)
    alpha: float = 0.1
    delta: float = 0.1
    reps: int = Field(default=1000, ge=1)
    test_per_class: int = Field(default=30000, ge=1)
    distribution: Literal["gaussian", "student_t"] = "gaussian"
    df: float = Field(default=4.0, gt=0.0)
    methods: List[MethodName] = Field(default_factory=lambda: list(ALL_METHODS), min_length=1)
    base_seed: int = Field(default=20220615, ge=0)
    split_frac: float = Field(default=0.5, gt=0.0, lt=1.0)

    @field_validator("alpha", "delta")
    @classmethod
    def level_inside_unit_interval(cls, v: float, info) -> float:
        return check_level(v, info.field_name)

    @field_validator("n0_grid", "n1_grid", "p_grid")
    @classmethod
    def positive_grid(cls, v: List[int], info) -> List[int]:
        if any(item < 1 for item in v):
            raise ValueError(f"{info.field_name} entries must be positive")
        return v

    @model_validator(mode="after")
    def check_design(self):
        if (self.beta_scale is None) == (self.calibrate_target_type2 is None):
            raise ValueError("set exactly one of beta_scale and calibrate_target_type2")
        lengths = {len(self.n0_grid), len(self.n1_grid), len(self.p_grid)} - {1}
        if len(lengths) > 1:
            raise ValueError("varying grids must have equal lengths")
        if len(self.p_grid) > 1 and (len(self.n0_grid) > 1 or len(self.n1_grid) > 1):
            raise ValueError("sample sizes and dimension cannot vary together")
        if len(set(self.methods)) != len(self.methods):
            raise ValueError("methods must not repeat")
        return self

    @property
    def levels(self) -> NpLevels:
        return NpLevels(alpha=self.alpha, delta=self.delta)

    @property
    def axis(self) -> str:
        if len(self.p_grid) > 1:
            return "p"
        if len(self.n1_grid) > 1 and len(self.n0_grid) == 1:
            return "n1"
        return "n0"

    @property
    def grid_size(self) -> int:
        return max(len(self.n0_grid), len(self.n1_grid), len(self.p_grid))

    def grid_points(self) -> List[GridPoint]:
        def pick(grid: List[int], i: int) -> int:
            return grid[i] if len(grid) > 1 else grid[0]

        return [
            GridPoint(i, pick(self.n0_grid, i), pick(self.n1_grid, i), pick(self.p_grid, i), self.axis)
            for i in range(self.grid_size)
        ]

    def build_model(self, p: int) -> LdaModel:
        """AR(1) model at dimension p; calibrated designs spread β over all p coordinates"""
        if self.beta_scale is not None:
            return build_flat_beta_model(p, self.rho, self.beta_scale, self.p0)
        scale = calibrate_flat_beta(p, self.rho, self.alpha, self.calibrate_target_type2)
        return build_flat_beta_model(p, self.rho, scale)


N_GRID = [20, 70, 120, 170, 220, 270, 320, 370, 500, 1000]
P_GRID = list(range(3, 31, 3))


def _example_1(name: str, **overrides) -> ExperimentConfig:
    base = dict(
        name=name,
        p0=3,
        rho=0.5,
        beta_scale=1.2,
        n0_grid=N_GRID,
        n1_grid=N_GRID,
        p_grid=[3],
        alpha=0.1,
        delta=0.1,
        reps=1000,
        test_per_class=30000,
    )
    base.update(overrides)
    return ExperimentConfig(**base)


def _example_2(name: str, n1: int) -> ExperimentConfig:
    return ExperimentConfig(
        name=name,
        rho=0.5,
        calibrate_target_type2=0.236,
        n0_grid=[125],
        n1_grid=[n1],
        p_grid=P_GRID,
        alpha=0.1,
        delta=0.1,
        reps=1000,
        test_per_class=30000,
    )


_BUILTINS: Dict[str, Callable[[], ExperimentConfig]] = {
    "toy_table1": lambda: ExperimentConfig(
        name="toy_table1",
        rho=0.0,
        beta_scale=1.2,
        n0_grid=[50],
        n1_grid=[50],
        p_grid=[3],
        alpha=0.05,
        delta=0.1,
        reps=1000,
        test_per_class=50000,
        methods=["elda", "felda", "oracle"],
    ),
    "1a": lambda: _example_1("1a"),
    "1b": lambda: _example_1("1b", n1_grid=[500]),
    "1c": lambda: _example_1("1c", n0_grid=[125], n1_grid=[125], p_grid=P_GRID),
    "1c_prime": lambda: _example_1("1c_prime", n0_grid=[125], n1_grid=[125], p_grid=P_GRID, delta=0.05),
    "1c_star": lambda: _example_1("1c_star", n0_grid=[125], n1_grid=[125], p_grid=P_GRID, delta=0.01),
    "1d": lambda: _example_1("1d", n0_grid=[125], n1_grid=[500], p_grid=P_GRID),
    "1d_prime": lambda: _example_1("1d_prime", n0_grid=[125], n1_grid=[500], p_grid=P_GRID, delta=0.05),
    "2a": lambda: _example_2("2a", 125),
    "2b": lambda: _example_2("2b", 500),
    "3": lambda: _example_1("3", distribution="student_t", df=4.0),
}

BUILTIN_IDS = tuple(_BUILTINS)


def builtin_config(example_id: str) -> ExperimentConfig:
    """
    Parameters of a built-in simulation study

    Raises:
        UnknownExample: for an unrecognized id
    """
    try:
        factory = _BUILTINS[example_id]
    except KeyError:
        raise UnknownExample(
            f"unknown example {example_id!r}; choose one of {', '.join(BUILTIN_IDS)}", example=example_id
        ) from None
    return factory()


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    """
    Read a JSON experiment description

    Raises:
        ConfigError: on unreadable files, unknown keys or violated constraints
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}", path=str(path)) from exc
    try:
        return ExperimentConfig.model_validate_json(text)
    except ValidationError as exc:
        details = "; ".join(f"{'.'.join(map(str, e['loc'])) or '<root>'}: {e['msg']}" for e in exc.errors())
        raise ConfigError(f"invalid config {path}: {details}", path=str(path)) from exc
    except InvalidLevel as exc:
        raise ConfigError(f"invalid config {path}: {exc.message}", path=str(path)) from exc


def dump_config(cfg: ExperimentConfig) -> str:
    return json.dumps(cfg.model_dump(), indent=2)
