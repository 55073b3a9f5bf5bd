from pathlib import Path
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

from wahbakit.domain.simulation import ErrorMetric
from wahbakit.domain.solvers import SolverMethod


class SolveRequest(BaseModel):
    input: Path
    method: SolverMethod = SolverMethod.recursive
    tol: float | None = Field(None, gt=0.0)
    max_iter: int | None = Field(None, ge=1)
    renormalize: bool = False
    format: Literal["json", "csv"] = "json"
    output: Path | None = None


class CompareRequest(BaseModel):
    input: Path
    tol: float | None = Field(None, gt=0.0)
    max_iter: int | None = Field(None, ge=1)
    renormalize: bool = False
    format: Literal["json", "csv"] = "json"
    output: Path | None = None


class SimulateRequest(BaseModel):
    seed: int = Field(..., ge=0, lt=2**64)
    sigma1: float | None = Field(None, ge=0.0, le=30.0)
    sigma2: float | None = Field(None, ge=0.0, le=30.0)
    study: bool = False
    trials: int = Field(10_000, gt=0)
    rho_h: int = Field(100, gt=0)
    w1: float = Field(1.0, gt=0.0)
    w2: float = Field(1.0, gt=0.0)
    taste_gate: float | None = Field(None, gt=0.0)
    metric: ErrorMetric = ErrorMetric.eigen_gap
    workers: int | None = Field(None, ge=1)
    format: Literal["csv", "json"] = "csv"
    output: Path | None = None
    output_dir: Path = Path(".")

    @model_validator(mode="after")
    def check_noise(self) -> "SimulateRequest":
        if not self.study and (self.sigma1 is None or self.sigma2 is None):
            raise ValueError("Нужны --sigma1 и --sigma2 либо --study")
        if self.study and self.output is not None:
            raise ValueError("--study пишет в --output-dir, --output не применяется")
        return self


class DensityRequest(BaseModel):
    seed: int = Field(..., ge=0, lt=2**64)
    samples: int = Field(100_000, gt=0)
    rho_h: list[int] = Field(default_factory=lambda: [10, 30, 100, 300, 1000])
    format: Literal["json", "csv"] = "json"
    output: Path | None = None

    @model_validator(mode="after")
    def check_rho_h(self) -> "DensityRequest":
        if not self.rho_h or any(h <= 0 for h in self.rho_h):
            raise ValueError("--rho-h: нужны положительные значения")
        return self


# --- выходные документы -----------------------------------------------------------


class SolveReportSchema(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    method: SolverMethod
    q: list[float] = Field(..., min_length=4, max_length=4)
    lambda_: float = Field(..., alias="lambda")
    iterations: int = Field(..., ge=0)
    residual: float = Field(..., ge=0.0)
    taste: float
    lambda_history: list[float] = Field(default_factory=list)


class CompareRowSchema(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    method: SolverMethod
    lambda_: float | None = Field(None, alias="lambda")
    gap: float | None = Field(None, ge=0.0)
    iterations: int | None = None
    residual: float | None = None
    taste: float | None = None
    wall_time_ns: int = Field(..., ge=0)
    error: str | None = None


class HistogramConfigSchema(BaseModel):
    seed: int
    sigma1_deg: float
    sigma2_deg: float
    rho_h: int
    n_trials: int
    n_rejected: int
    weights: list[float]
    error_metric: ErrorMetric
    taste_gate: float | None = None


class HistogramBinSchema(BaseModel):
    bin_lo: float
    bin_hi: float
    count: int = Field(..., ge=0)


class HistogramSchema(BaseModel):
    config: HistogramConfigSchema
    bins: list[HistogramBinSchema]

    @model_validator(mode="after")
    def check_totals(self) -> "HistogramSchema":
        total = sum(b.count for b in self.bins) + self.config.n_rejected
        if total != self.config.n_trials:
            raise ValueError(f"Σcount + n_rejected = {total} != n_trials = {self.config.n_trials}")
        return self


class DensityRowSchema(BaseModel):
    rho_h: int
    n_bins: int
    l1_error: float
