"""Синтез измерений и испытания Монте-Карло для оценки первого порядка.

Модель шума: поворот направления вокруг случайной оси, ортогональной ему,
на угол θ ~ N(0, σ). Опорные векторы равномерны на сфере с углом между ними
в [30°, 150°]. Веса по умолчанию (1, 1).
"""
import enum
import logging
import math
import multiprocessing
from collections import Counter
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, ConfigDict, Field, field_validator

from wahbakit.domain.davenport import build_system
from wahbakit.domain.errors import ConfigError, NumericalError
from wahbakit.domain.measurements import MeasurementSet
from wahbakit.domain.quaternion import (
    Quaternion,
    attitude_matrix,
    canonicalize,
    conjugate,
    quat_mul,
    rotation_angle,
)
from wahbakit.domain.solvers import first_order, q_method

logger = logging.getLogger(__name__)

MIN_SEPARATION_DEG = 30.0
MAX_SEPARATION_DEG = 150.0
ZERO_RANGE = 1e-12
NEGATIVE_SLACK = 1e-12

# Шесть пар (σ₁, σ₂) в градусах из исследования распределения ошибки
STUDY_SIGMA_PAIRS: tuple[tuple[float, float], ...] = (
    (0.1, 0.1),
    (0.1, 0.5),
    (0.1, 1.0),
    (0.5, 0.5),
    (0.5, 1.0),
    (1.0, 1.0),
)


class ErrorMetric(str, enum.Enum):
    eigen_gap = "eigen_gap"  # λ_m − λ₁
    rotation_angle = "rotation_angle"  # угол между q₁ и q_m, градусы


class NoiseSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    sigma1_deg: float = Field(..., ge=0.0, le=30.0)
    sigma2_deg: float = Field(..., ge=0.0, le=30.0)

    @property
    def sigmas_deg(self) -> tuple[float, float]:
        return self.sigma1_deg, self.sigma2_deg

    @property
    def mean_variance_rad(self) -> float:
        """σ̄² в рад²."""
        return (math.radians(self.sigma1_deg) ** 2 + math.radians(self.sigma2_deg) ** 2) / 2.0


class CampaignConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    n_trials: int = Field(..., gt=0)
    noise: NoiseSpec
    rho_h: int = Field(..., gt=0, description="Плотность гистограммы: испытаний на бин")
    seed: int = Field(..., ge=0, lt=2**64)
    weights: tuple[float, float] = (1.0, 1.0)
    taste_gate: float | None = Field(None, gt=0.0, description="Порог TASTE в единицах λ₀·σ̄²")
    error_metric: ErrorMetric = ErrorMetric.eigen_gap

    @field_validator("weights")
    @classmethod
    def validate_weights(cls, v: tuple[float, float]) -> tuple[float, float]:
        if any(w <= 0.0 or not math.isfinite(w) for w in v):
            raise ValueError(f"Веса должны быть положительными, получено {v}")
        return v

    @property
    def lambda0(self) -> float:
        return float(sum(self.weights))


@dataclass(frozen=True, slots=True)
class Histogram:
    bin_edges: NDArray[np.float64]
    counts: NDArray[np.int64]
    n_total: int
    n_rejected: int

    @property
    def bin_count(self) -> int:
        return int(self.counts.shape[0])

    @property
    def n_accepted(self) -> int:
        return int(self.counts.sum())

    def mass_below(self, x: float) -> float:
        """Доля принятых испытаний в бинах, целиком лежащих в [0, x]."""
        if self.n_accepted == 0:
            return 0.0
        inside = self.bin_edges[1:] <= x
        return float(self.counts[inside].sum()) / self.n_accepted


@dataclass(frozen=True, slots=True)
class TrialOutcome:
    index: int
    error: float | None
    taste: float | None = None
    reason: str | None = None

    @property
    def rejected(self) -> bool:
        return self.error is None


# --- генераторы -----------------------------------------------------------------


def trial_rng(seed: int, index: int) -> np.random.Generator:
    """Независимый поток для испытания ``index``; не зависит от числа процессов."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def random_unit_vector(rng: np.random.Generator) -> NDArray[np.float64]:
    while True:
        v = rng.standard_normal(3)
        n = np.linalg.norm(v)
        if n > 1e-12:
            return v / n


def random_unit_quaternion(rng: np.random.Generator, canonical: bool = True) -> Quaternion:
    """Равномерно на S³: четыре стандартные нормали, нормированные."""
    while True:
        q = rng.standard_normal(4)
        n = np.linalg.norm(q)
        if n > 1e-12:
            q = q / n
            return canonicalize(q) if canonical else q


def perturb_direction(v: ArrayLike, sigma_deg: float, rng: np.random.Generator) -> NDArray[np.float64]:
    """Повернуть v вокруг случайной оси a ⊥ v на θ ~ N(0, σ)."""
    v = np.asarray(v, dtype=np.float64)
    if sigma_deg < 0.0:
        raise ValueError(f"sigma_deg должен быть >= 0, получено {sigma_deg}")
    if sigma_deg == 0.0:
        return v.copy()
    while True:
        a = rng.standard_normal(3)
        a -= (a @ v) * v
        n = np.linalg.norm(a)
        if n > 1e-12:
            break
    a /= n
    theta = rng.normal(0.0, math.radians(sigma_deg))
    # формула Родрига при a ⊥ v
    return math.cos(theta) * v + math.sin(theta) * np.cross(a, v)


def synth_trial(
    q_true: ArrayLike,
    noise: NoiseSpec,
    weights: tuple[float, float],
    rng: np.random.Generator,
) -> MeasurementSet:
    A = attitude_matrix(q_true)
    while True:
        r1 = random_unit_vector(rng)
        r2 = random_unit_vector(rng)
        separation = math.degrees(math.acos(float(np.clip(r1 @ r2, -1.0, 1.0))))
        if MIN_SEPARATION_DEG <= separation <= MAX_SEPARATION_DEG:
            break
    body = [
        perturb_direction(A @ r, sigma, rng)
        for r, sigma in zip((r1, r2), noise.sigmas_deg, strict=True)
    ]
    return MeasurementSet.from_arrays(body, [r1, r2], weights)


# --- испытания ------------------------------------------------------------------


def _trial(config: CampaignConfig, rng: np.random.Generator) -> tuple[float, float]:
    q_true = random_unit_quaternion(rng)
    sys = build_system(synth_trial(q_true, config.noise, config.weights, rng))
    oracle = q_method(sys)
    estimate = first_order(sys)
    if config.error_metric is ErrorMetric.rotation_angle:
        error = math.degrees(rotation_angle(quat_mul(estimate.q, conjugate(oracle.q))))
    else:
        error = oracle.eigenvalue - estimate.eigenvalue
    return error, oracle.taste


def run_trial(config: CampaignConfig, rng: np.random.Generator) -> float:
    """Одно испытание: параметр ошибки λ_m − λ₁ (или угол, см. error_metric).

    Raises:
        NearSingularError: первый порядок не определён (поворот ~180°)
    """
    error, _ = _trial(config, rng)
    return error


def evaluate_trial(config: CampaignConfig, index: int) -> TrialOutcome:
    try:
        error, trial_taste = _trial(config, trial_rng(config.seed, index))
    except NumericalError as e:
        logger.debug("Испытание %d отброшено: %s", index, e.code)
        return TrialOutcome(index=index, error=None, reason=e.code)

    threshold = (config.taste_gate or 0.0) * config.lambda0 * config.noise.mean_variance_rad
    if threshold > 0.0 and trial_taste > threshold:
        return TrialOutcome(index=index, error=None, taste=trial_taste, reason="taste")
    return TrialOutcome(index=index, error=error, taste=trial_taste)


def build_histogram(errors: ArrayLike, n_total: int, n_rejected: int, rho_h: int) -> Histogram:
    """Равные бины на [0, max(max ошибки, 1e-12)]; число бинов round(n_total / ρ_H)."""
    errors = np.asarray(errors, dtype=np.float64)
    if errors.size and errors.min() < -NEGATIVE_SLACK:
        logger.warning(
            "Отрицательный параметр ошибки %.3g: нарушена граница Рэлея", float(errors.min())
        )
    errors = np.clip(errors, 0.0, None)
    n_bins = max(1, round(n_total / rho_h))
    # округление порядка 1e-16 при нулевом шуме попадает в первый бин
    upper = max(float(errors.max()) if errors.size else 0.0, ZERO_RANGE)
    edges = np.linspace(0.0, upper, n_bins + 1)
    counts, _ = np.histogram(errors, bins=edges)
    return Histogram(bin_edges=edges, counts=counts.astype(np.int64), n_total=n_total, n_rejected=n_rejected)


def _run_chunk(task: tuple[CampaignConfig, range]) -> list[TrialOutcome]:
    config, indices = task
    return [evaluate_trial(config, index) for index in indices]


def collect_outcomes(
    config: CampaignConfig, workers: int = 1, chunk_size: int = 500
) -> list[TrialOutcome]:
    """Все испытания кампании в порядке индексов."""
    if chunk_size < 1:
        raise ConfigError(f"chunk_size должен быть >= 1, получено {chunk_size}")
    tasks = [
        (config, range(start, min(start + chunk_size, config.n_trials)))
        for start in range(0, config.n_trials, chunk_size)
    ]
    if workers <= 1 or len(tasks) == 1:
        chunks = [_run_chunk(task) for task in tasks]
    else:
        with multiprocessing.Pool(processes=min(workers, len(tasks))) as pool:
            # map сохраняет порядок задач
            chunks = pool.map(_run_chunk, tasks)
    return [outcome for chunk in chunks for outcome in chunk]


def run_campaign(config: CampaignConfig, workers: int = 1, chunk_size: int = 500) -> Histogram:
    """Гистограмма параметра ошибки; результат не зависит от ``workers``.

    Raises:
        ConfigError: n_trials < rho_h (меньше одного бина)
    """
    if config.n_trials < config.rho_h:
        raise ConfigError(
            f"n_trials ({config.n_trials}) меньше rho_h ({config.rho_h}): гистограмма без бинов"
        )
    logger.info(
        "Кампания: %d испытаний, σ = (%g°, %g°)",
        config.n_trials,
        config.noise.sigma1_deg,
        config.noise.sigma2_deg,
        extra={"seed": config.seed, "workers": workers, "rho_h": config.rho_h},
    )
    outcomes = collect_outcomes(config, workers=workers, chunk_size=chunk_size)
    errors = [o.error for o in outcomes if o.error is not None]
    n_rejected = len(outcomes) - len(errors)
    if n_rejected:
        reasons = Counter(o.reason for o in outcomes if o.rejected)
        logger.warning("Отброшено %d испытаний", n_rejected, extra={"reasons": dict(reasons)})
    return build_histogram(errors, n_total=config.n_trials, n_rejected=n_rejected, rho_h=config.rho_h)


# --- плотность гистограммы ------------------------------------------------------


@dataclass(frozen=True, slots=True)
class DensityPoint:
    rho_h: int
    n_bins: int
    l1_error: float


def reconstruct_gaussian(
    n_samples: int, rho_h: int, seed: int, sigma: float = 0.1
) -> tuple[Histogram, float]:
    """Гистограмма выборки N(0, σ) при плотности ρ_H и L1-расстояние до точных масс бинов."""
    rng = np.random.default_rng(seed)
    samples = rng.normal(0.0, sigma, n_samples)
    n_bins = max(1, round(n_samples / rho_h))
    counts, edges = np.histogram(samples, bins=n_bins)
    cdf = np.array([0.5 * (1.0 + math.erf(x / (sigma * math.sqrt(2.0)))) for x in edges])
    l1_error = float(np.sum(np.abs(counts / n_samples - np.diff(cdf))))
    hist = Histogram(bin_edges=edges, counts=counts.astype(np.int64), n_total=n_samples, n_rejected=0)
    return hist, l1_error


def density_study(n_samples: int, rho_h_values: ArrayLike, seed: int, sigma: float = 0.1) -> list[DensityPoint]:
    points = []
    for rho_h in np.asarray(rho_h_values, dtype=np.int64).tolist():
        hist, l1_error = reconstruct_gaussian(n_samples, rho_h, seed, sigma)
        points.append(DensityPoint(rho_h=rho_h, n_bins=hist.bin_count, l1_error=l1_error))
    return points
