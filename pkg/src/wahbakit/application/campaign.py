import logging
from dataclasses import dataclass
from pathlib import Path

from wahbakit.config.settings import Settings, get_settings
from wahbakit.domain.simulation import (
    STUDY_SIGMA_PAIRS,
    CampaignConfig,
    DensityPoint,
    ErrorMetric,
    Histogram,
    NoiseSpec,
    density_study,
    run_campaign,
)
from wahbakit.infrastructure.io.histograms import histogram_writer_for, write_text

logger = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class CampaignResult:
    config: CampaignConfig
    histogram: Histogram


def study_filename(config: CampaignConfig, extension: str) -> str:
    s1, s2 = config.noise.sigmas_deg
    return f"hist_s1_{s1:g}_s2_{s2:g}.{extension}"


class CampaignService:
    def __init__(self, settings: Settings | None = None):
        self.settings = settings or get_settings()

    def _workers(self, workers: int | None) -> int:
        return self.settings.workers if workers is None else workers

    def run(self, config: CampaignConfig, workers: int | None = None) -> CampaignResult:
        histogram = run_campaign(config, workers=self._workers(workers), chunk_size=self.settings.chunk_size)
        logger.info(
            "Кампания завершена: %d бинов, отброшено %d",
            histogram.bin_count,
            histogram.n_rejected,
            extra={"seed": config.seed},
        )
        return CampaignResult(config=config, histogram=histogram)

    def study(
        self,
        *,
        seed: int,
        n_trials: int,
        rho_h: int,
        weights: tuple[float, float] = (1.0, 1.0),
        taste_gate: float | None = None,
        error_metric: ErrorMetric = ErrorMetric.eigen_gap,
        workers: int | None = None,
    ) -> list[CampaignResult]:
        """Шесть пар шумов с общим seed."""
        results = []
        for sigma1, sigma2 in STUDY_SIGMA_PAIRS:
            config = CampaignConfig(
                n_trials=n_trials,
                noise=NoiseSpec(sigma1_deg=sigma1, sigma2_deg=sigma2),
                rho_h=rho_h,
                seed=seed,
                weights=weights,
                taste_gate=taste_gate,
                error_metric=error_metric,
            )
            results.append(self.run(config, workers=workers))
        return results

    def write(self, result: CampaignResult, path: Path, fmt: str = "csv") -> Path:
        write_text(path, histogram_writer_for(fmt).render(result.histogram, result.config))
        return path

    def write_study(self, results: list[CampaignResult], output_dir: Path, fmt: str = "csv") -> list[Path]:
        writer = histogram_writer_for(fmt)
        return [
            self.write(result, output_dir / study_filename(result.config, writer.extension), fmt)
            for result in results
        ]

    def density(self, n_samples: int, rho_h_values: list[int], seed: int) -> list[DensityPoint]:
        return density_study(n_samples, rho_h_values, seed)
