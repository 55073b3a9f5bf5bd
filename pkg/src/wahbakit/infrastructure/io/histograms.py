import csv
import io
import json
from pathlib import Path
from typing import Any

from wahbakit.domain.errors import InputError
from wahbakit.domain.readers import HistogramWriter
from wahbakit.domain.simulation import CampaignConfig, Histogram


def histogram_to_dict(histogram: Histogram, config: CampaignConfig) -> dict[str, Any]:
    edges = histogram.bin_edges.tolist()
    return {
        "config": {
            "seed": config.seed,
            "sigma1_deg": config.noise.sigma1_deg,
            "sigma2_deg": config.noise.sigma2_deg,
            "rho_h": config.rho_h,
            "n_trials": config.n_trials,
            "n_rejected": histogram.n_rejected,
            "weights": list(config.weights),
            "error_metric": config.error_metric.value,
            "taste_gate": config.taste_gate,
        },
        "bins": [
            {"bin_lo": lo, "bin_hi": hi, "count": count}
            for lo, hi, count in zip(edges[:-1], edges[1:], histogram.counts.tolist(), strict=True)
        ],
    }


class CsvHistogramWriter(HistogramWriter):
    extension = "csv"

    def render(self, histogram: Histogram, config: CampaignConfig) -> str:
        buffer = io.StringIO()
        writer = csv.DictWriter(buffer, fieldnames=["bin_lo", "bin_hi", "count"], lineterminator="\n")
        writer.writeheader()
        writer.writerows(histogram_to_dict(histogram, config)["bins"])
        return buffer.getvalue()


class JsonHistogramWriter(HistogramWriter):
    extension = "json"

    def render(self, histogram: Histogram, config: CampaignConfig) -> str:
        return json.dumps(histogram_to_dict(histogram, config), indent=2) + "\n"


def histogram_writer_for(fmt: str) -> HistogramWriter:
    return JsonHistogramWriter() if fmt == "json" else CsvHistogramWriter()


def write_text(path: Path, text: str) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    except OSError as e:
        raise InputError(f"Не удалось записать {path}: {e}") from e
