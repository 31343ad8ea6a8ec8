"""Model comparison artifacts: metrics table, ranking, and bar chart."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import SchemaViolationError
from .metrics import mae, r2_score, rmse
from . import svgutil


@dataclass(frozen=True)
class ModelScore:
    model_name: str
    r2: float
    rmse: float
    mae: float
    n_test: int
    rss: float | None = None
    tss: float | None = None


@dataclass(frozen=True)
class EvaluationReport:
    entries: tuple[ModelScore, ...]
    ranking: tuple[str, ...]


def score_predictions(model_name: str, y_true, y_pred) -> ModelScore:
    """Score one model on held-out data."""
    yt = np.asarray(y_true, dtype=np.float64)
    yp = np.asarray(y_pred, dtype=np.float64)
    r2 = r2_score(yt, yp)
    rss = float(((yt - yp) ** 2).sum())
    tss = float(((yt - yt.mean()) ** 2).sum())
    return ModelScore(
        model_name=model_name,
        r2=r2,
        rmse=rmse(yt, yp),
        mae=mae(yt, yp),
        n_test=int(yt.shape[0]),
        rss=rss,
        tss=tss,
    )


def build_report(entries: Sequence[ModelScore]) -> EvaluationReport:
    """Rank models by descending R^2; ties break alphabetically."""
    if not entries:
        raise ValueError("need at least one model entry")
    ordered = sorted(entries, key=lambda e: (-e.r2, e.model_name))
    return EvaluationReport(
        entries=tuple(ordered),
        ranking=tuple(e.model_name for e in ordered),
    )


def compare_models(entries: Sequence[ModelScore], csv_path: str | Path,
                   svg_path: str | Path) -> EvaluationReport:
    """Rank the entries and emit the metrics CSV plus the R^2 bar chart."""
    report = build_report(entries)
    write_comparison_csv(report, csv_path)
    render_comparison_svg(report, svg_path)
    return report


def write_comparison_csv(report: EvaluationReport, path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["model", "r2", "rmse", "mae", "n_test"])
        for e in report.entries:
            writer.writerow([e.model_name, repr(e.r2), repr(e.rmse), repr(e.mae), e.n_test])


def read_comparison_csv(path: str | Path) -> EvaluationReport:
    """Load a previously written comparison table (for re-rendering)."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(str(path))
    entries = []
    with path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:5]] != ["model", "r2", "rmse", "mae", "n_test"]:
            raise SchemaViolationError(f"{path}: expected header model,r2,rmse,mae,n_test")
        for i, row in enumerate(reader):
            if len(row) < 5:
                raise SchemaViolationError(f"{path}: row {i + 1} has {len(row)} cells")
            try:
                entries.append(ModelScore(
                    model_name=row[0],
                    r2=float(row[1]),
                    rmse=float(row[2]),
                    mae=float(row[3]),
                    n_test=int(row[4]),
                ))
            except ValueError as exc:
                raise SchemaViolationError(f"{path}: row {i + 1}: {exc}") from None
    if not entries:
        raise SchemaViolationError(f"{path}: no model rows")
    return build_report(entries)


def format_comparison_table(report: EvaluationReport) -> str:
    """Fixed-width text table, ranking order."""
    lines = [f"{'model':<10} {'r2':>10} {'rmse':>10} {'mae':>10} {'n_test':>7}"]
    for e in report.entries:
        lines.append(
            f"{e.model_name:<10} {e.r2:>10.4f} {e.rmse:>10.4f} {e.mae:>10.4f} {e.n_test:>7d}"
        )
    return "\n".join(lines) + "\n"


_BAR_FILL = "#2e6da4"
_BAR_W = 80.0
_GAP = 40.0
_CHART_H = 220.0
_BASE_Y = 260.0
_MARGIN = 50.0


def render_comparison_svg(report: EvaluationReport, path: str | Path) -> None:
    """Bar chart of R^2 per model, sorted descending, labeled to 2 decimals.

    Negative scores draw downward from the zero baseline.
    """
    k = len(report.entries)
    width = 2 * _MARGIN + k * _BAR_W + (k - 1) * _GAP
    top = max([1.0] + [e.r2 for e in report.entries])
    bottom = min([0.0] + [e.r2 for e in report.entries])
    scale = _CHART_H / (top - bottom)
    base_y = _MARGIN + 20 + (top - 0.0) * scale
    height = base_y + abs(bottom) * scale + 60

    body = [svgutil.rect(0, 0, width, height, "#ffffff")]
    body.append(svgutil.text(width / 2, 24, "Model accuracy comparison (R^2)", size=14))
    body.append(svgutil.line(_MARGIN / 2, base_y, width - _MARGIN / 2, base_y))
    for i, e in enumerate(report.entries):
        x = _MARGIN + i * (_BAR_W + _GAP)
        h = abs(e.r2) * scale
        y = base_y - h if e.r2 >= 0 else base_y
        body.append(svgutil.rect(x, y, _BAR_W, h, _BAR_FILL))
        label_y = y - 6 if e.r2 >= 0 else y + h + 14
        body.append(svgutil.text(x + _BAR_W / 2, label_y, f"{e.r2:.2f}", size=12))
        body.append(svgutil.text(x + _BAR_W / 2, base_y + abs(bottom) * scale + 30,
                                 e.model_name, size=12))
    Path(path).write_text(svgutil.document(width, height, body), encoding="utf-8")
