"""Experiment driver: build query points, sweep budgets, report and plot.

The sweep runs both solvers over an ascending list of budgets with identical
settings and collects one row per budget. Each solver receives the previous
budget's solution as an extra candidate, which makes the reported losses
monotone non-increasing in the budget. Reports serialize to CSV with
17-significant-digit reals and render to a small self-contained SVG.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dataset import LabeledBatch, _format_real
from .model import Centroids, fit, nll_loss, predict
from .recourse import (
    EpsilonBudget,
    QuerySpec,
    SolverConfig,
    collective_recourse,
    individual_recourse,
)

REPORT_COLUMNS = (
    "epsilon",
    "baseline_loss",
    "individual_loss",
    "collective_loss",
    "individual_flipped",
    "collective_flipped",
)


@dataclass(frozen=True)
class SweepRow:
    epsilon: float
    baseline_loss: float
    individual_loss: float
    collective_loss: float
    individual_flipped: bool
    collective_flipped: bool


@dataclass(frozen=True)
class SweepReport:
    """Rows of a budget sweep, sorted by strictly increasing epsilon."""

    rows: tuple[SweepRow, ...]

    def __post_init__(self):
        rows = tuple(self.rows)
        eps = [row.epsilon for row in rows]
        if any(e2 <= e1 for e1, e2 in zip(eps, eps[1:])):
            raise ValueError(f"epsilons must be strictly ascending, got {eps}")
        for row in rows:
            values = (row.epsilon, row.baseline_loss, row.individual_loss, row.collective_loss)
            if not all(np.isfinite(v) and v >= 0 for v in values):
                raise ValueError(f"non-finite or negative value in row {row}")
            if row.epsilon == 0.0 and (
                abs(row.individual_loss - row.baseline_loss) > 1e-9
                or abs(row.collective_loss - row.baseline_loss) > 1e-9
            ):
                raise ValueError("zero-budget row must match the baseline loss")
        object.__setattr__(self, "rows", rows)

    def epsilons(self) -> list[float]:
        return [row.epsilon for row in self.rows]


def standardize_features(batch: LabeledBatch) -> LabeledBatch:
    """Z-score each feature column; constant columns are left unscaled."""
    mean = batch.features.mean(axis=0)
    std = batch.features.std(axis=0)
    std = np.where(std > 0, std, 1.0)
    return LabeledBatch(
        features=(batch.features - mean) / std,
        labels=batch.labels,
        num_classes=batch.num_classes,
    )


def make_query(theta: Centroids, class_a: int, class_b: int, alpha: float) -> QuerySpec:
    """Query point interpolated between two centroids, goal set to class_a.

    ``x_q = alpha * mu_a + (1 - alpha) * mu_b``; small alpha places the query
    deep inside class_b's region while asking for class_a, so reaching the
    goal requires flipping the prediction.
    """
    k = theta.num_classes
    for name, c in (("class_a", class_a), ("class_b", class_b)):
        if not 0 <= int(c) < k:
            raise ValueError(f"{name}={c} outside [0, {k - 1}]")
    if class_a == class_b:
        raise ValueError("class_a and class_b must differ")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    x_q = alpha * theta.mu[class_a] + (1.0 - alpha) * theta.mu[class_b]
    return QuerySpec(features=x_q, goal_class=int(class_a))


def sweep_epsilon(
    batch: LabeledBatch,
    query: QuerySpec,
    epsilons,
    cfg: SolverConfig = SolverConfig(),
) -> SweepReport:
    """Run both solvers at every budget and collect a report.

    Budgets must be nonnegative, finite, and strictly ascending. Both solvers
    share ``cfg``; each run evaluates the previous budget's solution as a
    warm-start candidate so the reported losses cannot increase with the
    budget (ball mode).
    """
    epsilons = [float(e) for e in epsilons]
    if not epsilons:
        raise ValueError("epsilon list must be non-empty")
    if any(not np.isfinite(e) or e < 0 for e in epsilons):
        raise ValueError(f"epsilons must be nonnegative reals, got {epsilons}")
    if any(e2 <= e1 for e1, e2 in zip(epsilons, epsilons[1:])):
        raise ValueError(f"epsilons must be strictly ascending, got {epsilons}")

    theta = fit(batch)
    baseline = None
    rows = []
    prev_individual = None
    prev_collective = None
    for eps in epsilons:
        ind_candidates = () if prev_individual is None else (prev_individual,)
        col_candidates = () if prev_collective is None else (prev_collective,)
        try:
            if baseline is None:
                baseline = nll_loss(query.features, query.goal_class, theta)
            budget = EpsilonBudget(eps)
            ind = individual_recourse(query, theta, budget, cfg, extra_candidates=ind_candidates)
            col = collective_recourse(batch, query, budget, cfg, extra_candidates=col_candidates)
        except ValueError as err:
            raise ValueError(f"sweep failed at epsilon={eps}: {err}") from err
        prev_individual = ind.perturbation
        prev_collective = col.perturbation.delta
        rows.append(
            SweepRow(
                epsilon=eps,
                baseline_loss=baseline,
                individual_loss=ind.achieved_loss,
                collective_loss=col.achieved_loss,
                individual_flipped=ind.flipped,
                collective_flipped=col.flipped,
            )
        )
    return SweepReport(tuple(rows))


def write_report_csv(report: SweepReport, path) -> None:
    """Write the sweep as CSV: 17-significant-digit reals, true/false flags."""
    try:
        with open(path, "w", newline="") as handle:
            handle.write(",".join(REPORT_COLUMNS) + "\n")
            for row in report.rows:
                handle.write(
                    ",".join(
                        [
                            _format_real(row.epsilon),
                            _format_real(row.baseline_loss),
                            _format_real(row.individual_loss),
                            _format_real(row.collective_loss),
                            "true" if row.individual_flipped else "false",
                            "true" if row.collective_flipped else "false",
                        ]
                    )
                    + "\n"
                )
    except OSError as err:
        raise OSError(f"cannot write report to {path}: {err}") from err


def read_report_csv(path) -> SweepReport:
    """Read a CSV written by :func:`write_report_csv`."""
    path = Path(path)
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header != list(REPORT_COLUMNS):
            raise ValueError(f"{path}: unexpected header {header}")
        rows = []
        for cells in reader:
            if not cells:
                continue
            rows.append(
                SweepRow(
                    epsilon=float(cells[0]),
                    baseline_loss=float(cells[1]),
                    individual_loss=float(cells[2]),
                    collective_loss=float(cells[3]),
                    individual_flipped=cells[4] == "true",
                    collective_flipped=cells[5] == "true",
                )
            )
    return SweepReport(tuple(rows))


# Fixed plot geometry; coordinates are emitted with a stable format so the
# same report always produces byte-identical SVG.
_W, _H = 640, 440
_ML, _MR, _MT, _MB = 70, 20, 20, 50
_SERIES = (("individual", "individual_loss", "#d62728"), ("collective", "collective_loss", "#1f77b4"))


def _ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    step = (hi - lo) / (count - 1)
    return [lo + i * step for i in range(count)]


def render_plot_svg(report: SweepReport, path) -> None:
    """Render loss versus budget for both solvers into a standalone SVG.

    Two labeled series with markers; polylines are drawn only when there are
    at least two rows. Lower loss means better recourse.
    """
    if not report.rows:
        raise ValueError("cannot plot an empty report")
    xs = [row.epsilon for row in report.rows]
    ys = [getattr(row, col) for _, col, _ in _SERIES for row in report.rows]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 0.5, x_hi + 0.5
    if y_hi == y_lo:
        y_lo, y_hi = y_lo - 0.5, y_hi + 0.5
    pad = 0.05 * (y_hi - y_lo)
    y_lo, y_hi = y_lo - pad, y_hi + pad

    def sx(x):
        return _ML + (x - x_lo) / (x_hi - x_lo) * (_W - _ML - _MR)

    def sy(y):
        return _H - _MB - (y - y_lo) / (y_hi - y_lo) * (_H - _MT - _MB)

    def fmt(v):
        return f"{v:.3f}"

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<line x1="{_ML}" y1="{_H - _MB}" x2="{_W - _MR}" y2="{_H - _MB}" stroke="black"/>',
        f'<line x1="{_ML}" y1="{_MT}" x2="{_ML}" y2="{_H - _MB}" stroke="black"/>',
    ]
    for tick in _ticks(x_lo, x_hi):
        px = fmt(sx(tick))
        parts.append(
            f'<line x1="{px}" y1="{_H - _MB}" x2="{px}" y2="{_H - _MB + 5}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{px}" y="{_H - _MB + 18}" font-size="11" text-anchor="middle">{tick:.3g}</text>'
        )
    for tick in _ticks(y_lo, y_hi):
        py = fmt(sy(tick))
        parts.append(f'<line x1="{_ML - 5}" y1="{py}" x2="{_ML}" y2="{py}" stroke="black"/>')
        parts.append(
            f'<text x="{_ML - 8}" y="{py}" font-size="11" text-anchor="end" '
            f'dominant-baseline="middle">{tick:.3g}</text>'
        )
    parts.append(
        f'<text x="{(_ML + _W - _MR) / 2:.1f}" y="{_H - 12}" font-size="13" '
        f'text-anchor="middle">perturbation budget (epsilon)</text>'
    )
    parts.append(
        f'<text x="16" y="{(_MT + _H - _MB) / 2:.1f}" font-size="13" text-anchor="middle" '
        f'transform="rotate(-90 16 {(_MT + _H - _MB) / 2:.1f})">loss at query for goal class</text>'
    )
    for label, column, color in _SERIES:
        points = [(sx(row.epsilon), sy(getattr(row, column))) for row in report.rows]
        if len(points) >= 2:
            coords = " ".join(f"{fmt(px)},{fmt(py)}" for px, py in points)
            parts.append(
                f'<polyline points="{coords}" fill="none" stroke="{color}" '
                f'stroke-width="2" data-series="{label}"/>'
            )
        for px, py in points:
            parts.append(
                f'<circle cx="{fmt(px)}" cy="{fmt(py)}" r="3" fill="{color}" data-series="{label}"/>'
            )
    legend_x = _W - _MR - 150
    for i, (label, _, color) in enumerate(_SERIES):
        ly = _MT + 16 + 18 * i
        parts.append(
            f'<line x1="{legend_x}" y1="{ly}" x2="{legend_x + 26}" y2="{ly}" '
            f'stroke="{color}" stroke-width="2"/>'
        )
        parts.append(
            f'<text x="{legend_x + 32}" y="{ly + 4}" font-size="12">{label}</text>'
        )
    parts.append("</svg>")
    try:
        with open(path, "w", newline="") as handle:
            handle.write("\n".join(parts) + "\n")
    except OSError as err:
        raise OSError(f"cannot write plot to {path}: {err}") from err


def describe_query(batch: LabeledBatch, query: QuerySpec) -> dict:
    """Base-model facts about a query: prediction, baseline loss, flip need."""
    theta = fit(batch)
    base_pred = predict(query.features, theta)
    return {
        "base_prediction": base_pred,
        "goal_class": query.goal_class,
        "needs_flip": base_pred != query.goal_class,
        "baseline_loss": nll_loss(query.features, query.goal_class, theta),
    }
