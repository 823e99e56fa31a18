"""Command-line front end.

Four subcommands: ``fit`` prints centroids and training accuracy, ``query``
builds and describes an interpolated query point, ``recourse`` runs one solver
at a single budget, and ``sweep`` runs both solvers over a budget grid and
writes the CSV report (plus an optional SVG plot). Exit codes: 0 success,
1 usage error, 2 data or solver error. Every run prints a one-line config
echo so results can be reproduced from logs alone.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .dataset import DatasetError, LabeledBatch, _format_real, load_csv, load_embeddings
from .harness import (
    describe_query,
    make_query,
    render_plot_svg,
    standardize_features,
    sweep_epsilon,
    write_report_csv,
)
from .model import fit, nll_loss, save_centroids_csv, training_accuracy
from .recourse import (
    EpsilonBudget,
    SolverConfig,
    collective_recourse,
    individual_recourse,
)

_GRID_SNAP = 1e-12


def parse_eps_grid(text: str) -> list[float]:
    """Parse ``start:stop:step`` into an ascending grid, endpoints inclusive.

    The last point snaps to ``stop`` when it lands within 1e-12 of it, so
    grids like ``0:1:0.1`` include exactly 1.0 despite float accumulation.
    """
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"expected start:stop:step, got {text!r}")
    try:
        start, stop, step = (float(p) for p in parts)
    except ValueError:
        raise ValueError(f"non-numeric component in {text!r}") from None
    if not all(np.isfinite(v) for v in (start, stop, step)):
        raise ValueError(f"non-finite component in {text!r}")
    if start < 0:
        raise ValueError(f"grid start must be nonnegative, got {start}")
    if step <= 0:
        raise ValueError(f"grid step must be positive, got {step}")
    if stop < start:
        raise ValueError(f"grid stop {stop} below start {start}")
    values = []
    i = 0
    while True:
        value = start + i * step
        if value > stop + _GRID_SNAP:
            break
        values.append(value)
        i += 1
    if values and abs(values[-1] - stop) <= _GRID_SNAP:
        values[-1] = stop
    return values


def _parse_feature_list(text: str) -> list[str]:
    names = [cell.strip() for cell in text.split(",")]
    if any(not name for name in names):
        raise ValueError(f"empty feature name in {text!r}")
    return names


def build_parser() -> argparse.ArgumentParser:
    data = argparse.ArgumentParser(add_help=False)
    data.add_argument("--data", required=True, help="input CSV path")
    data.add_argument(
        "--label-col",
        default=None,
        help="label column name; omit to treat the last column as an integer label",
    )
    data.add_argument(
        "--features",
        default=None,
        help="comma-separated subset of feature columns (requires --label-col)",
    )
    data.add_argument(
        "--standardize",
        action="store_true",
        help="z-score features before fitting",
    )

    querying = argparse.ArgumentParser(add_help=False)
    querying.add_argument(
        "--alpha", type=float, default=0.25, help="interpolation weight toward the goal centroid"
    )
    querying.add_argument(
        "--goal-class",
        "--class-a",
        dest="goal_class",
        type=int,
        required=True,
        help="class the query should be pushed toward",
    )
    querying.add_argument(
        "--base-class",
        "--class-b",
        dest="base_class",
        type=int,
        required=True,
        help="class whose region the query starts in",
    )

    solving = argparse.ArgumentParser(add_help=False)
    solving.add_argument("--steps", type=int, default=500, help="gradient steps")
    solving.add_argument(
        "--step-size", type=float, default=None, help="step length (default: scaled from epsilon)"
    )
    solving.add_argument("--mode", choices=("ball", "sphere"), default="ball")
    solving.add_argument("--init", choices=("zero", "random"), default="zero")
    solving.add_argument("--seed", type=int, default=0)

    parser = argparse.ArgumentParser(
        prog="collective-recourse",
        description="Individual and collective recourse for a nearest-centroid classifier.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", parents=[data], help="fit centroids, print them and accuracy")
    p_fit.add_argument("--out", default=None, help="write fitted centroids to this CSV")

    sub.add_parser("query", parents=[data, querying], help="build and describe a query point")

    p_rec = sub.add_parser("recourse", parents=[data, querying, solving], help="solve one budget")
    p_rec.add_argument("--kind", choices=("individual", "collective"), required=True)
    p_rec.add_argument("--epsilon", type=float, required=True, help="perturbation budget")
    p_rec.add_argument("--out", default=None, help="write the perturbation rows to this CSV")

    p_sweep = sub.add_parser("sweep", parents=[data, querying, solving], help="sweep a budget grid")
    p_sweep.add_argument("--eps-grid", required=True, help="budget grid as start:stop:step")
    p_sweep.add_argument("--out", required=True, help="write the report CSV here")
    p_sweep.add_argument("--plot", default=None, help="also render an SVG plot here")

    return parser


def _echo_value(value) -> str:
    if value is None:
        return "auto"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return _format_real(value)
    return str(value)


_ECHO_KEYS = {
    "fit": ("data", "label_col", "features", "standardize", "out"),
    "query": ("data", "label_col", "features", "standardize", "alpha", "goal_class", "base_class"),
    "recourse": (
        "data", "label_col", "features", "standardize", "alpha", "goal_class", "base_class",
        "kind", "epsilon", "steps", "step_size", "mode", "init", "seed", "out",
    ),
    "sweep": (
        "data", "label_col", "features", "standardize", "alpha", "goal_class", "base_class",
        "eps_grid", "steps", "step_size", "mode", "init", "seed", "out", "plot",
    ),
}


def _print_config(args) -> None:
    pairs = [f"command={args.command}"]
    pairs += [f"{key}={_echo_value(getattr(args, key))}" for key in _ECHO_KEYS[args.command]]
    print("config: " + " ".join(pairs))


def _load_batch(args) -> LabeledBatch:
    if args.label_col is None:
        batch = load_embeddings(args.data)
    else:
        columns = _parse_feature_list(args.features) if args.features else None
        batch = load_csv(args.data, args.label_col, feature_columns=columns)
    if args.standardize:
        batch = standardize_features(batch)
    return batch


def _solver_config(args) -> SolverConfig:
    return SolverConfig(
        steps=args.steps,
        step_size=args.step_size,
        projection_mode=args.mode,
        init=args.init,
        seed=args.seed,
    )


def _write_delta_csv(delta: np.ndarray, path) -> None:
    with open(path, "w", newline="") as handle:
        handle.write(",".join(f"d{j}" for j in range(delta.shape[1])) + "\n")
        for row in delta:
            handle.write(",".join(_format_real(v) for v in row) + "\n")


def _run_fit(args) -> int:
    batch = _load_batch(args)
    theta = fit(batch)
    print(f"rows={batch.num_rows} dim={batch.dim} classes={batch.num_classes}")
    for y in range(theta.num_classes):
        print(f"centroid[{y}]=" + ",".join(_format_real(v) for v in theta.mu[y]))
    print(f"training_accuracy={_format_real(training_accuracy(batch, theta))}")
    if args.out is not None:
        save_centroids_csv(theta, args.out)
        print(f"wrote centroids: {args.out}")
    return 0


def _run_query(args) -> int:
    batch = _load_batch(args)
    theta = fit(batch)
    query = make_query(theta, args.goal_class, args.base_class, args.alpha)
    facts = describe_query(batch, query)
    print("query_features=" + ",".join(_format_real(v) for v in query.features))
    print(f"goal_class={facts['goal_class']}")
    print(f"base_prediction={facts['base_prediction']}")
    print("needs_flip=" + ("true" if facts["needs_flip"] else "false"))
    print(f"baseline_loss={_format_real(facts['baseline_loss'])}")
    return 0


def _run_recourse(args) -> int:
    batch = _load_batch(args)
    theta = fit(batch)
    query = make_query(theta, args.goal_class, args.base_class, args.alpha)
    budget = EpsilonBudget(args.epsilon)
    cfg = _solver_config(args)
    print(f"baseline_loss={_format_real(nll_loss(query.features, query.goal_class, theta))}")
    if args.kind == "individual":
        result = individual_recourse(query, theta, budget, cfg)
        delta = result.perturbation[None, :]
        print(f"perturbation_norm={_format_real(float(np.linalg.norm(result.perturbation)))}")
    else:
        result = collective_recourse(batch, query, budget, cfg)
        delta = result.perturbation.delta
        print(f"max_row_norm={_format_real(float(result.perturbation.row_norms().max()))}")
    print(f"achieved_loss={_format_real(result.achieved_loss)}")
    print("flipped=" + ("true" if result.flipped else "false"))
    if args.out is not None:
        _write_delta_csv(delta, args.out)
        print(f"wrote perturbation: {args.out}")
    return 0


def _run_sweep(args) -> int:
    batch = _load_batch(args)
    theta = fit(batch)
    query = make_query(theta, args.goal_class, args.base_class, args.alpha)
    report = sweep_epsilon(batch, query, args.eps_values, cfg=_solver_config(args))
    for row in report.rows:
        print(
            f"epsilon={_format_real(row.epsilon)}"
            f" individual={_format_real(row.individual_loss)}"
            f" collective={_format_real(row.collective_loss)}"
            f" flipped={'true' if row.individual_flipped else 'false'}"
            f"/{'true' if row.collective_flipped else 'false'}"
        )
    write_report_csv(report, args.out)
    print(f"wrote report: {args.out}")
    if args.plot is not None:
        render_plot_svg(report, args.plot)
        print(f"wrote plot: {args.plot}")
    return 0


_RUNNERS = {"fit": _run_fit, "query": _run_query, "recourse": _run_recourse, "sweep": _run_sweep}


def cli_main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1

    # Flag-combination checks argparse cannot express; these are usage errors.
    if args.features is not None and args.label_col is None:
        print("usage error: --features requires --label-col", file=sys.stderr)
        return 1
    if args.command in ("recourse", "sweep"):
        if args.steps < 0:
            print(f"usage error: --steps must be nonnegative, got {args.steps}", file=sys.stderr)
            return 1
    if args.command == "recourse" and not (np.isfinite(args.epsilon) and args.epsilon >= 0):
        print(f"usage error: --epsilon must be nonnegative, got {args.epsilon}", file=sys.stderr)
        return 1
    if args.command == "sweep":
        try:
            args.eps_values = parse_eps_grid(args.eps_grid)
        except ValueError as err:
            print(f"usage error: {err}", file=sys.stderr)
            return 1

    _print_config(args)
    try:
        return _RUNNERS[args.command](args)
    except (DatasetError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
