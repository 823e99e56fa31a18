"""Budgeted recourse solvers for the nearest-centroid model.

Two ways to lower the model's loss on a query point for a desired class:

* individual: the query subject perturbs their own features within an L2
  budget while the model stays fixed;
* collective: every training row perturbs within the same per-row budget and
  the model is refit, so the query's prediction changes through the updated
  centroids. The refit is closed form, which collapses the nested
  train-then-attack problem into a single constrained minimization.

Both solvers run deterministic projected gradient descent with normalized
descent directions and a linearly decaying step size, and report the best
iterate seen. Budgets are per-vector L2 balls; ``sphere`` mode instead
rescales every iterate onto the budget sphere.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import oracle
from .dataset import LabeledBatch
from .model import (
    Centroids,
    fit,
    grad_centroids,
    grad_input,
    nll_loss,
    predict,
    refit_with_perturbation,
)

_ZERO_NORM = 1e-12


@dataclass(frozen=True)
class QuerySpec:
    """Query subject's features plus the class they want predicted."""

    features: np.ndarray
    goal_class: int

    def __post_init__(self):
        x = np.asarray(self.features, dtype=float)
        if x.ndim != 1:
            raise ValueError(f"query features must be a vector, got shape {x.shape}")
        if not np.all(np.isfinite(x)):
            raise ValueError("query features contain non-finite values")
        if int(self.goal_class) < 0:
            raise ValueError(f"goal class must be nonnegative, got {self.goal_class}")
        frozen = np.array(x, copy=True)
        frozen.setflags(write=False)
        object.__setattr__(self, "features", frozen)
        object.__setattr__(self, "goal_class", int(self.goal_class))


@dataclass(frozen=True)
class EpsilonBudget:
    """Per-vector L2 budget. Only norm order 2 is supported."""

    epsilon: float
    norm_order: int = 2

    def __post_init__(self):
        if not np.isfinite(self.epsilon) or self.epsilon < 0:
            raise ValueError(f"epsilon must be a nonnegative real, got {self.epsilon}")
        if self.norm_order != 2:
            raise ValueError(
                f"only the L2 norm is supported (norm_order=2), got {self.norm_order}"
            )
        object.__setattr__(self, "epsilon", float(self.epsilon))


@dataclass(frozen=True)
class PerturbationMatrix:
    """Per-row perturbations (N x d) with a participation mask.

    Rows whose mask entry is False are exactly zero.
    """

    delta: np.ndarray
    participation_mask: np.ndarray

    def __post_init__(self):
        delta = np.asarray(self.delta, dtype=float)
        mask = np.asarray(self.participation_mask, dtype=bool)
        if delta.ndim != 2:
            raise ValueError(f"delta must be 2-D, got shape {delta.shape}")
        if mask.shape != (delta.shape[0],):
            raise ValueError(
                f"mask shape {mask.shape} does not match {delta.shape[0]} rows"
            )
        if np.any(delta[~mask] != 0.0):
            raise ValueError("non-participating rows must be exactly zero")
        fd = np.array(delta, copy=True)
        fd.setflags(write=False)
        fm = np.array(mask, copy=True)
        fm.setflags(write=False)
        object.__setattr__(self, "delta", fd)
        object.__setattr__(self, "participation_mask", fm)

    def row_norms(self) -> np.ndarray:
        return np.linalg.norm(self.delta, axis=1)


@dataclass(frozen=True)
class SolverConfig:
    """Projected-gradient settings shared by both solvers.

    ``step_size`` is the initial step; it decays linearly to
    ``step_size / steps`` over the run. When left as None it resolves to
    ``0.05 * epsilon`` (or an absolute 1e-3 when the budget is zero).
    """

    steps: int = 500
    step_size: float | None = None
    projection_mode: str = "ball"
    init: str = "zero"
    seed: int = 0

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError(f"steps must be >= 1, got {self.steps}")
        if self.step_size is not None and not self.step_size > 0:
            raise ValueError(f"step_size must be positive, got {self.step_size}")
        if self.projection_mode not in ("ball", "sphere"):
            raise ValueError(f"projection_mode must be 'ball' or 'sphere', got {self.projection_mode!r}")
        if self.init not in ("zero", "random"):
            raise ValueError(f"init must be 'zero' or 'random', got {self.init!r}")

    def resolved_step_size(self, epsilon: float) -> float:
        if self.step_size is not None:
            return self.step_size
        return 0.05 * epsilon if epsilon > 0 else 1e-3


@dataclass
class RecourseResult:
    """Best perturbation found, its loss, and the resulting model state.

    ``loss_trace`` starts with the unperturbed baseline loss, followed by any
    extra candidate evaluations and then one entry per solver step.
    ``achieved_loss`` is the minimum of the trace. ``post_centroids`` equals
    the base centroids for individual recourse and the refit centroids under
    the best perturbation for collective recourse.
    """

    perturbation: np.ndarray | PerturbationMatrix
    achieved_loss: float
    flipped: bool
    loss_trace: np.ndarray = field(repr=False)
    post_centroids: Centroids = field(repr=False)


def project_ball(v: np.ndarray, epsilon: float) -> np.ndarray:
    """Nearest point of the L2 ball of radius epsilon: rescale only if outside."""
    v = np.asarray(v, dtype=float)
    norm = np.linalg.norm(v)
    if norm <= epsilon:
        return v.copy()
    return v * (epsilon / norm)


def normalize_sphere(v: np.ndarray, epsilon: float) -> np.ndarray:
    """Rescale onto the radius-epsilon sphere; the zero vector stays zero."""
    v = np.asarray(v, dtype=float)
    norm = np.linalg.norm(v)
    if norm <= _ZERO_NORM:
        return np.zeros_like(v)
    return v * (epsilon / norm)


def _project_rows(delta: np.ndarray, epsilon: float, mode: str) -> np.ndarray:
    """Apply the per-vector projection to every row of a matrix."""
    norms = np.linalg.norm(delta, axis=1)
    if mode == "ball":
        scale = np.ones_like(norms)
        outside = norms > epsilon
        scale[outside] = epsilon / norms[outside]
    else:
        scale = np.where(norms > _ZERO_NORM, epsilon / np.maximum(norms, _ZERO_NORM), 0.0)
    return delta * scale[:, None]


def _project(v: np.ndarray, epsilon: float, mode: str) -> np.ndarray:
    return project_ball(v, epsilon) if mode == "ball" else normalize_sphere(v, epsilon)


def _normalized(g: np.ndarray) -> np.ndarray | None:
    """Unit descent direction, or None at a stationary point."""
    norm = np.linalg.norm(g)
    if norm <= _ZERO_NORM:
        return None
    return g / norm


def individual_recourse(
    query: QuerySpec,
    theta: Centroids,
    budget: EpsilonBudget,
    cfg: SolverConfig = SolverConfig(),
    extra_candidates=(),
) -> RecourseResult:
    """Find a budgeted perturbation of the query's own features.

    Projected gradient descent on delta: each step moves along the normalized
    loss gradient at ``x_q + delta`` and projects back onto the budget ball
    (or sphere). The returned perturbation is the best iterate, which always
    includes delta = 0, so the achieved loss never exceeds the baseline.

    ``extra_candidates`` are additional feasible perturbations (for example a
    solution found under a smaller budget) evaluated into the candidate set;
    this is what makes loss-versus-budget sweeps monotone.
    """
    x_q = query.features
    if x_q.shape != (theta.dim,):
        raise ValueError(f"query dimension {x_q.shape[0]} does not match model dim {theta.dim}")
    if query.goal_class >= theta.num_classes:
        raise ValueError(
            f"goal class {query.goal_class} outside [0, {theta.num_classes - 1}]"
        )
    goal = query.goal_class
    eps = budget.epsilon
    eta0 = cfg.resolved_step_size(eps)
    mode = cfg.projection_mode

    baseline = nll_loss(x_q, goal, theta)
    best_delta = np.zeros_like(x_q)
    best_loss = baseline
    trace = [baseline]

    for candidate in extra_candidates:
        cand = _project(np.asarray(candidate, dtype=float), eps, mode)
        loss = nll_loss(x_q + cand, goal, theta)
        trace.append(loss)
        if loss < best_loss:
            best_loss, best_delta = loss, cand

    if cfg.init == "random":
        rng = np.random.default_rng(cfg.seed)
        delta = _project(rng.standard_normal(x_q.shape) * eps, eps, mode)
        loss = nll_loss(x_q + delta, goal, theta)
        trace.append(loss)
        if loss < best_loss:
            best_loss, best_delta = loss, delta.copy()
    else:
        delta = np.zeros_like(x_q)

    for step in range(cfg.steps):
        direction = _normalized(grad_input(x_q + delta, goal, theta))
        if direction is None:
            break
        eta = eta0 * (cfg.steps - step) / cfg.steps
        delta = _project(delta - eta * direction, eps, mode)
        loss = nll_loss(x_q + delta, goal, theta)
        trace.append(loss)
        if loss < best_loss:
            best_loss, best_delta = loss, delta.copy()

    flipped = predict(x_q + best_delta, theta) == goal
    return RecourseResult(
        perturbation=best_delta,
        achieved_loss=best_loss,
        flipped=flipped,
        loss_trace=np.asarray(trace),
        post_centroids=theta,
    )


def collective_recourse(
    batch: LabeledBatch,
    query: QuerySpec,
    budget: EpsilonBudget,
    cfg: SolverConfig = SolverConfig(),
    mask=None,
    extra_candidates=(),
) -> RecourseResult:
    """Find budgeted training-row perturbations that help the query via refit.

    The refit centroids are an explicit function of the perturbation matrix
    (each centroid moves by its class's mean perturbation), so the gradient
    of the query loss with respect to row i is the centroid gradient of row
    i's class divided by that class's row count. Each step normalizes the
    per-row gradients, moves every participating row, and projects rows back
    onto the budget ball (or sphere); the best iterate is returned.

    ``mask`` selects participating rows (default: all). Masked-out rows stay
    exactly zero; a fully masked-out class simply leaves that centroid fixed.
    """
    x_q = query.features
    if x_q.shape != (batch.dim,):
        raise ValueError(f"query dimension {x_q.shape[0]} does not match batch dim {batch.dim}")
    if query.goal_class >= batch.num_classes:
        raise ValueError(
            f"goal class {query.goal_class} outside [0, {batch.num_classes - 1}]"
        )
    if mask is None:
        mask = np.ones(batch.num_rows, dtype=bool)
    else:
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != (batch.num_rows,):
            raise ValueError(f"mask shape {mask.shape} does not match {batch.num_rows} rows")
    goal = query.goal_class
    eps = budget.epsilon
    eta0 = cfg.resolved_step_size(eps)
    mode = cfg.projection_mode
    counts = np.bincount(batch.labels, minlength=batch.num_classes)
    inv_counts = (1.0 / counts)[batch.labels][:, None]

    def outer_loss(delta):
        return nll_loss(x_q, goal, refit_with_perturbation(batch, delta))

    zero = np.zeros_like(batch.features)
    baseline = outer_loss(zero)
    best_delta = zero
    best_loss = baseline
    trace = [baseline]

    for candidate in extra_candidates:
        cand = np.array(candidate, dtype=float)
        if cand.shape != batch.features.shape:
            raise ValueError(
                f"candidate shape {cand.shape} does not match batch {batch.features.shape}"
            )
        cand[~mask] = 0.0
        cand = _project_rows(cand, eps, mode)
        loss = outer_loss(cand)
        trace.append(loss)
        if loss < best_loss:
            best_loss, best_delta = loss, cand

    if cfg.init == "random":
        rng = np.random.default_rng(cfg.seed)
        delta = rng.standard_normal(batch.features.shape) * eps
        delta[~mask] = 0.0
        delta = _project_rows(delta, eps, mode)
        loss = outer_loss(delta)
        trace.append(loss)
        if loss < best_loss:
            best_loss, best_delta = loss, delta.copy()
    else:
        delta = zero.copy()

    for step in range(cfg.steps):
        theta_now = refit_with_perturbation(batch, delta)
        grad_rows = grad_centroids(x_q, goal, theta_now)[batch.labels] * inv_counts
        norms = np.linalg.norm(grad_rows, axis=1)
        moving = mask & (norms > _ZERO_NORM)
        if not np.any(moving):
            break
        directions = np.zeros_like(grad_rows)
        directions[moving] = grad_rows[moving] / norms[moving, None]
        eta = eta0 * (cfg.steps - step) / cfg.steps
        delta = _project_rows(delta - eta * directions, eps, mode)
        delta[~mask] = 0.0
        loss = outer_loss(delta)
        trace.append(loss)
        if loss < best_loss:
            best_loss, best_delta = loss, delta.copy()

    post = refit_with_perturbation(batch, best_delta)
    flipped = predict(x_q, post) == goal
    return RecourseResult(
        perturbation=PerturbationMatrix(best_delta, mask),
        achieved_loss=best_loss,
        flipped=flipped,
        loss_trace=np.asarray(trace),
        post_centroids=post,
    )


def uniform_shift_bound(
    batch: LabeledBatch,
    query: QuerySpec,
    budget: EpsilonBudget,
    resolution: float,
) -> float:
    """Exhaustive lower-bound-quality reference for the collective optimum.

    Because a centroid's displacement is the mean of its class's perturbation
    rows, row-wise budgets let each centroid move anywhere in its own epsilon
    ball (set every class row to the same shift), and no further. Searching
    per-class shift vectors on a grid over the ball therefore scans the whole
    reachable model family; the returned value is the minimal query loss on
    that grid. Guarded to d = 2 and k <= 3.
    """
    _, loss = oracle.grid_collective(
        batch, query, budget.epsilon, oracle.GridSpec(resolution)
    )
    return loss
