"""Coordinate-descent hyperparameter tuning over (r, alpha, dropout).

One outer iteration sweeps dropout, then alpha, then r, updating the
incumbent after each axis. The incumbent's current value is always added
to a sweep's candidates, so the incumbent loss never increases. The
objective is a black box; a bundled lookup grid built from recorded
fine-tuning runs serves as the offline fixture.
"""

from __future__ import annotations

import concurrent.futures
import csv
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

PHASES = ("initial", "dropout-sweep", "alpha-sweep", "r-sweep")
_AXIS_TO_PHASE = {
    "dropout": "dropout-sweep",
    "alpha": "alpha-sweep",
    "r": "r-sweep",
}


class TunerError(Exception):
    pass


class BudgetExhaustedError(TunerError):
    pass


class EvaluationFailed(TunerError):
    """One candidate's evaluation raised or timed out."""


class AllCandidatesFailedError(TunerError):
    pass


@dataclass(frozen=True)
class ParamPoint:
    r: int
    alpha: float
    dropout: float

    def __post_init__(self) -> None:
        if not isinstance(self.r, int) or self.r < 1:
            raise ValueError("r must be a positive integer")
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if not 0 <= self.dropout < 1:
            raise ValueError("dropout must lie in [0, 1)")
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "dropout", float(self.dropout))

    def with_value(self, axis: str, value) -> "ParamPoint":
        if axis == "r":
            value = int(value)
        return replace(self, **{axis: value})


@dataclass(frozen=True)
class TraceEntry:
    point: ParamPoint
    loss: float
    phase: str
    iteration: int

    def __post_init__(self) -> None:
        if self.phase not in PHASES:
            raise ValueError(f"unknown phase {self.phase!r}")
        if self.loss < 0:
            raise ValueError("loss must be nonnegative")


@dataclass(frozen=True)
class TuneTrace:
    entries: tuple[TraceEntry, ...]

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)


@dataclass(frozen=True)
class ParamRanges:
    r: tuple[int, ...]
    alpha: tuple[float, ...]
    dropout: tuple[float, ...]

    def __post_init__(self) -> None:
        for axis in ("r", "alpha", "dropout"):
            values = getattr(self, axis)
            if not values:
                raise ValueError(f"range for {axis} must be nonempty")
        object.__setattr__(self, "r", tuple(int(v) for v in self.r))
        object.__setattr__(self, "alpha", tuple(float(v) for v in self.alpha))
        object.__setattr__(self, "dropout",
                           tuple(float(v) for v in self.dropout))

    def for_axis(self, axis: str) -> tuple:
        return getattr(self, axis)


class Objective:
    """Black-box evaluator with memoization, budget, and per-eval timeout.

    A repeated point is served from the memo without consuming budget.
    Timeouts abandon the worker thread and count as failures; aborted
    workers may keep running in the background, so evaluators should be
    side-effect free.
    """

    def __init__(self, evaluator, budget: int | None = None,
                 timeout: float | None = None) -> None:
        if budget is not None and budget < 1:
            raise ValueError("budget must be >= 1 when set")
        if timeout is not None and timeout <= 0:
            raise ValueError("timeout must be positive when set")
        self._evaluator = evaluator
        self._budget = budget
        self._timeout = timeout
        self._memo: dict[ParamPoint, float] = {}
        self.evaluations = 0
        self.failures: list[tuple[ParamPoint, str]] = []

    def known(self, point: ParamPoint) -> bool:
        return point in self._memo

    def evaluate(self, point: ParamPoint) -> float:
        if point in self._memo:
            return self._memo[point]
        if self._budget is not None and self.evaluations >= self._budget:
            raise BudgetExhaustedError(
                f"evaluation budget of {self._budget} exhausted"
            )
        self.evaluations += 1
        try:
            if self._timeout is None:
                loss = self._evaluator(point)
            else:
                with concurrent.futures.ThreadPoolExecutor(1) as pool:
                    future = pool.submit(self._evaluator, point)
                    try:
                        loss = future.result(timeout=self._timeout)
                    except concurrent.futures.TimeoutError:
                        future.cancel()
                        raise EvaluationFailed(
                            f"evaluation timed out after {self._timeout}s"
                        ) from None
        except (EvaluationFailed, BudgetExhaustedError):
            self.failures.append((point, "timeout"))
            raise
        except Exception as exc:
            self.failures.append((point, str(exc)))
            raise EvaluationFailed(f"evaluator raised: {exc}") from exc
        loss = float(loss)
        self._memo[point] = loss
        return loss


def sweep_param(base: ParamPoint, axis: str, candidates, objective: Objective,
                iteration: int = 0):
    """Try each candidate value on one axis; return the best.

    Ties break toward the smallest candidate value. Failed evaluations
    are skipped; if every candidate fails the sweep errors out. Returns
    (best value, best loss, trace entries for fresh evaluations).
    """
    if axis not in _AXIS_TO_PHASE:
        raise ValueError(f"unknown axis {axis!r}")
    candidates = list(candidates)
    if not candidates:
        raise ValueError("candidates must be nonempty")
    phase = _AXIS_TO_PHASE[axis]
    entries: list[TraceEntry] = []
    outcomes: list[tuple[float, float]] = []  # (candidate value, loss)
    for value in candidates:
        point = base.with_value(axis, value)
        fresh = not objective.known(point)
        try:
            loss = objective.evaluate(point)
        except EvaluationFailed:
            continue
        if fresh:
            entries.append(TraceEntry(point, loss, phase, iteration))
        outcomes.append((value, loss))
    if not outcomes:
        raise AllCandidatesFailedError(
            f"every candidate failed in the {axis} sweep"
        )
    best_value, best_loss = min(outcomes, key=lambda vl: (vl[1], vl[0]))
    return best_value, best_loss, entries


def _inject(value, candidates) -> list:
    candidates = list(candidates)
    if value not in candidates:
        candidates.insert(0, value)
    return candidates


@dataclass(frozen=True)
class TuneResult:
    point: ParamPoint
    loss: float
    trace: TuneTrace
    converged: bool
    iterations: int


def tune(initial: ParamPoint, ranges: ParamRanges, objective: Objective,
         threshold: float, max_iterations: int = 5) -> TuneResult:
    """Coordinate descent until the incumbent loss reaches the threshold.

    Each outer iteration sweeps dropout, alpha, then r; the loop stops
    when the loss after a full iteration is at or below the threshold,
    or after max_iterations (flagged non-converged).
    """
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    if max_iterations < 1:
        raise ValueError("max_iterations must be >= 1")
    entries: list[TraceEntry] = []
    loss = objective.evaluate(initial)
    entries.append(TraceEntry(initial, loss, "initial", 0))
    incumbent = initial
    iterations = 0
    while loss > threshold and iterations < max_iterations:
        iterations += 1
        for axis in ("dropout", "alpha", "r"):
            candidates = _inject(getattr(incumbent, axis),
                                 ranges.for_axis(axis))
            value, loss, sweep_entries = sweep_param(
                incumbent, axis, candidates, objective, iteration=iterations
            )
            entries.extend(sweep_entries)
            incumbent = incumbent.with_value(axis, value)
    return TuneResult(
        point=incumbent,
        loss=loss,
        trace=TuneTrace(tuple(entries)),
        converged=loss <= threshold,
        iterations=iterations,
    )


def export_trace(trace: TuneTrace, path: Path | str) -> None:
    """Write the trace as CSV: phase,iteration,r,alpha,dropout,loss.

    Reals use the shortest representation that round-trips exactly.
    """
    with open(path, "w", encoding="ascii", newline="") as handle:
        handle.write("phase,iteration,r,alpha,dropout,loss\n")
        for entry in trace:
            handle.write(
                f"{entry.phase},{entry.iteration},{entry.point.r},"
                f"{entry.point.alpha!r},{entry.point.dropout!r},"
                f"{entry.loss!r}\n"
            )


def load_loss_grid(path: Path | str) -> dict[ParamPoint, float]:
    """Read a CSV of r,alpha,dropout,loss rows into a lookup table."""
    grid: dict[ParamPoint, float] = {}
    with open(path, newline="", encoding="utf-8") as handle:
        for row in csv.DictReader(handle):
            point = ParamPoint(int(row["r"]), float(row["alpha"]),
                               float(row["dropout"]))
            grid[point] = float(row["loss"])
    if not grid:
        raise ValueError(f"no rows in loss grid {path}")
    return grid


def grid_objective(grid: dict[ParamPoint, float],
                   budget: int | None = None,
                   timeout: float | None = None) -> Objective:
    """Objective that looks points up in a recorded grid.

    Points outside the grid fail their evaluation (and are skipped by
    sweeps), mirroring a training run that never happened.
    """

    def evaluator(point: ParamPoint) -> float:
        if point not in grid:
            raise LookupError(f"no recorded loss for {point}")
        return grid[point]

    return Objective(evaluator, budget=budget, timeout=timeout)


def bundled_loss_grid_path() -> Path:
    """Path of the packaged fine-tuning loss grid fixture."""
    return Path(resources.files("qimrag").joinpath("data", "loss_grid.csv"))
