"""
Coordinate descent over (r, alpha, dropout)
===========================================

The tuner sweeps one axis at a time against a black-box objective,
keeping the other two fixed, until the loss reaches a threshold. Here
the objective replays a bundled grid of recorded fine-tuning losses, so
the whole run is instant and deterministic.
"""

import tempfile
from pathlib import Path

from qimrag import (
    ParamPoint,
    ParamRanges,
    export_trace,
    grid_objective,
    load_loss_grid,
    tune,
)
from qimrag.tuner import bundled_loss_grid_path

grid = load_loss_grid(bundled_loss_grid_path())
print(f"loss grid: {len(grid)} recorded points")

objective = grid_objective(grid)
result = tune(
    initial=ParamPoint(r=64, alpha=16, dropout=0.01),
    ranges=ParamRanges(r=(8, 16, 32, 64), alpha=(8, 16, 32, 64),
                       dropout=(0.001, 0.01, 0.1)),
    objective=objective,
    threshold=0.12,
)

print(f"converged: {result.converged} after {result.iterations} "
      f"outer iteration(s)")
print(f"best point: {result.point} at loss {result.loss}")

print("\nevaluation trace (memoized repeats are free and untraced):")
for entry in result.trace:
    p = entry.point
    print(f"  {entry.phase:13} r={p.r:<3} alpha={p.alpha:<5} "
          f"dropout={p.dropout:<6} loss={entry.loss}")

trace_path = Path(tempfile.mkdtemp()) / "trace.csv"
export_trace(result.trace, trace_path)
print(f"\ntrace exported to {trace_path}:")
print("\n".join("  " + line
                for line in trace_path.read_text().splitlines()[:3]))
