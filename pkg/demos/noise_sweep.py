"""
Noise sweep: how the two scores react as a reference degrades
=============================================================

Draw a ~ U(0,1)^n, corrupt it as b = a + k*noise for a grid of noise
levels k, and record cosine(a,b) and qim(a,b) per trial. The CSV output
is byte-stable for a fixed config.
"""

import tempfile
from pathlib import Path

from scipy.stats import spearmanr

from qimrag.simlab import SweepConfig, default_k_grid, run_sweep, write_csv

config = SweepConfig(n=1000, k_values=default_k_grid(), q=16, seed=2,
                     trials_per_k=25)
records = run_sweep(config)
print(f"{len(records)} records: {len(default_k_grid())} noise levels x "
      f"{config.trials_per_k} trials")

for k in (0.0, 0.5, 1.0, 2.0):
    rows = [r for r in records if r.k == k]
    mean_cos = sum(r.cosine for r in rows) / len(rows)
    mean_qim = sum(r.qim for r in rows) / len(rows)
    print(f"  k={k:3}  mean cosine {mean_cos:.4f}   mean qim {mean_qim:10.2f}")

rho = spearmanr([r.cosine for r in records],
                [r.qim for r in records]).statistic
print(f"\nspearman rank agreement between the scores: {rho:.4f}")

small = run_sweep(SweepConfig(n=10, k_values=default_k_grid(), q=16, seed=2,
                              trials_per_k=25))
print("max qim at n=10  :", round(max(r.qim for r in small), 2))
print("max qim at n=1000:", round(max(r.qim for r in records), 2))

out = Path(tempfile.mkdtemp()) / "sweep.csv"
write_csv(records, out)
print(f"\nwrote {out} ({out.stat().st_size} bytes), header:")
print(" ", out.read_text().splitlines()[0])
