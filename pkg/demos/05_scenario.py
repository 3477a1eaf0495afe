"""End-to-end scenario: exponent sweep and replacement check, written as CSV.

Equivalent to ``gaussminimax scenario --config demos/configs/variance.json --out OUT``.
"""

import sys
import tempfile
from pathlib import Path

from gaussminimax.scenarios import ExperimentConfig, run_scenario

here = Path(__file__).parent
cfg = ExperimentConfig.load(here / "configs" / "variance.json")
out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(tempfile.mkdtemp(prefix="scenario-"))
result = run_scenario(cfg, out)

print(f"{'n':>5} {'D/n':>8} {'-ln b/n':>8} {'lower/n':>8} {'upper/n':>8}  ok")
for r in result.exponent:
    print(f"{r.n:5d} {r.kl_per_n:8.4f} {-r.log_beta_hat_per_n:8.4f} {r.lower_per_n:8.4f} {r.upper_per_n:8.4f}  {r.sandwich_ok}")
print()
for r in result.replacement:
    print(f"n={r.n}: {r.status}, ln beta_cand = {r.log_beta_cand:.2f} <= bound {r.bound:.2f}: {r.holds}")
print("\nviolations:", result.violations or "none")
print("CSV files in", out)
