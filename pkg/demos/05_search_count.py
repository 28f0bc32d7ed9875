"""
Search effort against a PAPR target
===================================

Each method stops as soon as it scores a candidate at or below the target
threshold T; the table shows the average number of scored candidates.
"""
from pmcepts.harness import PAPER_THRESHOLDS_DB, ExperimentConfig, run_search_count

cfg = ExperimentConfig(n_symbols=200, methods=("opts", "ipts", "ce", "pmce"), master_seed=1)
stats = run_search_count(cfg, PAPER_THRESHOLDS_DB)

print("   T    " + "".join(f"{m:>9}" for m in cfg.methods))
for s in stats:
    avg = s.avg_evaluations
    print(f"{s.threshold_db:5.2f}  " + "".join(f"{avg[m]:9.1f}" for m in cfg.methods))
