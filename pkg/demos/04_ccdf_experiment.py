"""
CCDF of PAPR per method
=======================

A small version of the CCDF experiment (N=256, M=8 random partition, W=2,
L=4). All methods see the same blocks and partitions. Pass the number of
symbols as the first argument; 10**5 reproduces the full experiment.
"""
import sys

from pmcepts.harness import ExperimentConfig, atomic_write, run_ccdf

n_symbols = int(sys.argv[1]) if len(sys.argv) > 1 else 500
cfg = ExperimentConfig(n_symbols=n_symbols, master_seed=1)
result = run_ccdf(cfg)

levels = [lvl for lvl in (1e-1, 1e-2, 1e-3, 1e-4) if lvl * n_symbols >= 1]
print("method " + " ".join(f"{lvl:>8g}" for lvl in levels) + "   avg evals")
for method, curve in result.curves.items():
    readings = " ".join(f"{curve.papr_at(lvl):8.2f}" for lvl in levels)
    print(f"{method:>6} {readings}   {result.evaluations[method] / n_symbols:9.1f}")

atomic_write(f"ccdf_{cfg.master_seed}.csv", result.to_csv())

try:
    import matplotlib.pyplot as plt
except ImportError:
    plt = None
if plt is not None:
    for method, curve in result.curves.items():
        mask = curve.prob > 0
        plt.semilogy(curve.grid_db[mask], curve.prob[mask], label=method)
    plt.xlabel("PAPR0 (dB)")
    plt.ylabel("Pr(PAPR > PAPR0)")
    plt.legend()
    plt.grid(True, which="both", alpha=0.3)
    plt.savefig("ccdf.png", dpi=120)
    print("saved ccdf.png")
