"""
Phase search with parametric minimum cross-entropy
==================================================

The binary phase vector c is drawn from independent Bernoulli coordinates.
Each iteration scores J samples, takes gamma as the mean of the best
ceil(rho J), picks lambda so that the exp(-F lambda)-weighted mean PAPR equals
gamma, and moves p towards the weighted bit averages.
"""
import numpy as np

from pmcepts.ofdm import random_qpsk_block
from pmcepts.optimizers import PmceConfig, ce_optimize, ipts, opts_exhaustive, pmce_optimize
from pmcepts.pts import make_partition, split_and_transform

block = random_qpsk_block(256, np.random.default_rng(11))
sub = split_and_transform(block, make_partition(256, 8, "random", 11), 4)

cfg = PmceConfig(rho=0.1, alpha=0.6, samples=40, seed=5)
result = pmce_optimize(sub, cfg)

print(" it   gamma    lambda   p_hat")
for j, rec in enumerate(result.trace, 1):
    print(f"{j:3d}  {rec.gamma:6.3f}  {rec.lam:8.3f}   {np.array2string(rec.p_hat, precision=2)}")

print()
for res in (opts_exhaustive(sub), ipts(sub), ce_optimize(sub, cfg), result):
    print(f"{res.method:>5}: {res.best_papr.db:.3f} dB with {res.evaluations:4d} evaluations,"
          f" c = {''.join(map(str, res.best_index))}")

# fixed-budget mode: stop after 22 scored candidates
short = pmce_optimize(sub, PmceConfig(seed=5, max_evaluations=22))
print(f"pmce with a 22-candidate budget: {short.best_papr.db:.3f} dB")
