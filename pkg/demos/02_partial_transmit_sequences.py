"""
Partial transmit sequences
==========================

Split the subcarriers into M disjoint sub-blocks, transform each once, and
combine the time signals with phase factors. Every candidate then costs a
weighted sum, not a new transform.
"""
import itertools

import numpy as np

from pmcepts.ofdm import idft_oversampled, papr, random_qpsk_block
from pmcepts.pts import batch_objective, combine, make_partition, split_and_transform

rng = np.random.default_rng(3)
block = random_qpsk_block(256, rng)

for scheme in ("adjacent", "interleaved", "random"):
    part = make_partition(256, 4, scheme, seed=3)
    print(f"{scheme:>11}: sub-block 0 holds {part.members(0)[:6]} ...")

part = make_partition(256, 4, "random", seed=3)
sub = split_and_transform(block, part, oversampling=4)

# all-ones phases give back the original signal
x = combine(sub, np.ones(4))
print("max |x - original| =", np.max(np.abs(x - idft_oversampled(block, 4))))

# the 16 candidates with phases in {+1, -1}; c and its complement tie
bits = np.array(list(itertools.product((0, 1), repeat=4)))
values = 10 * np.log10(batch_objective(sub, bits))
for c, v in zip(bits, values):
    print("".join(map(str, c)), f"{v:.3f} dB")
print("original:", f"{papr(idft_oversampled(block, 4)).db:.3f} dB", " best:", f"{values.min():.3f} dB")
