"""
OFDM symbols and their PAPR
===========================

One QPSK block of 256 subcarriers, its oversampled baseband signal, and the
peak-to-average power ratio. Sampling at the Nyquist rate (L=1) can miss
the true peak; L=4 is the usual choice.
"""
import numpy as np

from pmcepts.ofdm import idft_oversampled, modulate_qpsk, papr

rng = np.random.default_rng(1)
bits = rng.integers(0, 2, size=512)
block = modulate_qpsk(bits)
print("first symbols:", np.round(block[:4], 3))

for oversampling in (1, 2, 4, 8):
    x = idft_oversampled(block, oversampling)
    print(f"L={oversampling}: {x.size:5d} samples, PAPR {papr(x).db:.3f} dB")

# average power does not depend on L with the 1/sqrt(N) scaling
x1, x4 = idft_oversampled(block, 1), idft_oversampled(block, 4)
print("mean power L=1 / L=4:", np.mean(abs(x1) ** 2), np.mean(abs(x4) ** 2))

# distribution over many random blocks
values = np.array([papr(idft_oversampled(modulate_qpsk(rng.integers(0, 2, 512)), 4)).db for _ in range(2000)])
for level in (1e-1, 1e-2):
    print(f"PAPR exceeded with probability {level:g}: {np.quantile(values, 1 - level):.2f} dB")
