"""Embedded invariant checks, run by ``pmcepts selftest``."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace

import numpy as np

from .harness import ExperimentConfig, run_ccdf, run_search_count
from .ofdm import idft_oversampled, papr, random_qpsk_block
from .optimizers import solve_lambda, tilted_mean
from .pts import SCHEMES, batch_objective, bits_to_phases, combine, make_partition, split_and_transform

REL_TOL = 1e-9


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""


def _rel(a, b):
    return np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-300)


def _blocks(count, n=256, seed=2024):
    rng = np.random.default_rng(seed)
    return [random_qpsk_block(n, rng) for _ in range(count)]


def check_parseval():
    worst = 0.0
    for block in _blocks(20):
        x = idft_oversampled(block, 1)
        energy = np.sum(np.abs(block) ** 2)
        worst = max(worst, abs(np.sum(np.abs(x) ** 2) - energy) / energy)
    return Check("parseval", worst <= REL_TOL, f"max rel err {worst:.2e}")


def check_papr_scale_invariance():
    rng = np.random.default_rng(7)
    worst = 0.0
    for block in _blocks(20):
        x = idft_oversampled(block, 4)
        scale = complex(*rng.normal(size=2)) * 10 ** rng.uniform(-3, 3)
        a, b = papr(x).ratio, papr(scale * x).ratio
        worst = max(worst, abs(a - b) / a)
    return Check("papr scale invariance", worst <= REL_TOL, f"max rel err {worst:.2e}")


def check_papr_floor():
    flat = np.exp(2j * np.pi * np.random.default_rng(3).random(64))
    ok = abs(papr(flat).ratio - 1) <= 1e-12
    ok &= all(papr(idft_oversampled(b, 4)).ratio > 1 for b in _blocks(10))
    return Check("papr >= 1, = 1 for constant modulus", bool(ok))


def check_partition_cover():
    bad = []
    for scheme in SCHEMES:
        for m in (1, 2, 4, 8, 16, 32):
            for seed in range(5):
                part = make_partition(256, m, scheme, seed)
                counts = np.bincount(part.assignment, minlength=m)
                if counts.sum() != 256 or counts.size != m or np.any(counts != 256 // m):
                    bad.append((scheme, m, seed))
    return Check("partition disjoint cover", not bad, f"failures {bad}" if bad else "")


def check_combine_linearity():
    worst = 0.0
    for i, block in enumerate(_blocks(5)):
        full = idft_oversampled(block, 4)
        for scheme in SCHEMES:
            sub = split_and_transform(block, make_partition(256, 8, scheme, i), 4)
            worst = max(worst, _rel(combine(sub, np.ones(8)), full))
            worst = max(worst, _rel(sub.time_parts.sum(axis=0), full))
    return Check("combine(all ones) = unpartitioned signal", worst <= REL_TOL, f"max rel err {worst:.2e}")


def _all_bits(m):
    return np.array(list(itertools.product((0, 1), repeat=m)), dtype=np.int8)


def check_average_power():
    worst = 0.0
    bits = _all_bits(8)
    for i, block in enumerate(_blocks(3)):
        sub = split_and_transform(block, make_partition(256, 8, "random", i), 4)
        signals = bits_to_phases(bits) @ sub.time_parts
        power = np.mean(np.abs(signals) ** 2, axis=1)
        worst = max(worst, np.ptp(power) / power.mean())
    return Check("average power invariant over 2**8 phase vectors", worst <= REL_TOL, f"max rel spread {worst:.2e}")


def check_complement_symmetry():
    worst = 0.0
    bits = _all_bits(8)
    for i, block in enumerate(_blocks(3)):
        sub = split_and_transform(block, make_partition(256, 8, "random", i), 4)
        f = batch_objective(sub, bits)
        g = batch_objective(sub, 1 - bits)
        worst = max(worst, np.max(np.abs(f - g) / f))
    return Check("complement symmetry F(c) = F(1-c)", worst <= REL_TOL, f"max rel err {worst:.2e}")


def check_lambda_closed_form():
    lam = solve_lambda([1.0, 3.0], 1.5)
    err = abs(lam - math.log(3) / 2)
    resid = abs(tilted_mean([1.0, 3.0], lam) - 1.5)
    return Check("lambda closed form F={1,3}, gamma=1.5", err <= 1e-8 and resid <= 1e-8, f"err {err:.2e}")


def check_harness_determinism():
    cfg = ExperimentConfig(n_symbols=6, methods=("none", "opts", "ipts", "ce", "pmce"), master_seed=11)
    one = run_ccdf(cfg)
    again = run_ccdf(cfg)
    split = run_ccdf(cfg, chunks=[(0, 1), (1, 4), (4, 6)])
    pooled = run_ccdf(replace(cfg, workers=2))
    same = all(
        np.array_equal(one.papr_db[m], other.papr_db[m]) and np.array_equal(one.curves[m].exceed, other.curves[m].exceed)
        for other in (again, split, pooled)
        for m in cfg.methods
    )
    s1 = run_search_count(cfg, (7.0, 8.0))
    s2 = run_search_count(cfg, (7.0, 8.0), chunks=[(0, 2), (2, 6)])
    same &= [s.total_evaluations for s in s1] == [s.total_evaluations for s in s2]
    return Check("harness determinism and worker-count independence", bool(same))


CHECKS = (
    check_parseval,
    check_papr_scale_invariance,
    check_papr_floor,
    check_partition_cover,
    check_combine_linearity,
    check_average_power,
    check_complement_symmetry,
    check_lambda_closed_form,
    check_harness_determinism,
)


def run_selftest(verbose=False):
    """Run every check; returns the list of :class:`Check` results."""
    results = []
    for check in CHECKS:
        try:
            result = check()
        except Exception as exc:  # a crash is a failed check, not an abort
            result = Check(check.__name__, False, f"{type(exc).__name__}: {exc}")
        results.append(result)
        if verbose:
            status = "PASS" if result.passed else "FAIL"
            print(f"[{status}] {result.name}" + (f" ({result.detail})" if result.detail else ""))
    return results
