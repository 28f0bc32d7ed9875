"""Monte-Carlo experiments: PAPR CCDF per method and threshold search counts.

Per-symbol randomness comes only from :func:`seed_stream`, so any split of
the symbol range across workers reproduces the single-worker result exactly.
All methods on a symbol share its block and partition (paired design).

Seed derivation, bit-exact::

    mix(z):  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9  mod 2**64
             z = (z ^ (z >> 27)) * 0x94D049BB133111EB  mod 2**64
             return z ^ (z >> 31)
    key   = 4 * symbol_index + purpose_code      (bits 0, partition 1, optimizer 2)
    seed  = mix((mix(master_seed) + (key + 1) * 0x9E3779B97F4A7C15) mod 2**64)

mix is a bijection of 64-bit words and the golden-ratio constant is odd, so
for a fixed master seed distinct (symbol, purpose) pairs never collide while
key < 2**64.
"""
from __future__ import annotations

import json
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace

import numpy as np

from .errors import ConfigurationError
from .ofdm import PaprValue, random_qpsk_block, to_db
from .optimizers import OPTIMIZERS, OptResult, PmceConfig, run_method
from .pts import SCHEMES, batch_objective, make_partition, split_and_transform

METHODS = ("none",) + OPTIMIZERS
PURPOSES = {"bits": 0, "partition": 1, "optimizer": 2}
PAPER_THRESHOLDS_DB = tuple(7.0 + 0.25 * i for i in range(9))

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _mix64(z):
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def seed_stream(master_seed, symbol_index, purpose) -> int:
    """64-bit seed for one (symbol, purpose) pair; see module docstring."""
    code = PURPOSES[purpose]
    key = (4 * int(symbol_index) + code + 1) & _MASK64
    return _mix64((_mix64(int(master_seed) & _MASK64) + key * _GOLDEN) & _MASK64)


@dataclass(frozen=True)
class ExperimentConfig:
    n_subcarriers: int = 256
    m_subblocks: int = 8
    w_alphabet: int = 2
    oversampling: int = 4
    n_symbols: int = 100_000
    methods: tuple = METHODS
    partition_scheme: str = "random"
    # fresh random partition per symbol; False reuses one partition seeded by master_seed
    partition_per_symbol: bool = True
    pmce: PmceConfig = field(default_factory=PmceConfig)
    master_seed: int = 0
    grid_start_db: float = 4.0
    grid_stop_db: float = 13.0
    grid_step_db: float = 0.05
    workers: int = 1

    @classmethod
    def desk(cls, **overrides):
        """Desk-scale profile: 10**4 symbols instead of 10**5."""
        return cls(**{"n_symbols": 10_000, **overrides})

    def validate(self):
        if self.n_symbols < 1:
            raise ConfigurationError("n_symbols must be >= 1")
        if self.oversampling < 1:
            raise ConfigurationError("oversampling must be >= 1")
        if self.w_alphabet < 2:
            raise ConfigurationError("w_alphabet must be >= 2")
        if self.workers < 1:
            raise ConfigurationError("workers must be >= 1")
        if not self.methods:
            raise ConfigurationError("no methods selected")
        unknown = [m for m in self.methods if m not in METHODS]
        if unknown:
            raise ConfigurationError(f"unknown methods {unknown}; choose from {METHODS}")
        if len(set(self.methods)) != len(self.methods):
            raise ConfigurationError(f"duplicate entries in methods {list(self.methods)}")
        if self.w_alphabet != 2 and {"ce", "pmce"} & set(self.methods):
            raise ConfigurationError("ce and pmce are defined for W = 2 only")
        if "ipts" in self.methods and self.m_subblocks < 2:
            raise ConfigurationError("ipts needs M >= 2")
        if self.partition_scheme not in SCHEMES:
            raise ConfigurationError(f"unknown partition scheme {self.partition_scheme!r}")
        if not self.grid_step_db > 0 or self.grid_stop_db < self.grid_start_db:
            raise ConfigurationError("bad dB grid")
        make_partition(self.n_subcarriers, self.m_subblocks, self.partition_scheme, 0)
        return self

    @property
    def grid_db(self) -> np.ndarray:
        count = int(round((self.grid_stop_db - self.grid_start_db) / self.grid_step_db)) + 1
        return np.round(self.grid_start_db + self.grid_step_db * np.arange(count), 10)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["methods"] = list(self.methods)
        return out

    @classmethod
    def from_dict(cls, data: dict):
        data = dict(data)
        known = {f.name for f in fields(cls)}
        extra = set(data) - known
        if extra:
            raise ConfigurationError(f"unknown config keys {sorted(extra)}")
        if "pmce" in data and isinstance(data["pmce"], dict):
            data["pmce"] = PmceConfig(**data["pmce"])
        if "methods" in data:
            data["methods"] = tuple(data["methods"])
        return cls(**data)


def symbol_subblocks(cfg: ExperimentConfig, index):
    """Block and partition for symbol ``index``, transformed into sub-blocks."""
    rng = np.random.default_rng(seed_stream(cfg.master_seed, index, "bits"))
    block = random_qpsk_block(cfg.n_subcarriers, rng)
    if cfg.partition_per_symbol:
        part_seed = seed_stream(cfg.master_seed, index, "partition")
    else:
        part_seed = seed_stream(cfg.master_seed, 0, "partition")
    partition = make_partition(cfg.n_subcarriers, cfg.m_subblocks, cfg.partition_scheme, part_seed)
    return split_and_transform(block, partition, cfg.oversampling)


def _unoptimized(subblocks):
    value = float(batch_objective(subblocks, np.zeros(subblocks.m_subblocks, dtype=np.int8))[0])
    return OptResult(
        method="none",
        best_index=np.zeros(subblocks.m_subblocks, dtype=np.intp),
        best_papr=PaprValue(value),
        evaluations=1,
        history=np.array([value]),
    )


def simulate_symbol(cfg: ExperimentConfig, index, methods=None, stop_at_db=None) -> dict:
    """Run each method on symbol ``index``; returns ``{method: OptResult}``."""
    subblocks = symbol_subblocks(cfg, index)
    pmce_cfg = replace(cfg.pmce, seed=seed_stream(cfg.master_seed, index, "optimizer"))
    results = {}
    for method in methods or cfg.methods:
        if method == "none":
            results[method] = _unoptimized(subblocks)
        else:
            results[method] = run_method(method, subblocks, cfg.w_alphabet, pmce_cfg, stop_at_db=stop_at_db)
    return results


# ---------------------------------------------------------------------- CCDF


@dataclass
class CcdfCurve:
    """Empirical Pr(PAPR > x) on a dB grid, kept as integer exceedance counts."""

    method: str
    grid_db: np.ndarray
    exceed: np.ndarray
    n_symbols: int

    @property
    def prob(self) -> np.ndarray:
        return self.exceed / self.n_symbols

    @property
    def stderr(self) -> np.ndarray:
        """Binomial standard error of each probability."""
        p = self.prob
        return np.sqrt(p * (1 - p) / self.n_symbols)

    def papr_at(self, level) -> float:
        """dB value where the curve falls to ``level``, interpolated in log10(prob)."""
        prob = self.prob
        below = np.flatnonzero(prob <= level)
        if below.size == 0:
            raise ValueError(f"curve never reaches {level} on the grid")
        i = int(below[0])
        if i == 0:
            return float(self.grid_db[0])
        p_hi, p_lo = prob[i - 1], prob[i]
        x_hi, x_lo = self.grid_db[i - 1], self.grid_db[i]
        if p_lo > 0:
            t = (np.log10(p_hi) - np.log10(level)) / (np.log10(p_hi) - np.log10(p_lo))
        else:
            t = (p_hi - level) / p_hi
        return float(x_hi + t * (x_lo - x_hi))


def exceedance_counts(papr_db, grid_db) -> np.ndarray:
    """Number of values strictly above each grid point."""
    ordered = np.sort(np.asarray(papr_db))
    return ordered.size - np.searchsorted(ordered, grid_db, side="right")


@dataclass
class CcdfResult:
    config: ExperimentConfig
    curves: dict
    papr_db: dict  # per-method PAPR (dB) of every symbol, in symbol order
    evaluations: dict  # per-method total evaluation count

    def to_dict(self) -> dict:
        return {
            "experiment": "ccdf",
            "config": self.config.to_dict(),
            "grid_db": self.config.grid_db.tolist(),
            "curves": {
                m: {"prob": c.prob.tolist(), "exceed": c.exceed.tolist(), "stderr": c.stderr.tolist()}
                for m, c in self.curves.items()
            },
            "avg_evaluations": {m: self.evaluations[m] / self.config.n_symbols for m in self.evaluations},
            "n_symbols": self.config.n_symbols,
        }

    def to_csv(self) -> str:
        methods = list(self.curves)
        lines = [",".join(["papr0_db"] + [f"ccdf_{m}" for m in methods])]
        for i, x in enumerate(self.config.grid_db):
            row = [f"{x:.2f}"] + [repr(float(self.curves[m].prob[i])) for m in methods]
            lines.append(",".join(row))
        return "\n".join(lines) + "\n"


def _ccdf_chunk(cfg, start, stop):
    papr_db = {m: np.empty(stop - start) for m in cfg.methods}
    evals = {m: 0 for m in cfg.methods}
    for i in range(start, stop):
        for m, res in simulate_symbol(cfg, i).items():
            papr_db[m][i - start] = res.best_papr.db
            evals[m] += res.evaluations
    return papr_db, evals


def _chunks(n, workers):
    pieces = max(1, min(n, 4 * workers))
    edges = np.linspace(0, n, pieces + 1).round().astype(int)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def _map_chunks(func, cfg, chunks):
    if cfg.workers == 1 or len(chunks) == 1:
        return [func(cfg, a, b) for a, b in chunks]
    with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
        return list(pool.map(func, [cfg] * len(chunks), *zip(*chunks)))


def merge_ccdf(cfg: ExperimentConfig, partials) -> CcdfResult:
    """Combine chunk results given in symbol order."""
    grid = cfg.grid_db
    papr_db = {m: np.concatenate([p[0][m] for p in partials]) for m in cfg.methods}
    evals = {m: sum(p[1][m] for p in partials) for m in cfg.methods}
    curves = {}
    for m in cfg.methods:
        exceed = sum(exceedance_counts(p[0][m], grid) for p in partials)
        curves[m] = CcdfCurve(m, grid, exceed, papr_db[m].size)
    return CcdfResult(cfg, curves, papr_db, evals)


def run_ccdf(cfg: ExperimentConfig, chunks=None) -> CcdfResult:
    """PAPR CCDF of every selected method over ``cfg.n_symbols`` random symbols."""
    cfg.validate()
    chunks = chunks or _chunks(cfg.n_symbols, cfg.workers)
    return merge_ccdf(cfg, _map_chunks(_ccdf_chunk, cfg, chunks))


# -------------------------------------------------------------- search count


def first_passage(history_db, threshold_db) -> int:
    """Evaluations spent until the first value <= threshold (all of them if none)."""
    hits = np.flatnonzero(np.asarray(history_db) <= threshold_db)
    return int(hits[0]) + 1 if hits.size else len(history_db)


@dataclass
class SearchStats:
    threshold_db: float
    total_evaluations: dict  # method -> summed integer counts
    n_symbols: int

    @property
    def avg_evaluations(self) -> dict:
        return {m: v / self.n_symbols for m, v in self.total_evaluations.items()}


def _search_chunk(cfg, start, stop, thresholds):
    methods = [m for m in cfg.methods if m != "none"]
    totals = np.zeros((len(thresholds), len(methods)), dtype=np.int64)
    for i in range(start, stop):
        results = simulate_symbol(cfg, i, methods)
        for j, m in enumerate(methods):
            history_db = to_db(results[m].history)
            for t, threshold in enumerate(thresholds):
                totals[t, j] += first_passage(history_db, threshold)
    return totals


def run_search_count(cfg: ExperimentConfig, thresholds_db=PAPER_THRESHOLDS_DB, chunks=None) -> list:
    """Average evaluations until a candidate at or below each threshold is found.

    Each symbol and method is searched once without a threshold; the count for
    threshold T is the position of the first candidate with PAPR <= T dB in
    that run, or the full count if none qualifies. Since the candidate
    sequence does not depend on T, this equals running a separate
    threshold-terminated search per T.
    """
    cfg.validate()
    thresholds = tuple(float(t) for t in thresholds_db)
    if not all(np.isfinite(thresholds)):
        raise ConfigurationError("thresholds must be finite")
    methods = [m for m in cfg.methods if m != "none"]
    if not methods:
        raise ConfigurationError("search-count needs at least one optimizer")
    chunks = chunks or _chunks(cfg.n_symbols, cfg.workers)
    if cfg.workers == 1 or len(chunks) == 1:
        partials = [_search_chunk(cfg, a, b, thresholds) for a, b in chunks]
    else:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            partials = list(pool.map(_search_chunk, [cfg] * len(chunks), *zip(*chunks), [thresholds] * len(chunks)))
    totals = np.sum(partials, axis=0)
    return [
        SearchStats(t, {m: int(totals[k, j]) for j, m in enumerate(methods)}, cfg.n_symbols)
        for k, t in enumerate(thresholds)
    ]


def search_stats_to_dict(cfg, stats) -> dict:
    return {
        "experiment": "search-count",
        "config": cfg.to_dict(),
        "thresholds_db": [s.threshold_db for s in stats],
        "avg_evaluations": {m: [s.avg_evaluations[m] for s in stats] for m in stats[0].total_evaluations},
        "total_evaluations": {m: [s.total_evaluations[m] for s in stats] for m in stats[0].total_evaluations},
        "n_symbols": cfg.n_symbols,
    }


def search_stats_to_csv(stats) -> str:
    methods = list(stats[0].total_evaluations)
    lines = [",".join(["threshold_db"] + [f"avg_evals_{m}" for m in methods])]
    for s in stats:
        avg = s.avg_evaluations
        lines.append(",".join([f"{s.threshold_db:.2f}"] + [repr(float(avg[m])) for m in methods]))
    return "\n".join(lines) + "\n"


# ------------------------------------------------------------------- output


def output_path(directory, experiment, master_seed, fmt) -> str:
    return os.path.join(directory, f"{experiment}_{master_seed}.{fmt}")


def atomic_write(path, text):
    """Write via a temporary file in the same directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dumps_json(payload) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"
