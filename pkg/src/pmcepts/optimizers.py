"""Phase-factor search for PTS.

Four searches over the phase space of a :class:`~pmcepts.pts.SubblockSet`:

* :func:`opts_exhaustive` - every one of the W**M phase vectors.
* :func:`ipts` - iterative flipping, one sub-block at a time.
* :func:`ce_optimize` - cross-entropy with an elite indicator update.
* :func:`pmce_optimize` - parametric minimum cross-entropy, which weights
  every sample by exp(-F * lambda) with lambda tuned so the weighted mean
  PAPR matches the elite mean.

The two stochastic methods work on binary vectors c (phases b = 1 - 2c) drawn
from independent Bernoulli coordinates. All objective values here are linear
PAPR ratios; thresholds are given in dB.

Every optimizer accepts ``stop_at_db``: the search halts at the first
evaluated candidate whose PAPR is at or below that many dB. Because the
candidate sequence does not depend on the threshold, a halted run is a
prefix of the free run.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BudgetError, ConfigurationError, InputSizeError, LambdaSolverError, PreconditionError
from .ofdm import PaprValue, to_db
from .pts import SubblockSet, batch_objective, batch_papr, phase_alphabet

LAMBDA_MAX = 1e6
LAMBDA_TOL = 1e-8
DEFAULT_BUDGET = 1 << 20


@dataclass(frozen=True)
class PmceConfig:
    """Settings shared by the CE and PMCE searches.

    ``max_evaluations`` switches to fixed-budget mode: the search stops once
    that many candidates have been scored.
    """

    rho: float = 0.1
    alpha: float = 0.6
    samples: int = 40
    max_iterations: int = 50
    convergence_eps: float = 1e-3
    seed: int = 0
    max_evaluations: int | None = None

    def __post_init__(self):
        if not 0 < self.rho < 1:
            raise ConfigurationError(f"rho must lie in (0, 1), got {self.rho}")
        if not 0 < self.alpha <= 1:
            raise ConfigurationError(f"alpha must lie in (0, 1], got {self.alpha}")
        if self.samples < 1:
            raise ConfigurationError("samples must be >= 1")
        if self.max_iterations < 1:
            raise ConfigurationError("max_iterations must be >= 1")
        if not self.convergence_eps > 0:
            raise ConfigurationError("convergence_eps must be > 0")
        if self.max_evaluations is not None and self.max_evaluations < 1:
            raise ConfigurationError("max_evaluations must be >= 1")
        if elite_count(self.rho, self.samples) < 1:
            raise ConfigurationError("ceil(rho * samples) must be >= 1")


@dataclass(frozen=True)
class IterationRecord:
    gamma: float
    lam: float
    p_hat: np.ndarray


@dataclass
class OptResult:
    """Outcome of one phase search.

    ``best_index`` holds phase indices into the W-point alphabet; for W=2 it
    is the binary vector c. ``history`` lists the linear PAPR of every
    evaluated candidate in evaluation order, so ``len(history) ==
    evaluations``.
    """

    method: str
    best_index: np.ndarray
    best_papr: PaprValue
    evaluations: int
    iterations: int = 0
    w_alphabet: int = 2
    history: np.ndarray = field(default_factory=lambda: np.empty(0))
    trace: list = field(default_factory=list)
    stopped_at_threshold: bool = False

    @property
    def best_c(self) -> np.ndarray:
        if self.w_alphabet != 2:
            raise ValueError("best_c is only defined for W = 2")
        return self.best_index.astype(np.int8)

    @property
    def best_phases(self) -> np.ndarray:
        return phase_alphabet(self.w_alphabet)[self.best_index]


def _first_below(values, stop_at_db):
    """Index of the first value at or below ``stop_at_db`` dB, or None."""
    if stop_at_db is None or len(values) == 0:
        return None
    hits = np.flatnonzero(to_db(values) <= stop_at_db)
    return int(hits[0]) if hits.size else None


# ---------------------------------------------------------------- exhaustive


def phase_indices(start, stop, m_subblocks, w_alphabet) -> np.ndarray:
    """Rows start..stop-1 of the lexicographic listing of {0..W-1}**M."""
    idx = np.arange(start, stop, dtype=np.int64)
    powers = w_alphabet ** np.arange(m_subblocks - 1, -1, -1, dtype=np.int64)
    return (idx[:, None] // powers[None, :]) % w_alphabet


def opts_exhaustive(subblocks: SubblockSet, w_alphabet=2, *, stop_at_db=None,
                    max_candidates=DEFAULT_BUDGET, chunk=4096) -> OptResult:
    """Score all W**M phase vectors in lexicographic order of phase index.

    Returns the global minimum; ties go to the lexicographically smallest
    index vector. Refuses with :class:`BudgetError` if W**M exceeds
    ``max_candidates``.
    """
    m = subblocks.m_subblocks
    total = w_alphabet**m
    if total > max_candidates:
        raise BudgetError(f"W**M = {total} candidates exceeds budget {max_candidates}")
    alphabet = phase_alphabet(w_alphabet)
    pieces = []
    stopped = False
    for start in range(0, total, chunk):
        rows = phase_indices(start, min(start + chunk, total), m, w_alphabet)
        values = batch_papr(subblocks, alphabet[rows])
        hit = _first_below(values, stop_at_db)
        if hit is not None:
            pieces.append(values[: hit + 1])
            stopped = True
            break
        pieces.append(values)
    history = np.concatenate(pieces)
    best = int(np.argmin(history))
    return OptResult(
        method="opts",
        best_index=phase_indices(best, best + 1, m, w_alphabet)[0],
        best_papr=PaprValue(float(history[best])),
        evaluations=history.size,
        w_alphabet=w_alphabet,
        history=history,
        stopped_at_threshold=stopped,
    )


# ------------------------------------------------------- iterative flipping


def ipts(subblocks: SubblockSet, w_alphabet=2, *, stop_at_db=None) -> OptResult:
    """Iterative flipping: sub-block 1 keeps phase index 0, then each later
    sub-block in turn tries all W phases with the others held fixed and
    keeps the best (lowest phase index on ties). Costs (M-1)*W evaluations.
    """
    m = subblocks.m_subblocks
    if m < 2:
        raise PreconditionError("ipts needs M >= 2")
    alphabet = phase_alphabet(w_alphabet)
    current = np.zeros(m, dtype=np.intp)
    history = []
    best_value = math.inf
    stopped = False
    for pos in range(1, m):
        trial = np.repeat(current[None, :], w_alphabet, axis=0)
        trial[:, pos] = np.arange(w_alphabet)
        values = batch_papr(subblocks, alphabet[trial])
        hit = _first_below(values, stop_at_db)
        if hit is not None:
            history.extend(values[: hit + 1])
            current = trial[hit]
            best_value = values[hit]
            stopped = True
            break
        history.extend(values)
        choice = int(np.argmin(values))
        current = trial[choice]
        best_value = values[choice]
    return OptResult(
        method="ipts",
        best_index=current,
        best_papr=PaprValue(float(best_value)),
        evaluations=len(history),
        iterations=m - 1,
        w_alphabet=w_alphabet,
        history=np.asarray(history),
        stopped_at_threshold=stopped,
    )


# ------------------------------------------------------------ CE machinery


def elite_count(rho, n_samples) -> int:
    """ceil(rho * J), immune to products like 0.7 * 10 = 7.000000000000001."""
    return math.ceil(round(rho * n_samples, 9))


def elite_gamma(values, rho) -> float:
    """Mean of the ceil(rho * J) smallest objective values."""
    values = np.sort(np.asarray(values, dtype=float))
    k = elite_count(rho, values.size)
    if not 1 <= k <= values.size:
        raise PreconditionError(f"ceil(rho * J) = {k} outside 1..{values.size}")
    return float(values[:k].mean())


def tilted_mean(values, lam) -> float:
    """g(lambda) = sum F exp(-F lambda) / sum exp(-F lambda), shift-stabilised."""
    values = np.asarray(values, dtype=float)
    w = np.exp(-(values - values.min()) * lam)
    return float(w @ values / w.sum())


def solve_lambda(values, gamma, *, tol=LAMBDA_TOL, lam_max=LAMBDA_MAX) -> float:
    """Find lambda >= 0 with tilted_mean(values, lambda) == gamma.

    g is decreasing from mean(F) at 0 towards min(F), so the root is unique.
    The bracket grows by doubling from 1 and is then bisected. Returns 0 when
    gamma sits at the mean (or all F are equal) and ``lam_max`` when gamma sits
    at the minimum or the root lies beyond the cap.
    """
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise InputSizeError("need at least one objective value")
    lo_val, mean = float(values.min()), float(values.mean())
    if not lo_val - 1e-9 <= gamma <= mean + 1e-9:
        raise PreconditionError(f"gamma={gamma!r} outside [min F, mean F] = [{lo_val!r}, {mean!r}]")
    shifted = values - lo_val
    target = gamma - lo_val
    if gamma >= mean - tol or np.all(shifted == 0):
        return 0.0
    if target <= 1e-12:
        return lam_max

    def excess(lam):
        w = np.exp(-shifted * lam)
        return (w @ shifted) / w.sum() - target

    lo, hi = 0.0, 1.0
    while excess(hi) > 0:
        lo, hi = hi, 2.0 * hi
        if hi >= lam_max:
            if excess(lam_max) > 0:
                return lam_max
            hi = lam_max
            break
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        err = excess(mid)
        if abs(err) <= 0.01 * tol:
            return mid
        if err > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 4 * np.finfo(float).eps * hi:
            break
    mid = 0.5 * (lo + hi)
    if abs(excess(mid)) > tol:
        raise LambdaSolverError(f"bisection stalled at lambda={mid!r} for gamma={gamma!r}")
    return mid


def update_p(samples, values, lam) -> np.ndarray:
    """Bernoulli parameters as exp(-F lambda)-weighted averages of the sample bits."""
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    values = np.asarray(values, dtype=float)
    if samples.shape[0] != values.size:
        raise InputSizeError(f"{samples.shape[0]} samples but {values.size} objective values")
    if not np.isfinite(lam):
        raise PreconditionError("lambda must be finite")
    w = np.exp(-(values - values.min()) * lam)
    return np.clip(w @ samples / w.sum(), 0.0, 1.0)


def ce_update(samples, values, rho):
    """Standard CE step: bit frequencies among samples with F <= gamma.

    gamma is the ceil(rho J)-th smallest value. Returns ``(p, gamma)``.
    """
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    values = np.asarray(values, dtype=float)
    k = elite_count(rho, values.size)
    gamma = float(np.partition(values, k - 1)[k - 1])
    elite = values <= gamma
    return samples[elite].mean(axis=0), gamma


def pmce_update(samples, values, rho):
    """PMCE step. Returns ``(p, gamma, lambda)``."""
    gamma = elite_gamma(values, rho)
    lam = solve_lambda(values, gamma)
    return update_p(samples, values, lam), gamma, lam


def smooth(p_new, p_old, alpha) -> np.ndarray:
    """alpha * p_new + (1 - alpha) * p_old."""
    if not 0 < alpha <= 1:
        raise PreconditionError("alpha must lie in (0, 1]")
    return alpha * np.asarray(p_new, dtype=float) + (1 - alpha) * np.asarray(p_old, dtype=float)


def is_degenerate(p_hat, eps) -> bool:
    """True when every coordinate is within ``eps`` of 0 or 1."""
    return bool(np.all(np.minimum(p_hat, 1 - p_hat) <= eps))


def _stochastic_search(method, subblocks, cfg, stop_at_db):
    m = subblocks.m_subblocks
    rng = np.random.default_rng(cfg.seed)
    p_hat = np.full(m, 0.5)
    budget = cfg.max_evaluations if cfg.max_evaluations is not None else math.inf
    seen = {}
    history = []
    trace = []
    best_c, best_value = None, math.inf
    stopped = False
    iterations = 0

    while iterations < cfg.max_iterations and len(history) < budget:
        # draw the whole batch before scoring so the RNG stream is threshold-free
        samples = (rng.random((cfg.samples, m)) < p_hat).astype(np.int8)
        room = budget - len(history)
        if room < cfg.samples:
            samples = samples[: int(room)]
        values = batch_objective(subblocks, samples)
        hit = _first_below(values, stop_at_db)
        if hit is not None:
            samples, values = samples[: hit + 1], values[: hit + 1]
            stopped = True
        for c, v in zip(samples, values):
            seen.setdefault(c.tobytes(), v)
        history.extend(values)
        k = int(np.argmin(values))
        if values[k] < best_value:
            best_c, best_value = samples[k].copy(), float(values[k])
        if stopped or samples.shape[0] < cfg.samples:
            break

        iterations += 1
        if method == "pmce":
            p_new, gamma, lam = pmce_update(samples, values, cfg.rho)
        else:
            p_new, gamma = ce_update(samples, values, cfg.rho)
            lam = math.nan
        p_hat = smooth(p_new, p_hat, cfg.alpha)
        trace.append(IterationRecord(gamma, lam, p_hat.copy()))
        if is_degenerate(p_hat, cfg.convergence_eps):
            break

    if not stopped:
        rounded = (p_hat >= 0.5).astype(np.int8)
        value = seen.get(rounded.tobytes())
        if value is None and len(history) < budget:
            value = float(batch_objective(subblocks, rounded)[0])
            history.append(value)
            stopped = _first_below([value], stop_at_db) is not None
        if value is not None and value < best_value:
            best_c, best_value = rounded, float(value)

    return OptResult(
        method=method,
        best_index=best_c.astype(np.intp),
        best_papr=PaprValue(best_value),
        evaluations=len(history),
        iterations=iterations,
        w_alphabet=2,
        history=np.asarray(history),
        trace=trace,
        stopped_at_threshold=stopped,
    )


def ce_optimize(subblocks: SubblockSet, cfg: PmceConfig = PmceConfig(), *, stop_at_db=None) -> OptResult:
    """Cross-entropy search with the elite-indicator update.

    Uses the same sampling, smoothing, stopping and final-answer rules as
    :func:`pmce_optimize`; only the parameter update differs.
    """
    return _stochastic_search("ce", subblocks, cfg, stop_at_db)


def pmce_optimize(subblocks: SubblockSet, cfg: PmceConfig = PmceConfig(), *, stop_at_db=None) -> OptResult:
    """Parametric minimum cross-entropy search over c in {0,1}**M.

    Starting from p = 0.5 everywhere, each iteration draws ``cfg.samples``
    binary vectors, sets gamma to the mean of the ceil(rho J) best PAPRs,
    solves for the lambda at which the exp(-F lambda)-weighted mean PAPR
    equals gamma, re-estimates p from those weights and smooths it with
    ``alpha``. The loop ends when every p is within ``convergence_eps`` of
    0 or 1, or after ``max_iterations``. The answer is the better of the best
    sample seen and the rounded final p; scoring the rounded vector costs one
    extra evaluation only if it was never sampled.
    """
    return _stochastic_search("pmce", subblocks, cfg, stop_at_db)


OPTIMIZERS = ("opts", "ipts", "ce", "pmce")


def run_method(method, subblocks, w_alphabet=2, pmce_config: PmceConfig = PmceConfig(), *, stop_at_db=None):
    """Dispatch by method name."""
    if method == "opts":
        return opts_exhaustive(subblocks, w_alphabet, stop_at_db=stop_at_db)
    if method == "ipts":
        return ipts(subblocks, w_alphabet, stop_at_db=stop_at_db)
    if method in ("ce", "pmce"):
        if w_alphabet != 2:
            raise ConfigurationError(f"{method} is defined for W = 2 only")
        search = pmce_optimize if method == "pmce" else ce_optimize
        return search(subblocks, pmce_config, stop_at_db=stop_at_db)
    raise ConfigurationError(f"unknown method {method!r}")
