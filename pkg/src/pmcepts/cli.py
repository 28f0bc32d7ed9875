"""Command-line front end.

    pmcepts ccdf [flags]           CCDF of PAPR per method
    pmcepts search-count [flags]   average evaluations per threshold
    pmcepts single [flags]         optimise one seeded block and print it
    pmcepts selftest               run the invariant suite

Configuration precedence: profile defaults < ``--config`` JSON file < flags.
The JSON file uses the same keys as the ``config`` object echoed in JSON
results, so a result file's config can be fed straight back in.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace

import numpy as np

from .errors import PtsError
from .harness import (
    METHODS,
    PAPER_THRESHOLDS_DB,
    ExperimentConfig,
    atomic_write,
    dumps_json,
    output_path,
    run_ccdf,
    run_search_count,
    search_stats_to_csv,
    search_stats_to_dict,
    symbol_subblocks,
)
from .optimizers import phase_indices, run_method
from .pts import SCHEMES, batch_papr, phase_alphabet

OUTPUT_DIR_ENV = "PMCEPTS_OUTPUT_DIR"

# flag dest -> (section, key); section None means top-level ExperimentConfig
_FLAG_KEYS = {
    "subcarriers": (None, "n_subcarriers"),
    "subblocks": (None, "m_subblocks"),
    "alphabet": (None, "w_alphabet"),
    "oversampling": (None, "oversampling"),
    "symbols": (None, "n_symbols"),
    "methods": (None, "methods"),
    "partition": (None, "partition_scheme"),
    "partition_per_symbol": (None, "partition_per_symbol"),
    "seed": (None, "master_seed"),
    "grid_start": (None, "grid_start_db"),
    "grid_stop": (None, "grid_stop_db"),
    "grid_step": (None, "grid_step_db"),
    "workers": (None, "workers"),
    "rho": ("pmce", "rho"),
    "alpha": ("pmce", "alpha"),
    "samples": ("pmce", "samples"),
    "max_iterations": ("pmce", "max_iterations"),
    "eps": ("pmce", "convergence_eps"),
    "max_evaluations": ("pmce", "max_evaluations"),
}


def _checked(kind, test, message):
    def parse(text):
        try:
            value = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid {kind.__name__} value {text!r}")
        if not test(value):
            raise argparse.ArgumentTypeError(f"{text} {message}")
        return value

    return parse


_positive = _checked(int, lambda v: v >= 1, "must be >= 1")
_unsigned = _checked(int, lambda v: v >= 0, "must be >= 0")
_open_unit = _checked(float, lambda v: 0 < v < 1, "must lie in (0, 1)")
_half_open_unit = _checked(float, lambda v: 0 < v <= 1, "must lie in (0, 1]")
_positive_float = _checked(float, lambda v: v > 0, "must be > 0")
_finite = _checked(float, np.isfinite, "must be finite")


def _method_list(text):
    methods = [m.strip() for m in text.split(",") if m.strip()]
    unknown = [m for m in methods if m not in METHODS]
    if unknown:
        raise argparse.ArgumentTypeError(f"unknown methods {unknown}; choose from {', '.join(METHODS)}")
    if len(set(methods)) != len(methods) or not methods:
        raise argparse.ArgumentTypeError(f"conflicting method list {text!r}")
    return tuple(methods)


def _threshold_list(text):
    try:
        values = tuple(float(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid threshold list {text!r}")
    if not all(np.isfinite(values)):
        raise argparse.ArgumentTypeError("thresholds must be finite")
    return values


def _experiment_flags(parser):
    g = parser.add_argument_group("experiment")
    S = argparse.SUPPRESS
    g.add_argument("--config", default=S, help="JSON config file; flags override it")
    g.add_argument("--profile", choices=("paper", "desk"), default=S,
                   help="paper: 10**5 symbols (default); desk: 10**4")
    g.add_argument("--subcarriers", "--n", type=_positive, default=S, help="N (default 256)")
    g.add_argument("--subblocks", "--m", type=_positive, default=S, help="M (default 8)")
    g.add_argument("--alphabet", "--w", type=_checked(int, lambda v: v >= 2, "must be >= 2"), default=S,
                   help="W (default 2)")
    g.add_argument("--oversampling", "--l", type=_positive, default=S, help="L (default 4)")
    g.add_argument("--symbols", type=_positive, default=S, help="number of OFDM symbols")
    g.add_argument("--methods", type=_method_list, default=S, help=f"comma list from {','.join(METHODS)}")
    g.add_argument("--partition", choices=SCHEMES, default=S)
    g.add_argument("--fixed-partition", dest="partition_per_symbol", action="store_false", default=S,
                   help="one partition for all symbols instead of a fresh one per symbol")
    g.add_argument("--seed", type=_unsigned, default=S, help="master seed")
    g.add_argument("--grid-start", type=_finite, default=S)
    g.add_argument("--grid-stop", type=_finite, default=S)
    g.add_argument("--grid-step", type=_positive_float, default=S)
    g.add_argument("--workers", type=_positive, default=S, help="worker processes (default: CPU count)")
    g.add_argument("--rho", type=_open_unit, default=S, help="rarity parameter (default 0.1)")
    g.add_argument("--alpha", type=_half_open_unit, default=S, help="smoothing parameter (default 0.6)")
    g.add_argument("--samples", type=_positive, default=S, help="samples per iteration J (default 40)")
    g.add_argument("--max-iterations", type=_positive, default=S)
    g.add_argument("--eps", type=_positive_float, default=S, help="convergence tolerance on p")
    g.add_argument("--max-evaluations", type=_positive, default=S, help="fixed evaluation budget for ce/pmce")
    g.add_argument("--print-config", action="store_true", help="print the resolved config as JSON")


def _output_flags(parser):
    parser.add_argument("--output-dir", default=None,
                        help=f"directory for results (default ${OUTPUT_DIR_ENV} or ./results)")
    parser.add_argument("--format", choices=("csv", "json"), default="csv")


def build_parser():
    parser = argparse.ArgumentParser(prog="pmcepts", description="PTS phase search for OFDM PAPR reduction")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ccdf", help="CCDF of PAPR per method")
    _experiment_flags(p)
    _output_flags(p)

    p = sub.add_parser("search-count", help="average evaluations until PAPR <= threshold")
    _experiment_flags(p)
    _output_flags(p)
    p.add_argument("--thresholds", type=_threshold_list, default=PAPER_THRESHOLDS_DB,
                   help="comma list of dB thresholds (default 7,7.25,...,9)")

    p = sub.add_parser("single", help="optimise one seeded block")
    _experiment_flags(p)
    p.add_argument("--method", choices=METHODS[1:], default="pmce")
    p.add_argument("--symbol-index", type=_unsigned, default=0)

    p = sub.add_parser("selftest", help="run the invariant suite")
    p.add_argument("--quiet", action="store_true")
    return parser


def resolve_config(args) -> ExperimentConfig:
    """Merge profile defaults, the config file and explicit flags."""
    given = vars(args)
    profile = given.get("profile", "paper")
    base = ExperimentConfig.desk() if profile == "desk" else ExperimentConfig()
    data = base.to_dict()
    data["workers"] = os.cpu_count() or 1
    if "config" in given:
        with open(given["config"]) as fh:
            loaded = json.load(fh)
        loaded = loaded.get("config", loaded)  # accept a whole result file too
        pmce = loaded.pop("pmce", {})
        data.update(loaded)
        data["pmce"].update(pmce)
    for dest, (section, key) in _FLAG_KEYS.items():
        if dest in given:
            (data[section] if section else data)[key] = given[dest]
    return ExperimentConfig.from_dict(data).validate()


def _write(directory, experiment, seed, fmt, text):
    path = output_path(directory, experiment, seed, fmt)
    atomic_write(path, text)
    print(f"wrote {path}")


def _cmd_ccdf(cfg, args):
    result = run_ccdf(cfg)
    for m, curve in result.curves.items():
        levels = [lvl for lvl in (1e-1, 1e-2, 1e-3, 1e-4) if curve.prob.min() <= lvl]
        readings = ", ".join(f"{curve.papr_at(lvl):.2f} dB @ {lvl:g}" for lvl in levels)
        avg = result.evaluations[m] / cfg.n_symbols
        print(f"{m:>5}: {readings or 'n/a'}  (avg evaluations {avg:.1f})")
    text = dumps_json(result.to_dict()) if args.format == "json" else result.to_csv()
    _write(args.output_dir, "ccdf", cfg.master_seed, args.format, text)


def _cmd_search_count(cfg, args):
    stats = run_search_count(cfg, args.thresholds)
    print(search_stats_to_csv(stats), end="")
    if args.format == "json":
        text = dumps_json(search_stats_to_dict(cfg, stats))
    else:
        text = search_stats_to_csv(stats)
    _write(args.output_dir, "search-count", cfg.master_seed, args.format, text)


def _cmd_single(cfg, args):
    subblocks = symbol_subblocks(cfg, args.symbol_index)
    pmce_cfg = replace(cfg.pmce, seed=cfg.master_seed)
    w, m = cfg.w_alphabet, cfg.m_subblocks
    if args.method == "opts" and w**m <= 256:
        rows = phase_indices(0, w**m, m, w)
        values = batch_papr(subblocks, phase_alphabet(w)[rows])
        print("phase_index  papr_db")
        for row, value in zip(rows, values):
            print(f"{''.join(map(str, row))}  {10 * np.log10(value):.6f}")
    result = run_method(args.method, subblocks, w, pmce_cfg)
    print(f"method: {args.method}")
    print(f"best phase index: {''.join(map(str, result.best_index))}")
    print(f"best phases: {np.array2string(result.best_phases, precision=4)}")
    print(f"papr: {result.best_papr.db:.6f} dB ({result.best_papr.ratio:.6f})")
    print(f"evaluations: {result.evaluations}  iterations: {result.iterations}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "selftest":
        from .selftest import run_selftest

        results = run_selftest(verbose=not args.quiet)
        failed = [r.name for r in results if not r.passed]
        print(f"{len(results) - len(failed)}/{len(results)} checks passed")
        return 1 if failed else 0

    try:
        cfg = resolve_config(args)
    except (PtsError, OSError, ValueError, TypeError) as exc:
        parser.error(str(exc))
    if args.print_config:
        print(dumps_json(cfg.to_dict()), end="")
    if getattr(args, "output_dir", None) is None:
        args.output_dir = os.environ.get(OUTPUT_DIR_ENV, "results")
    try:
        if args.command == "ccdf":
            _cmd_ccdf(cfg, args)
        elif args.command == "search-count":
            _cmd_search_count(cfg, args)
        else:
            _cmd_single(cfg, args)
    except (PtsError, OSError) as exc:
        print(f"pmcepts: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
