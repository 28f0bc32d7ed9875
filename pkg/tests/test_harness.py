import json
from dataclasses import replace

import numpy as np
import pytest

from pmcepts.errors import ConfigurationError
from pmcepts.harness import (
    PURPOSES,
    CcdfCurve,
    ExperimentConfig,
    atomic_write,
    exceedance_counts,
    first_passage,
    run_ccdf,
    run_search_count,
    search_stats_to_csv,
    seed_stream,
    simulate_symbol,
)
from pmcepts.ofdm import to_db

SMALL = ExperimentConfig(n_symbols=40, master_seed=3)


@pytest.fixture(scope="module")
def small_ccdf():
    return run_ccdf(SMALL)


class TestSeedStream:
    def test_repeatable(self):
        assert seed_stream(1, 2, "bits") == seed_stream(1, 2, "bits")

    def test_golden_values(self):
        # master 0 reproduces the reference SplitMix64 stream seeded with 0
        assert seed_stream(0, 0, "bits") == 0xE220A8397B1DCDAF
        assert seed_stream(0, 0, "partition") == 0x6E789E6AA1B965F4
        assert seed_stream(0, 0, "optimizer") == 0x06C45D188009454F

    def test_no_collisions(self):
        seen = {seed_stream(12345, i, p) for i in range(340_000) for p in PURPOSES}
        assert len(seen) == 340_000 * 3

    def test_master_changes_everything(self):
        for i in range(200):
            for p in PURPOSES:
                assert seed_stream(1, i, p) != seed_stream(2, i, p)

    def test_64_bit(self):
        assert all(0 <= seed_stream(2**64 - 1, i, "optimizer") < 2**64 for i in range(100))


class TestConfig:
    def test_paper_defaults(self):
        cfg = ExperimentConfig()
        assert (cfg.n_subcarriers, cfg.m_subblocks, cfg.w_alphabet, cfg.oversampling) == (256, 8, 2, 4)
        assert cfg.n_symbols == 100_000
        assert (cfg.pmce.rho, cfg.pmce.alpha, cfg.pmce.samples) == (0.1, 0.6, 40)
        assert ExperimentConfig.desk().n_symbols == 10_000

    def test_grid(self):
        grid = ExperimentConfig().grid_db
        assert grid[0] == 4.0 and grid[-1] == 13.0 and grid.size == 181

    @pytest.mark.parametrize(
        "change",
        [
            {"methods": ("none", "none")},
            {"methods": ("annealing",)},
            {"methods": ()},
            {"w_alphabet": 4},
            {"m_subblocks": 7},
            {"n_symbols": 0},
        ],
    )
    def test_rejects(self, change):
        with pytest.raises(ConfigurationError):
            replace(SMALL, **change).validate()

    def test_w4_without_stochastic_methods(self):
        replace(SMALL, w_alphabet=4, methods=("none", "opts", "ipts")).validate()

    def test_dict_round_trip(self):
        cfg = replace(SMALL, methods=("opts", "pmce"))
        data = json.loads(json.dumps(cfg.to_dict()))
        assert ExperimentConfig.from_dict(data) == cfg

    def test_unknown_key(self):
        with pytest.raises(ConfigurationError):
            ExperimentConfig.from_dict({"bogus": 1})


class TestCcdf:
    def test_single_symbol_step(self):
        result = run_ccdf(replace(SMALL, n_symbols=1, methods=("none",)))
        curve = result.curves["none"]
        value = result.papr_db["none"][0]
        np.testing.assert_array_equal(curve.prob, (curve.grid_db < value).astype(float))

    def test_monotone_and_bounded(self, small_ccdf):
        for curve in small_ccdf.curves.values():
            assert np.all(np.diff(curve.prob) <= 0)
            assert np.all((curve.prob >= 0) & (curve.prob <= 1))

    def test_exceedance_is_strict(self):
        np.testing.assert_array_equal(exceedance_counts([5.0, 6.0, 7.0], np.array([5.0, 6.0, 6.5])), [2, 1, 1])

    def test_paired_dominance(self, small_ccdf):
        d = small_ccdf.papr_db
        assert np.all(d["opts"] <= d["pmce"] + 1e-12)
        assert np.all(d["opts"] <= d["ce"] + 1e-12)
        assert np.all(d["opts"] <= d["ipts"] + 1e-12)
        for m in ("opts", "ipts", "ce", "pmce"):
            assert np.all(d[m] <= d["none"] + 1e-12)
            assert np.all(small_ccdf.curves[m].prob <= small_ccdf.curves["none"].prob)

    def test_deterministic(self, small_ccdf):
        again = run_ccdf(SMALL)
        for m in SMALL.methods:
            np.testing.assert_array_equal(again.papr_db[m], small_ccdf.papr_db[m])
        assert again.to_csv() == small_ccdf.to_csv()

    def test_merge_is_exact(self, small_ccdf):
        merged = run_ccdf(SMALL, chunks=[(0, 7), (7, 8), (8, 31), (31, 40)])
        for m in SMALL.methods:
            np.testing.assert_array_equal(merged.curves[m].exceed, small_ccdf.curves[m].exceed)
        assert merged.to_csv() == small_ccdf.to_csv()

    def test_worker_pool_matches(self, small_ccdf):
        pooled = run_ccdf(replace(SMALL, workers=2))
        assert pooled.to_csv() == small_ccdf.to_csv()

    def test_papr_at_interpolates(self):
        curve = CcdfCurve("x", np.array([1.0, 2.0, 3.0]), np.array([100, 10, 1]), 1000)
        assert curve.papr_at(1e-2) == pytest.approx(2.0)
        assert curve.papr_at(10**-2.5) == pytest.approx(2.5)

    def test_csv_and_json(self, small_ccdf):
        lines = small_ccdf.to_csv().splitlines()
        assert lines[0] == "papr0_db,ccdf_none,ccdf_opts,ccdf_ipts,ccdf_ce,ccdf_pmce"
        assert len(lines) == 1 + SMALL.grid_db.size
        payload = small_ccdf.to_dict()
        assert payload["config"]["master_seed"] == 3
        assert len(payload["curves"]["pmce"]["prob"]) == SMALL.grid_db.size

    def test_average_evaluations(self, small_ccdf):
        assert small_ccdf.evaluations["opts"] == 256 * SMALL.n_symbols
        assert small_ccdf.evaluations["ipts"] == 14 * SMALL.n_symbols
        assert small_ccdf.evaluations["none"] == SMALL.n_symbols


class TestSearchCount:
    cfg = replace(SMALL, n_symbols=25, methods=("opts", "ipts", "ce", "pmce"))

    def test_huge_threshold_costs_one(self):
        (stats,) = run_search_count(self.cfg, [1e6])
        assert stats.avg_evaluations == {m: 1.0 for m in self.cfg.methods}

    def test_unreachable_threshold_exhausts(self):
        (stats,) = run_search_count(self.cfg, [-50.0])
        assert stats.avg_evaluations["opts"] == 256
        assert stats.avg_evaluations["ipts"] == 14
        free = [simulate_symbol(self.cfg, i) for i in range(self.cfg.n_symbols)]
        for m in ("ce", "pmce"):
            assert stats.total_evaluations[m] == sum(r[m].evaluations for r in free)

    def test_non_increasing_in_threshold(self):
        stats = run_search_count(self.cfg, np.arange(6.0, 10.01, 0.25))
        for m in self.cfg.methods:
            avg = [s.avg_evaluations[m] for s in stats]
            assert all(a >= b for a, b in zip(avg, avg[1:]))
            assert avg[-1] >= 1

    def test_matches_threshold_terminated_runs(self):
        thresholds = (7.0, 7.5, 8.25)
        stats = run_search_count(self.cfg, thresholds)
        for k, t in enumerate(thresholds):
            total = {m: 0 for m in self.cfg.methods}
            for i in range(self.cfg.n_symbols):
                for m, res in simulate_symbol(self.cfg, i, stop_at_db=t).items():
                    total[m] += res.evaluations
            assert total == stats[k].total_evaluations

    def test_bounds(self):
        for s in run_search_count(self.cfg, (7.0, 9.0)):
            assert s.avg_evaluations["opts"] <= 256
            assert s.avg_evaluations["ipts"] <= 14

    def test_csv(self):
        text = search_stats_to_csv(run_search_count(self.cfg, (8.0,)))
        assert text.splitlines()[0] == "threshold_db,avg_evals_opts,avg_evals_ipts,avg_evals_ce,avg_evals_pmce"

    def test_needs_an_optimizer(self):
        with pytest.raises(ConfigurationError):
            run_search_count(replace(self.cfg, methods=("none",)), (8.0,))


def test_first_passage():
    assert first_passage(np.array([9.0, 8.0, 7.0]), 8.0) == 2
    assert first_passage(np.array([9.0, 8.0, 7.0]), 6.0) == 3
    assert first_passage(to_db(np.array([10.0])), 10.0) == 1


def test_atomic_write_leaves_no_partial(tmp_path):
    target = tmp_path / "out.csv"
    atomic_write(str(target), "a,b\n")
    assert target.read_text() == "a,b\n"

    with pytest.raises(TypeError):
        atomic_write(str(tmp_path / "bad.csv"), 123)
    assert sorted(p.name for p in tmp_path.iterdir()) == ["out.csv"]
