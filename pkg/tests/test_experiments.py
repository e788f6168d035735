import logging

import numpy as np
import pytest

from risnf import InvalidArgumentError
from risnf.config import ExperimentConfig
from risnf.experiments import (MatrixStore, ResultTable, cache_or_compute, key_hash,
                               read_csv, run_eigen_spectrum, run_nmse_vs_snr,
                               run_nmse_vs_spacing, run_rank_sweep)
from risnf.correlation import ClusterSet, SubspaceIntegrationGrid
from risnf.matrix_io import read_matrix

SMALL = dict(clusters=ClusterSet(cluster_count=2, rays_per_cluster=10),
             grid=SubspaceIntegrationGrid(6, 6, 3))


def no_timestamp(table):
    return [l for l in table.to_csv().splitlines() if not l.startswith("# timestamp")]


def small_nmse(**kw):
    base = dict(arrays={"ris": (2, 2, 0.25), "ue": (2, 1, 0.25), "bs": (2, 1, 0.25)},
                snr_db=(0.0, 10.0), seed_count=2, trials=20, **SMALL)
    base.update(kw)
    return ExperimentConfig.defaults("NmseVsSnr").with_overrides(**base)


class TestResultTable:

    def test_ragged(self):
        with pytest.raises(InvalidArgumentError):
            ResultTable(["a", "b"], [(1, 2), (3,)])

    def test_csv_roundtrip(self, tmp_path):
        t = ResultTable(["x", "name", "flag", "v"],
                        [(0.125, "exact", True, 1 / 3), (0.5, "sub", False, float("nan"))],
                        {"experiment": "Demo", "config_hash": "abc"})
        p = tmp_path / "t.csv"
        t.write_csv(p)
        back = read_csv(p)
        assert back.metadata == {"experiment": "Demo", "config_hash": "abc"}
        assert back.columns == t.columns
        assert back.rows[0] == ("0.125", "exact", "true", repr(1 / 3))
        assert back.rows[1][3] == ""
        assert float(back.rows[0][3]) == 1 / 3  # repr keeps every bit

    def test_select(self):
        t = ResultTable(["a", "b"], [(1, "x"), (2, "y"), (3, "x")])
        assert [r["a"] for r in t.select(b="x")] == [1, 3]
        assert t.column("b") == ["x", "y", "x"]


class TestCache:

    def test_miss_then_hit(self, tmp_path):
        calls = []

        def producer():
            calls.append(1)
            return np.eye(3)

        p1 = cache_or_compute({"seed": 1}, producer, tmp_path)
        p2 = cache_or_compute({"seed": 1}, producer, tmp_path)
        assert p1 == p2 and len(calls) == 1
        cache_or_compute({"seed": 2}, producer, tmp_path)
        assert len(calls) == 2
        assert np.array_equal(read_matrix(p1, "correlation")[0], np.eye(3))

    def test_corrupt_file_recomputed(self, tmp_path, caplog):
        p = cache_or_compute("k", lambda: np.eye(2), tmp_path)
        with open(p, "r+b") as fh:
            fh.write(b"JUNK")
        with caplog.at_level(logging.WARNING, logger="risnf"):
            cache_or_compute("k", lambda: 2 * np.eye(2), tmp_path)
        assert "corrupt cache file" in caplog.text
        assert np.array_equal(read_matrix(p)[0], 2 * np.eye(2))

    def test_key_hash(self):
        a = key_hash({"grid": SubspaceIntegrationGrid(), "x": 0.1})
        assert a == key_hash({"x": 0.1, "grid": SubspaceIntegrationGrid()})
        assert a != key_hash({"grid": SubspaceIntegrationGrid(), "x": 0.1 + 1e-16 * 2})

    def test_store_gives_same_result_as_no_store(self, tmp_path):
        cfg = ExperimentConfig.defaults("RankVsSpacing").with_overrides(
            spacings=(0.25,), ris_sizes=((3, 3),), **SMALL)
        store = MatrixStore(str(tmp_path))
        a = run_rank_sweep(cfg, store=store)
        b = run_rank_sweep(cfg, store=store)  # all hits
        c = run_rank_sweep(cfg)
        assert a.rows == b.rows == c.rows


class TestEigenSpectrum:

    def test_degenerate_single_element(self):
        cfg = ExperimentConfig.defaults("EigenSpectrum").with_overrides(
            arrays={"ris": (1, 1, 0.5)}, spacings=(0.5,), **SMALL)
        t = run_eigen_spectrum(cfg)
        assert len(t.rows) == 4
        assert all(r["eigenvalue_db"] == pytest.approx(0.0, abs=1e-12) for r in t.select())
        assert set(t.column("effective_rank")) == {1}

    def test_layout(self):
        cfg = ExperimentConfig.defaults("EigenSpectrum").with_overrides(
            arrays={"ris": (4, 4, 0.5)}, spacings=(0.5, 0.25), **SMALL)
        t = run_eigen_spectrum(cfg)
        assert len(t.rows) == 2 * 4 * 16
        for sp in (0.5, 0.25):
            for kind in ("exact", "subspace"):
                for mc in (False, True):
                    vals = [r["eigenvalue_db"] for r in
                            t.select(spacing_wl=sp, statistics_kind=kind, coupling=mc)]
                    assert vals == sorted(vals, reverse=True)
                    assert vals[0] <= 10 * np.log10(16) + 1e-9

    def test_wrong_experiment(self):
        with pytest.raises(InvalidArgumentError):
            run_eigen_spectrum(ExperimentConfig.defaults("RankVsSpacing"))

    def test_half_wave_median_gap(self):
        # 32 x 32 RIS at half-wavelength spacing: coupling barely moves the spectrum
        cfg = ExperimentConfig.defaults("EigenSpectrum").with_overrides(spacings=(0.5,))
        t = run_eigen_spectrum(cfg)
        off = np.array([r["eigenvalue_db"] for r in
                        t.select(statistics_kind="exact", coupling=False)])
        on = np.array([r["eigenvalue_db"] for r in
                       t.select(statistics_kind="exact", coupling=True)])
        assert np.median(np.abs(on - off)) <= 1.0
        # the tail below the rank cliff is round-off, so also check the plateau alone
        r = t.select(statistics_kind="exact", coupling=False)[0]["effective_rank"]
        assert np.median(np.abs(on[:r] - off[:r])) <= 1.0


class TestRankSweep:

    def test_single_point(self):
        cfg = ExperimentConfig.defaults("RankVsSpacing").with_overrides(
            spacings=(0.25,), ris_sizes=((4, 4),), rank_thresholds=(1e-5,), **SMALL)
        t = run_rank_sweep(cfg)
        assert len(t.rows) == 4
        assert set(t.column("spacing_wl")) == {0.25}

    def test_thread_count_does_not_change_output(self):
        cfg = ExperimentConfig.defaults("RankVsSpacing").with_overrides(
            spacings=(0.125, 0.25, 0.5), ris_sizes=((4, 4), (6, 4)), **SMALL)
        assert no_timestamp(run_rank_sweep(cfg, threads=1)) == \
            no_timestamp(run_rank_sweep(cfg, threads=4))

    def test_metadata(self):
        cfg = ExperimentConfig.defaults("RankVsSpacing").with_overrides(
            spacings=(0.5,), ris_sizes=((2, 2),), seed=4, **SMALL)
        md = run_rank_sweep(cfg).metadata
        assert md["config_hash"] == cfg.config_hash
        assert md["seed"] == 4
        assert md["version"].startswith("risnf ")
        assert "timestamp" in md


class TestNmse:

    def test_variants_and_columns(self):
        t = run_nmse_vs_snr(small_nmse())
        assert t.columns == ["snr_db", "estimator", "statistics_kind", "mc_aware",
                             "nmse_analytic_db", "nmse_mc_db", "seed_spread_db"]
        per_point = [tuple(r[1:4]) for r in t.rows[:6]]
        assert per_point == [("LS", "none", "n/a"), ("MMSE", "exact", "true"),
                             ("RS-LS", "exact", "true"), ("RS-LS", "exact", "false"),
                             ("RS-LS", "subspace", "true"), ("RS-LS", "subspace", "false")]
        assert len(t.rows) == 12

    def test_ls_analytic_closed_form(self):
        cfg = small_nmse()
        K, N = 4, 2
        for r in run_nmse_vs_snr(cfg).select(estimator="LS"):
            gamma = 10 ** (r["snr_db"] / 10)
            assert r["nmse_analytic_db"] == pytest.approx(-10 * np.log10(gamma * K * N),
                                                          abs=1e-10)
            assert r["seed_spread_db"] == pytest.approx(0.0, abs=1e-10)

    def test_ordering(self):
        t = run_nmse_vs_snr(small_nmse())
        for snr in (0.0, 10.0):
            ls = t.select(snr_db=snr, estimator="LS")[0]["nmse_analytic_db"]
            mmse = t.select(snr_db=snr, estimator="MMSE")[0]["nmse_analytic_db"]
            assert mmse <= ls + 1e-9

    def test_mc_tracks_analytic(self):
        t = run_nmse_vs_snr(small_nmse(trials=400, seed_count=1, snr_db=(10.0,)))
        for r in t.select():
            assert r["nmse_mc_db"] == pytest.approx(r["nmse_analytic_db"], abs=0.5)

    def test_thread_count_does_not_change_output(self):
        cfg = small_nmse(seed_count=3, trials=5)
        assert no_timestamp(run_nmse_vs_snr(cfg, threads=1)) == \
            no_timestamp(run_nmse_vs_snr(cfg, threads=3))

    def test_zero_trials_leaves_mc_blank(self):
        t = run_nmse_vs_snr(small_nmse(trials=0))
        assert all(np.isnan(v) for v in t.column("nmse_mc_db"))

    def test_spacing_single_point(self):
        cfg = ExperimentConfig.defaults("NmseVsSpacing").with_overrides(
            arrays={"ris": (2, 2, 0.5), "ue": (1, 1, 0.5), "bs": (2, 1, 0.5)},
            spacings=(0.3,), seed_count=1, trials=3, **SMALL)
        t = run_nmse_vs_spacing(cfg)
        assert [r[2:5] for r in t.rows] == [("LS", "none", "n/a"), ("RS-LS", "exact", "true")]
        assert t.column("spacing_wl") == [0.3, 0.3]
