import statistics

import pytest

from cutbench.circuit import ghz_circuit, strip_measurements
from cutbench.cutfind import CutBudget
from cutbench.errors import ConfigError, DimensionError, EmptyComparisonError
from cutbench.harness import (
    RunRecord, SweepConfig, delta_mae, derive_seed, mae, records_from_csv,
    records_to_csv, run_one, run_sweep, summarize, sweep_cells, win_rate,
    write_outputs, _estimate_cut, _estimate_no_cut,
)
from cutbench.observables import z_magnetization
from cutbench.qpd import GateCut, make_cut_plan
from cutbench.simulator import NoiseProfile

ZERO_NOISE = NoiseProfile(p1=0.0, p2=0.0, p_readout=0.0)


def _rec(family="ghz", n=4, seed=0, strategy="no_cut", mae_=0.1,
         skipped=False, reason=None):
    return RunRecord(family=family, n_qubits=n, seed=seed, strategy=strategy,
                     mae=None if skipped else mae_, skipped=skipped,
                     skip_reason=reason, n_cuts=0, overhead_estimate=1.0,
                     n_subexperiments=0, total_shots=100)


class TestMetrics:
    def test_mae_example(self):
        assert mae([0.1, -0.2], [0.0, 0.0]) == pytest.approx(0.15)

    def test_mae_empty_or_mismatched(self):
        with pytest.raises(DimensionError):
            mae([], [])
        with pytest.raises(DimensionError):
            mae([0.1], [0.0, 0.0])

    def test_delta_mae_sign(self):
        method = [_rec(strategy="fitv3", mae_=0.05, seed=s) for s in range(3)]
        base = [_rec(strategy="no_cut", mae_=0.10, seed=s) for s in range(3)]
        assert delta_mae(method, base) == pytest.approx(-0.05)

    def test_delta_mae_excludes_skips(self):
        method = [_rec(strategy="auto", mae_=0.2, seed=0),
                  _rec(strategy="auto", skipped=True, reason="NoCandidates", seed=1)]
        base = [_rec(seed=0, mae_=0.1), _rec(seed=1, mae_=0.1)]
        assert delta_mae(method, base) == pytest.approx(0.1)

    def test_delta_mae_empty_comparison(self):
        method = [_rec(strategy="auto", skipped=True, reason="NoCandidates")]
        base = [_rec()]
        with pytest.raises(EmptyComparisonError):
            delta_mae(method, base)

    def test_win_rate(self):
        method = [_rec(strategy="fitv3", mae_=m, seed=s)
                  for s, m in enumerate([0.05, 0.15, 0.10])]
        base = [_rec(mae_=0.10, seed=s) for s in range(3)]
        # ties are not wins
        assert win_rate(method, base, 4) == pytest.approx(1 / 3)

    def test_win_rate_missing_width(self):
        with pytest.raises(EmptyComparisonError):
            win_rate([_rec(strategy="fitv3")], [_rec()], 8)


def test_derive_seed_stable_and_sensitive():
    a = derive_seed(0, "ghz", 4, 1, "baseline")
    assert a == derive_seed(0, "ghz", 4, 1, "baseline")
    assert a != derive_seed(0, "ghz", 4, 2, "baseline")
    assert 0 <= a < 2 ** 64


class TestSweepConfig:
    def test_defaults_valid(self):
        cfg = SweepConfig()
        assert cfg.effective_baseline_shots == 200 * 100

    def test_explicit_baseline_shots(self):
        assert SweepConfig(baseline_shots=50).effective_baseline_shots == 50

    def test_unknown_family(self):
        with pytest.raises(ConfigError):
            SweepConfig(families=("bogus",))

    def test_width_bounds(self):
        with pytest.raises(ConfigError):
            SweepConfig(widths=(30,))

    def test_cell_count(self):
        cfg = SweepConfig(families=("ghz", "qft"), widths=(4, 6),
                          seeds=(0,), strategies=("no_cut", "fitv3"))
        assert len(sweep_cells(cfg)) == 8


_SMALL = SweepConfig(families=("ghz",), widths=(4,), seeds=(0,),
                     shots_per_subexperiment=50, reconstruction_samples=20,
                     noise=ZERO_NOISE)


class TestRunOne:
    def test_no_cut_zero_noise_accuracy(self):
        cfg = SweepConfig(families=("ghz",), widths=(4,), seeds=(0,),
                          baseline_shots=1_000_000, noise=ZERO_NOISE)
        rec = run_one("ghz", 4, 0, "no_cut", cfg)
        assert not rec.skipped
        assert rec.mae < 0.005
        assert rec.n_cuts == 0 and rec.overhead_estimate == 1.0
        assert rec.mae == pytest.approx(
            statistics.fmean(rec.per_observable_errors))
        assert rec.total_shots == 1_000_000  # one basis for the Z observable

    def test_fitv3_ghz8_metadata(self):
        cfg = SweepConfig(families=("ghz",), widths=(8,), seeds=(0,),
                          shots_per_subexperiment=50,
                          reconstruction_samples=20, noise=ZERO_NOISE)
        rec = run_one("ghz", 8, 0, "fitv3", cfg)
        assert rec.n_cuts == 1
        assert rec.overhead_estimate == 9.0
        assert rec.n_subexperiments > 0
        assert rec.total_shots > 0
        assert rec.mae is not None and rec.mae < 0.5

    def test_auto_skip_record(self):
        cfg = SweepConfig(families=("qft",), widths=(8,), seeds=(0,))
        rec = run_one("qft", 8, 0, "auto", cfg)
        assert rec.skipped
        assert rec.mae is None
        assert rec.skip_reason == "OverheadExceeded"
        assert rec.total_shots == 0

    def test_empty_plan_degenerates_to_no_cut(self):
        cfg = SweepConfig(families=("ghz",), widths=(4,), seeds=(1,),
                          budget=CutBudget(max_cuts=0),
                          shots_per_subexperiment=50,
                          reconstruction_samples=10)
        a = run_one("ghz", 4, 1, "fitv3", cfg)
        b = run_one("ghz", 4, 1, "no_cut", cfg)
        assert a.mae == b.mae
        assert a.total_shots == b.total_shots

    def test_unknown_strategy(self):
        with pytest.raises(ConfigError):
            run_one("ghz", 4, 0, "bogus", _SMALL)

    def test_baseline_uses_all_shots(self, monkeypatch):
        import cutbench.harness as harness
        calls = []
        real = harness.run_shots

        def spy(circuit, noise, shots, seed):
            calls.append(shots)
            return real(circuit, noise, shots, seed)

        monkeypatch.setattr(harness, "run_shots", spy)
        rec = run_one("ghz", 4, 0, "no_cut", _SMALL)
        assert sum(calls) == _SMALL.effective_baseline_shots
        assert rec.total_shots == sum(calls)


class TestRunSweep:
    def test_record_count_and_order(self):
        cfg = SweepConfig(families=("ghz",), widths=(4,), seeds=(0, 1),
                          strategies=("no_cut", "fitv3"),
                          shots_per_subexperiment=20,
                          reconstruction_samples=5, baseline_shots=100)
        records = run_sweep(cfg, workers=1)
        assert [(r.seed, r.strategy) for r in records] == \
            [(0, "no_cut"), (0, "fitv3"), (1, "no_cut"), (1, "fitv3")]

    def test_workers_do_not_change_results(self):
        cfg = SweepConfig(families=("ghz",), widths=(4, 6), seeds=(0, 1),
                          shots_per_subexperiment=20,
                          reconstruction_samples=5, baseline_shots=100)
        one = records_to_csv(run_sweep(cfg, workers=1))
        two = records_to_csv(run_sweep(cfg, workers=2))
        assert one == two


class TestVarianceScaling:
    def test_more_cuts_more_spread(self):
        # sampling-overhead growth: estimator spread rises with cut count
        nom = strip_measurements(ghz_circuit(6))
        observables = [z_magnetization(6)]
        cfg = SweepConfig(families=("ghz",), widths=(6,), seeds=(0,),
                          shots_per_subexperiment=40,
                          reconstruction_samples=30,
                          budget=CutBudget(max_cuts=2, q_max=6),
                          noise=ZERO_NOISE)
        plans = {
            1: make_cut_plan(nom, [GateCut(3)]),
            2: make_cut_plan(nom, [GateCut(2), GateCut(4)]),
        }
        spreads = {}
        base_vals = []
        shots_budget = cfg.shots_per_subexperiment * cfg.reconstruction_samples
        for trial in range(50):
            key = (0, "ghz", 6, trial)
            base_vals.append(_estimate_no_cut(
                nom, observables, ZERO_NOISE, shots_budget,
                key + ("baseline",))[0][0])
            for k, plan in plans.items():
                vals = _estimate_cut(nom, plan, observables, cfg,
                                     key + (f"cut{k}",))[0]
                spreads.setdefault(k, []).append(vals[0])
        s0 = statistics.stdev(base_vals)
        s1 = statistics.stdev(spreads[1])
        s2 = statistics.stdev(spreads[2])
        assert s0 < s1 < s2


class TestSummarize:
    def _records(self):
        recs = []
        for seed in range(3):
            recs.append(_rec(seed=seed, mae_=0.10))
            recs.append(_rec(seed=seed, strategy="fitv3", mae_=0.05))
        recs.append(_rec(seed=0, strategy="auto", skipped=True,
                         reason="NoCandidates"))
        return recs

    def test_structure(self):
        s = summarize(self._records())
        fm = s["family_mae"]["ghz"]
        assert fm["no_cut"]["mean"] == pytest.approx(0.10)
        assert fm["fitv3"]["n_runs"] == 3 and fm["fitv3"]["n_skipped"] == 0
        assert fm["auto"]["mean"] is None and fm["auto"]["n_skipped"] == 1
        assert s["family_delta_mae"]["ghz"]["fitv3"] == pytest.approx(-0.05)
        wr = s["win_rate_by_width"]["ghz"]
        assert wr["fitv3"]["rates"]["4"] == 1.0
        assert wr["fitv3"]["no_matched_pairs"] is False
        assert wr["auto"]["no_matched_pairs"] is True

    def test_no_delta_sections_without_baseline(self):
        recs = [_rec(strategy="fitv3", mae_=0.05, seed=s) for s in range(2)]
        s = summarize(recs)
        assert "family_mae" in s
        assert "family_delta_mae" not in s
        assert "win_rate_by_width" not in s


class TestCsv:
    def test_round_trip(self):
        recs = [_rec(seed=0, mae_=0.125), _rec(seed=1, strategy="auto",
                                               skipped=True, reason="NoCandidates")]
        back = records_from_csv(records_to_csv(recs))
        assert len(back) == 2
        assert back[0].mae == 0.125
        assert back[1].skipped and back[1].mae is None
        assert back[1].skip_reason == "NoCandidates"
        # floats survive exactly via repr
        recs2 = [_rec(mae_=0.1 + 0.2)]
        assert records_from_csv(records_to_csv(recs2))[0].mae == 0.1 + 0.2

    def test_malformed_row_names_line(self):
        text = records_to_csv([_rec(), _rec(seed=1)])
        lines = text.splitlines()
        lines[2] = lines[2].replace("ghz,4,1", "ghz,four,1")
        with pytest.raises(ConfigError, match="line 3"):
            records_from_csv("\n".join(lines) + "\n")

    def test_bad_header(self):
        with pytest.raises(ConfigError):
            records_from_csv("a,b,c\n1,2,3\n")


def test_write_outputs(tmp_path):
    recs = [_rec(seed=0), _rec(seed=0, strategy="fitv3", mae_=0.05)]
    write_outputs(recs, summarize(recs), str(tmp_path))
    assert (tmp_path / "results.csv").exists()
    assert (tmp_path / "summary.json").exists()
    assert (tmp_path / "runs" / "ghz_n4_s0_no_cut.json").exists()
    assert (tmp_path / "runs" / "ghz_n4_s0_fitv3.json").exists()
