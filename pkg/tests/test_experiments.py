import dataclasses
import logging
import math

import pytest

from cordon import experiments
from cordon.errors import GenerationFailedError, InvalidSpecError
from cordon.experiments import (
    CSV_COLUMNS,
    TIMING_COLUMNS,
    ConfigError,
    ExperimentConfig,
    Percentiles,
    TrialRecord,
    bundled_config,
    format_config,
    parse_config,
    records_from_csv,
    records_to_csv,
    run_experiment,
    run_trial,
    summarize,
    trend_checks,
)
from cordon.grid import derive_seed

SMALL = ExperimentConfig(experiment="t", kind="open", sweep="obstacles", start=0, stop=20, step=10,
                         trials=3, width=16, height=16, targets=(2, 4), seed=5)


def record(point, savings, value=None, t_hol=0.01, t_par=0.02):
    return TrialRecord(
        experiment="x", point=point, sweep_value=point if value is None else value, trial=0, seed=0,
        attempts=1, kind="open", width=10, height=10, obstacles=0, saturated=False, m=2,
        robots_individual=(savings or 0) + 2, robots_holistic=2, savings=savings,
        feasible_individual=savings is not None, feasible_holistic=savings is not None,
        oracle_verified=True, solver="s", time_individual_total=2 * t_par,
        time_individual_parallel=t_par, time_individual_max=t_par, time_holistic=t_hol)


# --- percentiles and summaries ----------------------------------------------

def test_median_of_five():
    assert Percentiles.of([0, 0, 1, 2, 5]).median == 1


def test_single_value_percentiles():
    p = Percentiles.of([7])
    assert p.p5 == p.p25 == p.median == p.p75 == p.p95 == 7


def test_nearest_rank_fixture():
    # sorted: 1 2 3 4 4 5 6 7 7 8 9 10 11 12 13 14 15 16 18 20
    # ranks ceil(p*20/100): 1, 5, 10, 15, 19
    values = [3, 7, 7, 1, 9, 12, 4, 4, 15, 2, 8, 6, 11, 5, 10, 13, 14, 16, 18, 20]
    assert Percentiles.of(values) == Percentiles(1, 4, 8, 13, 18)


def test_summary_excludes_infeasible_points(caplog):
    recs = [record(0, 1), record(0, 3), record(1, None), record(2, 0)]
    with caplog.at_level(logging.WARNING):
        s = summarize(recs)
    assert [p.point for p in s.points] == [0, 2]
    assert "no feasible trials" in caplog.text
    assert s.points[0].mean_savings == 2.0 and s.points[0].n_feasible == 2
    assert s.points[0].time_ratio.median == pytest.approx(0.5)
    assert s.to_csv().splitlines()[0].startswith("point,sweep_value,n,n_feasible,mean_savings,savings_p5")


# --- trend checks ----------------------------------------------------------

def test_flat_sweep_has_no_peak():
    s = summarize([record(p, 2) for p in range(5)])
    rep = trend_checks(s, "obstacles")
    assert rep.interior_peak is False and rep.timing_crossover is None


def test_interior_peak_and_timing_direction():
    recs = [record(p, v, t_hol=0.01 * (5 - p), t_par=0.01) for p, v in enumerate([0, 3, 5, 2, 0])]
    rep = trend_checks(summarize(recs), "obstacles")
    assert rep.interior_peak is True and rep.timing_crossover is True
    assert "spearman -1.000" in rep.details["timing_crossover"]


def test_too_few_points_inconclusive():
    rep = trend_checks(summarize([record(0, 1), record(1, 3)]), "obstacles")
    assert rep.interior_peak is None and rep.timing_crossover is None
    assert rep.lines()[0] == "note: inconclusive: fewer than 3 sweep points"


def test_size_and_target_trends():
    assert trend_checks(summarize([record(p, v) for p, v in enumerate([5, 3, 1])]), "size").size_decline
    recs = [record(p, v, value=x) for p, (x, v) in enumerate([(1, 0), (26, 2), (51, 3), (76, 5)])]
    rep = trend_checks(summarize(recs), "targets")
    assert rep.target_growth is True
    assert "2.000 -> 5.000" in rep.details["target_growth"]


# --- configs ---------------------------------------------------------------

@pytest.mark.parametrize("name", ["exp1", "exp2", "exp3", "exp4", "exp5",
                                  "full_exp2", "full_exp3", "full_exp4", "full_exp5"])
def test_bundled_configs_parse_and_round_trip(name):
    cfg = bundled_config(name)
    assert parse_config(format_config(cfg)) == cfg


def test_desk_configs_meet_scale():
    for name in ("exp2", "exp3"):
        cfg = bundled_config(name)
        assert len(cfg.sweep_values()) >= 8 and cfg.trials >= 50
        assert (cfg.width, cfg.height) == (60, 60)


@pytest.mark.parametrize("text, line", [
    ("kind = open\n", 1),
    ("[experiment]\nkind = open\nspeed = 3\n", 3),
    ("[experiment]\n# note\nfrom = ten\n", 3),
    ("[experiment]\nsweep = obstacles\nfrom = 10\nto = 5\n", 4),
    ("[experiment]\nsweep = obstacles\nstep = 0\n", 3),
    ("[experiment]\ntrials = 0\nkind = open\n", 2),
    ("[experiment]\nkind = open\nkind = closed\n", 3),
    ("[experiment]\nsweep = sideways\n", 2),
    ("[experiment]\nchecked = maybe\n", 2),
    ("[experiment]\ntrials\n", 2),
    ("[other]\n", 1),
])
def test_config_errors(text, line):
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert info.value.line == line


def test_config_rejects_bad_values():
    with pytest.raises(InvalidSpecError):
        ExperimentConfig(trials=0)
    with pytest.raises(InvalidSpecError):
        ExperimentConfig(map="pathologic", sweep="obstacles")


# --- runs ------------------------------------------------------------------

def test_exp1_savings_one():
    (rec,) = run_experiment(bundled_config("exp1"))
    assert (rec.robots_individual, rec.robots_holistic, rec.savings) == (3, 2, 1)
    assert rec.oracle_verified is True


def test_records_keep_order_and_seeds():
    recs = run_experiment(SMALL)
    assert [(r.point, r.trial) for r in recs] == [(p, t) for p in range(3) for t in range(3)]
    assert recs[4].seed == derive_seed(5, 1, 1, recs[4].attempts - 1)
    assert max(r.attempts for r in recs) > 1  # 16x16 with big rectangles sometimes fails
    assert all(r.savings is not None and r.savings >= 0 for r in recs)
    assert all(r.oracle_verified for r in recs)


def test_csv_round_trip():
    recs = run_experiment(SMALL)
    text = records_to_csv(recs)
    assert text.splitlines()[0] == ",".join(CSV_COLUMNS)
    back = records_from_csv(text)
    assert records_to_csv(back) == text
    bare = records_to_csv(recs, timing=False)
    assert not any(c in bare.splitlines()[0] for c in TIMING_COLUMNS)
    assert all(math.isnan(r.time_holistic) for r in records_from_csv(bare))


def test_runs_deterministic_across_jobs():
    a = records_to_csv(run_experiment(SMALL), timing=False)
    b = records_to_csv(run_experiment(SMALL), timing=False)
    c = records_to_csv(run_experiment(SMALL, jobs=2), timing=False)
    assert a == b == c


def test_failed_generation_is_reseeded(monkeypatch, caplog):
    real = experiments.generate_environment
    calls = []

    def flaky(spec):
        calls.append(spec.seed)
        if len(calls) < 3:
            raise GenerationFailedError("too crowded")
        return real(spec)

    monkeypatch.setattr(experiments, "generate_environment", flaky)
    with caplog.at_level(logging.INFO, logger="cordon.experiments"):
        rec = run_trial(SMALL, 1, 2)
    assert rec.attempts == 3 and rec.seed == derive_seed(5, 1, 2, 2)
    assert calls == [derive_seed(5, 1, 2, a) for a in range(3)]
    assert caplog.text.count("discarded") == 2


def test_closed_saturation_is_recorded():
    cfg = dataclasses.replace(SMALL, kind="closed", start=5, stop=500, step=495, trials=1)
    recs = run_experiment(cfg)
    assert [r.saturated for r in recs] == [False, True]


@pytest.mark.parametrize("name, points, trials, first, last", [
    ("full_exp2", 16, 1000, 10, 235),
    ("full_exp3", 31, 1000, 10, 1510),
    ("full_exp4", 12, 100, 1, 551),
    ("full_exp5", 9, 1000, 50, 370),
])
def test_full_scale_ladders(name, points, trials, first, last):
    cfg = bundled_config(name)
    values = cfg.sweep_values()
    assert (len(values), cfg.trials, values[0], values[-1]) == (points, trials, first, last)
