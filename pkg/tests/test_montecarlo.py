import math

import numpy as np
import pytest

from hodoiod.hodograph import MOON
from hodoiod.montecarlo import (
    SUMMARY_FIELDS,
    TRIAL_FIELDS,
    LevelResult,
    McConfig,
    McResult,
    read_summary_csv,
    rows_to_csv,
    run_monte_carlo,
    run_trial,
    summarize,
    trial_rows,
    trial_seed,
)
from hodoiod.simulate import LUNAR_FOUR_ANOMALIES, Scenario, lunar_example_elements


@pytest.fixture
def small_cfg():
    sc = Scenario(lunar_example_elements(), MOON, LUNAR_FOUR_ANOMALIES)
    return McConfig(sc, trials=30, noise_levels=(1.0, 0.1), master_seed=99)


def test_trial_seed_is_stable():
    assert trial_seed(1, 0, 0) == trial_seed(1, 0, 0)
    seeds = {trial_seed(1, li, t) for li in range(3) for t in range(100)}
    assert len(seeds) == 300
    assert trial_seed(2, 0, 0) != trial_seed(1, 0, 0)


def test_zero_noise_trial_is_exact():
    sc = Scenario(lunar_example_elements(), MOON, LUNAR_FOUR_ANOMALIES)
    a, e, ok = run_trial(McConfig(sc, 1, (0.0,)), 0, 0)
    assert ok and abs(a) < 1e-6 and abs(e) < 1e-10


def test_config_validation():
    sc = Scenario(lunar_example_elements(), MOON, LUNAR_FOUR_ANOMALIES)
    with pytest.raises(ValueError):
        McConfig(sc, 0, (1.0,))
    with pytest.raises(ValueError):
        McConfig(sc, 5, (-1.0,))


def test_run_is_deterministic(small_cfg):
    a = summarize(run_monte_carlo(small_cfg))
    b = summarize(run_monte_carlo(small_cfg, chunk_size=7))
    assert rows_to_csv(a, SUMMARY_FIELDS) == rows_to_csv(b, SUMMARY_FIELDS)


def test_workers_do_not_change_results(small_cfg):
    a = run_monte_carlo(small_cfg)
    b = run_monte_carlo(small_cfg, workers=2, chunk_size=8)
    assert rows_to_csv(trial_rows(a), TRIAL_FIELDS) == rows_to_csv(trial_rows(b), TRIAL_FIELDS)


def test_errors_scale_with_noise(small_cfg):
    res = run_monte_carlo(small_cfg)
    hi, lo = res.levels
    assert hi.noise_deg == 1.0 and lo.noise_deg == 0.1
    assert hi.a_error_sigma > 3 * lo.a_error_sigma
    assert hi.e_error_sigma > 3 * lo.e_error_sigma


def _level(a, e, ok):
    return LevelResult(4, 0.5, np.array(a, float), np.array(e, float), np.array(ok, bool))


def test_summary_statistics():
    lv = _level([3.0, -4.0, math.nan], [0.1, -0.1, math.nan], [True, True, False])
    row = summarize(McResult([lv]))[0]
    assert row["a_err_sigma_km"] == pytest.approx(math.sqrt(12.5))
    assert row["e_err_sigma"] == pytest.approx(0.1)
    assert row["a_err_mean_km"] == pytest.approx(-0.5)
    assert row["a_err_std_km"] == pytest.approx(np.std([3.0, -4.0], ddof=1))
    assert (row["trials"], row["converged"], row["failures"]) == (3, 2, 1)


def test_summary_edge_cases():
    one = summarize(McResult([_level([-2.0], [0.01], [True])]))[0]
    assert one["a_err_sigma_km"] == 2.0 and math.isnan(one["a_err_std_km"])
    none = summarize(McResult([_level([math.nan], [math.nan], [False])]))[0]
    assert math.isnan(none["a_err_sigma_km"]) and math.isnan(none["a_err_mean_km"])


def test_csv_round_trip(small_cfg):
    rows = summarize(run_monte_carlo(small_cfg))
    text = rows_to_csv(rows, SUMMARY_FIELDS)
    assert text.splitlines()[0] == ",".join(SUMMARY_FIELDS)
    assert "\r" not in text
    back = read_summary_csv(text)
    for a, b in zip(rows, back):
        for k in SUMMARY_FIELDS:
            assert a[k] == b[k] or (math.isnan(a[k]) and math.isnan(b[k]))


def test_trial_rows(small_cfg):
    rows = list(trial_rows(run_monte_carlo(small_cfg)))
    assert len(rows) == 60
    assert [r["trial"] for r in rows[:3]] == [0, 1, 2]
    assert all(r["abs_a_err_km"] == abs(r["a_err_km"]) for r in rows)
