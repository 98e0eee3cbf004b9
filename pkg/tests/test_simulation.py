import numpy as np
import pytest

from mgfnorm.alternatives import NORMAL, AlternativeSpec
from mgfnorm.errors import DataError
from mgfnorm.simulation import (CriticalTable, McConfig, empirical_p_value,
                                estimate_critical_values, iid_test, quantile_index,
                                quantile_standard_error, rejection_rate, replicate_rng,
                                sample_standard_normal, simulate_statistics, upper_quantile)
from mgfnorm.statistic import compute_tn_beta


def test_standard_normal_determinism_and_moments():
    a = sample_standard_normal(100_000, 1, replicate_rng(3, 0, 1))
    b = sample_standard_normal(100_000, 1, replicate_rng(3, 0, 1))
    assert np.array_equal(a, b)
    assert abs(a.mean()) < 4 / np.sqrt(len(a))
    assert abs(a.var() - 1.0) < 0.05
    with pytest.raises(DataError):
        sample_standard_normal(2, 2, replicate_rng(0))


def test_streams_are_distinct():
    a = replicate_rng(1, 0, 2, 5).random(4)
    b = replicate_rng(1, 0, 2, 6).random(4)
    c = replicate_rng(2, 0, 2, 5).random(4)
    assert not np.array_equal(a, b) and not np.array_equal(a, c)


def test_worker_count_does_not_change_results():
    one = simulate_statistics(NORMAL, 2, 20, (3.0,), (0.5,), 300, 7, (0, 2, 20), workers=1)
    two = simulate_statistics(NORMAL, 2, 20, (3.0,), (0.5,), 300, 7, (0, 2, 20), workers=2)
    assert np.array_equal(one.values, two.values)
    assert one.columns == [("tn", 3.0), ("hw", 0.5)]
    assert np.array_equal(one.column(("hw", 0.5)), one.values[:, 1])


def test_p_value_examples():
    draws = np.arange(1.0, 1000.0)
    assert empirical_p_value(1e9, draws) == pytest.approx(1 / 1000)
    assert empirical_p_value(-1.0, draws) == 1.0
    assert empirical_p_value(float(np.median(draws)), draws) == pytest.approx(0.5, abs=0.01)
    with pytest.raises(DataError):
        empirical_p_value(0.0, [])


def test_p_value_accepts_statistic_value():
    v = compute_tn_beta(np.random.default_rng(0).standard_normal((10, 2)), 3.0)
    assert empirical_p_value(v, [v.t_scaled - 1.0]) == 0.5


def test_upper_quantile_convention():
    draws = np.arange(1, 101, dtype=float)
    assert quantile_index(100, 0.05) == 95
    assert upper_quantile(draws, 0.05) == 95.0
    assert upper_quantile(draws[::-1], 0.10) == 90.0
    assert quantile_standard_error(draws, 0.05) > 0
    assert rejection_rate(draws, 95.0) == pytest.approx(0.05)


def test_critical_table_round_trip_and_monotone():
    tab = estimate_critical_values(2, 20, [2.5, 3.0, 5.0], McConfig(reps=500, seed=3))
    assert len(tab.rows) == 6
    back = CriticalTable.from_csv(tab.to_csv())
    assert back.rows == tab.rows
    for b in (2.5, 3.0, 5.0):
        assert tab.lookup(2, 20, b, 0.05) >= tab.lookup(2, 20, b, 0.10)
    assert tab.monotonicity_warnings() == []
    with pytest.raises(KeyError):
        tab.lookup(3, 20, 2.5, 0.05)


@pytest.mark.parametrize("kwargs", [{"reps": 10}, {"alpha_levels": (0.0,)}, {"seed": -1}])
def test_mc_config_validation(kwargs):
    with pytest.raises(DataError):
        McConfig(**kwargs)


def test_iid_test_normal_and_heavy_tailed():
    rng = np.random.default_rng(8)
    ok = iid_test(rng.standard_normal((200, 2)), 3.0, reps=200, seed=1)
    assert 0.0 < ok.p_value <= 1.0 and ok.null_draws.shape == (200,)
    x = AlternativeSpec("t", (2.5,))
    from mgfnorm.alternatives import sample_alternative
    bad = iid_test(sample_alternative(x, 300, 2, rng), 3.0, reps=200, seed=1)
    assert bad.reject and bad.p_value == pytest.approx(1 / 201)
