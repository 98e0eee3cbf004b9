import math

import pytest

from mgfnorm import reference_tables as ref
from mgfnorm import tables


def test_reference_lookups():
    assert ref.critical_value(2, 50, 3.0, 0.10) == pytest.approx(0.1246)
    assert ref.critical_value(5, 100, 5.0, 0.05) == pytest.approx(0.007779)
    assert len(ref.table1_cells()) == 252
    assert ref.power_iid("ase:1.75", 2, 3.0, "tn") == pytest.approx(72.47)
    assert ref.power_iid("t:10", 5, 10.0, "tn") == pytest.approx(54.33)
    assert ref.power_iid("ase:1.75", 2, 0.5, "hw") == pytest.approx(67.75)
    assert ref.power_iid("ase:1.75", 5, 6.0, "tn") == pytest.approx(91.32)
    assert ref.power_garch("normal", 2, 0.0, 2.1, "tn") == pytest.approx(4.96)
    assert ref.power_garch("t:10", 2, 0.0, 2.1, "tn") == pytest.approx(61.85)
    assert ref.power_garch("aep:0.4,1.182,1.82", 2, 0.0, 2.1, "tn") == pytest.approx(56.75)


def test_reference_critical_values_decrease_in_alpha_and_beta():
    for d, n, beta, alpha, value in ref.table1_cells():
        if alpha == 0.05:
            assert value >= ref.critical_value(d, n, beta, 0.10)


def test_small_table_runs_and_reports(tmp_path):
    cells = tables.table1(dims=(2,), sizes=(50,), reps=2000, seed=1)
    assert len(cells) == 2 * len(ref.TABLE1_BETAS)
    assert all(abs(c.rel_error) < 0.15 for c in cells)
    csv_text = tables.to_csv(cells)
    assert csv_text.splitlines()[0] == ",".join(tables.FIELDS)
    report = tables.diff_report(cells)
    assert "max|z|" in report
    script = tables.gnuplot_script(cells, "t1.csv")
    assert "t1.csv" in script and "logscale xy" in script


def test_small_power_table():
    cells = tables.table2(keys=[("t:5", 2)], trials=500, seed=1)
    assert len(cells) == len(ref.TABLE2_BETAS) + len(ref.TABLE2_HW_BETAS)
    assert all(math.isfinite(c.z) for c in cells)
    assert max(abs(c.estimate - c.reference) for c in cells) < 10.0
