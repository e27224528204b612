import numpy as np
import pytest

from kayanode.normalize import Normalizer, normalize_panel
from kayanode.panel import Panel


def simple_panel(series):
    """One-variable-of-interest panel: column 0 carries `series`."""
    n = len(series)
    years = np.arange(2000, 2000 + n)
    values = np.tile(np.array([0.0, 1.0, 2.0, 3.0, 0.5, 0.25, 0.25]), (n, 1))
    values[:, 0] = series
    return Panel("AAA", years, values, np.ones((n, 7), dtype=bool))


def test_min_max_endpoints():
    panel = simple_panel([10.0, 20.0, 30.0])
    norm, _ = normalize_panel(panel, train_end=2002)
    np.testing.assert_allclose(norm.values[:, 0], [0.0, 0.5, 1.0])


def test_constant_variable_degenerate_rule():
    panel = simple_panel([5.0, 5.0, 5.0])
    norm, nz = normalize_panel(panel, train_end=2002)
    np.testing.assert_array_equal(norm.values[:, 0], [0.0, 0.0, 0.0])
    assert nz.scales[0] == 1.0 and nz.offsets[0] == 5.0


def test_validation_window_excluded_from_stats():
    panel = simple_panel([10.0, 20.0, 40.0])
    norm, _ = normalize_panel(panel, train_end=2001)
    # stats from the first two years only: min 10, max 20
    np.testing.assert_allclose(norm.values[:, 0], [0.0, 1.0, 3.0])


def test_round_trip_identity():
    rng = np.random.default_rng(5)
    panel = simple_panel(rng.uniform(1.0, 100.0, size=8))
    norm, nz = normalize_panel(panel, train_end=2007)
    back = nz.inverse(norm.values)
    np.testing.assert_allclose(back, panel.values, rtol=1e-12)


def test_time_axis_unit_interval():
    panel = simple_panel(np.linspace(1, 2, 5))
    _, nz = normalize_panel(panel, train_end=2004)
    times = nz.year_to_time(np.asarray(panel.years))
    np.testing.assert_allclose(times, [0.0, 0.25, 0.5, 0.75, 1.0])
    np.testing.assert_allclose(nz.time_to_year(times), panel.years)


def test_train_end_outside_range():
    panel = simple_panel([1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        normalize_panel(panel, train_end=1990)


def test_needs_two_observed_points():
    panel = simple_panel([1.0, 2.0, 3.0])
    panel.mask[1:, 0] = False
    with pytest.raises(ValueError, match="observed training points"):
        normalize_panel(panel, train_end=2002)


def test_serialization_round_trip():
    panel = simple_panel([10.0, 20.0, 30.0])
    _, nz = normalize_panel(panel, train_end=2002)
    doc = nz.to_dict()
    assert set(doc) == {"population", "gdp_per_capita", "energy_intensity",
                        "carbon_intensity", "share_fossil", "share_nuclear",
                        "share_renewable", "time"}
    back = Normalizer.from_dict(doc)
    np.testing.assert_array_equal(back.offsets, nz.offsets)
    np.testing.assert_array_equal(back.scales, nz.scales)
    assert back.time_offset == nz.time_offset
    assert back.time_scale == nz.time_scale


def test_scales_must_be_positive():
    with pytest.raises(ValueError):
        Normalizer(np.zeros(7), np.zeros(7), 2000.0, 10.0)
