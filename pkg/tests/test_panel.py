import numpy as np
import pytest

from kayanode.errors import DuplicateRecordError, PanelParseError
from kayanode.panel import (CSV_HEADER, Panel, RawRecord, panels_from_records,
                            parse_panel_csv, records_to_csv, split_panel,
                            validate_panel)

HEADER = ",".join(CSV_HEADER)


def test_parse_single_row():
    text = HEADER + "\nFRA,1971,5.1e7,3.6e11,1.6e8,4.3e8,0.6e5,0.1e5,0.3e5\n"
    records = parse_panel_csv(text)
    assert len(records) == 1
    r = records[0]
    assert (r.country, r.year) == ("FRA", 1971)
    assert r.population == 5.1e7
    assert r.gen_renewable == 0.3e5


def test_parse_bad_year_names_line():
    text = HEADER + "\nFRA,19x1,1,1,1,1,1,1,1\n"
    with pytest.raises(PanelParseError) as exc:
        parse_panel_csv(text)
    assert exc.value.line == 2


def test_parse_duplicate_key():
    text = HEADER + "\nFRA,1971,1,1,1,1,1,1,1\nFRA,1971,2,2,2,2,2,2,2\n"
    with pytest.raises(DuplicateRecordError):
        parse_panel_csv(text)


def test_parse_wrong_arity():
    text = HEADER + "\nFRA,1971,1,1\n"
    with pytest.raises(PanelParseError) as exc:
        parse_panel_csv(text)
    assert exc.value.line == 2


def test_parse_empty_fields_become_missing():
    text = HEADER + "\nFRA,1971,5e7,,1.6e8,4.3e8,6e4,1e4,3e4\n"
    r = parse_panel_csv(text)[0]
    assert r.gdp is None and r.population == 5e7


def test_parse_sorts_years_within_country():
    text = HEADER + ("\nFRA,1972,2,2,2,2,1,1,1"
                     "\nFRA,1971,1,1,1,1,1,1,1\n")
    records = parse_panel_csv(text)
    assert [r.year for r in records] == [1971, 1972]


def test_round_trip_csv():
    text = HEADER + "\nFRA,1971,5e7,,1.6e8,4.3e8,60000.0,10000.0,30000.0\n"
    records = parse_panel_csv(text)
    assert parse_panel_csv(records_to_csv(records)) == records


def test_panels_from_records_masks_derived_indicators():
    records = [
        RawRecord("FRA", 1971, 1e6, 2e9, 4e6, 8e6, 3.0, 1.0, 1.0),
        RawRecord("FRA", 1972, 1e6, None, 4e6, 8e6, 3.0, 1.0, 1.0),
    ]
    panel = panels_from_records(records)["FRA"]
    assert panel.mask[0].all()
    # missing GDP removes gdp_per_capita and energy_intensity only
    assert list(panel.mask[1]) == [True, False, False, True, True, True, True]
    np.testing.assert_allclose(panel.values[0, 4:], [0.6, 0.2, 0.2])


def test_panels_require_consecutive_years():
    records = [
        RawRecord("FRA", 1971, 1, 1, 1, 1, 1, 1, 1),
        RawRecord("FRA", 1973, 1, 1, 1, 1, 1, 1, 1),
    ]
    with pytest.raises(ValueError, match="consecutive"):
        panels_from_records(records)


def test_validate_panel_rejects_bad_share_sum():
    years = np.array([2000, 2001])
    values = np.ones((2, 7))
    values[:, 4:] = [[0.5, 0.3, 0.3], [0.5, 0.25, 0.25]]
    panel = Panel("AAA", years, values, np.ones((2, 7), dtype=bool))
    with pytest.raises(ValueError, match="sum"):
        validate_panel(panel)


def test_split_panel_france_convention():
    years = np.arange(1971, 2020)
    values = np.tile(np.array([1e6, 1e4, 5.0, 60.0, 0.5, 0.25, 0.25]), (len(years), 1))
    panel = Panel("FRA", years, values, np.ones_like(values, dtype=bool))
    train, valid = split_panel(panel, 12)
    assert (train.years[0], train.years[-1]) == (1971, 2007)
    assert (valid.years[0], valid.years[-1]) == (2008, 2019)
    assert set(train.years) | set(valid.years) == set(years)
    assert not set(train.years) & set(valid.years)


def test_split_panel_bounds():
    years = np.arange(2000, 2010)
    values = np.tile(np.array([1e6, 1e4, 5.0, 60.0, 0.5, 0.25, 0.25]), (10, 1))
    panel = Panel("AAA", years, values, np.ones_like(values, dtype=bool))
    train, _ = split_panel(panel, 8)
    assert len(train.years) == 2
    with pytest.raises(ValueError):
        split_panel(panel, 0)
    with pytest.raises(ValueError):
        split_panel(panel, 9)
