"""Panel data structures and the canonical CSV parser.

Canonical CSV schema (one wide-format file, UTF-8, '.' decimal separator):

    country,year,P,G,E,F,gen_fossil,gen_nuclear,gen_renewable

One row per (country, year); an empty field marks a missing observation.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .errors import DegenerateInputError, DuplicateRecordError, PanelParseError
from .variables import N_VARIABLES, SHARE_SLICE

CSV_HEADER = ("country", "year", "P", "G", "E", "F",
              "gen_fossil", "gen_nuclear", "gen_renewable")

#: Share-row sums within this distance of 1 are silently renormalized;
#: larger deviations are treated as corrupt data.
SHARE_RENORM_TOLERANCE = 1e-6


@dataclass
class RawRecord:
    """One (country, year) observation in raw physical units.

    Missing fields are None; present fields must satisfy the positivity
    constraints checked in :func:`validate_record`.
    """
    country: str
    year: int
    population: Optional[float]  # persons
    gdp: Optional[float]         # constant currency
    energy: Optional[float]      # total energy supply
    emissions: Optional[float]   # CO2 from fuel combustion, mass units
    gen_fossil: Optional[float]
    gen_nuclear: Optional[float]
    gen_renewable: Optional[float]


def validate_record(r: RawRecord) -> None:
    if r.population is not None and not r.population > 0:
        raise ValueError(f"{r.country} {r.year}: population must be > 0")
    if r.gdp is not None and not r.gdp > 0:
        raise ValueError(f"{r.country} {r.year}: GDP must be > 0")
    if r.energy is not None and not r.energy > 0:
        raise ValueError(f"{r.country} {r.year}: energy supply must be > 0")
    if r.emissions is not None and r.emissions < 0:
        raise ValueError(f"{r.country} {r.year}: emissions must be >= 0")
    gens = (r.gen_fossil, r.gen_nuclear, r.gen_renewable)
    present = [g for g in gens if g is not None]
    if any(g < 0 for g in present):
        raise ValueError(f"{r.country} {r.year}: generation must be >= 0")
    if len(present) == 3 and sum(present) <= 0:
        raise ValueError(f"{r.country} {r.year}: total generation must be > 0")


@dataclass
class Panel:
    """Per-country yearly matrix of the 7 model variables plus mask.

    values is (T, 7) in the canonical variable order; mask marks observed
    cells. Unobserved cells hold NaN. ``units`` records whether values are in
    physical units or normalized model units.
    """
    country: str
    years: np.ndarray            # (T,) ints, consecutive
    values: np.ndarray           # (T, 7) float
    mask: np.ndarray             # (T, 7) bool
    units: str = "physical"


def validate_panel(p: Panel) -> None:
    """Check the structural Panel invariants.

    Share-simplex checks apply only to physical-unit panels: normalization is
    per-variable affine, so normalized shares are not simplex coordinates.
    """
    years = np.asarray(p.years)
    if years.ndim != 1 or len(years) == 0:
        raise ValueError(f"{p.country}: empty year grid")
    if len(years) > 1 and not np.all(np.diff(years) == 1):
        raise ValueError(f"{p.country}: years must be consecutive")
    if p.values.shape != (len(years), N_VARIABLES):
        raise ValueError(f"{p.country}: values shape {p.values.shape} does not "
                         f"match {len(years)} years x {N_VARIABLES} variables")
    if p.mask.shape != p.values.shape:
        raise ValueError(f"{p.country}: mask shape mismatch")
    observed = p.values[p.mask]
    if observed.size and not np.all(np.isfinite(observed)):
        raise ValueError(f"{p.country}: non-finite value among observed cells")
    if p.units != "physical":
        return
    shares = p.values[:, SHARE_SLICE]
    share_mask = p.mask[:, SHARE_SLICE]
    seen = shares[share_mask]
    if seen.size and (np.any(seen < -1e-12) or np.any(seen > 1 + 1e-9)):
        raise ValueError(f"{p.country}: share value outside [0, 1]")
    full_rows = share_mask.all(axis=1)
    if full_rows.any():
        sums = shares[full_rows].sum(axis=1)
        if np.any(np.abs(sums - 1.0) > 1e-9):
            raise ValueError(f"{p.country}: share rows do not sum to 1")


def _parse_cell(text: str, line: int, column: str) -> Optional[float]:
    text = text.strip()
    if text == "":
        return None
    try:
        return float(text)
    except ValueError:
        raise PanelParseError(line, f"non-numeric {column} field {text!r}") from None


def parse_panel_csv(text: str | io.TextIOBase) -> list[RawRecord]:
    """Parse canonical panel CSV into records, year-sorted within country.

    Raises PanelParseError (with line number) on malformed rows and
    DuplicateRecordError on repeated (country, year) keys.
    """
    stream = io.StringIO(text) if isinstance(text, str) else text
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        raise PanelParseError(1, "empty input") from None
    if tuple(h.strip() for h in header) != CSV_HEADER:
        raise PanelParseError(1, f"unexpected header {header!r}")

    records: list[RawRecord] = []
    seen: set[tuple[str, int]] = set()
    for line, row in enumerate(reader, start=2):
        if not row or all(c.strip() == "" for c in row):
            continue
        if len(row) != len(CSV_HEADER):
            raise PanelParseError(line, f"expected {len(CSV_HEADER)} fields, got {len(row)}")
        country = row[0].strip()
        if not country:
            raise PanelParseError(line, "empty country field")
        try:
            year = int(row[1].strip())
        except ValueError:
            raise PanelParseError(line, f"non-integer year field {row[1]!r}") from None
        key = (country, year)
        if key in seen:
            raise DuplicateRecordError(f"duplicate record for {country} {year}")
        seen.add(key)
        numeric = [_parse_cell(row[i], line, CSV_HEADER[i]) for i in range(2, 9)]
        record = RawRecord(country, year, *numeric)
        try:
            validate_record(record)
        except ValueError as exc:
            raise PanelParseError(line, str(exc)) from None
        records.append(record)

    records.sort(key=lambda r: (r.country, r.year))
    return records


def _derive_row(r: RawRecord) -> tuple[np.ndarray, np.ndarray]:
    """Indicator values and observation mask derivable from one record."""
    values = np.full(N_VARIABLES, np.nan)
    mask = np.zeros(N_VARIABLES, dtype=bool)
    if r.population is not None:
        values[0] = r.population
        mask[0] = True
        if r.gdp is not None:
            values[1] = r.gdp / r.population
            mask[1] = True
    if r.gdp is not None and r.energy is not None:
        values[2] = r.energy / r.gdp
        mask[2] = True
    if r.energy is not None and r.emissions is not None:
        values[3] = r.emissions / r.energy
        mask[3] = True
    gens = (r.gen_fossil, r.gen_nuclear, r.gen_renewable)
    if all(g is not None for g in gens):
        total = sum(gens)
        shares = np.array([g / total for g in gens])
        ssum = shares.sum()
        if abs(ssum - 1.0) > SHARE_RENORM_TOLERANCE:
            raise DegenerateInputError(
                f"{r.country} {r.year}: share sum deviates from 1 by {abs(ssum - 1.0):.3g}")
        values[SHARE_SLICE] = shares / ssum
        mask[SHARE_SLICE] = True
    return values, mask


def panels_from_records(records: Iterable[RawRecord]) -> dict[str, Panel]:
    """Group records by country and derive validated indicator panels."""
    by_country: dict[str, list[RawRecord]] = {}
    for r in records:
        by_country.setdefault(r.country, []).append(r)

    panels: dict[str, Panel] = {}
    for country, recs in sorted(by_country.items()):
        recs.sort(key=lambda r: r.year)
        years = np.array([r.year for r in recs])
        if len(years) > 1 and not np.all(np.diff(years) == 1):
            raise ValueError(f"{country}: years are not consecutive")
        values = np.empty((len(recs), N_VARIABLES))
        mask = np.empty((len(recs), N_VARIABLES), dtype=bool)
        for i, r in enumerate(recs):
            values[i], mask[i] = _derive_row(r)
        panel = Panel(country, years, values, mask)
        validate_panel(panel)
        panels[country] = panel
    return panels


def split_panel(panel: Panel, horizon: int) -> tuple[Panel, Panel]:
    """Split off the last ``horizon`` years as the validation window.

    The windows are disjoint and jointly exhaustive; 1 <= horizon <= T - 2 so
    the training window keeps at least two years.
    """
    n = len(panel.years)
    if not 1 <= horizon <= n - 2:
        raise ValueError(f"horizon must be in [1, {n - 2}], got {horizon}")
    cut = n - horizon
    train = Panel(panel.country, panel.years[:cut].copy(),
                  panel.values[:cut].copy(), panel.mask[:cut].copy(), panel.units)
    valid = Panel(panel.country, panel.years[cut:].copy(),
                  panel.values[cut:].copy(), panel.mask[cut:].copy(), panel.units)
    return train, valid


def _format_cell(x: Optional[float]) -> str:
    return "" if x is None else repr(float(x))


def records_to_csv(records: Iterable[RawRecord]) -> str:
    """Serialize records back to the canonical CSV (deterministic bytes)."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in records:
        writer.writerow([
            r.country, r.year,
            _format_cell(r.population), _format_cell(r.gdp),
            _format_cell(r.energy), _format_cell(r.emissions),
            _format_cell(r.gen_fossil), _format_cell(r.gen_nuclear),
            _format_cell(r.gen_renewable),
        ])
    return out.getvalue()
