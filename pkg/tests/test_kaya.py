import numpy as np
import pytest
from hypothesis import given, strategies as st

from kayanode.errors import DegenerateInputError
from kayanode.kaya import kaya_decompose, kaya_recompose, kaya_recompose_rows
from kayanode.panel import RawRecord


def record(P=1.0, G=1.0, E=1.0, F=1.0, gens=(1.0, 1.0, 1.0)):
    return RawRecord("FRA", 2000, P, G, E, F, *gens)


def test_decompose_identity_case():
    v = kaya_decompose(record())
    np.testing.assert_allclose(v, [1, 1, 1, 1, 1 / 3, 1 / 3, 1 / 3])


def test_decompose_hand_arithmetic():
    v = kaya_decompose(record(P=2, G=6, E=3, F=12, gens=(2, 1, 1)))
    np.testing.assert_allclose(v, [2, 3, 0.5, 4, 0.5, 0.25, 0.25])


def test_decompose_zero_divisor():
    with pytest.raises(DegenerateInputError):
        kaya_decompose(record(G=0))
    with pytest.raises(DegenerateInputError):
        kaya_decompose(record(gens=(0, 0, 0)))


def test_decompose_missing_field():
    with pytest.raises(DegenerateInputError):
        kaya_decompose(RawRecord("FRA", 2000, None, 1, 1, 1, 1, 1, 1))


def test_recompose_cases():
    assert kaya_recompose([1, 1, 1, 1, 0.3, 0.3, 0.4]) == 1
    assert kaya_recompose([2, 3, 0.5, 4, 0.5, 0.25, 0.25]) == pytest.approx(12)


def test_recompose_rejects_wrong_arity():
    with pytest.raises(ValueError):
        kaya_recompose([1, 2, 3])


positive = st.floats(min_value=1e-3, max_value=1e12, allow_nan=False,
                     allow_infinity=False)


@given(P=positive, G=positive, E=positive, F=positive,
       g1=positive, g2=positive, g3=positive)
def test_round_trip_reproduces_emissions(P, G, E, F, g1, g2, g3):
    r = record(P, G, E, F, (g1, g2, g3))
    back = kaya_recompose(kaya_decompose(r))
    assert abs(back - F) / F <= 1e-9


def test_recompose_rows_matches_scalar():
    rows = np.array([[2, 3, 0.5, 4, 0.5, 0.25, 0.25],
                     [1, 1, 1, 1, 0.3, 0.3, 0.4]])
    np.testing.assert_allclose(kaya_recompose_rows(rows), [12.0, 1.0])
