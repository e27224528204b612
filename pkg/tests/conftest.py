import numpy as np
import pytest

from kayanode.normalize import normalize_panel
from kayanode.panel import Panel
from kayanode.synth import generate_synthetic_panel
from kayanode.training import TrainingPanel


@pytest.fixture(scope="session")
def linear_panel():
    return generate_synthetic_panel(11, 1, "linear")[0]


@pytest.fixture(scope="session")
def logistic_panel():
    return generate_synthetic_panel(23, 1, "logistic-coupled")[0]


@pytest.fixture(scope="session")
def short_panel():
    """A 6-year linear panel: cheap to integrate in gradient tests."""
    return generate_synthetic_panel(3, 1, "linear", start_year=2000, end_year=2005)[0]


def slice_panel(panel: Panel, cut: int) -> Panel:
    return Panel(panel.country, panel.years[:cut].copy(), panel.values[:cut].copy(),
                 panel.mask[:cut].copy(), panel.units)


def make_training_setup(panel: Panel, train_end: int):
    """Normalize a physical panel and wrap its training window."""
    norm_full, normalizer = normalize_panel(panel, train_end)
    cut = int(np.searchsorted(np.asarray(panel.years), train_end)) + 1
    norm_train = slice_panel(norm_full, cut)
    times = normalizer.year_to_time(np.asarray(panel.years))
    tp = TrainingPanel(norm_train, times[:cut])
    return norm_full, normalizer, tp, times
