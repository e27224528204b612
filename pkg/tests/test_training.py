import numpy as np
import pytest

from kayanode.normalize import normalize_panel
from kayanode.ode import MlpParams
from kayanode.panel import Panel
from kayanode.synth import generate_synthetic_panel
from kayanode.training import (AdamState, TrainConfig, TrainingPanel, adam_step,
                               fine_tune, flatten_grads, loss_gradient, one_hot,
                               train, trajectory_loss, training_panel)

from conftest import make_training_setup


def zero_params(hidden=(4,), country_count=0):
    p = MlpParams.init(hidden=hidden, country_count=country_count, seed=0)
    return MlpParams([np.zeros_like(w) for w in p.weights],
                     [np.zeros_like(b) for b in p.biases],
                     country_count=country_count)


def constant_training_panel(n_years=5, value=0.4):
    years = np.arange(2000, 2000 + n_years)
    values = np.full((n_years, 7), value)
    mask = np.ones_like(values, dtype=bool)
    panel = Panel("AAA", years, values, mask, "normalized")
    times = (years - years[0]) / (years[-1] - years[0])
    return TrainingPanel(panel, times)


class TestTrajectoryLoss:
    def test_zero_network_exact_fit(self):
        tp = constant_training_panel()
        assert trajectory_loss(zero_params(), [tp], 2) == 0.0

    def test_single_cell_hand_value(self):
        tp = constant_training_panel()
        tp.panel.mask[:] = False
        tp.panel.mask[3, 2] = True
        tp.panel.values[3, 2] += 0.5
        assert trajectory_loss(zero_params(), [tp], 2) == pytest.approx(0.25)

    def test_fully_masked_out_panel_rejected(self):
        tp = constant_training_panel()
        tp.panel.mask[:] = False
        with pytest.raises(ValueError, match="no observed cells"):
            trajectory_loss(zero_params(), [tp], 2)

    def test_incomplete_first_row_rejected(self):
        tp = constant_training_panel()
        tp.panel.values[0, 1] = np.nan
        tp.panel.mask[0, 1] = False
        with pytest.raises(ValueError, match="first row"):
            trajectory_loss(zero_params(), [tp], 2)


class TestLossGradient:
    def test_zero_gradient_at_exact_fit(self):
        tp = constant_training_panel()
        loss, grads = loss_gradient(zero_params(), [tp], 2)
        assert loss == 0.0
        assert np.linalg.norm(flatten_grads(grads)) <= 1e-10

    def test_matches_central_finite_differences(self, short_panel):
        _, _, tp, _ = make_training_setup(short_panel, train_end=2005)
        params = MlpParams.init(hidden=(4,), seed=7)
        _, grads = loss_gradient(params, [tp], 2)
        g = flatten_grads(grads)
        flat = params.flatten()
        eps = 1e-5
        for i in range(flat.size):
            up, dn = flat.copy(), flat.copy()
            up[i] += eps
            dn[i] -= eps
            fd = (trajectory_loss(params.with_flat(up), [tp], 2)
                  - trajectory_loss(params.with_flat(dn), [tp], 2)) / (2 * eps)
            assert abs(fd - g[i]) <= 1e-4 * max(abs(fd), abs(g[i]), 1e-8), \
                f"coordinate {i}: analytic {g[i]}, finite difference {fd}"

    def test_duplicating_panel_leaves_mean_gradient_unchanged(self, short_panel):
        _, _, tp, _ = make_training_setup(short_panel, train_end=2005)
        params = MlpParams.init(hidden=(4,), seed=2)
        loss1, grads1 = loss_gradient(params, [tp], 2)
        loss2, grads2 = loss_gradient(params, [tp, tp], 2)
        assert loss1 == pytest.approx(loss2, rel=1e-12)
        np.testing.assert_allclose(flatten_grads(grads1), flatten_grads(grads2),
                                   rtol=1e-12)


class TestAdamStep:
    def cfg(self, **kw):
        return TrainConfig(epochs=1, hidden=(4,), **kw)

    def test_zero_gradient_leaves_params(self):
        params = MlpParams.init(hidden=(4,), seed=0)
        grads = [(np.zeros_like(w), np.zeros_like(b))
                 for w, b in zip(params.weights, params.biases)]
        state = AdamState.zeros(params.size)
        new, new_state = adam_step(params, grads, state, self.cfg())
        np.testing.assert_array_equal(new.flatten(), params.flatten())
        assert new_state.step == 1

    def test_first_step_is_sign_normalized(self):
        params = zero_params(hidden=(4,))
        grads = [(np.zeros_like(w), np.zeros_like(b))
                 for w, b in zip(params.weights, params.biases)]
        grads[0][0][0, 0] = 5.0
        state = AdamState.zeros(params.size)
        cfg = self.cfg(learning_rate=0.01)
        new, _ = adam_step(params, grads, state, cfg)
        assert new.weights[0][0, 0] == pytest.approx(-0.01, rel=1e-6)

    def test_zero_learning_rate_freezes_params(self):
        params = MlpParams.init(hidden=(4,), seed=1)
        grads = [(np.ones_like(w), np.ones_like(b))
                 for w, b in zip(params.weights, params.biases)]
        cfg = self.cfg()
        cfg.learning_rate = 0.0  # attribute poke: constructor forbids 0
        new, state = adam_step(params, grads, AdamState.zeros(params.size), cfg)
        np.testing.assert_array_equal(new.flatten(), params.flatten())
        assert state.step == 1

    def test_update_magnitude_bounded(self):
        rng = np.random.default_rng(3)
        params = MlpParams.init(hidden=(8,), seed=0)
        cfg = self.cfg(learning_rate=0.05)
        state = AdamState.zeros(params.size)
        current = params
        for _ in range(20):
            grads = [(rng.normal(size=w.shape) * 10 ** rng.uniform(-3, 3),
                      rng.normal(size=b.shape))
                     for w, b in zip(current.weights, current.biases)]
            new, state = adam_step(current, grads, state, cfg)
            delta = np.abs(new.flatten() - current.flatten()).max()
            assert delta <= 10 * cfg.learning_rate
            current = new


class TestTrain:
    def small_cfg(self, **kw):
        defaults = dict(epochs=250, hidden=(16,), substeps_per_year=2,
                        learning_rate=0.02, seed=1)
        defaults.update(kw)
        return TrainConfig(**defaults)

    def test_loss_drops_tenfold_on_linear_fixture(self):
        panel = generate_synthetic_panel(31, 1, "linear", start_year=2000,
                                         end_year=2015)[0]
        _, _, tp, _ = make_training_setup(panel, train_end=2015)
        report = train([tp], self.small_cfg())
        assert report.losses[-1] <= report.losses[0] / 10

    def test_epoch_count_and_history_length(self):
        tp = constant_training_panel()
        report = train([tp], TrainConfig(epochs=1, hidden=(4,)))
        assert len(report.losses) == 1

    def test_deterministic_history(self):
        panel = generate_synthetic_panel(31, 1, "linear", start_year=2000,
                                         end_year=2010)[0]
        _, _, tp, _ = make_training_setup(panel, train_end=2010)
        cfg = self.small_cfg(epochs=40)
        a = train([tp], cfg)
        b = train([tp], cfg)
        assert a.losses.tobytes() == b.losses.tobytes()
        assert a.params.flatten().tobytes() == b.params.flatten().tobytes()

    def test_distinct_one_hots_required(self):
        tp = constant_training_panel()
        tp_a = TrainingPanel(tp.panel, tp.times, one_hot(0, 2))
        tp_b = TrainingPanel(tp.panel, tp.times, one_hot(0, 2))
        with pytest.raises(ValueError, match="distinct"):
            train([tp_a, tp_b], TrainConfig(epochs=1, hidden=(4,)))

    def test_mixed_modes_rejected(self):
        tp = constant_training_panel()
        tp_a = TrainingPanel(tp.panel, tp.times, one_hot(0, 2))
        tp_b = TrainingPanel(tp.panel, tp.times, None)
        with pytest.raises(ValueError, match="mix"):
            train([tp_a, tp_b], TrainConfig(epochs=1, hidden=(4,)))


class TestFineTune:
    def test_zero_epochs_is_noop(self):
        tp = constant_training_panel()
        params = MlpParams.init(hidden=(4,), seed=3)
        cfg = TrainConfig(epochs=1, hidden=(4,), fine_tune_epochs=0)
        report = fine_tune(params, [tp], cfg)
        np.testing.assert_array_equal(report.params.flatten(), params.flatten())
        assert len(report.losses) == 0

    def test_stationary_data_keeps_loss(self):
        tp = constant_training_panel()
        params = zero_params()  # exact fit: loss 0, gradient 0
        cfg = TrainConfig(epochs=1, hidden=(4,), fine_tune_epochs=20)
        report = fine_tune(params, [tp], cfg)
        final = trajectory_loss(report.params, [tp], cfg.substeps_per_year)
        assert final <= 1e-8

    def test_starts_from_given_params_not_reinit(self):
        panel = generate_synthetic_panel(31, 1, "linear", start_year=2000,
                                         end_year=2010)[0]
        _, _, tp, _ = make_training_setup(panel, train_end=2010)
        cfg = TrainConfig(epochs=60, hidden=(8,), substeps_per_year=2,
                          fine_tune_epochs=1, seed=5)
        trained = train([tp], cfg)
        tuned = fine_tune(trained.params, [tp], cfg)
        # one fine-tune epoch starts at the trained loss, far below a fresh init
        fresh = trajectory_loss(MlpParams.init(cfg.hidden, seed=cfg.seed), [tp],
                                cfg.substeps_per_year)
        assert tuned.losses[0] == pytest.approx(trained.losses[-1], rel=0.2)
        assert tuned.losses[0] < fresh / 2


class TestTrainConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            TrainConfig(learning_rate=0.0)
        with pytest.raises(ValueError):
            TrainConfig(beta1=1.0)
        with pytest.raises(ValueError):
            TrainConfig(epochs=0)
        with pytest.raises(ValueError):
            TrainConfig(hidden=())

    def test_json_file_round_trip(self, tmp_path):
        import json
        cfg = TrainConfig(epochs=5, hidden=(8, 4), seed=9)
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(cfg.to_dict()))
        assert TrainConfig.from_file(path) == cfg

    def test_toml_file(self, tmp_path):
        path = tmp_path / "cfg.toml"
        path.write_text('epochs = 7\nlearning_rate = 0.02\nhidden = [8]\n')
        cfg = TrainConfig.from_file(path)
        assert cfg.epochs == 7 and cfg.learning_rate == 0.02 and cfg.hidden == (8,)

    def test_unknown_keys_rejected(self):
        with pytest.raises(ValueError, match="unknown config keys"):
            TrainConfig.from_dict({"lr": 0.1})
