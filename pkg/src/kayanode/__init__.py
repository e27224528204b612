"""Country-level emissions forecasting from Kaya-identity indicators.

A small tanh network learns the joint yearly dynamics of seven indicators
(the four Kaya factors plus the electricity mix) as an ODE vector field,
integrated with fixed-step RK4 and trained by exact reverse-mode
differentiation through the unrolled solver. A VAR(1) baseline, an
experiment runner, scenario what-ifs, a CLI and an HTTP service sit on top.
"""

from .artifacts import ModelBundle, load_bundle, save_bundle
from .errors import (DegenerateInputError, DivergenceError, DuplicateRecordError,
                     ExperimentError, KayaNodeError, PanelParseError, ShapeError,
                     SingularFitError)
from .evaluation import (BoxplotStats, CellResult, ExperimentSpec, boxplot_stats,
                         boxplot_summary, mse, node_validation_mse, run_experiment,
                         results_to_csv)
from .forecast import ForecastResult, build_forecast_result
from .kaya import kaya_decompose, kaya_recompose, kaya_recompose_rows
from .normalize import Normalizer, normalize_panel
from .ode import MlpParams, Trajectory, integrate, mlp_forward, rk4_step, share_project
from .panel import (Panel, RawRecord, panels_from_records, parse_panel_csv,
                    records_to_csv, split_panel)
from .pipeline import finetune_bundle, scenario_forecast, train_country
from .scenario import (AugmentedResult, ScenarioSpec, interpolate_scenario,
                       pinned_forecast, run_augmented_scenario, scenario_emissions)
from .synth import generate_synthetic_panel, panel_to_records
from .training import (AdamState, LossReport, TrainConfig, TrainingPanel, adam_step,
                       fine_tune, loss_gradient, one_hot, train, trajectory_loss,
                       training_panel)
from .var import VarModel, var_fit, var_forecast
from .variables import N_VARIABLES, SHARE_SLICE, VARIABLE_KEYS, Variable

__version__ = "0.1.0"
