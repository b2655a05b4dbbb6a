"""Repeated elastic-net feature selection (RENT).

An ensemble of elastic-net GLMs is trained on random subsamples of the
training data; features are kept when their weight distributions across the
ensemble pass three cutoffs (selection frequency, sign stability, and a
t-test on the mean weight). Hyperparameters are chosen by BIC.
"""

__version__ = "0.1.0"

from .data import (Dataset, ScalingParams, SplitPair, Subsample, Task, apply_standardizer,
                   derive_seed, draw_subsample, fit_standardizer, invert_standardizer,
                   load_csv, make_synthetic, save_csv, stratified_split)
from .exceptions import DataError, RentError, SearchError, SelectionError, SolverError
from .glm import (ElasticNetConfig, GlmModel, bic, fit_enet, fit_linear_enet,
                  fit_logistic_enet, fit_unpenalized, predict, predict_labels)
from .hyper import CutoffGrid, EnetGrid, SearchRecord, search_cutoffs, search_enet
from .metrics import (ConfusionMatrix, confusion, f1, mcc, nogueira_stability, precision,
                      r2, recall, rmsep)
from .posthoc import (ObjectSummary, PcaModel, correlation_loadings, export_plot_data,
                      pca_fit, summarize_objects)
from .rent import (CriteriaScores, Cutoffs, EnsembleOutput, SelectionResult, WeightMatrix,
                   apply_selection, score_features, select, tau1, tau2, tau3, train_ensemble)
from .study import StudyReport, one_sided_t_test, t_cdf, t_sf, vs1, vs2
