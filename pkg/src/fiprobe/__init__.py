"""Feature-importance probing: selection and adjustment for few-shot linear
probing, plus the diagonal-Gaussian theory bench behind it."""

__version__ = "0.1.0"

from .core import (Episode, LabeledFeatureSet, SeedSpec, ValidationError,
                   derive_task_seed, sample_episode)
from .stats import (ClassStats, ImportanceVector, VariancePolicy, class_stats,
                    importance_binary, importance_estimated,
                    importance_multiclass, normal_cdf)
from .select import (MaskSpec, ScaleVector, apply_scales, hard_mask,
                     rank_dimensions, soft_mask_scales)
from .classify import (ErmFit, FitConfig, LinearClassifier, evaluate,
                       fit_erm01_1d, fit_erm01_2d, fit_logreg, fit_ncc)
from .gaussian import (GaussianTaskSpec, TheoremReport, bayes_optimal_error,
                       centroid_order_prob, ncc_test_error_closed_form,
                       illustrative_spec, sample_task, simulate_views,
                       theorem1_conditions, theorem1_verify, theorem2_gap)
from .harness import (ExperimentConfig, run_adjust_eval, run_fi_quality,
                      run_mask_sweep, run_table1, run_topk_frequency,
                      run_wayshot_grid)
from .storage import (read_feature_file, write_feature_file, write_results,
                      ResultsTable)
