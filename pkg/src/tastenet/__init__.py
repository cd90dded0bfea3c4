"""tastenet: weighted k-NN taste recommendation and advice-network analysis.

The package works on sparse rater-by-item rating matrices whose raters
carry categorical group labels (e.g. professional critics vs. amateurs).
It estimates pairwise taste similarity, forms weighted adviser committees,
evaluates pairwise-choice accuracy with repeated per-rater holdouts, and
reconstructs the advice network the algorithm spans, including recommender
potential, recommender influence, and taste homophily.
"""

__version__ = "0.1.0"

from .dataset import (
    NormalizedRatings,
    RatingMatrix,
    balance_sparsity,
    density,
    filter_dataset,
    load_ratings,
    save_ratings,
    z_normalize,
)
from .errors import ConfigError, DataError, TasteNetError
from .evaluation import EvaluationPlan, PerformanceReport, make_holdout_split, run_evaluation, score_individual
from .homophily import HomophilyReport, group_baselines, homophily_index, individual_homophily, potential_homophily_index
from .network import AdviceNetwork, build_influence_network, build_potential_network, export_network, node_strength
from .recommender import Committee, KnnConfig, Prediction, choose_between, form_committee, make_predictor, predict_utility, strategy_presets
from .similarity import SimilarityMatrix, amplify_weight, build_similarity_matrix, correlation_profile, pairwise_correlation
from .synthetic import GroupSpec, SyntheticSpec, SyntheticTruth, default_spec, generate_population

__all__ = [name for name in dir() if not name.startswith("_")]
