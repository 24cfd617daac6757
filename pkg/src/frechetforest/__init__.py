"""Fréchet trees and Fréchet random forests for regression between curves.

Inputs and output are curves compared by the discrete Fréchet distance;
node means are medoid Fréchet means.
"""

from .curves import Curve, cross_frechet, discrete_frechet, pairwise_frechet, squared_output_distance
from .dataset import Dataset, DistanceCache
from .forest import (
    Forest,
    ForestParams,
    ImportanceReport,
    oob_error,
    oob_summary,
    predict_forest,
    train_forest,
    variable_importance,
)
from .metric import MetricItems, SplitAssignment, frechet_medoid, frechet_variance, two_means_split
from .simulate import SimConfig, SimTruth, simulate_dataset
from .tree import (
    PruneStep,
    SplitCandidate,
    Tree,
    best_split,
    cost_complexity_sequence,
    evaluate_split,
    fit_tree,
    grow_maximal_tree,
    hubert_gamma,
    predict_tree,
    select_subtree,
)

__version__ = "0.1.0"
