"""Protein secondary structure prediction by fusing a fuzzy KNN and an edit-kernel SVM."""

from .aggregate import (
    AggregationContext,
    ClassifierWeights,
    aggregate_protein,
    aggregate_residue,
    aggregate_run,
    breakpoint_grid,
    wheel1_weights,
    wheel2_sweep,
)
from .dissimilarity import (
    DissimilarityConfig,
    ExhaustiveHistory,
    compound_dissimilarity,
    dissimilarity_rate,
    edit_distance,
    exhaustive_history,
    lz_complexity,
    lz_score,
    ngram_patterns,
    ngram_score,
    zeta,
)
from .errors import ConfigError, ConvergenceError, MCPError, ParseError
from .evaluate import ConfusionMatrix, MetricReport, confusion, independent_test, kfold, metrics
from .fknn import FknnModel, FuzzyVote, initial_memberships, predict_sequence
from .ingest import CLASSES, Dataset, ProteinRecord, parse_dataset, reduce_labels, write_dataset
from .pipeline import PipelinePredictor, PredictionRun, RunConfig, TrainedModels
from .postprocess import FilterRuleSet, filter_structure
from .svm import BinarySvmModel, EditKernelParams, MultiSvmModel, edit_kernel, train_binary, train_multiclass
from .windowing import WindowSample, make_windows

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
