"""End-to-end runs: configuration, training, prediction and evaluation.

The expensive part of every workflow is producing the two classifier
streams (fuzzy votes and SVM classes) for a set of test proteins. Everything
downstream (the five aggregation rules, filtering, breakpoint sweeps,
ablation rows) is cheap and is recomputed from those streams.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .aggregate import (
    RULES,
    AggregationContext,
    ClassifierWeights,
    aggregate_protein,
    parse_sweep,
    protein_rngs,
    wheel1_weights,
    wheel2_sweep,
)
from .dissimilarity import MEASURES, RHO_ORIENTATIONS, DissimilarityConfig
from .errors import ConfigError, ParseError
from .evaluate import CrossValidationResult, MetricReport, confusion, fold_assignment, metrics
from .fknn import FknnModel, fit_variants, predict_variants
from .ingest import CLASSES, Dataset, ProteinRecord, parse_dataset
from .kernels import MAX_GRAM
from .postprocess import FilterRuleSet, filter_structure
from .svm import EditKernelParams, MultiSvmModel, train_multiclass
from .windowing import check_window_size, dataset_windows, make_windows

ENV_PREFIX = "MCPSS_"
MANIFEST_FORMAT = "mcpss-models"
MANIFEST_VERSION = 1

FKNN_LABELS = {
    "lz": "FKNN+LZ",
    "lz+rho": "FKNN+LZ+rho_d",
    "full": "FKNN+LZ+rho_d+n-gram",
}
SVM_LABEL = "Edit-SVM"
ABLATION_ROWS = (*FKNN_LABELS.values(), SVM_LABEL, *(f"MCP{r}" for r in RULES))

# Fields that shape the trained models; prediction must not change them.
MODEL_FIELDS = (
    "window_size", "ngram_n", "measure", "rho_orientation", "k", "k_prime", "fuzziness_m",
    "svm_c", "svm_gamma", "svm_tol", "svm_max_iter", "spectrum_clip",
)


@dataclass(frozen=True)
class RunConfig:
    """Every tunable of a run. Validated on construction."""

    dataset: str | None = None
    format: str = "paired"
    eight_state: bool = False
    test_set: str | None = None
    output_dir: str = "mcpss-out"
    window_size: int = 17
    ngram_n: int = 3
    measure: str = "full"
    rho_orientation: str = "rate"
    k: int = 15
    k_prime: int = 15
    fuzziness_m: float = 2.0
    svm_c: float = 1.0
    svm_gamma: float = -0.1
    svm_tol: float = 1e-3
    svm_max_iter: int = 1_000_000
    spectrum_clip: bool = False
    aggregation: int = 5
    wheel: int = 2
    breakpoint: float = 0.75
    validation_fraction: float = 0.2
    breakpoint_sweep: str = "0.1:0.9:0.1"
    draws: int = 1
    samples_per_decision: int = 1
    seed: int = 0
    final_filter: bool = True
    post_filter: bool = True
    folds: int = 10
    workers: int = 1

    def __post_init__(self):
        for f in dataclasses.fields(self):
            object.__setattr__(self, f.name, _coerce(f, getattr(self, f.name)))
        self.validate()

    def validate(self) -> None:
        def bad(name, msg):
            raise ConfigError(f"{name}: {msg}")

        if self.format not in ("paired", "fasta"):
            bad("format", f"expected paired or fasta, got {self.format!r}")
        try:
            check_window_size(self.window_size)
        except ConfigError as exc:
            bad("window_size", str(exc))
        if self.measure not in MEASURES:
            bad("measure", f"expected one of {MEASURES}, got {self.measure!r}")
        if self.rho_orientation not in RHO_ORIENTATIONS:
            bad("rho_orientation", f"expected one of {RHO_ORIENTATIONS}, got {self.rho_orientation!r}")
        if not 1 <= self.ngram_n < self.window_size:
            bad("ngram_n", f"must satisfy 1 <= n < window_size ({self.window_size})")
        if self.ngram_n > MAX_GRAM:
            bad("ngram_n", f"at most {MAX_GRAM} is supported")
        if self.k < 1:
            bad("k", "must be >= 1")
        if self.k_prime < 1:
            bad("k_prime", "must be >= 1")
        if not self.fuzziness_m > 1:
            bad("fuzziness_m", "must be > 1")
        if not self.svm_c > 0:
            bad("svm_c", "must be > 0")
        if not self.svm_gamma < 0:
            bad("svm_gamma", "must be < 0 so the kernel decays with distance")
        if not self.svm_tol > 0:
            bad("svm_tol", "must be > 0")
        if self.svm_max_iter < 1:
            bad("svm_max_iter", "must be >= 1")
        if self.aggregation not in RULES:
            bad("aggregation", f"expected one of {RULES}")
        if self.wheel not in (1, 2):
            bad("wheel", "expected 1 or 2")
        if not 0.0 <= self.breakpoint <= 1.0:
            bad("breakpoint", "must lie in [0, 1]")
        if not 0.0 < self.validation_fraction < 1.0:
            bad("validation_fraction", "must lie in (0, 1)")
        try:
            parse_sweep(self.breakpoint_sweep)
        except ConfigError as exc:
            bad("breakpoint_sweep", str(exc))
        if self.draws < 1:
            bad("draws", "must be >= 1")
        if self.samples_per_decision < 1:
            bad("samples_per_decision", "must be >= 1")
        if not 0 <= self.seed < 2**64:
            bad("seed", "must be a 64-bit unsigned integer")
        if self.folds < 2:
            bad("folds", "must be >= 2")
        if self.workers < 1:
            bad("workers", "must be >= 1")

    @property
    def dissimilarity(self) -> DissimilarityConfig:
        return DissimilarityConfig.from_measure(self.measure, self.ngram_n, self.rho_orientation)

    @property
    def kernel_params(self) -> EditKernelParams:
        return EditKernelParams(self.svm_gamma)

    @property
    def filter_rules(self) -> FilterRuleSet:
        return FilterRuleSet()

    def snapshot(self) -> dict:
        return dataclasses.asdict(self)

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)

    @classmethod
    def from_dict(cls, values: Mapping) -> "RunConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        clean = {}
        for key, value in values.items():
            name = key.replace("-", "_")
            if name not in known:
                raise ConfigError(f"{key}: unknown configuration field")
            clean[name] = value
        return cls(**clean)

    @classmethod
    def resolve(cls, overrides: Mapping | None = None, config_file=None,
                environ: Mapping | None = None, base: Mapping | None = None) -> "RunConfig":
        """Defaults < ``base`` < config file (JSON) < ``MCPSS_*`` environment < ``overrides``."""
        values: dict = dict(base or {})
        if config_file is not None:
            values.update(load_config_file(config_file))
        env = os.environ if environ is None else environ
        for f in dataclasses.fields(cls):
            key = ENV_PREFIX + f.name.upper()
            if key in env:
                values[f.name] = env[key]
        values.update({k: v for k, v in (overrides or {}).items() if v is not None})
        return cls.from_dict(values)


def _coerce(f: dataclasses.Field, value):
    if value is None:
        return None
    kind = f.type if isinstance(f.type, str) else getattr(f.type, "__name__", str(f.type))
    try:
        if kind == "bool":
            if isinstance(value, str):
                low = value.strip().lower()
                if low in ("1", "true", "yes", "on"):
                    return True
                if low in ("0", "false", "no", "off"):
                    return False
                raise ValueError(value)
            return bool(value)
        if kind == "int":
            if isinstance(value, float) and not value.is_integer():
                raise ValueError(value)
            if isinstance(value, bool):
                raise ValueError(value)
            return int(value)
        if kind == "float":
            out = float(value)
            if not math.isfinite(out):
                raise ValueError(value)
            return out
        return str(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{f.name}: cannot interpret {value!r} as {kind}") from None


def load_config_file(path) -> dict:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config: file not found: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: {path} is not valid JSON ({exc})") from None
    if not isinstance(data, dict):
        raise ConfigError(f"config: {path} must hold a JSON object")
    return data


def load_dataset(path, config: RunConfig, name: str | None = None) -> Dataset:
    if path is None:
        raise ConfigError("dataset: no dataset path given")
    return parse_dataset(path, config.format, eight_state=config.eight_state, name=name)


# ---------------------------------------------------------------- streams


@dataclass
class ClassifierStreams:
    """Per-protein classifier outputs for a set of test proteins.

    ``votes`` maps a measure name to one ``(L, l)`` membership matrix per
    protein; ``svm`` holds one class-index vector per protein. ``weights``
    carries the roulette weights each protein should be aggregated with
    (they differ between cross-validation folds under wheel 1).
    """

    protein_ids: list
    truths: list | None
    votes: dict
    svm: list
    weights: list
    folds: np.ndarray | None = None
    classes: tuple = CLASSES

    def __len__(self):
        return len(self.protein_ids)

    def top_decisions(self, measure: str) -> list[str]:
        return [_indices_to_string(np.argmax(u, axis=1), self.classes) for u in self.votes[measure]]

    def svm_decisions(self) -> list[str]:
        return [_indices_to_string(s, self.classes) for s in self.svm]


def _indices_to_string(idx, classes) -> str:
    # argmax returns the first maximum, matching the H < E < C tie order
    return "".join(classes[i] for i in idx)


def _split(matrix: np.ndarray, lengths: Sequence[int]) -> list[np.ndarray]:
    return np.split(matrix, np.cumsum(lengths)[:-1]) if lengths else []


def fit_classifiers(train: Dataset, config: RunConfig, measures: Sequence[str] | None = None):
    """Fit one fuzzy KNN model per measure plus the multiclass SVM."""
    if not train.labeled:
        raise ConfigError("training data must carry structure labels")
    measures = tuple(measures or (config.measure,))
    samples = dataset_windows(train, config.window_size)
    cfgs = [DissimilarityConfig.from_measure(m, config.ngram_n, config.rho_orientation) for m in measures]
    fknn = fit_variants(samples, cfgs, config.k, config.k_prime, config.fuzziness_m)
    svm = train_multiclass(samples, config.svm_c, config.kernel_params, config.svm_tol,
                           config.svm_max_iter, config.spectrum_clip)
    return dict(zip(measures, fknn)), svm


def classifier_outputs(fknn: Mapping[str, FknnModel], svm: MultiSvmModel,
                       records: Sequence[ProteinRecord]) -> tuple[dict, list]:
    """Vote matrices per measure and SVM class indices, split per protein."""
    models = list(fknn.values())
    h = models[0].h
    windows = [w.window for r in records for w in make_windows(r, h)]
    lengths = [len(r) for r in records]
    mats = predict_variants(models, windows)
    votes = {m: _split(mat, lengths) for m, mat in zip(fknn, mats)}
    svm_idx = svm.predict_indices(windows) if windows else np.zeros(0, dtype=np.int64)
    return votes, _split(svm_idx, lengths)


def _validation_split(n: int, fraction: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    if n < 2:
        raise ConfigError("wheel 1 needs at least two training proteins for a validation split")
    size = min(n - 1, max(1, int(round(fraction * n))))
    perm = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, 1]))).permutation(n)
    return np.sort(perm[size:]), np.sort(perm[:size])


def resolve_weights(train: Dataset, config: RunConfig) -> ClassifierWeights:
    """Roulette weights: the breakpoint (wheel 2) or held-out accuracies (wheel 1).

    Wheel 1 holds out ``validation_fraction`` of the training proteins,
    trains both classifiers on the rest and weights them by their Q3 there.
    """
    if config.wheel == 2:
        return ClassifierWeights.from_breakpoint(config.breakpoint)
    inner, held = _validation_split(len(train), config.validation_fraction, config.seed)
    fknn, svm = fit_classifiers(train.subset(inner, f"{train.name}-inner"), config)
    val = train.subset(held, f"{train.name}-validation")
    votes, svm_idx = classifier_outputs(fknn, svm, list(val))
    truths = [r.structure for r in val]
    top = [_indices_to_string(np.argmax(u, axis=1), CLASSES) for u in votes[config.measure]]
    acc_f = metrics(confusion(truths, top)).q3
    acc_s = metrics(confusion(truths, [_indices_to_string(s, CLASSES) for s in svm_idx])).q3
    return wheel1_weights(acc_f, acc_s)


def compute_streams(train: Dataset, test: Dataset | Sequence[ProteinRecord], config: RunConfig,
                    measures: Sequence[str] | None = None) -> ClassifierStreams:
    """Train on ``train`` and run both classifiers over ``test``."""
    measures = tuple(measures or (config.measure,))
    if config.measure not in measures:
        measures = (*measures, config.measure)
    fknn, svm = fit_classifiers(train, config, measures)
    records = list(test)
    votes, svm_idx = classifier_outputs(fknn, svm, records)
    weights = resolve_weights(train, config)
    truths = [r.structure for r in records] if all(r.labeled for r in records) else None
    return ClassifierStreams(
        protein_ids=[r.id for r in records],
        truths=truths,
        votes=votes,
        svm=svm_idx,
        weights=[weights] * len(records),
    )


def _fold_streams(args):
    dataset, f, test_idx, train_idx, config, measures = args
    train = dataset.subset(train_idx, f"{dataset.name}-train{f}")
    test = dataset.subset(test_idx, f"{dataset.name}-test{f}")
    return compute_streams(train, test, config, measures)


def cross_validated_streams(dataset: Dataset, config: RunConfig,
                            measures: Sequence[str] | None = None) -> ClassifierStreams:
    """Protein-level k-fold streams for every protein, in dataset order.

    Folds come from :func:`mcpss.evaluate.fold_assignment` with the run seed,
    the same split :func:`mcpss.evaluate.kfold` uses.
    """
    if not dataset.labeled:
        raise ConfigError("cross-validation needs a labelled dataset")
    folds = fold_assignment(len(dataset), config.folds, config.seed)
    jobs = [
        (dataset, f, np.flatnonzero(folds == f), np.flatnonzero(folds != f), config, measures)
        for f in range(config.folds)
    ]
    if config.workers > 1:
        with ProcessPoolExecutor(min(config.workers, len(jobs))) as pool:
            parts = list(pool.map(_fold_streams, jobs))
    else:
        parts = [_fold_streams(job) for job in jobs]
    n = len(dataset)
    votes = {m: [None] * n for m in parts[0].votes}
    svm = [None] * n
    weights = [None] * n
    for (_, _, test_idx, _, _, _), part in zip(jobs, parts):
        for slot, i in enumerate(test_idx):
            for m in votes:
                votes[m][i] = part.votes[m][slot]
            svm[i] = part.svm[slot]
            weights[i] = part.weights[slot]
    return ClassifierStreams(
        protein_ids=dataset.ids,
        truths=[r.structure for r in dataset],
        votes=votes,
        svm=svm,
        weights=weights,
        folds=folds,
    )


# ------------------------------------------------------------ aggregation


def aggregate_streams(streams: ClassifierStreams, config: RunConfig, rule: int | None = None,
                      measure: str | None = None) -> tuple[list[str], list[str]]:
    """``(aggregated, final)`` strings per protein.

    ``final`` is ``aggregated`` after the closing filter pass, or identical to
    it when the final filter is off. Each protein draws from its own Philox
    stream spawned from the run seed.
    """
    rule = config.aggregation if rule is None else rule
    votes = streams.votes[measure or config.measure]
    rngs = protein_rngs(config.seed, len(streams))
    rules = config.filter_rules
    raw, final = [], []
    for u, s, w, rng in zip(votes, streams.svm, streams.weights, rngs):
        ctx = AggregationContext(rule, w, config.seed, config.samples_per_decision)
        a = aggregate_protein(u, s, ctx, rng, rules, final_filter=False,
                              classes=streams.classes, stream_filter=config.post_filter)
        raw.append(a)
        final.append(filter_structure(a, rules) if config.final_filter else a)
    return raw, final


def ablation_predictions(streams: ClassifierStreams, config: RunConfig) -> dict[str, list[str]]:
    """The nine ablation rows.

    Single-classifier rows are the raw decisions; MCP rows go through the
    configured aggregation and filtering with the configured measure's votes.
    """
    out = {}
    for measure, label in FKNN_LABELS.items():
        if measure in streams.votes:
            out[label] = streams.top_decisions(measure)
    out[SVM_LABEL] = streams.svm_decisions()
    for rule in RULES:
        out[f"MCP{rule}"] = aggregate_streams(streams, config, rule)[1]
    return out


def evaluation_predictions(streams: ClassifierStreams, config: RunConfig) -> dict[str, list[str]]:
    """The configured MCP rule plus the two classifiers it combines."""
    return {
        f"MCP{config.aggregation}": aggregate_streams(streams, config)[1],
        FKNN_LABELS[config.measure]: streams.top_decisions(config.measure),
        SVM_LABEL: streams.svm_decisions(),
    }


def cv_result(streams: ClassifierStreams, predictions: Mapping[str, Sequence[str]],
              n_folds: int) -> CrossValidationResult:
    """Group per-protein predictions into per-fold confusion matrices."""
    if streams.folds is None or streams.truths is None:
        raise ValueError("streams carry no fold assignment or no truth labels")
    matrices = {}
    for name, preds in predictions.items():
        mats = []
        for f in range(n_folds):
            idx = np.flatnonzero(streams.folds == f)
            mats.append(confusion([streams.truths[i] for i in idx], [preds[i] for i in idx],
                                  streams.classes))
        matrices[name] = mats
    return CrossValidationResult(streams.folds, matrices, {k: list(v) for k, v in predictions.items()})


def sweep(streams: ClassifierStreams, config: RunConfig, breakpoints: Sequence[float] | None = None,
          rule: int = 2) -> list[tuple[float, float]]:
    """Wheel-2 accuracy curve over breakpoints, computed from fixed streams."""
    if streams.truths is None:
        raise ConfigError("a breakpoint sweep needs labelled proteins")
    bps = list(breakpoints) if breakpoints is not None else parse_sweep(config.breakpoint_sweep)
    return wheel2_sweep(
        streams.votes[config.measure], streams.svm, streams.truths, bps,
        draws=config.draws, seed=config.seed, rule=rule, rules=config.filter_rules,
        final_filter=config.final_filter, classes=streams.classes, stream_filter=config.post_filter,
    )


@dataclass(frozen=True)
class PipelinePredictor:
    """Callable ``(train, test)`` for :func:`mcpss.evaluate.kfold` and friends."""

    config: RunConfig
    ablation: bool = False

    def __call__(self, train: Dataset, test: Dataset) -> dict[str, list[str]]:
        measures = tuple(FKNN_LABELS) if self.ablation else (self.config.measure,)
        streams = compute_streams(train, test, self.config, measures)
        if self.ablation:
            return ablation_predictions(streams, self.config)
        return evaluation_predictions(streams, self.config)


# ------------------------------------------------------- trained models


@dataclass
class PredictionRun:
    """Everything a prediction produced, plus the config that reproduces it."""

    config: dict
    protein_ids: list
    sequences: list
    votes: list
    svm: list
    aggregated: list
    structures: list
    weights: ClassifierWeights
    classes: tuple = CLASSES
    report: MetricReport | None = None
    timings: dict = field(default_factory=dict)

    def rows(self):
        """Per-residue rows: id, position, residue, memberships, SVM, aggregated, final."""
        for pid, seq, u, s, a, f in zip(self.protein_ids, self.sequences, self.votes, self.svm,
                                        self.aggregated, self.structures):
            for pos, res in enumerate(seq):
                yield (pid, pos, res, *(float(x) for x in u[pos]), self.classes[s[pos]], a[pos], f[pos])

    def write_table(self, path) -> None:
        header = ["protein", "position", "residue", *(f"u_{c}" for c in self.classes),
                  "svm", "aggregated", "final"]
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\t".join(header) + "\n")
            for row in self.rows():
                pid, pos, res, *rest = row
                mem = rest[:len(self.classes)]
                tail = rest[len(self.classes):]
                fh.write("\t".join([pid, str(pos), res, *(f"{x:.6f}" for x in mem), *tail]) + "\n")

    def write_structures(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for pid, seq, s in zip(self.protein_ids, self.sequences, self.structures):
                fh.write(f">{pid}\n{seq}\n{s}\n")

    def summary(self) -> dict:
        return {
            "config": self.config,
            "proteins": len(self.protein_ids),
            "residues": sum(len(s) for s in self.sequences),
            "weights": dataclasses.asdict(self.weights),
            "metrics": self.report.to_dict() if self.report else None,
            "timings": self.timings,
        }


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


@dataclass
class TrainedModels:
    fknn: FknnModel
    svm: MultiSvmModel
    weights: ClassifierWeights
    config: RunConfig

    @classmethod
    def train(cls, train: Dataset, config: RunConfig) -> "TrainedModels":
        fknn, svm = fit_classifiers(train, config)
        return cls(fknn[config.measure], svm, resolve_weights(train, config), config)

    def save(self, directory) -> dict:
        """Write ``fknn.npz``, ``svm.npz`` and ``manifest.json``; returns the manifest."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        self.fknn.save(directory / "fknn.npz")
        self.svm.save(directory / "svm.npz")
        manifest = {
            "format": MANIFEST_FORMAT,
            "version": MANIFEST_VERSION,
            "config": self.config.snapshot(),
            "classes": list(self.fknn.classes),
            "window_size": self.fknn.h,
            "weights": dataclasses.asdict(self.weights),
            "files": {name: sha256_file(directory / name) for name in ("fknn.npz", "svm.npz")},
        }
        (directory / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n",
                                                 encoding="utf-8")
        return manifest

    @classmethod
    def load(cls, directory) -> "TrainedModels":
        directory = Path(directory)
        path = directory / "manifest.json"
        if not path.is_file():
            raise FileNotFoundError(f"no manifest.json in {directory}")
        try:
            manifest = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: invalid JSON ({exc})") from None
        if manifest.get("format") != MANIFEST_FORMAT or manifest.get("version") != MANIFEST_VERSION:
            raise ParseError(f"{path}: not a {MANIFEST_FORMAT} v{MANIFEST_VERSION} manifest")
        for name, digest in manifest["files"].items():
            if sha256_file(directory / name) != digest:
                raise ParseError(f"{directory / name}: content hash does not match the manifest")
        config = RunConfig.from_dict(manifest["config"])
        fknn = FknnModel.load(directory / "fknn.npz")
        svm = MultiSvmModel.load(directory / "svm.npz")
        if fknn.h != config.window_size or tuple(fknn.classes) != tuple(svm.classes):
            raise ConfigError("model files disagree with their manifest")
        return cls(fknn, svm, ClassifierWeights(**manifest["weights"]), config)

    def check_compatible(self, config: RunConfig) -> None:
        """Refuse a run config whose model-shaping fields differ from training."""
        for name in MODEL_FIELDS:
            ours, theirs = getattr(self.config, name), getattr(config, name)
            if ours != theirs:
                raise ConfigError(f"{name}: models were trained with {ours!r}, run asks for {theirs!r}")

    def predict(self, records: Sequence[ProteinRecord], config: RunConfig | None = None) -> PredictionRun:
        config = config or self.config
        self.check_compatible(config)
        if config.wheel == 2:
            weights = ClassifierWeights.from_breakpoint(config.breakpoint)
        elif self.weights.source == "wheel1":
            weights = self.weights
        else:
            raise ConfigError("wheel: models were trained without wheel-1 validation weights")
        records = list(records)
        t0 = time.perf_counter()
        votes, svm_idx = classifier_outputs({config.measure: self.fknn}, self.svm, records)
        t1 = time.perf_counter()
        streams = ClassifierStreams(
            protein_ids=[r.id for r in records],
            truths=[r.structure for r in records] if records and all(r.labeled for r in records) else None,
            votes=votes,
            svm=svm_idx,
            weights=[weights] * len(records),
            classes=tuple(self.fknn.classes),
        )
        aggregated, final = aggregate_streams(streams, config)
        t2 = time.perf_counter()
        report = metrics(confusion(streams.truths, final, streams.classes)) if streams.truths else None
        return PredictionRun(
            config=config.snapshot(),
            protein_ids=streams.protein_ids,
            sequences=[r.sequence for r in records],
            votes=votes[config.measure],
            svm=svm_idx,
            aggregated=aggregated,
            structures=final,
            weights=weights,
            classes=streams.classes,
            report=report,
            timings={"classifiers_s": t1 - t0, "aggregation_s": t2 - t1},
        )
