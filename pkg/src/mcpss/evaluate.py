"""Confusion-matrix metrics and cross-validation orchestration."""

from __future__ import annotations

import json
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import ConfigError
from .ingest import CLASSES, Dataset


@dataclass(frozen=True)
class ConfusionMatrix:
    """Rows are true classes, columns predicted classes."""

    counts: np.ndarray
    classes: tuple = CLASSES

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        if tuple(other.classes) != tuple(self.classes):
            raise ValueError("cannot add confusion matrices over different class orders")
        return ConfusionMatrix(self.counts + other.counts, self.classes)

    def one_vs_rest(self, j: int) -> tuple[int, int, int, int]:
        """``(TP, FP, TN, FN)`` for class index ``j``."""
        cm = self.counts
        tp = int(cm[j, j])
        fn = int(cm[j].sum()) - tp
        fp = int(cm[:, j].sum()) - tp
        tn = self.total - tp - fn - fp
        return tp, fp, tn, fn

    @classmethod
    def empty(cls, classes=CLASSES) -> "ConfusionMatrix":
        return cls(np.zeros((len(classes), len(classes)), dtype=np.int64), tuple(classes))


def confusion(truth: Sequence[str] | str, predicted: Sequence[str] | str,
              classes: Sequence[str] = CLASSES) -> ConfusionMatrix:
    """Tally aligned structure strings (or lists of them) into a matrix."""
    if isinstance(truth, str):
        truth, predicted = [truth], [predicted]
    if len(truth) != len(predicted):
        raise ValueError(f"{len(truth)} truth strings vs {len(predicted)} predictions")
    lookup = {c: i for i, c in enumerate(classes)}
    counts = np.zeros((len(classes), len(classes)), dtype=np.int64)
    for n, (t, p) in enumerate(zip(truth, predicted)):
        if len(t) != len(p):
            raise ValueError(f"string {n}: truth length {len(t)} != prediction length {len(p)}")
        for a, b in zip(t, p):
            counts[lookup[a], lookup[b]] += 1
    return ConfusionMatrix(counts, tuple(classes))


def _ratio(num: int, den: int) -> float:
    return num / den if den else 0.0


def mcc(tp: int, fp: int, tn: int, fn: int) -> float:
    den = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)
    if den == 0:
        return 0.0
    return (tp * tn - fp * fn) / math.sqrt(den)


@dataclass(frozen=True)
class MetricReport:
    """Percentages for q3/q/precision/recall/specificity, raw MCC in [-1, 1].

    ``overall_accuracy_ovr`` is the one-vs-rest formula
    ``sum(TP+TN) / sum(TP+TN+FP+FN)``, which is not the same number as q3 for
    more than two classes.
    """

    q3: float
    q: dict
    precision: dict
    recall: dict
    specificity: dict
    mcc: dict
    overall_accuracy_ovr: float
    residues: int
    classes: tuple = CLASSES
    counts: list = field(default_factory=list)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["classes"] = list(self.classes)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def table(self, title: str = "") -> str:
        lines = [title] if title else []
        lines.append(f"Q3 {self.q3:7.2f}   residues {self.residues}")
        lines.append(f"{'class':>6} {'Q':>7} {'prec':>7} {'recall':>7} {'spec':>7} {'MCC':>7}")
        for c in self.classes:
            lines.append(
                f"{c:>6} {self.q[c]:7.2f} {self.precision[c]:7.2f} {self.recall[c]:7.2f} "
                f"{self.specificity[c]:7.2f} {self.mcc[c]:7.3f}"
            )
        return "\n".join(lines)


def metrics(cm: ConfusionMatrix) -> MetricReport:
    total = cm.total
    if total == 0:
        raise ValueError("cannot compute metrics from an empty confusion matrix")
    prec, rec, spec, mc, q = {}, {}, {}, {}, {}
    num_ovr = den_ovr = 0
    for j, c in enumerate(cm.classes):
        tp, fp, tn, fn = cm.one_vs_rest(j)
        prec[c] = 100.0 * _ratio(tp, tp + fp)
        rec[c] = 100.0 * _ratio(tp, tp + fn)
        spec[c] = 100.0 * _ratio(tn, tn + fp)
        mc[c] = mcc(tp, fp, tn, fn)
        q[c] = rec[c]
        num_ovr += tp + tn
        den_ovr += tp + tn + fp + fn
    return MetricReport(
        q3=100.0 * int(np.trace(cm.counts)) / total,
        q=q,
        precision=prec,
        recall=rec,
        specificity=spec,
        mcc=mc,
        overall_accuracy_ovr=100.0 * num_ovr / den_ovr,
        residues=total,
        classes=tuple(cm.classes),
        counts=cm.counts.tolist(),
    )


# A predictor takes (train, test) and returns predicted structure strings for
# the test records, either as a list or as a mapping of named variants.
Predictor = Callable[[Dataset, Dataset], "Sequence[str] | Mapping[str, Sequence[str]]"]


def fold_assignment(n_proteins: int, k: int, seed: int = 0) -> np.ndarray:
    """Fold index per protein: a seeded permutation dealt round-robin."""
    if k < 2:
        raise ConfigError(f"need at least 2 folds, got {k}")
    if n_proteins < k:
        raise ConfigError(f"{n_proteins} proteins cannot fill {k} folds")
    perm = np.random.Generator(np.random.Philox(seed)).permutation(n_proteins)
    folds = np.empty(n_proteins, dtype=np.int64)
    folds[perm] = np.arange(n_proteins) % k
    return folds


def _as_variants(pred) -> dict:
    if isinstance(pred, Mapping):
        return dict(pred)
    return {"prediction": list(pred)}


@dataclass
class CrossValidationResult:
    folds: np.ndarray
    fold_matrices: dict
    predictions: dict

    def fold_reports(self, variant: str = "prediction") -> list[MetricReport]:
        return [metrics(cm) for cm in self.fold_matrices[variant]]

    def pooled_matrix(self, variant: str = "prediction") -> ConfusionMatrix:
        mats = self.fold_matrices[variant]
        out = mats[0]
        for cm in mats[1:]:
            out = out + cm
        return out

    def pooled(self, variant: str = "prediction") -> MetricReport:
        return metrics(self.pooled_matrix(variant))

    @property
    def variants(self) -> list[str]:
        return list(self.fold_matrices)


def _run_fold(predictor, train, test, classes):
    pred = _as_variants(predictor(train, test))
    truths = [r.structure for r in test]
    return {name: (confusion(truths, p, classes), list(p)) for name, p in pred.items()}


def kfold(dataset: Dataset, k: int, predictor: Predictor, seed: int = 0,
          classes: Sequence[str] = CLASSES, workers: int = 1) -> CrossValidationResult:
    """Protein-level k-fold cross-validation.

    Whole proteins go to one fold, since windows of the same protein overlap.
    ``predictions`` maps variant name to one predicted string per protein in
    dataset order.
    """
    if not dataset.labeled:
        raise ValueError("cross-validation needs a labelled dataset")
    folds = fold_assignment(len(dataset), k, seed)
    splits = []
    for f in range(k):
        test_idx = np.flatnonzero(folds == f)
        train_idx = np.flatnonzero(folds != f)
        splits.append((test_idx, dataset.subset(train_idx, f"{dataset.name}-train{f}"),
                       dataset.subset(test_idx, f"{dataset.name}-test{f}")))
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            futures = [pool.submit(_run_fold, predictor, tr, te, classes) for _, tr, te in splits]
            results = [fut.result() for fut in futures]
    else:
        results = [_run_fold(predictor, tr, te, classes) for _, tr, te in splits]
    matrices: dict = {}
    predictions: dict = {}
    for (test_idx, _, _), res in zip(splits, results):
        for name, (cm, preds) in res.items():
            matrices.setdefault(name, []).append(cm)
            slot = predictions.setdefault(name, [None] * len(dataset))
            for i, p in zip(test_idx, preds):
                slot[i] = p
    return CrossValidationResult(folds, matrices, predictions)


def independent_test(train: Dataset, test: Dataset, predictor: Predictor,
                     classes: Sequence[str] = CLASSES):
    """Train on all of ``train`` and score on ``test``.

    Returns a single report for a plain predictor, or a dict of reports when
    the predictor returns named variants.
    """
    overlap = set(train.ids) & set(test.ids)
    if overlap:
        warnings.warn(f"{len(overlap)} protein ids occur in both train and test sets", stacklevel=2)
    raw = predictor(train, test)
    truths = [r.structure for r in test]
    reports = {name: metrics(confusion(truths, p, classes)) for name, p in _as_variants(raw).items()}
    if not isinstance(raw, Mapping):
        return reports["prediction"]
    return reports
