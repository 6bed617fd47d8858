"""Soft-margin SVM over residue windows with the edit-distance kernel.

``K(x, y) = exp(gamma * edit(x, y))`` with ``gamma < 0``. Binary machines are
trained by SMO using the maximal-violating-pair working set (the first-order
rule of LIBSVM), which tolerates the kernel not being positive definite.
Three classes give three one-vs-one machines combined by majority vote.
"""

from __future__ import annotations

import itertools
import json
import math
from collections import OrderedDict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import kernels
from .errors import ConfigError, ConvergenceError
from .ingest import CLASSES
from .windowing import WindowSample

FORMAT_NAME = "mcpss-svm"
FORMAT_VERSION = 1
FULL_CACHE_LIMIT = 10_000
_TAU = 1e-12


@dataclass(frozen=True)
class EditKernelParams:
    gamma: float = -0.1

    def __post_init__(self):
        if not self.gamma < 0:
            raise ConfigError(f"edit kernel gamma must be negative, got {self.gamma}")


def edit_kernel(x: str, y: str, params: EditKernelParams = EditKernelParams()) -> float:
    from .dissimilarity import edit_distance

    return math.exp(params.gamma * edit_distance(x, y))


def kernel_from_distances(distances: np.ndarray, params: EditKernelParams) -> np.ndarray:
    return np.exp(params.gamma * distances.astype(np.float64))


def clip_spectrum(K: np.ndarray) -> np.ndarray:
    """Nearest PSD matrix obtained by zeroing negative eigenvalues."""
    w, V = np.linalg.eigh((K + K.T) / 2)
    return (V * np.clip(w, 0, None)) @ V.T


def dual_objective(alpha: np.ndarray, y: np.ndarray, K: np.ndarray) -> float:
    """``0.5 * a'Qa - sum(a)`` with ``Q = yy' * K`` (the minimised form)."""
    v = alpha * y
    return float(0.5 * v @ K @ v - alpha.sum())


class KernelRows:
    """Row access to a training kernel matrix.

    Small problems hold the full matrix; larger ones compute rows on demand
    and keep the most recently used ones.
    """

    def __init__(self, codes, params, full=None, max_rows=2048):
        self.codes = codes
        self.params = params
        self.n = codes.shape[0]
        self.full = full
        self._lru = OrderedDict()
        self._max_rows = max_rows
        if self.full is None and self.n <= FULL_CACHE_LIMIT:
            self.full = kernel_from_distances(kernels.edit_distance_matrix(codes), params)

    def row(self, i: int) -> np.ndarray:
        if self.full is not None:
            return self.full[i]
        hit = self._lru.get(i)
        if hit is not None:
            self._lru.move_to_end(i)
            return hit
        d = kernels.edit_distance_matrix(self.codes[i:i + 1], self.codes)[0]
        r = kernel_from_distances(d, self.params)
        self._lru[i] = r
        if len(self._lru) > self._max_rows:
            self._lru.popitem(last=False)
        return r

    def diag(self) -> np.ndarray:
        if self.full is not None:
            return np.diag(self.full).copy()
        return np.ones(self.n)


def smo(rows: KernelRows, y: np.ndarray, C: float, tol: float = 1e-3, max_iter: int = 1_000_000):
    """Solve the box-constrained dual; returns ``(alpha, bias, iterations, gap)``."""
    n = y.shape[0]
    y = y.astype(np.float64)
    alpha = np.zeros(n)
    grad = -np.ones(n)
    diag = rows.diag()
    gap = math.inf
    for it in range(max_iter + 1):
        yg = -y * grad
        up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
        if not up.any() or not low.any():
            gap = 0.0
            break
        i = int(np.argmax(np.where(up, yg, -np.inf)))
        j = int(np.argmin(np.where(low, yg, np.inf)))
        gap = yg[i] - yg[j]
        if gap < tol:
            break
        if it == max_iter:
            raise ConvergenceError(
                f"SMO did not converge in {max_iter} iterations (KKT gap {gap:.3g})", gap
            )
        Ki, Kj = rows.row(i), rows.row(j)
        ai, aj = alpha[i], alpha[j]
        if y[i] != y[j]:
            quad = max(diag[i] + diag[j] - 2 * Ki[j], _TAU)
            delta = (-grad[i] - grad[j]) / quad
            diff = ai - aj
            ai += delta
            aj += delta
            if diff > 0:
                if aj < 0:
                    aj, ai = 0.0, diff
            elif ai < 0:
                ai, aj = 0.0, -diff
            if diff > 0:
                if ai > C:
                    ai, aj = C, C - diff
            elif aj > C:
                aj, ai = C, C + diff
        else:
            quad = max(diag[i] + diag[j] - 2 * Ki[j], _TAU)
            delta = (grad[i] - grad[j]) / quad
            total = ai + aj
            ai -= delta
            aj += delta
            if total > C:
                if ai > C:
                    ai, aj = C, total - C
            elif aj < 0:
                aj, ai = 0.0, total
            if total > C:
                if aj > C:
                    aj, ai = C, total - C
            elif ai < 0:
                ai, aj = 0.0, total
        di, dj = ai - alpha[i], aj - alpha[j]
        alpha[i], alpha[j] = ai, aj
        grad += y * (y[i] * di * Ki + y[j] * dj * Kj)
    free = (alpha > 0) & (alpha < C)
    yg = y * grad
    if free.any():
        rho = yg[free].mean()
    else:
        up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
        ub = yg[up].min() if up.any() else math.inf
        lb = yg[low].max() if low.any() else -math.inf
        if not (math.isfinite(ub) and math.isfinite(lb)):
            rho = 0.0
        else:
            rho = (ub + lb) / 2
    return alpha, -rho, it, gap


@dataclass
class BinarySvmModel:
    support_windows: list
    alphas: np.ndarray
    support_y: np.ndarray
    bias: float
    label_pair: tuple
    params: EditKernelParams
    C: float
    iterations: int = 0
    kkt_gap: float = 0.0

    def decision_from_distances(self, distances: np.ndarray) -> np.ndarray:
        """Decision values given ``(Q, n_support)`` edit distances."""
        return kernel_from_distances(distances, self.params) @ (self.alphas * self.support_y) + self.bias

    def decision_function(self, queries) -> np.ndarray:
        q = kernels.encode([_window(x) for x in queries])
        if not self.support_windows:
            return np.full(q.shape[0], self.bias)
        d = kernels.edit_distance_matrix(q, kernels.encode(self.support_windows))
        return self.decision_from_distances(d)

    def predict(self, queries) -> list[str]:
        first, second = self.label_pair
        return [first if v >= 0 else second for v in self.decision_function(queries)]


def _window(x) -> str:
    return x.window if isinstance(x, WindowSample) else x


def _fit_binary(rows, y, label_pair, windows, C, params, tol, max_iter) -> BinarySvmModel:
    alpha, bias, iters, gap = smo(rows, y, C, tol, max_iter)
    sv = np.flatnonzero(alpha > 0)
    return BinarySvmModel(
        support_windows=[windows[t] for t in sv],
        alphas=alpha[sv],
        support_y=y[sv].astype(np.float64),
        bias=float(bias),
        label_pair=tuple(label_pair),
        params=params,
        C=C,
        iterations=iters,
        kkt_gap=float(gap),
    )


def _check_trainer(C, tol):
    if not C > 0:
        raise ConfigError(f"SVM regularisation C must be positive, got {C}")
    if not tol > 0:
        raise ConfigError(f"SMO tolerance must be positive, got {tol}")


def train_binary(
    samples: Sequence[WindowSample],
    C: float = 1.0,
    params: EditKernelParams = EditKernelParams(),
    tol: float = 1e-3,
    max_iter: int = 1_000_000,
    spectrum_clip: bool = False,
    label_pair: tuple | None = None,
) -> BinarySvmModel:
    """Train one machine on samples drawn from exactly two classes.

    ``label_pair`` fixes which class is +1; by default the pair follows the
    H < E < C order.
    """
    _check_trainer(C, tol)
    labels = [s.center_label for s in samples]
    present = sorted(set(labels), key=lambda c: CLASSES.index(c) if c in CLASSES else len(CLASSES))
    if label_pair is None:
        label_pair = tuple(present)
    if len(present) != 2 or set(present) != set(label_pair):
        raise ValueError(f"binary training needs exactly two classes, got {present}")
    windows = [s.window for s in samples]
    y = np.where(np.array(labels) == label_pair[0], 1.0, -1.0)
    codes = kernels.encode(windows)
    full = None
    if spectrum_clip:
        if len(windows) > FULL_CACHE_LIMIT:
            raise ConfigError("spectrum clipping needs the full kernel matrix (<= 10000 samples)")
        full = clip_spectrum(kernel_from_distances(kernels.edit_distance_matrix(codes), params))
    rows = KernelRows(codes, params, full=full)
    return _fit_binary(rows, y, label_pair, windows, C, params, tol, max_iter)


@dataclass
class MultiSvmModel:
    binaries: list
    classes: tuple = CLASSES
    _support: tuple | None = field(default=None, repr=False, compare=False)

    def _support_index(self):
        if self._support is None:
            union = sorted({w for b in self.binaries for w in b.support_windows})
            pos = {w: t for t, w in enumerate(union)}
            cols = [np.array([pos[w] for w in b.support_windows], dtype=np.int64) for b in self.binaries]
            codes = kernels.encode(union) if union else None
            self._support = (codes, cols)
        return self._support

    def vote_counts(self, queries) -> np.ndarray:
        if not self.binaries:
            raise ValueError("SVM model is untrained")
        q = kernels.encode([_window(x) for x in queries])
        codes, cols = self._support_index()
        dist = kernels.edit_distance_matrix(q, codes) if codes is not None else None
        votes = np.zeros((q.shape[0], len(self.classes)), dtype=np.int64)
        rows = np.arange(q.shape[0])
        for b, c in zip(self.binaries, cols):
            if len(c):
                dec = b.decision_from_distances(dist[:, c])
            else:
                dec = np.full(q.shape[0], b.bias)
            first = self.classes.index(b.label_pair[0])
            second = self.classes.index(b.label_pair[1])
            winner = np.where(dec >= 0, first, second)
            np.add.at(votes, (rows, winner), 1)
        return votes

    def predict_indices(self, queries) -> np.ndarray:
        # argmax returns the first maximum, i.e. ties go to the earlier class
        return self.vote_counts(queries).argmax(axis=1)

    def predict(self, queries) -> list[str]:
        return [self.classes[t] for t in self.predict_indices(queries)]

    def save(self, path) -> None:
        meta = {
            "format": FORMAT_NAME,
            "version": FORMAT_VERSION,
            "classes": list(self.classes),
            "binaries": [
                {
                    "label_pair": list(b.label_pair),
                    "gamma": b.params.gamma,
                    "C": b.C,
                    "bias": b.bias,
                    "iterations": b.iterations,
                    "kkt_gap": b.kkt_gap,
                }
                for b in self.binaries
            ],
        }
        arrays = {"meta": np.array(json.dumps(meta, sort_keys=True))}
        for t, b in enumerate(self.binaries):
            arrays[f"b{t}_windows"] = np.array(b.support_windows, dtype=str)
            arrays[f"b{t}_alphas"] = b.alphas
            arrays[f"b{t}_y"] = b.support_y
        with open(path, "wb") as fh:
            np.savez(fh, **arrays)

    @classmethod
    def load(cls, path) -> "MultiSvmModel":
        with np.load(Path(path), allow_pickle=False) as z:
            meta = json.loads(str(z["meta"]))
            if meta.get("format") != FORMAT_NAME or meta.get("version") != FORMAT_VERSION:
                raise ValueError(f"{path}: not a {FORMAT_NAME} v{FORMAT_VERSION} container")
            binaries = []
            for t, bm in enumerate(meta["binaries"]):
                binaries.append(BinarySvmModel(
                    support_windows=[str(w) for w in z[f"b{t}_windows"]],
                    alphas=z[f"b{t}_alphas"].copy(),
                    support_y=z[f"b{t}_y"].copy(),
                    bias=bm["bias"],
                    label_pair=tuple(bm["label_pair"]),
                    params=EditKernelParams(bm["gamma"]),
                    C=bm["C"],
                    iterations=bm["iterations"],
                    kkt_gap=bm["kkt_gap"],
                ))
        return cls(binaries, tuple(meta["classes"]))


def train_multiclass(
    samples: Sequence[WindowSample],
    C: float = 1.0,
    params: EditKernelParams = EditKernelParams(),
    tol: float = 1e-3,
    max_iter: int = 1_000_000,
    spectrum_clip: bool = False,
    classes: Sequence[str] = CLASSES,
) -> MultiSvmModel:
    """One-vs-one machines for every pair of classes present in ``samples``."""
    _check_trainer(C, tol)
    samples = list(samples)
    labels = np.array([s.center_label for s in samples])
    windows = [s.window for s in samples]
    present = [c for c in classes if (labels == c).any()]
    if len(present) < 2:
        raise ValueError(f"need at least two classes to train, got {present}")
    codes = kernels.encode(windows)
    dist = None
    if len(windows) <= FULL_CACHE_LIMIT:
        dist = kernels.edit_distance_matrix(codes)
    binaries = []
    for a, b in itertools.combinations(present, 2):
        idx = np.flatnonzero((labels == a) | (labels == b))
        sub_windows = [windows[t] for t in idx]
        full = None
        if dist is not None:
            full = kernel_from_distances(dist[np.ix_(idx, idx)], params)
            if spectrum_clip:
                full = clip_spectrum(full)
        elif spectrum_clip:
            raise ConfigError("spectrum clipping needs the full kernel matrix (<= 10000 samples)")
        rows = KernelRows(codes[idx], params, full=full)
        y = np.where(labels[idx] == a, 1.0, -1.0)
        binaries.append(_fit_binary(rows, y, (a, b), sub_windows, C, params, tol, max_iter))
    return MultiSvmModel(binaries, tuple(classes))


def predict_multiclass(model: MultiSvmModel, query) -> str:
    return model.predict([query])[0]
