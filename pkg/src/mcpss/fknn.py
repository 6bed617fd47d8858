"""Fuzzy k-nearest-neighbour classification over residue windows.

Training assigns each labelled window a fuzzy membership row from the
labels of its ``k_prime`` nearest training windows (0.51 + 0.49 * share for
its own class, 0.49 * share for the others). A query then receives the
inverse-distance weighted average of the rows of its ``k`` nearest
training windows, with weights ``d ** (-2 / (m - 1))``.

Neighbour ranking is exact. Ties in distance are broken by training order,
and training windows are kept sorted by ``(protein_id, position)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import kernels
from .dissimilarity import DissimilarityConfig
from .errors import ConfigError
from .ingest import CLASSES, ProteinRecord
from .windowing import WindowSample, make_windows

FORMAT_NAME = "mcpss-fknn"
FORMAT_VERSION = 1
# peak memory for one block of the neighbour search (components + floats)
_CHUNK_BYTES = 512 * 2**20


@dataclass(frozen=True)
class FuzzyVote:
    memberships: dict
    decisions: tuple

    @classmethod
    def from_row(cls, row, classes: Sequence[str] = CLASSES) -> "FuzzyVote":
        order = sorted(range(len(classes)), key=lambda c: (-row[c], c))
        return cls(
            {c: float(v) for c, v in zip(classes, row)},
            tuple(classes[c] for c in order),
        )

    @property
    def top(self) -> str:
        return self.decisions[0]


def fuzzy_memberships(distances: np.ndarray, neighbor_rows: np.ndarray, m: float) -> np.ndarray:
    """Inverse-distance weighted membership average for a batch of queries.

    ``distances`` is ``(Q, k)``; ``neighbor_rows`` is ``(Q, k, l)``. Queries
    with one or more zero-distance neighbours take the plain mean of those
    neighbours' rows.
    """
    if m <= 1:
        raise ConfigError(f"fuzziness exponent m must be > 1, got {m}")
    d = np.asarray(distances, dtype=np.float64)
    rows = np.asarray(neighbor_rows, dtype=np.float64)
    if d.ndim == 1:
        return fuzzy_memberships(d[None], rows[None], m)[0]
    zero = d == 0
    has_zero = zero.any(axis=1)
    weights = np.empty_like(d)
    if has_zero.any():
        weights[has_zero] = zero[has_zero]
    pos = ~has_zero
    if pos.any():
        # relative to the closest neighbour, so that large exponents stay finite
        dp = d[pos]
        weights[pos] = (dp.min(axis=1, keepdims=True) / dp) ** (2.0 / (m - 1.0))
    u = np.einsum("qk,qkl->ql", weights, rows)
    return u / weights.sum(axis=1, keepdims=True)


def initial_memberships(labels: np.ndarray, neighbor_idx: np.ndarray, n_classes: int) -> np.ndarray:
    """Membership rows from each sample's label and its neighbours' labels."""
    k_prime = neighbor_idx.shape[1]
    counts = np.zeros((labels.shape[0], n_classes))
    nbr_labels = labels[neighbor_idx]
    for c in range(n_classes):
        counts[:, c] = (nbr_labels == c).sum(axis=1)
    out = counts / k_prime * 0.49
    out[np.arange(labels.shape[0]), labels] += 0.51
    return out


def _chunk_rows(n_cols: int) -> int:
    return max(1, _CHUNK_BYTES // max(1, 40 * n_cols))


def knn_search(
    queries: kernels.EncodedWindows,
    refs: kernels.EncodedWindows,
    cfgs: Sequence[DissimilarityConfig],
    k: int,
    exclude_self: bool = False,
) -> list[tuple[np.ndarray, np.ndarray]]:
    """Exact k nearest reference windows for every query, once per config.

    Pair components are computed once and shared by all ``cfgs``. With
    ``exclude_self`` the queries must be the references themselves and each
    window is barred from its own neighbour list.
    """
    nq, nr = len(queries), len(refs)
    if k > nr - (1 if exclude_self else 0):
        raise ConfigError(f"k={k} exceeds the number of available neighbours")
    out = [(np.empty((nq, k), dtype=np.int64), np.empty((nq, k))) for _ in cfgs]
    symmetric = exclude_self and queries is refs and nq <= _chunk_rows(nq)
    step = nq if symmetric else _chunk_rows(nr)
    for lo in range(0, nq, step):
        hi = min(nq, lo + step)
        if symmetric:
            comp = kernels.pair_components(refs)
        else:
            block = kernels.EncodedWindows(
                queries.codes[lo:hi], queries.states[lo:hi], queries.masks[lo:hi],
                queries.grams[lo:hi], queries.gram_counts[lo:hi], queries.n,
            )
            comp = kernels.pair_components(block, refs)
        for (idx, dist), cfg in zip(out, cfgs):
            d = kernels.combine(comp, cfg)
            if exclude_self:
                d[np.arange(hi - lo), np.arange(lo, hi)] = np.inf
            order = np.argsort(d, axis=1, kind="stable")[:, :k]
            idx[lo:hi] = order
            dist[lo:hi] = np.take_along_axis(d, order, axis=1)
    return out


def _check_params(k, k_prime, m, n_train):
    if k < 1 or k_prime < 1:
        raise ConfigError("k and k_prime must be positive")
    if m <= 1:
        raise ConfigError(f"fuzziness exponent m must be > 1, got {m}")
    if k > n_train:
        raise ConfigError(f"k={k} exceeds the {n_train} training samples")
    if k_prime > n_train - 1:
        raise ConfigError(f"k_prime={k_prime} needs at least {k_prime + 1} training samples")


def _sorted_training(samples: Sequence[WindowSample], classes) -> tuple[list, np.ndarray]:
    samples = sorted(samples, key=lambda s: (s.protein_id, s.position))
    lookup = {c: i for i, c in enumerate(classes)}
    try:
        labels = np.array([lookup[s.center_label] for s in samples], dtype=np.int64)
    except KeyError as exc:
        raise ValueError(f"training sample with label {exc.args[0]!r} outside {classes}") from None
    return samples, labels


@dataclass
class FknnModel:
    windows: list
    protein_ids: list
    positions: np.ndarray
    labels: np.ndarray
    memberships: np.ndarray
    k: int = 15
    k_prime: int = 15
    m: float = 2.0
    cfg: DissimilarityConfig = field(default_factory=DissimilarityConfig)
    classes: tuple = CLASSES
    _encoded: kernels.EncodedWindows | None = field(default=None, repr=False, compare=False)

    @property
    def h(self) -> int:
        return len(self.windows[0])

    @property
    def encoded(self) -> kernels.EncodedWindows:
        if self._encoded is None:
            self._encoded = kernels.prepare(self.windows, self.cfg.n)
        return self._encoded

    @property
    def training_samples(self) -> list[WindowSample]:
        return [
            WindowSample(w, self.classes[y], pid, int(pos))
            for w, y, pid, pos in zip(self.windows, self.labels, self.protein_ids, self.positions)
        ]

    @classmethod
    def fit(cls, samples, k=15, k_prime=15, m=2.0, cfg=DissimilarityConfig(), classes=CLASSES):
        return fit_variants(samples, [cfg], k, k_prime, m, classes)[0]

    def vote_matrix(self, queries) -> np.ndarray:
        """``(Q, l)`` membership matrix for windows (strings or samples)."""
        return predict_variants([self], queries)[0]

    def classify(self, query) -> FuzzyVote:
        return FuzzyVote.from_row(self.vote_matrix([query])[0], self.classes)

    def save(self, path) -> None:
        meta = {
            "format": FORMAT_NAME,
            "version": FORMAT_VERSION,
            "k": self.k,
            "k_prime": self.k_prime,
            "m": self.m,
            "n": self.cfg.n,
            "use_rho": self.cfg.use_rho,
            "use_ngram": self.cfg.use_ngram,
            "rho_orientation": self.cfg.rho_orientation,
            "classes": list(self.classes),
            "h": self.h,
        }
        with open(path, "wb") as fh:
            np.savez(
                fh,
                meta=np.array(json.dumps(meta, sort_keys=True)),
                windows=np.array(self.windows),
                protein_ids=np.array(self.protein_ids),
                positions=np.asarray(self.positions, dtype=np.int64),
                labels=self.labels,
                memberships=self.memberships,
            )

    @classmethod
    def load(cls, path) -> "FknnModel":
        with np.load(Path(path), allow_pickle=False) as z:
            meta = json.loads(str(z["meta"]))
            if meta.get("format") != FORMAT_NAME or meta.get("version") != FORMAT_VERSION:
                raise ValueError(f"{path}: not a {FORMAT_NAME} v{FORMAT_VERSION} container")
            return cls(
                windows=[str(w) for w in z["windows"]],
                protein_ids=[str(p) for p in z["protein_ids"]],
                positions=z["positions"].copy(),
                labels=z["labels"].copy(),
                memberships=z["memberships"].copy(),
                k=meta["k"],
                k_prime=meta["k_prime"],
                m=meta["m"],
                cfg=DissimilarityConfig(meta["n"], meta["use_rho"], meta["use_ngram"], meta["rho_orientation"]),
                classes=tuple(meta["classes"]),
            )


def fit_variants(samples, cfgs, k=15, k_prime=15, m=2.0, classes=CLASSES) -> list[FknnModel]:
    """Fit one model per dissimilarity config, sharing the pairwise work.

    All configs must use the same n-gram size.
    """
    samples = list(samples)
    _check_params(k, k_prime, m, len(samples))
    if len({cfg.n for cfg in cfgs}) != 1:
        raise ConfigError("variants must share the n-gram size")
    samples, labels = _sorted_training(samples, classes)
    windows = [s.window for s in samples]
    for cfg in cfgs:
        cfg.check_window(len(windows[0]))
    enc = kernels.prepare(windows, cfgs[0].n)
    searches = knn_search(enc, enc, cfgs, k_prime, exclude_self=True)
    models = []
    for cfg, (idx, _) in zip(cfgs, searches):
        models.append(FknnModel(
            windows=windows,
            protein_ids=[s.protein_id for s in samples],
            positions=np.array([s.position for s in samples], dtype=np.int64),
            labels=labels,
            memberships=initial_memberships(labels, idx, len(classes)),
            k=k, k_prime=k_prime, m=m, cfg=cfg, classes=tuple(classes),
            _encoded=enc,
        ))
    return models


def predict_variants(models: Sequence[FknnModel], queries) -> list[np.ndarray]:
    """Vote matrices for several models trained on the same windows."""
    if not models:
        return []
    base = models[0]
    if len(base.windows) == 0:
        raise ValueError("model has no training samples")
    windows = [q.window if isinstance(q, WindowSample) else q for q in queries]
    if not windows:
        return [np.zeros((0, len(m.classes))) for m in models]
    if any(len(w) != base.h for w in windows):
        raise ConfigError(f"query windows must have length {base.h}")
    enc = kernels.prepare(windows, base.cfg.n)
    k = max(mdl.k for mdl in models)
    searches = knn_search(enc, base.encoded, [mdl.cfg for mdl in models], k)
    out = []
    for mdl, (idx, dist) in zip(models, searches):
        idx, dist = idx[:, :mdl.k], dist[:, :mdl.k]
        out.append(fuzzy_memberships(dist, mdl.memberships[idx], mdl.m))
    return out


def classify(model: FknnModel, query) -> FuzzyVote:
    return model.classify(query)


def predict_sequence(model: FknnModel, record: ProteinRecord) -> list[FuzzyVote]:
    windows = make_windows(record, model.h)
    return [FuzzyVote.from_row(row, model.classes) for row in model.vote_matrix(windows)]
