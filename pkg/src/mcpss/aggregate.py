"""Combining fuzzy KNN votes with SVM decisions.

Five rules decide each residue. When the top fuzzy decision agrees with the
SVM every rule returns it. On disagreement:

1. the second fuzzy decision;
2. a roulette draw ``r``: the top fuzzy decision if ``r <= omega_fknn``,
   else the SVM decision;
3. the last fuzzy decision;
4. a roulette draw between the second and the last fuzzy decision;
5. rule 2 applied to the filtered top-decision and SVM streams.

Random draws come from numpy's Philox counter-based generator. Each protein
gets its own stream spawned from the run seed, so results do not depend on
how proteins are batched or ordered across workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigError
from .ingest import CLASSES
from .postprocess import FilterRuleSet, filter_structure

RULES = (1, 2, 3, 4, 5)
WEIGHTED_RULES = frozenset({2, 4, 5})
DEFAULT_BREAKPOINT = 0.75


@dataclass(frozen=True)
class ClassifierWeights:
    omega_fknn: float
    omega_svm: float
    source: str = "wheel2-breakpoint"

    def __post_init__(self):
        for w in (self.omega_fknn, self.omega_svm):
            if not 0.0 <= w <= 1.0:
                raise ConfigError(f"classifier weight {w} outside [0, 1]")
        if abs(self.omega_fknn + self.omega_svm - 1.0) > 1e-12:
            raise ConfigError("classifier weights must sum to 1")
        if self.source not in ("wheel1", "wheel2-breakpoint"):
            raise ConfigError(f"unknown weight source {self.source!r}")

    @classmethod
    def from_breakpoint(cls, breakpoint: float) -> "ClassifierWeights":
        """[0, b] goes to the fuzzy KNN, (b, 1] to the SVM."""
        return cls(breakpoint, 1.0 - breakpoint, "wheel2-breakpoint")


def wheel1_weights(acc_fknn: float, acc_svm: float) -> ClassifierWeights:
    """Accuracy-proportional weights; the weaker classifier gets min/sum."""
    for a in (acc_fknn, acc_svm):
        if not 0 <= a <= 100:
            raise ConfigError(f"accuracy {a} outside [0, 100]")
    total = acc_fknn + acc_svm
    if total == 0:
        raise ConfigError("both classifier accuracies are zero")
    low = min(acc_fknn, acc_svm) / total
    high = 1.0 - low
    if acc_fknn < acc_svm:
        return ClassifierWeights(low, high, "wheel1")
    return ClassifierWeights(high, low, "wheel1")


@dataclass(frozen=True)
class AggregationContext:
    rule: int
    weights: ClassifierWeights | None = None
    rng_seed: int = 0
    samples_per_decision: int = 1

    def __post_init__(self):
        if self.rule not in RULES:
            raise ConfigError(f"aggregation rule must be one of {RULES}, got {self.rule!r}")
        if self.rule in WEIGHTED_RULES and self.weights is None:
            raise ConfigError(f"aggregation rule {self.rule} needs classifier weights")
        if self.samples_per_decision < 1:
            raise ConfigError("samples_per_decision must be >= 1")
        if self.rng_seed < 0 or self.rng_seed >= 2**64:
            raise ConfigError("rng_seed must be a 64-bit unsigned integer")


def protein_rngs(seed: int, count: int) -> list[np.random.Generator]:
    children = np.random.SeedSequence(seed).spawn(count)
    return [np.random.Generator(np.random.Philox(child)) for child in children]


def _draws(rng: np.random.Generator, count: int, per_decision: int) -> np.ndarray:
    return rng.random((count, per_decision)).mean(axis=1)


def aggregate_residue(vote, svm_class: str, ctx: AggregationContext, rng: np.random.Generator,
                      fknn_class: str | None = None) -> str:
    """Final class for one residue.

    ``fknn_class`` replaces the top fuzzy decision; rule 5 uses it to feed in
    the filtered stream.
    """
    decisions = vote.decisions
    top = fknn_class if fknn_class is not None else decisions[0]
    if top == svm_class:
        return top
    rule = ctx.rule
    if rule == 1:
        return decisions[1]
    if rule == 3:
        return decisions[-1]
    r = _draws(rng, 1, ctx.samples_per_decision)[0]
    pick_fknn = r <= ctx.weights.omega_fknn
    if rule in (2, 5):
        return top if pick_fknn else svm_class
    return decisions[1] if pick_fknn else decisions[-1]


def decision_order(memberships: np.ndarray) -> np.ndarray:
    """Class indices by descending membership, ties to the earlier class."""
    return np.argsort(-np.asarray(memberships), axis=1, kind="stable")


def _as_memberships(votes, classes) -> np.ndarray:
    if isinstance(votes, np.ndarray):
        return votes
    return np.array([[v.memberships[c] for c in classes] for v in votes]).reshape(-1, len(classes))


def _to_index(structure, classes) -> np.ndarray:
    if isinstance(structure, np.ndarray):
        return structure
    lookup = {c: i for i, c in enumerate(classes)}
    return np.array([lookup[c] for c in structure], dtype=np.int64)


def _to_string(idx, classes) -> str:
    return "".join(classes[i] for i in idx)


def aggregate_protein(memberships, svm, ctx: AggregationContext, rng: np.random.Generator,
                      rules: FilterRuleSet = FilterRuleSet(), final_filter: bool = True,
                      classes: Sequence[str] = CLASSES, stream_filter: bool = True) -> str:
    """Aggregate one protein's residue streams into a structure string.

    ``stream_filter=False`` turns off rule 5's pre-filtering of the two
    classifier streams, which reduces it to rule 2.
    """
    u = _as_memberships(memberships, classes)
    svm = _to_index(svm, classes)
    if u.shape[0] != svm.shape[0]:
        raise ValueError(f"vote stream length {u.shape[0]} != SVM stream length {svm.shape[0]}")
    order = decision_order(u)
    top, second, last = order[:, 0], order[:, 1], order[:, -1]
    if ctx.rule == 5 and stream_filter:
        top = _to_index(filter_structure(_to_string(top, classes), rules), classes)
        svm = _to_index(filter_structure(_to_string(svm, classes), rules), classes)
    out = top.copy()
    dis = np.flatnonzero(top != svm)
    if dis.size:
        if ctx.rule == 1:
            out[dis] = second[dis]
        elif ctx.rule == 3:
            out[dis] = last[dis]
        else:
            pick = _draws(rng, dis.size, ctx.samples_per_decision) <= ctx.weights.omega_fknn
            if ctx.rule in (2, 5):
                out[dis] = np.where(pick, top[dis], svm[dis])
            else:
                out[dis] = np.where(pick, second[dis], last[dis])
    s = _to_string(out, classes)
    return filter_structure(s, rules) if final_filter else s


def aggregate_run(fknn_votes, svm_classes, ctx: AggregationContext,
                  rules: FilterRuleSet = FilterRuleSet(), final_filter: bool = True,
                  classes: Sequence[str] = CLASSES, stream_filter: bool = True) -> list[str]:
    """Aggregate every protein; one output string per protein."""
    if len(fknn_votes) != len(svm_classes):
        raise ValueError("vote and SVM streams cover different numbers of proteins")
    rngs = protein_rngs(ctx.rng_seed, len(fknn_votes))
    return [
        aggregate_protein(v, s, ctx, rng, rules, final_filter, classes, stream_filter)
        for v, s, rng in zip(fknn_votes, svm_classes, rngs)
    ]


def breakpoint_grid(step: float = 0.1, start: float | None = None, stop: float | None = None) -> list[float]:
    """Breakpoints ``start, start+step, ... <= stop``; default is the open grid on (0, 1)."""
    if not step > 0:
        raise ConfigError("breakpoint step must be positive")
    if start is None:
        start = step
    if stop is None:
        stop = 1.0 - step
    if not 0.0 <= start <= stop <= 1.0:
        raise ConfigError(f"breakpoint range {start}:{stop} outside [0, 1]")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + t * step, 10) for t in range(count)]


def parse_sweep(spec: str) -> list[float]:
    """Parse ``start:stop:step`` (or a bare ``step``)."""
    parts = spec.split(":")
    try:
        values = [float(p) for p in parts]
    except ValueError:
        raise ConfigError(f"bad breakpoint sweep {spec!r}; expected start:stop:step") from None
    if len(values) == 1:
        return breakpoint_grid(values[0])
    if len(values) != 3:
        raise ConfigError(f"bad breakpoint sweep {spec!r}; expected start:stop:step")
    start, stop, step = values
    return breakpoint_grid(step, start, stop)


def _sweep_seed(seed: int, draw: int) -> int:
    return int(np.random.SeedSequence([seed, draw]).generate_state(1, np.uint64)[0])


def wheel2_sweep(fknn_votes, svm_classes, truths: Sequence[str], breakpoints: Sequence[float],
                 draws: int = 1, seed: int = 0, rule: int = 2,
                 rules: FilterRuleSet = FilterRuleSet(), final_filter: bool = True,
                 classes: Sequence[str] = CLASSES, stream_filter: bool = True) -> list[tuple[float, float]]:
    """Accuracy (percent) per breakpoint, averaged over ``draws`` seeded passes."""
    if not breakpoints:
        raise ConfigError("breakpoint list is empty")
    if draws < 1:
        raise ConfigError("draws must be >= 1")
    if rule not in WEIGHTED_RULES:
        raise ConfigError(f"breakpoint sweep needs a weighted rule {sorted(WEIGHTED_RULES)}")
    total = sum(len(t) for t in truths)
    if total == 0:
        raise ValueError("no residues to evaluate")
    curve = []
    for b in breakpoints:
        weights = ClassifierWeights.from_breakpoint(b)
        accs = []
        for d in range(draws):
            ctx = AggregationContext(rule, weights, _sweep_seed(seed, d))
            preds = aggregate_run(fknn_votes, svm_classes, ctx, rules, final_filter, classes, stream_filter)
            hits = sum(sum(a == b_ for a, b_ in zip(p, t)) for p, t in zip(preds, truths))
            accs.append(100.0 * hits / total)
        curve.append((b, float(np.mean(accs))))
    return curve
