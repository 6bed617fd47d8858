"""String measures behind the compound dissimilarity.

Everything here works on plain ``str`` and returns exact integers or
:class:`fractions.Fraction`, so symmetry can be checked with ``==``. The
classifiers never call these per pair; they go through the compiled batch
kernels in :mod:`mcpss.kernels`, which are tested against this module.

Exhaustive history parse
------------------------
A fragment starting at ``i`` keeps growing while the candidate text either
equals the previous fragment or occurs somewhere inside ``s[:i-1]`` (the
history minus the character just before ``i``). A candidate that is neither
closes the fragment. The last fragment may be a copy. Every non-final
fragment therefore differs from all fragments before it, and the parse
reproduces the reference decompositions::

    TTCCPSTCIVPSA -> T.TC.C.P.S.TCI.V.PSA
    APAFSVSGG     -> A.P.AF.S.V.SG.G
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import ConfigError
from .ingest import UNKNOWN

DEFAULT_NGRAM = 3
MEASURES = ("lz", "lz+rho", "full")
# "verbatim": multiply by (1+|shared|)/(1+|other|), the fused formula as printed.
# "rate": multiply by the dissimilarity rate (1+|other|)/(1+|shared|) instead.
RHO_ORIENTATIONS = ("verbatim", "rate")


@dataclass(frozen=True)
class ExhaustiveHistory:
    fragments: tuple[str, ...]

    @property
    def complexity(self) -> int:
        return len(self.fragments)

    def __str__(self):
        return ".".join(self.fragments)


@dataclass(frozen=True)
class DissimilarityConfig:
    """Gram size and which factors of the compound measure are active."""

    n: int = DEFAULT_NGRAM
    use_rho: bool = True
    use_ngram: bool = True
    rho_orientation: str = "verbatim"

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 1:
            raise ConfigError(f"n-gram size must be a positive integer, got {self.n!r}")
        if self.rho_orientation not in RHO_ORIENTATIONS:
            raise ConfigError(f"rho orientation must be one of {RHO_ORIENTATIONS}, got {self.rho_orientation!r}")

    def check_window(self, h: int) -> None:
        if self.n >= h:
            raise ConfigError(f"n-gram size {self.n} must be smaller than window size {h}")

    @classmethod
    def from_measure(cls, measure: str, n: int = DEFAULT_NGRAM,
                     rho_orientation: str = "verbatim") -> "DissimilarityConfig":
        if measure == "lz":
            return cls(n, False, False, rho_orientation)
        if measure == "lz+rho":
            return cls(n, True, False, rho_orientation)
        if measure == "full":
            return cls(n, True, True, rho_orientation)
        raise ConfigError(f"unknown measure {measure!r}; expected one of {MEASURES}")

    @property
    def measure(self) -> str:
        if self.use_rho and self.use_ngram:
            return "full"
        if self.use_rho:
            return "lz+rho"
        if not self.use_ngram:
            return "lz"
        return "lz+ngram"


def _require_nonempty(*strings):
    for s in strings:
        if not s:
            raise ValueError("LZ-family measures are undefined on the empty string")


def exhaustive_history(s: str) -> ExhaustiveHistory:
    _require_nonempty(s)
    fragments = []
    prev = None
    i, size = 0, len(s)
    while i < size:
        j = i + 1
        history = s[:max(i - 1, 0)]
        while j <= size and (s[i:j] == prev or s[i:j] in history):
            j += 1
        j = min(j, size)
        prev = s[i:j]
        fragments.append(prev)
        i = j
    return ExhaustiveHistory(tuple(fragments))


def lz_complexity(s: str) -> int:
    return exhaustive_history(s).complexity


def zeta(p: str, q: str) -> int:
    """Complexity gained by appending ``q`` to ``p``: c(pq) - c(p)."""
    _require_nonempty(p, q)
    return lz_complexity(p + q) - lz_complexity(p)


def lz_score(p: str, q: str) -> Fraction:
    _require_nonempty(p, q)
    num = max(zeta(p, q), zeta(q, p))
    return Fraction(num, max(lz_complexity(p), lz_complexity(q)))


def rate_sets(p: str, q: str) -> tuple[frozenset, frozenset]:
    """Shared and non-shared unique residues of ``p`` and ``q``.

    X is never counted as shared, even when both strings contain it.
    """
    a, b = set(p), set(q)
    shared = (a & b) - {UNKNOWN}
    return frozenset(shared), frozenset((a | b) - shared)


def dissimilarity_rate(p: str, q: str) -> Fraction:
    _require_nonempty(p, q)
    shared, other = rate_sets(p, q)
    return Fraction(1 + len(other), 1 + len(shared))


def ngram_patterns(s: str, n: int) -> list[str]:
    if not 1 <= n <= len(s):
        raise ValueError(f"n-gram size {n} out of range for string of length {len(s)}")
    return [s[i:i + n] for i in range(len(s) - n + 1)]


def ngram_score(p: str, q: str, n: int) -> int:
    """Number of distinct n-grams of ``p`` that also occur in ``q``."""
    return len(set(ngram_patterns(p, n)) & set(ngram_patterns(q, n)))


def compound_dissimilarity(p: str, q: str, cfg: DissimilarityConfig = DissimilarityConfig()) -> Fraction:
    """Fused LZ / residue-set / n-gram dissimilarity.

    ``max(zeta) * (1 + |shared|) / (max(c) * (1 + |other|) * (1 + |grams|))``
    with each optional factor replaced by 1 when switched off in ``cfg``.
    ``cfg.rho_orientation == "rate"`` swaps the two residue-set factors.
    """
    _require_nonempty(p, q)
    if cfg.use_ngram and cfg.n >= min(len(p), len(q)):
        raise ConfigError(f"n-gram size {cfg.n} must be smaller than both string lengths")
    num = max(zeta(p, q), zeta(q, p))
    den = max(lz_complexity(p), lz_complexity(q))
    if cfg.use_rho:
        shared, other = rate_sets(p, q)
        if cfg.rho_orientation == "rate":
            shared, other = other, shared
        num *= 1 + len(shared)
        den *= 1 + len(other)
    if cfg.use_ngram:
        den *= 1 + ngram_score(p, q, cfg.n)
    return Fraction(num, den)


def edit_distance(x: str, y: str) -> int:
    """Levenshtein distance with unit insertion, deletion and substitution costs."""
    if len(x) < len(y):
        x, y = y, x
    prev = list(range(len(y) + 1))
    for i, cx in enumerate(x, 1):
        cur = [i]
        for j, cy in enumerate(y, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (cx != cy)))
        prev = cur
    return prev[-1]
