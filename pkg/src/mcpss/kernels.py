"""Compiled batch versions of the string measures.

Windows are encoded as rows of a ``uint8`` matrix (20 amino acids in
alphabetical order, then X = 20). All functions here are numba-compiled and
reproduce :mod:`mcpss.dissimilarity` exactly; the float conversion happens
once, in :func:`combine`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .dissimilarity import DissimilarityConfig
from .errors import ConfigError
from .ingest import AMINO_ACIDS, UNKNOWN

ALPHABET = AMINO_ACIDS + UNKNOWN
UNKNOWN_CODE = len(AMINO_ACIDS)
MAX_GRAM = 14  # 21**14 < 2**63
_LUT = np.full(256, 255, dtype=np.uint8)
for _code, _ch in enumerate(ALPHABET):
    _LUT[ord(_ch)] = _code


def encode(windows) -> np.ndarray:
    """Encode equal-length residue strings into an ``(N, h)`` uint8 matrix."""
    windows = list(windows)
    if not windows:
        return np.zeros((0, 0), dtype=np.uint8)
    h = len(windows[0])
    raw = np.frombuffer("".join(windows).encode("ascii"), dtype=np.uint8)
    if raw.size != h * len(windows):
        raise ValueError("all windows must have the same length")
    codes = _LUT[raw].reshape(len(windows), h)
    if (codes == 255).any():
        raise ValueError("windows contain characters outside the residue alphabet")
    return codes


@njit(cache=True)
def _parse(buf, size, i, count, ps, pl, alive):
    # Resumable exhaustive-history parse of buf[:size] from fragment start i.
    # (ps, pl) locate the previous fragment; pl == 0 means none yet.
    # Returns (count, start of last fragment, ps/pl before that fragment).
    last, lps, lpl = i, ps, pl
    while i < size:
        last, lps, lpl = i, ps, pl
        limit = i - 1
        na = 0
        for t in range(limit):
            if buf[t] == buf[i]:
                alive[na] = t
                na += 1
        length = 1
        prev_pref = pl >= 1 and buf[ps] == buf[i]
        while True:
            if na == 0 and not (prev_pref and length == pl):
                count += 1
                ps = i
                pl = length
                i += length
                break
            if i + length >= size:
                count += 1
                i = size
                break
            c = buf[i + length]
            length += 1
            nn = 0
            for a in range(na):
                t = alive[a]
                if t + length <= limit and buf[t + length - 1] == c:
                    alive[nn] = t
                    nn += 1
            na = nn
            prev_pref = prev_pref and length <= pl and buf[ps + length - 1] == c
    return count, last, lps, lpl


@njit(cache=True)
def lz_complexity_codes(codes):
    alive = np.empty(codes.shape[0], dtype=np.int64)
    return _parse(codes, codes.shape[0], 0, 0, 0, 0, alive)[0]


@njit(cache=True)
def _window_states(X):
    n, h = X.shape
    out = np.empty((n, 4), dtype=np.int64)
    alive = np.empty(h, dtype=np.int64)
    for r in range(n):
        c, last, ps, pl = _parse(X[r], h, 0, 0, 0, 0, alive)
        out[r, 0] = c
        out[r, 1] = last
        out[r, 2] = ps
        out[r, 3] = pl
    return out


@njit(cache=True)
def _masks(X):
    n, h = X.shape
    out = np.zeros(n, dtype=np.int64)
    for r in range(n):
        m = 0
        for t in range(h):
            m |= 1 << X[r, t]
        out[r] = m
    return out


@njit(cache=True)
def _gram_sets(X, n):
    rows, h = X.shape
    g = h - n + 1
    grams = np.full((rows, g), -1, dtype=np.int64)
    counts = np.zeros(rows, dtype=np.int64)
    tmp = np.empty(g, dtype=np.int64)
    for r in range(rows):
        for s in range(g):
            v = 0
            for t in range(n):
                v = v * 21 + X[r, s + t]
            tmp[s] = v
        srt = np.sort(tmp)
        k = 0
        for s in range(g):
            if s == 0 or srt[s] != srt[s - 1]:
                grams[r, k] = srt[s]
                k += 1
        counts[r] = k
    return grams, counts


@dataclass
class EncodedWindows:
    """Encoded windows plus everything per-window that pair measures reuse."""

    codes: np.ndarray
    states: np.ndarray
    masks: np.ndarray
    grams: np.ndarray
    gram_counts: np.ndarray
    n: int

    def __len__(self):
        return self.codes.shape[0]

    @property
    def complexity(self) -> np.ndarray:
        return self.states[:, 0]


def prepare(windows, n: int) -> EncodedWindows:
    codes = windows if isinstance(windows, np.ndarray) else encode(windows)
    if n > MAX_GRAM:
        raise ConfigError(f"batch kernels support n-gram sizes up to {MAX_GRAM}")
    if codes.shape[0] and n >= codes.shape[1]:
        raise ConfigError(f"n-gram size {n} must be smaller than window size {codes.shape[1]}")
    codes = np.ascontiguousarray(codes, dtype=np.uint8)
    grams, counts = _gram_sets(codes, n)
    return EncodedWindows(codes, _window_states(codes), _masks(codes), grams, counts, n)


@njit(cache=True)
def _popcount(x):
    c = 0
    while x:
        x &= x - 1
        c += 1
    return c


@njit(cache=True)
def _pair(A, sa, ma, ga, na_, B, sb, mb, gb, nb_, i, j, buf, alive, xmask):
    h = A.shape[1]
    hb = B.shape[1]
    for t in range(h):
        buf[t] = A[i, t]
    for t in range(hb):
        buf[h + t] = B[j, t]
    cab = _parse(buf, h + hb, sa[i, 1], sa[i, 0] - 1, sa[i, 2], sa[i, 3], alive)[0]
    for t in range(hb):
        buf[t] = B[j, t]
    for t in range(h):
        buf[hb + t] = A[i, t]
    cba = _parse(buf, h + hb, sb[j, 1], sb[j, 0] - 1, sb[j, 2], sb[j, 3], alive)[0]
    z = max(cab - sa[i, 0], cba - sb[j, 0])
    cm = max(sa[i, 0], sb[j, 0])
    both = ma[i] & mb[j]
    mu = _popcount(both & ~xmask)
    delta = _popcount(ma[i] | mb[j]) - mu
    # sorted distinct gram codes: merge-count the intersection
    a = 0
    b = 0
    g = 0
    while a < na_[i] and b < nb_[j]:
        va = ga[i, a]
        vb = gb[j, b]
        if va == vb:
            g += 1
            a += 1
            b += 1
        elif va < vb:
            a += 1
        else:
            b += 1
    return z, cm, mu, delta, g


@njit(cache=True)
def _components(A, sa, ma, ga, na_, B, sb, mb, gb, nb_, symmetric, out):
    rows = A.shape[0]
    cols = B.shape[0]
    buf = np.empty(A.shape[1] + B.shape[1], dtype=np.uint8)
    alive = np.empty(A.shape[1] + B.shape[1], dtype=np.int64)
    xmask = np.int64(1) << 20
    for i in range(rows):
        j0 = i if symmetric else 0
        for j in range(j0, cols):
            z, cm, mu, delta, g = _pair(A, sa, ma, ga, na_, B, sb, mb, gb, nb_, i, j, buf, alive, xmask)
            out[0, i, j] = z
            out[1, i, j] = cm
            out[2, i, j] = mu
            out[3, i, j] = delta
            out[4, i, j] = g
            if symmetric:
                out[0, j, i] = z
                out[1, j, i] = cm
                out[2, j, i] = mu
                out[3, j, i] = delta
                out[4, j, i] = g


def pair_components(a: EncodedWindows, b: EncodedWindows | None = None) -> np.ndarray:
    """Integer pieces of the compound measure for every pair.

    Returns an ``int16`` array of shape ``(5, len(a), len(b))`` holding
    max zeta, max complexity, shared residues, non-shared residues and shared
    n-grams. With ``b`` omitted the pairs of ``a`` with itself are computed
    once per unordered pair.
    """
    symmetric = b is None
    if symmetric:
        b = a
    elif a.n != b.n:
        raise ValueError("windows were prepared with different n-gram sizes")
    out = np.zeros((5, len(a), len(b)), dtype=np.int16)
    if len(a) and len(b):
        _components(a.codes, a.states, a.masks, a.grams, a.gram_counts,
                    b.codes, b.states, b.masks, b.grams, b.gram_counts,
                    symmetric, out)
    return out


def combine(components: np.ndarray, cfg: DissimilarityConfig) -> np.ndarray:
    """Float compound dissimilarity from :func:`pair_components` output.

    Every intermediate product is an integer well below 2**53, so the single
    division is correctly rounded and equals ``float(Fraction(num, den))``.
    """
    num = components[0].astype(np.float64)
    den = components[1].astype(np.float64)
    if cfg.use_rho:
        shared, other = (3, 2) if cfg.rho_orientation == "rate" else (2, 3)
        num *= components[shared] + 1.0
        den *= components[other] + 1.0
    if cfg.use_ngram:
        den *= components[4] + 1.0
    num /= den
    return num


@njit(cache=True)
def _edit(a, b, row):
    la = a.shape[0]
    lb = b.shape[0]
    for j in range(lb + 1):
        row[j] = j
    for i in range(1, la + 1):
        diag = row[0]
        row[0] = i
        for j in range(1, lb + 1):
            up = row[j]
            cost = 0 if a[i - 1] == b[j - 1] else 1
            best = diag + cost
            if up + 1 < best:
                best = up + 1
            if row[j - 1] + 1 < best:
                best = row[j - 1] + 1
            row[j] = best
            diag = up
    return row[lb]


@njit(cache=True)
def _edit_matrix(A, B, symmetric, out):
    row = np.empty(B.shape[1] + 1, dtype=np.int64)
    for i in range(A.shape[0]):
        j0 = i if symmetric else 0
        for j in range(j0, B.shape[0]):
            d = _edit(A[i], B[j], row)
            out[i, j] = d
            if symmetric:
                out[j, i] = d


def edit_distance_matrix(a: np.ndarray, b: np.ndarray | None = None) -> np.ndarray:
    """Levenshtein distances between encoded rows of ``a`` and ``b``."""
    symmetric = b is None
    if symmetric:
        b = a
    out = np.zeros((a.shape[0], b.shape[0]), dtype=np.int32)
    if a.shape[0] and b.shape[0]:
        _edit_matrix(np.ascontiguousarray(a), np.ascontiguousarray(b), symmetric, out)
    return out
