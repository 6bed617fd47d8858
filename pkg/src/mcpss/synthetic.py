"""A generated corpus whose labels are a fixed function of a width-5 window.

Sequences are built from segments; each segment draws residues from one
group of amino acids, with occasional substitutions by any residue. The
label of a residue is then recomputed from its own width-5 neighbourhood
(not from the segment it came from), so the mapping from window to label
is exact and any classifier that sees the window can in principle learn it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ingest import AMINO_ACIDS, CLASSES, Dataset, ProteinRecord

GROUPS = {"H": "ALEKMQ", "E": "VIYFWT", "C": "GPNDS"}
_GROUP_OF = {aa: cls for cls, letters in GROUPS.items() for aa in letters}


@dataclass(frozen=True)
class CorpusSpec:
    proteins: int = 60
    min_length: int = 50
    max_length: int = 120
    min_segment: int = 60
    max_segment: int = 120
    mutation_rate: float = 0.05
    label_width: int = 5


def window_label(sequence: str, position: int, width: int = 5) -> str:
    """Majority residue group within ``width`` of ``position``.

    Ties go to the centre residue's group when it is tied, otherwise to the
    earliest tied class in H, E, C order. Residues in no group do not vote.
    """
    half = width // 2
    lo, hi = max(0, position - half), min(len(sequence), position + half + 1)
    counts = {c: 0 for c in CLASSES}
    for aa in sequence[lo:hi]:
        if aa in _GROUP_OF:
            counts[_GROUP_OF[aa]] += 1
    best = max(counts.values())
    tied = [c for c in CLASSES if counts[c] == best]
    centre = _GROUP_OF.get(sequence[position])
    if centre in tied:
        return centre
    return tied[0]


def label_sequence(sequence: str, width: int = 5) -> str:
    return "".join(window_label(sequence, i, width) for i in range(len(sequence)))


def _sequence(rng: np.random.Generator, length: int, spec: CorpusSpec) -> str:
    out = []
    prev = None
    while len(out) < length:
        cls = rng.choice([c for c in CLASSES if c != prev])
        prev = cls
        size = int(rng.integers(spec.min_segment, spec.max_segment + 1))
        letters = GROUPS[cls]
        for _ in range(size):
            if rng.random() < spec.mutation_rate:
                out.append(AMINO_ACIDS[int(rng.integers(len(AMINO_ACIDS)))])
            else:
                out.append(letters[int(rng.integers(len(letters)))])
    return "".join(out[:length])


def synthetic_corpus(seed: int = 0, spec: CorpusSpec = CorpusSpec(), name: str = "synthetic") -> Dataset:
    rng = np.random.Generator(np.random.Philox(seed))
    records = []
    for t in range(spec.proteins):
        length = int(rng.integers(spec.min_length, spec.max_length + 1))
        seq = _sequence(rng, length, spec)
        records.append(ProteinRecord(f"syn{t:03d}", seq, label_sequence(seq, spec.label_width)))
    return Dataset(tuple(records), name)
