"""Protein records, dataset parsing and 8-to-3 state label reduction.

Two on-disk formats are understood:

``paired``
    The native format. UTF-8 text, one record per three lines::

        >id
        SEQUENCE
        STRUCTURE

    Blank lines between records are ignored.

``fasta``
    Ordinary FASTA for the sequences (wrapped lines allowed). Structures
    live in a sibling FASTA file with the same ids, by default named
    ``<stem>.ss<suffix>`` next to the sequence file (``rs126.fasta`` ->
    ``rs126.ss.fasta``). If no structure file exists the records are
    unlabeled, which is what ``mcpss predict`` consumes.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .errors import ParseError

AMINO_ACIDS = "ACDEFGHIKLMNPQRSTVWY"
UNKNOWN = "X"
# ambiguous/non-standard residue codes folded into the single placeholder
UNKNOWN_ALIASES = frozenset("BZUX")
CLASSES = ("H", "E", "C")

EIGHT_STATE_MAP = {
    "H": "H", "G": "H", "I": "H",
    "E": "E", "B": "E",
    "T": "C", "S": "C", "C": "C", "-": "C",
}

_RESIDUES = frozenset(AMINO_ACIDS) | {UNKNOWN}


def normalize_sequence(sequence: str, record_id: str | None = None) -> str:
    """Upper-case ``sequence`` and fold B/Z/U into X.

    Raises ParseError on any character outside the 20 amino acids and the
    unknown aliases.
    """
    out = []
    for pos, ch in enumerate(sequence.upper()):
        if ch in UNKNOWN_ALIASES:
            out.append(UNKNOWN)
        elif ch in _RESIDUES:
            out.append(ch)
        else:
            raise ParseError(f"illegal residue {ch!r}", record_id, pos)
    return "".join(out)


def reduce_labels(raw: str, record_id: str | None = None) -> str:
    """Map 8-state DSSP labels onto H/E/C (H,G,I -> H; E,B -> E; rest -> C)."""
    out = []
    for pos, ch in enumerate(raw):
        try:
            out.append(EIGHT_STATE_MAP[ch])
        except KeyError:
            raise ParseError(f"unknown structure state {ch!r}", record_id, pos) from None
    return "".join(out)


@dataclass(frozen=True)
class ProteinRecord:
    """A named amino-acid sequence with optional per-residue H/E/C labels."""

    id: str
    sequence: str
    structure: str | None = None

    def __post_init__(self):
        if not self.id:
            raise ParseError("empty record id")
        for pos, ch in enumerate(self.sequence):
            if ch not in _RESIDUES:
                raise ParseError(f"illegal residue {ch!r}", self.id, pos)
        if self.structure is not None:
            if len(self.structure) != len(self.sequence):
                raise ParseError(
                    f"sequence length {len(self.sequence)} != structure length "
                    f"{len(self.structure)}",
                    self.id,
                )
            for pos, ch in enumerate(self.structure):
                if ch not in CLASSES:
                    raise ParseError(f"illegal structure state {ch!r}", self.id, pos)

    def __len__(self):
        return len(self.sequence)

    @property
    def labeled(self) -> bool:
        return self.structure is not None


@dataclass(frozen=True)
class Dataset:
    records: tuple[ProteinRecord, ...]
    name: str = "dataset"
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        records = tuple(self.records)
        object.__setattr__(self, "records", records)
        seen = {}
        for i, rec in enumerate(records):
            if rec.id in seen:
                raise ParseError("duplicate record id", rec.id)
            seen[rec.id] = i
        object.__setattr__(self, "_index", seen)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __getitem__(self, key):
        if isinstance(key, str):
            return self.records[self._index[key]]
        return self.records[key]

    @property
    def residue_count(self) -> int:
        return sum(len(r) for r in self.records)

    @property
    def ids(self) -> list[str]:
        return [r.id for r in self.records]

    @property
    def labeled(self) -> bool:
        return all(r.labeled for r in self.records)

    def subset(self, indices: Iterable[int], name: str | None = None) -> "Dataset":
        return Dataset(tuple(self.records[i] for i in indices), name or self.name)

    def class_proportions(self, classes: Sequence[str] = CLASSES) -> dict[str, float]:
        counts = Counter()
        for rec in self.records:
            if rec.structure is None:
                raise ValueError(f"record {rec.id!r} has no structure labels")
            counts.update(rec.structure)
        total = sum(counts[c] for c in classes)
        if total == 0:
            raise ValueError("dataset has no residues")
        return {c: counts[c] / total for c in classes}


def _read_lines(path: Path) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        return [line.rstrip("\r\n") for line in fh]


def _parse_paired(lines: list[str], eight_state: bool) -> list[ProteinRecord]:
    lines = [(n, ln.strip()) for n, ln in enumerate(lines, 1) if ln.strip()]
    if len(lines) % 3:
        raise ParseError(f"paired format expects 3 lines per record, got {len(lines)} lines")
    records = []
    for k in range(0, len(lines), 3):
        (n_id, id_line), (_, seq), (_, ss) = lines[k:k + 3]
        if not id_line.startswith(">"):
            raise ParseError(f"line {n_id}: expected '>id', got {id_line[:20]!r}")
        rid = id_line[1:].split()[0] if id_line[1:].split() else ""
        seq = normalize_sequence(seq, rid)
        if eight_state:
            ss = reduce_labels(ss, rid)
        records.append(ProteinRecord(rid, seq, ss))
    return records


def _parse_fasta_blocks(lines: list[str]) -> list[tuple[str, str]]:
    blocks = []
    rid, chunks = None, []
    for n, line in enumerate(lines, 1):
        line = line.strip()
        if not line or line.startswith(";"):
            continue
        if line.startswith(">"):
            if rid is not None:
                blocks.append((rid, "".join(chunks)))
            header = line[1:].split()
            if not header:
                raise ParseError(f"line {n}: empty FASTA header")
            rid, chunks = header[0], []
        else:
            if rid is None:
                raise ParseError(f"line {n}: sequence data before first header")
            chunks.append(line)
    if rid is not None:
        blocks.append((rid, "".join(chunks)))
    return blocks


def structure_sibling(path: Path) -> Path:
    path = Path(path)
    return path.with_name(f"{path.stem}.ss{path.suffix}")


def parse_dataset(
    path,
    format: str = "paired",
    *,
    structure_path=None,
    eight_state: bool = False,
    name: str | None = None,
) -> Dataset:
    """Read a dataset file into a validated :class:`Dataset`.

    ``eight_state`` runs the structure strings through :func:`reduce_labels`
    before validation, for files that still carry DSSP's 8 states.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"dataset file not found: {path}")
    name = name or path.stem
    if format == "paired":
        records = _parse_paired(_read_lines(path), eight_state)
    elif format == "fasta":
        seqs = _parse_fasta_blocks(_read_lines(path))
        ss_path = Path(structure_path) if structure_path else structure_sibling(path)
        structures = {}
        if ss_path.is_file():
            structures = dict(_parse_fasta_blocks(_read_lines(ss_path)))
        elif structure_path is not None:
            raise FileNotFoundError(f"structure file not found: {ss_path}")
        records = []
        for rid, seq in seqs:
            ss = structures.get(rid)
            if structures and ss is None:
                raise ParseError("no structure entry for record", rid)
            if ss is not None and eight_state:
                ss = reduce_labels(ss, rid)
            records.append(ProteinRecord(rid, normalize_sequence(seq, rid), ss))
    else:
        raise ValueError(f"unknown dataset format {format!r}")
    return Dataset(tuple(records), name)


def format_paired(dataset: Dataset) -> str:
    out = []
    for rec in dataset:
        if rec.structure is None:
            raise ValueError(f"record {rec.id!r} has no structure; paired format needs one")
        out.extend((f">{rec.id}", rec.sequence, rec.structure))
    return "\n".join(out) + "\n"


def write_dataset(dataset: Dataset, path, format: str = "paired") -> None:
    """Serialize ``dataset``; ``fasta`` also writes the structure sibling when labeled."""
    path = Path(path)
    if format == "paired":
        path.write_text(format_paired(dataset), encoding="utf-8")
    elif format == "fasta":
        path.write_text("".join(f">{r.id}\n{r.sequence}\n" for r in dataset), encoding="utf-8")
        if dataset.labeled:
            structure_sibling(path).write_text(
                "".join(f">{r.id}\n{r.structure}\n" for r in dataset), encoding="utf-8"
            )
    else:
        raise ValueError(f"unknown dataset format {format!r}")
