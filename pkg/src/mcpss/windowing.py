"""Fixed-length residue windows centred on each target residue."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .errors import ConfigError
from .ingest import UNKNOWN, Dataset, ProteinRecord

DEFAULT_WINDOW = 17
MIN_WINDOW = 5


@dataclass(frozen=True)
class WindowSample:
    window: str
    center_label: str | None
    protein_id: str
    position: int

    @property
    def center(self) -> str:
        return self.window[len(self.window) // 2]


def check_window_size(h: int) -> int:
    if not isinstance(h, int) or isinstance(h, bool):
        raise ConfigError(f"window size must be an integer, got {h!r}")
    if h < MIN_WINDOW or h % 2 == 0:
        raise ConfigError(f"window size must be odd and >= {MIN_WINDOW}, got {h}")
    return h


def make_windows(record: ProteinRecord, h: int = DEFAULT_WINDOW) -> list[WindowSample]:
    """One window per residue; residues near the ends are padded with X."""
    check_window_size(h)
    half = (h - 1) // 2
    pad = UNKNOWN * half
    padded = pad + record.sequence + pad
    labels = record.structure
    return [
        WindowSample(
            padded[r:r + h],
            labels[r] if labels is not None else None,
            record.id,
            r,
        )
        for r in range(len(record))
    ]


def dataset_windows(records: Dataset | Iterable[ProteinRecord], h: int = DEFAULT_WINDOW) -> list[WindowSample]:
    out = []
    for rec in records:
        out.extend(make_windows(rec, h))
    return out
