"""Rewrite rules that remove implausible motifs from predicted structures."""

from __future__ import annotations

from dataclasses import dataclass

from .ingest import CLASSES

DEFAULT_RULES = (
    ("EHE", "EEE"),
    ("HEH", "HHH"),
    ("HCH", "HHH"),
    ("ECE", "EEE"),
    ("HEEH", "HHHH"),
)


@dataclass(frozen=True)
class FilterRuleSet:
    """Ordered ``(pattern, replacement)`` pairs of equal length."""

    rules: tuple = DEFAULT_RULES

    def __post_init__(self):
        rules = tuple(tuple(r) for r in self.rules)
        for pattern, repl in rules:
            if not pattern or len(pattern) != len(repl):
                raise ValueError(f"rule {pattern!r} -> {repl!r}: lengths must match and be non-zero")
        object.__setattr__(self, "rules", rules)

    @classmethod
    def none(cls) -> "FilterRuleSet":
        return cls(())


def _scan(chars: list, rules) -> bool:
    # one left-to-right pass; at each position the first matching rule wins
    changed = False
    size = len(chars)
    pos = 0
    while pos < size:
        for pattern, repl in rules:
            end = pos + len(pattern)
            if end <= size and "".join(chars[pos:end]) == pattern:
                chars[pos:end] = repl
                changed = True
                break
        pos += 1
    return changed


def filter_structure(structure: str, rules: FilterRuleSet = FilterRuleSet(), max_passes: int | None = None) -> str:
    """Apply ``rules`` in repeated passes until none of the patterns occurs."""
    for pos, ch in enumerate(structure):
        if ch not in CLASSES:
            raise ValueError(f"illegal structure state {ch!r} at position {pos}")
    if not rules.rules:
        return structure
    chars = list(structure)
    limit = max_passes if max_passes is not None else len(chars) + 1
    for _ in range(limit):
        if not _scan(chars, rules.rules):
            return "".join(chars)
    raise RuntimeError(f"filter did not reach a fixpoint within {limit} passes")


def has_forbidden(structure: str, rules: FilterRuleSet = FilterRuleSet()) -> bool:
    return any(pattern in structure for pattern, _ in rules.rules)
