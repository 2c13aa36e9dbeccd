"""Sequence file ingestion.

Files are UTF-8 token streams: tokens separated by whitespace (or one per
line), with ``#``-prefixed comment lines ignored.  Consecutive repeats of the
same symbol can be collapsed to a single occurrence so that the chain models
transitions between distinct actions only.  Multiple files are collapsed
individually and then concatenated; the transition across each file boundary
is included by default, with the boundary positions reported so callers can
exclude those transitions instead.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import groupby
from pathlib import Path

import numpy as np

from .markov import Alphabet, Sequence

__all__ = [
    "SequenceFileError",
    "SequenceFile",
    "collapse_repeats",
    "tokens_from_text",
    "read_tokens",
    "ingest",
    "ingest_many",
]


class SequenceFileError(ValueError):
    """A sequence file is missing, empty, malformed, or off-alphabet."""


@dataclass(frozen=True)
class SequenceFile:
    """One input file plus its parsing options."""

    path: str
    format: str = "tokens"
    declared_alphabet: tuple[str, ...] | None = None
    collapse_repeats: bool = False

    def __post_init__(self) -> None:
        if self.format not in ("tokens", "lines"):
            raise SequenceFileError(f"unknown format {self.format!r}")


def collapse_repeats(tokens: list[str]) -> list[str]:
    """Merge runs of consecutive identical symbols into one occurrence."""
    return [tok for tok, _ in groupby(tokens)]


def tokens_from_text(text: str) -> list[str]:
    """Tokenize inline text: whitespace-separated, or per-character when the
    text is a single unbroken run (convenient for compact digit strings)."""
    parts = text.split()
    if len(parts) == 1 and len(parts[0]) > 1:
        return list(parts[0])
    return parts


def read_tokens(path: str, fmt: str = "tokens") -> list[str]:
    p = Path(path)
    try:
        raw = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise SequenceFileError(f"cannot read {path}: {exc}") from exc
    tokens: list[str] = []
    for line in raw.splitlines():
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if fmt == "lines":
            tokens.append(stripped)
        else:
            tokens.extend(stripped.split())
    if not tokens:
        raise SequenceFileError(f"empty file: {path}")
    return tokens


def _check_alphabet(tokens: list[str], declared: tuple[str, ...], path: str) -> None:
    allowed = set(declared)
    offenders = sorted({t for t in tokens if t not in allowed})
    if offenders:
        raise SequenceFileError(
            f"{path}: tokens outside declared alphabet: {', '.join(offenders)}"
        )


def ingest(sf: SequenceFile) -> Sequence:
    """Read one file into a Sequence.

    The alphabet is the declared one when present (every token must belong to
    it), otherwise the sorted distinct tokens.  With collapse_repeats the
    merged sequence must still contain at least 2 symbols.
    """
    tokens = read_tokens(sf.path, sf.format)
    if sf.declared_alphabet is not None:
        _check_alphabet(tokens, sf.declared_alphabet, sf.path)
        alphabet = Alphabet(sf.declared_alphabet)
    else:
        alphabet = Alphabet.from_tokens(tokens)
    if sf.collapse_repeats:
        tokens = collapse_repeats(tokens)
        if len(tokens) < 2:
            raise SequenceFileError(
                f"{sf.path}: fewer than 2 symbols remain after collapsing repeats"
            )
    return Sequence.from_tokens(tokens, alphabet)


def ingest_many(files: list[SequenceFile]) -> tuple[Sequence, list[int]]:
    """Concatenate several files into one Sequence over a shared alphabet.

    Each file is collapsed individually (per its own flag) before
    concatenation, so a repeat spanning a boundary is preserved.  Returns the
    sequence plus the start index of each constituent file within it; callers
    that want to exclude cross-boundary transitions can split there.
    """
    if not files:
        raise SequenceFileError("no input files")
    token_lists = []
    declared = files[0].declared_alphabet
    for sf in files:
        if sf.declared_alphabet != declared:
            raise SequenceFileError("all files must declare the same alphabet")
        tokens = read_tokens(sf.path, sf.format)
        if declared is not None:
            _check_alphabet(tokens, declared, sf.path)
        if sf.collapse_repeats:
            tokens = collapse_repeats(tokens)
        token_lists.append(tokens)
    if declared is not None:
        alphabet = Alphabet(declared)
    else:
        alphabet = Alphabet.from_tokens([t for toks in token_lists for t in toks])
    starts = list(np.cumsum([0] + [len(t) for t in token_lists[:-1]]).astype(int))
    merged = [t for toks in token_lists for t in toks]
    if len(merged) < 2:
        raise SequenceFileError("fewer than 2 symbols in total")
    return Sequence.from_tokens(merged, alphabet), starts
