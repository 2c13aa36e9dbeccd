"""Shared test helpers: sequence builders, brute-force oracles, random matrices."""

from __future__ import annotations

import numpy as np

from entrate import Alphabet, Sequence, TransitionMatrix


def int_seq(values, kappa: int | None = None) -> Sequence:
    """Sequence over the integer alphabet {0..kappa-1}."""
    values = list(values)
    if kappa is None:
        kappa = max(values) + 1
    return Sequence(np.asarray(values, dtype=np.int64), Alphabet.of_size(kappa))


def token_seq(text: str) -> Sequence:
    """Sequence of the characters of ``text`` over their sorted alphabet."""
    return Sequence.from_tokens(list(text))


def naive_novel_length(states, start: int, history_end: int | None = None):
    """Brute-force novelty length: scan L = 1, 2, ... with substring search.

    Independent of the suffix-automaton implementation; the optional
    ``history_end`` checks novelty against a shorter history prefix.
    """
    n = len(states)
    if history_end is None:
        history_end = start
    text = "".join(chr(65 + int(s)) for s in states)
    history = text[:history_end]
    L = 1
    while start + L <= n:
        if text[start : start + L] not in history:
            return L, False
        L += 1
    return (n - start) + 1, True


def random_stochastic(rng: np.random.Generator, k: int, floor: float = 1e-3) -> TransitionMatrix:
    """Random row-stochastic matrix; a positive floor keeps it irreducible."""
    raw = rng.gamma(1.0, 1.0, size=(k, k)) + floor
    return TransitionMatrix.from_probs(raw / raw.sum(axis=1, keepdims=True))
