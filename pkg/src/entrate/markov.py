"""Core types for finite-alphabet symbol sequences and Markov transition estimation.

Provides alphabets (including composite alphabets of overlapping m-tuples used
to reduce an mth-order chain to a first-order chain), observed sequences as
integer state indices, transition counting, maximum-likelihood transition
matrices, and irreducibility checking.

All types are immutable after construction and all operations are pure
functions, so everything here is safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence as TypingSequence

import numpy as np

__all__ = [
    "DENSE_STATE_LIMIT",
    "Alphabet",
    "CompositeAlphabet",
    "Sequence",
    "TransitionCounts",
    "TransitionMatrix",
    "ProbabilityVector",
    "ReducibleMatrixError",
    "count_transitions",
    "embed_order",
    "mle_transition_matrix",
    "is_irreducible",
]

# Above this many states, transition counts are kept as a map-of-maps instead
# of a dense table.
DENSE_STATE_LIMIT = 4096

_SUM_TOL = 1e-12


class ReducibleMatrixError(ValueError):
    """Raised when an operation requires an irreducible transition matrix."""


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class Alphabet:
    """Ordered finite set of distinct symbol labels."""

    symbols: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "symbols", tuple(str(s) for s in self.symbols))
        if len(self.symbols) < 1:
            raise ValueError("alphabet must contain at least one symbol")
        if len(set(self.symbols)) != len(self.symbols):
            raise ValueError("alphabet symbols must be pairwise distinct")

    @property
    def kappa(self) -> int:
        return len(self.symbols)

    @classmethod
    def of_size(cls, kappa: int) -> "Alphabet":
        """Alphabet with labels "0", "1", ..., str(kappa - 1)."""
        return cls(tuple(str(i) for i in range(kappa)))

    @classmethod
    def from_tokens(cls, tokens: Iterable[str]) -> "Alphabet":
        """Alphabet of the sorted distinct tokens."""
        return cls(tuple(sorted(set(tokens))))

    def index(self, symbol: str) -> int:
        return self._lookup()[symbol]

    def label(self, state: int) -> str:
        return self.symbols[state]

    def _lookup(self) -> dict[str, int]:
        cached = self.__dict__.get("_lookup_cache")
        if cached is None:
            cached = {s: i for i, s in enumerate(self.symbols)}
            object.__setattr__(self, "_lookup_cache", cached)
        return cached


@dataclass(frozen=True, eq=False)
class CompositeAlphabet:
    """States of the first-order chain on overlapping m-tuples of a base alphabet.

    A tuple of base states ``(x_t, ..., x_{t+m-1})`` (oldest first) is encoded
    as ``sum(x_{t+k} * kappa**k for k in range(m))``: the newest symbol is the
    most significant base-kappa digit.  The encoding is a bijection between
    tuples and indices in ``[0, kappa**m)``.
    """

    base: Alphabet
    order: int

    def __post_init__(self) -> None:
        if self.order < 1:
            raise ValueError("composite order must be >= 1")
        if self.base.kappa ** self.order > 2**62:
            raise ValueError("kappa**order too large to index")

    @property
    def kappa(self) -> int:
        return self.base.kappa ** self.order

    def encode(self, window: TypingSequence[int]) -> int:
        """Composite index of a window of base states, oldest first."""
        if len(window) != self.order:
            raise ValueError(f"window must have length {self.order}")
        k = self.base.kappa
        idx = 0
        for pos, state in enumerate(window):
            if not 0 <= state < k:
                raise ValueError(f"base state {state} out of range")
            idx += state * k**pos
        return idx

    def decode(self, index: int) -> tuple[int, ...]:
        """Window of base states (oldest first) for a composite index."""
        if not 0 <= index < self.kappa:
            raise ValueError(f"composite index {index} out of range")
        k = self.base.kappa
        out = []
        for _ in range(self.order):
            out.append(index % k)
            index //= k
        return tuple(out)

    def label(self, state: int) -> str:
        return "|".join(self.base.label(s) for s in self.decode(state))

    def legal_successor(self, i: int, j: int) -> bool:
        """True when tuple j can follow tuple i in one step of the base chain.

        Requires the last m-1 base symbols of i to equal the first m-1 of j.
        """
        return self.decode(i)[1:] == self.decode(j)[:-1]


@dataclass(frozen=True, eq=False)
class Sequence:
    """An observed realization x_0 ... x_T as integer state indices."""

    states: np.ndarray
    alphabet: Alphabet | CompositeAlphabet

    def __post_init__(self) -> None:
        states = np.ascontiguousarray(self.states, dtype=np.int64)
        if states.ndim != 1 or states.size < 1:
            raise ValueError("sequence must be a nonempty 1-d array of states")
        if states.min() < 0 or states.max() >= self.alphabet.kappa:
            raise ValueError("state index out of range for alphabet")
        object.__setattr__(self, "states", _freeze(states))

    @property
    def length(self) -> int:
        return int(self.states.size)

    def __len__(self) -> int:
        return self.length

    @classmethod
    def from_tokens(
        cls, tokens: TypingSequence[str], alphabet: Alphabet | None = None
    ) -> "Sequence":
        if alphabet is None:
            alphabet = Alphabet.from_tokens(tokens)
        idx = [alphabet.index(t) for t in tokens]
        return cls(np.asarray(idx, dtype=np.int64), alphabet)

    def tokens(self) -> list[str]:
        return [self.alphabet.label(int(s)) for s in self.states]

    def prefix(self, n: int) -> "Sequence":
        """First n observations, sharing the same alphabet."""
        if not 1 <= n <= self.length:
            raise ValueError("prefix length out of range")
        return Sequence(self.states[:n], self.alphabet)


@dataclass(frozen=True, eq=False)
class TransitionCounts:
    """Table n_ij of observed one-step transition counts.

    Dense ndarray storage up to DENSE_STATE_LIMIT states; a map-of-maps
    ``{i: {j: n_ij}}`` above that.
    """

    kappa: int
    dense: np.ndarray | None
    sparse: dict[int, dict[int, int]] | None
    alphabet: Alphabet | CompositeAlphabet | None = None
    row_totals_arr: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        if (self.dense is None) == (self.sparse is None):
            raise ValueError("exactly one of dense/sparse storage required")
        if self.dense is not None:
            dense = np.ascontiguousarray(self.dense, dtype=np.int64)
            if dense.shape != (self.kappa, self.kappa):
                raise ValueError("counts table must be kappa x kappa")
            if dense.min() < 0:
                raise ValueError("counts must be nonnegative")
            object.__setattr__(self, "dense", _freeze(dense))
            totals = dense.sum(axis=1)
        else:
            totals = np.zeros(self.kappa, dtype=np.int64)
            for i, row in self.sparse.items():
                totals[i] = sum(row.values())
        object.__setattr__(self, "row_totals_arr", _freeze(totals))

    @property
    def is_dense(self) -> bool:
        return self.dense is not None

    @property
    def grand_total(self) -> int:
        return int(self.row_totals_arr.sum())

    def row_total(self, i: int) -> int:
        return int(self.row_totals_arr[i])

    def row_items(self, i: int) -> Iterator[tuple[int, int]]:
        """Nonzero (j, n_ij) entries of row i."""
        if self.dense is not None:
            (js,) = np.nonzero(self.dense[i])
            for j in js:
                yield int(j), int(self.dense[i, j])
        else:
            yield from sorted(self.sparse.get(i, {}).items())

    def get(self, i: int, j: int) -> int:
        if self.dense is not None:
            return int(self.dense[i, j])
        return self.sparse.get(i, {}).get(j, 0)

    def to_dense(self) -> np.ndarray:
        if self.dense is not None:
            return self.dense
        raise ValueError(
            f"counts over {self.kappa} states are stored sparsely; "
            f"dense operations support at most {DENSE_STATE_LIMIT} states"
        )


@dataclass(frozen=True, eq=False)
class TransitionMatrix:
    """Row-stochastic matrix of estimated or exact transition probabilities.

    Rows never observed as a transition source carry no probability estimate:
    they are all-zero and flagged False in ``defined_rows`` rather than being
    silently imputed.
    """

    probs: np.ndarray
    defined_rows: np.ndarray

    def __post_init__(self) -> None:
        probs = np.ascontiguousarray(self.probs, dtype=np.float64)
        if probs.ndim != 2 or probs.shape[0] != probs.shape[1]:
            raise ValueError("transition matrix must be square")
        defined = np.ascontiguousarray(self.defined_rows, dtype=bool)
        if defined.shape != (probs.shape[0],):
            raise ValueError("defined_rows must have one flag per row")
        if probs.min() < -_SUM_TOL or probs.max() > 1 + _SUM_TOL:
            raise ValueError("transition probabilities must lie in [0, 1]")
        probs = np.clip(probs, 0.0, 1.0)
        sums = probs.sum(axis=1)
        if np.any(np.abs(sums[defined] - 1.0) > _SUM_TOL):
            raise ValueError("defined rows must sum to 1 within 1e-12")
        if np.any(sums[~defined] != 0.0):
            raise ValueError("undefined rows must be all-zero")
        object.__setattr__(self, "probs", _freeze(probs))
        object.__setattr__(self, "defined_rows", _freeze(defined))

    @classmethod
    def from_probs(cls, probs: np.ndarray) -> "TransitionMatrix":
        """A fully defined matrix from explicit row distributions."""
        probs = np.asarray(probs, dtype=np.float64)
        return cls(probs, np.ones(probs.shape[0], dtype=bool))

    @property
    def size(self) -> int:
        return int(self.probs.shape[0])

    @property
    def all_rows_defined(self) -> bool:
        return bool(self.defined_rows.all())


@dataclass(frozen=True, eq=False)
class ProbabilityVector:
    """Distribution over states: nonnegative entries summing to 1."""

    probs: np.ndarray

    def __post_init__(self) -> None:
        probs = np.ascontiguousarray(self.probs, dtype=np.float64)
        if probs.ndim != 1 or probs.size < 1:
            raise ValueError("probability vector must be a nonempty 1-d array")
        if probs.min() < -_SUM_TOL:
            raise ValueError("probabilities must be nonnegative")
        total = probs.sum()
        if abs(total - 1.0) > _SUM_TOL:
            raise ValueError("probabilities must sum to 1 within 1e-12")
        probs = np.clip(probs, 0.0, None) / probs.clip(0.0, None).sum()
        object.__setattr__(self, "probs", _freeze(probs))

    @property
    def size(self) -> int:
        return int(self.probs.size)

    def __getitem__(self, i: int) -> float:
        return float(self.probs[i])


def count_transitions(seq: Sequence) -> TransitionCounts:
    """Count one-step transitions: counts[i][j] = #{t : x_{t-1}=i, x_t=j}.

    The grand total equals seq.length - 1.
    """
    if seq.length < 2:
        raise ValueError("no transitions observed: sequence has fewer than 2 symbols")
    kappa = seq.alphabet.kappa
    src = seq.states[:-1]
    dst = seq.states[1:]
    if kappa <= DENSE_STATE_LIMIT:
        flat = np.bincount(src * kappa + dst, minlength=kappa * kappa)
        dense = flat.reshape(kappa, kappa).astype(np.int64)
        return TransitionCounts(kappa=kappa, dense=dense, sparse=None, alphabet=seq.alphabet)
    rows: dict[int, dict[int, int]] = {}
    for i, j in zip(src.tolist(), dst.tolist()):
        row = rows.setdefault(i, {})
        row[j] = row.get(j, 0) + 1
    return TransitionCounts(kappa=kappa, dense=None, sparse=rows, alphabet=seq.alphabet)


def embed_order(seq: Sequence, m: int) -> Sequence:
    """Reduce an mth-order view of ``seq`` to a first-order composite sequence.

    The t-th output state encodes the window (x_t, ..., x_{t+m-1}); consecutive
    windows overlap in m-1 base symbols, so one composite transition advances
    the base chain by exactly one symbol.  m=1 is the identity embedding.
    """
    if m < 1:
        raise ValueError("order m must be >= 1")
    if seq.length < m:
        raise ValueError(f"insufficient length for order {m}")
    if m == 1:
        return seq
    base = seq.alphabet
    if isinstance(base, CompositeAlphabet):
        raise ValueError("sequence is already over a composite alphabet")
    comp = CompositeAlphabet(base=base, order=m)
    n_out = seq.length - m + 1
    idx = np.zeros(n_out, dtype=np.int64)
    for k in range(m):
        idx += seq.states[k : k + n_out] * base.kappa**k
    return Sequence(idx, comp)


def mle_transition_matrix(counts: TransitionCounts) -> TransitionMatrix:
    """Row-normalized counts: the maximum likelihood estimator of P.

    Rows with zero total are flagged undefined rather than filled.
    """
    if counts.grand_total < 1:
        raise ValueError("cannot estimate transition matrix from all-zero counts")
    dense = counts.to_dense()
    totals = counts.row_totals_arr
    defined = totals > 0
    probs = np.zeros_like(dense, dtype=np.float64)
    probs[defined] = dense[defined] / totals[defined, None]
    return TransitionMatrix(probs, defined)


def _reachable(adjacency: np.ndarray, start: int) -> np.ndarray:
    n = adjacency.shape[0]
    seen = np.zeros(n, dtype=bool)
    seen[start] = True
    stack = [start]
    while stack:
        node = stack.pop()
        (nbrs,) = np.nonzero(adjacency[node])
        for nb in nbrs:
            if not seen[nb]:
                seen[nb] = True
                stack.append(int(nb))
    return seen


def is_irreducible(P: TransitionMatrix) -> bool:
    """True iff the directed graph of positive transitions is strongly connected.

    Matrices with undefined rows are never irreducible.
    """
    if not P.all_rows_defined:
        return False
    adj = P.probs > 0.0
    if not _reachable(adj, 0).all():
        return False
    return bool(_reachable(adj.T, 0).all())
