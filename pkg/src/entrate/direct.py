"""Direct entropy rate estimation for chains of an assumed order.

The entropy rate of a stationary first-order chain is

    H = -sum_i pi_i sum_j P_ij log2 P_ij     (bits per symbol)

so a direct estimate plugs in the MLE transition matrix and one of three
stationary-distribution estimates: observed state frequencies, the left unit
eigenvector of the estimated matrix, or a Cesaro average of matrix powers.
Chains of order m are handled by first embedding into the first-order chain on
overlapping m-tuples; the resulting rate is already per base symbol because
each composite transition advances the base chain by one symbol.
"""

from __future__ import annotations

import warnings as _warnings
from dataclasses import dataclass

import numpy as np

from .markov import (
    DENSE_STATE_LIMIT,
    CompositeAlphabet,
    ProbabilityVector,
    ReducibleMatrixError,
    Sequence,
    TransitionCounts,
    TransitionMatrix,
    count_transitions,
    embed_order,
    is_irreducible,
    mle_transition_matrix,
)

__all__ = [
    "EntropyEstimate",
    "shannon_entropy",
    "stationary_empirical",
    "stationary_eigen",
    "stationary_limit",
    "entropy_rate",
    "estimate_direct",
    "estimate_direct_pooled",
]

# |eigenvalue - 1| below this counts as a unit eigenvalue when checking
# uniqueness of the stationary distribution.
_UNIT_EIG_TOL = 1e-8
_RESIDUAL_TOL = 1e-10

DEFAULT_CESARO_STEPS = 100_000


@dataclass(frozen=True)
class EntropyEstimate:
    """Point estimate of an entropy rate in bits per symbol, with diagnostics.

    ``method`` is one of direct_empirical, direct_eigen, direct_limit, swlz,
    or direct_exact for analytic evaluation of a known matrix.  ``order`` and
    ``irreducible`` are None when the method does not use them (swlz).
    """

    value: float
    method: str
    n_obs: int
    order: int | None = None
    irreducible: bool | None = None
    warnings: tuple[str, ...] = ()


def _xlog2x_sum(p: np.ndarray) -> float:
    """-sum p log2 p over the positive entries (0 log 0 = 0)."""
    p = p[p > 0.0]
    return float(-(p * np.log2(p)).sum()) if p.size else 0.0


def shannon_entropy(dist: ProbabilityVector | np.ndarray) -> float:
    """Shannon entropy -sum_i p_i log2 p_i in bits, with 0 log2 0 = 0."""
    probs = dist.probs if isinstance(dist, ProbabilityVector) else ProbabilityVector(np.asarray(dist)).probs
    return max(0.0, _xlog2x_sum(probs))


def stationary_empirical(counts: TransitionCounts) -> ProbabilityVector:
    """Observed state frequencies n_{i+} / n_{++} as a stationary estimate.

    Always a valid distribution, but it need not satisfy pi = pi P exactly for
    the estimated matrix.
    """
    if counts.grand_total < 1:
        raise ValueError("cannot estimate stationary distribution from zero transitions")
    return ProbabilityVector(counts.row_totals_arr / counts.grand_total)


def _bordered_solve(P: np.ndarray) -> np.ndarray | None:
    """Solve pi (P - I) = 0 with a sum-to-one row replacing one equation."""
    k = P.shape[0]
    A = P.T - np.eye(k)
    A[-1, :] = 1.0
    b = np.zeros(k)
    b[-1] = 1.0
    try:
        sol = np.linalg.solve(A, b)
    except np.linalg.LinAlgError:
        return None
    if not np.all(np.isfinite(sol)):
        return None
    return sol


def stationary_eigen(P: TransitionMatrix) -> ProbabilityVector:
    """Left unit eigenvector of P, normalized to a distribution.

    Requires every row of P to be defined and the unit eigenvalue to be
    simple; otherwise the stationary distribution is not identified and a
    ReducibleMatrixError is raised.  The returned vector satisfies
    ``max|pi P - pi| < 1e-10``.
    """
    if not P.all_rows_defined:
        n_undef = int((~P.defined_rows).sum())
        raise ReducibleMatrixError(
            f"reducible transition matrix: {n_undef} row(s) never visited"
        )
    eigvals, eigvecs = np.linalg.eig(P.probs.T)
    unit = np.abs(eigvals - 1.0) < _UNIT_EIG_TOL
    n_unit = int(unit.sum())
    if n_unit != 1:
        raise ReducibleMatrixError(
            f"reducible transition matrix: unit eigenvalue multiplicity {n_unit}"
        )
    vec = np.real(eigvecs[:, np.nonzero(unit)[0][0]])
    total = vec.sum()
    if total == 0.0:
        raise ReducibleMatrixError("reducible transition matrix: degenerate eigenvector")
    pi = vec / total

    def residual(v: np.ndarray) -> float:
        return float(np.max(np.abs(v @ P.probs - v)))

    if residual(pi) > _RESIDUAL_TOL or pi.min() < 0.0:
        refined = _bordered_solve(P.probs)
        if refined is not None and residual(refined) < residual(pi):
            pi = refined
    if residual(pi) > _RESIDUAL_TOL:
        raise ReducibleMatrixError(
            "reducible transition matrix: stationary fixed point not attained"
        )
    pi = np.clip(pi, 0.0, None)
    return ProbabilityVector(pi / pi.sum())


def stationary_limit(
    P: TransitionMatrix, steps: int = DEFAULT_CESARO_STEPS
) -> ProbabilityVector:
    """Cesaro average (1/N) sum_{i<=N} P^i[0, :] of first-row matrix powers.

    Converges to the stationary distribution for irreducible P but slowly;
    powers are accumulated as iterated vector-matrix products, never as
    explicit matrix powers.  Warns when the average still drifts by more than
    1e-6 between N/2 and N steps.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    if not is_irreducible(P):
        raise ReducibleMatrixError("reducible transition matrix")
    probs = P.probs
    row = probs[0].copy()
    acc = row.copy()
    half_avg = None
    half = steps // 2
    for i in range(2, steps + 1):
        row = row @ probs
        acc += row
        if i == half:
            half_avg = acc / half
    avg = acc / steps
    if half_avg is not None and np.max(np.abs(avg - half_avg)) >= 1e-6:
        _warnings.warn(
            f"Cesaro average not converged after {steps} steps", stacklevel=2
        )
    return ProbabilityVector(avg / avg.sum())


def entropy_rate(
    P: TransitionMatrix,
    pi: ProbabilityVector | np.ndarray,
    *,
    method: str = "direct_exact",
    order: int | None = None,
    n_obs: int = 0,
    irreducible: bool | None = None,
    extra_warnings: tuple[str, ...] = (),
) -> EntropyEstimate:
    """Weighted average of row conditional entropies: -sum pi_i P_ij log2 P_ij.

    Rows with zero stationary weight contribute nothing, whether or not they
    are defined; an undefined row with positive weight is an error.
    """
    if not isinstance(pi, ProbabilityVector):
        pi = ProbabilityVector(np.asarray(pi))
    if pi.size != P.size:
        raise ValueError("dimension mismatch between P and pi")
    weights = pi.probs
    if np.any((weights > 0.0) & ~P.defined_rows):
        raise ValueError("undefined transition row has positive stationary weight")
    warn = list(extra_warnings)
    n_undef = int((~P.defined_rows).sum())
    if n_undef:
        warn.append(f"{n_undef} never-visited state(s) carry zero stationary weight")
    value = 0.0
    for i in np.nonzero(weights > 0.0)[0]:
        value += weights[i] * _xlog2x_sum(P.probs[i])
    if irreducible is None:
        irreducible = is_irreducible(P)
    return EntropyEstimate(
        value=max(0.0, value),
        method=method,
        n_obs=n_obs,
        order=order,
        irreducible=irreducible,
        warnings=tuple(warn),
    )


_STATIONARY_METHODS = ("empirical", "eigen", "limit")


def _short_data_warning(n_obs: int, kappa: int, order: int) -> list[str]:
    needed = kappa**order
    if n_obs <= needed:
        return [
            f"sequence length {n_obs} <= kappa^m = {needed}; "
            f"order-{order} direct estimates are unreliable"
        ]
    return []


def _estimate_from_counts(
    counts: TransitionCounts,
    *,
    stationary: str,
    order: int,
    n_obs: int,
    base_kappa: int,
    paper_zero_mode: bool,
    limit_steps: int,
) -> EntropyEstimate:
    method = f"direct_{stationary}"
    warn = _short_data_warning(n_obs, base_kappa, order)
    if not counts.is_dense:
        if stationary != "empirical":
            raise ValueError(
                f"stationary method '{stationary}' requires a dense transition "
                f"matrix (at most {DENSE_STATE_LIMIT} states)"
            )
        return _estimate_sparse_empirical(counts, order, n_obs, warn, method)
    P = mle_transition_matrix(counts)
    irreducible = is_irreducible(P)
    try:
        if stationary == "empirical":
            pi = stationary_empirical(counts)
        elif stationary == "eigen":
            pi = stationary_eigen(P)
        else:
            pi = stationary_limit(P, steps=limit_steps)
    except ReducibleMatrixError as exc:
        if paper_zero_mode:
            return EntropyEstimate(
                value=0.0,
                method=method,
                n_obs=n_obs,
                order=order,
                irreducible=False,
                warnings=tuple(warn + [f"{exc}; estimate forced to 0"]),
            )
        raise
    return entropy_rate(
        P,
        pi,
        method=method,
        order=order,
        n_obs=n_obs,
        irreducible=irreducible,
        extra_warnings=tuple(warn),
    )


def _estimate_sparse_empirical(
    counts: TransitionCounts,
    order: int,
    n_obs: int,
    warn: list[str],
    method: str,
) -> EntropyEstimate:
    # Same arithmetic as the dense path, streamed over nonzero rows.
    grand = counts.grand_total
    if grand < 1:
        raise ValueError("cannot estimate from zero transitions")
    value = 0.0
    for i in np.nonzero(counts.row_totals_arr)[0]:
        total = counts.row_total(i)
        row = np.array([n for _, n in counts.row_items(i)], dtype=np.float64)
        value += (total / grand) * _xlog2x_sum(row / total)
    warn = warn + [
        f"{int((counts.row_totals_arr == 0).sum())} never-visited state(s) "
        "carry zero stationary weight"
    ]
    return EntropyEstimate(
        value=max(0.0, value),
        method=method,
        n_obs=n_obs,
        order=order,
        irreducible=False,
        warnings=tuple(warn),
    )


def estimate_direct(
    seq: Sequence,
    order: int = 1,
    stationary: str = "empirical",
    *,
    paper_zero_mode: bool = False,
    limit_steps: int = DEFAULT_CESARO_STEPS,
) -> EntropyEstimate:
    """Direct entropy rate estimate of ``seq`` as an order-m chain.

    Embeds the sequence into composite states, counts transitions, takes the
    MLE transition matrix, estimates the stationary distribution with the
    chosen method, and evaluates the plug-in entropy rate.

    With ``stationary="eigen"`` (or "limit") a reducible estimated matrix
    raises ReducibleMatrixError; under ``paper_zero_mode`` the estimate is
    instead reported as 0.0 with a warning, matching how such failures show up
    as zero estimates in simulation studies.
    """
    if stationary not in _STATIONARY_METHODS:
        raise ValueError(f"unknown stationary method {stationary!r}")
    if order < 1:
        raise ValueError("order must be >= 1")
    if seq.length <= order:
        raise ValueError(f"insufficient length for order {order}")
    base_kappa = seq.alphabet.kappa
    if isinstance(seq.alphabet, CompositeAlphabet):
        raise ValueError("estimate_direct expects a base-alphabet sequence")
    counts = count_transitions(embed_order(seq, order))
    return _estimate_from_counts(
        counts,
        stationary=stationary,
        order=order,
        n_obs=seq.length,
        base_kappa=base_kappa,
        paper_zero_mode=paper_zero_mode,
        limit_steps=limit_steps,
    )


def estimate_direct_pooled(
    segments: list[Sequence],
    order: int = 1,
    stationary: str = "empirical",
    *,
    paper_zero_mode: bool = False,
    limit_steps: int = DEFAULT_CESARO_STEPS,
) -> EntropyEstimate:
    """Direct estimate from transition counts pooled across segments.

    Transitions are counted within each segment only, so pairs spanning a
    segment boundary are excluded.  All segments must share one alphabet.
    """
    if not segments:
        raise ValueError("at least one segment required")
    alphabet = segments[0].alphabet
    if any(seg.alphabet is not alphabet for seg in segments[1:]):
        raise ValueError("segments must share a single alphabet")
    if isinstance(alphabet, CompositeAlphabet):
        raise ValueError("estimate_direct_pooled expects base-alphabet sequences")
    usable = [seg for seg in segments if seg.length > order]
    if not usable:
        raise ValueError(f"insufficient length for order {order}")
    pooled: TransitionCounts | None = None
    for seg in usable:
        c = count_transitions(embed_order(seg, order))
        if pooled is None:
            pooled = c
        elif pooled.is_dense:
            pooled = TransitionCounts(
                kappa=pooled.kappa,
                dense=pooled.to_dense() + c.to_dense(),
                sparse=None,
                alphabet=pooled.alphabet,
            )
        else:
            merged = {i: dict(row) for i, row in pooled.sparse.items()}
            for i, row in c.sparse.items():
                tgt = merged.setdefault(i, {})
                for j, n in row.items():
                    tgt[j] = tgt.get(j, 0) + n
            pooled = TransitionCounts(
                kappa=pooled.kappa, dense=None, sparse=merged, alphabet=pooled.alphabet
            )
    n_obs = sum(seg.length for seg in segments)
    return _estimate_from_counts(
        pooled,
        stationary=stationary,
        order=order,
        n_obs=n_obs,
        base_kappa=alphabet.kappa,
        paper_zero_mode=paper_zero_mode,
        limit_steps=limit_steps,
    )
