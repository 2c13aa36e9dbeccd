"""Ground-truth chain simulation, benchmark matrices, two-state second-order
chains, and a seeded Monte Carlo experiment runner.

The second-order half of this module works with 2-state chains whose
transition structure on pairs (rows and columns ordered AA, AB, BA, BB) is

    [[1-a, a,   0,   0  ],
     [0,   0,   b,   1-b],
     [1-c, c,   0,   0  ],
     [0,   0,   d,   1-d]]

where transitions between non-overlapping pairs are structurally impossible.
With a = c and b = d the process is indistinguishable from a first-order
chain.  Writing the observed first-order transition probabilities as p (A->B)
and q (B->A), the equivalent parameterization

    a = p(1+phi),  1-c = (1-p)(1+phi),  d = q(1+gamma),  1-b = (1-q)(1+gamma)

isolates the second-order dependence in phi = a-c and gamma = d-b, subject to
-1 <= phi <= min(p/(1-p), (1-p)/p) and the analogous bounds for gamma.  The
pair-chain stationary distribution has the closed form
psi^-1 * (d(1-c), da, da, a(1-b)) with psi = a(1-b) + 2da + d(1-c), which
makes the entropy rate analytic over the whole (phi, gamma) region.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass

import numpy as np

from .direct import entropy_rate, stationary_eigen
from .estimators import EstimatorSpec, run_estimator
from .markov import (
    Alphabet,
    ProbabilityVector,
    ReducibleMatrixError,
    Sequence,
    TransitionMatrix,
    is_irreducible,
)

__all__ = [
    "simulate_chain",
    "benchmark_matrix",
    "BENCHMARK_NAMES",
    "SecondOrderParams",
    "ReparamPoint",
    "second_order_matrix",
    "second_order_matrix_from_reparam",
    "reparam_to_abcd",
    "second_order_stationary",
    "second_order_entropy",
    "first_order_projection",
    "simulate_second_order",
    "phi_bound",
    "gamma_bound",
    "entropy_surface",
    "ExperimentPlan",
    "CellResult",
    "ExperimentReport",
    "run_experiment",
]


def simulate_chain(
    P: TransitionMatrix,
    n: int,
    *,
    init: int | ProbabilityVector | np.ndarray | None = None,
    rng: np.random.Generator | int | None = None,
    alphabet: Alphabet | None = None,
) -> Sequence:
    """Draw a length-n realization from a transition matrix.

    ``init`` selects x_0: a fixed state index, an explicit distribution, or
    None for the exact stationary distribution (so the realized process is
    stationary from the start; this raises for reducible matrices).
    Subsequent symbols are drawn from the current row by inverse-CDF sampling.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not P.all_rows_defined:
        raise ValueError("cannot simulate from a matrix with undefined rows")
    rng = np.random.default_rng(rng)
    kappa = P.size
    if alphabet is None:
        alphabet = Alphabet.of_size(kappa)
    elif alphabet.kappa != kappa:
        raise ValueError("alphabet size does not match matrix")

    if init is None:
        init = stationary_eigen(P)
    if isinstance(init, (int, np.integer)):
        x0 = int(init)
        if not 0 <= x0 < kappa:
            raise ValueError("initial state out of range")
    else:
        probs = init.probs if isinstance(init, ProbabilityVector) else np.asarray(init)
        x0 = int(rng.choice(kappa, p=probs / probs.sum()))

    cum = np.cumsum(P.probs, axis=1)
    cum[:, -1] = 1.0
    rows = [row.tolist() for row in cum]
    out = np.empty(n, dtype=np.int64)
    out[0] = x0
    us = rng.random(n)
    state = x0
    for t in range(1, n):
        state = bisect_right(rows[state], us[t])
        out[t] = state
    return Sequence(out, alphabet)


BENCHMARK_NAMES = ("low", "medium", "medium-builtin", "high")

# Dominant-successor masses of the built-in medium benchmark; row i puts s_i
# on state i+1 (mod 8) and spreads the rest evenly.  Row entropies span about
# 0.75 to 2.40 bits and the overall rate is about 1.61 bits.
_MEDIUM_MASSES = (0.90, 0.85, 0.80, 0.70, 0.60, 0.50, 0.60, 0.75)


def benchmark_matrix(kind: str, kappa: int = 8, diag: float = 0.95) -> TransitionMatrix:
    """Named benchmark transition matrices.

    "low": strongly self-transitioning rows (P_ii = diag, remaining mass split
    evenly), a highly predictable system.  "high": uniform rows, a maximally
    unpredictable system with rate exactly log2(kappa).  "medium" (alias
    "medium-builtin"): a fixed 8-state matrix with heterogeneous row entropies
    sitting between the two; it is a documented built-in stand-in, not taken
    from any published source.
    """
    if kind == "low":
        if not 0.0 < diag <= 1.0:
            raise ValueError("diag must lie in (0, 1]")
        if kappa < 2:
            raise ValueError("need kappa >= 2")
        P = np.full((kappa, kappa), (1.0 - diag) / (kappa - 1))
        np.fill_diagonal(P, diag)
        return TransitionMatrix.from_probs(P)
    if kind == "high":
        return TransitionMatrix.from_probs(np.full((kappa, kappa), 1.0 / kappa))
    if kind in ("medium", "medium-builtin"):
        if kappa != 8:
            raise ValueError("the built-in medium benchmark is 8-state")
        P = np.empty((8, 8))
        for i, mass in enumerate(_MEDIUM_MASSES):
            P[i, :] = (1.0 - mass) / 7.0
            P[i, (i + 1) % 8] = mass
        return TransitionMatrix.from_probs(P)
    raise ValueError(f"unknown benchmark {kind!r}; expected one of {BENCHMARK_NAMES}")


@dataclass(frozen=True)
class SecondOrderParams:
    """Transition probabilities (a, b, c, d) of the 2-state pair chain."""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self) -> None:
        for name in ("a", "b", "c", "d"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"parameter {name}={v} outside [0, 1]")


@dataclass(frozen=True)
class ReparamPoint:
    """First-order probabilities (p, q) plus dependence parameters (phi, gamma)."""

    p: float
    q: float
    phi: float
    gamma: float

    def __post_init__(self) -> None:
        if not (0.0 < self.p < 1.0 and 0.0 < self.q < 1.0):
            raise ValueError("p and q must lie strictly inside (0, 1)")
        _check_bound("phi", self.phi, phi_bound(self.p), self.p, "p")
        _check_bound("gamma", self.gamma, gamma_bound(self.q), self.q, "q")


_BOUND_TOL = 1e-12


def phi_bound(p: float) -> float:
    """Upper limit of phi: min(p/(1-p), (1-p)/p); the lower limit is -1."""
    return min(p / (1.0 - p), (1.0 - p) / p)


def gamma_bound(q: float) -> float:
    """Upper limit of gamma: min(q/(1-q), (1-q)/q); the lower limit is -1."""
    return min(q / (1.0 - q), (1.0 - q) / q)


def _check_bound(name: str, value: float, upper: float, base: float, base_name: str) -> None:
    if not -1.0 - _BOUND_TOL <= value <= upper + _BOUND_TOL:
        raise ValueError(
            f"{name}={value} violates -1 <= {name} <= "
            f"min({base_name}/(1-{base_name}), (1-{base_name})/{base_name}) = {upper:.6g} "
            f"for {base_name}={base}"
        )


def second_order_matrix(params: SecondOrderParams) -> TransitionMatrix:
    """The 4x4 pair-transition matrix, rows and columns ordered AA, AB, BA, BB."""
    a, b, c, d = params.a, params.b, params.c, params.d
    P = np.array(
        [
            [1 - a, a, 0.0, 0.0],
            [0.0, 0.0, b, 1 - b],
            [1 - c, c, 0.0, 0.0],
            [0.0, 0.0, d, 1 - d],
        ]
    )
    return TransitionMatrix.from_probs(P)


def reparam_to_abcd(point: ReparamPoint) -> SecondOrderParams:
    """Map (p, q, phi, gamma) to the (a, b, c, d) parameterization."""
    p, q, phi, gamma = point.p, point.q, point.phi, point.gamma
    a = p * (1 + phi)
    c = 1 - (1 - p) * (1 + phi)
    d = q * (1 + gamma)
    b = 1 - (1 - q) * (1 + gamma)
    # Guard float fuzz at the bound edges; genuine violations were rejected
    # by ReparamPoint already.
    a, b, c, d = (min(max(v, 0.0), 1.0) for v in (a, b, c, d))
    return SecondOrderParams(a=a, b=b, c=c, d=d)


def second_order_matrix_from_reparam(point: ReparamPoint) -> TransitionMatrix:
    """Build the pair-transition matrix directly from (p, q, phi, gamma).

    Algebraically identical to ``second_order_matrix(reparam_to_abcd(point))``;
    kept as an independent construction path.
    """
    p, q, phi, gamma = point.p, point.q, point.phi, point.gamma
    fp, fg = 1 + phi, 1 + gamma
    P = np.array(
        [
            [fp * (1 / fp - p), p * fp, 0.0, 0.0],
            [0.0, 0.0, fg * (q - gamma / fg), (1 - q) * fg],
            [(1 - p) * fp, fp * (p - phi / fp), 0.0, 0.0],
            [0.0, 0.0, q * fg, fg * (1 / fg - q)],
        ]
    )
    return TransitionMatrix.from_probs(np.clip(P, 0.0, 1.0))


def second_order_stationary(params: SecondOrderParams) -> ProbabilityVector:
    """Closed-form stationary distribution of the pair chain.

    pi = psi^-1 (d(1-c), da, da, a(1-b)) with psi = a(1-b) + 2da + d(1-c).
    """
    a, b, c, d = params.a, params.b, params.c, params.d
    raw = np.array([d * (1 - c), d * a, d * a, a * (1 - b)])
    psi = raw.sum()
    if psi <= 0.0:
        raise ReducibleMatrixError(
            "reducible transition matrix: pair chain has no interior stationary distribution"
        )
    return ProbabilityVector(raw / psi)


def second_order_entropy(params: SecondOrderParams) -> float:
    """Exact entropy rate (bits per symbol) of the pair chain.

    Per base symbol directly: each pair transition emits one new symbol.
    """
    P = second_order_matrix(params)
    pi = second_order_stationary(params)
    return entropy_rate(P, pi, method="direct_exact").value


def first_order_projection(params: SecondOrderParams) -> TransitionMatrix:
    """First-order dependence structure observed from the second-order process.

    Marginalizing the pair chain over its stationary distribution gives
    rows [[ (1-c)/((1-c)+a), a/((1-c)+a) ], [ d/(d+(1-b)), (1-b)/(d+(1-b)) ]].
    """
    if not is_irreducible(second_order_matrix(params)):
        raise ReducibleMatrixError("reducible transition matrix: projection undefined")
    a, b, c, d = params.a, params.b, params.c, params.d
    P = np.array(
        [
            [(1 - c) / ((1 - c) + a), a / ((1 - c) + a)],
            [d / (d + (1 - b)), (1 - b) / (d + (1 - b))],
        ]
    )
    return TransitionMatrix.from_probs(P)


def simulate_second_order(
    params: SecondOrderParams,
    n: int,
    *,
    rng: np.random.Generator | int | None = None,
) -> Sequence:
    """Length-n two-state realization ("A"/"B") of the second-order chain.

    Simulates the pair chain from its exact stationary distribution and emits
    the newest symbol of each pair (composite index = 2*older + newer).
    """
    if n < 2:
        raise ValueError("need n >= 2 to carry second-order structure")
    rng = np.random.default_rng(rng)
    pair_seq = simulate_chain(
        second_order_matrix(params),
        n - 1,
        init=second_order_stationary(params),
        rng=rng,
    )
    base = np.empty(n, dtype=np.int64)
    base[0] = pair_seq.states[0] // 2
    base[1:] = pair_seq.states % 2
    return Sequence(base, Alphabet(("A", "B")))


def entropy_surface(
    p: float,
    q: float,
    phi_grid: np.ndarray,
    gamma_grid: np.ndarray,
) -> np.ndarray:
    """Exact entropy rate over a (phi, gamma) grid at fixed (p, q).

    Returns an array of shape (len(phi_grid), len(gamma_grid)) in bits; grid
    points violating the dependence bounds, or whose pair chain degenerates
    (e.g. the phi = -1 or gamma = -1 edges), are marked NaN.
    """
    phi_grid = np.asarray(phi_grid, dtype=np.float64)
    gamma_grid = np.asarray(gamma_grid, dtype=np.float64)
    out = np.full((phi_grid.size, gamma_grid.size), np.nan)
    pb, gb = phi_bound(p), gamma_bound(q)
    for i, phi in enumerate(phi_grid):
        if not -1.0 - _BOUND_TOL <= phi <= pb + _BOUND_TOL:
            continue
        for j, gamma in enumerate(gamma_grid):
            if not -1.0 - _BOUND_TOL <= gamma <= gb + _BOUND_TOL:
                continue
            point = ReparamPoint(p=p, q=q, phi=float(phi), gamma=float(gamma))
            params = reparam_to_abcd(point)
            try:
                pi = second_order_stationary(params)
            except ReducibleMatrixError:
                continue
            P = second_order_matrix_from_reparam(point)
            out[i, j] = entropy_rate(P, pi, method="direct_exact").value
    return out


@dataclass(frozen=True, eq=False)
class ExperimentPlan:
    """A Monte Carlo run: generator, cut lengths, replicates, estimators, seed."""

    generator: TransitionMatrix | SecondOrderParams
    lengths: tuple[int, ...]
    replicates: int
    estimators: tuple[EstimatorSpec, ...]
    seed: int
    paper_zero_mode: bool = False
    generator_name: str = "matrix"

    def __post_init__(self) -> None:
        if not self.lengths:
            raise ValueError("at least one cut length required")
        if any(b <= a for a, b in zip(self.lengths, self.lengths[1:])):
            raise ValueError("lengths must be strictly increasing")
        if self.lengths[0] < 2:
            raise ValueError("lengths must be >= 2")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if not self.estimators:
            raise ValueError("at least one estimator required")


@dataclass(frozen=True, eq=False)
class CellResult:
    """Summary of one (cut length, estimator) cell across replicates."""

    length: int
    estimator: EstimatorSpec
    n_ok: int
    n_failed: int
    minimum: float | None
    mean: float | None
    maximum: float | None
    sd: float | None


@dataclass(frozen=True, eq=False)
class ExperimentReport:
    plan: ExperimentPlan
    cells: tuple[CellResult, ...]


def run_experiment(plan: ExperimentPlan) -> ExperimentReport:
    """Simulate, cut, and estimate per the plan; deterministic under its seed.

    Each replicate simulates one sequence of the longest cut length; every
    estimator is then applied to each prefix cut.  Cells report min, mean,
    max, and the across-replicate sample standard deviation, plus the count of
    replicates where the estimator failed (too-short prefix, reducible matrix
    without paper_zero_mode, ...).
    """
    gen = plan.generator
    if isinstance(gen, TransitionMatrix):
        init = stationary_eigen(gen)

        def sample(n: int, rng: np.random.Generator) -> Sequence:
            return simulate_chain(gen, n, init=init, rng=rng)

    else:

        def sample(n: int, rng: np.random.Generator) -> Sequence:
            return simulate_second_order(gen, n, rng=rng)

    max_len = plan.lengths[-1]
    values: dict[tuple[int, EstimatorSpec], list[float]] = {
        (n, est): [] for n in plan.lengths for est in plan.estimators
    }
    failures: dict[tuple[int, EstimatorSpec], int] = dict.fromkeys(values, 0)
    for stream in np.random.SeedSequence(plan.seed).spawn(plan.replicates):
        seq = sample(max_len, np.random.default_rng(stream))
        for n in plan.lengths:
            cut = seq.prefix(n)
            for est in plan.estimators:
                try:
                    values[(n, est)].append(
                        run_estimator(cut, est, paper_zero_mode=plan.paper_zero_mode).value
                    )
                except (ValueError, np.linalg.LinAlgError):
                    failures[(n, est)] += 1
    cells = []
    for n in plan.lengths:
        for est in plan.estimators:
            vals = np.asarray(values[(n, est)])
            if vals.size:
                cells.append(
                    CellResult(
                        length=n,
                        estimator=est,
                        n_ok=int(vals.size),
                        n_failed=failures[(n, est)],
                        minimum=float(vals.min()),
                        mean=float(vals.mean()),
                        maximum=float(vals.max()),
                        sd=float(vals.std(ddof=1)) if vals.size > 1 else None,
                    )
                )
            else:
                cells.append(
                    CellResult(
                        length=n,
                        estimator=est,
                        n_ok=0,
                        n_failed=failures[(n, est)],
                        minimum=None,
                        mean=None,
                        maximum=None,
                        sd=None,
                    )
                )
    return ExperimentReport(plan=plan, cells=tuple(cells))
