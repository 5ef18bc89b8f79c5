"""Distance estimation from stored embeddings, robust to adaptive queries.

The structure stores only the embedding of each inserted point.  A query
embeds q once, samples k coordinates uniformly with replacement from the
m * padded_d entries, and for every stored point i turns the sampled signed
differences into a distance estimate: a quantile sets a truncation radius,
and the truncated mean of absolute differences, rescaled by sqrt(pi/2),
estimates ||q - x_i||.  The same sampled coordinates serve every stored
point, and both the quantile and the mean.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from scipy.special import ndtr

from . import streams
from .ensemble import Embedding, RhtEnsemble, build_ensemble, embed
from .report import DeviationReport

# Truncation quantile level: the CDF of a standard normal at 3.
DEFAULT_ALPHA = float(ndtr(3.0))

_SQRT_HALF_PI = math.sqrt(math.pi / 2.0)

ADVERSARIES = ("basis", "greedy-feedback")


@dataclass(frozen=True)
class QueryParams:
    """Per-query accuracy knobs.

    k defaults (at query time) to default_sample_count(n, eps, delta).
    query_seed must be fresh per query; reusing one reuses the sampled
    coordinate set.
    """

    eps: float
    delta: float
    query_seed: int
    k: Optional[int] = None
    alpha: float = DEFAULT_ALPHA

    def __post_init__(self) -> None:
        if not 0.0 < self.eps < 0.5:
            raise ValueError(f"eps must lie in (0, 1/2), got {self.eps}")
        if not 0.0 < self.delta < 0.5:
            raise ValueError(f"delta must lie in (0, 1/2), got {self.delta}")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.k is not None and self.k < 1:
            raise ValueError(f"k must be positive, got {self.k}")


@dataclass
class DistanceEstimator:
    """An ensemble plus one stored embedding per inserted point."""

    ensemble: RhtEnsemble
    embeddings: list[Embedding]

    @property
    def n(self) -> int:
        return len(self.embeddings)


@dataclass(frozen=True)
class QueryDetails:
    """Diagnostics from one query: sampled indices, per-point quantiles, radii."""

    indices: np.ndarray
    quantiles: np.ndarray
    radii: np.ndarray


def quantile(values, alpha: float) -> float:
    """Order-statistic quantile: sorted 1-based index ceil(alpha * n), clamped.

    Equivalently the smallest v such that the fraction of elements <= v is at
    least alpha.
    """
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        raise ValueError("quantile of an empty collection")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    rank = min(max(math.ceil(alpha * arr.size), 1), arr.size)
    return float(np.partition(arr.reshape(-1), rank - 1)[rank - 1])


def psi(r: float, x):
    """Truncated magnitude min(|x|, r); vectorized over x."""
    if not r >= 0.0:
        raise ValueError(f"truncation radius must be >= 0, got {r}")
    return np.minimum(np.abs(x), r)


def default_block_count(logical_d: int, eps: float, delta: float) -> int:
    """Default m = ceil(8 * eps^-2 * ln(d/delta))."""
    if logical_d < 1:
        raise ValueError(f"dimension must be positive, got {logical_d}")
    _check_eps_delta(eps, delta)
    return math.ceil(8.0 * eps**-2 * math.log(logical_d / delta))

def default_sample_count(n: int, eps: float, delta: float) -> int:
    """Default k = ceil(8 * eps^-2 * ln(4n/delta)); n below 1 is treated as 1."""
    _check_eps_delta(eps, delta)
    return math.ceil(8.0 * eps**-2 * math.log(4.0 * max(n, 1) / delta))


def _check_eps_delta(eps: float, delta: float) -> None:
    if not 0.0 < eps < 0.5 or not 0.0 < delta < 0.5:
        raise ValueError("eps and delta must lie in (0, 1/2)")


def build_estimator(logical_d: int, m: int, seed: int) -> DistanceEstimator:
    """Empty estimator over a fresh ensemble."""
    return DistanceEstimator(ensemble=build_ensemble(logical_d, m, seed), embeddings=[])


def insert(est: DistanceEstimator, x: np.ndarray) -> int:
    """Store the embedding of x; returns its index. Cost O(m d log d)."""
    est.embeddings.append(embed(est.ensemble, x))
    return len(est.embeddings) - 1


def query(
    est: DistanceEstimator,
    q: np.ndarray,
    params: QueryParams,
    *,
    return_details: bool = False,
):
    """Distance estimates from q to every stored point, insertion-ordered.

    Embeds q, samples k coordinate indices uniformly with replacement from
    the query_seed stream, and for each stored point i computes
        r_i = max(0, 2*sqrt(ln 1/eps) * quantile(sampled differences, alpha))
        d_i = sqrt(pi/2) * mean of min(|sampled differences|, r_i).
    Returns a length-n float array; with return_details=True, a pair
    (estimates, QueryDetails).
    """
    y = embed(est.ensemble, q).values
    n = est.n
    if n == 0:
        empty = np.zeros(0, dtype=np.float64)
        if return_details:
            details = QueryDetails(
                indices=np.zeros(0, dtype=np.int64),
                quantiles=empty,
                radii=empty.copy(),
            )
            return empty.copy(), details
        return empty
    k = params.k if params.k is not None else default_sample_count(n, params.eps, params.delta)
    total = y.shape[0]
    rng = streams.generator(params.query_seed, streams.QUERY, 0)
    indices = rng.integers(0, total, size=k)
    y_sel = y[indices]
    diffs = np.empty((n, k), dtype=np.float64)
    for i, stored in enumerate(est.embeddings):
        np.subtract(y_sel, stored.values[indices], out=diffs[i])
    rank = min(max(math.ceil(params.alpha * k), 1), k)
    quantiles = np.partition(diffs, rank - 1, axis=1)[:, rank - 1]
    radii = np.maximum(0.0, 2.0 * math.sqrt(math.log(1.0 / params.eps)) * quantiles)
    estimates = _SQRT_HALF_PI * np.mean(
        np.minimum(np.abs(diffs), radii[:, None]), axis=1
    )
    if return_details:
        return estimates, QueryDetails(indices=indices, quantiles=quantiles, radii=radii)
    return estimates


def stress_round_seed(seed: int, round_index: int) -> int:
    """The query seed adaptive_stress uses for one round; fresh per round."""
    return streams.derive_seed(seed, streams.QUERY, round_index)


def adaptive_stress(
    est: DistanceEstimator,
    rounds: int,
    adversary: str,
    seed: int,
    *,
    points: np.ndarray,
    params: Optional[QueryParams] = None,
) -> DeviationReport:
    """Round-by-round worst relative error under adaptively chosen queries.

    ``points`` holds the raw inserted vectors, row i the point behind
    embeddings[i]; the estimator itself stores only embeddings, and relative
    error needs ground truth.  Adversaries: "basis" cycles the standard basis
    directions with a growing scale; "greedy-feedback" starts from a random
    unit vector and each round moves toward the point whose distance was
    worst-estimated in the previous round, renormalizing.  Every round uses a
    fresh query seed from stress_round_seed(seed, round).
    """
    if est.n == 0:
        raise ValueError("estimator holds no points")
    if adversary not in ADVERSARIES:
        raise ValueError(f"unknown adversary {adversary!r}; use one of {ADVERSARIES}")
    if rounds < 0:
        raise ValueError(f"rounds must be >= 0, got {rounds}")
    points = np.asarray(points, dtype=np.float64)
    d = est.ensemble.dim.logical_d
    if points.shape != (est.n, d):
        raise ValueError(
            f"points must have shape ({est.n}, {d}), got {points.shape}"
        )
    if params is None:
        params = QueryParams(eps=0.1, delta=0.01, query_seed=0)
    start = time.perf_counter()
    cases = []
    q = None
    worst_idx = 0
    for t in range(rounds):
        if adversary == "basis":
            q = np.zeros(d, dtype=np.float64)
            q[t % d] = 1.0 + t // d
        elif q is None:
            g = streams.gaussian_block(seed, streams.VECTOR, t, d)
            q = g / np.linalg.norm(g)
        else:
            step = q - points[worst_idx]
            norm = np.linalg.norm(step)
            if norm < 1e-12:
                step = streams.gaussian_block(seed, streams.VECTOR, t, d)
                norm = np.linalg.norm(step)
            q = q + 0.5 * step / norm
            q = q / np.linalg.norm(q)
        round_params = replace(params, query_seed=stress_round_seed(seed, t))
        estimates = query(est, q, round_params)
        truths = np.linalg.norm(points - q[None, :], axis=1)
        live = truths > 1e-12
        rel = np.zeros_like(truths)
        rel[live] = np.abs(estimates[live] - truths[live]) / truths[live]
        worst_idx = int(np.argmax(rel))
        cases.append((f"round_{t}", float(rel[worst_idx])))
    runtime_ms = int(1000 * (time.perf_counter() - start))
    report_params = {
        "d": d,
        "m": est.ensemble.m,
        "seed": int(seed),
        "eps": params.eps,
        "trials": rounds,
        "adversary": adversary,
        "n": est.n,
    }
    return DeviationReport.from_cases(
        f"adaptive_stress_{adversary}", report_params, cases, runtime_ms
    )
