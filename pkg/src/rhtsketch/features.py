"""Random Fourier features on top of the transform ensemble.

h(x) = sqrt(2/(m*padded_d)) * cos(embedding(x) + b) with b i.i.d. uniform on
[0, 2*pi).  Inner products of feature vectors approximate the unit-bandwidth
RBF kernel exp(-||x-y||^2/2).  Padding adds genuine feature coordinates
(cosines of phase-shifted zero-mean Gaussians), so the approximation stays
unbiased at non-power-of-two dimensions.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from . import streams
from .ensemble import RhtEnsemble, embed
from .gaussian import rbf_kernel
from .report import DeviationReport


@dataclass(frozen=True)
class FourierFeatureMap:
    """An ensemble paired with its phase vector b of length m * padded_d."""

    ensemble: RhtEnsemble
    phases: np.ndarray
    phase_seed: int


def build_feature_map(ensemble: RhtEnsemble, phase_seed: int) -> FourierFeatureMap:
    """Draw phases for the ensemble from the PHASE-purpose stream.

    The stream key differs from the diagonal stream's even at an identical
    seed value, so phases and diagonals never share randomness.
    """
    d = ensemble.dim.padded_d
    phases = np.empty((ensemble.m, d), dtype=np.float64)
    for j in range(ensemble.m):
        phases[j] = streams.uniform_angles(phase_seed, streams.PHASE, j, d)
    phases = phases.reshape(-1)
    phases.setflags(write=False)
    return FourierFeatureMap(
        ensemble=ensemble, phases=phases, phase_seed=int(phase_seed)
    )


def features(fmap: FourierFeatureMap, x: np.ndarray) -> np.ndarray:
    """The feature vector sqrt(2/(m*padded_d)) * cos(embedding + phases)."""
    ens = fmap.ensemble
    scale = np.sqrt(2.0 / (ens.m * ens.dim.padded_d))
    return scale * np.cos(embed(ens, x).values + fmap.phases)


def approx_kernel(fmap: FourierFeatureMap, x: np.ndarray, y: np.ndarray) -> float:
    """<features(x), features(y)>, the kernel estimate."""
    return float(np.dot(features(fmap, x), features(fmap, y)))


def kerdec_decompose(
    fmap: FourierFeatureMap, x: np.ndarray, y: np.ndarray
) -> tuple[float, float]:
    """Split the kernel estimate into its phase and difference terms.

    Product-to-sum on the feature cosines gives
        approx_kernel(x, y) = mean cos(embedding(x+y) + 2b)
                            + mean cos(embedding(x-y)),
    the first term carrying all the phase randomness and the second only the
    difference vector.  Returns (sum_term, diff_term); their total matches
    approx_kernel to 1e-10 (the gap is pure roundoff via linearity of the
    embedding).
    """
    ens = fmap.ensemble
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    sum_term = float(np.mean(np.cos(embed(ens, x + y).values + 2.0 * fmap.phases)))
    diff_term = float(np.mean(np.cos(embed(ens, x - y).values)))
    return sum_term, diff_term


def kernel_error_sweep(fmap: FourierFeatureMap, points: list[np.ndarray]) -> DeviationReport:
    """|approx_kernel - exact kernel| over all pairs of the given points.

    Covers every unordered pair including (i, i); the report carries the max,
    per-pair deviations, and a 10-bin histogram of the errors.
    """
    if len(points) < 2:
        raise ValueError(f"need at least 2 points, got {len(points)}")
    start = time.perf_counter()
    ens = fmap.ensemble
    rows = np.stack([features(fmap, p) for p in points])
    pts = [np.asarray(p, dtype=np.float64) for p in points]
    cases = []
    for i in range(len(pts)):
        for j in range(i, len(pts)):
            err = abs(float(np.dot(rows[i], rows[j])) - rbf_kernel(pts[i], pts[j]))
            cases.append((f"pair_{i}_{j}", err))
    devs = np.array([dev for _, dev in cases])
    counts, edges = np.histogram(devs, bins=10, range=(0.0, max(devs.max(), 1e-300)))
    params = {
        "d": ens.dim.logical_d,
        "m": ens.m,
        "seed": ens.seed,
        "phase_seed": fmap.phase_seed,
        "n_points": len(pts),
        "histogram_counts": counts.tolist(),
        "histogram_edges": edges.tolist(),
    }
    runtime_ms = int(1000 * (time.perf_counter() - start))
    return DeviationReport.from_cases("kernel_error_sweep", params, cases, runtime_ms)


def default_feature_blocks(eps: float, delta: float, diam: float) -> int:
    """Practical block count for a target accuracy over a set of diameter diam."""
    if not 0 < eps < 0.5 or not 0 < delta < 0.5:
        raise ValueError("eps and delta must lie in (0, 1/2)")
    if diam < 0:
        raise ValueError(f"diameter must be nonnegative, got {diam}")
    return math.ceil(8.0 * eps**-2 * max(1.0, diam * diam) * math.log(2.0 / delta))
