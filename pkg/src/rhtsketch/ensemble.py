"""Ensembles of randomized Hadamard transforms with Gaussian diagonals.

An ensemble is m independent diagonal matrices D^j with i.i.d. N(0, 1)
entries.  The embedding of z stacks the m blocks H(D^j z) into one vector of
length m * padded_d; each entry is marginally N(0, ||z||^2).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import streams
from .hadamard import HadamardDim, fwht_in_place, next_pow2

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class RhtEnsemble:
    """m blocks of N(0,1) diagonals over a padded dimension.

    ``diagonals`` has shape (m, padded_d), row j holding diag(D^j).  The
    array is read-only; rebuilding from (dim, m, seed) reproduces it
    bit-exactly.
    """

    dim: HadamardDim
    m: int
    seed: int
    diagonals: np.ndarray


@dataclass(frozen=True)
class Embedding:
    """The stacked blocks H(D^j z), flattened to length m * padded_d."""

    values: np.ndarray
    source_dim: HadamardDim
    m: int

    def block(self, j: int) -> np.ndarray:
        """View of block j, entries [j*padded_d, (j+1)*padded_d)."""
        d = self.source_dim.padded_d
        return self.values[j * d : (j + 1) * d]


def build_ensemble(logical_d: int, m: int, seed: int) -> RhtEnsemble:
    """Draw the m diagonal blocks for dimension logical_d.

    Block j comes from the stream keyed (seed, DIAGONAL, j), coordinate i
    being the i-th variate of that stream, so blocks are independent and can
    be regenerated individually.
    """
    dim = next_pow2(logical_d)
    if m < 1:
        raise ValueError(f"block count must be positive, got {m}")
    total = m * dim.padded_d
    if total > np.iinfo(np.intp).max // 8:
        raise ValueError(f"m * padded_d = {total} overflows addressable size")
    diagonals = np.empty((m, dim.padded_d), dtype=np.float64)
    for j in range(m):
        diagonals[j] = streams.gaussian_block(seed, streams.DIAGONAL, j, dim.padded_d)
    diagonals.setflags(write=False)
    return RhtEnsemble(dim=dim, m=m, seed=int(seed), diagonals=diagonals)


def _check_input(ensemble: RhtEnsemble, z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.float64)
    if z.ndim != 1 or z.shape[0] != ensemble.dim.logical_d:
        raise ValueError(
            f"expected {ensemble.dim.logical_d} entries, got shape {z.shape}"
        )
    if not np.all(np.isfinite(z)):
        raise ValueError("input vector has non-finite entries")
    return z


def embed(ensemble: RhtEnsemble, z: np.ndarray, *, serial: bool = False) -> Embedding:
    """Compute the stacked embedding of z, zero-padding to padded_d.

    ``serial=True`` processes blocks one at a time instead of as one batched
    transform; the two paths are bit-identical (the butterfly applies the
    same elementwise operations either way) and exist so that determinism
    under parallel scheduling stays testable.
    """
    z = _check_input(ensemble, z)
    d = ensemble.dim.padded_d
    padded = np.zeros(d, dtype=np.float64)
    padded[: ensemble.dim.logical_d] = z
    if serial:
        out = np.empty((ensemble.m, d), dtype=np.float64)
        for j in range(ensemble.m):
            out[j] = ensemble.diagonals[j] * padded
            fwht_in_place(out[j])
    else:
        out = ensemble.diagonals * padded
        fwht_in_place(out)
    return Embedding(values=out.reshape(-1), source_dim=ensemble.dim, m=ensemble.m)


def embed_batch(ensemble: RhtEnsemble, zs: np.ndarray, *, chunk: int = 256) -> np.ndarray:
    """Embeddings for the rows of zs, as an (n, m * padded_d) matrix.

    Row i is bit-identical to embed(ensemble, zs[i]).values: the batched
    butterfly applies the same elementwise operations per row.  ``chunk``
    bounds the working set to chunk * m * padded_d floats.
    """
    zs = np.asarray(zs, dtype=np.float64)
    if zs.ndim != 2 or zs.shape[1] != ensemble.dim.logical_d:
        raise ValueError(
            f"expected (n, {ensemble.dim.logical_d}) input, got shape {zs.shape}"
        )
    if not np.all(np.isfinite(zs)):
        raise ValueError("input vectors have non-finite entries")
    n = zs.shape[0]
    d = ensemble.dim.padded_d
    out = np.empty((n, ensemble.m * d), dtype=np.float64)
    padded = np.zeros((min(chunk, n) if n else 0, d), dtype=np.float64)
    for lo in range(0, n, chunk):
        hi = min(lo + chunk, n)
        block = padded[: hi - lo]
        block[:, : ensemble.dim.logical_d] = zs[lo:hi]
        buf = ensemble.diagonals[None, :, :] * block[:, None, :]
        fwht_in_place(buf)
        out[lo:hi] = buf.reshape(hi - lo, -1)
    return out


def distortion_check(
    ensemble: RhtEnsemble, pairs: list[tuple[np.ndarray, np.ndarray]]
) -> float:
    """Worst relative distortion |  ||h(x)-h(y)|| / (sqrt(m*d)*||x-y||) - 1 |.

    The normalizer's d is padded_d.  Pairs must be distinct: a coincident
    pair has no defined distortion.
    """
    if not pairs:
        raise ValueError("pairs must be nonempty")
    scale = np.sqrt(ensemble.m * ensemble.dim.padded_d)
    worst = 0.0
    for x, y in pairs:
        gap = np.linalg.norm(np.asarray(x, dtype=np.float64) - np.asarray(y, dtype=np.float64))
        if gap == 0.0:
            raise ValueError("coincident pair: distortion is undefined")
        emb_gap = np.linalg.norm(embed(ensemble, x).values - embed(ensemble, y).values)
        worst = max(worst, abs(emb_gap / (scale * gap) - 1.0))
    return float(worst)


def save_ensemble_header(ensemble: RhtEnsemble, path: str) -> None:
    """Persist the ensemble as a JSON header; diagonals are never serialized."""
    header = {
        "schema_version": SCHEMA_VERSION,
        "logical_d": ensemble.dim.logical_d,
        "padded_d": ensemble.dim.padded_d,
        "m": ensemble.m,
        "seed": ensemble.seed,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(header, fh, sort_keys=True, indent=2)
        fh.write("\n")


def load_ensemble(path: str) -> RhtEnsemble:
    """Rebuild an ensemble from its JSON header, regenerating the diagonals."""
    with open(path, "r", encoding="utf-8") as fh:
        header = json.load(fh)
    if header.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"unsupported schema_version: {header.get('schema_version')}")
    if next_pow2(header["logical_d"]).padded_d != header["padded_d"]:
        raise ValueError(
            f"header padded_d {header['padded_d']} inconsistent with "
            f"logical_d {header['logical_d']}"
        )
    return build_ensemble(header["logical_d"], header["m"], header["seed"])
