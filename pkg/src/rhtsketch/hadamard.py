"""Fast Walsh-Hadamard transform in the unnormalized +-1 convention.

``H_1 = [1]`` and ``H_2n = [[H_n, H_n], [H_n, -H_n]]``, so ``H^T H = d * I``
with no 1/sqrt(d) factor anywhere inside the transform.  Callers that need an
isometry apply their own normalization.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class HadamardDim:
    """A logical dimension together with its power-of-two padding."""

    logical_d: int
    padded_d: int


# padded_d must stay well inside the addressable index range once multiplied
# by a block count; 2**48 leaves room for m up to 2**15 before intp overflow.
_MAX_PADDED = 1 << 48


def next_pow2(logical_d: int) -> HadamardDim:
    """Smallest power of two >= logical_d, as a HadamardDim."""
    if logical_d < 1:
        raise ValueError(f"dimension must be positive, got {logical_d}")
    if logical_d > _MAX_PADDED:
        raise ValueError(f"dimension too large: {logical_d}")
    padded = 1 << (int(logical_d) - 1).bit_length()
    return HadamardDim(logical_d=int(logical_d), padded_d=padded)


def fwht_in_place(buffer: np.ndarray) -> np.ndarray:
    """Apply the transform along the last axis of ``buffer``, in place.

    The last axis length must be a power of two and the array C-contiguous
    (the butterfly works on reshaped views).  Integer-valued inputs transform
    exactly: every butterfly step is an add, a multiply by -2, and an add,
    all of which are exact in float64 until entries approach 2**53.
    Returns ``buffer``.
    """
    if not isinstance(buffer, np.ndarray):
        raise TypeError("fwht_in_place needs an ndarray to mutate")
    n = buffer.shape[-1]
    if n < 1 or (n & (n - 1)) != 0:
        raise ValueError(f"last axis length must be a power of two, got {n}")
    if not buffer.flags.c_contiguous:
        raise ValueError("buffer must be C-contiguous for in-place transform")
    h = 1
    while h < n:
        view = buffer.reshape(buffer.shape[:-1] + (n // (2 * h), 2, h))
        top = view[..., 0, :]
        bot = view[..., 1, :]
        # (top, bot) <- (top + bot, top - bot) without a temporary:
        top += bot
        bot *= -2
        bot += top
        h *= 2
    return buffer


def hadamard_sign_matrix(d: int) -> np.ndarray:
    """The dense d x d +-1 matrix, H[k, i] = (-1)^popcount(k & i)."""
    if d < 1 or (d & (d - 1)) != 0:
        raise ValueError(f"order must be a power of two, got {d}")
    idx = np.arange(d, dtype=np.uint64)
    parity = np.bitwise_count(idx[:, None] & idx[None, :]) & 1
    return 1.0 - 2.0 * parity.astype(np.float64)


def naive_hadamard_apply(x: np.ndarray) -> np.ndarray:
    """O(d^2) reference: multiply by the dense sign matrix."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("naive apply expects a 1-D vector")
    return hadamard_sign_matrix(x.shape[0]) @ x
