"""Batcher's bitonic sorting network.

The network orders agents by the composite key (score descending, index
ascending).  Inputs are padded to the next power of two with sentinel keys
that rank after every real key.  All comparators of one stage touch disjoint
pairs, so each stage is applied as a single vectorised compare-exchange.
A network on ``N = 2**d`` wires has ``(N/2) * d * (d + 1) / 2`` comparators.
"""

from __future__ import annotations

import numpy as np


def comparator_count(size: int) -> int:
    """Comparators of the bitonic network on ``size`` wires (power of two)."""
    if size <= 1:
        return 0
    d = size.bit_length() - 1
    if 1 << d != size:
        raise ValueError(f"bitonic networks need a power-of-two width, got {size}")
    return (size // 2) * d * (d + 1) // 2


def _stages(size):
    block = 2
    while block <= size:
        stride = block // 2
        while stride >= 1:
            yield block, stride
            stride //= 2
        block *= 2


def bitonic_sort(scores, return_count=False):
    """Permutation of agent indices sorted by (score desc, index asc).

    With ``return_count=True`` also returns the number of comparators the
    network executed.
    """
    scores = np.asarray(scores, dtype=np.float64)
    n = scores.shape[0]
    size = 1 << max(0, (n - 1).bit_length())
    key = np.full(size, -np.inf)
    key[:n] = scores
    idx = np.arange(size, dtype=np.int64)  # sentinels carry indices >= n

    wires = np.arange(size)
    executed = 0
    for block, stride in _stages(size):
        lo = wires[(wires & stride) == 0]
        hi = lo | stride
        # blocks with the block bit clear end up in network order, the others reversed
        forward = (lo & block) == 0
        hi_first = (key[hi] > key[lo]) | ((key[hi] == key[lo]) & (idx[hi] < idx[lo]))
        swap = np.where(forward, hi_first, ~hi_first)
        a, b = lo[swap], hi[swap]
        key[a], key[b] = key[b], key[a]
        idx[a], idx[b] = idx[b], idx[a]
        executed += lo.shape[0]

    perm = idx[idx < n]
    return (perm, executed) if return_count else perm
