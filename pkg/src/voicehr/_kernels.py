"""Hot numeric inner loops.

Each kernel has a pure-numpy/python implementation and, when numba is
importable and ``VOICEHR_NO_NUMBA`` is unset, an ``@njit``-compiled twin.
``benchmarks/bench_kernels.py`` compares the two paths.
"""

import os

import numpy as np

_NO_NUMBA = os.environ.get("VOICEHR_NO_NUMBA", "") not in ("", "0")

if not _NO_NUMBA:
    try:
        from numba import njit
    except ImportError:
        _NO_NUMBA = True

USING_NUMBA = not _NO_NUMBA


def _best_split_scan_py(values, targets, min_leaf):
    """Best variance-reduction split of one feature.

    `values` must be ascending with `targets` permuted alongside.
    Returns (threshold, gain); gain is the drop in total squared error
    relative to predicting the node mean. gain = -1.0 when no split
    leaves at least `min_leaf` samples on both sides.
    """
    n = values.shape[0]
    best_gain = -1.0
    best_thr = 0.0
    if n < 2 * min_leaf:
        return best_thr, best_gain
    total = 0.0
    total_sq = 0.0
    for i in range(n):
        total += targets[i]
        total_sq += targets[i] * targets[i]
    parent_sse = total_sq - total * total / n
    left_sum = 0.0
    for i in range(n - 1):
        left_sum += targets[i]
        n_left = i + 1
        if n_left < min_leaf:
            continue
        if n - n_left < min_leaf:
            break
        if values[i + 1] <= values[i]:
            continue
        right_sum = total - left_sum
        children_sse = (total_sq
                        - left_sum * left_sum / n_left
                        - right_sum * right_sum / (n - n_left))
        gain = parent_sse - children_sse
        if gain > best_gain:
            best_gain = gain
            best_thr = 0.5 * (values[i] + values[i + 1])
    return best_thr, best_gain


def _refractory_select_py(candidates, strength, min_gap):
    """Enforce a refractory gap over candidate peak indices.

    Candidates must be ascending. Within `min_gap` samples of the last
    kept peak, the stronger one wins. Returns kept candidate positions
    (indices into `candidates`).
    """
    n = candidates.shape[0]
    kept = np.empty(n, dtype=np.int64)
    m = 0
    for i in range(n):
        if m == 0 or candidates[i] - candidates[kept[m - 1]] >= min_gap:
            kept[m] = i
            m += 1
        elif strength[i] > strength[kept[m - 1]]:
            kept[m - 1] = i
    return kept[:m]


if USING_NUMBA:
    best_split_scan = njit(cache=True)(_best_split_scan_py)
    refractory_select = njit(cache=True)(_refractory_select_py)
else:
    best_split_scan = _best_split_scan_py
    refractory_select = _refractory_select_py
