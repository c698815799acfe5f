"""Pure numpy implementations of the hot kernels.

Semantics (tie-breaks, candidate sets, float operation order) are pinned to
match `_core.pyx` exactly; the two backends must be interchangeable bit for
bit.  Class-count reductions are accumulated sequentially per class rather
than with np.sum so the rounding matches the C loop.
"""

import numpy as np

BACKEND = "pure"


def best_cuts(a_sorted, y_sorted, class_counts):
    """Per-class best purity cut for one neuron.

    a_sorted: (n,) float64 activations sorted descending.
    y_sorted: (n,) int64 labels in the same order.
    class_counts: (C,) int64, all in (0, n).

    A cut k classifies the top-k samples positive; candidates are run
    boundaries (k == n or a[k-1] > a[k]) so duplicate values collapse.
    purity(k, c) = tp/|X_c| + tn/|X_notc|.  Returns (purity, cut) arrays of
    shape (C,); ties take the smallest k (highest threshold).
    """
    n = a_sorted.shape[0]
    num_classes = class_counts.shape[0]
    onehot = np.zeros((n, num_classes), dtype=np.int64)
    onehot[np.arange(n), y_sorted] = 1
    cum = np.cumsum(onehot, axis=0)

    valid = np.empty(n, dtype=bool)
    valid[:-1] = a_sorted[:-1] > a_sorted[1:]
    valid[-1] = True
    ks = np.flatnonzero(valid) + 1                     # ascending cut sizes

    not_counts = n - class_counts                      # (C,)
    tp = cum[ks - 1, :]                                # (n_cuts, C)
    fp = ks[:, None] - tp
    tn = not_counts[None, :] - fp
    purity = tp / class_counts[None, :] + tn / not_counts[None, :]

    best = np.argmax(purity, axis=0)                   # first max per class
    idx = np.arange(num_classes)
    return purity[best, idx].copy(), ks[best].astype(np.int64)


def best_gini_split(x_sorted, y_sorted, num_classes, min_leaf):
    """Best Gini-gain split of one sorted feature column.

    x_sorted ascending, y_sorted aligned.  A split at pos puts the first
    pos samples left; candidates are boundaries between distinct values
    with both sides >= min_leaf.  Returns (gain, pos); pos == -1 when no
    valid candidate exists.  Ties take the smallest pos (lowest threshold).
    """
    n = x_sorted.shape[0]
    if n < 2 * min_leaf or n < 2:
        return -1.0, -1
    onehot = np.zeros((n, num_classes), dtype=np.int64)
    onehot[np.arange(n), y_sorted] = 1
    cum = np.cumsum(onehot, axis=0)
    total = cum[-1]

    boundary = x_sorted[:-1] != x_sorted[1:]
    pos = np.flatnonzero(boundary) + 1
    pos = pos[(pos >= min_leaf) & (pos <= n - min_leaf)]
    if pos.size == 0:
        return -1.0, -1

    parent_sq = 0.0
    for c in range(num_classes):
        p = total[c] / n
        parent_sq += p * p
    imp_parent = 1.0 - parent_sq

    nl = pos.astype(np.float64)
    nr = (n - pos).astype(np.float64)
    left = cum[pos - 1, :]
    sq_l = np.zeros(pos.size, dtype=np.float64)
    sq_r = np.zeros(pos.size, dtype=np.float64)
    for c in range(num_classes):
        pl = left[:, c] / nl
        sq_l += pl * pl
        pr = (total[c] - left[:, c]) / nr
        sq_r += pr * pr
    imp_l = 1.0 - sq_l
    imp_r = 1.0 - sq_r
    gains = imp_parent - (nl / n) * imp_l - (nr / n) * imp_r

    b = int(np.argmax(gains))
    return float(gains[b]), int(pos[b])
