"""Definition-based reference implementations used as test oracles.

These deliberately avoid the library's cumulative-count / kernel code
paths: purity is computed by re-masking the activation vector at every
distinct threshold value.
"""

import numpy as np


def brute_optimal_threshold(acts, labels, target_class):
    """(threshold, purity, support) by scanning every distinct value.

    purity(t) = |{x in X_c : a >= t}| / |X_c| + |{x in X_notc : a < t}| / |X_notc|,
    thresholds descending, first maximum kept.
    """
    acts = np.asarray(acts, dtype=np.float64)
    labels = np.asarray(labels)
    pos = labels == target_class
    n_c = int(pos.sum())
    n_nc = int((~pos).sum())
    assert n_c > 0 and n_nc > 0

    thresholds = np.unique(acts)[::-1]               # descending distinct values
    ge = acts[None, :] >= thresholds[:, None]        # (n_t, n)
    tp = (ge & pos[None, :]).sum(axis=1)
    tn = (~ge & ~pos[None, :]).sum(axis=1)
    purity = tp / n_c + tn / n_nc
    best = int(np.argmax(purity))                    # first max = highest threshold
    support = int(ge[best].sum())
    return float(thresholds[best]), float(purity[best]), support


def brute_mine(values, labels, num_classes, k):
    """Ranked [(neuron, threshold, purity, support), ...] per class."""
    values = np.asarray(values, dtype=np.float64)
    h = values.shape[1]
    per_class = []
    for c in range(num_classes):
        stats = []
        for j in range(h):
            t, p, s = brute_optimal_threshold(values[:, j], labels, c)
            stats.append((j, t, p, s))
        ranked = sorted(stats, key=lambda item: (-item[2], item[0]))[: min(k, h)]
        per_class.append(ranked)
    return per_class


def random_dump_spec(rng):
    """Shapes plus labels for a fuzz dump with every class present."""
    num_classes = int(rng.integers(2, 5))
    n = int(rng.integers(num_classes + 1, 65))
    h = int(rng.integers(1, 9))
    labels = np.concatenate(
        [np.arange(num_classes), rng.integers(0, num_classes, size=n - num_classes)]
    )
    rng.shuffle(labels)
    return n, h, num_classes, labels.astype(np.uint32)


def random_values(rng, n, h):
    """Mix of continuous and heavily quantized columns to exercise ties."""
    values = rng.normal(size=(n, h))
    quantize = rng.random(h) < 0.5
    values[:, quantize] = np.round(values[:, quantize], 1)
    return values.astype(np.float32)
