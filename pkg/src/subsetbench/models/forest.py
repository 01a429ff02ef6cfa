"""Random forest of CART trees grown with Gini impurity splits.

Each tree fits a bootstrap resample; every node draws sqrt(784) = 28
candidate pixels and splits at the Gini-minimizing threshold, growing
until pure or fewer than 2 samples. Split search runs on byte-quantized
pixel values (exact for IDX-derived images, which lie on the 1/255 grid);
thresholds are midpoints between adjacent occupied byte values. Ties
prefer the lower pixel index, then the lower threshold. Prediction is a
plurality vote over trees, ties to the lowest class id.
"""

from dataclasses import dataclass

import numpy as np

from ..idx import N_CLASSES
from ..seeds import derive_seed


@dataclass
class TreeParams:
    feature: np.ndarray  # (nodes,) int32, -1 at leaves
    threshold: np.ndarray  # (nodes,) float64, split is "pixel <= threshold"
    left: np.ndarray  # (nodes,) int32 child ids, -1 at leaves
    right: np.ndarray  # (nodes,) int32
    hist: np.ndarray  # (nodes, 10) int64 class histogram of training samples


@dataclass
class ForestParams:
    trees: list
    n_features: int


def _quantize(images) -> np.ndarray:
    return np.rint(np.asarray(images, dtype=np.float64) * 255.0).astype(np.uint8)


def _best_split(codes, labels, samples, feats):
    """Gini-minimizing (feature, threshold) over the candidate pixels.

    Returns (feat_pos, threshold, left_mask) or None when no candidate
    admits a valid split (all candidate pixels constant on the node).
    """
    s = len(samples)
    n_feats = len(feats)
    values = codes[np.ix_(samples, feats)].astype(np.int64)  # (s, F)
    y = labels[samples]

    flat = (np.arange(n_feats) * (256 * N_CLASSES))[None, :] + values * N_CLASSES + y[:, None]
    hist = np.bincount(flat.ravel(), minlength=n_feats * 256 * N_CLASSES)
    hist = hist.reshape(n_feats, 256, N_CLASSES)

    cum = np.cumsum(hist, axis=1)  # class counts with value <= bin
    left_n = cum.sum(axis=2)
    right_n = s - left_n
    total = cum[:, -1, :]
    left_ss = np.einsum("fbc,fbc->fb", cum, cum)
    right_c = total[:, None, :] - cum
    right_ss = np.einsum("fbc,fbc->fb", right_c, right_c)

    occupied = hist.sum(axis=2) > 0
    valid = occupied & (left_n > 0) & (right_n > 0)
    if not valid.any():
        return None

    with np.errstate(divide="ignore", invalid="ignore"):
        score = (left_n - left_ss / left_n) + (right_n - right_ss / right_n)
    score = np.where(valid, score, np.inf)
    best = int(np.argmin(score))  # row-major: lowest feature, then lowest bin
    f_pos, b = divmod(best, 256)

    col = occupied[f_pos]
    b_next = b + 1 + int(np.argmax(col[b + 1 :]))
    threshold = (b + b_next) / 2.0 / 255.0
    left_mask = values[:, f_pos] <= b
    return f_pos, threshold, left_mask


def _grow_tree(codes, labels, sample_idx, rng, max_features, log=None):
    feature, threshold, left, right, hist = [], [], [], [], []
    # stack entries: (samples, parent_node, is_left_child); preorder, left first
    stack = [(sample_idx, -1, False)]
    while stack:
        samples, parent, is_left = stack.pop()
        node = len(feature)
        if parent >= 0:
            (left if is_left else right)[parent] = node
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        counts = np.bincount(labels[samples], minlength=N_CLASSES)
        hist.append(counts)

        pure = counts.max() == len(samples)
        if pure or len(samples) < 2:
            if log is not None:
                log.append(("leaf", node, counts))
            continue
        feats = np.sort(rng.choice(codes.shape[1], size=max_features, replace=False))
        split = _best_split(codes, labels, samples, feats)
        if split is None:
            if log is not None:
                log.append(("leaf", node, counts))
            continue
        f_pos, thr, left_mask = split
        feature[node] = int(feats[f_pos])
        threshold[node] = thr
        if log is not None:
            log.append(("split", node, feats, int(feats[f_pos]), thr))
        stack.append((samples[~left_mask], node, False))
        stack.append((samples[left_mask], node, True))
    return TreeParams(
        feature=np.asarray(feature, dtype=np.int32),
        threshold=np.asarray(threshold, dtype=np.float64),
        left=np.asarray(left, dtype=np.int32),
        right=np.asarray(right, dtype=np.int32),
        hist=np.asarray(hist, dtype=np.int64),
    )


def forest_fit(train_images, train_labels, n_trees: int, seed: int, max_features=None, log=None):
    """Fit n_trees CART trees on bootstrap resamples; per-tree RNG streams
    are pre-split from the seed so results are schedule-independent."""
    images = np.asarray(train_images, dtype=np.float64)
    labels = np.asarray(train_labels, dtype=np.int64)
    if len(images) == 0:
        raise ValueError("empty training set")
    codes = _quantize(images)
    if max_features is None:
        max_features = max(1, int(round(np.sqrt(codes.shape[1]))))
    trees = []
    for t in range(n_trees):
        rng = np.random.default_rng(derive_seed(seed, "tree", t))
        boot = rng.integers(0, len(images), size=len(images))
        tree_log = None
        if log is not None:
            tree_log = []
            log.append({"bootstrap": boot, "nodes": tree_log})
        trees.append(_grow_tree(codes, labels, boot, rng, max_features, log=tree_log))
    return ForestParams(trees=trees, n_features=codes.shape[1])


def tree_predict(tree: TreeParams, images) -> np.ndarray:
    """Route every image to its leaf; predict the leaf histogram argmax."""
    X = np.atleast_2d(np.asarray(images, dtype=np.float64))
    pos = np.zeros(len(X), dtype=np.int64)
    while True:
        internal = tree.feature[pos] >= 0
        if not internal.any():
            break
        idx = np.flatnonzero(internal)
        node = pos[idx]
        goes_left = X[idx, tree.feature[node]] <= tree.threshold[node]
        pos[idx] = np.where(goes_left, tree.left[node], tree.right[node])
    return np.argmax(tree.hist[pos], axis=1)


def forest_predict(params: ForestParams, images) -> np.ndarray:
    """Plurality vote over trees; ties resolve to the lowest class id."""
    X = np.atleast_2d(np.asarray(images, dtype=np.float64))
    votes = np.zeros((len(X), N_CLASSES), dtype=np.int64)
    rows = np.arange(len(X))
    for tree in params.trees:
        votes[rows, tree_predict(tree, X)] += 1
    return np.argmax(votes, axis=1)
