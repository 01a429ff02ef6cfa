"""k-nearest-neighbor classification under the pixelwise RMSD metric."""

import numpy as np

from ..idx import N_CLASSES


def knn_predict(train_images, train_labels, queries, k: int, block_size: int = 256) -> np.ndarray:
    """Majority vote among the k nearest training images by RMSD.

    Distance ties prefer the lower training index (stable sort); vote ties
    prefer the lowest class id. RMSD ordering equals squared-distance
    ordering, so the root is never taken.
    """
    train_images = np.asarray(train_images, dtype=np.float64)
    train_labels = np.asarray(train_labels)
    queries = np.atleast_2d(np.asarray(queries, dtype=np.float64))
    if k < 1 or k > len(train_images):
        raise ValueError(f"k={k} outside 1..{len(train_images)}")

    train_sq = np.einsum("ij,ij->i", train_images, train_images)
    out = np.empty(len(queries), dtype=np.int64)
    for start in range(0, len(queries), block_size):
        q = queries[start : start + block_size]
        d2 = (
            np.einsum("ij,ij->i", q, q)[:, None]
            + train_sq[None, :]
            - 2.0 * (q @ train_images.T)
        )
        nearest = np.argsort(d2, axis=1, kind="stable")[:, :k]
        votes = train_labels[nearest]
        counts = np.zeros((len(q), N_CLASSES), dtype=np.int64)
        rows = np.repeat(np.arange(len(q)), k)
        np.add.at(counts, (rows, votes.ravel()), 1)
        out[start : start + len(q)] = np.argmax(counts, axis=1)
    return out
