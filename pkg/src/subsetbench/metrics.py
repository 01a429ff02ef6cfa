"""Pixelwise RMSD distance primitives shared by every selection strategy."""

import numpy as np

from .idx import N_CLASSES, LabeledDataset, write_idx_images


def rmsd(a, b) -> float:
    """Root-mean-square difference between two equal-length pixel vectors."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    d = a - b
    return float(np.sqrt(np.mean(d * d)))


def pairwise_rmsd(images) -> np.ndarray:
    """Full symmetric RMSD matrix, diagonal zero.

    Uses the |a|^2 + |b|^2 - 2ab expansion so the whole matrix is one BLAS
    product; squared distances are clipped at zero before the root.
    """
    X = np.asarray(images, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 1:
        raise ValueError(f"expected (n, pixels) with n >= 1, got {X.shape}")
    sq = np.einsum("ij,ij->i", X, X)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (X @ X.T)
    np.maximum(d2, 0.0, out=d2)
    np.fill_diagonal(d2, 0.0)
    return np.sqrt(d2 / X.shape[1])


def rmsd_to_references(images, references) -> np.ndarray:
    """RMSD from each image (rows) to each reference image (columns)."""
    X = np.asarray(images, dtype=np.float64)
    R = np.asarray(references, dtype=np.float64)
    d2 = (
        np.einsum("ij,ij->i", X, X)[:, None]
        + np.einsum("ij,ij->i", R, R)[None, :]
        - 2.0 * (X @ R.T)
    )
    np.maximum(d2, 0.0, out=d2)
    return np.sqrt(d2 / X.shape[1])


def class_mean_images(parent: LabeledDataset) -> np.ndarray:
    """Pixelwise mean image per class, shape (10, pixels).

    Means are always taken over the full parent training set, never over a
    subset, so all selection strategies score against one fixed reference.
    """
    means = np.empty((N_CLASSES, parent.images.shape[1]), dtype=np.float64)
    for k in range(N_CLASSES):
        positions = parent.class_index[k]
        if len(positions) == 0:
            raise ValueError(f"class {k} has no images; cannot form a mean image")
        means[k] = parent.images[positions].mean(axis=0)
    return means


def save_mean_images(path, means) -> None:
    """Persist the 10 mean images as a small IDX3 file (byte-quantized view).

    The file is a run artifact for inspection; selection always scores
    against the in-memory float means.
    """
    write_idx_images(path, means)
