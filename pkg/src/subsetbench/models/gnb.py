"""Gaussian naive Bayes with closed-form per-class pixel statistics."""

from dataclasses import dataclass

import numpy as np

from ..idx import N_CLASSES, LabeledDataset

VAR_SMOOTHING = 1e-9  # scale of the variance floor, relative to the largest pixel variance


@dataclass
class GnbParams:
    priors: np.ndarray  # (10,)
    means: np.ndarray  # (10, pixels)
    variances: np.ndarray  # (10, pixels), floored strictly above zero


def gnb_fit(train: LabeledDataset) -> GnbParams:
    """Empirical priors plus per-class pixel means and floored variances.

    The floor is VAR_SMOOTHING times the largest per-pixel variance of the
    whole training set, added to every class variance (common default
    practice), so log densities stay finite on constant pixels.
    """
    n_pixels = train.images.shape[1]
    priors = np.empty(N_CLASSES)
    means = np.empty((N_CLASSES, n_pixels))
    variances = np.empty((N_CLASSES, n_pixels))
    floor = VAR_SMOOTHING * float(train.images.var(axis=0).max())
    if floor <= 0.0:
        floor = 1e-12
    for k in range(N_CLASSES):
        positions = train.class_index[k]
        if len(positions) == 0:
            raise ValueError(f"class {k} has no training images")
        block = train.images[positions]
        priors[k] = len(positions) / len(train)
        means[k] = block.mean(axis=0)
        variances[k] = block.var(axis=0) + floor
    return GnbParams(priors=priors, means=means, variances=variances)


def gnb_log_posterior(params: GnbParams, images) -> np.ndarray:
    """Unnormalized log posterior, shape (n, 10)."""
    X = np.atleast_2d(np.asarray(images, dtype=np.float64))
    scores = np.empty((X.shape[0], N_CLASSES))
    log_priors = np.log(params.priors)
    for k in range(N_CLASSES):
        var = params.variances[k]
        diff = X - params.means[k]
        log_like = -0.5 * (np.log(2.0 * np.pi * var).sum() + (diff * diff / var).sum(axis=1))
        scores[:, k] = log_priors[k] + log_like
    return scores


def gnb_predict(params: GnbParams, images) -> np.ndarray:
    """Argmax class per image; ties resolve to the lowest class id."""
    scores = gnb_log_posterior(params, images)
    return np.argmax(scores, axis=1)
