"""Balanced subset generation, a from-scratch classifier zoo, and the
cross-model correlation statistics used to test whether training-set
quality is intrinsic to the data.

The pipeline is: parse MNIST-format IDX files, generate class-balanced
subsets (uniformly random plus four RMSD-based selection strategies),
train every model on every subset, then score cross-model agreement via
Z-scores, pairwise correlations with bootstrap CIs, and scaling fits.
"""

__version__ = "0.1.0"
