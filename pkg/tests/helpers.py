"""Shared numerical utilities for the test suite."""
import numpy as np


def batch_means_se(series, n_batches=25):
    """Standard error of the mean of a (possibly autocorrelated) scalar series.

    Splits the series into equal batches and uses the spread of batch means;
    valid once batches are long compared to the autocorrelation time.
    """
    x = np.asarray(series, dtype=np.float64).ravel()
    per = x.size // n_batches
    if per < 2:
        raise ValueError("series too short for the requested batch count")
    means = x[: per * n_batches].reshape(n_batches, per).mean(axis=1)
    return float(np.std(means, ddof=1) / np.sqrt(n_batches))


def max_rel_err(a, b):
    """Largest entrywise deviation, relative to the largest magnitude present."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    scale = max(np.max(np.abs(a)), np.max(np.abs(b)), 1e-300)
    return float(np.max(np.abs(a - b)) / scale)
