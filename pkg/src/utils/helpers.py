import logging
import math
import os
import tempfile

import numpy as np
import pandas as pd
from scipy.spatial.distance import cdist

from src.utils.errors import OutputWriteError


def squared_distances(points, reference):
    """
    Squared Euclidean distances between every row of `points` and `reference`.

    Args:
        points (ndarray): (n, d) matrix.
        reference (ndarray): a single (d,) vector or an (r, d) matrix.

    Returns:
        ndarray: (n,) distances for a vector reference, (n, r) for a matrix.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    reference = np.asarray(reference, dtype=float)
    if reference.ndim == 1:
        return cdist(points, reference[np.newaxis, :], "sqeuclidean")[:, 0]
    return cdist(points, reference, "sqeuclidean")


def nearest_first(distances, candidates):
    """
    Order `candidates` by ascending distance; ties keep the lowest row index first.

    `candidates` must be sorted ascending, `distances` aligned with it.
    """
    order = np.argsort(distances, kind="stable")
    return np.asarray(candidates)[order]


def farthest(distances, candidates):
    """
    The candidate with the largest distance, lowest row index on ties.
    """
    return int(np.asarray(candidates)[int(np.argmax(distances))])


def exact_column_means(matrix):
    """
    Column means computed with math.fsum so the sum is correctly rounded.
    """
    matrix = np.atleast_2d(matrix)
    count = matrix.shape[0]
    return np.array([math.fsum(matrix[:, j]) / count for j in range(matrix.shape[1])])


def factorize_column(values):
    """
    Map text values to integer codes, codes assigned in sorted value order.

    Returns:
        tuple: (codes as float ndarray, {value: code})
    """
    codes, uniques = pd.factorize(pd.Series(values, dtype=str), sort=True)
    mapping = {str(value): int(code) for code, value in enumerate(uniques)}
    return codes.astype(float), mapping


def atomic_write_text(path, text):
    """
    Write `text` to `path` through a temp file in the same directory, then rename.

    Nothing is left at `path` if writing fails.
    """
    directory = os.path.dirname(os.path.abspath(path))
    try:
        os.makedirs(directory, exist_ok=True)
        fd, tmp_path = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
    except OSError as e:
        logging.error(f"Cannot write to {directory}: {e}")
        raise OutputWriteError(f"Output directory {directory} is not writable: {e}") from e

    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp_path, path)
    except OSError as e:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        logging.error(f"Failed writing {path}: {e}")
        raise OutputWriteError(f"Could not write {path}: {e}") from e


def count_range(low, high):
    """
    (c_min, c_max) from optional bounds; a lone c_max of 1 keeps one cluster,
    any other lone c_max starts at 2, a lone c_min is pinned.
    """
    if low is None and high is None:
        return None
    if low is None:
        low = 1 if high == 1 else 2
    return (low, high if high is not None else low)
