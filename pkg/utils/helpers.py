"""
Helper utilities for simplex sampling, projection and counting
"""

import itertools
from typing import Sequence, Tuple

import numpy as np
from scipy.special import comb


def sample_simplex(rng: np.random.Generator, size: int, count: int = 1) -> np.ndarray:
    """
    Draw points uniformly from the probability simplex

    Independent standard-exponential variates normalised to sum one are
    uniformly distributed on the simplex (flat Dirichlet).

    Args:
        rng: Seeded numpy generator owned by the caller
        size: Dimension of each probability vector
        count: Number of vectors to draw

    Returns:
        Array of shape (count, size) whose rows are probability vectors
    """
    draws = rng.standard_exponential((count, size))
    return draws / draws.sum(axis=1, keepdims=True)


def project_to_simplex(y: np.ndarray) -> np.ndarray:
    """
    Euclidean projection of a vector onto the probability simplex

    Sort-based O(n log n) projection.

    Args:
        y: Input vector

    Returns:
        Closest probability vector to y
    """
    y = np.asarray(y, dtype=float)
    u = np.sort(y)[::-1]
    cssv = np.cumsum(u) - 1.0
    ind = np.arange(1, y.size + 1)
    rho = np.nonzero(u - cssv / ind > 0)[0][-1]
    theta = cssv[rho] / (rho + 1.0)
    return np.maximum(y - theta, 0.0)


def project_columns_to_simplex(matrix: np.ndarray) -> np.ndarray:
    """Project every column of a matrix onto the probability simplex"""
    return np.column_stack([project_to_simplex(col) for col in matrix.T])


def simplex_grid(size: int, divisions: int) -> np.ndarray:
    """
    Enumerate the regular grid on the probability simplex

    Args:
        size: Dimension of the probability vectors
        divisions: Number of grid steps per unit (grid step is 1/divisions)

    Returns:
        Array of shape (C(divisions+size-1, size-1), size) including all faces
    """
    points = []
    for bars in itertools.combinations(range(divisions + size - 1), size - 1):
        edges = (-1,) + bars + (divisions + size - 1,)
        points.append([edges[i + 1] - edges[i] - 1 for i in range(size)])
    return np.asarray(points, dtype=float) / divisions


def binomial(n: int, k: int) -> int:
    """
    Exact binomial coefficient with the convention C(n, k) = 0 outside 0 <= k <= n

    Args:
        n: Upper index
        k: Lower index

    Returns:
        The binomial coefficient as a Python integer
    """
    if k < 0 or n < 0 or k > n:
        return 0
    return int(comb(n, k, exact=True))


def parse_partition(text: str) -> Tuple[int, ...]:
    """
    Parse a comma separated fiber partition such as "2,1"

    Args:
        text: Comma separated positive integers, optional surrounding parentheses

    Returns:
        Tuple of fiber sizes
    """
    cleaned = text.strip().strip("()")
    if not cleaned:
        raise ValueError("empty partition")
    parts = tuple(int(part) for part in cleaned.split(","))
    if any(part < 1 for part in parts):
        raise ValueError(f"fiber sizes must be positive: {text!r}")
    return parts


def format_partition(fiber_sizes: Sequence[int]) -> str:
    """Format fiber sizes the way partitions are printed in tables: (2,1)"""
    return "(" + ",".join(str(d) for d in fiber_sizes) + ")"
