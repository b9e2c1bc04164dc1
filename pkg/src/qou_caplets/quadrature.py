"""Composite Simpson rules on uniform grids.

Plain and cumulative (prefix) variants.  Both keep a fixed left-to-right
summation order so repeated runs are bit-identical, which the experiment
pipeline relies on for byte-stable CSV output.

The cumulative rule integrates the local quadratic through each node triple:
even-indexed prefixes are ordinary composite Simpson sums; an odd-indexed
prefix adds the final sub-interval of the quadratic fitted to the last three
nodes.  Exact for polynomials up to degree 3 on the even prefixes and degree 2
on the odd ones.
"""

from __future__ import annotations

import numpy as np

from .errors import ArgumentError


def simpson_weights(n: int) -> np.ndarray:
    """Composite Simpson weights (1, 4, 2, ..., 4, 1) for n nodes, n odd >= 3.

    The returned weights must be scaled by h/3.
    """
    if n < 3 or n % 2 == 0:
        raise ArgumentError(f"Simpson rule needs an odd node count >= 3, got {n}")
    w = np.full(n, 2.0)
    w[1::2] = 4.0
    w[0] = w[-1] = 1.0
    return w


def simpson(values: np.ndarray, h: float, axis: int = -1) -> np.ndarray | float:
    """Integrate uniformly sampled values with composite Simpson.

    values may be real or complex; the node count along `axis` must be odd.
    """
    values = np.asarray(values)
    n = values.shape[axis]
    w = simpson_weights(n)
    shape = [1] * values.ndim
    shape[axis] = n
    out = np.sum(values * w.reshape(shape), axis=axis) * (h / 3.0)
    return out


def cumulative_simpson(values: np.ndarray, h: float) -> np.ndarray:
    """Prefix integrals F[i] = integral of the sampled function over [x0, xi].

    Works along the last axis; F[..., 0] = 0.  Interior odd-indexed entries
    use the quadratic through the trailing three nodes, so the prefix array is
    smooth enough to serve as the inner integral of nested (ordered) double
    integrals.
    """
    values = np.asarray(values)
    n = values.shape[-1]
    if n < 3 or n % 2 == 0:
        raise ArgumentError(f"cumulative Simpson needs an odd node count >= 3, got {n}")
    out = np.zeros(values.shape, dtype=values.dtype if values.dtype.kind == "c" else float)
    f = values
    # Even prefixes: standard Simpson pairs accumulated left to right.
    pair = (h / 3.0) * (f[..., 0:-2:2] + 4.0 * f[..., 1:-1:2] + f[..., 2::2])
    out[..., 2::2] = np.cumsum(pair, axis=-1)
    # Odd prefixes: even prefix plus the last sub-interval of the local
    # quadratic through nodes (i-1, i, i+1); for i = 1 use nodes (0, 1, 2).
    out[..., 1] = (h / 12.0) * (5.0 * f[..., 0] + 8.0 * f[..., 1] - f[..., 2])
    if n > 3:
        out[..., 3::2] = out[..., 2:-1:2] + (h / 12.0) * (
            -f[..., 1:-2:2] + 8.0 * f[..., 2:-1:2] + 5.0 * f[..., 3::2]
        )
    return out
